#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "flexplan/grid.hpp"
#include "flexplan/netmodel.hpp"
#include "flexplan/phys.hpp"
#include "flexplan/qot.hpp"

namespace flexplan {

enum class RcsaMode { Eol, Yearly, Monthly };

RcsaMode rcsa_from_name(const std::string& name);
const char* rcsa_name(RcsaMode mode);

struct Lightpath {
    std::int64_t id = 0;
    int demand_id = 0;
    std::vector<int> path_nodes;
    std::vector<std::string> link_ids;
    SlotRange slots;  // identical contiguous range on every traversed link
    ChannelConfig config;
    bool downgraded = false;
    bool active = true;
    double last_snr_db = 0.0;
};

struct PlanState {
    std::map<std::string, FlexGrid> grids;      // per link id
    std::map<std::string, FiberLink> links;     // per link id, span-expanded
    std::vector<Lightpath> lightpaths;          // removed ones keep their slot for audit history
    SciCache* sci_cache = nullptr;              // owned by the caller alongside the PCE
    int period = 0;
    std::int64_t next_lightpath_id = 0;
    // end-of-life SNR per (link id, menu entry), filled on demand
    std::map<std::pair<std::string, int>, double> eol_snr_cache;

    // Occupied spectrum of one link, sorted by center frequency, with the
    // owning lightpath ids in matching order.
    std::pair<std::vector<ChannelConfig>, std::vector<std::int64_t>> spectrum_of(
        const std::string& link_id) const;

    double provisioned_gbps(int demand_id) const;
    int active_count() const;

    // Cross-checks grids against lightpaths in both directions; throws
    // std::logic_error on any inconsistency.
    void audit() const;
};

struct PeriodReport {
    int period = 0;
    double art_gbps = 0.0;
    double throughput_gbps = 0.0;
    int n_lightpaths = 0;
    double up = 0.0;
    double mean_snr_db = 0.0;
    std::uint64_t pce_calls = 0;
    double wall_time_s = 0.0;
};

struct PlannerOptions {
    RcsaMode rcsa = RcsaMode::Yearly;
    int periods = 10;
    double annual_growth = 0.30;
    int k_paths = 3;
    double target_span_km = 80.0;
    int n_slots = kDefaultSlotCount;
    double planning_margin_db = 0.0;
    double eol_comb_spacing_ghz = 50.0;
    double eol_comb_symbol_rate_gbd = 35.0;
    PhysParams phys;
    SnrThresholdTable thresholds = SnrThresholdTable::standard();
    bool verbose = false;
};

struct StudyResult {
    std::vector<PeriodReport> reports;
    std::vector<int> unroutable_demands;
    int n_downgraded = 0;
    int n_removed = 0;
};

// --- routing -------------------------------------------------------------

struct RoutedPath {
    std::vector<int> nodes;
    double length_km = 0.0;
};

// Yen's loopless k-shortest paths over km weights, sorted by length with
// lexicographic node-sequence tie-break.
std::vector<RoutedPath> k_shortest_paths(const Topology& topology, int src, int dst, int k);

// Demand indices sorted by decreasing first-shortest-path length; ties by
// requested rate descending, then demand id. Unroutable demands are dropped
// and reported separately.
std::vector<int> order_demands(const std::vector<Demand>& demands, const Topology& topology,
                               const std::vector<double>& rates,
                               std::vector<int>* unroutable = nullptr);

// --- per-demand configuration selection -----------------------------------

// Feasible transceiver configurations covering `gap_gbps` on `path`:
// smallest lightpath count first, then per-lightpath rates maximal subject
// to the total meeting the gap. Feasibility is judged against end-of-life
// SNR (fully loaded C-band comb) in Eol mode and against ASE-only SNR
// otherwise. Empty result means the demand is underprovisionable here.
std::vector<TransceiverMode> select_candidates(double gap_gbps, const RoutedPath& path,
                                               const Topology& topology, RcsaMode mode,
                                               PathComputationElement& pce, PlanState& state,
                                               const PlannerOptions& options);

// First-fit placement across all links of the path (spectrum continuity and
// contiguity). Returns the new lightpath id, or nullopt when blocked.
std::optional<std::int64_t> place_lightpath(PlanState& state, int demand_id,
                                            const RoutedPath& path, const Topology& topology,
                                            const TransceiverMode& mode,
                                            const PlannerOptions& options);

struct DowngradeStats {
    int downgraded = 0;
    int removed = 0;
    int iterations = 0;
};

// Re-evaluates every active lightpath with the PCE, steps infeasible ones
// down through same-footprint-or-smaller configurations by descending rate,
// removes them when nothing fits, and iterates to a fixed point.
DowngradeStats downgrade_pass(PlanState& state, PathComputationElement& pce,
                              const PlannerOptions& options);

// Underprovisioning ratio: unmet shortfall summed over demands whose
// provisioned rate falls short, normalized by aggregate requested traffic.
double up_ratio(const std::vector<double>& requested_gbps,
                const std::vector<double>& provisioned_gbps);

// --- study driver ---------------------------------------------------------

StudyResult run_study(const Topology& topology, const std::vector<Demand>& demands,
                      PathComputationElement& pce, const PlannerOptions& options,
                      PlanState* final_state = nullptr);

// Deterministic study report; wall-clock timings go to a sidecar file
// `<path minus .csv>.times.csv` so identical runs produce identical reports.
void write_study_report(const std::string& path, const StudyResult& result,
                        const std::vector<std::string>& comments);

}  // namespace flexplan
