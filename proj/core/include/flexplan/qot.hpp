#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "flexplan/gbt.hpp"
#include "flexplan/gn_integral.hpp"
#include "flexplan/grid.hpp"
#include "flexplan/phys.hpp"

namespace flexplan {

inline constexpr int kFeatureWidth = 25;
inline constexpr int kNeighborCount = 10;

// Model input layout, fixed across the toolkit:
//   [0]      SCI of the CUT, dBm (whole-link accumulated)
//   [1..10]  SCI of the 10 closest neighbors, dBm, nearest first, 0-padded
//   [11..20] |distance| of those neighbors to the CUT, GHz, same order, 0-padded
//   [21]     CUT launch power, dBm
//   [22]     number of channels on the link
//   [23]     span length, km
//   [24]     span count
using NliFeatureVector = std::array<double, kFeatureWidth>;

struct SciKey {
    std::string link_id;
    double center_frequency_hz = 0.0;
    double symbol_rate_gbd = 0.0;
    double launch_power_dbm = 0.0;

    auto operator<=>(const SciKey&) const = default;
};

class SciCacheMissError : public std::runtime_error {
public:
    explicit SciCacheMissError(const std::string& what) : std::runtime_error(what) {}
};

// Stored per-channel self-interference power in dBm. Entries are immutable:
// adding lightpaths never changes the SCI of an existing channel, so values
// are written once and reused.
class SciCache {
public:
    std::optional<double> get(const SciKey& key) const;
    void put(const SciKey& key, double sci_dbm);
    std::size_t size() const { return entries_.size(); }
    std::uint64_t misses() const { return misses_; }
    std::uint64_t hits() const { return hits_; }

    void save(const std::string& path) const;
    static SciCache load(const std::string& path);

private:
    std::map<SciKey, double> entries_;
    mutable std::uint64_t misses_ = 0;
    mutable std::uint64_t hits_ = 0;
};

// Computes the SCI (dBm) of one channel on one link when the cache misses.
using SciComputeFn = std::function<double(const FiberLink&, const ChannelConfig&)>;

// Assembles the model input for one CUT. SCI values come from the cache;
// on a miss they are computed via `compute` and stored, or a
// SciCacheMissError is raised when no compute function is given.
NliFeatureVector features_for(const std::string& link_id, const FiberLink& link,
                              const std::vector<ChannelConfig>& spectrum, int cut_index,
                              SciCache& cache, const SciComputeFn& compute = nullptr);

// SCI power of a channel in dBm given its NLI coefficient in dB.
double sci_dbm_from_eta(double eta_db, double launch_power_dbm);

// Path computation element: per-link QoT evaluation behind one interface so
// the planner runs unmodified with either NLI solver.
class PathComputationElement {
public:
    virtual ~PathComputationElement() = default;

    // Per-channel SNR in dB for the given occupied spectrum on one link.
    virtual std::vector<double> evaluate(const std::string& link_id, const FiberLink& link,
                                         const std::vector<ChannelConfig>& spectrum) = 0;
    virtual std::string name() const = 0;

    std::uint64_t call_count() const { return calls_; }

protected:
    std::uint64_t calls_ = 0;
};

// Closed-form GN baseline PCE.
class GnPce : public PathComputationElement {
public:
    explicit GnPce(const PhysParams& params) : params_(params) {}
    std::vector<double> evaluate(const std::string& link_id, const FiberLink& link,
                                 const std::vector<ChannelConfig>& spectrum) override;
    std::string name() const override { return "GN"; }

private:
    PhysParams params_;
};

// Divide-and-conquer ML PCE: per-channel SCI from the integral oracle
// (cached), total NLI from the regression model, ASE analytically.
class MlPce : public PathComputationElement {
public:
    MlPce(const GbtModel& model, SciCache& cache, const PhysParams& params);
    ~MlPce() override;

    std::vector<double> evaluate(const std::string& link_id, const FiberLink& link,
                                 const std::vector<ChannelConfig>& spectrum) override;
    std::string name() const override { return "ML"; }

    // SCI of `channel` on `link` in dBm, through the cache.
    double channel_sci_dbm(const std::string& link_id, const FiberLink& link,
                           const ChannelConfig& channel);

    SciCache& cache() { return cache_; }

private:
    struct OracleSet;
    double compute_sci_dbm(const FiberLink& link, const ChannelConfig& channel);

    const GbtModel& model_;
    SciCache& cache_;
    PhysParams params_;
    std::unique_ptr<OracleSet> oracles_;
};

}  // namespace flexplan
