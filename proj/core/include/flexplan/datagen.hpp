#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "flexplan/gbt.hpp"
#include "flexplan/phys.hpp"
#include "flexplan/qot.hpp"

namespace flexplan {

// One randomly drawn link-plus-spectrum configuration.
struct Scenario {
    std::uint64_t id = 0;
    FiberLink link;
    std::vector<ChannelConfig> spectrum;
    double fill_ratio = 0.0;  // occupied 12.5 GHz slots over total slots
};

struct LabeledRow {
    std::uint64_t scenario_id = 0;
    int cut_index = 0;
    NliFeatureVector features{};
    double eta_nli_db = 0.0;  // oracle total NLI coefficient (the label)
    double eta_gn_db = 0.0;   // closed-form GN coefficient for the same CUT
};

struct DatagenOptions {
    int n_scenarios = 200;
    std::uint64_t seed = 1;
    int n_slots = kDefaultSlotCount;
    int threads = 0;  // 0 = hardware concurrency
    PhysParams phys;
    bool verbose = false;
};

// Scenario `index` of the run seeded with `seed`: span length uniform over
// {60,80,100,120} km, span count uniform 1..50, channels drawn uniformly
// from the transceiver menu and packed first-fit until the drawn fill target
// in [0.75, 0.95] is reached. Deterministic per (seed, index).
Scenario sample_scenario(std::uint64_t seed, std::uint64_t index, const PhysParams& phys,
                         int n_slots = kDefaultSlotCount);

// One labeled row per channel of the scenario. Per-channel SCI is computed
// once and shared by every CUT row; rows whose oracle evaluation fails to
// converge are skipped and counted.
std::vector<LabeledRow> label_scenario(const Scenario& scenario, const PhysParams& phys,
                                       int* skipped = nullptr);

struct BuildResult {
    std::vector<LabeledRow> rows;
    int n_scenarios = 0;
    int skipped_rows = 0;
};

BuildResult build_dataset(const DatagenOptions& options);

struct SplitResult {
    std::vector<LabeledRow> train;
    std::vector<LabeledRow> val;
    std::vector<LabeledRow> test;
};

// 70/10/20 split by scenario id (never by row), deterministic per seed.
SplitResult split_dataset(const std::vector<LabeledRow>& rows, std::uint64_t seed);

std::vector<std::string> dataset_feature_names();
void write_dataset(const std::string& path, const std::vector<LabeledRow>& rows,
                   const std::vector<std::string>& comments);
std::vector<LabeledRow> read_dataset(const std::string& path);

// Feature matrix plus label vector for the learner.
DataMatrix to_matrix(const std::vector<LabeledRow>& rows);

}  // namespace flexplan
