#include "flexplan/datagen.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <iostream>
#include <map>
#include <thread>

#include "flexplan/csv.hpp"
#include "flexplan/gn_integral.hpp"
#include "flexplan/rng.hpp"

namespace flexplan {

Scenario sample_scenario(std::uint64_t seed, std::uint64_t index, const PhysParams& phys,
                         int n_slots) {
    static const std::vector<double> kSpanLengths = {60.0, 80.0, 100.0, 120.0};
    Rng rng = Rng::stream(seed, index);

    Scenario scenario;
    scenario.id = index;
    double l_span = rng.pick(kSpanLengths);
    int n_span = static_cast<int>(rng.uniform_int(1, 50));
    scenario.link = phys.make_link(l_span, n_span);

    const double target_fill = rng.uniform(0.75, 0.95);
    const int target_slots = static_cast<int>(std::lround(target_fill * n_slots));
    const int cap_slots = static_cast<int>(std::floor(0.95 * n_slots + 1e-9));
    const std::vector<TransceiverMode> menu =
        transceiver_menu(phys.guard_band_ghz, phys.menu_round_down);

    FlexGrid grid(n_slots);
    std::int64_t next_id = 0;
    while (grid.occupied_count() < target_slots) {
        const TransceiverMode& mode = rng.pick(menu);
        if (grid.occupied_count() + mode.slots > cap_slots) break;
        auto range = grid.first_fit(mode.slots);
        if (!range) break;
        grid.place(next_id++, *range);
        scenario.spectrum.push_back(ChannelConfig{slot_range_center_hz(*range),
                                                  mode.symbol_rate_gbd, mode.modulation,
                                                  mode.data_rate_gbps,
                                                  launch_power_for_dbm(mode.symbol_rate_gbd)});
    }
    scenario.fill_ratio = static_cast<double>(grid.occupied_count()) / n_slots;
    return scenario;
}

std::vector<LabeledRow> label_scenario(const Scenario& scenario, const PhysParams& phys,
                                       int* skipped) {
    const std::string link_id = "scenario";
    QuadratureSpec spec{phys.quad_tol_db, phys.quad_resolution};
    GnIntegralOracle oracle(scenario.link, spec);

    // SCI per channel, computed once and reused across every CUT row. SCI is
    // translation invariant, so distinct (symbol rate, power) pairs suffice.
    SciCache cache;
    std::map<std::pair<double, double>, double> memo;
    for (const ChannelConfig& ch : scenario.spectrum) {
        auto key = std::make_pair(ch.symbol_rate_gbd, ch.launch_power_dbm);
        auto it = memo.find(key);
        if (it == memo.end()) {
            double eta = oracle.eta_db({ch}, 0, NliMode::SciOnly);
            it = memo.emplace(key, sci_dbm_from_eta(eta, ch.launch_power_dbm)).first;
        }
        cache.put(SciKey{link_id, ch.center_frequency_hz, ch.symbol_rate_gbd, ch.launch_power_dbm},
                  it->second);
    }

    std::vector<LabeledRow> rows;
    rows.reserve(scenario.spectrum.size());
    for (int cut = 0; cut < static_cast<int>(scenario.spectrum.size()); ++cut) {
        LabeledRow row;
        row.scenario_id = scenario.id;
        row.cut_index = cut;
        try {
            row.eta_nli_db = oracle.eta_db(scenario.spectrum, cut, NliMode::Total);
        } catch (const QuadratureError& e) {
            if (skipped) ++(*skipped);
            std::cerr << "datagen: skipping scenario " << scenario.id << " cut " << cut << ": "
                      << e.what() << "\n";
            continue;
        }
        row.features = features_for(link_id, scenario.link, scenario.spectrum, cut, cache);
        row.eta_gn_db = gn_closed_eta_db(scenario.link, scenario.spectrum, cut).eta_db;
        rows.push_back(row);
    }
    return rows;
}

BuildResult build_dataset(const DatagenOptions& options) {
    if (options.n_scenarios < 1) throw std::invalid_argument("build_dataset: need at least one scenario");
    int n_threads = options.threads > 0 ? options.threads
                                        : std::max(1u, std::thread::hardware_concurrency());
    n_threads = std::min<int>(n_threads, options.n_scenarios);

    std::vector<std::vector<LabeledRow>> per_scenario(static_cast<std::size_t>(options.n_scenarios));
    std::atomic<int> next{0};
    std::atomic<int> skipped{0};

    auto worker = [&] {
        for (;;) {
            int idx = next.fetch_add(1);
            if (idx >= options.n_scenarios) return;
            Scenario scenario = sample_scenario(options.seed, static_cast<std::uint64_t>(idx),
                                                options.phys, options.n_slots);
            int local_skipped = 0;
            per_scenario[static_cast<std::size_t>(idx)] =
                label_scenario(scenario, options.phys, &local_skipped);
            skipped += local_skipped;
            if (options.verbose)
                std::cerr << "datagen: scenario " << idx << " done, " << scenario.spectrum.size()
                          << " channels\n";
        }
    };

    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(n_threads));
    for (int t = 0; t < n_threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();

    BuildResult result;
    result.n_scenarios = options.n_scenarios;
    result.skipped_rows = skipped.load();
    for (const auto& rows : per_scenario)
        result.rows.insert(result.rows.end(), rows.begin(), rows.end());
    return result;
}

SplitResult split_dataset(const std::vector<LabeledRow>& rows, std::uint64_t seed) {
    if (rows.size() < 10) throw std::invalid_argument("split_dataset: need at least 10 rows");
    std::vector<std::uint64_t> ids;
    for (const auto& row : rows)
        if (ids.empty() || std::find(ids.begin(), ids.end(), row.scenario_id) == ids.end())
            ids.push_back(row.scenario_id);
    std::sort(ids.begin(), ids.end());

    Rng rng(seed);
    rng.shuffle(ids);
    std::size_t n = ids.size();
    std::size_t n_train = static_cast<std::size_t>(std::lround(0.70 * static_cast<double>(n)));
    n_train = std::clamp<std::size_t>(n_train, 1, n);
    std::size_t n_val = static_cast<std::size_t>(std::lround(0.10 * static_cast<double>(n)));
    // keep at least one test scenario whenever more than one exists
    if (n > 1 && n_train + n_val > n - 1) n_val = n - 1 > n_train ? n - 1 - n_train : 0;
    if (n > 1 && n_train > n - 1) n_train = n - 1;

    std::map<std::uint64_t, int> part;  // 0 train, 1 val, 2 test
    for (std::size_t i = 0; i < n; ++i)
        part[ids[i]] = i < n_train ? 0 : (i < n_train + n_val ? 1 : 2);

    SplitResult split;
    for (const auto& row : rows) {
        switch (part.at(row.scenario_id)) {
            case 0: split.train.push_back(row); break;
            case 1: split.val.push_back(row); break;
            default: split.test.push_back(row); break;
        }
    }
    return split;
}

std::vector<std::string> dataset_feature_names() {
    std::vector<std::string> names;
    names.push_back("sci_cut_dbm");
    for (int i = 1; i <= kNeighborCount; ++i) names.push_back("sci_n" + std::to_string(i) + "_dbm");
    for (int i = 1; i <= kNeighborCount; ++i) names.push_back("dist_n" + std::to_string(i) + "_ghz");
    names.push_back("p_tx_dbm");
    names.push_back("n_ch");
    names.push_back("l_span_km");
    names.push_back("n_span");
    return names;
}

void write_dataset(const std::string& path, const std::vector<LabeledRow>& rows,
                   const std::vector<std::string>& comments) {
    CsvTable table;
    table.comments = comments;
    table.header = {"scenario_id", "cut_index"};
    for (const auto& name : dataset_feature_names()) table.header.push_back(name);
    table.header.push_back("eta_nli_db");
    table.header.push_back("eta_gn_db");
    for (const auto& row : rows) {
        std::vector<std::string> fields;
        fields.reserve(table.header.size());
        fields.push_back(std::to_string(row.scenario_id));
        fields.push_back(std::to_string(row.cut_index));
        for (double v : row.features) fields.push_back(format_double(v));
        fields.push_back(format_double(row.eta_nli_db));
        fields.push_back(format_double(row.eta_gn_db));
        table.rows.push_back(std::move(fields));
    }
    write_csv(path, table);
}

std::vector<LabeledRow> read_dataset(const std::string& path) {
    CsvTable table = read_csv(path);
    std::vector<std::string> required = {"scenario_id", "cut_index", "eta_nli_db", "eta_gn_db"};
    auto names = dataset_feature_names();
    required.insert(required.end(), names.begin(), names.end());
    table.require_columns(required);

    std::vector<int> feature_cols;
    for (const auto& name : names) feature_cols.push_back(table.column(name));
    int col_sid = table.column("scenario_id");
    int col_cut = table.column("cut_index");
    int col_label = table.column("eta_nli_db");
    int col_gn = table.column("eta_gn_db");

    std::vector<LabeledRow> rows;
    rows.reserve(table.rows.size());
    for (const auto& fields : table.rows) {
        LabeledRow row;
        row.scenario_id = std::stoull(fields[static_cast<std::size_t>(col_sid)]);
        row.cut_index = std::stoi(fields[static_cast<std::size_t>(col_cut)]);
        for (int i = 0; i < kFeatureWidth; ++i)
            row.features[static_cast<std::size_t>(i)] =
                std::stod(fields[static_cast<std::size_t>(feature_cols[static_cast<std::size_t>(i)])]);
        row.eta_nli_db = std::stod(fields[static_cast<std::size_t>(col_label)]);
        row.eta_gn_db = std::stod(fields[static_cast<std::size_t>(col_gn)]);
        rows.push_back(row);
    }
    return rows;
}

DataMatrix to_matrix(const std::vector<LabeledRow>& rows) {
    DataMatrix m;
    m.width = kFeatureWidth;
    for (const auto& row : rows) m.add_row(row.features, row.eta_nli_db);
    return m;
}

}  // namespace flexplan
