#include "doctest.h"

#include <cmath>
#include <cstdio>
#include <map>
#include <set>

#include "flexplan/datagen.hpp"

using namespace flexplan;

TEST_CASE("sample_scenario is deterministic per (seed, index)") {
    PhysParams phys;
    Scenario a = sample_scenario(9, 4, phys);
    Scenario b = sample_scenario(9, 4, phys);
    CHECK(a.link.l_span_km == b.link.l_span_km);
    CHECK(a.link.n_span == b.link.n_span);
    REQUIRE(a.spectrum.size() == b.spectrum.size());
    for (std::size_t i = 0; i < a.spectrum.size(); ++i) {
        CHECK(a.spectrum[i].center_frequency_hz == b.spectrum[i].center_frequency_hz);
        CHECK(a.spectrum[i].symbol_rate_gbd == b.spectrum[i].symbol_rate_gbd);
        CHECK(a.spectrum[i].launch_power_dbm == b.spectrum[i].launch_power_dbm);
    }
    Scenario c = sample_scenario(9, 5, phys);
    CHECK(a.spectrum.size() != c.spectrum.size());  // overwhelmingly likely
}

TEST_CASE("sampled parameters stay inside the parameter space") {
    PhysParams phys;
    std::set<double> span_lengths;
    for (int s = 0; s < 50; ++s) {
        Scenario sc = sample_scenario(31, (std::uint64_t)s, phys);
        span_lengths.insert(sc.link.l_span_km);
        CHECK(sc.link.n_span >= 1);
        CHECK(sc.link.n_span <= 50);
        CHECK(sc.fill_ratio >= 0.75);
        CHECK(sc.fill_ratio <= 0.95);
        for (const auto& ch : sc.spectrum) {
            CHECK(ch.symbol_rate_gbd >= 35.0 - 1e-9);
            CHECK(ch.symbol_rate_gbd <= 69.0 + 1e-9);
            CHECK(ch.data_rate_gbps >= 100);
            CHECK(ch.data_rate_gbps <= 600);
            CHECK(ch.data_rate_gbps % 50 == 0);
            CHECK(ch.launch_power_dbm ==
                  doctest::Approx(launch_power_for_dbm(ch.symbol_rate_gbd)));
        }
        check_channels_non_overlapping(sc.spectrum);
    }
    for (double l : span_lengths)
        CHECK((l == 60.0 || l == 80.0 || l == 100.0 || l == 120.0));
}

TEST_CASE("span length draw is uniform over the four values") {
    PhysParams phys;
    std::map<double, int> counts;
    const int n = 10000;
    for (int s = 0; s < n; ++s)
        counts[sample_scenario(77, (std::uint64_t)s, phys, 40).link.l_span_km]++;
    REQUIRE(counts.size() == 4);
    for (auto [l, c] : counts) {
        double freq = (double)c / n;
        CHECK(freq == doctest::Approx(0.25).epsilon(0.08));  // 0.25 +/- 0.02
    }
}

TEST_CASE("label_scenario emits one row per channel with shared SCI values") {
    PhysParams phys;
    Scenario sc = sample_scenario(5, 1, phys, 60);  // small grid keeps it fast
    int skipped = 0;
    auto rows = label_scenario(sc, phys, &skipped);
    CHECK(skipped == 0);
    REQUIRE(rows.size() == sc.spectrum.size());

    // CUT SCI of row i must reappear as a neighbor SCI in adjacent rows
    std::map<int, double> sci_of;
    for (const auto& row : rows) sci_of[row.cut_index] = row.features[0];
    for (const auto& row : rows) {
        CHECK(row.scenario_id == sc.id);
        CHECK(std::isfinite(row.eta_nli_db));
        CHECK(std::isfinite(row.eta_gn_db));
        auto neighbors = neighbors_by_distance(sc.spectrum, row.cut_index);
        for (std::size_t n = 0; n < neighbors.size(); ++n)
            CHECK(row.features[1 + n] == sci_of.at(neighbors[n]));
    }
}

TEST_CASE("split_dataset separates whole scenarios 70/10/20") {
    std::vector<LabeledRow> rows;
    for (std::uint64_t s = 0; s < 100; ++s)
        for (int c = 0; c < 3; ++c) {
            LabeledRow row;
            row.scenario_id = s;
            row.cut_index = c;
            rows.push_back(row);
        }
    SplitResult split = split_dataset(rows, 3);

    auto ids_of = [](const std::vector<LabeledRow>& part) {
        std::set<std::uint64_t> ids;
        for (const auto& row : part) ids.insert(row.scenario_id);
        return ids;
    };
    auto train_ids = ids_of(split.train), val_ids = ids_of(split.val), test_ids = ids_of(split.test);
    CHECK(train_ids.size() == 70);
    CHECK(val_ids.size() == 10);
    CHECK(test_ids.size() == 20);

    for (auto id : train_ids) {
        CHECK(!val_ids.count(id));
        CHECK(!test_ids.count(id));
    }
    for (auto id : val_ids) CHECK(!test_ids.count(id));

    SUBCASE("same seed reproduces the split") {
        SplitResult again = split_dataset(rows, 3);
        CHECK(ids_of(again.train) == train_ids);
        CHECK(ids_of(again.test) == test_ids);
    }
    SUBCASE("minimum size enforced") {
        std::vector<LabeledRow> tiny(rows.begin(), rows.begin() + 5);
        CHECK_THROWS_AS(split_dataset(tiny, 1), std::invalid_argument);
    }
}

TEST_CASE("dataset CSV round trip") {
    PhysParams phys;
    Scenario sc = sample_scenario(6, 2, phys, 60);
    auto rows = label_scenario(sc, phys);
    REQUIRE(!rows.empty());
    write_dataset("datagen_rt.csv", rows, {"test fixture"});
    auto loaded = read_dataset("datagen_rt.csv");
    REQUIRE(loaded.size() == rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        CHECK(loaded[i].scenario_id == rows[i].scenario_id);
        CHECK(loaded[i].cut_index == rows[i].cut_index);
        CHECK(loaded[i].eta_nli_db == rows[i].eta_nli_db);  // shortest-round-trip formatting
        CHECK(loaded[i].eta_gn_db == rows[i].eta_gn_db);
        CHECK(loaded[i].features == rows[i].features);
    }
    std::remove("datagen_rt.csv");
}

TEST_CASE("build_dataset is deterministic and parallel-schedule independent") {
    PhysParams phys;
    DatagenOptions options;
    options.n_scenarios = 3;
    options.seed = 21;
    options.phys = phys;
    options.n_slots = 60;  // desk-size grid keeps the oracle cheap

    options.threads = 1;
    BuildResult serial = build_dataset(options);
    options.threads = 2;
    BuildResult parallel = build_dataset(options);

    CHECK(serial.skipped_rows == 0);
    REQUIRE(serial.rows.size() == parallel.rows.size());
    for (std::size_t i = 0; i < serial.rows.size(); ++i) {
        CHECK(serial.rows[i].scenario_id == parallel.rows[i].scenario_id);
        CHECK(serial.rows[i].eta_nli_db == parallel.rows[i].eta_nli_db);
        CHECK(serial.rows[i].features == parallel.rows[i].features);
    }
    // rows arrive grouped by scenario, one row per channel
    std::map<std::uint64_t, int> per_scenario;
    for (const auto& row : serial.rows) per_scenario[row.scenario_id]++;
    CHECK(per_scenario.size() == 3);
}
