#include "doctest.h"

#include <array>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>

#include "flexplan/csv.hpp"
#include "flexplan/datagen.hpp"
#include "flexplan/gbt.hpp"

using namespace flexplan;

namespace {

const std::string kCli = FLEXPLAN_CLI_PATH;
const std::string kDataDir = FLEXPLAN_DATA_DIR;

struct CommandResult {
    int exit_code = 0;
    std::string output;
};

CommandResult run_cli(const std::string& args) {
    std::string cmd = kCli + " " + args + " 2>&1";
    std::array<char, 512> buf{};
    std::string output;
    FILE* pipe = popen(cmd.c_str(), "r");
    REQUIRE(pipe != nullptr);
    while (fgets(buf.data(), buf.size(), pipe)) output += buf.data();
    int status = pclose(pipe);
    return CommandResult{WEXITSTATUS(status), output};
}

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    return std::string(std::istreambuf_iterator<char>(in), {});
}

struct TempDir {
    std::filesystem::path path;
    TempDir() {
        path = std::filesystem::temp_directory_path() / "flexplan_cli_test";
        std::filesystem::remove_all(path);
        std::filesystem::create_directories(path);
    }
    ~TempDir() { std::filesystem::remove_all(path); }
    std::string operator/(const std::string& name) const { return (path / name).string(); }
};

}  // namespace

TEST_CASE("usage errors exit nonzero without stack traces") {
    auto bad_flag = run_cli("plan --no-such-flag");
    CHECK(bad_flag.exit_code != 0);
    CHECK(bad_flag.output.find("terminate") == std::string::npos);

    auto bad_sub = run_cli("replan");
    CHECK(bad_sub.exit_code != 0);

    auto missing_file = run_cli("plan --topology /nonexistent.json --demands /nonexistent.csv --out /tmp/x.csv");
    CHECK(missing_file.exit_code != 0);
    CHECK(missing_file.output.find("error:") != std::string::npos);
    CHECK(missing_file.output.find("terminate") == std::string::npos);

    auto no_model = run_cli("eval --model /nonexistent.json --data /nonexistent.csv --out /tmp/x.csv");
    CHECK(no_model.exit_code != 0);
}

TEST_CASE("plan runs are reproducible and comparable") {
    TempDir tmp;
    std::string topo = kDataDir + "/topologies/triangle3.json";
    std::string dem = kDataDir + "/demands/triangle3.csv";

    auto a = run_cli("plan --topology " + topo + " --demands " + dem +
                     " --rcsa yearly --pce gn --periods 2 --out " + (tmp / "a.csv"));
    REQUIRE(a.exit_code == 0);
    auto b = run_cli("plan --topology " + topo + " --demands " + dem +
                     " --rcsa yearly --pce gn --periods 2 --out " + (tmp / "b.csv"));
    REQUIRE(b.exit_code == 0);
    CHECK(slurp(tmp / "a.csv") == slurp(tmp / "b.csv"));

    // timings live in the sidecar, not the report
    CHECK(std::filesystem::exists(tmp / "a.times.csv"));
    CHECK(slurp(tmp / "a.csv").find("wall_time") == std::string::npos);

    SUBCASE("compare of a run against itself is all zeros") {
        auto cmp = run_cli("compare " + (tmp / "a.csv") + " " + (tmp / "b.csv") + " --out " +
                           (tmp / "diff.csv"));
        REQUIRE(cmp.exit_code == 0);
        CsvTable diff = read_csv(tmp / "diff.csv");
        for (const auto& row : diff.rows)
            for (std::size_t c = 1; c < row.size(); ++c) CHECK(std::stod(row[c]) == 0.0);
    }
}

TEST_CASE("gen-data / train / eval round trip at desk scale") {
    TempDir tmp;
    // tiny grid via config keeps the oracle labeling fast
    std::string cfg_path = tmp / "tiny.cfg";
    {
        std::ofstream cfg(cfg_path);
        cfg << "grid_slots = 60\ngbt_n_trees = 40\ngbt_patience = 40\n";
    }
    auto gen = run_cli("gen-data --scenarios 12 --seed 5 --out " + (tmp / "ds") + " --config " +
                       cfg_path + " --threads 2");
    REQUIRE(gen.exit_code == 0);
    REQUIRE(std::filesystem::exists(tmp / "ds_train.csv"));
    REQUIRE(std::filesystem::exists(tmp / "ds_val.csv"));
    REQUIRE(std::filesystem::exists(tmp / "ds_test.csv"));

    // config echoed into the artifact header
    CHECK(slurp(tmp / "ds_train.csv").find("grid_slots=60") != std::string::npos);

    auto train = run_cli("train --data " + (tmp / "ds") + " --config " + cfg_path + " --out " +
                         (tmp / "model.json") + " --report " + (tmp / "train_report.csv") +
                         " --seed 5");
    REQUIRE(train.exit_code == 0);
    REQUIRE(std::filesystem::exists(tmp / "model.json"));
    CHECK(std::filesystem::exists(tmp / "train_report.csv"));

    auto eval = run_cli("eval --model " + (tmp / "model.json") + " --data " + (tmp / "ds_test.csv") +
                        " --out " + (tmp / "eval.csv"));
    REQUIRE(eval.exit_code == 0);
    CsvTable stats = read_csv(tmp / "eval.csv");
    stats.require_columns({"estimator", "mae_db", "p99_abs_db"});
    REQUIRE(stats.rows.size() == 2);
    CHECK(std::filesystem::exists(tmp / "eval_cdf.csv"));
    CHECK(std::filesystem::exists(tmp / "eval_hist.csv"));

    SUBCASE("the trained model drives an ml-pce planning run") {
        std::string topo = kDataDir + "/topologies/triangle3.json";
        std::string dem = kDataDir + "/demands/triangle3.csv";
        auto plan = run_cli("plan --topology " + topo + " --demands " + dem +
                            " --rcsa yearly --pce ml --model " + (tmp / "model.json") +
                            " --cache " + (tmp / "sci.csv") + " --periods 1 --out " +
                            (tmp / "ml_plan.csv"));
        REQUIRE(plan.exit_code == 0);
        CHECK(std::filesystem::exists(tmp / "sci.csv"));  // persisted cache
    }
}

TEST_CASE("eval on a perfect predictor reports zero error") {
    TempDir tmp;
    // constant labels; a single-leaf model with that base score predicts
    // every row exactly
    std::vector<LabeledRow> rows;
    for (int i = 0; i < 40; ++i) {
        LabeledRow row;
        row.scenario_id = (std::uint64_t)i / 4;
        row.cut_index = i % 4;
        row.features.fill(0.0);
        row.features[21] = 0.0;   // 0 dBm -> 35 GBd
        row.features[23] = 80.0;  // L_span
        row.features[24] = 10.0;  // N_span
        row.eta_nli_db = 25.0;
        row.eta_gn_db = 24.5;
        rows.push_back(row);
    }
    write_dataset(tmp / "perfect.csv", rows, {});
    GbtModel model = GbtModel::from_parts(kFeatureWidth, 25.0, 1.0, {});
    model.save(tmp / "perfect_model.json");

    auto eval = run_cli("eval --model " + (tmp / "perfect_model.json") + " --data " +
                        (tmp / "perfect.csv") + " --out " + (tmp / "stats.csv"));
    REQUIRE(eval.exit_code == 0);
    CsvTable stats = read_csv(tmp / "stats.csv");
    int mae_col = stats.column("mae_db");
    int p99_col = stats.column("p99_abs_db");
    int mean_col = stats.column("mean_db");
    REQUIRE(stats.rows[0][0] == "ml");
    CHECK(std::stod(stats.rows[0][(std::size_t)mae_col]) == 0.0);
    CHECK(std::stod(stats.rows[0][(std::size_t)p99_col]) == 0.0);
    CHECK(std::stod(stats.rows[0][(std::size_t)mean_col]) == 0.0);
    // the deliberately biased gn column is nonzero
    CHECK(std::stod(stats.rows[1][(std::size_t)mae_col]) > 0.0);
}
