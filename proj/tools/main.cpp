// flexplan: batch driver for dataset generation, model training, estimator
// evaluation and multi-period planning studies.

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "flexplan/csv.hpp"
#include "flexplan/datagen.hpp"
#include "flexplan/gbt.hpp"
#include "flexplan/netmodel.hpp"
#include "flexplan/planner.hpp"
#include "flexplan/qot.hpp"

namespace {

using namespace flexplan;

Config load_config_file(const std::string& path) {
    if (path.empty()) return Config{};
    return Config::from_file(path);
}

std::string strip_csv_suffix(const std::string& path) {
    if (path.size() > 4 && path.substr(path.size() - 4) == ".csv")
        return path.substr(0, path.size() - 4);
    return path;
}

GbtHyperParams hyperparams_from_config(const Config& cfg) {
    GbtHyperParams hp;
    hp.n_trees = cfg.get_int("gbt_n_trees", hp.n_trees);
    hp.max_depth = cfg.get_int("gbt_max_depth", hp.max_depth);
    hp.learning_rate = cfg.get_double("gbt_learning_rate", hp.learning_rate);
    hp.lambda_l2 = cfg.get_double("gbt_lambda_l2", hp.lambda_l2);
    hp.min_child_weight = cfg.get_double("gbt_min_child_weight", hp.min_child_weight);
    hp.feature_subsample = cfg.get_double("gbt_feature_subsample", hp.feature_subsample);
    hp.row_subsample = cfg.get_double("gbt_row_subsample", hp.row_subsample);
    hp.early_stopping_patience = cfg.get_int("gbt_patience", hp.early_stopping_patience);
    return hp;
}

PlannerOptions planner_options_from_config(const Config& cfg) {
    PlannerOptions opt;
    opt.phys = PhysParams::from_config(cfg);
    opt.thresholds = SnrThresholdTable::from_config(cfg);
    opt.annual_growth = cfg.get_double("annual_growth", opt.annual_growth);
    opt.k_paths = cfg.get_int("k_paths", opt.k_paths);
    opt.target_span_km = cfg.get_double("target_span_km", opt.target_span_km);
    opt.n_slots = cfg.get_int("grid_slots", opt.n_slots);
    opt.planning_margin_db = cfg.get_double("planning_margin_db", opt.planning_margin_db);
    opt.eol_comb_spacing_ghz = cfg.get_double("eol_comb_spacing_ghz", opt.eol_comb_spacing_ghz);
    opt.eol_comb_symbol_rate_gbd =
        cfg.get_double("eol_comb_symbol_rate_gbd", opt.eol_comb_symbol_rate_gbd);
    return opt;
}

void require_file(const std::string& path, const std::string& what) {
    if (!std::filesystem::exists(path))
        throw std::runtime_error(what + " not found: " + path);
}

// --- gen-data ----------------------------------------------------------------

int cmd_gen_data(int scenarios, std::uint64_t seed, const std::string& out,
                 const std::string& config_path, int threads, bool verbose) {
    Config cfg = load_config_file(config_path);
    DatagenOptions options;
    options.n_scenarios = scenarios;
    options.seed = seed;
    options.threads = threads;
    options.phys = PhysParams::from_config(cfg);
    options.n_slots = cfg.get_int("grid_slots", options.n_slots);
    options.verbose = verbose;

    BuildResult built = build_dataset(options);
    SplitResult split = split_dataset(built.rows, seed);

    std::vector<std::string> comments = {
        "flexplan dataset",
        "scenarios=" + std::to_string(scenarios) + " seed=" + std::to_string(seed),
        "config: " + (cfg.summary().empty() ? std::string("(defaults)") : cfg.summary())};

    std::string prefix = strip_csv_suffix(out);
    write_dataset(prefix + "_train.csv", split.train, comments);
    write_dataset(prefix + "_val.csv", split.val, comments);
    write_dataset(prefix + "_test.csv", split.test, comments);

    std::cout << "generated " << built.rows.size() << " rows from " << built.n_scenarios
              << " scenarios (" << built.skipped_rows << " skipped)\n"
              << "train/val/test: " << split.train.size() << "/" << split.val.size() << "/"
              << split.test.size() << " rows -> " << prefix << "_{train,val,test}.csv\n";
    return 0;
}

// --- train --------------------------------------------------------------------

int cmd_train(const std::string& data, const std::string& config_path, const std::string& out,
              const std::string& report_path, std::uint64_t seed) {
    Config cfg = load_config_file(config_path);
    GbtHyperParams hp = hyperparams_from_config(cfg);

    std::vector<LabeledRow> train_rows;
    std::vector<LabeledRow> val_rows;
    if (std::filesystem::exists(data) && data.size() > 4 && data.substr(data.size() - 4) == ".csv") {
        train_rows = read_dataset(data);
    } else {
        std::string prefix = strip_csv_suffix(data);
        require_file(prefix + "_train.csv", "training dataset");
        train_rows = read_dataset(prefix + "_train.csv");
        if (std::filesystem::exists(prefix + "_val.csv"))
            val_rows = read_dataset(prefix + "_val.csv");
    }

    auto [model, report] = GbtModel::fit(to_matrix(train_rows), to_matrix(val_rows), hp, seed);
    model.save(out);

    if (!report_path.empty()) {
        CsvTable table;
        table.comments = {"flexplan training report", "seed=" + std::to_string(seed)};
        table.header = {"round", "train_rmse", "val_rmse"};
        for (std::size_t i = 0; i < report.train_rmse.size(); ++i)
            table.rows.push_back({std::to_string(i), format_double(report.train_rmse[i]),
                                  i < report.val_rmse.size() ? format_double(report.val_rmse[i])
                                                             : std::string()});
        write_csv(report_path, table);
    }

    std::cout << "trained " << model.n_trees() << " trees on " << train_rows.size() << " rows";
    if (!val_rows.empty())
        std::cout << ", best round " << report.best_round << " (val rmse "
                  << report.val_rmse[static_cast<std::size_t>(report.best_round)] << ")";
    std::cout << "\nmodel written to " << out << "\n";

    auto importance = model.importance();
    auto names = dataset_feature_names();
    std::vector<int> order(importance.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
    std::sort(order.begin(), order.end(), [&](int a, int b) {
        return importance[static_cast<std::size_t>(a)] > importance[static_cast<std::size_t>(b)];
    });
    std::cout << "top features by split gain:\n";
    for (int i = 0; i < 5 && i < static_cast<int>(order.size()); ++i) {
        int f = order[static_cast<std::size_t>(i)];
        std::cout << "  " << names[static_cast<std::size_t>(f)] << " "
                  << importance[static_cast<std::size_t>(f)] << "\n";
    }
    return 0;
}

// --- eval ----------------------------------------------------------------------

struct ErrorStats {
    double mean = 0.0;
    double stddev = 0.0;
    double mae = 0.0;
    double p99_abs = 0.0;
    double p99_signed = 0.0;
};

double percentile(std::vector<double> values, double q) {
    if (values.empty()) return 0.0;
    std::sort(values.begin(), values.end());
    std::size_t idx = static_cast<std::size_t>(
        std::ceil(q * static_cast<double>(values.size()))) - 1;
    idx = std::min(idx, values.size() - 1);
    return values[idx];
}

ErrorStats error_stats(const std::vector<double>& errors) {
    ErrorStats stats;
    if (errors.empty()) return stats;
    double n = static_cast<double>(errors.size());
    for (double e : errors) stats.mean += e;
    stats.mean /= n;
    std::vector<double> abs_errors;
    abs_errors.reserve(errors.size());
    for (double e : errors) {
        stats.stddev += (e - stats.mean) * (e - stats.mean);
        stats.mae += std::abs(e);
        abs_errors.push_back(std::abs(e));
    }
    stats.stddev = std::sqrt(stats.stddev / n);
    stats.mae /= n;
    stats.p99_abs = percentile(abs_errors, 0.99);
    stats.p99_signed = percentile(errors, 0.99);
    return stats;
}

// SNR of a test row reconstructed from its features: the PSD-equalized launch
// power encodes the symbol rate, span length and count are features.
double row_snr_db(const LabeledRow& row, double eta_db, const PhysParams& phys) {
    double p_dbm = row.features[21];
    double b_hz = 35.0e9 * std::pow(10.0, p_dbm / 10.0);
    FiberLink link = phys.make_link(row.features[23], static_cast<int>(row.features[24]));
    double p_w = dbm_to_w(p_dbm);
    NoiseBreakdown nb;
    nb.sigma2_ase_w = ase_variance_w(link, b_hz, phys.ref_frequency_hz);
    nb.sigma2_sci_w = db_to_lin(eta_db) * p_w * p_w * p_w;
    return combine_snr_db(p_w, nb);
}

int cmd_eval(const std::string& model_path, const std::string& data_path, const std::string& out,
             const std::string& config_path) {
    Config cfg = load_config_file(config_path);
    PhysParams phys = PhysParams::from_config(cfg);
    require_file(model_path, "model file");
    require_file(data_path, "dataset");
    GbtModel model = GbtModel::load(model_path);
    std::vector<LabeledRow> rows = read_dataset(data_path);
    if (rows.empty()) throw std::runtime_error("dataset has no rows: " + data_path);

    std::vector<double> err_ml, err_gn;
    err_ml.reserve(rows.size());
    err_gn.reserve(rows.size());
    for (const auto& row : rows) {
        double snr_ref = row_snr_db(row, row.eta_nli_db, phys);
        err_ml.push_back(row_snr_db(row, model.predict(row.features), phys) - snr_ref);
        err_gn.push_back(row_snr_db(row, row.eta_gn_db, phys) - snr_ref);
    }
    ErrorStats ml = error_stats(err_ml);
    ErrorStats gn = error_stats(err_gn);

    std::vector<std::string> comments = {"flexplan estimator evaluation",
                                         "model=" + model_path + " data=" + data_path,
                                         "errors are SNR deviations in dB vs the oracle labels"};
    CsvTable table;
    table.comments = comments;
    table.header = {"estimator", "rows", "mean_db", "std_db", "mae_db", "p99_abs_db",
                    "p99_signed_db"};
    table.rows.push_back({"ml", std::to_string(rows.size()), format_double(ml.mean),
                          format_double(ml.stddev), format_double(ml.mae),
                          format_double(ml.p99_abs), format_double(ml.p99_signed)});
    table.rows.push_back({"gn", std::to_string(rows.size()), format_double(gn.mean),
                          format_double(gn.stddev), format_double(gn.mae),
                          format_double(gn.p99_abs), format_double(gn.p99_signed)});
    write_csv(out, table);

    // CDF of absolute errors, plot-ready
    std::string base = strip_csv_suffix(out);
    std::vector<double> abs_ml, abs_gn;
    for (double e : err_ml) abs_ml.push_back(std::abs(e));
    for (double e : err_gn) abs_gn.push_back(std::abs(e));
    std::sort(abs_ml.begin(), abs_ml.end());
    std::sort(abs_gn.begin(), abs_gn.end());
    CsvTable cdf;
    cdf.comments = comments;
    cdf.header = {"abs_err_db", "cdf_ml", "cdf_gn"};
    double max_err = std::max(abs_ml.back(), abs_gn.back());
    int n_points = 200;
    for (int i = 0; i <= n_points; ++i) {
        double x = max_err * i / n_points;
        auto frac = [&](const std::vector<double>& v) {
            return static_cast<double>(std::upper_bound(v.begin(), v.end(), x) - v.begin()) /
                   static_cast<double>(v.size());
        };
        cdf.rows.push_back({format_double(x), format_double(frac(abs_ml)), format_double(frac(abs_gn))});
    }
    write_csv(base + "_cdf.csv", cdf);

    // signed-error histogram
    CsvTable hist;
    hist.comments = comments;
    hist.header = {"bin_lo_db", "bin_hi_db", "count_ml", "count_gn"};
    double lo = std::min(*std::min_element(err_ml.begin(), err_ml.end()),
                         *std::min_element(err_gn.begin(), err_gn.end()));
    double hi = std::max(*std::max_element(err_ml.begin(), err_ml.end()),
                         *std::max_element(err_gn.begin(), err_gn.end()));
    int n_bins = 80;
    double bin_w = (hi - lo) / n_bins;
    if (bin_w <= 0.0) bin_w = 1e-9;
    std::vector<int> counts_ml(static_cast<std::size_t>(n_bins), 0);
    std::vector<int> counts_gn(static_cast<std::size_t>(n_bins), 0);
    auto fill = [&](const std::vector<double>& errors, std::vector<int>& counts) {
        for (double e : errors) {
            int bin = std::clamp(static_cast<int>((e - lo) / bin_w), 0, n_bins - 1);
            ++counts[static_cast<std::size_t>(bin)];
        }
    };
    fill(err_ml, counts_ml);
    fill(err_gn, counts_gn);
    for (int b = 0; b < n_bins; ++b)
        hist.rows.push_back({format_double(lo + b * bin_w), format_double(lo + (b + 1) * bin_w),
                             std::to_string(counts_ml[static_cast<std::size_t>(b)]),
                             std::to_string(counts_gn[static_cast<std::size_t>(b)])});
    write_csv(base + "_hist.csv", hist);

    std::cout << "rows " << rows.size() << "\n"
              << "ml: mean " << ml.mean << " dB, std " << ml.stddev << " dB, mae " << ml.mae
              << " dB, p99 |err| " << ml.p99_abs << " dB\n"
              << "gn: mean " << gn.mean << " dB, std " << gn.stddev << " dB, mae " << gn.mae
              << " dB, p99 |err| " << gn.p99_abs << " dB\n"
              << "written: " << out << ", " << base << "_cdf.csv, " << base << "_hist.csv\n";
    return 0;
}

// --- plan ----------------------------------------------------------------------

int cmd_plan(const std::string& topology_path, const std::string& demands_path,
             const std::string& rcsa, const std::string& pce_name, int periods,
             const std::string& out, const std::string& model_path, const std::string& cache_path,
             const std::string& config_path, bool verbose) {
    Config cfg = load_config_file(config_path);
    require_file(topology_path, "topology");
    require_file(demands_path, "demand matrix");

    Topology topology = load_topology(topology_path);
    std::vector<Demand> demands = load_demands(demands_path, topology);

    PlannerOptions options = planner_options_from_config(cfg);
    options.rcsa = rcsa_from_name(rcsa);
    options.periods = periods;
    options.verbose = verbose;

    SciCache cache;
    if (!cache_path.empty() && std::filesystem::exists(cache_path))
        cache = SciCache::load(cache_path);

    std::unique_ptr<PathComputationElement> pce;
    GbtModel model;
    if (pce_name == "gn") {
        pce = std::make_unique<GnPce>(options.phys);
    } else if (pce_name == "ml") {
        if (model_path.empty()) throw std::runtime_error("plan --pce ml requires --model");
        require_file(model_path, "model file");
        model = GbtModel::load(model_path);
        pce = std::make_unique<MlPce>(model, cache, options.phys);
    } else {
        throw std::runtime_error("unknown pce: " + pce_name + " (expected gn|ml)");
    }

    StudyResult result = run_study(topology, demands, *pce, options);

    std::vector<std::string> comments = {
        "flexplan planning study",
        "topology=" + topology_path + " demands=" + demands_path,
        "rcsa=" + rcsa + " pce=" + pce_name + " periods=" + std::to_string(periods),
        "config: " + (cfg.summary().empty() ? std::string("(defaults)") : cfg.summary())};
    if (!result.unroutable_demands.empty()) {
        std::string ids;
        for (int id : result.unroutable_demands) ids += (ids.empty() ? "" : " ") + std::to_string(id);
        comments.push_back("unroutable demands: " + ids);
    }
    write_study_report(out, result, comments);

    if (!cache_path.empty()) cache.save(cache_path);

    if (result.reports.empty()) {
        std::cout << "study finished: 0 periods, report " << out << "\n";
    } else {
        const PeriodReport& last = result.reports.back();
        std::cout << "study finished: " << result.reports.size() << " periods, final UP " << last.up
                  << ", " << last.n_lightpaths << " lightpaths, report " << out << "\n";
    }
    return 0;
}

// --- compare --------------------------------------------------------------------

int cmd_compare(const std::string& a_path, const std::string& b_path, const std::string& out) {
    require_file(a_path, "report A");
    require_file(b_path, "report B");
    CsvTable a = read_csv(a_path);
    CsvTable b = read_csv(b_path);
    if (a.header != b.header)
        throw std::runtime_error("compare: reports have different columns");
    if (a.rows.size() != b.rows.size())
        throw std::runtime_error("compare: reports have different row counts");
    int period_col = a.column("period");
    if (period_col < 0) throw std::runtime_error("compare: reports lack a period column");

    CsvTable diff;
    diff.comments = {"flexplan report difference (B - A)", "A=" + a_path, "B=" + b_path};
    diff.header = a.header;
    for (std::size_t r = 0; r < a.rows.size(); ++r) {
        if (a.rows[r][static_cast<std::size_t>(period_col)] !=
            b.rows[r][static_cast<std::size_t>(period_col)])
            throw std::runtime_error("compare: period mismatch at row " + std::to_string(r));
        std::vector<std::string> row;
        for (std::size_t c = 0; c < a.header.size(); ++c) {
            if (static_cast<int>(c) == period_col) {
                row.push_back(a.rows[r][c]);
            } else {
                double va = std::stod(a.rows[r][c]);
                double vb = std::stod(b.rows[r][c]);
                row.push_back(format_double(vb - va));
            }
        }
        diff.rows.push_back(std::move(row));
    }
    write_csv(out, diff);
    std::cout << "difference table written to " << out << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"flex-grid optical network planning toolkit"};
    app.require_subcommand(1);

    // gen-data
    auto* gen = app.add_subcommand("gen-data", "sample scenarios, label them and write the split dataset");
    int gen_scenarios = 200;
    std::uint64_t gen_seed = 1;
    std::string gen_out, gen_config;
    int gen_threads = 0;
    bool gen_verbose = false;
    gen->add_option("--scenarios", gen_scenarios, "number of scenarios")->check(CLI::PositiveNumber);
    gen->add_option("--seed", gen_seed, "RNG seed");
    gen->add_option("--out", gen_out, "output path prefix")->required();
    gen->add_option("--config", gen_config, "config file");
    gen->add_option("--threads", gen_threads, "worker threads (0 = all cores)");
    gen->add_flag("--verbose", gen_verbose, "progress to stderr");

    // train
    auto* train = app.add_subcommand("train", "fit the NLI regressor on a dataset");
    std::string train_data, train_config, train_out, train_report;
    std::uint64_t train_seed = 1;
    train->add_option("--data", train_data, "dataset prefix (or a single train CSV)")->required();
    train->add_option("--config", train_config, "config file");
    train->add_option("--out", train_out, "model output path")->required();
    train->add_option("--report", train_report, "training report CSV");
    train->add_option("--seed", train_seed, "RNG seed");

    // eval
    auto* eval = app.add_subcommand("eval", "test-set error statistics for ML and GN estimators");
    std::string eval_model, eval_data, eval_out, eval_config;
    eval->add_option("--model", eval_model, "model file")->required();
    eval->add_option("--data", eval_data, "dataset CSV (e.g. the test split)")->required();
    eval->add_option("--out", eval_out, "statistics CSV")->required();
    eval->add_option("--config", eval_config, "config file");

    // plan
    auto* plan = app.add_subcommand("plan", "run a multi-period planning study");
    std::string plan_topology, plan_demands, plan_rcsa = "yearly", plan_pce = "gn";
    std::string plan_out, plan_model, plan_cache, plan_config;
    int plan_periods = 10;
    bool plan_verbose = false;
    plan->add_option("--topology", plan_topology, "topology JSON")->required();
    plan->add_option("--demands", plan_demands, "demand CSV")->required();
    plan->add_option("--rcsa", plan_rcsa, "eol|yearly|monthly");
    plan->add_option("--pce", plan_pce, "gn|ml");
    plan->add_option("--periods", plan_periods, "number of planning periods")
        ->check(CLI::NonNegativeNumber);
    plan->add_option("--out", plan_out, "report CSV")->required();
    plan->add_option("--model", plan_model, "model file (pce=ml)");
    plan->add_option("--cache", plan_cache, "SCI cache CSV, loaded if present and saved back");
    plan->add_option("--config", plan_config, "config file");
    plan->add_flag("--verbose", plan_verbose, "progress to stderr");

    // compare
    auto* compare = app.add_subcommand("compare", "difference table of two study reports");
    std::string cmp_a, cmp_b, cmp_out;
    compare->add_option("a", cmp_a, "report A")->required();
    compare->add_option("b", cmp_b, "report B")->required();
    compare->add_option("--out", cmp_out, "difference CSV")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (gen->parsed())
            return cmd_gen_data(gen_scenarios, gen_seed, gen_out, gen_config, gen_threads,
                                gen_verbose);
        if (train->parsed())
            return cmd_train(train_data, train_config, train_out, train_report, train_seed);
        if (eval->parsed()) return cmd_eval(eval_model, eval_data, eval_out, eval_config);
        if (plan->parsed())
            return cmd_plan(plan_topology, plan_demands, plan_rcsa, plan_pce, plan_periods,
                            plan_out, plan_model, plan_cache, plan_config, plan_verbose);
        if (compare->parsed()) return cmd_compare(cmp_a, cmp_b, cmp_out);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
