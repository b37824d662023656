#include "flexplan/gbt.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "flexplan/rng.hpp"
#include "json.hpp"

namespace flexplan {

void DataMatrix::add_row(std::span<const double> features, double label) {
    if (width == 0) width = static_cast<int>(features.size());
    if (static_cast<int>(features.size()) != width)
        throw std::invalid_argument("DataMatrix: inconsistent feature width");
    x.insert(x.end(), features.begin(), features.end());
    y.push_back(label);
}

double Tree::predict(std::span<const double> features) const {
    int idx = 0;
    while (!nodes[static_cast<std::size_t>(idx)].is_leaf()) {
        const TreeNode& n = nodes[static_cast<std::size_t>(idx)];
        idx = features[static_cast<std::size_t>(n.feature)] < n.threshold ? n.left : n.right;
    }
    return nodes[static_cast<std::size_t>(idx)].value;
}

namespace {

double mse(const std::vector<double>& pred, const std::vector<double>& y) {
    double acc = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) {
        double d = pred[i] - y[i];
        acc += d * d;
    }
    return y.empty() ? 0.0 : acc / static_cast<double>(y.size());
}

void validate_matrix(const DataMatrix& data, const char* tag) {
    for (std::size_t i = 0; i < data.rows(); ++i) {
        if (!std::isfinite(data.y[i]))
            throw std::invalid_argument(std::string(tag) + " row " + std::to_string(i) +
                                        " has a non-finite label");
        for (double v : data.row(i))
            if (!std::isfinite(v))
                throw std::invalid_argument(std::string(tag) + " row " + std::to_string(i) +
                                            " has a non-finite feature");
    }
}

struct TreeBuilder {
    const DataMatrix& data;
    const std::vector<double>& grad;  // residual gradient per row
    const GbtHyperParams& params;
    const std::vector<int>& features;  // ascending feature subset for this tree
    Tree tree;

    // Rows arrive presorted per feature; splits partition the lists while
    // keeping the per-feature order, so no re-sorting happens below the root.
    int build(std::vector<std::vector<int>> sorted, int depth) {
        const std::vector<int>& any = sorted.front();
        double g_sum = 0.0;
        for (int r : any) g_sum += grad[static_cast<std::size_t>(r)];
        double h_sum = static_cast<double>(any.size());

        int node_id = static_cast<int>(tree.nodes.size());
        tree.nodes.emplace_back();

        double best_gain = 1e-12;
        int best_feature = -1;
        double best_threshold = 0.0;
        double parent_score = g_sum * g_sum / (h_sum + params.lambda_l2);
        if (depth < params.max_depth && any.size() >= 2) {
            for (std::size_t fi = 0; fi < features.size(); ++fi) {
                int f = features[fi];
                const std::vector<int>& order = sorted[fi];
                double gl = 0.0, hl = 0.0;
                for (std::size_t i = 0; i + 1 < order.size(); ++i) {
                    int r = order[i];
                    gl += grad[static_cast<std::size_t>(r)];
                    hl += 1.0;
                    double v = data.row(static_cast<std::size_t>(r))[static_cast<std::size_t>(f)];
                    double vn = data.row(static_cast<std::size_t>(order[i + 1]))[static_cast<std::size_t>(f)];
                    if (v == vn) continue;
                    double hr = h_sum - hl;
                    if (hl < params.min_child_weight || hr < params.min_child_weight) continue;
                    double gr = g_sum - gl;
                    double gain = 0.5 * (gl * gl / (hl + params.lambda_l2) +
                                         gr * gr / (hr + params.lambda_l2) - parent_score);
                    if (gain > best_gain) {
                        best_gain = gain;
                        best_feature = f;
                        best_threshold = 0.5 * (v + vn);
                    }
                }
            }
        }

        if (best_feature < 0) {
            tree.nodes[static_cast<std::size_t>(node_id)].value =
                -g_sum / (h_sum + params.lambda_l2);
            return node_id;
        }

        std::vector<std::vector<int>> left(sorted.size()), right(sorted.size());
        for (std::size_t fi = 0; fi < sorted.size(); ++fi) {
            for (int r : sorted[fi]) {
                double v = data.row(static_cast<std::size_t>(r))[static_cast<std::size_t>(best_feature)];
                (v < best_threshold ? left[fi] : right[fi]).push_back(r);
            }
        }
        sorted.clear();

        tree.nodes[static_cast<std::size_t>(node_id)].feature = best_feature;
        tree.nodes[static_cast<std::size_t>(node_id)].threshold = best_threshold;
        tree.nodes[static_cast<std::size_t>(node_id)].gain = best_gain;
        int l = build(std::move(left), depth + 1);
        int r = build(std::move(right), depth + 1);
        tree.nodes[static_cast<std::size_t>(node_id)].left = l;
        tree.nodes[static_cast<std::size_t>(node_id)].right = r;
        return node_id;
    }
};

}  // namespace

std::pair<GbtModel, TrainReport> GbtModel::fit(const DataMatrix& train, const DataMatrix& val,
                                               const GbtHyperParams& params, std::uint64_t seed) {
    if (train.rows() == 0) throw std::invalid_argument("fit: empty training data");
    if (train.width <= 0) throw std::invalid_argument("fit: training data has no features");
    if (val.rows() > 0 && val.width != train.width)
        throw std::invalid_argument("fit: train/val feature width mismatch");
    validate_matrix(train, "train");
    validate_matrix(val, "val");

    GbtModel model;
    model.feature_width_ = train.width;
    model.learning_rate_ = params.learning_rate;
    model.hyper_ = params;
    model.base_score_ =
        std::accumulate(train.y.begin(), train.y.end(), 0.0) / static_cast<double>(train.rows());

    std::vector<double> pred_train(train.rows(), model.base_score_);
    std::vector<double> pred_val(val.rows(), model.base_score_);
    std::vector<double> grad(train.rows());

    Rng rng(seed);
    TrainReport report;
    double best_val = std::numeric_limits<double>::infinity();
    int best_round = -1;
    double prev_train_loss = std::numeric_limits<double>::infinity();

    int n_features =
        std::max(1, static_cast<int>(std::lround(params.feature_subsample * train.width)));
    n_features = std::min(n_features, train.width);
    std::size_t n_rows = train.rows();
    if (params.row_subsample < 1.0)
        n_rows = std::max<std::size_t>(
            1, static_cast<std::size_t>(std::lround(params.row_subsample *
                                                    static_cast<double>(train.rows()))));

    for (int round = 0; round < params.n_trees; ++round) {
        // Per-tree feature subset, ascending so equal-gain ties resolve to the
        // lowest feature index.
        std::vector<int> all_features(static_cast<std::size_t>(train.width));
        std::iota(all_features.begin(), all_features.end(), 0);
        rng.shuffle(all_features);
        std::vector<int> features(all_features.begin(), all_features.begin() + n_features);
        std::sort(features.begin(), features.end());

        std::vector<int> rows(train.rows());
        std::iota(rows.begin(), rows.end(), 0);
        if (n_rows < train.rows()) {
            rng.shuffle(rows);
            rows.resize(n_rows);
            std::sort(rows.begin(), rows.end());
        }

        for (int r : rows)
            grad[static_cast<std::size_t>(r)] =
                pred_train[static_cast<std::size_t>(r)] - train.y[static_cast<std::size_t>(r)];

        std::vector<std::vector<int>> sorted(features.size());
        for (std::size_t fi = 0; fi < features.size(); ++fi) {
            sorted[fi] = rows;
            int f = features[fi];
            std::stable_sort(sorted[fi].begin(), sorted[fi].end(), [&](int a, int b) {
                return train.row(static_cast<std::size_t>(a))[static_cast<std::size_t>(f)] <
                       train.row(static_cast<std::size_t>(b))[static_cast<std::size_t>(f)];
            });
        }

        TreeBuilder builder{train, grad, params, features, {}};
        builder.build(std::move(sorted), 0);
        model.trees_.push_back(std::move(builder.tree));

        const Tree& tree = model.trees_.back();
        for (std::size_t i = 0; i < train.rows(); ++i)
            pred_train[i] += params.learning_rate * tree.predict(train.row(i));
        for (std::size_t i = 0; i < val.rows(); ++i)
            pred_val[i] += params.learning_rate * tree.predict(val.row(i));

        double train_loss = mse(pred_train, train.y);
        if (train_loss > prev_train_loss + 1e-9)
            throw std::logic_error("fit: training loss increased at round " + std::to_string(round));
        prev_train_loss = train_loss;
        report.train_rmse.push_back(std::sqrt(train_loss));

        if (val.rows() > 0) {
            double val_loss = mse(pred_val, val.y);
            report.val_rmse.push_back(std::sqrt(val_loss));
            if (val_loss < best_val - 1e-12) {
                best_val = val_loss;
                best_round = round;
            } else if (round - best_round >= params.early_stopping_patience) {
                break;
            }
        }
    }

    if (val.rows() > 0 && best_round >= 0)
        model.trees_.resize(static_cast<std::size_t>(best_round) + 1);
    report.best_round = best_round;
    report.importance = model.importance();
    return {std::move(model), std::move(report)};
}

double GbtModel::predict(std::span<const double> features) const {
    if (static_cast<int>(features.size()) != feature_width_)
        throw std::invalid_argument("predict: expected " + std::to_string(feature_width_) +
                                    " features, got " + std::to_string(features.size()));
    double acc = base_score_;
    for (const Tree& tree : trees_) acc += learning_rate_ * tree.predict(features);
    return acc;
}

std::vector<double> GbtModel::importance() const {
    std::vector<double> gains(static_cast<std::size_t>(feature_width_), 0.0);
    for (const Tree& tree : trees_)
        for (const TreeNode& node : tree.nodes)
            if (!node.is_leaf()) gains[static_cast<std::size_t>(node.feature)] += node.gain;
    return gains;
}

namespace {
constexpr const char* kModelFormat = "flexplan-gbt";
constexpr int kModelVersion = 1;
}  // namespace

void GbtModel::save(const std::string& path) const {
    nlohmann::json j;
    j["format"] = kModelFormat;
    j["version"] = kModelVersion;
    j["feature_width"] = feature_width_;
    j["base_score"] = base_score_;
    j["learning_rate"] = learning_rate_;
    j["hyperparams"] = {{"n_trees", hyper_.n_trees},
                        {"max_depth", hyper_.max_depth},
                        {"learning_rate", hyper_.learning_rate},
                        {"lambda_l2", hyper_.lambda_l2},
                        {"min_child_weight", hyper_.min_child_weight},
                        {"feature_subsample", hyper_.feature_subsample},
                        {"row_subsample", hyper_.row_subsample},
                        {"early_stopping_patience", hyper_.early_stopping_patience}};
    nlohmann::json trees = nlohmann::json::array();
    for (const Tree& tree : trees_) {
        nlohmann::json nodes = nlohmann::json::array();
        for (const TreeNode& n : tree.nodes)
            nodes.push_back({n.feature, n.threshold, n.left, n.right, n.value, n.gain});
        trees.push_back(std::move(nodes));
    }
    j["trees"] = std::move(trees);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write model file: " + path);
    out << j.dump();
    if (!out) throw std::runtime_error("error while writing model file: " + path);
}

GbtModel GbtModel::load(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open model file: " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw std::runtime_error("malformed model file " + path + ": " + e.what());
    }
    if (!j.contains("format") || j["format"] != kModelFormat)
        throw std::runtime_error(path + " is not a " + kModelFormat + " model file");
    if (!j.contains("version") || !j["version"].is_number_integer())
        throw std::runtime_error(path + ": missing model version");
    int version = j["version"].get<int>();
    if (version != kModelVersion)
        throw std::runtime_error(path + ": unsupported model version " + std::to_string(version) +
                                 " (expected " + std::to_string(kModelVersion) + ")");

    GbtModel model;
    try {
        model.feature_width_ = j.at("feature_width").get<int>();
        model.base_score_ = j.at("base_score").get<double>();
        model.learning_rate_ = j.at("learning_rate").get<double>();
        const auto& hp = j.at("hyperparams");
        model.hyper_.n_trees = hp.at("n_trees").get<int>();
        model.hyper_.max_depth = hp.at("max_depth").get<int>();
        model.hyper_.learning_rate = hp.at("learning_rate").get<double>();
        model.hyper_.lambda_l2 = hp.at("lambda_l2").get<double>();
        model.hyper_.min_child_weight = hp.at("min_child_weight").get<double>();
        model.hyper_.feature_subsample = hp.at("feature_subsample").get<double>();
        model.hyper_.row_subsample = hp.at("row_subsample").get<double>();
        model.hyper_.early_stopping_patience = hp.at("early_stopping_patience").get<int>();
        for (const auto& nodes : j.at("trees")) {
            Tree tree;
            for (const auto& n : nodes) {
                TreeNode node;
                node.feature = n.at(0).get<int>();
                node.threshold = n.at(1).get<double>();
                node.left = n.at(2).get<int>();
                node.right = n.at(3).get<int>();
                node.value = n.at(4).get<double>();
                node.gain = n.at(5).get<double>();
                tree.nodes.push_back(node);
            }
            if (tree.nodes.empty()) throw std::runtime_error("empty tree");
            model.trees_.push_back(std::move(tree));
        }
    } catch (const nlohmann::json::exception& e) {
        throw std::runtime_error("malformed model file " + path + ": " + e.what());
    }
    return model;
}

GbtModel GbtModel::from_parts(int feature_width, double base_score, double learning_rate,
                              std::vector<Tree> trees) {
    GbtModel model;
    model.feature_width_ = feature_width;
    model.base_score_ = base_score;
    model.learning_rate_ = learning_rate;
    model.trees_ = std::move(trees);
    return model;
}

}  // namespace flexplan
