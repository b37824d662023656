#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace flexplan {

struct GbtHyperParams {
    int n_trees = 400;
    int max_depth = 6;
    double learning_rate = 0.1;
    double lambda_l2 = 1.0;
    double min_child_weight = 1.0;
    double feature_subsample = 0.8;
    double row_subsample = 1.0;
    int early_stopping_patience = 30;
};

// Row-major feature matrix with one label per row.
struct DataMatrix {
    int width = 0;
    std::vector<double> x;
    std::vector<double> y;

    std::size_t rows() const { return y.size(); }
    std::span<const double> row(std::size_t i) const {
        return {x.data() + i * static_cast<std::size_t>(width), static_cast<std::size_t>(width)};
    }
    void add_row(std::span<const double> features, double label);
};

struct TreeNode {
    int feature = -1;  // -1 marks a leaf
    double threshold = 0.0;
    int left = -1;
    int right = -1;
    double value = 0.0;  // leaf score
    double gain = 0.0;   // split gain, 0 for leaves
    bool is_leaf() const { return feature < 0; }
};

struct Tree {
    std::vector<TreeNode> nodes;
    double predict(std::span<const double> features) const;
};

struct TrainReport {
    std::vector<double> train_rmse;  // one entry per boosting round
    std::vector<double> val_rmse;
    int best_round = -1;  // round kept after early stopping, -1 if no val data
    std::vector<double> importance;
};

// Second-order gradient boosting with squared-error loss: residual gradients,
// unit hessians, leaf score -sum(g)/(sum(h)+lambda), greedy exact split
// search over a per-tree random feature subset. Deterministic given the seed.
class GbtModel {
public:
    GbtModel() = default;

    static std::pair<GbtModel, TrainReport> fit(const DataMatrix& train, const DataMatrix& val,
                                                const GbtHyperParams& params, std::uint64_t seed);

    double predict(std::span<const double> features) const;

    // Total split gain per feature index, zero for unused features.
    std::vector<double> importance() const;

    void save(const std::string& path) const;
    static GbtModel load(const std::string& path);

    int feature_width() const { return feature_width_; }
    double base_score() const { return base_score_; }
    double learning_rate() const { return learning_rate_; }
    std::size_t n_trees() const { return trees_.size(); }
    const std::vector<Tree>& trees() const { return trees_; }
    const GbtHyperParams& hyperparams() const { return hyper_; }

    // Test hook: assemble a model directly.
    static GbtModel from_parts(int feature_width, double base_score, double learning_rate,
                               std::vector<Tree> trees);

private:
    int feature_width_ = 0;
    double base_score_ = 0.0;
    double learning_rate_ = 1.0;
    GbtHyperParams hyper_;
    std::vector<Tree> trees_;
};

}  // namespace flexplan
