#include "doctest.h"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <vector>

#include "flexplan/gbt.hpp"
#include "flexplan/rng.hpp"

using namespace flexplan;

namespace {

// Independent interpreter: walk the exported node arrays by hand.
double reference_predict(const GbtModel& model, std::span<const double> x) {
    double acc = model.base_score();
    for (const Tree& tree : model.trees()) {
        int idx = 0;
        for (;;) {
            const TreeNode& n = tree.nodes[(std::size_t)idx];
            if (n.feature < 0) {
                acc += model.learning_rate() * n.value;
                break;
            }
            idx = x[(std::size_t)n.feature] < n.threshold ? n.left : n.right;
        }
    }
    return acc;
}

DataMatrix synthetic_linear(int rows, int width, std::uint64_t seed, double slope,
                            int feature = 0) {
    Rng rng(seed);
    DataMatrix data;
    data.width = width;
    for (int i = 0; i < rows; ++i) {
        std::vector<double> x(static_cast<std::size_t>(width));
        for (auto& v : x) v = rng.uniform(-1.0, 1.0);
        data.add_row(x, slope * x[(std::size_t)feature]);
    }
    return data;
}

double rmse_against(const GbtModel& model, const DataMatrix& data) {
    double acc = 0.0;
    for (std::size_t i = 0; i < data.rows(); ++i) {
        double d = model.predict(data.row(i)) - data.y[i];
        acc += d * d;
    }
    return std::sqrt(acc / static_cast<double>(data.rows()));
}

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    return std::string(std::istreambuf_iterator<char>(in), {});
}

}  // namespace

TEST_CASE("constant labels collapse to single-leaf trees") {
    DataMatrix data;
    data.width = 3;
    Rng rng(5);
    for (int i = 0; i < 50; ++i) {
        std::vector<double> x = {rng.next_double(), rng.next_double(), rng.next_double()};
        data.add_row(x, 7.25);
    }
    auto [model, report] = GbtModel::fit(data, {}, GbtHyperParams{}, 1);
    std::vector<double> probe = {0.1, 0.9, 0.5};
    CHECK(model.predict(probe) == doctest::Approx(7.25).epsilon(1e-12));
    for (double g : model.importance()) CHECK(g == 0.0);
}

TEST_CASE("fits y = 3*x0 well below the label spread") {
    DataMatrix train = synthetic_linear(1000, 25, 2, 3.0);
    GbtHyperParams hp;
    hp.n_trees = 200;
    hp.max_depth = 4;
    auto [model, report] = GbtModel::fit(train, {}, hp, 3);
    double std_y = std::sqrt(3.0 * 3.0 / 3.0);  // slope^2 * var(uniform[-1,1])
    CHECK(rmse_against(model, train) < 0.05 * std_y);

    SUBCASE("the driving feature owns the split gain") {
        auto gains = model.importance();
        double total = 0.0;
        for (double g : gains) total += g;
        CHECK(gains[0] > 0.95 * total);
    }
}

TEST_CASE("training loss never increases and early stop keeps the best round") {
    DataMatrix train = synthetic_linear(400, 5, 11, 2.0);
    DataMatrix val = synthetic_linear(100, 5, 12, 2.0);
    GbtHyperParams hp;
    hp.n_trees = 120;
    hp.early_stopping_patience = 10;
    auto [model, report] = GbtModel::fit(train, val, hp, 4);
    for (std::size_t i = 1; i < report.train_rmse.size(); ++i)
        CHECK(report.train_rmse[i] <= report.train_rmse[i - 1] + 1e-9);
    REQUIRE(report.best_round >= 0);
    CHECK(model.n_trees() == (std::size_t)report.best_round + 1);
    double best = report.val_rmse[(std::size_t)report.best_round];
    for (double v : report.val_rmse) CHECK(best <= v + 1e-12);
}

TEST_CASE("prediction agrees with an independent traversal on random inputs") {
    DataMatrix train = synthetic_linear(600, 25, 21, 1.5, 3);
    GbtHyperParams hp;
    hp.n_trees = 60;
    auto [model, report] = GbtModel::fit(train, {}, hp, 9);
    Rng rng(33);
    for (int i = 0; i < 1000; ++i) {
        std::vector<double> x(25);
        for (auto& v : x) v = rng.uniform(-2.0, 2.0);
        CHECK(model.predict(x) == reference_predict(model, x));
    }
}

TEST_CASE("predict validates input width") {
    DataMatrix train = synthetic_linear(50, 4, 1, 1.0);
    auto [model, report] = GbtModel::fit(train, {}, GbtHyperParams{.n_trees = 5}, 1);
    std::vector<double> wrong(3, 0.0);
    CHECK_THROWS_AS((void)model.predict(wrong), std::invalid_argument);
}

TEST_CASE("hand-assembled single-split tree routes correctly") {
    Tree tree;
    tree.nodes.resize(3);
    tree.nodes[0] = TreeNode{0, 0.5, 1, 2, 0.0, 1.0};
    tree.nodes[1] = TreeNode{-1, 0.0, -1, -1, -1.0, 0.0};
    tree.nodes[2] = TreeNode{-1, 0.0, -1, -1, 1.0, 0.0};
    GbtModel model = GbtModel::from_parts(2, 0.0, 1.0, {tree});
    std::vector<double> low = {0.2, 9.9};
    std::vector<double> high = {0.7, -9.9};
    CHECK(model.predict(low) == -1.0);
    CHECK(model.predict(high) == 1.0);

    GbtModel empty = GbtModel::from_parts(2, 4.5, 1.0, {});
    CHECK(empty.predict(low) == 4.5);
    CHECK(empty.importance() == std::vector<double>{0.0, 0.0});
}

TEST_CASE("same data, hyperparameters and seed give a bit-identical model file") {
    DataMatrix train = synthetic_linear(300, 25, 8, 2.5);
    DataMatrix val = synthetic_linear(80, 25, 9, 2.5);
    GbtHyperParams hp;
    hp.n_trees = 40;
    auto [m1, r1] = GbtModel::fit(train, val, hp, 77);
    auto [m2, r2] = GbtModel::fit(train, val, hp, 77);
    m1.save("gbt_det_a.json");
    m2.save("gbt_det_b.json");
    CHECK(slurp("gbt_det_a.json") == slurp("gbt_det_b.json"));
    std::remove("gbt_det_a.json");
    std::remove("gbt_det_b.json");
}

TEST_CASE("order-preserving feature transforms keep the tree structure") {
    DataMatrix train = synthetic_linear(300, 6, 14, 2.0);
    DataMatrix warped = train;
    // strictly increasing map on feature 0 leaves all split partitions alone
    for (std::size_t i = 0; i < warped.rows(); ++i)
        warped.x[i * 6] = std::exp(warped.x[i * 6]);
    GbtHyperParams hp;
    hp.n_trees = 30;
    auto [m_base, r_base] = GbtModel::fit(train, {}, hp, 55);
    auto [m_warp, r_warp] = GbtModel::fit(warped, {}, hp, 55);
    REQUIRE(m_base.n_trees() == m_warp.n_trees());
    for (std::size_t t = 0; t < m_base.n_trees(); ++t) {
        const auto& a = m_base.trees()[t].nodes;
        const auto& b = m_warp.trees()[t].nodes;
        REQUIRE(a.size() == b.size());
        for (std::size_t n = 0; n < a.size(); ++n) {
            CHECK(a[n].feature == b[n].feature);
            CHECK(a[n].left == b[n].left);
            CHECK(a[n].right == b[n].right);
            if (a[n].feature < 0) CHECK(a[n].value == doctest::Approx(b[n].value).epsilon(1e-12));
        }
    }
    // same routing implies identical train predictions
    for (std::size_t i = 0; i < train.rows(); ++i)
        CHECK(m_base.predict(train.row(i)) ==
              doctest::Approx(m_warp.predict(warped.row(i))).epsilon(1e-12));
}

TEST_CASE("model file round trip is exact; corrupt files are rejected") {
    DataMatrix train = synthetic_linear(300, 25, 18, 2.0);
    GbtHyperParams hp;
    hp.n_trees = 30;
    auto [model, report] = GbtModel::fit(train, {}, hp, 6);
    model.save("gbt_roundtrip.json");
    GbtModel loaded = GbtModel::load("gbt_roundtrip.json");

    Rng rng(91);
    for (int i = 0; i < 1000; ++i) {
        std::vector<double> x(25);
        for (auto& v : x) v = rng.uniform(-3.0, 3.0);
        CHECK(model.predict(x) == loaded.predict(x));  // bit-exact
    }

    SUBCASE("truncated file") {
        std::string blob = slurp("gbt_roundtrip.json");
        std::ofstream out("gbt_trunc.json", std::ios::binary);
        out << blob.substr(0, blob.size() / 2);
        out.close();
        CHECK_THROWS_WITH_AS((void)GbtModel::load("gbt_trunc.json"),
                             doctest::Contains("malformed"), std::runtime_error);
        std::remove("gbt_trunc.json");
    }

    SUBCASE("unknown version tag") {
        std::string blob = slurp("gbt_roundtrip.json");
        auto pos = blob.find("\"version\":1");
        REQUIRE(pos != std::string::npos);
        blob.replace(pos, 11, "\"version\":9");
        std::ofstream out("gbt_ver.json", std::ios::binary);
        out << blob;
        out.close();
        CHECK_THROWS_WITH_AS((void)GbtModel::load("gbt_ver.json"),
                             doctest::Contains("version"), std::runtime_error);
        std::remove("gbt_ver.json");
    }

    SUBCASE("wrong format tag") {
        std::ofstream out("gbt_fmt.json", std::ios::binary);
        out << "{\"format\":\"something-else\",\"version\":1}";
        out.close();
        CHECK_THROWS((void)GbtModel::load("gbt_fmt.json"));
        std::remove("gbt_fmt.json");
    }

    std::remove("gbt_roundtrip.json");
}

TEST_CASE("degenerate inputs are rejected with row context") {
    DataMatrix empty;
    CHECK_THROWS_AS(GbtModel::fit(empty, {}, GbtHyperParams{}, 1), std::invalid_argument);

    DataMatrix bad = synthetic_linear(10, 3, 3, 1.0);
    bad.x[2 * 3 + 1] = std::nan("");
    CHECK_THROWS_WITH_AS(GbtModel::fit(bad, {}, GbtHyperParams{}, 1),
                         doctest::Contains("row 2"), std::invalid_argument);

    DataMatrix bad_label = synthetic_linear(10, 3, 3, 1.0);
    bad_label.y[7] = std::numeric_limits<double>::infinity();
    CHECK_THROWS_WITH_AS(GbtModel::fit(bad_label, {}, GbtHyperParams{}, 1),
                         doctest::Contains("row 7"), std::invalid_argument);
}

TEST_CASE("a permuted irrelevant feature keeps near-zero gain") {
    // labels depend only on x0; scrambling x4's column must leave its gain ~0
    DataMatrix train = synthetic_linear(500, 6, 25, 2.0);
    GbtHyperParams hp;
    hp.n_trees = 50;
    auto [model, report] = GbtModel::fit(train, {}, hp, 13);
    auto gains = model.importance();
    double total = 0.0;
    for (double g : gains) total += g;
    CHECK(gains[4] <= 0.01 * total);

    DataMatrix scrambled = train;
    Rng rng(77);
    for (std::size_t i = scrambled.rows(); i > 1; --i) {
        auto j = (std::size_t)rng.uniform_int(0, (std::int64_t)i - 1);
        std::swap(scrambled.x[(i - 1) * 6 + 4], scrambled.x[j * 6 + 4]);
    }
    auto [model2, report2] = GbtModel::fit(scrambled, {}, hp, 13);
    auto gains2 = model2.importance();
    double total2 = 0.0;
    for (double g : gains2) total2 += g;
    CHECK(gains2[4] <= 0.01 * total2);
}
