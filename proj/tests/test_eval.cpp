#include <gtest/gtest.h>

#include <algorithm>
#include <random>

#include <ocmt/eval.hpp>

#include "oracles.hpp"

using namespace ocmt;

TEST(Metrics, WorkedExample)
{
    // p = 10, signals {0,1,2}, pseudo-signal 3; selection {0, 1, 3, 7}
    std::vector<int> ind(10, 0);
    ind[0] = ind[1] = ind[3] = ind[7] = 1;
    const std::vector<int> signals{0, 1, 2};
    std::vector<int> non_signals{3, 4, 5, 6, 7, 8, 9};
    const auto m = selection_metrics(ind, signals, non_signals, 10);
    EXPECT_EQ(m.nv, 4);
    EXPECT_DOUBLE_EQ(m.tpr, 2.0 / 3.0);
    EXPECT_DOUBLE_EQ(m.fpr, 2.0 / 7.0);
    EXPECT_DOUBLE_EQ(m.fdr, 2.0 / 5.0);
    EXPECT_FALSE(m.correct);

    // pseudo-signal excluded from the false set
    const auto m2 = selection_metrics(ind, signals, {4, 5, 6, 7, 8, 9}, 10);
    EXPECT_DOUBLE_EQ(m2.fdr, 1.0 / 5.0);
}

TEST(Metrics, ExactRecoveryAndEmptySelection)
{
    std::vector<int> ind(6, 0);
    ind[1] = ind[4] = 1;
    const auto m = selection_metrics(ind, {1, 4}, {0, 2, 3, 5}, 6);
    EXPECT_TRUE(m.correct);
    EXPECT_DOUBLE_EQ(m.tpr, 1.0);
    EXPECT_DOUBLE_EQ(m.fpr, 0.0);
    EXPECT_DOUBLE_EQ(m.fdr, 0.0);

    const auto none = selection_metrics(std::vector<int>(6, 0), {1, 4}, {0, 2, 3, 5}, 6);
    EXPECT_EQ(none.nv, 0);
    EXPECT_DOUBLE_EQ(none.tpr, 0.0);
    EXPECT_DOUBLE_EQ(none.fdr, 0.0);
    EXPECT_FALSE(none.correct);
}

TEST(Metrics, Errors)
{
    EXPECT_THROW(selection_metrics(std::vector<int>(5, 0), {1}, {}, 6), DimensionError);
    EXPECT_THROW(selection_metrics(std::vector<int>(6, 0), {}, {}, 6), ConfigError);
    EXPECT_THROW(selection_metrics(std::vector<int>(6, 0), {1}, {1}, 6), ConfigError);
    EXPECT_THROW(selection_metrics(std::vector<int>(6, 0), {6}, {}, 6), ConfigError);
}

TEST(Aggregate, MeansAndPermutationInvariance)
{
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<ReplicationRow> rows(97);
    for (auto& r : rows) {
        r.nv = std::floor(10 * u(rng));
        r.tpr = u(rng);
        r.fpr = u(rng) * 1e-3;
        r.fdr = u(rng) / 3.0;
        r.cs = u(rng) < 0.7;
        r.step = 1 + std::floor(3 * u(rng));
        r.frmse = 1.0 + u(rng);
    }
    const auto a = aggregate(rows);
    EXPECT_EQ(a.replications, 97);
    double tpr = 0.0;
    for (const auto& r : rows) tpr += r.tpr;
    EXPECT_NEAR(a.tpr, tpr / 97.0, 1e-14);
    ASSERT_TRUE(a.step.has_value());

    for (int k = 0; k < 5; ++k) {
        std::shuffle(rows.begin(), rows.end(), rng);
        const auto b = aggregate(rows);
        EXPECT_EQ(a.nv, b.nv);
        EXPECT_EQ(a.tpr, b.tpr);
        EXPECT_EQ(a.fpr, b.fpr);
        EXPECT_EQ(a.fdr, b.fdr);
        EXPECT_EQ(a.cs, b.cs);
        EXPECT_EQ(*a.step, *b.step);
        EXPECT_EQ(a.frmse, b.frmse);
    }

    rows[3].step.reset();
    EXPECT_FALSE(aggregate(rows).step.has_value());
    EXPECT_THROW(aggregate({}), ConfigError);
}

TEST(Forecast, PerfectModelHasZeroError)
{
    std::mt19937_64 rng(2);
    Dataset train;
    train.x.resize(200, 2);
    train.x.col(0) = oracle::uniform(200, rng);
    train.x.col(1) = oracle::uniform(200, rng);
    train.kinds.assign(2, VariableKind::continuous);
    const auto f = [](double a) { return 2.0 + a; };  // linear, inside the cubic spline span
    train.y = train.x.col(1).unaryExpr(f);
    BasisConfig b;
    b.m_n = 5;
    const auto model = fit_post_selection({build_design_block(train.x.col(1), VariableKind::continuous, b, 1)}, train.y);
    EXPECT_EQ(model.variables(), std::vector<int>{1});

    Dataset test = train;
    test.x.col(1) = oracle::uniform(200, rng);
    test.y = test.x.col(1).unaryExpr(f);
    EXPECT_LT(frmse(model, test), 1e-10);

    const auto mean_only = fit_post_selection({}, train.y);
    const double sd = std::sqrt((test.y.array() - train.y.mean()).square().mean());
    EXPECT_NEAR(frmse(mean_only, test), sd, 1e-12);
}

TEST(Table, Layout)
{
    ReplicationReport r;
    r.nv = 4.0;
    r.tpr = 1.0;
    r.cs = 0.95;
    r.frmse = 1.047;
    const auto t = format_table({{"post-ocmt", r}});
    EXPECT_NE(t.find("NV"), std::string::npos);
    EXPECT_NE(t.find("FRMSE"), std::string::npos);
    EXPECT_NE(t.find("post-ocmt"), std::string::npos);
    EXPECT_NE(t.find("4.0000"), std::string::npos);
    EXPECT_NE(t.find("       -"), std::string::npos);
}
