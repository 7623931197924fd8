#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include <ocmt/glasso.hpp>

#include "oracles.hpp"

using namespace ocmt;

namespace {

struct Problem
{
    std::vector<Eigen::MatrixXd> x;
    Eigen::VectorXd y;
};

Problem make_problem(std::mt19937_64& rng, int n, int groups, int width, int active)
{
    Problem p;
    Eigen::VectorXd mean = Eigen::VectorXd::Zero(n);
    const Eigen::MatrixXd common = oracle::gaussian(n, 1, rng);
    for (int j = 0; j < groups; ++j) {
        Eigen::MatrixXd xj = oracle::gaussian(n, width, rng) + 0.4 * common.replicate(1, width);
        xj.rowwise() -= xj.colwise().mean();
        if (j < active) mean += xj * oracle::gaussian(width, 1, rng).col(0);
        p.x.push_back(std::move(xj));
    }
    p.y = mean + oracle::gaussian(n, 1, rng).col(0);
    return p;
}

} // namespace

TEST(GroupLasso, SingleGroupClosedForm)
{
    std::mt19937_64 rng(1);
    for (int rep = 0; rep < 10; ++rep) {
        const auto x = oracle::gaussian(50, 3, rng);
        const Eigen::VectorXd y = x * Eigen::Vector3d(1, -1, 2) + oracle::gaussian(50, 1, rng).col(0);
        const Eigen::VectorXd py = x * (oracle::inv(x.transpose() * x) * (x.transpose() * y));
        const double bound = 2.0 * py.norm();
        for (double frac : {0.1, 0.5, 0.9, 1.2}) {
            const double lambda = frac * bound;
            const auto fit = group_lasso_bcd(GroupDesign({x}), y, GroupPenaltySpec::uniform(lambda, 1));
            const Eigen::VectorXd expect = std::max(0.0, 1.0 - lambda / (2.0 * py.norm())) * py;
            EXPECT_LT((x * fit.coefficients[0] - expect).norm(), 1e-9 * std::max(1.0, py.norm()));
        }
    }
}

TEST(GroupLasso, ZeroSolutionBound)
{
    std::mt19937_64 rng(2);
    for (int rep = 0; rep < 20; ++rep) {
        const auto p = make_problem(rng, 80, 5, 3, 2);
        const GroupDesign design(p.x);
        const std::vector<double> w(5, 1.0);
        double expect = 0.0;
        for (const auto& xj : p.x) expect = std::max(expect, 2.0 * std::sqrt(oracle::projected_norm2(xj, p.y)));
        const double bound = zero_solution_lambda(design, p.y, w);
        EXPECT_LT(oracle::rel_diff(bound, expect), 1e-12);

        const auto at = group_lasso_bcd(design, p.y, GroupPenaltySpec{bound, w});
        EXPECT_TRUE(at.active_groups.empty());
        const auto above = group_lasso_bcd(design, p.y, GroupPenaltySpec{bound * 1.5, w});
        EXPECT_TRUE(above.active_groups.empty());
        const auto below = group_lasso_bcd(design, p.y, GroupPenaltySpec{bound * 0.99, w});
        EXPECT_FALSE(below.active_groups.empty());
    }
}

TEST(GroupLasso, ZeroLambdaIsOls)
{
    std::mt19937_64 rng(3);
    const auto p = make_problem(rng, 100, 4, 3, 4);
    const auto fit = group_lasso_bcd(GroupDesign(p.x), p.y, GroupPenaltySpec::uniform(0.0, 4));
    Eigen::MatrixXd w(100, 12);
    for (int j = 0; j < 4; ++j) w.middleCols(3 * j, 3) = p.x[j];
    const Eigen::VectorXd coef = oracle::inv(w.transpose() * w) * (w.transpose() * p.y);
    for (int j = 0; j < 4; ++j) EXPECT_LT((fit.coefficients[j] - coef.segment(3 * j, 3)).cwiseAbs().maxCoeff(), 1e-6);
}

TEST(GroupLasso, KktCertificates)
{
    std::mt19937_64 rng(4);
    for (int rep = 0; rep < 50; ++rep) {
        const auto p = make_problem(rng, 120, 6, 2 + rep % 4, 1 + rep % 5);
        const GroupDesign design(p.x);
        std::vector<double> w(6);
        for (int j = 0; j < 6; ++j) w[j] = 0.5 + 0.25 * ((rep + j) % 5);
        const double bound = zero_solution_lambda(design, p.y, w);
        const double lambda = bound * (0.05 + 0.9 * (rep % 10) / 10.0);
        const auto fit = group_lasso_bcd(design, p.y, GroupPenaltySpec{lambda, w});
        EXPECT_TRUE(fit.converged);
        EXPECT_TRUE(fit.kkt_satisfied);
        EXPECT_LT(oracle::kkt_violation(p.x, p.y, fit.coefficients, lambda, w), 1e-5) << "fit " << rep;
    }
}

TEST(GroupLasso, ObjectiveNeverIncreases)
{
    std::mt19937_64 rng(5);
    for (int rep = 0; rep < 10; ++rep) {
        const auto p = make_problem(rng, 90, 8, 4, 3);
        const GroupDesign design(p.x);
        const double lambda = 0.2 * zero_solution_lambda(design, p.y, std::vector<double>(8, 1.0));
        const auto fit = group_lasso_bcd(design, p.y, GroupPenaltySpec::uniform(lambda, 8));
        for (std::size_t k = 1; k < fit.objective_trace.size(); ++k) {
            EXPECT_LE(fit.objective_trace[k], fit.objective_trace[k - 1] * (1.0 + 1e-12));
        }
    }
}

TEST(GroupLasso, WarmAndColdStartsAgree)
{
    std::mt19937_64 rng(6);
    for (int rep = 0; rep < 20; ++rep) {
        const auto p = make_problem(rng, 100, 5, 3, 2);
        const GroupDesign design(p.x);
        const double bound = zero_solution_lambda(design, p.y, std::vector<double>(5, 1.0));
        const auto pen_hi = GroupPenaltySpec::uniform(0.6 * bound, 5);
        const auto pen_lo = GroupPenaltySpec::uniform(0.2 * bound, 5);
        const auto hi = group_lasso_bcd(design, p.y, pen_hi);
        const auto warm = group_lasso_bcd(design, p.y, pen_lo, &hi.orthonormal);
        const auto cold = group_lasso_bcd(design, p.y, pen_lo);
        EXPECT_NEAR(warm.objective_trace.back(), cold.objective_trace.back(), 1e-8 * cold.objective_trace.back());
        for (int j = 0; j < 5; ++j) {
            EXPECT_LT((warm.coefficients[j] - cold.coefficients[j]).norm(), 1e-4 * (1.0 + cold.coefficients[j].norm()));
        }
    }
}

TEST(GroupLasso, ExcludedGroupsStayZero)
{
    std::mt19937_64 rng(7);
    const auto p = make_problem(rng, 80, 4, 2, 4);
    std::vector<double> w{1.0, INFINITY, 1.0, INFINITY};
    const auto fit = group_lasso_bcd(GroupDesign(p.x), p.y, GroupPenaltySpec{1.0, w});
    EXPECT_EQ(fit.coefficients[1].norm(), 0.0);
    EXPECT_EQ(fit.coefficients[3].norm(), 0.0);
    EXPECT_EQ(fit.active_groups, (std::vector<int>{0, 2}));
}

TEST(GroupLasso, InputValidation)
{
    std::mt19937_64 rng(8);
    const auto p = make_problem(rng, 30, 2, 2, 1);
    const GroupDesign design(p.x);
    EXPECT_THROW(group_lasso_bcd(design, p.y, GroupPenaltySpec{1.0, {1.0}}), DimensionError);
    EXPECT_THROW(group_lasso_bcd(design, p.y, GroupPenaltySpec{-1.0, {1.0, 1.0}}), ConfigError);
    EXPECT_THROW(group_lasso_bcd(design, Eigen::VectorXd::Ones(29), GroupPenaltySpec::uniform(1.0, 2)),
                 DimensionError);
    Eigen::MatrixXd dup = oracle::gaussian(30, 2, rng);
    dup.col(1) = dup.col(0);
    EXPECT_THROW(GroupDesign({dup}), RankError);
}

TEST(LambdaGrid, Endpoints)
{
    const auto g = lambda_grid(100.0);
    ASSERT_EQ(g.size(), 31u);
    EXPECT_DOUBLE_EQ(g.front(), 50.0);
    EXPECT_NEAR(g.back(), 0.05, 1e-15);
    EXPECT_NEAR(g[15], std::sqrt(50.0 * 0.05), 1e-13);
    EXPECT_NEAR(g[15], 1.5811388300841898, 1e-13);
    for (std::size_t k = 1; k < g.size(); ++k) {
        EXPECT_LT(g[k], g[k - 1]);
        EXPECT_NEAR(g[k] / g[k - 1], g[1] / g[0], 1e-12);
    }
    const auto big = lambda_grid(1e7);
    EXPECT_NEAR(big.back(), 100.0, 1e-9);

    bool degenerate = false;
    const auto one = lambda_grid(0.1, &degenerate);
    EXPECT_TRUE(degenerate);
    ASSERT_EQ(one.size(), 1u);
    EXPECT_DOUBLE_EQ(one[0], 0.05);
    EXPECT_THROW(lambda_grid(0.0), DomainError);
}

TEST(AdaptiveGroupLasso, DropsNoiseKeepsSignal)
{
    std::mt19937_64 rng(9);
    int kept_signal = 0;
    int kept_noise = 0;
    for (int rep = 0; rep < 10; ++rep) {
        const auto p = make_problem(rng, 300, 6, 4, 2);
        std::vector<DesignBlock> blocks;
        for (int j = 0; j < 6; ++j) blocks.push_back(oracle::block(p.x[j], j));
        const auto fit = adaptive_group_lasso(blocks, p.y);
        ASSERT_TRUE(fit.first_step_lambda.has_value());
        for (int g : fit.active_groups) {
            EXPECT_TRUE(std::find(fit.first_step_active.begin(), fit.first_step_active.end(), g)
                        != fit.first_step_active.end());
            (g < 2 ? kept_signal : kept_noise) += 1;
        }
    }
    EXPECT_EQ(kept_signal, 20);
    EXPECT_LE(kept_noise, 10);  // of 40 noise groups
}

TEST(AdaptiveGroupLasso, NoGroups)
{
    const Eigen::VectorXd y = Eigen::VectorXd::LinSpaced(10, 0.0, 1.0);
    const auto fit = adaptive_group_lasso(std::vector<const DesignBlock*>{}, y);
    EXPECT_TRUE(fit.empty);
    EXPECT_TRUE(fit.active_groups.empty());
    EXPECT_DOUBLE_EQ(fit.rss, y.squaredNorm());
}

TEST(PostOcmtCleanup, SubsetOfCandidates)
{
    std::mt19937_64 rng(10);
    for (int rep = 0; rep < 10; ++rep) {
        const auto p = make_problem(rng, 200, 5, 4, 3);
        std::vector<DesignBlock> blocks;
        const int labels[] = {2, 9, 11, 30, 41};
        for (int j = 0; j < 5; ++j) blocks.push_back(oracle::block(p.x[j], labels[j]));
        std::vector<const DesignBlock*> ptrs;
        for (const auto& b : blocks) ptrs.push_back(&b);
        const auto out = post_ocmt_cleanup(ptrs, p.y);
        EXPECT_TRUE(std::is_sorted(out.selected.begin(), out.selected.end()));
        for (int v : out.selected) EXPECT_NE(std::find(std::begin(labels), std::end(labels), v), std::end(labels));
        EXPECT_EQ(out.blocks.size(), out.selected.size());
        Eigen::Index width = 0;
        for (const auto& b : out.blocks) width += b.width();
        EXPECT_EQ(out.fit.coefficients.size(), width);
    }
}
