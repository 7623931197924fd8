#include <gtest/gtest.h>

#include <random>

#include <ocmt/basis.hpp>

#include "oracles.hpp"

using namespace ocmt;

namespace {

BasisConfig cfg(int m_n, int order = 4)
{
    BasisConfig c;
    c.m_n = m_n;
    c.spline_order = order;
    return c;
}

} // namespace

TEST(Basis, DefaultSieveSize)
{
    EXPECT_EQ(BasisConfig::default_m_n(400), 5);
    EXPECT_EQ(BasisConfig::default_m_n(16), 3);
    EXPECT_EQ(BasisConfig::default_m_n(81), 4);
    EXPECT_EQ(BasisConfig::default_m_n(1000), 6);
}

TEST(Basis, MatchesCoxDeBoorRecursion)
{
    for (int order : {2, 3, 4, 5}) {
        for (int m_n : {order, order + 1, order + 3, 9}) {
            const int count = m_n + 1;
            const auto t = oracle::knots(count, order);
            for (int k = 0; k <= 200; ++k) {
                const double x = k / 200.0;
                const auto v = raw_bspline_basis(x, cfg(m_n, order));
                ASSERT_EQ(v.size(), count);
                for (int i = 0; i < count; ++i) {
                    EXPECT_NEAR(v[i], oracle::cox_de_boor(i, order, t, x), 1e-13)
                        << "order " << order << " m_n " << m_n << " x " << x << " i " << i;
                }
            }
        }
    }
}

TEST(Basis, PartitionOfUnity)
{
    std::mt19937_64 rng(11);
    const auto xs = oracle::uniform(1000, rng);
    for (int m_n : {4, 5, 8}) {
        for (Eigen::Index i = 0; i < xs.size(); ++i) {
            const auto v = raw_bspline_basis(xs[i], cfg(m_n));
            EXPECT_NEAR(v.sum(), 1.0, 1e-12);
            EXPECT_GE(v.minCoeff(), 0.0);
        }
    }
    EXPECT_NEAR(raw_bspline_basis(0.0, cfg(5)).sum(), 1.0, 1e-12);
    EXPECT_NEAR(raw_bspline_basis(1.0, cfg(5)).sum(), 1.0, 1e-12);
}

TEST(Basis, GoldenValues)
{
    // single interior knot at 0.5
    const auto mid = raw_bspline_basis(0.5, cfg(4));
    const double expect_mid[] = {0.0, 0.25, 0.5, 0.25, 0.0};
    for (int i = 0; i < 5; ++i) EXPECT_NEAR(mid[i], expect_mid[i], 1e-15);

    const auto a = raw_bspline_basis(0.3, cfg(4));
    const double expect_a[] = {0.064, 0.558, 0.324, 0.054, 0.0};
    for (int i = 0; i < 5; ++i) EXPECT_NEAR(a[i], expect_a[i], 1e-14);

    EXPECT_DOUBLE_EQ(raw_bspline_basis(0.0, cfg(5))[0], 1.0);
    EXPECT_DOUBLE_EQ(raw_bspline_basis(1.0, cfg(5))[5], 1.0);
}

TEST(Basis, RejectsBadInput)
{
    EXPECT_THROW(raw_bspline_basis(-0.01, cfg(5)), DomainError);
    EXPECT_THROW(raw_bspline_basis(1.01, cfg(5)), DomainError);
    EXPECT_THROW(raw_bspline_basis(0.5, cfg(3)), ConfigError);
    EXPECT_THROW(raw_bspline_basis(0.5, cfg(5, 1)), ConfigError);
}

TEST(DesignBlock, CenteredAndSpansCenteredFamily)
{
    std::mt19937_64 rng(3);
    const auto x = oracle::uniform(300, rng);
    const auto blk = build_design_block(x, VariableKind::continuous, cfg(5), 7);
    EXPECT_EQ(blk.width(), 5);
    EXPECT_EQ(blk.variable_index, 7);
    EXPECT_LT(blk.values.colwise().sum().cwiseAbs().maxCoeff(), 1e-10);

    // the centered full family of m_n + 1 functions has rank m_n and the
    // same column space as the block
    Eigen::MatrixXd full(300, 6);
    for (int i = 0; i < 300; ++i) full.row(i) = raw_bspline_basis(x[i], cfg(5)).transpose();
    full.rowwise() -= full.colwise().mean();
    Eigen::MatrixXd stacked(300, 11);
    stacked << blk.values, full;
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(stacked);
    const auto& s = svd.singularValues();
    EXPECT_GT(s[4] / s[0], 1e-8);
    EXPECT_LT(s[5] / s[0], 1e-10);
}

TEST(DesignBlock, EvaluateReproducesTrainingRows)
{
    std::mt19937_64 rng(5);
    const auto x = oracle::uniform(120, rng);
    const auto blk = build_design_block(x, VariableKind::continuous, cfg(5));
    EXPECT_LT((blk.evaluate(x) - blk.values).cwiseAbs().maxCoeff(), 1e-14);
    // outside [0,1] is clamped
    Eigen::VectorXd edge(2);
    edge << -0.5, 1.5;
    Eigen::VectorXd clamped(2);
    clamped << 0.0, 1.0;
    EXPECT_LT((blk.evaluate(edge) - blk.evaluate(clamped)).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(DesignBlock, BinaryIsOneCenteredColumn)
{
    Eigen::VectorXd x(6);
    x << 0, 1, 1, 0, 1, 1;
    const auto blk = build_design_block(x, VariableKind::binary_linear, cfg(5));
    ASSERT_EQ(blk.width(), 1);
    EXPECT_NEAR(blk.column_means[0], 4.0 / 6.0, 1e-15);
    EXPECT_NEAR(blk.values(0, 0), -4.0 / 6.0, 1e-15);
    EXPECT_NEAR(blk.values(1, 0), 2.0 / 6.0, 1e-15);
}

TEST(DesignBlock, Failures)
{
    EXPECT_THROW(build_design_block(Eigen::VectorXd::Constant(50, 0.4), VariableKind::continuous, cfg(5)), RankError);
    EXPECT_THROW(build_design_block(Eigen::VectorXd::Ones(50), VariableKind::binary_linear, cfg(5)), RankError);
    Eigen::VectorXd bad = Eigen::VectorXd::LinSpaced(50, 0.0, 1.0);
    bad[10] = 1.2;
    EXPECT_THROW(build_design_block(bad, VariableKind::continuous, cfg(5)), DomainError);
    EXPECT_THROW(build_design_block(Eigen::VectorXd::LinSpaced(6, 0.0, 1.0), VariableKind::continuous, cfg(5)),
                 DimensionError);
}

TEST(RescaleToUnit, MinMax)
{
    Eigen::VectorXd v(3);
    v << 2, 4, 6;
    const auto [u, map] = rescale_to_unit(v);
    EXPECT_DOUBLE_EQ(u[0], 0.0);
    EXPECT_DOUBLE_EQ(u[1], 0.5);
    EXPECT_DOUBLE_EQ(u[2], 1.0);
    EXPECT_DOUBLE_EQ(map.apply(5.0), 0.75);
    EXPECT_DOUBLE_EQ(map.apply(10.0), 1.0);
    EXPECT_THROW(rescale_to_unit(Eigen::VectorXd::Constant(4, 3.0)), DegenerateColumnError);
}
