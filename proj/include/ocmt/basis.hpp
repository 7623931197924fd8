#pragma once
#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include <ocmt/detail/linalg.hpp>
#include <ocmt/error.hpp>

namespace ocmt {

enum class VariableKind {
    continuous,     // enters through a centered B-spline block
    binary_linear,  // enters linearly through one centered column
};

inline std::string to_string(VariableKind k)
{
    return k == VariableKind::continuous ? "continuous" : "binary";
}

enum class KnotRule { equally_spaced };

/// Sieve size and spline order shared by every continuous covariate.
struct BasisConfig
{
    int m_n = 0;           // basis functions per continuous covariate
    int spline_order = 4;  // 4 = cubic
    KnotRule knot_rule = KnotRule::equally_spaced;

    void validate() const
    {
        if (spline_order < 2) {
            throw ConfigError("spline order must be at least 2, got " + std::to_string(spline_order));
        }
        if (m_n < spline_order) {
            throw ConfigError("m_n (" + std::to_string(m_n) + ") must be at least the spline order ("
                              + std::to_string(spline_order) + ")");
        }
    }

    /// floor(n^{1/4}) + 1
    static int default_m_n(int n)
    {
        return static_cast<int>(std::floor(std::pow(static_cast<double>(n), 0.25))) + 1;
    }
};

namespace detail {

/// Clamped knot vector for `count` functions of the given order on [0,1].
inline std::vector<double> clamped_knots(int count, int order)
{
    const int interior = count - order;
    std::vector<double> t;
    t.reserve(count + order);
    for (int i = 0; i < order; ++i) t.push_back(0.0);
    for (int i = 1; i <= interior; ++i) {
        t.push_back(static_cast<double>(i) / static_cast<double>(interior + 1));
    }
    for (int i = 0; i < order; ++i) t.push_back(1.0);
    return t;
}

/// Writes the `count` B-spline values at x into out[0..count).
inline void bspline_values(double x, int count, int order, const std::vector<double>& t, double* out)
{
    const int degree = order - 1;
    // knot span s with t[s] <= x < t[s+1]; x == 1 belongs to the last span
    int span = count - 1;
    if (x < 1.0) {
        auto it = std::upper_bound(t.begin() + degree, t.begin() + count + 1, x);
        span = static_cast<int>(it - t.begin()) - 1;
    }

    double local[16];
    double left[16];
    double right[16];
    local[0] = 1.0;
    for (int j = 1; j <= degree; ++j) {
        left[j] = x - t[span + 1 - j];
        right[j] = t[span + j] - x;
        double saved = 0.0;
        for (int r = 0; r < j; ++r) {
            const double tmp = local[r] / (right[r + 1] + left[j - r]);
            local[r] = saved + right[r + 1] * tmp;
            saved = left[j - r] * tmp;
        }
        local[j] = saved;
    }
    std::fill(out, out + count, 0.0);
    for (int r = 0; r <= degree; ++r) out[span - degree + r] = local[r];
}

} // namespace detail

/// Values of the m_n + 1 raw B-spline functions at x in [0,1].
inline Eigen::VectorXd raw_bspline_basis(double x, const BasisConfig& config)
{
    config.validate();
    if (config.spline_order > 15) throw ConfigError("spline order above 15 is not supported");
    if (!(x >= 0.0 && x <= 1.0)) {
        throw DomainError("B-spline argument " + std::to_string(x) + " outside [0,1]");
    }
    const int count = config.m_n + 1;
    const auto knots = detail::clamped_knots(count, config.spline_order);
    Eigen::VectorXd v(count);
    detail::bspline_values(x, count, config.spline_order, knots, v.data());
    return v;
}

/// Min-max map of a column onto [0,1]; out-of-range inputs are clamped.
struct AffineUnitMap
{
    double lo = 0.0;
    double hi = 1.0;

    double apply(double v) const
    {
        const double u = (v - lo) / (hi - lo);
        return std::clamp(u, 0.0, 1.0);
    }
};

inline std::pair<Eigen::VectorXd, AffineUnitMap> rescale_to_unit(const Eigen::VectorXd& x)
{
    if (x.size() == 0) throw DegenerateColumnError("cannot rescale an empty column");
    const double lo = x.minCoeff();
    const double hi = x.maxCoeff();
    if (!(hi > lo)) throw DegenerateColumnError("column has a single distinct value");
    AffineUnitMap map{lo, hi};
    Eigen::VectorXd out(x.size());
    for (Eigen::Index i = 0; i < x.size(); ++i) out[i] = map.apply(x[i]);
    return {std::move(out), map};
}

/// Centered sieve design for one covariate, together with the training
/// centering constants needed to evaluate it on new points.
struct DesignBlock
{
    Eigen::MatrixXd values;
    bool column_means_removed = true;
    int variable_index = 0;
    VariableKind kind = VariableKind::continuous;
    Eigen::RowVectorXd column_means;
    BasisConfig basis;

    Eigen::Index width() const noexcept { return values.cols(); }
    Eigen::Index rows() const noexcept { return values.rows(); }

    /// Design rows for new covariate values, centered with training means.
    /// Continuous inputs are clamped to [0,1].
    Eigen::MatrixXd evaluate(const Eigen::VectorXd& x) const
    {
        Eigen::MatrixXd out(x.size(), width());
        if (kind == VariableKind::binary_linear) {
            out.col(0) = x.array() - column_means[0];
            return out;
        }
        const int count = basis.m_n + 1;
        const auto knots = detail::clamped_knots(count, basis.spline_order);
        Eigen::VectorXd raw(count);
        for (Eigen::Index i = 0; i < x.size(); ++i) {
            detail::bspline_values(std::clamp(x[i], 0.0, 1.0), count, basis.spline_order, knots, raw.data());
            out.row(i) = raw.tail(count - 1).transpose() - column_means;
        }
        return out;
    }
};

/// Builds the centered block for one covariate column.
///
/// Continuous columns evaluate m_n + 1 raw functions, drop the first and
/// center the rest, which leaves m_n columns spanning the same centered
/// function space as the full family. Binary columns become one centered
/// column. Throws RankError when the block is numerically rank deficient.
inline DesignBlock build_design_block(const Eigen::VectorXd& x, VariableKind kind, const BasisConfig& config,
                                      int variable_index = 0)
{
    const auto n = x.size();
    DesignBlock block;
    block.kind = kind;
    block.variable_index = variable_index;
    block.basis = config;

    if (kind == VariableKind::binary_linear) {
        if (n < 2) throw DimensionError("need at least two observations");
        const double mean = x.mean();
        block.values = (x.array() - mean).matrix();
        block.column_means = Eigen::RowVectorXd::Constant(1, mean);
    } else {
        config.validate();
        if (n < config.m_n + 2) {
            throw DimensionError("n = " + std::to_string(n) + " is below m_n + 2 = " + std::to_string(config.m_n + 2));
        }
        const int count = config.m_n + 1;
        const auto knots = detail::clamped_knots(count, config.spline_order);
        Eigen::MatrixXd raw(n, count);
        Eigen::VectorXd row(count);
        for (Eigen::Index i = 0; i < n; ++i) {
            const double v = x[i];
            if (!(v >= 0.0 && v <= 1.0)) {
                throw DomainError("variable " + std::to_string(variable_index) + ": value " + std::to_string(v)
                                  + " at row " + std::to_string(i) + " outside [0,1]");
            }
            detail::bspline_values(v, count, config.spline_order, knots, row.data());
            raw.row(i) = row.transpose();
        }
        block.values = raw.rightCols(count - 1);
        block.column_means = block.values.colwise().mean();
        block.values.rowwise() -= block.column_means;
    }

    if (!block.values.allFinite()) {
        throw NumericError("variable " + std::to_string(variable_index) + ": non-finite design entries");
    }
    detail::ThinQr qr(block.values);
    if (!qr.full_rank()) {
        throw RankError("variable " + std::to_string(variable_index) + ": design block is rank deficient");
    }
    return block;
}

} // namespace ocmt
