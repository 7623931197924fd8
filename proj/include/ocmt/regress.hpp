#pragma once
#include <Eigen/Dense>
#include <string>
#include <vector>

#include <ocmt/basis.hpp>
#include <ocmt/detail/linalg.hpp>
#include <ocmt/error.hpp>

namespace ocmt {

struct OlsFit
{
    Eigen::VectorXd coefficients;
    Eigen::VectorXd residuals;
    double rss = 0.0;
    double sigma2_hat = 0.0;  // rss / n
    double intercept = 0.0;   // only set by post_selection_ols
};

struct TestStat
{
    double value = 0.0;
    int variable_index = 0;
    std::vector<int> conditioning_set;
};

namespace detail {

inline void check_rows(Eigen::Index design_rows, Eigen::Index y_rows)
{
    if (design_rows != y_rows) {
        throw DimensionError("design has " + std::to_string(design_rows) + " rows but response has "
                             + std::to_string(y_rows));
    }
}

inline Eigen::MatrixXd stack_blocks(const std::vector<const DesignBlock*>& blocks, Eigen::Index n)
{
    Eigen::Index width = 0;
    for (const auto* b : blocks) width += b->width();
    Eigen::MatrixXd z(n, width);
    Eigen::Index at = 0;
    for (const auto* b : blocks) {
        check_rows(b->rows(), n);
        z.middleCols(at, b->width()) = b->values;
        at += b->width();
    }
    return z;
}

// relative floor on the residual variance below which a fit is "perfect"
inline constexpr double zero_variance_tolerance = 1e-14;

inline void check_variance(double sigma2, const Eigen::VectorXd& y, int variable_index)
{
    const double scale = y.squaredNorm() / static_cast<double>(y.size());
    if (!(sigma2 >= zero_variance_tolerance * scale) || scale == 0.0) {
        throw ZeroVarianceError("variable " + std::to_string(variable_index) + ": residual variance vanished");
    }
}

} // namespace detail

/// Least squares of y on `design` (no intercept), by thin QR.
inline OlsFit ols(const Eigen::MatrixXd& design, const Eigen::VectorXd& y)
{
    detail::check_rows(design.rows(), y.size());
    if (design.rows() <= design.cols()) {
        throw OverparameterizedError("ols needs more rows than columns (" + std::to_string(design.rows()) + " <= "
                                     + std::to_string(design.cols()) + ")");
    }
    detail::ThinQr qr(design);
    if (!qr.full_rank()) throw SingularDesignError("design matrix is numerically singular");
    const Eigen::VectorXd qty = qr.q.transpose() * y;
    OlsFit fit;
    fit.coefficients = qr.solve_from_qty(qty);
    fit.residuals = y - qr.q * qty;
    fit.rss = fit.residuals.squaredNorm();
    fit.sigma2_hat = fit.rss / static_cast<double>(y.size());
    return fit;
}

/// Marginal sieve statistic: beta' (X'X / sigma^2) beta = y'P_X y / sigma^2,
/// with sigma^2 the in-sample mean squared residual.
inline TestStat marginal_stat(const DesignBlock& block, const Eigen::VectorXd& y)
{
    detail::check_rows(block.rows(), y.size());
    if (block.rows() <= block.width()) throw OverparameterizedError("block is wider than the sample");
    detail::ThinQr qr(block.values);
    if (!qr.full_rank()) {
        throw SingularDesignError("variable " + std::to_string(block.variable_index) + ": singular design");
    }
    const Eigen::VectorXd qty = qr.q.transpose() * y;
    const double rss = (y - qr.q * qty).squaredNorm();
    const double sigma2 = rss / static_cast<double>(y.size());
    detail::check_variance(sigma2, y, block.variable_index);
    return TestStat{qty.squaredNorm() / sigma2, block.variable_index, {}};
}

/// Residualizes against a fixed conditioning design, so that many candidate
/// blocks can be screened against the same preselected set while the
/// conditioning factorization is computed once.
class PartitionedScreen
{
public:
    PartitionedScreen(const std::vector<const DesignBlock*>& preselected, const Eigen::VectorXd& y)
        : y_(y)
    {
        for (const auto* b : preselected) conditioning_.push_back(b->variable_index);
        if (preselected.empty()) return;
        z_qr_ = detail::ThinQr(detail::stack_blocks(preselected, y.size()));
        if (!z_qr_.full_rank()) throw SingularDesignError("preselected design is numerically singular");
        y_resid_ = y - z_qr_.q * (z_qr_.q.transpose() * y);
    }

    Eigen::Index conditioning_width() const noexcept { return z_qr_.width(); }
    const std::vector<int>& conditioning_set() const noexcept { return conditioning_; }

    TestStat stat(const DesignBlock& block) const
    {
        if (conditioning_.empty()) return marginal_stat(block, y_);
        detail::check_rows(block.rows(), y_.size());
        if (block.rows() <= conditioning_width() + block.width()) {
            throw OverparameterizedError("stacked design is wider than the sample");
        }
        const Eigen::MatrixXd x_resid = block.values - z_qr_.q * (z_qr_.q.transpose() * block.values);
        detail::ThinQr xq(x_resid);
        // Singular values of M_Z X bound those of the stacked [Z, X] from
        // below, so compare against the larger scale of the two pieces.
        detail::ThinQr xraw_scale(block.values);
        if (!xq.full_rank(std::max(z_qr_.sigma_max, xraw_scale.sigma_max))) {
            throw SingularDesignError("variable " + std::to_string(block.variable_index)
                                      + ": stacked design is numerically singular");
        }
        const Eigen::VectorXd g = xq.q.transpose() * y_resid_;
        const double rss = (y_resid_ - xq.q * g).squaredNorm();
        const double sigma2 = rss / static_cast<double>(y_.size());
        detail::check_variance(sigma2, y_, block.variable_index);
        return TestStat{g.squaredNorm() / sigma2, block.variable_index, conditioning_};
    }

private:
    Eigen::VectorXd y_;
    Eigen::VectorXd y_resid_;
    detail::ThinQr z_qr_{Eigen::MatrixXd(0, 0)};
    std::vector<int> conditioning_;
};

/// Statistic for block_l after partialling out the preselected blocks,
/// computed by residualization (M_Z is never formed). The variance is the
/// mean squared residual of the joint regression on (Z, X_l).
inline TestStat partitioned_stat(const DesignBlock& block_l, const std::vector<const DesignBlock*>& preselected,
                                 const Eigen::VectorXd& y)
{
    return PartitionedScreen(preselected, y).stat(block_l);
}

/// Joint OLS of y on an intercept and the concatenated blocks. With no
/// blocks this is the intercept-only fit.
inline OlsFit post_selection_ols(const std::vector<const DesignBlock*>& blocks, const Eigen::VectorXd& y)
{
    const auto n = y.size();
    Eigen::Index width = 0;
    for (const auto* b : blocks) width += b->width();
    if (width >= n) {
        throw OverparameterizedError("selected design has " + std::to_string(width) + " columns for "
                                     + std::to_string(n) + " observations");
    }
    Eigen::MatrixXd design(n, width + 1);
    design.col(0).setOnes();
    design.rightCols(width) = detail::stack_blocks(blocks, n);
    OlsFit full = ols(design, y);
    OlsFit fit;
    fit.intercept = full.coefficients[0];
    fit.coefficients = full.coefficients.tail(width);
    fit.residuals = std::move(full.residuals);
    fit.rss = full.rss;
    fit.sigma2_hat = full.sigma2_hat;
    return fit;
}

inline OlsFit post_selection_ols(const std::vector<DesignBlock>& blocks, const Eigen::VectorXd& y)
{
    std::vector<const DesignBlock*> ptrs;
    for (const auto& b : blocks) ptrs.push_back(&b);
    return post_selection_ols(ptrs, y);
}

} // namespace ocmt
