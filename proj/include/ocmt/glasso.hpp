#pragma once
#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include <ocmt/basis.hpp>
#include <ocmt/detail/linalg.hpp>
#include <ocmt/error.hpp>
#include <ocmt/regress.hpp>
#include <ocmt/selection.hpp>

namespace ocmt {

/// Penalty level and per-group weights. An infinite weight excludes the
/// group: it carries no coefficients and is never updated.
struct GroupPenaltySpec
{
    double lambda = 0.0;
    std::vector<double> group_weights;

    static GroupPenaltySpec uniform(double lambda, std::size_t groups)
    {
        return GroupPenaltySpec{lambda, std::vector<double>(groups, 1.0)};
    }

    bool excluded(std::size_t j) const { return std::isinf(group_weights[j]); }
};

struct GroupLassoFit
{
    std::vector<Eigen::VectorXd> coefficients;   // per group, in block coordinates
    std::vector<Eigen::VectorXd> orthonormal;    // per group, in orthonormalized coordinates
    std::vector<int> active_groups;
    std::vector<double> objective_trace;
    int iterations = 0;
    bool converged = false;
    bool kkt_satisfied = false;
    double chosen_lambda = 0.0;
    double rss = 0.0;
    double bic = std::numeric_limits<double>::quiet_NaN();

    // adaptive fits only
    std::optional<double> first_step_lambda;
    std::vector<int> first_step_active;
    bool empty = false;  // first step removed every group
};

/// Within-group orthonormalized design: X_j = Q_j R_j with Q_j'Q_j = I.
/// The solver works on Q_j; coefficients map back through R_j^{-1}.
class GroupDesign
{
public:
    GroupDesign() = default;

    explicit GroupDesign(const std::vector<Eigen::MatrixXd>& blocks)
    {
        for (std::size_t j = 0; j < blocks.size(); ++j) add(blocks[j], static_cast<int>(j));
    }

    explicit GroupDesign(const std::vector<const DesignBlock*>& blocks)
    {
        for (const auto* b : blocks) add(b->values, b->variable_index);
    }

    std::size_t groups() const noexcept { return q_.size(); }
    Eigen::Index rows() const noexcept { return q_.empty() ? 0 : q_.front().rows(); }
    const Eigen::MatrixXd& q(std::size_t j) const { return q_[j]; }
    const Eigen::MatrixXd& r(std::size_t j) const { return r_[j]; }

    Eigen::VectorXd to_block_coordinates(std::size_t j, const Eigen::VectorXd& theta) const
    {
        return r_[j].triangularView<Eigen::Upper>().solve(theta);
    }

private:
    void add(const Eigen::MatrixXd& x, int label)
    {
        if (!q_.empty() && x.rows() != q_.front().rows()) throw DimensionError("groups differ in row count");
        if (x.rows() <= x.cols()) throw OverparameterizedError("group wider than the sample");
        detail::ThinQr qr(x);
        if (!qr.full_rank()) throw RankError("group " + std::to_string(label) + " is rank deficient");
        q_.push_back(std::move(qr.q));
        r_.push_back(std::move(qr.r));
    }

    std::vector<Eigen::MatrixXd> q_;
    std::vector<Eigen::MatrixXd> r_;
};

/// Geometric grid of 31 values from 0.5||y|| down to max{0.05, 1e-5||y||}.
/// When the lower end is not below the upper end the single value
/// lambda_max is returned and `degenerate` is set.
inline std::vector<double> lambda_grid(double y_norm, bool* degenerate = nullptr)
{
    if (!(y_norm > 0.0)) throw DomainError("lambda grid needs a positive response norm");
    const double hi = 0.5 * y_norm;
    const double lo = std::max(0.05, 1e-5 * y_norm);
    if (degenerate) *degenerate = !(lo < hi);
    if (!(lo < hi)) return {hi};
    std::vector<double> grid(31);
    const double log_hi = std::log(hi);
    const double log_lo = std::log(lo);
    grid[0] = hi;
    for (int j = 1; j <= 30; ++j) grid[j] = std::exp(log_hi + (log_lo - log_hi) * static_cast<double>(j) / 30.0);
    return grid;
}

/// Smallest lambda at which every group is zero: 2 max_j ||Q_j'y|| / w_j.
inline double zero_solution_lambda(const GroupDesign& design, const Eigen::VectorXd& y,
                                   const std::vector<double>& weights)
{
    double bound = 0.0;
    for (std::size_t j = 0; j < design.groups(); ++j) {
        if (std::isinf(weights[j])) continue;
        const double g = (design.q(j).transpose() * y).norm();
        if (weights[j] == 0.0) {
            if (g > 0.0) return std::numeric_limits<double>::infinity();
            continue;
        }
        bound = std::max(bound, 2.0 * g / weights[j]);
    }
    return bound;
}

struct BcdOptions
{
    double relative_tolerance = 1e-8;
    int max_sweeps = 1000;
    double kkt_tolerance = 1e-5;
};

namespace detail {

inline double group_penalty(const std::vector<Eigen::VectorXd>& theta, const GroupPenaltySpec& pen)
{
    double s = 0.0;
    for (std::size_t j = 0; j < theta.size(); ++j) {
        if (!pen.excluded(j)) s += pen.group_weights[j] * theta[j].norm();
    }
    return pen.lambda * s;
}

inline bool kkt_holds(const GroupDesign& design, const std::vector<Eigen::VectorXd>& theta,
                      const Eigen::VectorXd& resid, const GroupPenaltySpec& pen, double tol, double abs_floor)
{
    for (std::size_t j = 0; j < design.groups(); ++j) {
        if (pen.excluded(j)) continue;
        const double lw = pen.lambda * pen.group_weights[j];
        const Eigen::VectorXd grad = 2.0 * (design.q(j).transpose() * resid);
        const double norm = theta[j].norm();
        if (norm > 0.0) {
            if ((grad - lw * theta[j] / norm).norm() > tol * lw + abs_floor) return false;
        } else if (grad.norm() > lw * (1.0 + tol) + abs_floor) {
            return false;
        }
    }
    return true;
}

} // namespace detail

/// Minimizes ||y - sum_j Q_j theta_j||^2 + lambda sum_j w_j ||theta_j|| by
/// cyclic exact block updates
///   theta_j <- (1 - lambda w_j / (2 ||g_j||))_+ g_j,  g_j = Q_j'(partial residual).
/// `warm_start` is in orthonormalized coordinates.
inline GroupLassoFit group_lasso_bcd(const GroupDesign& design, const Eigen::VectorXd& y, const GroupPenaltySpec& penalty,
                                     const std::vector<Eigen::VectorXd>* warm_start = nullptr,
                                     const BcdOptions& opts = {})
{
    const std::size_t groups = design.groups();
    if (penalty.group_weights.size() != groups) throw DimensionError("one weight per group required");
    if (!(penalty.lambda >= 0.0)) throw ConfigError("lambda must be nonnegative");
    for (double w : penalty.group_weights) {
        if (!(w >= 0.0)) throw ConfigError("group weights must be nonnegative");
    }
    if (groups > 0 && design.rows() != y.size()) throw DimensionError("response length does not match design");

    std::vector<Eigen::VectorXd> theta(groups);
    for (std::size_t j = 0; j < groups; ++j) {
        const auto w = design.q(j).cols();
        if (warm_start && !penalty.excluded(j)) {
            if ((*warm_start)[j].size() != w) throw DimensionError("warm start has the wrong group width");
            theta[j] = (*warm_start)[j];
        } else {
            theta[j] = Eigen::VectorXd::Zero(w);
        }
    }
    Eigen::VectorXd resid = y;
    for (std::size_t j = 0; j < groups; ++j) {
        if (theta[j].squaredNorm() > 0.0) resid.noalias() -= design.q(j) * theta[j];
    }

    GroupLassoFit fit;
    fit.chosen_lambda = penalty.lambda;
    const double abs_floor = 1e-9 * std::max(1.0, y.norm());
    double objective = resid.squaredNorm() + detail::group_penalty(theta, penalty);
    fit.objective_trace.push_back(objective);

    Eigen::VectorXd g;
    for (int sweep = 1; sweep <= opts.max_sweeps; ++sweep) {
        for (std::size_t j = 0; j < groups; ++j) {
            if (penalty.excluded(j)) continue;
            const auto& q = design.q(j);
            g.noalias() = q.transpose() * resid;
            g += theta[j];
            const double gn = g.norm();
            const double lw = penalty.lambda * penalty.group_weights[j];
            // a ratio within rounding of 1 means lambda sits on the zero bound
            const double ratio = gn > 0.0 ? lw / (2.0 * gn) : 1.0;
            const double shrink = ratio >= 1.0 - 8.0 * std::numeric_limits<double>::epsilon() ? 0.0 : 1.0 - ratio;
            const Eigen::VectorXd updated = shrink * g;
            const Eigen::VectorXd delta = theta[j] - updated;
            if (delta.squaredNorm() > 0.0) resid.noalias() += q * delta;
            theta[j] = updated;
        }
        const double next = resid.squaredNorm() + detail::group_penalty(theta, penalty);
        fit.objective_trace.push_back(next);
        fit.iterations = sweep;
        const double change = std::abs(objective - next) / std::max(next, std::numeric_limits<double>::min());
        objective = next;
        if (change < opts.relative_tolerance) {
            if (detail::kkt_holds(design, theta, resid, penalty, opts.kkt_tolerance, abs_floor)) {
                fit.converged = true;
                break;
            }
            // objective has stalled at machine precision; further sweeps cannot help
            if (change < 1e-15) break;
        }
    }

    // refresh the residual to shed accumulated update error
    resid = y;
    for (std::size_t j = 0; j < groups; ++j) {
        if (theta[j].squaredNorm() > 0.0) resid.noalias() -= design.q(j) * theta[j];
    }
    fit.kkt_satisfied = detail::kkt_holds(design, theta, resid, penalty, opts.kkt_tolerance, abs_floor);
    fit.rss = resid.squaredNorm();
    fit.coefficients.resize(groups);
    for (std::size_t j = 0; j < groups; ++j) {
        fit.coefficients[j] = design.to_block_coordinates(j, theta[j]);
        if (theta[j].norm() > 0.0) fit.active_groups.push_back(static_cast<int>(j));
    }
    fit.orthonormal = std::move(theta);
    return fit;
}

inline GroupLassoFit group_lasso_bcd(const std::vector<const DesignBlock*>& blocks, const Eigen::VectorXd& y,
                                     const GroupPenaltySpec& penalty,
                                     const std::vector<Eigen::VectorXd>* warm_start = nullptr)
{
    return group_lasso_bcd(GroupDesign(blocks), y, penalty, warm_start);
}

namespace detail {

inline double lasso_bic(double rss, double tss, std::size_t active, double n)
{
    return n * std::log(std::max(rss, 1e-12 * tss) / n) + static_cast<double>(active) * std::log(n);
}

/// Solves along the grid (largest lambda first, warm started) and returns
/// the BIC minimizer; ties go to the larger lambda.
inline GroupLassoFit bic_path(const GroupDesign& design, const Eigen::VectorXd& y, const std::vector<double>& grid,
                              const std::vector<double>& weights)
{
    const double n = static_cast<double>(y.size());
    const double tss = y.squaredNorm();
    std::optional<GroupLassoFit> best;
    std::vector<Eigen::VectorXd> warm;
    for (double lambda : grid) {
        GroupPenaltySpec pen{lambda, weights};
        GroupLassoFit fit = group_lasso_bcd(design, y, pen, warm.empty() ? nullptr : &warm);
        fit.bic = lasso_bic(fit.rss, tss, fit.active_groups.size(), n);
        warm = fit.orthonormal;
        if (!best || fit.bic < best->bic) best = std::move(fit);
    }
    return std::move(*best);
}

} // namespace detail

/// Two-step adaptive group Lasso with BIC-tuned penalties. Step one is the
/// plain group Lasso; step two reweights each surviving group by the inverse
/// norm of its step-one estimate and drops the groups step one zeroed.
/// The loss is taken on y as given, with no intercept: the blocks are
/// centered, so a nonzero mean of y stays in every residual and in the BIC.
inline GroupLassoFit adaptive_group_lasso(const std::vector<const DesignBlock*>& blocks, const Eigen::VectorXd& y)
{
    const std::size_t groups = blocks.size();
    if (groups == 0) {
        GroupLassoFit empty;
        empty.empty = true;
        empty.converged = true;
        empty.kkt_satisfied = true;
        empty.rss = y.squaredNorm();
        return empty;
    }
    const GroupDesign design(blocks);
    const auto grid = lambda_grid(y.norm());

    GroupLassoFit first = detail::bic_path(design, y, grid, std::vector<double>(groups, 1.0));
    if (first.active_groups.empty()) {
        first.empty = true;
        first.first_step_lambda = first.chosen_lambda;
        return first;
    }
    std::vector<double> weights(groups, std::numeric_limits<double>::infinity());
    for (int j : first.active_groups) weights[j] = 1.0 / first.orthonormal[j].norm();

    GroupLassoFit second = detail::bic_path(design, y, grid, weights);
    second.first_step_lambda = first.chosen_lambda;
    second.first_step_active = first.active_groups;
    return second;
}

inline GroupLassoFit adaptive_group_lasso(const std::vector<DesignBlock>& blocks, const Eigen::VectorXd& y)
{
    std::vector<const DesignBlock*> ptrs;
    for (const auto& b : blocks) ptrs.push_back(&b);
    return adaptive_group_lasso(ptrs, y);
}

struct CleanupResult
{
    std::vector<int> selected;         // surviving variable indices, ascending
    std::vector<DesignBlock> blocks;   // blocks of the survivors, same order
    OlsFit fit;                        // post-selection OLS on the survivors
    GroupLassoFit lasso;
};

/// Adaptive group Lasso restricted to the OCMT selection, followed by the
/// OLS refit on the survivors. Never enlarges the candidate set.
inline CleanupResult post_ocmt_cleanup(const std::vector<const DesignBlock*>& candidates, const Eigen::VectorXd& y)
{
    CleanupResult out;
    out.lasso = adaptive_group_lasso(candidates, y);
    if (!out.lasso.empty) {
        for (int g : out.lasso.active_groups) out.blocks.push_back(*candidates[g]);
    }
    std::sort(out.blocks.begin(), out.blocks.end(),
              [](const DesignBlock& a, const DesignBlock& b) { return a.variable_index < b.variable_index; });
    for (const auto& b : out.blocks) out.selected.push_back(b.variable_index);
    out.fit = post_selection_ols(out.blocks, y);
    return out;
}

inline CleanupResult post_ocmt_cleanup(const Dataset& data, const OcmtResult& ocmt, const BasisConfig& basis)
{
    BasisConfig b = basis;
    if (b.m_n == 0) b.m_n = BasisConfig::default_m_n(data.n());
    std::vector<DesignBlock> blocks;
    for (int j : ocmt.selected) blocks.push_back(build_design_block(data.x.col(j), data.kinds[j], b, j));
    std::vector<const DesignBlock*> ptrs;
    for (const auto& blk : blocks) ptrs.push_back(&blk);
    return post_ocmt_cleanup(ptrs, data.y);
}

} // namespace ocmt
