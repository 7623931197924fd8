#pragma once
#include <Eigen/Dense>
#include <algorithm>

namespace ocmt {
namespace detail {

/// Relative singular-value cutoff used for every rank decision.
inline constexpr double rank_tolerance = 1e-10;

/// Thin orthogonal factorization A = Q R of a tall matrix.
/// Singular values of R coincide with those of A, which gives a cheap
/// rank check without an SVD of the n-row matrix.
struct ThinQr
{
    Eigen::MatrixXd q;  // n x w, orthonormal columns
    Eigen::MatrixXd r;  // w x w, upper triangular
    double sigma_max = 0.0;
    double sigma_min = 0.0;

    explicit ThinQr(const Eigen::MatrixXd& a)
    {
        const auto n = a.rows();
        const auto w = a.cols();
        if (w == 0) {
            q.resize(n, 0);
            r.resize(0, 0);
            return;
        }
        Eigen::HouseholderQR<Eigen::MatrixXd> qr(a);
        q = qr.householderQ() * Eigen::MatrixXd::Identity(n, w);
        r = qr.matrixQR().topLeftCorner(w, w).triangularView<Eigen::Upper>();
        Eigen::JacobiSVD<Eigen::MatrixXd> svd(r);
        const auto& sv = svd.singularValues();
        sigma_max = sv.maxCoeff();
        sigma_min = sv.minCoeff();
    }

    Eigen::Index width() const noexcept { return r.cols(); }

    bool full_rank(double reference_sigma_max = 0.0) const noexcept
    {
        if (width() == 0) return true;
        const double ref = std::max(sigma_max, reference_sigma_max);
        return ref > 0.0 && sigma_min >= rank_tolerance * ref;
    }

    /// Coefficients of the least-squares projection given Q'y.
    Eigen::VectorXd solve_from_qty(const Eigen::VectorXd& qty) const
    {
        return r.triangularView<Eigen::Upper>().solve(qty);
    }
};

} // namespace detail
} // namespace ocmt
