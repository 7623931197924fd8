#pragma once
#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <string>
#include <vector>

#include <ocmt/basis.hpp>
#include <ocmt/dataset.hpp>
#include <ocmt/error.hpp>
#include <ocmt/rng.hpp>

namespace ocmt {

namespace detail {

/// Continuous antiderivative of 1 / (2 - sin t).
inline double inv_two_minus_sin_primitive(double t)
{
    using std::numbers::pi;
    const double s3 = std::sqrt(3.0);
    return 2.0 / s3 * (std::atan((2.0 * std::tan(t / 2.0) - 1.0) / s3) + pi * std::floor((t + pi) / (2.0 * pi)));
}

} // namespace detail

/// Additive components of the simulation designs. which = 1..5; f5 is the
/// hidden-signal component
///   f5(x) = -E[2.55 f1(X1) + 2.57 f2(X2) + 1.68 f3(X3) + f4(X4) | X5 = x]
/// with X1, X2 ~ U(0,1) independent of X5 and X3, X4 = (W + X5)/2,
/// evaluated in closed form. Its argument is clipped to [1e-12, 1 - 1e-12].
inline double component_function(int which, double x)
{
    using std::numbers::pi;
    if (!(x >= 0.0 && x <= 1.0)) {
        throw DomainError("component argument " + std::to_string(x) + " outside [0,1]");
    }
    switch (which) {
        case 1: return x;
        case 2: return (2.0 * x - 1.0) * (2.0 * x - 1.0);
        case 3: {
            const double s = std::sin(2.0 * pi * x);
            return s / (2.0 - s);
        }
        case 4: {
            const double s = std::sin(2.0 * pi * x);
            const double c = std::cos(2.0 * pi * x);
            return 0.1 * s + 0.2 * c + 0.3 * s * s + 0.4 * c * c * c + 0.5 * s * s * s;
        }
        case 5: {
            const double u = std::clamp(x, 1e-12, 1.0 - 1e-12);
            const double s = std::sin(pi * u);
            const double c = std::cos(pi * u);
            // E f3((W + u)/2) and E f4((W + u)/2), W ~ U(0,1)
            const double ef3 = -1.0
                               + 2.0 / pi
                                     * (detail::inv_two_minus_sin_primitive(pi * (u + 1.0))
                                        - detail::inv_two_minus_sin_primitive(pi * u));
            const double ef4 = 0.15 + (1.2 * c - 1.2 * s + 0.8 / 3.0 * s * s * s - c * c * c / 3.0) / pi;
            return -(2.55 * 0.5 + 2.57 / 3.0 + 1.68 * ef3 + ef4);
        }
        default: throw DomainError("component index must be 1..5, got " + std::to_string(which));
    }
}

struct DgpSpec
{
    int id = 1;
    int n = 400;
    int p_n = 100;
    int forecast_n = 200;
    std::uint64_t seed = 0;
    std::uint64_t replication = 0;

    void validate() const
    {
        if (id < 1 || id > 10) throw ConfigError("DGP id must be 1..10, got " + std::to_string(id));
        if (p_n < 10) throw ConfigError("DGP designs need p_n >= 10");
        if (n < 1) throw ConfigError("n must be positive");
        if (forecast_n < 0) throw ConfigError("forecast_n must be nonnegative");
    }
};

/// Random-stream roles. Forecast rows use the same roles offset by
/// forecast_offset so they are independent of the training rows.
enum StreamRole : std::uint64_t {
    role_w = 1,
    role_u = 2,
    role_u_tilde = 3,
    role_v = 4,
    role_epsilon = 5,
    forecast_offset = 0x100,
};

/// Regression function E[Y | X = row] of design `dgp_id` (row holds X1..Xp).
inline double oracle_mean(int dgp_id, const Eigen::Ref<const Eigen::VectorXd>& row)
{
    if (row.size() < 5) throw DimensionError("covariate row shorter than the design's signal block");
    const auto f = [&](int which, int col) { return component_function(which, row[col - 1]); };
    switch (dgp_id) {
        case 1: case 2: case 5: case 7:
            return 2.55 * f(1, 1) + 2.57 * f(2, 2) + 1.68 * f(3, 3) + f(4, 4);
        case 3: case 4: case 6: case 8:
            return 2.55 * f(1, 1) + 2.57 * f(2, 2) + 1.68 * f(3, 3) + f(4, 4) + f(5, 5);
        case 9:
            return 2.57 * f(2, 1) + 1.68 * f(3, 2) + 1.47 * row[2] + 1.47 * row[3];
        case 10:
            return 2.57 * f(2, 1) + 1.5 * row[1] + 1.5 * row[2] - row[3];
        default: throw ConfigError("DGP id must be 1..10");
    }
}

inline double oracle_mean(const DgpSpec& spec, const Eigen::Ref<const Eigen::VectorXd>& row)
{
    if (row.size() != spec.p_n) throw DimensionError("covariate row length does not match p_n");
    return oracle_mean(spec.id, row);
}

struct LabeledDataset
{
    int dgp_id = 1;
    Dataset dataset;
    Dataset forecast;
    std::vector<int> true_signals;    // 0-based column indices
    std::vector<int> pseudo_signals;
    std::vector<int> hidden_signals;
    Eigen::VectorXd epsilon;
    Eigen::VectorXd forecast_epsilon;

    double regression_function(const Eigen::Ref<const Eigen::VectorXd>& row) const
    {
        return oracle_mean(dgp_id, row);
    }

    /// Columns that are neither signals nor pseudo-signals.
    std::vector<int> noise_variables() const
    {
        std::vector<int> out;
        for (int j = 0; j < dataset.p(); ++j) {
            if (!std::binary_search(true_signals.begin(), true_signals.end(), j)
                && !std::binary_search(pseudo_signals.begin(), pseudo_signals.end(), j)) {
                out.push_back(j);
            }
        }
        return out;
    }

    /// Columns that are not signals (pseudo-signals included).
    std::vector<int> non_signals() const
    {
        std::vector<int> out;
        for (int j = 0; j < dataset.p(); ++j) {
            if (!std::binary_search(true_signals.begin(), true_signals.end(), j)) out.push_back(j);
        }
        return out;
    }
};

/// Column kinds of a design: DGPs 9 and 10 mix in binary columns.
inline std::vector<VariableKind> dgp_kinds(int id, int p)
{
    std::vector<VariableKind> kinds(p, VariableKind::continuous);
    if (id != 9 && id != 10) return kinds;
    const int half = (p + 1) / 2;  // odd p: the extra column stays continuous
    if (id == 9) {
        kinds[2] = kinds[3] = VariableKind::binary_linear;
    } else {
        kinds[1] = kinds[2] = kinds[3] = VariableKind::binary_linear;
    }
    for (int j = half; j < p; ++j) kinds[j] = VariableKind::binary_linear;
    return kinds;
}

namespace detail {

struct DrawnRows
{
    Eigen::MatrixXd x;
    Eigen::VectorXd eps;
    Eigen::VectorXd y;
};

inline DrawnRows draw_rows(const DgpSpec& spec, int rows, std::uint64_t role_offset)
{
    const int p = spec.p_n;
    const int id = spec.id;
    const std::uint64_t stride = static_cast<std::uint64_t>(p) + 16;
    const CounterStream w_stream(spec.seed, spec.replication, role_w + role_offset);
    const CounterStream u_stream(spec.seed, spec.replication, role_u + role_offset);
    const CounterStream ut_stream(spec.seed, spec.replication, role_u_tilde + role_offset);
    const CounterStream v_stream(spec.seed, spec.replication, role_v + role_offset);
    const CounterStream e_stream(spec.seed, spec.replication, role_epsilon + role_offset);
    const int half = (p + 1) / 2;

    DrawnRows out{Eigen::MatrixXd(rows, p), Eigen::VectorXd(rows), Eigen::VectorXd(rows)};
    Eigen::VectorXd x(p);
    for (int i = 0; i < rows; ++i) {
        const std::uint64_t base = static_cast<std::uint64_t>(i) * stride;
        const auto W = [&](int j) { return w_stream.uniform(base + static_cast<std::uint64_t>(j)); };
        const auto U = [&](int j) { return u_stream.uniform(base + static_cast<std::uint64_t>(j)); };
        const auto Ut = [&](int j) { return ut_stream.uniform(base + static_cast<std::uint64_t>(j)); };
        const auto V = [&](int j) { return v_stream.uniform(base + static_cast<std::uint64_t>(j)) < 0.5 ? 1.0 : 0.0; };
        // X(j) is 1-based
        const auto X = [&](int j) -> double& { return x[j - 1]; };

        switch (id) {
            case 1: case 7:
                for (int j = 1; j <= 4; ++j) X(j) = W(j);
                for (int j = 5; j <= p; ++j) X(j) = (W(j) + U(1)) / 2.0;
                break;
            case 2:
                for (int j = 1; j <= 4; ++j) X(j) = W(j);
                X(5) = (4.0 * X(1) + U(1)) / 5.0;
                X(6) = (4.0 * X(2) + U(2)) / 5.0;
                for (int j = 7; j <= p; ++j) X(j) = (W(j - 2) + U(3)) / 2.0;
                break;
            case 3:
                X(1) = W(1);
                X(2) = W(2);
                X(3) = (W(3) + U(1)) / 2.0;
                X(4) = (W(4) + U(1)) / 2.0;
                X(5) = U(1);
                for (int j = 6; j <= p; ++j) X(j) = (W(j - 1) + U(2)) / 2.0;
                break;
            case 4:
                X(1) = W(1);
                X(2) = W(2);
                X(3) = (W(3) + U(1)) / 2.0;
                X(4) = (W(4) + U(1)) / 2.0;
                X(5) = U(1);
                X(6) = (4.0 * X(1) + U(2)) / 5.0;
                X(7) = (4.0 * X(2) + U(3)) / 5.0;
                for (int j = 8; j <= p; ++j) X(j) = (W(j - 3) + U(3)) / 2.0;
                break;
            case 5:
                for (int j = 1; j <= 4; ++j) X(j) = (W(j) + U(1)) / 2.0;
                for (int j = 5; j <= p; ++j) X(j) = (W(j) + U(2)) / 2.0;
                break;
            case 6: case 8:
                X(1) = W(1);
                X(2) = W(2);
                X(3) = (W(3) + U(1)) / 2.0;
                X(4) = (W(4) + U(1)) / 2.0;
                X(5) = U(1);
                // ladder: X_j leans on X_1..X_4 in turn with weight 4/(j-1)
                for (int j = 6; j <= p; ++j) {
                    const double anchor = X(1 + (j - 6) % 4);
                    X(j) = (4.0 * anchor + static_cast<double>(j - 5) * W(j - 1)) / static_cast<double>(j - 1);
                }
                break;
            case 9:
                X(1) = W(1);
                X(2) = W(2);
                X(3) = V(1);
                X(4) = V(2);
                for (int j = 5; j <= half; ++j) X(j) = (W(j - 2) + U(1)) / 2.0;
                for (int j = half + 1; j <= p; ++j) X(j) = V(j - half + 2);
                break;
            case 10:
                X(1) = W(1);
                for (int j = 2; j <= 4; ++j) X(j) = Ut(j - 1) + Ut(4) > 1.0 ? 1.0 : 0.0;
                for (int j = 5; j <= half; ++j) X(j) = (W(j - 2) + U(1)) / 2.0;
                for (int j = half + 1; j <= p; ++j) X(j) = V(j - half + 2);
                break;
            default: throw ConfigError("DGP id must be 1..10");
        }

        double sd = 1.0;
        if (id == 7 || id == 8) sd = std::sqrt(0.436) * (1.0 + (X(1) + X(2) + X(3) + X(4)) / 4.0);
        const double eps = sd * e_stream.normal(static_cast<std::uint64_t>(i));
        out.x.row(i) = x.transpose();
        out.eps[i] = eps;
        out.y[i] = oracle_mean(id, x) + eps;
    }
    return out;
}

inline std::vector<int> range_inclusive(int first, int last)
{
    std::vector<int> v;
    for (int j = first; j <= last; ++j) v.push_back(j);
    return v;
}

} // namespace detail

/// Draws one replication of a simulation design, plus an independent
/// forecast sample of spec.forecast_n rows from the same law.
inline LabeledDataset generate(const DgpSpec& spec)
{
    spec.validate();
    LabeledDataset out;
    out.dgp_id = spec.id;
    const auto kinds = dgp_kinds(spec.id, spec.p_n);
    std::vector<std::string> names;
    for (int j = 1; j <= spec.p_n; ++j) names.push_back("X" + std::to_string(j));

    auto train = detail::draw_rows(spec, spec.n, 0);
    out.dataset = Dataset{std::move(train.y), std::move(train.x), kinds, {}, names};
    out.epsilon = std::move(train.eps);
    auto fc = detail::draw_rows(spec, spec.forecast_n, forecast_offset);
    out.forecast = Dataset{std::move(fc.y), std::move(fc.x), kinds, {}, names};
    out.forecast_epsilon = std::move(fc.eps);

    using detail::range_inclusive;
    switch (spec.id) {
        case 1: case 5: case 7: case 9:
            out.true_signals = range_inclusive(0, 3);
            break;
        case 2:
            out.true_signals = range_inclusive(0, 3);
            out.pseudo_signals = {4, 5};
            break;
        case 3:
            out.true_signals = range_inclusive(0, 4);
            out.hidden_signals = {4};
            break;
        case 4:
            out.true_signals = range_inclusive(0, 4);
            out.pseudo_signals = {5, 6};
            out.hidden_signals = {4};
            break;
        case 6: case 8:
            out.true_signals = range_inclusive(0, 4);
            out.pseudo_signals = range_inclusive(5, spec.p_n - 1);
            out.hidden_signals = {4};
            break;
        case 10:
            out.true_signals = range_inclusive(0, 3);
            out.hidden_signals = {3};
            break;
        default: break;
    }
    return out;
}

} // namespace ocmt
