#pragma once
#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <ocmt/basis.hpp>
#include <ocmt/dataset.hpp>
#include <ocmt/error.hpp>
#include <ocmt/regress.hpp>

namespace ocmt {

struct SelectionMetrics
{
    double tpr = 0.0;
    double fpr = 0.0;
    double fdr = 0.0;
    int nv = 0;
    bool correct = false;  // selection equals the signal set exactly
};

/// TPR = |S ∩ signals| / |signals|, FPR = |S \ signals| / |non-signals|,
/// FDR = |S ∩ false_set| / (|S| + 1), NV = |S|.
inline SelectionMetrics selection_metrics(const std::vector<int>& indicator, const std::vector<int>& signals,
                                          const std::vector<int>& false_set, int p_n)
{
    if (static_cast<int>(indicator.size()) != p_n) throw DimensionError("indicator length must equal p_n");
    if (signals.empty()) throw ConfigError("true-positive rate needs a nonempty signal set");
    std::vector<char> is_signal(p_n, 0);
    std::vector<char> is_false(p_n, 0);
    for (int j : signals) {
        if (j < 0 || j >= p_n) throw ConfigError("signal index out of range");
        is_signal[j] = 1;
    }
    for (int j : false_set) {
        if (j < 0 || j >= p_n) throw ConfigError("index out of range");
        if (is_signal[j]) throw ConfigError("signal and false-discovery sets overlap");
        is_false[j] = 1;
    }
    int hits = 0;
    int false_pos = 0;
    int false_disc = 0;
    int nv = 0;
    for (int j = 0; j < p_n; ++j) {
        if (!indicator[j]) continue;
        ++nv;
        if (is_signal[j]) ++hits;
        else ++false_pos;
        if (is_false[j]) ++false_disc;
    }
    const int signal_count = static_cast<int>(signals.size());
    const int non_signals = p_n - signal_count;
    SelectionMetrics m;
    m.nv = nv;
    m.tpr = static_cast<double>(hits) / signal_count;
    m.fpr = non_signals > 0 ? static_cast<double>(false_pos) / non_signals : 0.0;
    m.fdr = static_cast<double>(false_disc) / static_cast<double>(nv + 1);
    m.correct = hits == signal_count && false_pos == 0;
    return m;
}

/// Post-selection OLS fit with the blocks needed to forecast new rows.
struct PostSelectionModel
{
    std::vector<DesignBlock> blocks;
    OlsFit fit;

    /// Predictions for covariate rows already mapped into model space.
    Eigen::VectorXd predict(const Eigen::MatrixXd& x) const
    {
        Eigen::VectorXd yhat = Eigen::VectorXd::Constant(x.rows(), fit.intercept);
        Eigen::Index at = 0;
        for (const auto& b : blocks) {
            yhat.noalias() += b.evaluate(x.col(b.variable_index)) * fit.coefficients.segment(at, b.width());
            at += b.width();
        }
        return yhat;
    }

    std::vector<int> variables() const
    {
        std::vector<int> v;
        for (const auto& b : blocks) v.push_back(b.variable_index);
        return v;
    }
};

inline PostSelectionModel fit_post_selection(std::vector<DesignBlock> blocks, const Eigen::VectorXd& y)
{
    PostSelectionModel m;
    m.fit = post_selection_ols(blocks, y);
    m.blocks = std::move(blocks);
    return m;
}

/// Root mean squared forecast error on a fresh sample.
inline double frmse(const PostSelectionModel& model, const Dataset& forecast)
{
    if (forecast.n() == 0) throw DimensionError("forecast sample is empty");
    const Eigen::VectorXd err = model.predict(forecast.x) - forecast.y;
    return std::sqrt(err.squaredNorm() / static_cast<double>(forecast.n()));
}

struct ReplicationRow
{
    double nv = 0.0;
    double tpr = 0.0;
    double fpr = 0.0;
    double fdr = 0.0;
    bool cs = false;
    std::optional<double> step;
    double frmse = 0.0;
};

inline ReplicationRow make_row(const SelectionMetrics& m, std::optional<int> stages, double forecast_rmse)
{
    ReplicationRow r;
    r.nv = m.nv;
    r.tpr = m.tpr;
    r.fpr = m.fpr;
    r.fdr = m.fdr;
    r.cs = m.correct;
    if (stages) r.step = *stages;
    r.frmse = forecast_rmse;
    return r;
}

struct ReplicationReport
{
    double nv = 0.0;
    double tpr = 0.0;
    double fpr = 0.0;
    double fdr = 0.0;
    double cs = 0.0;
    std::optional<double> step;
    double frmse = 0.0;
    int replications = 0;
};

namespace detail {

// Sorting before summation makes the mean independent of row order.
inline double order_free_mean(std::vector<double> v)
{
    std::sort(v.begin(), v.end());
    return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

} // namespace detail

inline ReplicationReport aggregate(const std::vector<ReplicationRow>& rows)
{
    if (rows.empty()) throw ConfigError("cannot aggregate an empty replication list");
    const auto column = [&](auto get) {
        std::vector<double> v;
        v.reserve(rows.size());
        for (const auto& r : rows) v.push_back(get(r));
        return detail::order_free_mean(std::move(v));
    };
    ReplicationReport rep;
    rep.replications = static_cast<int>(rows.size());
    rep.nv = column([](const ReplicationRow& r) { return r.nv; });
    rep.tpr = column([](const ReplicationRow& r) { return r.tpr; });
    rep.fpr = column([](const ReplicationRow& r) { return r.fpr; });
    rep.fdr = column([](const ReplicationRow& r) { return r.fdr; });
    rep.cs = column([](const ReplicationRow& r) { return r.cs ? 1.0 : 0.0; });
    rep.frmse = column([](const ReplicationRow& r) { return r.frmse; });
    const bool has_step = std::all_of(rows.begin(), rows.end(), [](const auto& r) { return r.step.has_value(); });
    if (has_step) rep.step = column([](const ReplicationRow& r) { return *r.step; });
    return rep;
}

/// Fixed-width table with the columns NV TPR FPR FDR CS STEP FRMSE.
inline std::string format_table(const std::vector<std::pair<std::string, ReplicationReport>>& rows)
{
    std::string out;
    char line[256];
    std::snprintf(line, sizeof line, "%-12s %8s %8s %8s %8s %8s %8s %8s\n", "", "NV", "TPR", "FPR", "FDR", "CS",
                  "STEP", "FRMSE");
    out += line;
    for (const auto& [label, r] : rows) {
        char step[32];
        if (r.step) std::snprintf(step, sizeof step, "%8.4f", *r.step);
        else std::snprintf(step, sizeof step, "%8s", "-");
        std::snprintf(line, sizeof line, "%-12s %8.4f %8.4f %8.4f %8.4f %8.4f %s %8.4f\n", label.c_str(), r.nv, r.tpr,
                      r.fpr, r.fdr, r.cs, step, r.frmse);
        out += line;
    }
    return out;
}

} // namespace ocmt
