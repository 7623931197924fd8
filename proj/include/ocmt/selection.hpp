#pragma once
#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <ocmt/basis.hpp>
#include <ocmt/dataset.hpp>
#include <ocmt/error.hpp>
#include <ocmt/regress.hpp>

namespace ocmt {

/// 0.5, 0.6, ..., 2.5
inline std::vector<double> default_c_grid()
{
    std::vector<double> grid;
    for (int i = 5; i <= 25; ++i) grid.push_back(static_cast<double>(i) / 10.0);
    return grid;
}

struct OcmtConfig
{
    std::vector<double> c_grid = default_c_grid();
    double subsequent_stage_multiplier_continuous = 3.0;
    double subsequent_stage_multiplier_binary = 4.0;
    std::optional<int> max_stages;  // unset: min(p_n, 20)
    BasisConfig basis{};            // m_n == 0: floor(n^{1/4}) + 1
    int workers = 1;                // threads for the per-stage statistic loop

    void validate() const
    {
        if (c_grid.empty()) throw ConfigError("C grid is empty");
        for (std::size_t i = 0; i < c_grid.size(); ++i) {
            if (!(c_grid[i] > 0.0)) throw ConfigError("C grid entries must be positive");
            if (i > 0 && !(c_grid[i] > c_grid[i - 1])) throw ConfigError("C grid must be strictly increasing");
        }
        if (!(subsequent_stage_multiplier_continuous >= 1.0) || !(subsequent_stage_multiplier_binary >= 1.0)) {
            throw ConfigError("subsequent-stage multipliers must be at least 1");
        }
        if (max_stages && *max_stages < 1) throw ConfigError("max_stages must be positive");
        if (workers < 1) throw ConfigError("workers must be positive");
    }

    int stage_cap(int p_n) const { return max_stages ? *max_stages : std::min(p_n, 20); }

    BasisConfig resolved_basis(int n) const
    {
        BasisConfig b = basis;
        if (b.m_n == 0) b.m_n = BasisConfig::default_m_n(n);
        b.validate();
        return b;
    }
};

/// Screening threshold for one variable kind (natural logarithms).
///   continuous:    c * m_n * ((ln p)^1.1 + (ln m_n)^1.1)
///   binary-linear: c * (ln p)^1.1
inline double threshold(double c, int p_n, int m_n, VariableKind kind)
{
    if (p_n < 2 || m_n < 1 || !(c > 0.0)) throw ConfigError("threshold needs c > 0, p_n >= 2, m_n >= 1");
    const double lp = std::pow(std::log(static_cast<double>(p_n)), 1.1);
    if (kind == VariableKind::binary_linear) return c * lp;
    const double lm = std::pow(std::log(static_cast<double>(m_n)), 1.1);
    return c * static_cast<double>(m_n) * (lp + lm);
}

struct StageStatistic
{
    int variable = 0;
    double value = 0.0;
};

struct OcmtResult
{
    std::vector<int> selected;  // ascending
    std::vector<std::vector<int>> per_stage_selected;
    int stage_count = 1;
    std::vector<std::vector<StageStatistic>> statistics_trace;  // one entry per screening stage run
    double chosen_c = 0.0;
    std::vector<int> indicator;
    double bic = std::numeric_limits<double>::quiet_NaN();
    bool overparameterized = false;
    std::vector<std::string> warnings;
};

/// n ln(RSS/n) + k ln n with RSS from the post-selection OLS (intercept
/// included) and k the number of selected variables. RSS is floored at
/// 1e-12 of the total sum of squares.
inline double bic_from_blocks(const std::vector<const DesignBlock*>& blocks, const Eigen::VectorXd& y)
{
    const double n = static_cast<double>(y.size());
    const double tss = (y.array() - y.mean()).square().sum();
    if (!(tss > 0.0)) throw NumericError("response has zero variance");
    const double rss = post_selection_ols(blocks, y).rss;
    const double floored = std::max(rss, 1e-12 * tss);
    return n * std::log(floored / n) + static_cast<double>(blocks.size()) * std::log(n);
}

/// Owns the design blocks of one dataset and caches screening statistics by
/// conditioning set, so a sweep over the C grid evaluates each distinct
/// stage only once.
class Screener
{
public:
    Screener(const Dataset& data, const OcmtConfig& config)
        : data_(data), config_(config)
    {
        config_.validate();
        data_.validate();
        basis_ = config_.resolved_basis(data_.n());
        if (data_.n() <= basis_.m_n + 2) {
            throw DimensionError("n = " + std::to_string(data_.n()) + " must exceed m_n + 2");
        }
        if (data_.p() < 2) throw DimensionError("need at least two candidate variables");
        y_centered_ = data_.y.array() - data_.y.mean();
        blocks_.resize(data_.p());
        for (int j = 0; j < data_.p(); ++j) {
            try {
                blocks_[j] = build_design_block(data_.x.col(j), data_.kinds[j], basis_, j);
            } catch (const NumericError& e) {
                block_warnings_.push_back("skipped " + data_.name(j) + ": " + e.what());
            } catch (const DomainError& e) {
                block_warnings_.push_back("skipped " + data_.name(j) + ": " + e.what());
            }
        }
    }

    const Dataset& data() const noexcept { return data_; }
    const BasisConfig& basis() const noexcept { return basis_; }
    int m_n() const noexcept { return basis_.m_n; }
    const std::vector<std::optional<DesignBlock>>& blocks() const noexcept { return blocks_; }
    const std::vector<std::string>& block_warnings() const noexcept { return block_warnings_; }

    double threshold_for(int j, double c, int stage) const
    {
        const auto kind = data_.kinds[j];
        double t = threshold(c, data_.p(), basis_.m_n, kind);
        if (stage > 1) {
            t *= kind == VariableKind::binary_linear ? config_.subsequent_stage_multiplier_binary
                                                     : config_.subsequent_stage_multiplier_continuous;
        }
        return t;
    }

    OcmtResult run_one_stage(double c) { return run(c, 1); }

    OcmtResult run(double c) { return run(c, config_.stage_cap(data_.p())); }

    /// Multi-stage screening at constant c, at most `cap` stages.
    OcmtResult run(double c, int cap)
    {
        OcmtResult res;
        res.chosen_c = c;
        res.warnings = block_warnings_;
        const int n = data_.n();
        std::vector<int> selected;
        for (int stage = 1; stage <= cap; ++stage) {
            if (stage > 1) {
                Eigen::Index width = 0;
                for (int j : selected) width += blocks_[j]->width();
                if (width >= n - basis_.m_n - 1) {
                    res.overparameterized = true;
                    res.warnings.push_back("stage " + std::to_string(stage)
                                           + ": conditioning design too wide, procedure halted");
                    break;
                }
            }
            const auto& entry = stats_for(selected);
            for (const auto& w : entry.warnings) {
                res.warnings.push_back("stage " + std::to_string(stage) + ": " + w);
            }
            std::vector<int> fresh;
            std::vector<StageStatistic> trace;
            for (int j = 0; j < data_.p(); ++j) {
                if (!entry.values[j]) continue;
                const double v = *entry.values[j];
                trace.push_back({j, v});
                if (v > threshold_for(j, c, stage)) fresh.push_back(j);
            }
            res.statistics_trace.push_back(std::move(trace));
            if (fresh.empty()) break;
            res.per_stage_selected.push_back(fresh);
            selected.insert(selected.end(), fresh.begin(), fresh.end());
            std::sort(selected.begin(), selected.end());
        }
        res.selected = selected;
        res.stage_count = std::max<int>(1, static_cast<int>(res.per_stage_selected.size()));
        res.indicator.assign(data_.p(), 0);
        for (int j : selected) res.indicator[j] = 1;
        return res;
    }

    /// BIC of a selection (throws OverparameterizedError when too wide).
    double bic(const std::vector<int>& selected)
    {
        if (auto it = bic_cache_.find(selected); it != bic_cache_.end()) return it->second;
        std::vector<const DesignBlock*> ptrs;
        for (int j : selected) ptrs.push_back(&blocks_.at(j).value());
        const double b = bic_from_blocks(ptrs, data_.y);
        bic_cache_.emplace(selected, b);
        return b;
    }

private:
    struct StageStats
    {
        std::vector<std::optional<double>> values;  // empty for selected / skipped variables
        std::vector<std::string> warnings;
    };

    const StageStats& stats_for(const std::vector<int>& selected)
    {
        if (auto it = cache_.find(selected); it != cache_.end()) return it->second;
        StageStats s;
        s.values.assign(data_.p(), std::nullopt);
        std::vector<const DesignBlock*> z;
        for (int j : selected) z.push_back(&*blocks_[j]);
        const PartitionedScreen screen(z, y_centered_);

        std::vector<std::string> errors(data_.p());
        auto work = [&](int begin, int end) {
            for (int j = begin; j < end; ++j) {
                if (!blocks_[j] || std::binary_search(selected.begin(), selected.end(), j)) continue;
                try {
                    s.values[j] = screen.stat(*blocks_[j]).value;
                } catch (const Error& e) {
                    errors[j] = "skipped " + data_.name(j) + ": " + e.what();
                }
            }
        };
        const int p = data_.p();
        const int workers = std::min(config_.workers, p);
        if (workers <= 1) {
            work(0, p);
        } else {
            std::vector<std::thread> pool;
            const int chunk = (p + workers - 1) / workers;
            for (int w = 0; w < workers; ++w) {
                pool.emplace_back(work, w * chunk, std::min(p, (w + 1) * chunk));
            }
            for (auto& t : pool) t.join();
        }
        for (auto& e : errors) {
            if (!e.empty()) s.warnings.push_back(std::move(e));
        }
        return cache_.emplace(selected, std::move(s)).first->second;
    }

    const Dataset& data_;
    OcmtConfig config_;
    BasisConfig basis_;
    Eigen::VectorXd y_centered_;
    std::vector<std::optional<DesignBlock>> blocks_;
    std::vector<std::string> block_warnings_;
    std::map<std::vector<int>, StageStats> cache_;
    std::map<std::vector<int>, double> bic_cache_;
};

/// Variables whose marginal statistic exceeds the first-stage threshold.
inline std::vector<int> one_stage_select(const Dataset& data, double c, const OcmtConfig& config,
                                         std::vector<std::string>* warnings = nullptr)
{
    Screener screener(data, config);
    auto res = screener.run_one_stage(c);
    if (warnings) *warnings = res.warnings;
    return res.selected;
}

inline OcmtResult multi_stage_select(const Dataset& data, double c, const OcmtConfig& config)
{
    Screener screener(data, config);
    return screener.run(c);
}

inline double bic_of_selection(const Dataset& data, const std::vector<int>& selected, const BasisConfig& basis)
{
    BasisConfig b = basis;
    if (b.m_n == 0) b.m_n = BasisConfig::default_m_n(data.n());
    std::vector<DesignBlock> blocks;
    for (int j : selected) {
        if (j < 0 || j >= data.p()) throw ConfigError("selected index out of range");
        blocks.push_back(build_design_block(data.x.col(j), data.kinds[j], b, j));
    }
    std::vector<const DesignBlock*> ptrs;
    for (const auto& blk : blocks) ptrs.push_back(&blk);
    return bic_from_blocks(ptrs, data.y);
}

/// Runs the screening for every C on the grid and keeps the BIC minimizer.
/// Exact ties go to the larger C.
inline OcmtResult ocmt_with_bic(Screener& screener, const OcmtConfig& config, int stage_cap)
{
    std::optional<OcmtResult> best;
    std::optional<OcmtResult> largest;
    bool all_overparameterized = true;
    for (double c : config.c_grid) {
        OcmtResult r = screener.run(c, stage_cap);
        try {
            r.bic = screener.bic(r.selected);
        } catch (const OverparameterizedError&) {
            r.bic = std::numeric_limits<double>::infinity();
            r.overparameterized = true;
        }
        all_overparameterized = all_overparameterized && r.overparameterized;
        if (!best || r.bic <= best->bic) best = r;
        largest = std::move(r);
    }
    if (all_overparameterized) {
        best = std::move(largest);
        best->overparameterized = true;
        best->warnings.push_back("every C on the grid hit the overparameterization stop");
    }
    return std::move(*best);
}

inline OcmtResult ocmt_with_bic(const Dataset& data, const OcmtConfig& config)
{
    Screener screener(data, config);
    return ocmt_with_bic(screener, config, config.stage_cap(data.p()));
}

} // namespace ocmt
