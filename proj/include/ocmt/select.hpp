#pragma once
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include <ocmt/campaign.hpp>
#include <ocmt/dataset.hpp>
#include <ocmt/error.hpp>
#include <ocmt/rng.hpp>

namespace ocmt {

struct HoldoutConfig
{
    int test_size = 0;  // rows held out per split
    int splits = 100;
    std::uint64_t seed = 0;
};

struct HoldoutSummary
{
    Pipeline pipeline = Pipeline::ocmt;
    double mean_rmse = 0.0;
    double mean_nv = 0.0;
    int completed = 0;
};

struct HoldoutResult
{
    HoldoutConfig config;
    std::vector<HoldoutSummary> pipelines;
    int failed_splits = 0;
    std::vector<std::string> warnings;
};

struct SelectRun
{
    std::vector<PipelineFit> fits;
    std::optional<HoldoutResult> holdout;
};

/// Rows of `data` listed in `rows`, sharing its column metadata.
inline Dataset subset_rows(const Dataset& data, const std::vector<int>& rows)
{
    Dataset out;
    out.kinds = data.kinds;
    out.transforms = data.transforms;
    out.names = data.names;
    out.y.resize(static_cast<Eigen::Index>(rows.size()));
    out.x.resize(static_cast<Eigen::Index>(rows.size()), data.x.cols());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        out.y[static_cast<Eigen::Index>(i)] = data.y[rows[i]];
        out.x.row(static_cast<Eigen::Index>(i)) = data.x.row(rows[i]);
    }
    return out;
}

/// Uniform split without replacement: rows are ordered by a keyed hash and
/// the first `test_size` form the test set.
inline std::pair<std::vector<int>, std::vector<int>> holdout_split(int n, int test_size, std::uint64_t seed,
                                                                   std::uint64_t split)
{
    const CounterStream stream(seed, split, 0x200);
    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int a, int b) {
        const auto ka = stream.bits(static_cast<std::uint64_t>(a));
        const auto kb = stream.bits(static_cast<std::uint64_t>(b));
        return ka != kb ? ka < kb : a < b;
    });
    std::vector<int> test(order.begin(), order.begin() + test_size);
    std::vector<int> train(order.begin() + test_size, order.end());
    std::sort(test.begin(), test.end());
    std::sort(train.begin(), train.end());
    return {std::move(train), std::move(test)};
}

inline HoldoutResult run_holdout(const Dataset& data, const OcmtConfig& config, const std::vector<Pipeline>& pipelines,
                                 const HoldoutConfig& hc)
{
    if (hc.test_size < 1 || hc.test_size >= data.n()) {
        throw ConfigError("holdout size must lie between 1 and n - 1");
    }
    if (hc.splits < 1) throw ConfigError("holdout splits must be positive");
    HoldoutResult res;
    res.config = hc;
    std::vector<std::vector<double>> rmse(pipelines.size());
    std::vector<std::vector<double>> nv(pipelines.size());
    for (int s = 0; s < hc.splits; ++s) {
        const auto [train_rows, test_rows] = holdout_split(data.n(), hc.test_size, hc.seed, static_cast<std::uint64_t>(s));
        const Dataset train = subset_rows(data, train_rows);
        const Dataset test = subset_rows(data, test_rows);
        try {
            const auto fits = fit_pipelines(train, config, pipelines);
            for (std::size_t k = 0; k < fits.size(); ++k) {
                rmse[k].push_back(frmse(fits[k].model, test));
                nv[k].push_back(static_cast<double>(fits[k].selected.size()));
            }
        } catch (const Error& e) {
            ++res.failed_splits;
            res.warnings.push_back("split " + std::to_string(s) + ": " + e.what());
        }
    }
    for (std::size_t k = 0; k < pipelines.size(); ++k) {
        HoldoutSummary h;
        h.pipeline = pipelines[k];
        h.completed = static_cast<int>(rmse[k].size());
        if (h.completed > 0) {
            h.mean_rmse = detail::order_free_mean(rmse[k]);
            h.mean_nv = detail::order_free_mean(nv[k]);
        }
        res.pipelines.push_back(h);
    }
    return res;
}

inline SelectRun run_select(const Dataset& data, const OcmtConfig& config, const std::vector<Pipeline>& pipelines,
                            const std::optional<HoldoutConfig>& holdout)
{
    if (pipelines.empty()) throw ConfigError("no pipeline requested");
    SelectRun run;
    run.fits = fit_pipelines(data, config, pipelines);
    if (holdout) run.holdout = run_holdout(data, config, pipelines, *holdout);
    return run;
}

} // namespace ocmt
