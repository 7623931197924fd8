#pragma once
#include <algorithm>
#include <atomic>
#include <cstdint>
#include <optional>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include <ocmt/dataset.hpp>
#include <ocmt/dgp.hpp>
#include <ocmt/error.hpp>
#include <ocmt/eval.hpp>
#include <ocmt/glasso.hpp>
#include <ocmt/selection.hpp>

namespace ocmt {

enum class Pipeline {
    one_stage,  // first-stage screening only, C tuned by BIC
    ocmt,       // multi-stage screening, C tuned by BIC
    post_ocmt,  // ocmt followed by the adaptive group Lasso cleanup
    aglasso,    // adaptive group Lasso over every candidate
};

inline std::string to_string(Pipeline p)
{
    switch (p) {
        case Pipeline::one_stage: return "one-stage";
        case Pipeline::ocmt: return "ocmt";
        case Pipeline::post_ocmt: return "post-ocmt";
        case Pipeline::aglasso: return "aglasso";
    }
    return "unknown";
}

inline Pipeline parse_pipeline(const std::string& s)
{
    if (s == "one-stage") return Pipeline::one_stage;
    if (s == "ocmt") return Pipeline::ocmt;
    if (s == "post-ocmt") return Pipeline::post_ocmt;
    if (s == "aglasso" || s == "aglasso-only") return Pipeline::aglasso;
    throw ConfigError("unknown pipeline '" + s + "' (expected one-stage, ocmt, post-ocmt or aglasso)");
}

struct PipelineFit
{
    Pipeline pipeline = Pipeline::ocmt;
    std::vector<int> selected;
    std::optional<OcmtResult> screening;  // one-stage / ocmt / post-ocmt
    std::optional<GroupLassoFit> lasso;   // post-ocmt / aglasso
    PostSelectionModel model;
    std::vector<std::string> warnings;

    std::optional<int> stage_count() const
    {
        if (screening && pipeline != Pipeline::post_ocmt) return screening->stage_count;
        return std::nullopt;
    }
};

/// Fits every requested pipeline on one training sample. The OCMT run is
/// shared between the ocmt and post-ocmt pipelines.
inline std::vector<PipelineFit> fit_pipelines(const Dataset& data, const OcmtConfig& config,
                                              const std::vector<Pipeline>& pipelines)
{
    Screener screener(data, config);
    std::optional<OcmtResult> multi;
    const auto multi_stage = [&]() -> const OcmtResult& {
        if (!multi) multi = ocmt_with_bic(screener, config, config.stage_cap(data.p()));
        return *multi;
    };
    const auto blocks_of = [&](const std::vector<int>& vars) {
        std::vector<DesignBlock> out;
        for (int j : vars) out.push_back(*screener.blocks()[j]);
        return out;
    };

    std::vector<PipelineFit> fits;
    for (Pipeline p : pipelines) {
        PipelineFit f;
        f.pipeline = p;
        switch (p) {
            case Pipeline::one_stage:
                f.screening = ocmt_with_bic(screener, config, 1);
                f.selected = f.screening->selected;
                f.warnings = f.screening->warnings;
                f.model = fit_post_selection(blocks_of(f.selected), data.y);
                break;
            case Pipeline::ocmt:
                f.screening = multi_stage();
                f.selected = f.screening->selected;
                f.warnings = f.screening->warnings;
                f.model = fit_post_selection(blocks_of(f.selected), data.y);
                break;
            case Pipeline::post_ocmt: {
                f.screening = multi_stage();
                f.warnings = f.screening->warnings;
                const auto candidates = blocks_of(f.screening->selected);
                std::vector<const DesignBlock*> ptrs;
                for (const auto& b : candidates) ptrs.push_back(&b);
                auto cleaned = post_ocmt_cleanup(ptrs, data.y);
                if (cleaned.selected.empty() && !ptrs.empty()) {
                    f.warnings.push_back("group Lasso cleanup removed every OCMT selection");
                }
                f.selected = cleaned.selected;
                f.lasso = std::move(cleaned.lasso);
                f.model.blocks = std::move(cleaned.blocks);
                f.model.fit = std::move(cleaned.fit);
                break;
            }
            case Pipeline::aglasso: {
                f.warnings = screener.block_warnings();
                std::vector<const DesignBlock*> ptrs;
                for (const auto& b : screener.blocks()) {
                    if (b) ptrs.push_back(&*b);
                }
                GroupLassoFit fit = adaptive_group_lasso(ptrs, data.y);
                if (!fit.empty) {
                    for (int g : fit.active_groups) f.selected.push_back(ptrs[g]->variable_index);
                }
                std::sort(f.selected.begin(), f.selected.end());
                f.lasso = std::move(fit);
                f.model = fit_post_selection(blocks_of(f.selected), data.y);
                break;
            }
        }
        if (f.lasso && !f.lasso->empty && !f.lasso->converged) {
            f.warnings.push_back("group Lasso did not converge at the chosen lambda");
        }
        fits.push_back(std::move(f));
    }
    return fits;
}

struct PipelineOutcome
{
    Pipeline pipeline = Pipeline::ocmt;
    std::vector<int> selected;
    std::vector<std::vector<int>> per_stage_selected;
    std::optional<int> stage_count;
    std::optional<double> chosen_c;
    std::optional<double> lambda_first;
    std::optional<double> lambda_second;
    SelectionMetrics metrics;
    double frmse = 0.0;
    std::vector<std::string> warnings;
};

struct ReplicationOutcome
{
    std::uint64_t replication = 0;
    std::vector<PipelineOutcome> outcomes;
    std::optional<std::string> error;
    std::optional<ErrorCategory> error_category;
};

struct CampaignConfig
{
    int dgp = 1;
    int n = 400;
    int p_n = 100;
    int forecast_n = 200;
    std::uint64_t seed = 0;
    int replications = 200;
    OcmtConfig ocmt{};
    std::vector<Pipeline> pipelines{Pipeline::post_ocmt};
    int workers = 1;

    void validate() const
    {
        DgpSpec{dgp, n, p_n, forecast_n, seed, 0}.validate();
        if (replications < 1) throw ConfigError("replications must be positive");
        if (pipelines.empty()) throw ConfigError("no pipeline requested");
        if (workers < 1) throw ConfigError("workers must be positive");
        ocmt.validate();
    }
};

struct CampaignResult
{
    CampaignConfig config;
    std::vector<ReplicationOutcome> replications;  // ordered by replication index
    std::vector<std::pair<Pipeline, ReplicationReport>> reports;
    int failures = 0;
};

/// Generates replication `r` of the campaign and scores every pipeline.
/// Metrics count every non-signal selection (pseudo-signals included) as a
/// false discovery.
inline ReplicationOutcome run_replication(const CampaignConfig& cfg, std::uint64_t r)
{
    ReplicationOutcome out;
    out.replication = r;
    try {
        const auto draw = generate(DgpSpec{cfg.dgp, cfg.n, cfg.p_n, cfg.forecast_n, cfg.seed, r});
        const auto non_signals = draw.non_signals();
        auto fits = fit_pipelines(draw.dataset, cfg.ocmt, cfg.pipelines);
        for (auto& f : fits) {
            PipelineOutcome o;
            o.pipeline = f.pipeline;
            std::vector<int> indicator(draw.dataset.p(), 0);
            for (int j : f.selected) indicator[j] = 1;
            o.metrics = selection_metrics(indicator, draw.true_signals, non_signals, draw.dataset.p());
            o.frmse = frmse(f.model, draw.forecast);
            o.selected = f.selected;
            o.stage_count = f.stage_count();
            if (f.screening) {
                o.chosen_c = f.screening->chosen_c;
                if (f.pipeline != Pipeline::post_ocmt) o.per_stage_selected = f.screening->per_stage_selected;
            }
            if (f.lasso) {
                o.lambda_first = f.lasso->first_step_lambda;
                if (!f.lasso->empty) o.lambda_second = f.lasso->chosen_lambda;
            }
            o.warnings = std::move(f.warnings);
            out.outcomes.push_back(std::move(o));
        }
    } catch (const Error& e) {
        out.outcomes.clear();
        out.error = e.what();
        out.error_category = e.category();
    }
    return out;
}

/// Runs all replications on a worker pool. Each replication draws from its
/// own keyed streams and results are folded in replication order, so the
/// outcome does not depend on the worker count.
inline CampaignResult run_campaign(const CampaignConfig& cfg)
{
    cfg.validate();
    CampaignResult res;
    res.config = cfg;
    res.replications.resize(cfg.replications);

    std::atomic<int> next{0};
    const auto worker = [&] {
        for (int r = next++; r < cfg.replications; r = next++) {
            res.replications[r] = run_replication(cfg, static_cast<std::uint64_t>(r));
        }
    };
    const int threads = std::min(cfg.workers, cfg.replications);
    if (threads <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }

    for (const auto& rep : res.replications) {
        if (rep.error) ++res.failures;
    }
    for (std::size_t k = 0; k < cfg.pipelines.size(); ++k) {
        std::vector<ReplicationRow> rows;
        for (const auto& rep : res.replications) {
            if (rep.error) continue;
            const auto& o = rep.outcomes[k];
            rows.push_back(make_row(o.metrics, o.stage_count, o.frmse));
        }
        if (!rows.empty()) res.reports.emplace_back(cfg.pipelines[k], aggregate(rows));
    }
    return res;
}

inline std::string format_table(const CampaignResult& res)
{
    std::vector<std::pair<std::string, ReplicationReport>> rows;
    for (const auto& [p, r] : res.reports) rows.emplace_back(to_string(p), r);
    return format_table(rows);
}

} // namespace ocmt
