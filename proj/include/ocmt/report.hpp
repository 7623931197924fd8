#pragma once
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include <ocmt/campaign.hpp>
#include <ocmt/csv.hpp>
#include <ocmt/select.hpp>

namespace ocmt {

using json = nlohmann::ordered_json;

inline constexpr int result_schema_version = 1;

namespace detail {

template <class T>
json optional_json(const std::optional<T>& v)
{
    return v ? json(*v) : json(nullptr);
}

inline json ocmt_config_json(const OcmtConfig& c)
{
    json j;
    j["c_grid"] = c.c_grid;
    j["m_n"] = c.basis.m_n == 0 ? json("auto") : json(c.basis.m_n);
    j["spline_order"] = c.basis.spline_order;
    j["subsequent_stage_multiplier_continuous"] = c.subsequent_stage_multiplier_continuous;
    j["subsequent_stage_multiplier_binary"] = c.subsequent_stage_multiplier_binary;
    j["max_stages"] = optional_json(c.max_stages);
    return j;
}

inline json report_json(const ReplicationReport& r)
{
    json j;
    j["nv"] = r.nv;
    j["tpr"] = r.tpr;
    j["fpr"] = r.fpr;
    j["fdr"] = r.fdr;
    j["cs"] = r.cs;
    j["step"] = optional_json(r.step);
    j["frmse"] = r.frmse;
    j["replications"] = r.replications;
    return j;
}

inline json names_json(const std::vector<int>& vars, const Dataset* data)
{
    json out = json::array();
    for (int v : vars) out.push_back(data ? data->name(v) : "X" + std::to_string(v + 1));
    return out;
}

} // namespace detail

/// Result document of a simulation campaign. Worker count is left out so
/// that the document depends only on the campaign itself.
inline json campaign_document(const CampaignResult& res)
{
    const auto& cfg = res.config;
    json doc;
    doc["schema_version"] = result_schema_version;
    doc["mode"] = "simulate";

    json config;
    config["dgp"] = cfg.dgp;
    config["n"] = cfg.n;
    config["p"] = cfg.p_n;
    config["forecast_n"] = cfg.forecast_n;
    config["seed"] = cfg.seed;
    config["replications"] = cfg.replications;
    json pipes = json::array();
    for (auto p : cfg.pipelines) pipes.push_back(to_string(p));
    config["pipelines"] = pipes;
    config["ocmt"] = detail::ocmt_config_json(cfg.ocmt);
    doc["config"] = config;

    json summary = json::array();
    for (const auto& [p, r] : res.reports) {
        json row;
        row["pipeline"] = to_string(p);
        row.update(detail::report_json(r));
        summary.push_back(row);
    }
    doc["summary"] = summary;

    json reps = json::array();
    json failures = json::array();
    json warnings = json::array();
    for (const auto& rep : res.replications) {
        json jr;
        jr["replication"] = rep.replication;
        if (rep.error) {
            json f;
            f["replication"] = rep.replication;
            f["category"] = to_string(*rep.error_category);
            f["message"] = *rep.error;
            failures.push_back(f);
            jr["error"] = *rep.error;
            reps.push_back(jr);
            continue;
        }
        json outs = json::array();
        for (const auto& o : rep.outcomes) {
            json jo;
            jo["pipeline"] = to_string(o.pipeline);
            jo["selected"] = detail::names_json(o.selected, nullptr);
            if (!o.per_stage_selected.empty()) {
                json stages = json::array();
                for (const auto& s : o.per_stage_selected) stages.push_back(detail::names_json(s, nullptr));
                jo["per_stage"] = stages;
            }
            jo["stage_count"] = detail::optional_json(o.stage_count);
            jo["chosen_c"] = detail::optional_json(o.chosen_c);
            jo["lambda_first"] = detail::optional_json(o.lambda_first);
            jo["lambda_second"] = detail::optional_json(o.lambda_second);
            jo["nv"] = o.metrics.nv;
            jo["tpr"] = o.metrics.tpr;
            jo["fpr"] = o.metrics.fpr;
            jo["fdr"] = o.metrics.fdr;
            jo["correct"] = o.metrics.correct;
            jo["frmse"] = o.frmse;
            outs.push_back(jo);
            for (const auto& w : o.warnings) {
                warnings.push_back("replication " + std::to_string(rep.replication) + " (" + to_string(o.pipeline)
                                   + "): " + w);
            }
        }
        jr["outcomes"] = outs;
        reps.push_back(jr);
    }
    doc["replications"] = reps;
    json fail;
    fail["count"] = res.failures;
    fail["items"] = failures;
    doc["failures"] = fail;
    doc["warnings"] = warnings;
    return doc;
}

struct SelectInputs
{
    std::string data_path;
    CsvSchema schema;
    IngestReport ingest;
    OcmtConfig ocmt;
    std::vector<Pipeline> pipelines;
    std::optional<HoldoutConfig> holdout;
};

inline json select_document(const SelectInputs& in, const Dataset& data, const SelectRun& run)
{
    json doc;
    doc["schema_version"] = result_schema_version;
    doc["mode"] = "select";

    json config;
    config["data"] = in.data_path;
    config["response"] = in.schema.response ? json(*in.schema.response) : json(nullptr);
    config["binary"] = in.schema.binary;
    config["log"] = in.schema.log;
    json pipes = json::array();
    for (auto p : in.pipelines) pipes.push_back(to_string(p));
    config["pipelines"] = pipes;
    config["ocmt"] = detail::ocmt_config_json(in.ocmt);
    if (in.holdout) {
        config["holdout"] = in.holdout->test_size;
        config["splits"] = in.holdout->splits;
        config["seed"] = in.holdout->seed;
    }
    doc["config"] = config;

    json ds;
    ds["n"] = data.n();
    ds["p"] = data.p();
    ds["rows_read"] = in.ingest.rows_read;
    ds["rows_dropped"] = in.ingest.rows_dropped;
    doc["dataset"] = ds;

    const int m_n = in.ocmt.resolved_basis(data.n()).m_n;
    json results = json::array();
    json warnings = json::array();
    for (const auto& w : in.ingest.warnings) warnings.push_back(w);
    for (const auto& f : run.fits) {
        json jf;
        jf["pipeline"] = to_string(f.pipeline);
        jf["selected"] = detail::names_json(f.selected, &data);
        if (f.screening) {
            const auto& s = *f.screening;
            jf["chosen_c"] = s.chosen_c;
            jf["bic"] = s.bic;
            jf["stage_count"] = detail::optional_json(f.stage_count());
            json stages = json::array();
            for (const auto& st : s.per_stage_selected) stages.push_back(detail::names_json(st, &data));
            jf["per_stage"] = stages;
            json trace = json::array();
            for (std::size_t k = 0; k < s.statistics_trace.size(); ++k) {
                const int stage = static_cast<int>(k) + 1;
                json rows = json::array();
                for (const auto& st : s.statistics_trace[k]) {
                    const auto kind = data.kinds[st.variable];
                    double thr = threshold(s.chosen_c, data.p(), m_n, kind);
                    if (stage > 1) {
                        thr *= kind == VariableKind::binary_linear ? in.ocmt.subsequent_stage_multiplier_binary
                                                                   : in.ocmt.subsequent_stage_multiplier_continuous;
                    }
                    json r;
                    r["variable"] = data.name(st.variable);
                    r["statistic"] = st.value;
                    r["threshold"] = thr;
                    rows.push_back(r);
                }
                json js;
                js["stage"] = stage;
                js["statistics"] = rows;
                trace.push_back(js);
            }
            jf["statistics_trace"] = trace;
        }
        if (f.lasso) {
            jf["lambda_first"] = detail::optional_json(f.lasso->first_step_lambda);
            jf["lambda_second"] = f.lasso->empty ? json(nullptr) : json(f.lasso->chosen_lambda);
            jf["lasso_converged"] = f.lasso->converged;
        }
        json coef;
        coef["intercept"] = f.model.fit.intercept;
        json blocks = json::array();
        Eigen::Index at = 0;
        for (const auto& b : f.model.blocks) {
            json jb;
            jb["variable"] = data.name(b.variable_index);
            jb["kind"] = to_string(b.kind);
            std::vector<double> c(f.model.fit.coefficients.data() + at,
                                  f.model.fit.coefficients.data() + at + b.width());
            jb["coefficients"] = c;
            at += b.width();
            blocks.push_back(jb);
        }
        coef["blocks"] = blocks;
        coef["rss"] = f.model.fit.rss;
        jf["post_selection"] = coef;
        results.push_back(jf);
        for (const auto& w : f.warnings) warnings.push_back("(" + to_string(f.pipeline) + "): " + w);
    }
    doc["results"] = results;

    if (run.holdout) {
        const auto& h = *run.holdout;
        json jh;
        jh["test_size"] = h.config.test_size;
        jh["splits"] = h.config.splits;
        jh["failed_splits"] = h.failed_splits;
        json rows = json::array();
        const double base = h.pipelines.empty() ? 0.0 : h.pipelines.front().mean_rmse;
        for (const auto& p : h.pipelines) {
            json r;
            r["pipeline"] = to_string(p.pipeline);
            r["mean_rmse"] = p.mean_rmse;
            r["mean_nv"] = p.mean_nv;
            r["completed"] = p.completed;
            r["rmse_ratio_to_first"] = base > 0.0 ? json(p.mean_rmse / base) : json(nullptr);
            rows.push_back(r);
        }
        jh["pipelines"] = rows;
        doc["holdout"] = jh;
        for (const auto& w : h.warnings) warnings.push_back("holdout " + w);
    }
    doc["warnings"] = warnings;
    return doc;
}

/// Plain-text summary of a select run.
inline std::string select_table(const Dataset& data, const SelectRun& run)
{
    std::string out;
    for (const auto& f : run.fits) {
        out += to_string(f.pipeline) + ":";
        if (f.selected.empty()) out += " (none)";
        for (int j : f.selected) out += " " + data.name(j);
        out += "\n";
    }
    if (run.holdout) {
        char line[160];
        std::snprintf(line, sizeof line, "%-12s %10s %8s %8s\n", "", "RMSE", "RATIO", "NV");
        out += line;
        const double base = run.holdout->pipelines.front().mean_rmse;
        for (const auto& p : run.holdout->pipelines) {
            std::snprintf(line, sizeof line, "%-12s %10.4f %8.4f %8.4f\n", to_string(p.pipeline).c_str(),
                          p.mean_rmse, base > 0.0 ? p.mean_rmse / base : 0.0, p.mean_nv);
            out += line;
        }
    }
    return out;
}

} // namespace ocmt
