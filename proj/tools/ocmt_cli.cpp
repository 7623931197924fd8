#include <cmath>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include <ocmt/ocmt.hpp>

namespace {

std::vector<std::string> split_list(const std::string& s)
{
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

// "start:step:end", inclusive of end.
std::vector<double> parse_c_grid(const std::string& s)
{
    const auto parts = [&] {
        std::vector<std::string> v;
        std::stringstream ss(s);
        std::string item;
        while (std::getline(ss, item, ':')) v.push_back(item);
        return v;
    }();
    if (parts.size() != 3) throw ocmt::ConfigError("--c-grid expects start:step:end, got '" + s + "'");
    double start = 0, step = 0, end = 0;
    try {
        start = std::stod(parts[0]);
        step = std::stod(parts[1]);
        end = std::stod(parts[2]);
    } catch (const std::exception&) {
        throw ocmt::ConfigError("--c-grid has a non-numeric field: '" + s + "'");
    }
    if (!(step > 0.0) || !(end >= start)) throw ocmt::ConfigError("--c-grid needs step > 0 and end >= start");
    const auto count = static_cast<long>(std::floor((end - start) / step + 1e-9)) + 1;
    if (count > 10000) throw ocmt::ConfigError("--c-grid has too many points");
    std::vector<double> grid;
    for (long i = 0; i < count; ++i) grid.push_back(std::round((start + static_cast<double>(i) * step) * 1e12) / 1e12);
    return grid;
}

int parse_m_n(const std::string& s)
{
    if (s == "auto") return 0;
    try {
        std::size_t used = 0;
        const int v = std::stoi(s, &used);
        if (used == s.size() && v > 0) return v;
    } catch (const std::exception&) {
    }
    throw ocmt::ConfigError("--m-n expects a positive integer or 'auto', got '" + s + "'");
}

std::vector<ocmt::Pipeline> parse_pipelines(const std::string& s)
{
    std::vector<ocmt::Pipeline> out;
    for (const auto& p : split_list(s)) out.push_back(ocmt::parse_pipeline(p));
    if (out.empty()) throw ocmt::ConfigError("--pipeline is empty");
    return out;
}

void write_file(const std::string& path, const std::string& text)
{
    std::ofstream f(path, std::ios::binary);
    if (!f) throw ocmt::IoError("cannot write '" + path + "'");
    f << text;
    if (!f) throw ocmt::IoError("write to '" + path + "' failed");
}

struct CommonOptions
{
    std::string pipeline = "post-ocmt";
    std::string c_grid = "0.5:0.1:2.5";
    std::string m_n = "auto";
    std::optional<int> max_stages;
    std::string out;

    ocmt::OcmtConfig ocmt_config() const
    {
        ocmt::OcmtConfig c;
        c.c_grid = parse_c_grid(c_grid);
        c.basis.m_n = parse_m_n(m_n);
        c.max_stages = max_stages;
        c.validate();
        return c;
    }
};

void add_common(CLI::App* cmd, CommonOptions& o)
{
    cmd->add_option("--pipeline", o.pipeline, "comma list of one-stage, ocmt, post-ocmt, aglasso")->capture_default_str();
    cmd->add_option("--c-grid", o.c_grid, "threshold constant grid start:step:end")->capture_default_str();
    cmd->add_option("--m-n", o.m_n, "basis functions per continuous covariate, or auto")->capture_default_str();
    cmd->add_option("--max-stages", o.max_stages, "stage cap (default min(p, 20))");
    cmd->add_option("--out", o.out, "result document path; the table goes to <out>.table.txt");
}

void emit(const std::string& out, const nlohmann::ordered_json& doc, const std::string& table)
{
    std::cout << table;
    if (!out.empty()) {
        write_file(out, doc.dump(2) + "\n");
        write_file(out + ".table.txt", table);
    }
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Variable selection for additive models by one-covariate-at-a-time multiple testing"};
    app.require_subcommand(1);

    CommonOptions sim_common;
    ocmt::CampaignConfig sim;
    auto* simulate = app.add_subcommand("simulate", "run a Monte Carlo campaign on a simulation design");
    simulate->add_option("--dgp", sim.dgp, "design id 1..10")->required();
    simulate->add_option("--n", sim.n, "training rows")->capture_default_str();
    simulate->add_option("--p", sim.p_n, "candidate covariates")->capture_default_str();
    simulate->add_option("--reps", sim.replications, "replications")->capture_default_str();
    simulate->add_option("--seed", sim.seed, "base seed")->capture_default_str();
    simulate->add_option("--forecast-n", sim.forecast_n, "forecast rows per replication")->capture_default_str();
    simulate->add_option("--workers", sim.workers, "worker threads over replications")->capture_default_str();
    add_common(simulate, sim_common);

    CommonOptions sel_common;
    std::string data_path;
    std::string response;
    std::string binary;
    std::string logged;
    int holdout = 0;
    int splits = 100;
    std::uint64_t sel_seed = 0;
    auto* select = app.add_subcommand("select", "select variables on a CSV dataset");
    select->add_option("--data", data_path, "CSV file with a header row")->required();
    select->add_option("--response", response, "response column (default: first column)");
    select->add_option("--binary", binary, "comma list of binary columns");
    select->add_option("--log", logged, "comma list of columns to log1p before mapping to [0,1]");
    select->add_option("--holdout", holdout, "rows held out per random split (0: no holdout)");
    select->add_option("--splits", splits, "number of holdout splits")->capture_default_str();
    select->add_option("--seed", sel_seed, "seed for the holdout splits")->capture_default_str();
    add_common(select, sel_common);

    ocmt::DgpSpec gen;
    std::string gen_out;
    bool gen_forecast = false;
    auto* generate = app.add_subcommand("generate", "write one draw of a simulation design as CSV");
    generate->add_option("--dgp", gen.id, "design id 1..10")->required();
    generate->add_option("--n", gen.n, "rows")->capture_default_str();
    generate->add_option("--p", gen.p_n, "candidate covariates")->capture_default_str();
    generate->add_option("--seed", gen.seed, "base seed")->capture_default_str();
    generate->add_option("--replication", gen.replication, "replication index")->capture_default_str();
    generate->add_flag("--forecast", gen_forecast, "write the forecast sample instead of the training sample");
    generate->add_option("--out", gen_out, "output path (default: stdout)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : ocmt::exit_code(ocmt::ErrorCategory::config);
    }

    try {
        if (*simulate) {
            sim.pipelines = parse_pipelines(sim_common.pipeline);
            sim.ocmt = sim_common.ocmt_config();
            const auto res = ocmt::run_campaign(sim);
            std::string table = ocmt::format_table(res);
            if (res.failures > 0) {
                table += "failed replications: " + std::to_string(res.failures) + " of "
                         + std::to_string(sim.replications) + "\n";
            }
            emit(sim_common.out, ocmt::campaign_document(res), table);
            if (res.reports.empty()) {
                std::cerr << "error [numeric]: every replication failed\n";
                return ocmt::exit_code(ocmt::ErrorCategory::numeric);
            }
        } else if (*select) {
            ocmt::SelectInputs in;
            in.data_path = data_path;
            if (!response.empty()) in.schema.response = response;
            in.schema.binary = split_list(binary);
            in.schema.log = split_list(logged);
            in.pipelines = parse_pipelines(sel_common.pipeline);
            in.ocmt = sel_common.ocmt_config();
            if (holdout > 0) in.holdout = ocmt::HoldoutConfig{holdout, splits, sel_seed};
            const auto data = ocmt::ingest_csv(data_path, in.schema, &in.ingest);
            const auto run = ocmt::run_select(data, in.ocmt, in.pipelines, in.holdout);
            emit(sel_common.out, ocmt::select_document(in, data, run), ocmt::select_table(data, run));
        } else if (*generate) {
            const auto draw = ocmt::generate(gen);
            std::ostringstream text;
            ocmt::write_csv(text, gen_forecast ? draw.forecast : draw.dataset);
            if (gen_out.empty()) std::cout << text.str();
            else write_file(gen_out, text.str());
        }
    } catch (const ocmt::Error& e) {
        std::cerr << "error [" << ocmt::to_string(e.category()) << "]: " << e.what() << "\n";
        return ocmt::exit_code(e.category());
    } catch (const std::exception& e) {
        std::cerr << "error [internal]: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
