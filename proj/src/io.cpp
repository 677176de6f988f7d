#include "sbcm/io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace sbcm {

using nlohmann::json;

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

void atomic_write_file(const std::filesystem::path& path, const std::string& content) {
    namespace fs = std::filesystem;
    const fs::path dir = path.has_parent_path() ? path.parent_path() : fs::path(".");
    const fs::path tmp = dir / (path.filename().string() + ".tmp");
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot open " + tmp.string() + " for writing");
        out << content;
        if (!out) throw std::runtime_error("write failed for " + tmp.string());
    }
    fs::rename(tmp, path);
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// ---- trace --------------------------------------------------------------

std::string trace_to_json(const Trace& trace) {
    json j;
    j["config"] = {
        {"num_agents", trace.config.num_agents},
        {"num_steps", trace.config.num_steps},
        {"epsilon", trace.config.params.epsilon},
        {"mu", trace.config.params.mu},
        {"rho", trace.config.params.rho},
        {"seed", trace.config.seed},
    };
    json sched = json::array();
    for (const auto& [i, jdx] : trace.schedule.pairs) {
        sched.push_back(json::array({i, jdx}));
    }
    j["schedule"] = std::move(sched);
    std::string bits;
    bits.reserve(trace.outcomes.size());
    for (auto b : trace.outcomes.outcomes) bits.push_back(b ? '1' : '0');
    j["outcomes"] = std::move(bits);
    j["x0"] = trace.x0.opinions;
    return j.dump(2) + "\n";
}

Trace trace_from_json(const std::string& text) {
    const json j = json::parse(text);
    Trace trace;
    const auto& c = j.at("config");
    trace.config.num_agents = c.at("num_agents").get<std::uint32_t>();
    trace.config.num_steps = c.at("num_steps").get<std::uint64_t>();
    trace.config.params.epsilon = c.at("epsilon").get<double>();
    trace.config.params.mu = c.at("mu").get<double>();
    trace.config.params.rho = c.at("rho").get<double>();
    trace.config.seed = c.value("seed", std::uint64_t{0});
    trace.config.storage = StateStorage::sparse;

    trace.schedule.num_agents = trace.config.num_agents;
    for (const auto& entry : j.at("schedule")) {
        trace.schedule.pairs.emplace_back(entry.at(0).get<std::uint32_t>(),
                                          entry.at(1).get<std::uint32_t>());
    }
    const auto bits = j.at("outcomes").get<std::string>();
    for (char b : bits) {
        if (b != '0' && b != '1') throw std::invalid_argument("outcomes: expected 0/1 string");
        trace.outcomes.outcomes.push_back(b == '1' ? 1 : 0);
    }
    trace.x0.opinions = j.at("x0").get<std::vector<double>>();
    trace.x0.time_index = 0;

    if (trace.schedule.num_steps() != trace.config.num_steps ||
        trace.outcomes.size() != trace.config.num_steps) {
        throw std::invalid_argument("trace: schedule/outcome length mismatch");
    }
    if (trace.x0.opinions.size() != trace.config.num_agents) {
        throw std::invalid_argument("trace: x0 length mismatch");
    }
    validate_schedule(trace.schedule);
    validate_state(trace.x0);
    validate_params(trace.config.params);
    return trace;
}

std::string trajectory_to_csv(const Trace& trace) {
    std::ostringstream out;
    out << "t,agent_id,opinion\n";
    const auto states =
        trace.states.empty()
            ? replay(trace.x0, trace.schedule, trace.outcomes, trace.config.params.mu)
            : trace.states;
    for (std::size_t t = 0; t < states.size(); ++t) {
        for (std::size_t a = 0; a < states[t].opinions.size(); ++a) {
            out << t << ',' << a << ',' << format_double(states[t].opinions[a]) << '\n';
        }
    }
    return out.str();
}

// ---- estimate reports -----------------------------------------------------

std::string report_to_json(const EstimateReport& report,
                           const BiasVarianceReport* rasch) {
    json j;
    j["mode"] = report.mode;
    if (report.mode == "joint") {
        j["estimate"] = {{"epsilon", report.estimate}, {"mu", report.estimate2}};
    } else {
        j["estimate"] = report.estimate;
    }
    j["converged"] = report.converged;
    if (report.mode == "epsilon") j["score_residual"] = report.score_residual;
    j["nll_at_estimate"] = report.nll_at_estimate;
    j["iterations"] = report.iterations;
    j["existence"] = to_string(report.existence);
    if (report.boundary_hit) j["boundary_hit"] = *report.boundary_hit;
    j["flat_objective"] = report.flat_objective;
    if (report.mode == "joint") {
        json minima = json::array();
        for (const auto& m : report.local_minima) {
            minima.push_back({{"epsilon", m.epsilon}, {"mu", m.mu}, {"nll", m.nll}});
        }
        j["local_minima"] = std::move(minima);
    }
    if (rasch != nullptr) {
        j["rasch_diagnostics"] = {
            {"bias", rasch->bias},
            {"variance", rasch->variance},
            {"bound", rasch->bound},
            {"fisher_information", rasch->fisher_information},
            {"saturated_count", rasch->saturated_count},
            {"within_bound", rasch->within_bound},
        };
    }
    return j.dump(2) + "\n";
}

// ---- experiment plans -------------------------------------------------------

ExperimentPlan plan_from_json(const std::string& text) {
    const json j = json::parse(text);
    ExperimentPlan p;
    p.scenario = scenario_from_string(j.at("scenario").get<std::string>());
    if (j.contains("N_list")) p.N_list = j.at("N_list").get<std::vector<std::uint32_t>>();
    if (j.contains("T_list")) p.T_list = j.at("T_list").get<std::vector<std::uint64_t>>();
    if (j.contains("true_params")) {
        const auto& t = j.at("true_params");
        p.true_params.epsilon = t.value("epsilon", 0.0);
        p.true_params.mu = t.value("mu", 0.0);
        p.true_params.rho = t.value("rho", 60.0);
    }
    if (j.contains("eps_true_list")) {
        p.eps_true_list = j.at("eps_true_list").get<std::vector<double>>();
    }
    if (j.contains("mu_true_list")) {
        p.mu_true_list = j.at("mu_true_list").get<std::vector<double>>();
    }
    p.Q = j.value("Q", 30u);
    p.K = j.value("K", 30u);
    if (j.contains("seed")) p.seed = j.at("seed").get<std::uint64_t>();
    p.rho = j.value("rho", p.true_params.rho);
    if (j.contains("eps_grid")) p.eps_grid = j.at("eps_grid").get<std::vector<double>>();
    if (j.contains("mu_grid")) p.mu_grid = j.at("mu_grid").get<std::vector<double>>();
    if (j.contains("rho_grid")) p.rho_grid = j.at("rho_grid").get<std::vector<double>>();
    p.rho_sweep_items = j.value("rho_sweep_items", 2000u);
    p.rho_sweep_ability_index = j.value("rho_sweep_ability_index", 1960u);
    validate_plan(p);
    return p;
}

std::string plan_to_json(const ExperimentPlan& p) {
    json j;
    j["scenario"] = to_string(p.scenario);
    j["N_list"] = p.N_list;
    j["T_list"] = p.T_list;
    j["true_params"] = {{"epsilon", p.true_params.epsilon},
                        {"mu", p.true_params.mu},
                        {"rho", p.true_params.rho}};
    if (!p.eps_true_list.empty()) j["eps_true_list"] = p.eps_true_list;
    if (!p.mu_true_list.empty()) j["mu_true_list"] = p.mu_true_list;
    j["Q"] = p.Q;
    j["K"] = p.K;
    j["seed"] = p.seed;
    j["rho"] = p.rho;
    if (!p.eps_grid.empty()) j["eps_grid"] = p.eps_grid;
    if (!p.mu_grid.empty()) j["mu_grid"] = p.mu_grid;
    if (!p.rho_grid.empty()) j["rho_grid"] = p.rho_grid;
    if (p.scenario == Scenario::rho_sweep) {
        j["rho_sweep_items"] = p.rho_sweep_items;
        j["rho_sweep_ability_index"] = p.rho_sweep_ability_index;
    }
    return j.dump(2) + "\n";
}

// ---- experiment results ------------------------------------------------------

std::string eps_battery_to_csv(const ExperimentResult& r) {
    std::ostringstream out;
    out << "N,T,eps_true,q,k,eps_hat,error,exists\n";
    for (const auto& rec : r.records) {
        out << rec.N << ',' << rec.T << ',' << format_double(rec.true_value) << ','
            << rec.q << ',' << rec.k << ',' << format_double(rec.estimate) << ','
            << format_double(rec.error) << ',' << (rec.exists ? 1 : 0) << '\n';
    }
    return out.str();
}

std::string mu_battery_to_csv(const ExperimentResult& r) {
    std::ostringstream out;
    out << "N,T,mu_true,q,k,mu_hat,error,exists,boundary_hit,flat_flag\n";
    for (const auto& rec : r.records) {
        out << rec.N << ',' << rec.T << ',' << format_double(rec.true_value) << ','
            << rec.q << ',' << rec.k << ',' << format_double(rec.estimate) << ','
            << format_double(rec.error) << ',' << (rec.exists ? 1 : 0) << ','
            << (rec.boundary_hit ? 1 : 0) << ',' << (rec.flat_flag ? 1 : 0) << '\n';
    }
    return out.str();
}

std::string aggregates_to_csv(const ExperimentResult& r) {
    std::ostringstream out;
    out << "N,T,true_value,n_used,n_excluded,mean_error,std_dev,sem,"
           "mean_analytic_bias,mean_analytic_variance,bound,boundary_hits,flat_flags\n";
    for (const auto& a : r.aggregates) {
        out << a.N << ',' << a.T << ',' << format_double(a.true_value) << ','
            << a.n_used << ',' << a.n_excluded << ',' << format_double(a.mean_error)
            << ',' << format_double(a.std_dev) << ',' << format_double(a.sem) << ','
            << format_double(a.mean_analytic_bias) << ','
            << format_double(a.mean_analytic_variance) << ',' << format_double(a.bound)
            << ',' << a.boundary_hits << ',' << a.flat_flags << '\n';
    }
    return out.str();
}

std::string surface_long_to_csv(const SurfaceScanResult& r) {
    std::ostringstream out;
    out << "epsilon,mu,nll,cell_id\n";
    for (const auto& cell : r.cells) {
        for (std::size_t a = 0; a < cell.surface.eps_grid.size(); ++a) {
            for (std::size_t b = 0; b < cell.surface.mu_grid.size(); ++b) {
                out << format_double(cell.surface.eps_grid[a]) << ','
                    << format_double(cell.surface.mu_grid[b]) << ','
                    << format_double(cell.surface.values[a][b]) << ',' << cell.cell_id
                    << '\n';
            }
        }
    }
    return out.str();
}

std::string minima_census_to_csv(const SurfaceScanResult& r) {
    std::ostringstream out;
    out << "cell_id,eps_true,mu_true,n_minima,eps_hat,mu_hat,nll_min\n";
    for (const auto& cell : r.cells) {
        out << cell.cell_id << ',' << format_double(cell.eps_true) << ','
            << format_double(cell.mu_true) << ',' << cell.local_minima.size() << ','
            << format_double(cell.global_minimum.epsilon) << ','
            << format_double(cell.global_minimum.mu) << ','
            << format_double(cell.global_minimum.nll) << '\n';
    }
    return out.str();
}

std::string surface_matrix_to_csv(const SurfaceCell& cell) {
    std::ostringstream out;
    out << "eps\\mu";
    for (double m : cell.surface.mu_grid) out << ',' << format_double(m);
    out << '\n';
    for (std::size_t a = 0; a < cell.surface.eps_grid.size(); ++a) {
        out << format_double(cell.surface.eps_grid[a]);
        for (std::size_t b = 0; b < cell.surface.mu_grid.size(); ++b) {
            out << ',' << format_double(cell.surface.values[a][b]);
        }
        out << '\n';
    }
    return out.str();
}

std::string rho_sweep_to_csv(const RhoSweepResult& r) {
    std::ostringstream out;
    out << "rho,bias,bound\n";
    for (const auto& row : r.rows) {
        out << format_double(row.rho) << ',' << format_double(row.bias) << ','
            << format_double(row.bound) << '\n';
    }
    return out.str();
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            fields.push_back(cur);
            cur.clear();
        } else {
            cur.push_back(c);
        }
    }
    fields.push_back(cur);
    return fields;
}

std::vector<std::vector<std::string>> parse_csv(const std::string& text,
                                                std::vector<std::string>& header) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line)) throw std::invalid_argument("empty csv");
    header = split_csv_line(line);
    std::vector<std::vector<std::string>> rows;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        auto fields = split_csv_line(line);
        if (fields.size() != header.size()) {
            throw std::invalid_argument("csv row width mismatch");
        }
        rows.push_back(std::move(fields));
    }
    return rows;
}

std::size_t column(const std::vector<std::string>& header, const std::string& name) {
    for (std::size_t i = 0; i < header.size(); ++i) {
        if (header[i] == name) return i;
    }
    throw std::invalid_argument("csv is missing column " + name);
}

}  // namespace

std::vector<CellRecord> records_from_csv(const std::string& text) {
    std::vector<std::string> header;
    const auto rows = parse_csv(text, header);
    const bool is_mu = header.size() > 2 && header[2] == "mu_true";
    const auto c_truth = column(header, is_mu ? "mu_true" : "eps_true");
    const auto c_hat = column(header, is_mu ? "mu_hat" : "eps_hat");
    const auto c_exists = column(header, "exists");
    std::vector<CellRecord> records;
    records.reserve(rows.size());
    for (const auto& row : rows) {
        CellRecord r;
        r.N = static_cast<std::uint32_t>(std::stoul(row[column(header, "N")]));
        r.T = std::stoull(row[column(header, "T")]);
        r.true_value = std::stod(row[c_truth]);
        r.q = static_cast<std::uint32_t>(std::stoul(row[column(header, "q")]));
        r.k = static_cast<std::uint32_t>(std::stoul(row[column(header, "k")]));
        r.estimate = std::stod(row[c_hat]);
        r.error = std::stod(row[column(header, "error")]);
        r.exists = row[c_exists] == "1";
        if (is_mu) {
            r.boundary_hit = row[column(header, "boundary_hit")] == "1";
            r.flat_flag = row[column(header, "flat_flag")] == "1";
        }
        records.push_back(r);
    }
    return records;
}

void verify_aggregates_csv(const std::string& records_csv,
                           const std::string& aggregates_csv) {
    const auto records = records_from_csv(records_csv);
    // rho enters only the bound column, which is compared against the file
    ExperimentPlan plan;
    const auto recomputed = recompute_aggregates(plan, records);

    std::vector<std::string> header;
    const auto rows = parse_csv(aggregates_csv, header);
    if (rows.size() != recomputed.size()) {
        throw std::runtime_error("aggregates row count does not match records");
    }
    const auto c_N = column(header, "N");
    const auto c_T = column(header, "T");
    const auto c_truth = column(header, "true_value");
    const auto c_used = column(header, "n_used");
    const auto c_excl = column(header, "n_excluded");
    const auto c_mean = column(header, "mean_error");
    const auto c_std = column(header, "std_dev");
    const auto c_sem = column(header, "sem");
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const auto& row = rows[i];
        const auto& agg = recomputed[i];
        const bool match =
            std::stoul(row[c_N]) == agg.N && std::stoull(row[c_T]) == agg.T &&
            std::stod(row[c_truth]) == agg.true_value &&
            std::stoul(row[c_used]) == agg.n_used &&
            std::stoul(row[c_excl]) == agg.n_excluded &&
            std::stod(row[c_mean]) == agg.mean_error &&
            std::stod(row[c_std]) == agg.std_dev && std::stod(row[c_sem]) == agg.sem;
        if (!match) {
            throw std::runtime_error("aggregates row " + std::to_string(i) +
                                     " does not match the records");
        }
    }
}

}  // namespace sbcm
