// sbcm: simulate / estimate / experiment / scan for the stochastic bounded
// confidence model.
//
// Exit codes: 0 success, 2 configuration error, 3 io error,
//             4 estimation nonexistence / boundary / convergence failure.

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <thread>

#include "CLI11.hpp"
#include "json.hpp"

#include "sbcm/estimators.hpp"
#include "sbcm/experiments.hpp"
#include "sbcm/io.hpp"
#include "sbcm/simulate.hpp"

namespace fs = std::filesystem;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitIo = 3;
constexpr int kExitEstimation = 4;

int default_workers() {
    if (const char* env = std::getenv("SBCM_WORKERS")) {
        const int v = std::atoi(env);
        if (v >= 1) return v;
    }
    const unsigned hc = std::thread::hardware_concurrency();
    return hc > 0 ? static_cast<int>(hc) : 1;
}

struct SimulateArgs {
    std::optional<std::string> config_path;
    std::optional<std::uint32_t> agents;
    std::optional<std::uint64_t> steps;
    std::optional<double> epsilon, mu, rho;
    std::optional<std::uint64_t> seed;
    std::string out_path;
    std::optional<std::string> trajectory_csv;
    bool sparse = false;
};

int cmd_simulate(const SimulateArgs& args) {
    sbcm::SimulationConfig cfg;
    try {
        if (args.config_path) {
            const auto j = nlohmann::json::parse(sbcm::read_file(*args.config_path));
            cfg.num_agents = j.value("num_agents", cfg.num_agents);
            cfg.num_steps = j.value("num_steps", cfg.num_steps);
            cfg.params.epsilon = j.value("epsilon", cfg.params.epsilon);
            cfg.params.mu = j.value("mu", cfg.params.mu);
            cfg.params.rho = j.value("rho", cfg.params.rho);
            cfg.seed = j.value("seed", cfg.seed);
            if (j.contains("x0")) {
                cfg.initial_opinions = j.at("x0").get<std::vector<double>>();
            }
        }
    } catch (const std::exception& e) {
        std::cerr << "error: bad config file: " << e.what() << "\n";
        return kExitConfig;
    }
    // flags win over the config file
    if (args.agents) cfg.num_agents = *args.agents;
    if (args.steps) cfg.num_steps = *args.steps;
    if (args.epsilon) cfg.params.epsilon = *args.epsilon;
    if (args.mu) cfg.params.mu = *args.mu;
    if (args.rho) cfg.params.rho = *args.rho;
    if (args.seed) cfg.seed = *args.seed;
    cfg.storage = args.sparse ? sbcm::StateStorage::sparse : sbcm::StateStorage::dense;

    try {
        sbcm::validate_config(cfg);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitConfig;
    }
    for (const auto& w : sbcm::check_params(cfg.params).warnings) {
        std::cerr << "warning: " << w << "\n";
    }

    const auto trace = sbcm::simulate(cfg);
    try {
        sbcm::atomic_write_file(args.out_path, sbcm::trace_to_json(trace));
        if (args.trajectory_csv) {
            sbcm::atomic_write_file(*args.trajectory_csv, sbcm::trajectory_to_csv(trace));
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitIo;
    }
    const auto m = trace.num_successes();
    std::cout << "m/T = " << m << "/" << cfg.num_steps << " ("
              << sbcm::format_double(static_cast<double>(m) /
                                     static_cast<double>(cfg.num_steps))
              << ")\n";
    return kExitOk;
}

struct EstimateArgs {
    std::string mode;
    std::string trace_path;
    std::string out_path;
    std::optional<double> mu_known, epsilon_known, rho, tol;
};

int cmd_estimate(const EstimateArgs& args) {
    sbcm::Trace trace;
    try {
        trace = sbcm::trace_from_json(sbcm::read_file(args.trace_path));
    } catch (const std::exception& e) {
        std::cerr << "error: cannot load trace: " << e.what() << "\n";
        return kExitConfig;
    }
    const double rho = args.rho.value_or(trace.config.params.rho);
    const double mu_known = args.mu_known.value_or(trace.config.params.mu);
    const double eps_known = args.epsilon_known.value_or(trace.config.params.epsilon);

    sbcm::EstimateReport report;
    std::optional<sbcm::BiasVarianceReport> rasch;
    try {
        if (args.mode == "epsilon") {
            sbcm::EpsilonOptions opts;
            if (args.tol) opts.tol = *args.tol;
            const auto distances = sbcm::distances_for(trace.x0, trace.schedule,
                                                       trace.outcomes, mu_known);
            report = sbcm::estimate_epsilon_given_distances(distances, trace.outcomes,
                                                            rho, opts);
            if (report.existence == sbcm::Existence::interior) {
                rasch = sbcm::bias_variance_report(
                    sbcm::kappas_for(distances, report.estimate, rho), rho);
            }
        } else if (args.mode == "mu") {
            report = sbcm::estimate_mu(trace.x0, trace.schedule, trace.outcomes,
                                       eps_known, rho);
        } else if (args.mode == "joint") {
            report = sbcm::estimate_joint(trace.x0, trace.schedule, trace.outcomes, rho);
        } else {
            std::cerr << "error: unknown mode " << args.mode << "\n";
            return kExitConfig;
        }
    } catch (const sbcm::ConvergenceError& e) {
        std::cerr << "error: estimation failed to converge: " << e.what() << "\n";
        return kExitEstimation;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitConfig;
    }

    const std::string text =
        sbcm::report_to_json(report, rasch ? &*rasch : nullptr);
    try {
        sbcm::atomic_write_file(args.out_path, text);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitIo;
    }
    std::cout << text;
    const bool degraded = report.existence != sbcm::Existence::interior ||
                          report.boundary_hit.has_value() || report.flat_objective;
    return degraded ? kExitEstimation : kExitOk;
}

struct BatteryArgs {
    std::string plan_path;
    std::string outdir;
    std::optional<std::uint64_t> seed;
    int workers = default_workers();
};

int load_plan(const BatteryArgs& args, sbcm::ExperimentPlan& plan) {
    std::string text;
    try {
        text = sbcm::read_file(args.plan_path);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitIo;
    }
    try {
        const auto j = nlohmann::json::parse(text);
        if (!j.contains("seed") && !args.seed) {
            std::cerr << "error: no seed given; pass --seed or put \"seed\" in the plan\n";
            return kExitConfig;
        }
        plan = sbcm::plan_from_json(text);
    } catch (const std::exception& e) {
        std::cerr << "error: bad plan: " << e.what() << "\n";
        return kExitConfig;
    }
    if (args.seed) plan.seed = *args.seed;
    return kExitOk;
}

void print_aggregates(const sbcm::ExperimentResult& result) {
    std::cout << "N\tT\ttruth\tn\tmean_err\tstd_dev\tsem\n";
    for (const auto& a : result.aggregates) {
        std::cout << a.N << '\t' << a.T << '\t' << a.true_value << '\t' << a.n_used
                  << '\t' << a.mean_error << '\t' << a.std_dev << '\t' << a.sem << '\n';
    }
}

int cmd_experiment(const BatteryArgs& args) {
    sbcm::ExperimentPlan plan;
    if (const int rc = load_plan(args, plan); rc != kExitOk) return rc;

    try {
        fs::create_directories(args.outdir);
        const fs::path dir(args.outdir);
        switch (plan.scenario) {
            case sbcm::Scenario::eps_known_mu: {
                const auto result = sbcm::run_eps_battery(plan, args.workers);
                sbcm::atomic_write_file(dir / "eps_battery.csv",
                                        sbcm::eps_battery_to_csv(result));
                sbcm::atomic_write_file(dir / "aggregates.csv",
                                        sbcm::aggregates_to_csv(result));
                print_aggregates(result);
                break;
            }
            case sbcm::Scenario::mu_known_eps: {
                const auto result = sbcm::run_mu_battery(plan, args.workers);
                sbcm::atomic_write_file(dir / "mu_battery.csv",
                                        sbcm::mu_battery_to_csv(result));
                sbcm::atomic_write_file(dir / "aggregates.csv",
                                        sbcm::aggregates_to_csv(result));
                print_aggregates(result);
                break;
            }
            case sbcm::Scenario::rho_sweep: {
                const auto result = sbcm::run_rho_sweep(plan);
                sbcm::atomic_write_file(dir / "rho_sweep.csv",
                                        sbcm::rho_sweep_to_csv(result));
                std::cout << sbcm::rho_sweep_to_csv(result);
                break;
            }
            case sbcm::Scenario::surface_scan:
                std::cerr << "error: surface_scan plans run under the `scan` subcommand\n";
                return kExitConfig;
            case sbcm::Scenario::joint:
                std::cerr << "error: no battery is defined for scenario `joint`; "
                             "use `estimate --mode joint` on single traces\n";
                return kExitConfig;
        }
    } catch (const std::domain_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitIo;
    }
    return kExitOk;
}

int cmd_scan(const BatteryArgs& args) {
    sbcm::ExperimentPlan plan;
    if (const int rc = load_plan(args, plan); rc != kExitOk) return rc;
    if (plan.scenario != sbcm::Scenario::surface_scan) {
        std::cerr << "error: scan requires a surface_scan plan\n";
        return kExitConfig;
    }
    try {
        fs::create_directories(args.outdir);
        const fs::path dir(args.outdir);
        const auto result = sbcm::run_surface_scan(plan, args.workers);
        sbcm::atomic_write_file(dir / "surface_long.csv",
                                sbcm::surface_long_to_csv(result));
        sbcm::atomic_write_file(dir / "minima_census.csv",
                                sbcm::minima_census_to_csv(result));
        for (const auto& cell : result.cells) {
            sbcm::atomic_write_file(dir / ("surface_" + cell.cell_id + ".csv"),
                                    sbcm::surface_matrix_to_csv(cell));
        }
        std::cout << sbcm::minima_census_to_csv(result);
    } catch (const std::domain_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitIo;
    }
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"stochastic bounded confidence model: simulation and MLE toolkit"};
    app.require_subcommand(1);

    SimulateArgs sim;
    auto* simulate = app.add_subcommand("simulate", "generate a trace");
    simulate->add_option("--config", sim.config_path, "JSON config (flags override it)");
    simulate->add_option("--agents", sim.agents, "number of agents N");
    simulate->add_option("--steps", sim.steps, "number of steps T");
    simulate->add_option("--epsilon", sim.epsilon, "confidence bound");
    simulate->add_option("--mu", sim.mu, "convergence rate");
    simulate->add_option("--rho", sim.rho, "sigmoid steepness");
    simulate->add_option("--seed", sim.seed, "rng seed");
    simulate->add_option("--out", sim.out_path, "output trace JSON")->required();
    simulate->add_option("--trajectory-csv", sim.trajectory_csv,
                         "also write t,agent_id,opinion CSV");
    simulate->add_flag("--sparse", sim.sparse, "do not keep dense states in memory");

    EstimateArgs est;
    auto* estimate = app.add_subcommand("estimate", "maximum likelihood estimation");
    estimate->add_option("--mode", est.mode, "epsilon | mu | joint")->required();
    estimate->add_option("--trace", est.trace_path, "input trace JSON")->required();
    estimate->add_option("--out", est.out_path, "output report JSON")->required();
    estimate->add_option("--mu-known", est.mu_known,
                         "known mu (default: value stored in the trace)");
    estimate->add_option("--epsilon-known", est.epsilon_known,
                         "known epsilon (default: value stored in the trace)");
    estimate->add_option("--rho", est.rho, "override rho");
    estimate->add_option("--tol", est.tol, "score tolerance (epsilon mode)");

    BatteryArgs exp;
    auto* experiment = app.add_subcommand("experiment", "run a replication battery");
    experiment->add_option("--plan", exp.plan_path, "plan JSON")->required();
    experiment->add_option("--outdir", exp.outdir, "output directory")->required();
    experiment->add_option("--seed", exp.seed, "master seed (overrides plan)");
    experiment->add_option("--workers", exp.workers, "worker threads");

    BatteryArgs scn;
    auto* scan = app.add_subcommand("scan", "NLL surface scan with minima census");
    scan->add_option("--plan", scn.plan_path, "plan JSON")->required();
    scan->add_option("--outdir", scn.outdir, "output directory")->required();
    scan->add_option("--seed", scn.seed, "master seed (overrides plan)");
    scan->add_option("--workers", scn.workers, "worker threads");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? kExitOk : kExitConfig;
    }

    if (simulate->parsed()) return cmd_simulate(sim);
    if (estimate->parsed()) return cmd_estimate(est);
    if (experiment->parsed()) return cmd_experiment(exp);
    if (scan->parsed()) return cmd_scan(scn);
    return kExitConfig;
}
