#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "sbcm/estimators.hpp"
#include "sbcm/experiments.hpp"
#include "sbcm/io.hpp"
#include "sbcm/likelihood.hpp"
#include "sbcm/math.hpp"
#include "sbcm/rasch.hpp"
#include "sbcm/simulate.hpp"

namespace py = pybind11;
using namespace sbcm;

namespace {

using Schedule = std::vector<std::pair<std::uint32_t, std::uint32_t>>;

InteractionSchedule make_schedule(const Schedule& pairs, std::uint32_t num_agents) {
    InteractionSchedule s;
    s.pairs = pairs;
    s.num_agents = num_agents;
    validate_schedule(s);
    return s;
}

OutcomeTrace make_outcomes(const std::vector<int>& bits) {
    OutcomeTrace o;
    o.outcomes.reserve(bits.size());
    for (int b : bits) o.outcomes.push_back(b ? 1 : 0);
    return o;
}

OpinionState make_state(const std::vector<double>& opinions) {
    OpinionState s{opinions, 0};
    validate_state(s);
    return s;
}

py::dict report_to_dict(const EstimateReport& r) {
    py::dict d;
    d["mode"] = r.mode;
    d["estimate"] = r.estimate;
    if (r.mode == "joint") d["estimate_mu"] = r.estimate2;
    d["converged"] = r.converged;
    d["score_residual"] = r.score_residual;
    d["nll_at_estimate"] = r.nll_at_estimate;
    d["iterations"] = r.iterations;
    d["existence"] = std::string(to_string(r.existence));
    d["boundary_hit"] = r.boundary_hit ? py::cast(*r.boundary_hit) : py::none();
    d["flat_objective"] = r.flat_objective;
    if (r.mode == "joint") {
        py::list minima;
        for (const auto& m : r.local_minima) {
            py::dict lm;
            lm["epsilon"] = m.epsilon;
            lm["mu"] = m.mu;
            lm["nll"] = m.nll;
            minima.append(lm);
        }
        d["local_minima"] = minima;
    }
    return d;
}

BiasFormula formula_from_string(const std::string& name) {
    if (name == "lord") return BiasFormula::lord;
    if (name == "appendix_simplified") return BiasFormula::appendix_simplified;
    throw std::invalid_argument("unknown bias formula: " + name);
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "stochastic bounded confidence model: simulation and MLE core";

    m.def("sigmoid", &sigmoid, py::arg("z"), py::arg("rho"));
    m.def("log_sigmoid", &log_sigmoid, py::arg("z"), py::arg("rho"));

    m.def(
        "validate_params",
        [](double epsilon, double mu, double rho) {
            validate_params({epsilon, mu, rho});
        },
        py::arg("epsilon"), py::arg("mu"), py::arg("rho"));

    m.def(
        "simulate",
        [](std::uint32_t num_agents, std::uint64_t num_steps, double epsilon, double mu,
           double rho, std::uint64_t seed, const std::vector<double>& x0,
           bool dense_states) {
            SimulationConfig cfg;
            cfg.num_agents = num_agents;
            cfg.num_steps = num_steps;
            cfg.params = {epsilon, mu, rho};
            cfg.seed = seed;
            cfg.initial_opinions = x0;
            cfg.storage = dense_states ? StateStorage::dense : StateStorage::sparse;
            const auto t = simulate(cfg);
            py::dict d;
            d["x0"] = t.x0.opinions;
            d["schedule"] = t.schedule.pairs;
            std::vector<int> outcomes(t.outcomes.outcomes.begin(),
                                      t.outcomes.outcomes.end());
            d["outcomes"] = outcomes;
            d["num_successes"] = t.num_successes();
            if (dense_states) {
                std::vector<std::vector<double>> states;
                states.reserve(t.states.size());
                for (const auto& s : t.states) states.push_back(s.opinions);
                d["states"] = states;
            }
            return d;
        },
        py::arg("num_agents"), py::arg("num_steps"), py::arg("epsilon"), py::arg("mu"),
        py::arg("rho"), py::arg("seed"), py::arg("x0") = std::vector<double>{},
        py::arg("dense_states") = false);

    m.def(
        "replay",
        [](const std::vector<double>& x0, const Schedule& schedule,
           const std::vector<int>& outcomes, double mu) {
            const auto n = static_cast<std::uint32_t>(x0.size());
            const auto states = replay(make_state(x0), make_schedule(schedule, n),
                                       make_outcomes(outcomes), mu);
            std::vector<std::vector<double>> out;
            out.reserve(states.size());
            for (const auto& s : states) out.push_back(s.opinions);
            return out;
        },
        py::arg("x0"), py::arg("schedule"), py::arg("outcomes"), py::arg("mu"));

    m.def(
        "distances_for",
        [](const std::vector<double>& x0, const Schedule& schedule,
           const std::vector<int>& outcomes, double mu) {
            const auto n = static_cast<std::uint32_t>(x0.size());
            return distances_for(make_state(x0), make_schedule(schedule, n),
                                 make_outcomes(outcomes), mu);
        },
        py::arg("x0"), py::arg("schedule"), py::arg("outcomes"), py::arg("mu"));

    m.def(
        "log_likelihood",
        [](double epsilon, double mu, const std::vector<double>& x0,
           const Schedule& schedule, const std::vector<int>& outcomes, double rho) {
            const auto n = static_cast<std::uint32_t>(x0.size());
            return log_likelihood(epsilon, mu, make_state(x0),
                                  make_schedule(schedule, n), make_outcomes(outcomes),
                                  rho);
        },
        py::arg("epsilon"), py::arg("mu"), py::arg("x0"), py::arg("schedule"),
        py::arg("outcomes"), py::arg("rho"));

    m.def(
        "score_epsilon",
        [](double epsilon, const std::vector<double>& distances,
           const std::vector<int>& outcomes, double rho) {
            return score_epsilon(epsilon, distances, make_outcomes(outcomes), rho);
        },
        py::arg("epsilon"), py::arg("distances"), py::arg("outcomes"), py::arg("rho"));

    m.def("curvature_epsilon", &curvature_epsilon, py::arg("epsilon"),
          py::arg("distances"), py::arg("rho"));

    m.def(
        "nll_surface",
        [](const std::vector<double>& x0, const Schedule& schedule,
           const std::vector<int>& outcomes, double rho,
           const std::vector<double>& eps_grid, const std::vector<double>& mu_grid) {
            const auto n = static_cast<std::uint32_t>(x0.size());
            const auto s = nll_surface(make_state(x0), make_schedule(schedule, n),
                                       make_outcomes(outcomes), rho, eps_grid, mu_grid);
            return s.values;
        },
        py::arg("x0"), py::arg("schedule"), py::arg("outcomes"), py::arg("rho"),
        py::arg("eps_grid"), py::arg("mu_grid"));

    m.def(
        "estimate_epsilon",
        [](const std::vector<double>& x0, const Schedule& schedule,
           const std::vector<int>& outcomes, double mu_known, double rho, double tol) {
            const auto n = static_cast<std::uint32_t>(x0.size());
            EpsilonOptions opts;
            opts.tol = tol;
            return report_to_dict(estimate_epsilon(make_state(x0),
                                                   make_schedule(schedule, n),
                                                   make_outcomes(outcomes), mu_known,
                                                   rho, opts));
        },
        py::arg("x0"), py::arg("schedule"), py::arg("outcomes"), py::arg("mu_known"),
        py::arg("rho"), py::arg("tol") = 1e-8);

    m.def(
        "estimate_mu",
        [](const std::vector<double>& x0, const Schedule& schedule,
           const std::vector<int>& outcomes, double epsilon_known, double rho) {
            const auto n = static_cast<std::uint32_t>(x0.size());
            return report_to_dict(estimate_mu(make_state(x0), make_schedule(schedule, n),
                                              make_outcomes(outcomes), epsilon_known,
                                              rho));
        },
        py::arg("x0"), py::arg("schedule"), py::arg("outcomes"),
        py::arg("epsilon_known"), py::arg("rho"));

    m.def(
        "estimate_joint",
        [](const std::vector<double>& x0, const Schedule& schedule,
           const std::vector<int>& outcomes, double rho) {
            const auto n = static_cast<std::uint32_t>(x0.size());
            return report_to_dict(estimate_joint(
                make_state(x0), make_schedule(schedule, n), make_outcomes(outcomes), rho));
        },
        py::arg("x0"), py::arg("schedule"), py::arg("outcomes"), py::arg("rho"));

    m.def("fisher_information", &fisher_information, py::arg("kappas"), py::arg("rho"));
    m.def(
        "analytic_bias",
        [](const std::vector<double>& kappas, double rho, const std::string& formula) {
            return analytic_bias(kappas, rho, formula_from_string(formula));
        },
        py::arg("kappas"), py::arg("rho"), py::arg("formula") = "lord");
    m.def("analytic_variance", &analytic_variance, py::arg("kappas"), py::arg("rho"));
    m.def("bias_bound", &bias_bound, py::arg("rho"), py::arg("num_steps"));
    m.def(
        "bias_variance_report",
        [](const std::vector<double>& kappas, double rho, const std::string& formula) {
            const auto r = bias_variance_report(kappas, rho, formula_from_string(formula));
            py::dict d;
            d["bias"] = r.bias;
            d["variance"] = r.variance;
            d["bound"] = r.bound;
            d["fisher_information"] = r.fisher_information;
            d["saturated_count"] = r.saturated_count;
            d["within_bound"] = r.within_bound;
            return d;
        },
        py::arg("kappas"), py::arg("rho"), py::arg("formula") = "lord");

    m.def(
        "two_agent_oracle",
        [](double x1, double x2, double epsilon, double mu, double rho,
           std::uint32_t num_steps) {
            const auto dist = two_agent_oracle({x1, x2}, epsilon, mu, rho, num_steps);
            py::list paths;
            for (const auto& p : dist.paths) {
                py::dict pd;
                pd["mask"] = p.mask;
                pd["probability"] = p.probability;
                pd["x1_final"] = p.x1_final;
                pd["x2_final"] = p.x2_final;
                paths.append(pd);
            }
            py::dict d;
            d["paths"] = paths;
            d["x1_distribution"] = dist.x1_distribution;
            return d;
        },
        py::arg("x1"), py::arg("x2"), py::arg("epsilon"), py::arg("mu"), py::arg("rho"),
        py::arg("num_steps"));

    m.def(
        "rho_sweep",
        [](const std::vector<double>& rho_grid, std::uint32_t n_items,
           std::uint32_t ability_index) {
            ExperimentPlan plan;
            plan.scenario = Scenario::rho_sweep;
            plan.rho_grid = rho_grid;
            plan.rho_sweep_items = n_items;
            plan.rho_sweep_ability_index = ability_index;
            const auto r = run_rho_sweep(plan);
            std::vector<std::tuple<double, double, double>> rows;
            rows.reserve(r.rows.size());
            for (const auto& row : r.rows) rows.emplace_back(row.rho, row.bias, row.bound);
            return rows;
        },
        py::arg("rho_grid") = std::vector<double>{}, py::arg("n_items") = 2000,
        py::arg("ability_index") = 1960);
}
