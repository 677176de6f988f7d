#include "sbcm/experiments.hpp"

#include <atomic>
#include <bit>
#include <cmath>
#include <map>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "sbcm/math.hpp"
#include "sbcm/rng.hpp"

namespace sbcm {

namespace {

std::uint64_t bits(double v) { return std::bit_cast<std::uint64_t>(v); }

// Distinct stream tags so the q-level draws (x0, schedule) and the k-level
// Bernoulli stream never collide.
constexpr std::uint64_t kTagInit = 0x5bcd1234aa55aa55ULL;
constexpr std::uint64_t kTagOutcome = 0x9e0fbead77cc33eeULL;

struct PreparedCondition {
    OpinionState x0;
    InteractionSchedule schedule;
};

PreparedCondition prepare_condition(std::uint64_t master, std::uint32_t N,
                                    std::uint64_t T, double truth1, double truth2,
                                    std::uint32_t q) {
    Rng rng(hash64({master, kTagInit, N, T, bits(truth1), bits(truth2), q}));
    PreparedCondition pc;
    pc.x0.opinions.resize(N);
    for (auto& v : pc.x0.opinions) v = rng.next_symmetric();
    pc.x0.time_index = 0;
    pc.schedule = draw_schedule(N, T, rng);
    return pc;
}

OutcomeTrace draw_outcomes(const PreparedCondition& pc, const ModelParams& params,
                           std::uint64_t master, std::uint32_t N, std::uint64_t T,
                           double truth1, double truth2, std::uint32_t q,
                           std::uint32_t k) {
    Rng rng(hash64({master, kTagOutcome, N, T, bits(truth1), bits(truth2), q, k}));
    OutcomeTrace out;
    out.outcomes.reserve(T);
    std::vector<double> x = pc.x0.opinions;
    for (std::size_t t = 0; t < T; ++t) {
        const auto [i, j] = pc.schedule.pairs[t];
        const double d = std::abs(x[i] - x[j]);
        const double p = sigmoid(params.epsilon - d, params.rho);
        const bool success = rng.next_double() < p;
        out.outcomes.push_back(success ? 1 : 0);
        if (success) {
            const double oi = x[i], oj = x[j];
            x[i] = oi + params.mu * (oj - oi);
            x[j] = oj + params.mu * (oi - oj);
        }
    }
    return out;
}

struct CellKey {
    std::uint32_t N;
    std::uint64_t T;
    double truth;
    bool operator<(const CellKey& o) const {
        if (N != o.N) return N < o.N;
        if (T != o.T) return T < o.T;
        return truth < o.truth;
    }
};

}  // namespace

Scenario scenario_from_string(const std::string& s) {
    if (s == "eps_known_mu") return Scenario::eps_known_mu;
    if (s == "mu_known_eps") return Scenario::mu_known_eps;
    if (s == "joint") return Scenario::joint;
    if (s == "rho_sweep") return Scenario::rho_sweep;
    if (s == "surface_scan") return Scenario::surface_scan;
    throw std::domain_error("unknown scenario: " + s);
}

const char* to_string(Scenario s) {
    switch (s) {
        case Scenario::eps_known_mu: return "eps_known_mu";
        case Scenario::mu_known_eps: return "mu_known_eps";
        case Scenario::joint: return "joint";
        case Scenario::rho_sweep: return "rho_sweep";
        case Scenario::surface_scan: return "surface_scan";
    }
    return "unknown";
}

void validate_plan(const ExperimentPlan& plan) {
    if (plan.Q < 1 || plan.K < 1) throw std::domain_error("Q and K must be >= 1");
    if (plan.N_list.empty() || plan.T_list.empty()) {
        throw std::domain_error("N_list and T_list must be non-empty");
    }
    for (auto n : plan.N_list) {
        if (n < 2) throw std::domain_error("N_list: every N must be >= 2");
    }
    for (auto t : plan.T_list) {
        if (t < 1) throw std::domain_error("T_list: every T must be >= 1");
    }
    if (!(plan.rho > 0.0) || !std::isfinite(plan.rho)) {
        throw std::domain_error("rho: must be positive and finite");
    }
    for (double e : plan.eps_truths()) {
        if (!(e >= 0.0 && e <= 2.0)) throw std::domain_error("eps truth outside [0, 2]");
    }
    for (double m : plan.mu_truths()) {
        if (!(m >= 0.0 && m <= 0.5)) throw std::domain_error("mu truth outside [0, 0.5]");
    }
    if (plan.scenario == Scenario::surface_scan &&
        (plan.eps_grid.empty() || plan.mu_grid.empty())) {
        throw std::domain_error("surface_scan requires eps_grid and mu_grid");
    }
    if (plan.scenario == Scenario::rho_sweep) {
        if (plan.rho_sweep_items < 2) throw std::domain_error("rho_sweep_items must be >= 2");
        if (plan.rho_sweep_ability_index >= plan.rho_sweep_items) {
            throw std::domain_error("rho_sweep_ability_index out of range");
        }
        for (double r : plan.rho_grid) {
            if (!(r > 0.0)) throw std::domain_error("rho_grid entries must be positive");
        }
    }
}

void parallel_for(std::size_t n, int workers, const std::function<void(std::size_t)>& fn) {
    if (workers <= 1 || n <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    const int pool = static_cast<int>(std::min<std::size_t>(workers, n));
    std::vector<std::thread> threads;
    threads.reserve(pool);
    for (int w = 0; w < pool; ++w) {
        threads.emplace_back([&] {
            for (;;) {
                const std::size_t i = next.fetch_add(1);
                if (i >= n) return;
                fn(i);
            }
        });
    }
    for (auto& t : threads) t.join();
}

std::vector<CellAggregate> recompute_aggregates(const ExperimentPlan& plan,
                                                const std::vector<CellRecord>& records) {
    std::map<CellKey, std::vector<const CellRecord*>> groups;
    for (const auto& r : records) groups[{r.N, r.T, r.true_value}].push_back(&r);

    std::vector<CellAggregate> out;
    out.reserve(groups.size());
    for (const auto& [key, rows] : groups) {
        CellAggregate a;
        a.N = key.N;
        a.T = key.T;
        a.true_value = key.truth;
        a.bound = bias_bound(plan.rho, key.T);
        double sum = 0.0, sum_bias = 0.0, sum_var = 0.0;
        for (const auto* r : rows) {
            a.boundary_hits += r->boundary_hit ? 1 : 0;
            a.flat_flags += r->flat_flag ? 1 : 0;
            if (!r->exists) {
                ++a.n_excluded;
                continue;
            }
            ++a.n_used;
            sum += r->error;
            sum_bias += r->analytic_bias;
            sum_var += r->analytic_variance;
        }
        if (a.n_used > 0) {
            a.mean_error = sum / static_cast<double>(a.n_used);
            a.mean_analytic_bias = sum_bias / static_cast<double>(a.n_used);
            a.mean_analytic_variance = sum_var / static_cast<double>(a.n_used);
            double ss = 0.0;
            for (const auto* r : rows) {
                if (!r->exists) continue;
                const double dev = r->error - a.mean_error;
                ss += dev * dev;
            }
            a.std_dev = a.n_used > 1 ? std::sqrt(ss / static_cast<double>(a.n_used - 1))
                                     : 0.0;
            a.sem = a.std_dev / std::sqrt(static_cast<double>(a.n_used));
        }
        out.push_back(a);
    }
    return out;
}

ExperimentResult run_eps_battery(const ExperimentPlan& plan, int workers) {
    validate_plan(plan);
    if (plan.scenario != Scenario::eps_known_mu) {
        throw std::domain_error("run_eps_battery requires scenario eps_known_mu");
    }
    const double mu_known = plan.true_params.mu;

    struct Item {
        std::uint32_t N;
        std::uint64_t T;
        double eps_true;
        std::uint32_t q, k;
    };
    std::vector<Item> items;
    for (double eps_true : plan.eps_truths()) {
        for (auto N : plan.N_list) {
            for (auto T : plan.T_list) {
                for (std::uint32_t q = 0; q < plan.Q; ++q) {
                    for (std::uint32_t k = 0; k < plan.K; ++k) {
                        items.push_back({N, T, eps_true, q, k});
                    }
                }
            }
        }
    }

    ExperimentResult result;
    result.plan = plan;
    result.records.resize(items.size());

    // conditions (x0 + schedule) are deterministic in (master, N, T, truth, q)
    // and cheap relative to K replications, so each record rebuilds its own
    parallel_for(items.size(), workers, [&](std::size_t idx) {
        const Item& it = items[idx];
        ModelParams params{it.eps_true, mu_known, plan.rho};
        const auto pc = prepare_condition(plan.seed, it.N, it.T, it.eps_true, mu_known, it.q);
        const auto outcomes = draw_outcomes(pc, params, plan.seed, it.N, it.T,
                                            it.eps_true, mu_known, it.q, it.k);
        const auto distances = distances_for(pc.x0, pc.schedule, outcomes, mu_known);
        const auto est = estimate_epsilon_given_distances(distances, outcomes, plan.rho);

        CellRecord rec;
        rec.N = it.N;
        rec.T = it.T;
        rec.true_value = it.eps_true;
        rec.q = it.q;
        rec.k = it.k;
        rec.estimate = est.estimate;
        rec.error = est.estimate - it.eps_true;
        rec.exists = est.existence == Existence::interior && est.converged;
        rec.boundary_hit = est.boundary_hit.has_value();
        const auto report = bias_variance_report(
            kappas_for(distances, it.eps_true, plan.rho), plan.rho);
        rec.analytic_bias = report.bias;
        rec.analytic_variance = report.variance;
        result.records[idx] = rec;
    });

    result.aggregates = recompute_aggregates(plan, result.records);
    return result;
}

ExperimentResult run_mu_battery(const ExperimentPlan& plan, int workers) {
    validate_plan(plan);
    if (plan.scenario != Scenario::mu_known_eps) {
        throw std::domain_error("run_mu_battery requires scenario mu_known_eps");
    }
    const double eps_known = plan.true_params.epsilon;

    struct Item {
        std::uint32_t N;
        std::uint64_t T;
        double mu_true;
        std::uint32_t q, k;
    };
    std::vector<Item> items;
    for (double mu_true : plan.mu_truths()) {
        for (auto N : plan.N_list) {
            for (auto T : plan.T_list) {
                for (std::uint32_t q = 0; q < plan.Q; ++q) {
                    for (std::uint32_t k = 0; k < plan.K; ++k) {
                        items.push_back({N, T, mu_true, q, k});
                    }
                }
            }
        }
    }

    ExperimentResult result;
    result.plan = plan;
    result.records.resize(items.size());

    parallel_for(items.size(), workers, [&](std::size_t idx) {
        const Item& it = items[idx];
        ModelParams params{eps_known, it.mu_true, plan.rho};
        const auto pc = prepare_condition(plan.seed, it.N, it.T, eps_known, it.mu_true, it.q);
        const auto outcomes = draw_outcomes(pc, params, plan.seed, it.N, it.T,
                                            eps_known, it.mu_true, it.q, it.k);
        CellRecord rec;
        rec.N = it.N;
        rec.T = it.T;
        rec.true_value = it.mu_true;
        rec.q = it.q;
        rec.k = it.k;
        const auto est = estimate_mu(pc.x0, pc.schedule, outcomes, eps_known, plan.rho);
        rec.estimate = est.estimate;
        rec.error = est.estimate - it.mu_true;
        rec.flat_flag = est.flat_objective;
        rec.boundary_hit = est.boundary_hit.has_value();
        rec.exists = est.converged && !est.flat_objective;
        result.records[idx] = rec;
    });

    result.aggregates = recompute_aggregates(plan, result.records);
    return result;
}

std::vector<GridPoint> census_local_minima(const NllSurface& s) {
    std::vector<GridPoint> minima;
    const std::size_t A = s.eps_grid.size();
    const std::size_t B = s.mu_grid.size();
    for (std::size_t a = 0; a < A; ++a) {
        for (std::size_t b = 0; b < B; ++b) {
            const double v = s.values[a][b];
            bool is_min = true;
            for (int da = -1; da <= 1 && is_min; ++da) {
                for (int db = -1; db <= 1 && is_min; ++db) {
                    if (da == 0 && db == 0) continue;
                    const auto aa = static_cast<std::ptrdiff_t>(a) + da;
                    const auto bb = static_cast<std::ptrdiff_t>(b) + db;
                    if (aa < 0 || bb < 0 || aa >= static_cast<std::ptrdiff_t>(A) ||
                        bb >= static_cast<std::ptrdiff_t>(B)) {
                        continue;
                    }
                    if (s.values[aa][bb] < v) is_min = false;
                }
            }
            if (is_min) {
                minima.push_back({a, b, s.eps_grid[a], s.mu_grid[b], v});
            }
        }
    }
    return minima;
}

SurfaceScanResult run_surface_scan(const ExperimentPlan& plan, int workers) {
    validate_plan(plan);
    if (plan.scenario != Scenario::surface_scan) {
        throw std::domain_error("run_surface_scan requires scenario surface_scan");
    }

    struct Item {
        std::uint32_t N;
        std::uint64_t T;
        double eps_true, mu_true;
        std::uint32_t q;
    };
    std::vector<Item> items;
    for (double e : plan.eps_truths()) {
        for (double m : plan.mu_truths()) {
            for (auto N : plan.N_list) {
                for (auto T : plan.T_list) {
                    for (std::uint32_t q = 0; q < plan.Q; ++q) {
                        items.push_back({N, T, e, m, q});
                    }
                }
            }
        }
    }

    SurfaceScanResult result;
    result.plan = plan;
    result.cells.resize(items.size());

    parallel_for(items.size(), workers, [&](std::size_t idx) {
        const Item& it = items[idx];
        ModelParams params{it.eps_true, it.mu_true, plan.rho};
        const auto pc = prepare_condition(plan.seed, it.N, it.T, it.eps_true, it.mu_true, it.q);
        const auto outcomes = draw_outcomes(pc, params, plan.seed, it.N, it.T,
                                            it.eps_true, it.mu_true, it.q, 0);
        SurfaceCell cell;
        std::ostringstream id;
        id << "eps" << it.eps_true << "_mu" << it.mu_true << "_q" << it.q;
        cell.cell_id = id.str();
        cell.eps_true = it.eps_true;
        cell.mu_true = it.mu_true;
        cell.q = it.q;
        cell.surface = nll_surface(pc.x0, pc.schedule, outcomes, plan.rho,
                                   plan.eps_grid, plan.mu_grid);
        cell.local_minima = census_local_minima(cell.surface);
        cell.global_minimum = cell.local_minima.front();
        for (const auto& gp : cell.local_minima) {
            if (gp.nll < cell.global_minimum.nll) cell.global_minimum = gp;
        }
        result.cells[idx] = std::move(cell);
    });
    return result;
}

std::vector<double> rho_sweep_items(std::uint32_t n_items) {
    std::vector<double> d(n_items);
    for (std::uint32_t k = 0; k < n_items; ++k) {
        d[k] = static_cast<double>(k) / static_cast<double>(n_items - 1);
    }
    return d;
}

RhoSweepResult run_rho_sweep(const ExperimentPlan& plan) {
    validate_plan(plan);
    if (plan.scenario != Scenario::rho_sweep) {
        throw std::domain_error("run_rho_sweep requires scenario rho_sweep");
    }
    std::vector<double> grid = plan.rho_grid;
    if (grid.empty()) {
        // default: 25-point log grid on [1, 1e3] plus the 1e6 endpoint
        for (int i = 0; i < 25; ++i) {
            grid.push_back(std::pow(10.0, 3.0 * i / 24.0));
        }
        grid.push_back(1e6);
    }

    const auto items = rho_sweep_items(plan.rho_sweep_items);
    RhoSweepResult result;
    result.plan = plan;
    result.ability = items[plan.rho_sweep_ability_index];
    result.rows.reserve(grid.size());
    for (double rho : grid) {
        std::vector<double> kappas(items.size());
        for (std::size_t k = 0; k < items.size(); ++k) {
            kappas[k] = sigmoid(result.ability - items[k], rho);
        }
        const auto rep = bias_variance_report(kappas, rho);
        result.rows.push_back({rho, rep.bias, rep.bound});
    }
    return result;
}

TwoAgentDistribution two_agent_oracle(std::pair<double, double> x0_pair,
                                      double epsilon, double mu, double rho,
                                      std::uint32_t num_steps) {
    if (num_steps < 1 || num_steps > 4) {
        throw std::domain_error("two_agent_oracle: T must lie in [1, 4]");
    }
    validate_params({epsilon, mu, rho});

    TwoAgentDistribution dist;
    const std::uint32_t n_paths = 1u << num_steps;
    dist.paths.reserve(n_paths);
    for (std::uint32_t mask = 0; mask < n_paths; ++mask) {
        double x1 = x0_pair.first, x2 = x0_pair.second;
        double prob = 1.0;
        for (std::uint32_t t = 0; t < num_steps; ++t) {
            const double p = sigmoid(epsilon - std::abs(x1 - x2), rho);
            if (mask & (1u << t)) {
                prob *= p;
                const double o1 = x1, o2 = x2;
                x1 = o1 + mu * (o2 - o1);
                x2 = o2 + mu * (o1 - o2);
            } else {
                prob *= 1.0 - p;
            }
        }
        dist.paths.push_back({mask, prob, x1, x2});
    }

    // The final x1 depends only on the number of successes, and every path
    // with the same count performs identical arithmetic, so grouping by the
    // exact double is safe.
    std::map<double, double> support;
    for (const auto& p : dist.paths) support[p.x1_final] += p.probability;
    dist.x1_distribution.assign(support.begin(), support.end());
    return dist;
}

}  // namespace sbcm
