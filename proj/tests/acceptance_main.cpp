// Acceptance suite: one pass/fail line per criterion, exit code = number of
// failed criteria.  Tolerances are fixed here, not tuned at runtime.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <map>
#include <string>
#include <thread>
#include <vector>

#include "sbcm/estimators.hpp"
#include "sbcm/experiments.hpp"
#include "sbcm/io.hpp"
#include "sbcm/math.hpp"
#include "sbcm/rasch.hpp"
#include "sbcm/rng.hpp"
#include "sbcm/simulate.hpp"

using namespace sbcm;

namespace {

constexpr std::uint64_t kMasterSeed = 20250809;

int g_failures = 0;

struct Timer {
    std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
            .count();
    }
};

void report(int id, bool pass, const std::string& what, double secs) {
    std::printf("[%s] criterion %d: %s (%.1fs)\n", pass ? "PASS" : "FAIL", id,
                what.c_str(), secs);
    std::fflush(stdout);
    if (!pass) ++g_failures;
}

int default_workers() {
    const unsigned hc = std::thread::hardware_concurrency();
    return hc > 0 ? static_cast<int>(hc) : 1;
}

// ---- criterion 1 --------------------------------------------------------

void criterion1() {
    Timer timer;
    const double rho = 60.0;
    int done = 0, attempts = 0;
    bool ok = true;
    double worst_score = 0.0, worst_gap = 0.0;
    while (done < 500 && attempts < 2000) {
        const std::uint64_t seed =
            hash64({kMasterSeed, 1u, static_cast<std::uint64_t>(attempts)});
        ++attempts;
        Rng pick(seed);
        SimulationConfig cfg;
        cfg.num_agents = pick.next_double() < 0.5 ? 10 : 100;
        cfg.num_steps = pick.next_double() < 0.5 ? 100 : 1000;
        cfg.params.epsilon = 0.2 + 0.8 * pick.next_double();
        cfg.params.mu = 0.45 * pick.next_double();
        cfg.params.rho = rho;
        cfg.seed = pick.next_u64();
        cfg.storage = StateStorage::sparse;
        const auto t = simulate(cfg);
        const auto m = t.num_successes();
        if (m == 0 || m == t.outcomes.size()) continue;
        const auto d = distances_for(t.x0, t.schedule, t.outcomes, cfg.params.mu);
        const auto est = estimate_epsilon_given_distances(d, t.outcomes, rho);
        const double resid = std::abs(score_epsilon(est.estimate, d, t.outcomes, rho));
        double sum_kappa = 0.0;
        for (double k : kappas_for(d, est.estimate, rho)) sum_kappa += k;
        const double gap = std::abs(sum_kappa - static_cast<double>(m));
        worst_score = std::max(worst_score, resid);
        worst_gap = std::max(worst_gap, gap);
        ok = ok && est.converged && resid <= 1e-8 && gap <= 1e-6;
        ++done;
    }
    ok = ok && done == 500;
    char buf[160];
    std::snprintf(buf, sizeof(buf),
                  "eps-MLE root quality on %d instances: max|score|=%.2e, "
                  "max|sum kappa - m|=%.2e",
                  done, worst_score, worst_gap);
    report(1, ok, buf, timer.seconds());
}

// ---- criterion 2 --------------------------------------------------------

void criterion2() {
    Timer timer;
    // (a) Theorem-1 bound over 1e5 random kappa sequences (iid uniform,
    //     production-scale T), strict
    const std::size_t n_seq = 100000, T = 10000;
    const double rho = 60.0;
    const double bound = bias_bound(rho, T);
    std::vector<double> ratio(n_seq);
    parallel_for(n_seq, default_workers(), [&](std::size_t i) {
        Rng rng(hash64({kMasterSeed, 2u, 0xAAu, i}));
        std::vector<double> kappas(T);
        for (auto& k : kappas) k = rng.next_double();
        ratio[i] = std::abs(analytic_bias(kappas, rho)) / bound;
    });
    double worst = 0.0;
    for (double r : ratio) worst = std::max(worst, r);
    const bool bound_ok = worst < 1.0;

    // (b) Monte Carlo bias vs the closed form at N=1000, T=1e4, 200 reps/cell
    ExperimentPlan plan;
    plan.scenario = Scenario::eps_known_mu;
    plan.N_list = {1000};
    plan.T_list = {10000};
    plan.true_params = {0.0, 0.01, rho};
    plan.eps_true_list = {0.2, 0.6, 1.0};
    plan.Q = 10;
    plan.K = 20;
    plan.seed = hash64({kMasterSeed, 2u, 0xBBu});
    plan.rho = rho;
    const auto result = run_eps_battery(plan, default_workers());

    bool mc_ok = true;
    std::string detail;
    for (const auto& a : result.aggregates) {
        const bool agree = std::abs(a.mean_error - a.mean_analytic_bias) <= 3.0 * a.sem;
        const bool noise_dominates = a.std_dev >= 10.0 * std::abs(a.mean_error);
        mc_ok = mc_ok && agree && noise_dominates && a.n_used == 200;
        char cell[160];
        std::snprintf(cell, sizeof(cell),
                      " eps*=%.1f: mean_err=%+.2e bias=%+.2e sem=%.1e sd/|err|=%.0f;",
                      a.true_value, a.mean_error, a.mean_analytic_bias, a.sem,
                      a.std_dev / std::max(std::abs(a.mean_error), 1e-300));
        detail += cell;
    }

    char buf[512];
    std::snprintf(buf, sizeof(buf),
                  "bias bound strict over 1e5 kappa seqs (max ratio %.2f)%s; %s:%s",
                  worst, bound_ok ? "" : " VIOLATED",
                  mc_ok ? "MC matches closed-form bias" : "MC check FAILS",
                  detail.c_str());
    report(2, bound_ok && mc_ok, buf, timer.seconds());
}

// ---- criterion 3 --------------------------------------------------------

void criterion3() {
    Timer timer;
    ExperimentPlan plan;
    plan.scenario = Scenario::eps_known_mu;
    plan.N_list = {1000};
    plan.T_list = {1000, 20000};
    plan.true_params = {0.0, 0.01, 60.0};
    plan.eps_true_list = {0.2, 0.6, 1.0};
    plan.Q = 5;
    plan.K = 8;
    plan.seed = hash64({kMasterSeed, 3u});
    plan.rho = 60.0;
    const auto result = run_eps_battery(plan, default_workers());

    std::map<std::pair<double, std::uint64_t>, std::pair<double, int>> mean_abs;
    for (const auto& r : result.records) {
        if (!r.exists) continue;
        auto& acc = mean_abs[{r.true_value, r.T}];
        acc.first += std::abs(r.error);
        acc.second += 1;
    }
    bool ok = true;
    std::string detail;
    for (double eps : {0.2, 0.6, 1.0}) {
        const auto lo = mean_abs[{eps, 1000}];
        const auto hi = mean_abs[{eps, 20000}];
        if (lo.second == 0 || hi.second == 0) {
            ok = false;
            continue;
        }
        const double m_lo = lo.first / lo.second;
        const double m_hi = hi.first / hi.second;
        ok = ok && m_hi < m_lo;
        char cell[120];
        std::snprintf(cell, sizeof(cell), " eps*=%.1f: %.2e -> %.2e;", eps, m_lo, m_hi);
        detail += cell;
    }
    report(3, ok, "mean |error| shrinks from T=1e3 to T=2e4:" + detail, timer.seconds());
}

// ---- criterion 4 --------------------------------------------------------

void criterion4() {
    Timer timer;
    ExperimentPlan plan;
    plan.scenario = Scenario::mu_known_eps;
    plan.N_list = {100};
    plan.T_list = {10000};
    plan.true_params = {0.25, 0.0, 60.0};
    plan.mu_true_list = {0.1, 0.3};
    plan.Q = 30;
    plan.K = 30;
    plan.seed = hash64({kMasterSeed, 4u});
    plan.rho = 60.0;
    const auto result = run_mu_battery(plan, default_workers());

    bool ok = true;
    std::string detail;
    for (const auto& a : result.aggregates) {
        const double t_stat = a.sem > 0.0 ? a.mean_error / a.sem : 0.0;
        const bool positive = t_stat >= 1.645;  // one-sided 95%
        ok = ok && positive;
        const double rel = 100.0 * a.mean_error / a.true_value;
        char cell[200];
        std::snprintf(cell, sizeof(cell),
                      " mu*=%.1f: mean_err=%+.2e sem=%.1e t=%+.2f rel=%+.1f%% "
                      "(5-25%% band: %s);",
                      a.true_value, a.mean_error, a.sem, t_stat, rel,
                      rel >= 5.0 && rel <= 25.0 ? "yes" : "no");
        detail += cell;
    }
    report(4, ok, "mu-MLE upward bias at 95% confidence:" + detail, timer.seconds());
}

// ---- criterion 5 --------------------------------------------------------

void criterion5() {
    Timer timer;
    bool ok = true;
    std::string detail;

    for (std::uint32_t T = 1; T <= 4; ++T) {
        const auto dist = two_agent_oracle({-0.35, 0.3}, 0.45, 0.25, 8.0, T);
        double total = 0.0;
        for (const auto& p : dist.paths) total += p.probability;
        ok = ok && std::abs(total - 1.0) <= 1e-12;
    }

    // Monte Carlo frequencies within 3 binomial SEs at 1e5 runs (T=2)
    const double eps = 0.45, mu = 0.25, rho = 8.0;
    const std::vector<double> x0{-0.35, 0.3};
    const auto oracle = two_agent_oracle({x0[0], x0[1]}, eps, mu, rho, 2);
    const int runs = 100000;
    std::map<double, int> counts;
    for (int r = 0; r < runs; ++r) {
        SimulationConfig cfg;
        cfg.num_agents = 2;
        cfg.num_steps = 2;
        cfg.params = {eps, mu, rho};
        cfg.initial_opinions = x0;
        cfg.seed = hash64({kMasterSeed, 5u, static_cast<std::uint64_t>(r)});
        counts[simulate(cfg).states.back().opinions[0]] += 1;
    }
    for (const auto& [value, prob] : oracle.x1_distribution) {
        const double freq = static_cast<double>(counts[value]) / runs;
        const double se = std::sqrt(prob * (1.0 - prob) / runs);
        const bool cell_ok = std::abs(freq - prob) <= 3.0 * se + 1e-12;
        ok = ok && cell_ok;
        char cell[120];
        std::snprintf(cell, sizeof(cell), " p=%.4f f=%.4f;", prob, freq);
        detail += cell;
    }

    // log-likelihood of each concrete outcome string equals its path log-prob
    OpinionState xs{{-0.35, 0.3}, 0};
    InteractionSchedule sched;
    sched.num_agents = 2;
    sched.pairs.assign(3, {0, 1});
    const auto oracle3 = two_agent_oracle({x0[0], x0[1]}, eps, mu, rho, 3);
    for (const auto& path : oracle3.paths) {
        OutcomeTrace o;
        for (std::uint32_t t = 0; t < 3; ++t) {
            o.outcomes.push_back(static_cast<std::uint8_t>((path.mask >> t) & 1));
        }
        const double ll = log_likelihood(eps, mu, xs, sched, o, rho);
        ok = ok && std::abs(ll - std::log(path.probability)) <= 1e-10;
    }

    report(5, ok,
           "two-agent oracle: mass=1, MC match at 1e5 runs, path log-probs:" + detail,
           timer.seconds());
}

// ---- criterion 6 --------------------------------------------------------

void criterion6() {
    Timer timer;
    bool ok = true;
    std::string detail;
    OpinionState x0{{-0.4, 0.45}, 0};
    for (std::uint32_t T : {5u, 12u}) {
        InteractionSchedule s;
        s.num_agents = 2;
        s.pairs.assign(T, {0, 1});
        double total = 0.0;
        for (std::uint64_t mask = 0; mask < (1ULL << T); ++mask) {
            OutcomeTrace o;
            for (std::uint32_t t = 0; t < T; ++t) {
                o.outcomes.push_back(static_cast<std::uint8_t>((mask >> t) & 1));
            }
            total += std::exp(log_likelihood(0.5, 0.3, x0, s, o, 9.0));
        }
        ok = ok && std::abs(total - 1.0) <= 1e-10;
        char cell[80];
        std::snprintf(cell, sizeof(cell), " T=%u: sum-1=%+.1e;", T, total - 1.0);
        detail += cell;
    }
    report(6, ok, "trace likelihood normalization over all outcome strings:" + detail,
           timer.seconds());
}

// ---- criterion 7 --------------------------------------------------------

ExperimentPlan scan_plan() {
    ExperimentPlan plan;
    plan.scenario = Scenario::surface_scan;
    plan.N_list = {50};
    plan.T_list = {1000};
    plan.true_params = {0.25, 0.25, 60.0};
    plan.eps_true_list = {0.05, 0.1, 0.2, 0.3, 0.4, 0.5};
    plan.mu_true_list = {0.05, 0.15, 0.25, 0.35, 0.45, 0.5};
    plan.Q = 1;
    plan.K = 1;
    plan.seed = hash64({kMasterSeed, 7u});
    plan.rho = 60.0;
    for (int i = 0; i <= 40; ++i) plan.eps_grid.push_back(0.02 + i * (1.0 - 0.02) / 40.0);
    for (int i = 0; i <= 40; ++i) plan.mu_grid.push_back(i * 0.5 / 40.0);
    return plan;
}

void criterion7() {
    Timer timer;
    const auto result = run_surface_scan(scan_plan(), default_workers());
    int multi = 0, single = 0;
    for (const auto& cell : result.cells) {
        if (cell.local_minima.size() >= 2) ++multi;
        if (cell.local_minima.size() == 1) ++single;
    }
    char buf[160];
    std::snprintf(buf, sizeof(buf),
                  "surface census over %zu cells: %d multi-minima, %d single-minimum",
                  result.cells.size(), multi, single);
    report(7, multi >= 1 && single >= 1, buf, timer.seconds());
}

// ---- criterion 8 --------------------------------------------------------

void criterion8() {
    Timer timer;
    ExperimentPlan plan;
    plan.scenario = Scenario::rho_sweep;
    plan.seed = 0;
    const auto result = run_rho_sweep(plan);
    bool mono = true;
    for (std::size_t i = 1; i + 1 < result.rows.size(); ++i) {
        mono = mono && std::abs(result.rows[i].bias) < std::abs(result.rows[i - 1].bias);
    }
    const double endpoint = std::abs(result.rows.back().bias);
    char buf[160];
    std::snprintf(buf, sizeof(buf),
                  "analytic bias decays monotonically over rho in [1,1e3] and "
                  "|bias(1e6)|=%.1e < 1e-9",
                  endpoint);
    report(8, mono && endpoint < 1e-9, buf, timer.seconds());
}

// ---- criterion 9 --------------------------------------------------------

void criterion9() {
    Timer timer;
    ExperimentPlan eps_plan;
    eps_plan.scenario = Scenario::eps_known_mu;
    eps_plan.N_list = {50};
    eps_plan.T_list = {500};
    eps_plan.true_params = {0.0, 0.1, 60.0};
    eps_plan.eps_true_list = {0.3, 0.6};
    eps_plan.Q = 4;
    eps_plan.K = 4;
    eps_plan.seed = hash64({kMasterSeed, 9u, 1u});
    eps_plan.rho = 60.0;

    ExperimentPlan mu_plan;
    mu_plan.scenario = Scenario::mu_known_eps;
    mu_plan.N_list = {30};
    mu_plan.T_list = {400};
    mu_plan.true_params = {0.4, 0.0, 60.0};
    mu_plan.mu_true_list = {0.2};
    mu_plan.Q = 3;
    mu_plan.K = 3;
    mu_plan.seed = hash64({kMasterSeed, 9u, 2u});
    mu_plan.rho = 60.0;

    ExperimentPlan rho_plan;
    rho_plan.scenario = Scenario::rho_sweep;
    rho_plan.seed = 0;

    auto scan = scan_plan();
    scan.eps_true_list = {0.2, 0.4};
    scan.mu_true_list = {0.25};
    scan.T_list = {500};

    bool ok = true;
    const auto eps_base = run_eps_battery(eps_plan, 1);
    const auto eps_ref = eps_battery_to_csv(eps_base) + aggregates_to_csv(eps_base);
    const auto mu_ref = mu_battery_to_csv(run_mu_battery(mu_plan, 1));
    const auto scan_base = run_surface_scan(scan, 1);
    const auto scan_ref =
        surface_long_to_csv(scan_base) + minima_census_to_csv(scan_base);
    const auto rho_ref = rho_sweep_to_csv(run_rho_sweep(rho_plan));
    for (int w = 1; w <= 8; ++w) {
        const auto eps_run = run_eps_battery(eps_plan, w);
        ok = ok && eps_battery_to_csv(eps_run) + aggregates_to_csv(eps_run) == eps_ref;
        ok = ok && mu_battery_to_csv(run_mu_battery(mu_plan, w)) == mu_ref;
        const auto scan_run = run_surface_scan(scan, w);
        ok = ok &&
             surface_long_to_csv(scan_run) + minima_census_to_csv(scan_run) == scan_ref;
        ok = ok && rho_sweep_to_csv(run_rho_sweep(rho_plan)) == rho_ref;
    }
    report(9, ok, "byte-identical CSVs for workers 1..8 across all batteries",
           timer.seconds());
}

}  // namespace

int main() {
    Timer total;
    criterion1();
    criterion2();
    criterion3();
    criterion4();
    criterion5();
    criterion6();
    criterion7();
    criterion8();
    criterion9();
    std::printf("%d/9 criteria passed (total %.1fs)\n", 9 - g_failures, total.seconds());
    return g_failures;
}
