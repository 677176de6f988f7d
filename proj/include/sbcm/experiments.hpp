#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "sbcm/estimators.hpp"
#include "sbcm/likelihood.hpp"
#include "sbcm/params.hpp"
#include "sbcm/rasch.hpp"
#include "sbcm/simulate.hpp"

namespace sbcm {

enum class Scenario : int {
    eps_known_mu,   // estimate epsilon, mu known
    mu_known_eps,   // estimate mu, epsilon known
    joint,          // estimate both
    rho_sweep,      // analytic bias decay on the fixed item construction
    surface_scan,   // NLL grids + local-minima census
};

Scenario scenario_from_string(const std::string& s);
const char* to_string(Scenario s);

struct ExperimentPlan {
    Scenario scenario = Scenario::eps_known_mu;
    std::vector<std::uint32_t> N_list = {100};
    std::vector<std::uint64_t> T_list = {1000};
    ModelParams true_params;            // non-swept components taken from here
    std::vector<double> eps_true_list;  // default {true_params.epsilon}
    std::vector<double> mu_true_list;   // default {true_params.mu}
    std::uint32_t Q = 30;               // distinct initial conditions
    std::uint32_t K = 30;               // replications per initial condition
    std::uint64_t seed = 0;
    double rho = 60.0;
    std::vector<double> eps_grid;  // surface_scan only
    std::vector<double> mu_grid;   // surface_scan only
    std::vector<double> rho_grid;  // rho_sweep only
    std::uint32_t rho_sweep_items = 2000;
    std::uint32_t rho_sweep_ability_index = 1960;

    std::vector<double> eps_truths() const {
        return eps_true_list.empty() ? std::vector<double>{true_params.epsilon}
                                     : eps_true_list;
    }
    std::vector<double> mu_truths() const {
        return mu_true_list.empty() ? std::vector<double>{true_params.mu}
                                    : mu_true_list;
    }
};

void validate_plan(const ExperimentPlan& plan);

struct CellRecord {
    std::uint32_t N = 0;
    std::uint64_t T = 0;
    double true_value = 0.0;   // the swept truth (epsilon or mu)
    double true_value2 = 0.0;  // joint: mu truth
    std::uint32_t q = 0;
    std::uint32_t k = 0;
    double estimate = 0.0;
    double estimate2 = 0.0;  // joint: mu-hat
    double error = 0.0;
    bool exists = true;
    bool boundary_hit = false;
    bool flat_flag = false;
    double analytic_bias = 0.0;      // eps scenario, evaluated at the truth
    double analytic_variance = 0.0;  // eps scenario
};

struct CellAggregate {
    std::uint32_t N = 0;
    std::uint64_t T = 0;
    double true_value = 0.0;
    std::size_t n_used = 0;
    std::size_t n_excluded = 0;
    double mean_error = 0.0;
    double std_dev = 0.0;  // of the error, ddof = 1
    double sem = 0.0;
    double mean_analytic_bias = 0.0;
    double mean_analytic_variance = 0.0;
    double bound = 0.0;  // 1/(8 rho T)
    std::size_t boundary_hits = 0;
    std::size_t flat_flags = 0;
};

struct ExperimentResult {
    ExperimentPlan plan;
    std::vector<CellRecord> records;
    std::vector<CellAggregate> aggregates;
};

// Recompute aggregates from records; used both by the batteries and by the
// on-load consistency check.
std::vector<CellAggregate> recompute_aggregates(const ExperimentPlan& plan,
                                                const std::vector<CellRecord>& records);

// Runs fn(0..n-1) on a bounded pool.  Each index writes only its own
// output slot, so results are identical for any worker count.
void parallel_for(std::size_t n, int workers, const std::function<void(std::size_t)>& fn);

ExperimentResult run_eps_battery(const ExperimentPlan& plan, int workers = 1);
ExperimentResult run_mu_battery(const ExperimentPlan& plan, int workers = 1);

// ---- surface scan -------------------------------------------------------

struct GridPoint {
    std::size_t eps_index = 0;
    std::size_t mu_index = 0;
    double epsilon = 0.0;
    double mu = 0.0;
    double nll = 0.0;
};

struct SurfaceCell {
    std::string cell_id;  // "eps<truth>_mu<truth>_q<q>" style label
    double eps_true = 0.0;
    double mu_true = 0.0;
    std::uint32_t q = 0;
    NllSurface surface;
    std::vector<GridPoint> local_minima;  // census: <= all existing 8 neighbours
    GridPoint global_minimum;
};

struct SurfaceScanResult {
    ExperimentPlan plan;
    std::vector<SurfaceCell> cells;
};

std::vector<GridPoint> census_local_minima(const NllSurface& s);

SurfaceScanResult run_surface_scan(const ExperimentPlan& plan, int workers = 1);

// ---- rho sweep ----------------------------------------------------------

struct RhoSweepRow {
    double rho = 0.0;
    double bias = 0.0;
    double bound = 0.0;
};

struct RhoSweepResult {
    ExperimentPlan plan;
    double ability = 0.0;
    std::vector<RhoSweepRow> rows;
};

// Equally spaced item distances on [0, 1]; the ability parameter is pinned
// to one of the items so the construction stays well-behaved as rho grows.
std::vector<double> rho_sweep_items(std::uint32_t n_items);

RhoSweepResult run_rho_sweep(const ExperimentPlan& plan);

// ---- two-agent exhaustive oracle -----------------------------------------

struct TwoAgentPath {
    std::uint32_t mask = 0;  // bit t-1 = outcome of step t
    double probability = 0.0;
    double x1_final = 0.0;
    double x2_final = 0.0;
};

struct TwoAgentDistribution {
    std::vector<TwoAgentPath> paths;  // all 2^T outcome strings, mask order
    // distribution of X_1^T: (support value, total probability), ascending
    std::vector<std::pair<double, double>> x1_distribution;
};

// Exhaustive enumeration of a 2-agent process, T <= 4.
TwoAgentDistribution two_agent_oracle(std::pair<double, double> x0_pair,
                                      double epsilon, double mu, double rho,
                                      std::uint32_t num_steps);

}  // namespace sbcm
