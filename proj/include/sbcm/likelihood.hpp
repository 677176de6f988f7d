#pragma once

#include <vector>

#include "sbcm/params.hpp"
#include "sbcm/simulate.hpp"

namespace sbcm {

// |x_i - x_j| for the scheduled pair, taken just before each step.
// Deterministic in (x0, schedule, outcomes, mu) through replay.
std::vector<double> distances_for(const OpinionState& x0,
                                  const InteractionSchedule& schedule,
                                  const OutcomeTrace& outcomes, double mu);

// kappa_t = sigma_rho(epsilon - d_t), the per-step success probability.
std::vector<double> kappas_for(const std::vector<double>& distances, double epsilon,
                               double rho);

// Bernoulli log likelihood of the outcome string given precomputed
// distances (the epsilon scenario: mu known, replay already paid for).
double log_likelihood_given_distances(double epsilon,
                                      const std::vector<double>& distances,
                                      const OutcomeTrace& outcomes, double rho);

// Full log likelihood; distances are recomputed from mu via replay.
double log_likelihood(double epsilon, double mu, const OpinionState& x0,
                      const InteractionSchedule& schedule,
                      const OutcomeTrace& outcomes, double rho);

// Score d/d_eps of the log likelihood: m - sum_t kappa_t(eps).
double score_epsilon(double epsilon, const std::vector<double>& distances,
                     const OutcomeTrace& outcomes, double rho);

// Second derivative: -rho * sum_t kappa_t (1 - kappa_t); always negative.
double curvature_epsilon(double epsilon, const std::vector<double>& distances,
                         double rho);

// Negative log likelihood over an (eps, mu) grid.  surface[a][b] is the
// NLL at (eps_grid[a], mu_grid[b]); one replay per mu column.
struct NllSurface {
    std::vector<double> eps_grid;
    std::vector<double> mu_grid;
    std::vector<std::vector<double>> values;  // [eps][mu]
};

NllSurface nll_surface(const OpinionState& x0, const InteractionSchedule& schedule,
                       const OutcomeTrace& outcomes, double rho,
                       const std::vector<double>& eps_grid,
                       const std::vector<double>& mu_grid);

}  // namespace sbcm
