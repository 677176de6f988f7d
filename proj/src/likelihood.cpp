#include "sbcm/likelihood.hpp"

#include <cmath>
#include <stdexcept>

#include "sbcm/math.hpp"

namespace sbcm {

std::vector<double> distances_for(const OpinionState& x0,
                                  const InteractionSchedule& schedule,
                                  const OutcomeTrace& outcomes, double mu) {
    std::vector<double> d;
    d.reserve(schedule.num_steps());
    replay_visit(x0, schedule, outcomes, mu,
                 [&](std::uint64_t, std::uint32_t i, std::uint32_t j,
                     const std::vector<double>& x) {
                     d.push_back(std::abs(x[i] - x[j]));
                 });
    return d;
}

std::vector<double> kappas_for(const std::vector<double>& distances, double epsilon,
                               double rho) {
    std::vector<double> k;
    k.reserve(distances.size());
    for (double d : distances) k.push_back(sigmoid(epsilon - d, rho));
    return k;
}

double log_likelihood_given_distances(double epsilon,
                                      const std::vector<double>& distances,
                                      const OutcomeTrace& outcomes, double rho) {
    if (distances.size() != outcomes.size()) {
        throw std::invalid_argument("distances and outcomes have different lengths");
    }
    double acc = 0.0;
    for (std::size_t t = 0; t < distances.size(); ++t) {
        // 1 - sigma_rho(eps - d) = sigma_rho(d - eps)
        const double z = epsilon - distances[t];
        acc += outcomes.outcomes[t] ? log_sigmoid(z, rho) : log_sigmoid(-z, rho);
    }
    return acc;
}

double log_likelihood(double epsilon, double mu, const OpinionState& x0,
                      const InteractionSchedule& schedule,
                      const OutcomeTrace& outcomes, double rho) {
    double acc = 0.0;
    replay_visit(x0, schedule, outcomes, mu,
                 [&](std::uint64_t t, std::uint32_t i, std::uint32_t j,
                     const std::vector<double>& x) {
                     const double z = epsilon - std::abs(x[i] - x[j]);
                     acc += outcomes.outcomes[t - 1] ? log_sigmoid(z, rho)
                                                     : log_sigmoid(-z, rho);
                 });
    return acc;
}

double score_epsilon(double epsilon, const std::vector<double>& distances,
                     const OutcomeTrace& outcomes, double rho) {
    if (distances.size() != outcomes.size()) {
        throw std::invalid_argument("distances and outcomes have different lengths");
    }
    double sum_kappa = 0.0;
    for (double d : distances) sum_kappa += sigmoid(epsilon - d, rho);
    return static_cast<double>(outcomes.num_successes()) - sum_kappa;
}

double curvature_epsilon(double epsilon, const std::vector<double>& distances,
                         double rho) {
    double acc = 0.0;
    for (double d : distances) {
        // kappa(1-kappa) = sigma(z) sigma(-z), stable on both tails
        const double z = epsilon - d;
        acc += sigmoid(z, rho) * sigmoid(-z, rho);
    }
    return -rho * acc;
}

NllSurface nll_surface(const OpinionState& x0, const InteractionSchedule& schedule,
                       const OutcomeTrace& outcomes, double rho,
                       const std::vector<double>& eps_grid,
                       const std::vector<double>& mu_grid) {
    if (eps_grid.empty() || mu_grid.empty()) {
        throw std::domain_error("grids must be non-empty");
    }
    for (double e : eps_grid) {
        if (!(e >= 0.0 && e <= 2.0)) throw std::domain_error("eps grid outside [0, 2]");
    }
    for (double m : mu_grid) {
        if (!(m >= 0.0 && m <= 0.5)) throw std::domain_error("mu grid outside [0, 0.5]");
    }
    NllSurface s;
    s.eps_grid = eps_grid;
    s.mu_grid = mu_grid;
    s.values.assign(eps_grid.size(), std::vector<double>(mu_grid.size(), 0.0));
    for (std::size_t b = 0; b < mu_grid.size(); ++b) {
        const auto d = distances_for(x0, schedule, outcomes, mu_grid[b]);
        for (std::size_t a = 0; a < eps_grid.size(); ++a) {
            s.values[a][b] =
                -log_likelihood_given_distances(eps_grid[a], d, outcomes, rho);
        }
    }
    return s;
}

}  // namespace sbcm
