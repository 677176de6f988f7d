#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>

#include "sbcm/likelihood.hpp"
#include "sbcm/math.hpp"
#include "sbcm/simulate.hpp"

using namespace sbcm;

namespace {

// Naive reference: straight product of per-step probabilities with a
// step-by-step state walk.  Deliberately independent of the log-space path
// used by the library.
double naive_likelihood(double epsilon, double mu, const OpinionState& x0,
                        const InteractionSchedule& schedule,
                        const OutcomeTrace& outcomes, double rho) {
    std::vector<double> x = x0.opinions;
    double prob = 1.0;
    for (std::size_t t = 0; t < schedule.num_steps(); ++t) {
        const auto [i, j] = schedule.pairs[t];
        const double p =
            1.0 / (1.0 + std::exp(-rho * (epsilon - std::abs(x[i] - x[j]))));
        if (outcomes.outcomes[t]) {
            prob *= p;
            const double oi = x[i], oj = x[j];
            x[i] = oi + mu * (oj - oi);
            x[j] = oj + mu * (oi - oj);
        } else {
            prob *= 1.0 - p;
        }
    }
    return prob;
}

std::vector<double> naive_distances(double mu, const OpinionState& x0,
                                    const InteractionSchedule& schedule,
                                    const OutcomeTrace& outcomes) {
    std::vector<double> x = x0.opinions;
    std::vector<double> d;
    for (std::size_t t = 0; t < schedule.num_steps(); ++t) {
        const auto [i, j] = schedule.pairs[t];
        d.push_back(std::abs(x[i] - x[j]));
        if (outcomes.outcomes[t]) {
            const double oi = x[i], oj = x[j];
            x[i] = oi + mu * (oj - oi);
            x[j] = oj + mu * (oi - oj);
        }
    }
    return d;
}

Trace random_trace(std::uint64_t seed, std::uint32_t N, std::uint64_t T,
                   ModelParams p) {
    SimulationConfig cfg;
    cfg.num_agents = N;
    cfg.num_steps = T;
    cfg.params = p;
    cfg.seed = seed;
    cfg.storage = StateStorage::sparse;
    return simulate(cfg);
}

}  // namespace

TEST_CASE("two-agent distances follow the contraction identity") {
    OpinionState x0{{-0.2, 0.2}, 0};
    InteractionSchedule s;
    s.num_agents = 2;
    s.pairs = {{0, 1}, {0, 1}};
    OutcomeTrace o;
    o.outcomes = {1, 0};
    const auto d = distances_for(x0, s, o, 0.25);
    REQUIRE(d.size() == 2);
    CHECK(d[0] == doctest::Approx(0.4).epsilon(1e-15));
    CHECK(d[1] == doctest::Approx(0.2).epsilon(1e-15));
}

TEST_CASE("mu = 0 leaves distances at their initial values") {
    const auto t = random_trace(5, 6, 100, {0.8, 0.3, 5.0});
    const auto d = distances_for(t.x0, t.schedule, t.outcomes, 0.0);
    for (std::size_t i = 0; i < d.size(); ++i) {
        const auto [a, b] = t.schedule.pairs[i];
        CHECK(d[i] == std::abs(t.x0.opinions[a] - t.x0.opinions[b]));
    }
}

TEST_CASE("distances match a naive step-by-step recomputation") {
    for (std::uint64_t seed : {1ULL, 9ULL, 33ULL}) {
        const auto t = random_trace(seed, 9, 300, {0.6, 0.2, 10.0});
        const auto got = distances_for(t.x0, t.schedule, t.outcomes, 0.2);
        const auto want = naive_distances(0.2, t.x0, t.schedule, t.outcomes);
        REQUIRE(got.size() == want.size());
        for (std::size_t i = 0; i < got.size(); ++i) {
            CHECK(got[i] == doctest::Approx(want[i]).epsilon(1e-15));
        }
    }
}

TEST_CASE("single success at distance epsilon scores log one half") {
    OpinionState x0{{-0.15, 0.15}, 0};
    InteractionSchedule s;
    s.num_agents = 2;
    s.pairs = {{0, 1}};
    OutcomeTrace o;
    o.outcomes = {1};
    // d = 0.3 = epsilon
    CHECK(log_likelihood(0.3, 0.2, x0, s, o, 7.0) ==
          doctest::Approx(std::log(0.5)).epsilon(1e-14));
}

TEST_CASE("two-agent single-step likelihood matches the Bernoulli form") {
    OpinionState x0{{-0.3, 0.5}, 0};
    InteractionSchedule s;
    s.num_agents = 2;
    s.pairs = {{0, 1}};
    OutcomeTrace succ, fail;
    succ.outcomes = {1};
    fail.outcomes = {0};
    const double d0 = 0.8, eps = 0.55, rho = 13.0;
    CHECK(log_likelihood(eps, 0.25, x0, s, succ, rho) ==
          doctest::Approx(std::log(sigmoid(eps - d0, rho))).epsilon(1e-13));
    CHECK(log_likelihood(eps, 0.25, x0, s, fail, rho) ==
          doctest::Approx(std::log(1.0 - sigmoid(eps - d0, rho))).epsilon(1e-13));
}

TEST_CASE("likelihoods over all outcome strings sum to one") {
    OpinionState x0{{-0.45, 0.35}, 0};
    const double eps = 0.4, mu = 0.3, rho = 9.0;
    for (std::uint32_t T : {4u, 8u}) {
        InteractionSchedule s;
        s.num_agents = 2;
        s.pairs.assign(T, {0, 1});
        double total = 0.0;
        double total_naive = 0.0;
        for (std::uint32_t mask = 0; mask < (1u << T); ++mask) {
            OutcomeTrace o;
            for (std::uint32_t t = 0; t < T; ++t) o.outcomes.push_back((mask >> t) & 1);
            const double ll = log_likelihood(eps, mu, x0, s, o, rho);
            total += std::exp(ll);
            const double naive = naive_likelihood(eps, mu, x0, s, o, rho);
            total_naive += naive;
            CHECK(ll == doctest::Approx(std::log(naive)).epsilon(1e-10));
        }
        CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(total_naive == doctest::Approx(1.0).epsilon(1e-12));
    }
}

TEST_CASE("score limits and the equal-distance zero") {
    std::vector<double> d(40, 0.3);
    OutcomeTrace o;
    for (int i = 0; i < 40; ++i) o.outcomes.push_back(i < 20 ? 1 : 0);
    const double rho = 25.0;
    CHECK(score_epsilon(-1e6 / rho, d, o, rho) == doctest::Approx(20.0).epsilon(1e-12));
    CHECK(score_epsilon(1e6 / rho, d, o, rho) ==
          doctest::Approx(20.0 - 40.0).epsilon(1e-12));
    CHECK(score_epsilon(0.3, d, o, rho) == doctest::Approx(0.0).scale(1.0).epsilon(1e-12));
}

TEST_CASE("score matches a central difference of the log likelihood") {
    // the score is stated in the rho-free convention m - sum kappa, so the
    // actual derivative of the log likelihood is rho times the score
    const auto t = random_trace(21, 8, 200, {0.5, 0.15, 6.0});
    const auto d = distances_for(t.x0, t.schedule, t.outcomes, 0.15);
    const double h = 1e-5, rho = 6.0;
    for (double eps : {0.2, 0.5, 0.9}) {
        const double fd = (log_likelihood_given_distances(eps + h, d, t.outcomes, rho) -
                           log_likelihood_given_distances(eps - h, d, t.outcomes, rho)) /
                          (2.0 * h);
        CHECK(rho * score_epsilon(eps, d, t.outcomes, rho) ==
              doctest::Approx(fd).epsilon(1e-6));
    }
}

TEST_CASE("curvature is negative and matches the score derivative") {
    std::vector<double> single{0.4};
    CHECK(curvature_epsilon(0.4, single, 12.0) == doctest::Approx(-3.0).epsilon(1e-12));

    const auto t = random_trace(22, 7, 150, {0.7, 0.2, 5.0});
    const auto d = distances_for(t.x0, t.schedule, t.outcomes, 0.2);
    const double h = 1e-5;
    for (double eps : {0.1, 0.6, 1.2}) {
        CHECK(curvature_epsilon(eps, d, 5.0) < 0.0);
        const double fd = (score_epsilon(eps + h, d, t.outcomes, 5.0) -
                           score_epsilon(eps - h, d, t.outcomes, 5.0)) /
                          (2.0 * h);
        CHECK(curvature_epsilon(eps, d, 5.0) == doctest::Approx(fd).epsilon(1e-5));
    }
}

TEST_CASE("log likelihood is invariant under joint step permutation") {
    const auto t = random_trace(23, 6, 120, {0.6, 0.25, 8.0});
    auto d = distances_for(t.x0, t.schedule, t.outcomes, 0.25);
    auto o = t.outcomes;
    const double base = log_likelihood_given_distances(0.45, d, o, 8.0);
    // reverse both sequences together
    std::reverse(d.begin(), d.end());
    std::reverse(o.outcomes.begin(), o.outcomes.end());
    CHECK(log_likelihood_given_distances(0.45, d, o, 8.0) ==
          doctest::Approx(base).epsilon(1e-13));
}

TEST_CASE("nll surface basics") {
    const auto t = random_trace(31, 10, 400, {0.5, 0.2, 20.0});
    std::vector<double> eps_grid, mu_grid;
    for (int i = 0; i <= 30; ++i) eps_grid.push_back(0.05 + i * (1.2 - 0.05) / 30.0);
    for (int i = 0; i <= 20; ++i) mu_grid.push_back(i * 0.5 / 20.0);
    const auto s = nll_surface(t.x0, t.schedule, t.outcomes, 20.0, eps_grid, mu_grid);

    double minimum = s.values[0][0];
    for (const auto& row : s.values) {
        minimum = std::min(minimum, *std::min_element(row.begin(), row.end()));
    }
    const double nll_truth =
        -log_likelihood(0.5, 0.2, t.x0, t.schedule, t.outcomes, 20.0);
    CHECK(minimum <= nll_truth + 1e-9);

    // each mu column is convex in epsilon: differences change sign at most once
    for (std::size_t b = 0; b < mu_grid.size(); ++b) {
        int sign_changes = 0;
        double prev_diff = s.values[1][b] - s.values[0][b];
        for (std::size_t a = 2; a < eps_grid.size(); ++a) {
            const double diff = s.values[a][b] - s.values[a - 1][b];
            if ((diff < 0.0) != (prev_diff < 0.0)) ++sign_changes;
            prev_diff = diff;
        }
        CHECK(sign_changes <= 1);
    }
}

TEST_CASE("surface values on a T=2 trace match hand-composed probabilities") {
    OpinionState x0{{-0.1, 0.4}, 0};
    InteractionSchedule s;
    s.num_agents = 2;
    s.pairs = {{0, 1}, {0, 1}};
    OutcomeTrace o;
    o.outcomes = {1, 1};
    const double rho = 11.0, d0 = 0.5;
    const std::vector<double> eps_grid{0.2, 0.5, 0.9};
    const std::vector<double> mu_grid{0.1, 0.3};
    const auto surf = nll_surface(x0, s, o, rho, eps_grid, mu_grid);
    for (std::size_t a = 0; a < eps_grid.size(); ++a) {
        for (std::size_t b = 0; b < mu_grid.size(); ++b) {
            const double eps = eps_grid[a], mu = mu_grid[b];
            const double expect = -std::log(sigmoid(eps - d0, rho) *
                                            sigmoid(eps - d0 * (1.0 - 2.0 * mu), rho));
            CHECK(surf.values[a][b] == doctest::Approx(expect).epsilon(1e-12));
        }
    }
}

TEST_CASE("empty grids are rejected") {
    const auto t = random_trace(41, 4, 20, {0.5, 0.2, 5.0});
    CHECK_THROWS_AS(nll_surface(t.x0, t.schedule, t.outcomes, 5.0, {}, {0.1}),
                    std::domain_error);
    CHECK_THROWS_AS(nll_surface(t.x0, t.schedule, t.outcomes, 5.0, {0.1}, {}),
                    std::domain_error);
}
