#include "sbcm/estimators.hpp"

#include <algorithm>
#include <cmath>

#include "sbcm/math.hpp"

namespace sbcm {

const char* to_string(Existence e) {
    switch (e) {
        case Existence::interior: return "interior";
        case Existence::nonexistent_low: return "nonexistent_low";
        case Existence::nonexistent_high: return "nonexistent_high";
    }
    return "unknown";
}

RootResult safeguarded_secant(const std::function<double(double)>& f, double lo,
                              double hi, double tol, int max_iters) {
    double flo = f(lo);
    double fhi = f(hi);
    if (std::abs(flo) <= tol) return {lo, flo, 0};
    if (std::abs(fhi) <= tol) return {hi, fhi, 0};

    // expand geometrically until the decreasing function changes sign
    double width = hi - lo;
    int guard = 0;
    while (flo < 0.0) {
        lo -= width;
        width *= 2.0;
        flo = f(lo);
        if (++guard > 128) throw ConvergenceError("no sign change below", lo, hi);
    }
    guard = 0;
    while (fhi > 0.0) {
        hi += width;
        width *= 2.0;
        fhi = f(hi);
        if (++guard > 128) throw ConvergenceError("no sign change above", lo, hi);
    }

    double x0 = lo, f0 = flo;
    double x1 = hi, f1 = fhi;
    for (int iter = 1; iter <= max_iters; ++iter) {
        double cand = std::numeric_limits<double>::quiet_NaN();
        if (f1 != f0) cand = x1 - f1 * (x1 - x0) / (f1 - f0);
        if (!(cand > lo && cand < hi)) cand = 0.5 * (lo + hi);
        const double fc = f(cand);
        if (std::abs(fc) <= tol) return {cand, fc, iter};
        if (fc > 0.0) {
            lo = cand;
        } else {
            hi = cand;
        }
        x0 = x1;
        f0 = f1;
        x1 = cand;
        f1 = fc;
        if (hi - lo < 1e-15 * std::max(1.0, std::abs(lo))) {
            // bracket exhausted at double resolution; accept the midpoint
            const double x = 0.5 * (lo + hi);
            return {x, f(x), iter};
        }
    }
    throw ConvergenceError("secant iteration cap exceeded", lo, hi);
}

double IntervalMap::to_param(double y) const { return lo + (hi - lo) * sigmoid(y, 1.0); }

double IntervalMap::to_internal(double p) const {
    const double span = hi - lo;
    double u = (p - lo) / span;
    u = std::clamp(u, 1e-12, 1.0 - 1e-12);
    return logit(u);
}

NelderMeadResult nelder_mead(const std::function<double(const std::vector<double>&)>& f,
                             const std::vector<double>& start, double initial_step,
                             const NelderMeadOptions& opts) {
    const std::size_t n = start.size();
    constexpr double kReflect = 1.0, kExpand = 2.0, kContract = 0.5, kShrink = 0.5;

    std::vector<std::vector<double>> simplex(n + 1, start);
    for (std::size_t i = 0; i < n; ++i) simplex[i + 1][i] += initial_step;

    NelderMeadResult res;
    std::vector<double> fv(n + 1);
    for (std::size_t i = 0; i <= n; ++i) fv[i] = f(simplex[i]);
    res.evaluations = static_cast<int>(n + 1);

    std::vector<std::size_t> order(n + 1);
    for (int iter = 1; iter <= opts.max_iters; ++iter) {
        res.iterations = iter;
        for (std::size_t i = 0; i <= n; ++i) order[i] = i;
        std::sort(order.begin(), order.end(),
                  [&](std::size_t a, std::size_t b) { return fv[a] < fv[b]; });
        const std::size_t best = order[0], worst = order[n], second = order[n - 1];

        double diam = 0.0;
        for (std::size_t i = 1; i <= n; ++i) {
            for (std::size_t j = 0; j < n; ++j) {
                diam = std::max(diam,
                                std::abs(simplex[order[i]][j] - simplex[best][j]));
            }
        }
        if (diam < opts.xtol && fv[worst] - fv[best] < opts.ftol) {
            res.converged = true;
            break;
        }

        std::vector<double> centroid(n, 0.0);
        for (std::size_t i = 0; i <= n; ++i) {
            if (i == worst) continue;
            for (std::size_t j = 0; j < n; ++j) centroid[j] += simplex[i][j];
        }
        for (double& c : centroid) c /= static_cast<double>(n);

        auto blend = [&](double coef) {
            std::vector<double> p(n);
            for (std::size_t j = 0; j < n; ++j) {
                p[j] = centroid[j] + coef * (centroid[j] - simplex[worst][j]);
            }
            return p;
        };

        auto reflected = blend(kReflect);
        const double fr = f(reflected);
        ++res.evaluations;
        if (fr < fv[best]) {
            auto expanded = blend(kExpand);
            const double fe = f(expanded);
            ++res.evaluations;
            if (fe < fr) {
                simplex[worst] = std::move(expanded);
                fv[worst] = fe;
            } else {
                simplex[worst] = std::move(reflected);
                fv[worst] = fr;
            }
        } else if (fr < fv[second]) {
            simplex[worst] = std::move(reflected);
            fv[worst] = fr;
        } else {
            auto contracted = blend(fr < fv[worst] ? kContract : -kContract);
            const double fc = f(contracted);
            ++res.evaluations;
            if (fc < std::min(fr, fv[worst])) {
                simplex[worst] = std::move(contracted);
                fv[worst] = fc;
            } else {
                for (std::size_t i = 0; i <= n; ++i) {
                    if (i == best) continue;
                    for (std::size_t j = 0; j < n; ++j) {
                        simplex[i][j] = simplex[best][j] +
                                        kShrink * (simplex[i][j] - simplex[best][j]);
                    }
                    fv[i] = f(simplex[i]);
                    ++res.evaluations;
                }
            }
        }
    }

    std::size_t best = 0;
    for (std::size_t i = 1; i <= n; ++i) {
        if (fv[i] < fv[best]) best = i;
    }
    res.x = simplex[best];
    res.value = fv[best];
    return res;
}

// ---- epsilon ----------------------------------------------------------

EstimateReport estimate_epsilon_given_distances(const std::vector<double>& distances,
                                                const OutcomeTrace& outcomes,
                                                double rho,
                                                const EpsilonOptions& opts) {
    if (distances.size() != outcomes.size() || distances.empty()) {
        throw std::domain_error("distances and outcomes must be non-empty and aligned");
    }
    if (!(rho > 0.0) || !std::isfinite(rho)) throw std::domain_error("rho: must be positive");
    if (!(opts.tol > 0.0)) throw std::domain_error("tol: must be positive");

    EstimateReport rep;
    rep.mode = "epsilon";
    const std::size_t m = outcomes.num_successes();
    const std::size_t T = outcomes.size();

    if (m == 0 || m == T) {
        // score = m - sum kappa never crosses zero: no interior maximizer
        rep.existence = m == 0 ? Existence::nonexistent_low : Existence::nonexistent_high;
        rep.estimate = m == 0 ? 0.0 : 2.0;
        rep.converged = false;
        rep.boundary_hit = m == 0 ? "epsilon_low" : "epsilon_high";
        rep.score_residual = score_epsilon(rep.estimate, distances, outcomes, rho);
        rep.nll_at_estimate =
            -log_likelihood_given_distances(rep.estimate, distances, outcomes, rho);
        return rep;
    }

    const auto [dmin_it, dmax_it] = std::minmax_element(distances.begin(), distances.end());
    const double pad = 10.0 / rho;
    const auto score = [&](double eps) {
        return score_epsilon(eps, distances, outcomes, rho);
    };
    const RootResult root =
        safeguarded_secant(score, *dmin_it - pad, *dmax_it + pad, opts.tol, opts.max_iters);

    rep.iterations = root.iterations;
    rep.score_residual = root.residual;
    if (root.root < 0.0 || root.root > 2.0) {
        // root exists but lies outside the parameter domain; the constrained
        // maximizer is the nearer edge
        rep.estimate = std::clamp(root.root, 0.0, 2.0);
        rep.boundary_hit = root.root < 0.0 ? "epsilon_low" : "epsilon_high";
        rep.converged = false;
        rep.score_residual = score(rep.estimate);
    } else {
        rep.estimate = root.root;
        rep.converged = std::abs(root.residual) <= opts.tol;
    }
    rep.nll_at_estimate =
        -log_likelihood_given_distances(rep.estimate, distances, outcomes, rho);
    return rep;
}

EstimateReport estimate_epsilon(const OpinionState& x0,
                                const InteractionSchedule& schedule,
                                const OutcomeTrace& outcomes, double mu_known,
                                double rho, const EpsilonOptions& opts) {
    const auto distances = distances_for(x0, schedule, outcomes, mu_known);
    return estimate_epsilon_given_distances(distances, outcomes, rho, opts);
}

// ---- mu ---------------------------------------------------------------

namespace {

struct StartOutcome {
    NelderMeadResult nm;
    std::vector<double> params;
};

}  // namespace

EstimateReport estimate_mu(const OpinionState& x0, const InteractionSchedule& schedule,
                           const OutcomeTrace& outcomes, double epsilon_known,
                           double rho, const MuOptions& opts) {
    require_aligned(schedule, outcomes);
    EstimateReport rep;
    rep.mode = "mu";

    const IntervalMap map{0.0, 0.5};
    const auto nll = [&](double mu) {
        return -log_likelihood(epsilon_known, mu, x0, schedule, outcomes, rho);
    };

    // A trace with no successful interaction never moves any opinion, so
    // the objective is exactly constant in mu.
    if (outcomes.num_successes() == 0) {
        rep.flat_objective = true;
        rep.converged = false;
        rep.estimate = 0.25;
        rep.nll_at_estimate = nll(rep.estimate);
        return rep;
    }

    double probe_min = std::numeric_limits<double>::infinity();
    double probe_max = -std::numeric_limits<double>::infinity();
    for (double mu : {0.01, 0.1, 0.25, 0.4, 0.49}) {
        const double v = nll(mu);
        probe_min = std::min(probe_min, v);
        probe_max = std::max(probe_max, v);
    }
    if (probe_max - probe_min <= opts.flat_tol * std::max(1.0, std::abs(probe_max))) {
        rep.flat_objective = true;
        rep.converged = false;
        rep.estimate = 0.25;
        rep.nll_at_estimate = probe_min;
        return rep;
    }

    const auto objective = [&](const std::vector<double>& y) {
        return nll(map.to_param(y[0]));
    };

    bool any_converged = false;
    NelderMeadResult best;
    best.value = std::numeric_limits<double>::infinity();
    int evals = 0;
    for (double s : opts.starts) {
        const auto r = nelder_mead(objective, {map.to_internal(s)}, 0.5, opts.nm);
        evals += r.evaluations;
        any_converged |= r.converged;
        if (r.converged && r.value < best.value) best = r;
    }
    if (!any_converged) {
        throw ConvergenceError("Nelder-Mead failed to converge from all starts", 0.0, 0.5);
    }

    rep.estimate = map.to_param(best.x[0]);
    rep.nll_at_estimate = best.value;
    rep.iterations = evals;
    rep.converged = true;
    if (rep.estimate <= opts.boundary_tol) rep.boundary_hit = "mu_low";
    if (rep.estimate >= 0.5 - opts.boundary_tol) rep.boundary_hit = "mu_high";
    return rep;
}

// ---- joint ------------------------------------------------------------

EstimateReport estimate_joint(const OpinionState& x0,
                              const InteractionSchedule& schedule,
                              const OutcomeTrace& outcomes, double rho,
                              const JointOptions& opts) {
    require_aligned(schedule, outcomes);
    EstimateReport rep;
    rep.mode = "joint";

    const IntervalMap eps_map{0.0, 2.0};
    const IntervalMap mu_map{0.0, 0.5};
    const auto nll = [&](double eps, double mu) {
        return -log_likelihood(eps, mu, x0, schedule, outcomes, rho);
    };
    const auto objective = [&](const std::vector<double>& y) {
        return nll(eps_map.to_param(y[0]), mu_map.to_param(y[1]));
    };

    bool any_converged = false;
    int evals = 0;
    std::vector<LocalMinimum> minima;
    for (double es : opts.eps_starts) {
        for (double ms : opts.mu_starts) {
            const auto r = nelder_mead(
                objective, {eps_map.to_internal(es), mu_map.to_internal(ms)}, 0.5,
                opts.nm);
            evals += r.evaluations;
            if (!r.converged) continue;
            any_converged = true;
            LocalMinimum lm{eps_map.to_param(r.x[0]), mu_map.to_param(r.x[1]), r.value};
            bool duplicate = false;
            for (auto& known : minima) {
                if (std::abs(known.epsilon - lm.epsilon) <= opts.distinct_tol &&
                    std::abs(known.mu - lm.mu) <= opts.distinct_tol) {
                    duplicate = true;
                    if (lm.nll < known.nll) known = lm;
                    break;
                }
            }
            if (!duplicate) minima.push_back(lm);
        }
    }
    if (!any_converged) {
        throw ConvergenceError("Nelder-Mead failed to converge from all starts", 0.0, 2.0);
    }
    std::sort(minima.begin(), minima.end(),
              [](const LocalMinimum& a, const LocalMinimum& b) { return a.nll < b.nll; });

    rep.local_minima = minima;
    rep.estimate = minima.front().epsilon;
    rep.estimate2 = minima.front().mu;
    rep.nll_at_estimate = minima.front().nll;
    rep.iterations = evals;
    rep.converged = true;
    if (rep.estimate <= opts.boundary_tol) rep.boundary_hit = "epsilon_low";
    if (rep.estimate >= 2.0 - opts.boundary_tol) rep.boundary_hit = "epsilon_high";
    if (rep.estimate2 <= opts.boundary_tol) rep.boundary_hit = "mu_low";
    if (rep.estimate2 >= 0.5 - opts.boundary_tol) rep.boundary_hit = "mu_high";
    if (outcomes.num_successes() == 0) rep.flat_objective = true;
    return rep;
}

}  // namespace sbcm
