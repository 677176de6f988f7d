#pragma once

#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "sbcm/likelihood.hpp"
#include "sbcm/params.hpp"

namespace sbcm {

enum class Existence : std::uint8_t { interior, nonexistent_low, nonexistent_high };

const char* to_string(Existence e);

class ConvergenceError : public std::runtime_error {
public:
    ConvergenceError(const std::string& msg, double lo, double hi)
        : std::runtime_error(msg), bracket_lo(lo), bracket_hi(hi) {}
    double bracket_lo;
    double bracket_hi;
};

struct LocalMinimum {
    double epsilon = std::numeric_limits<double>::quiet_NaN();
    double mu = std::numeric_limits<double>::quiet_NaN();
    double nll = std::numeric_limits<double>::quiet_NaN();
};

struct EstimateReport {
    std::string mode;  // "epsilon", "mu" or "joint"
    double estimate = std::numeric_limits<double>::quiet_NaN();
    // mu component of a joint estimate (NaN otherwise)
    double estimate2 = std::numeric_limits<double>::quiet_NaN();
    bool converged = false;
    double score_residual = std::numeric_limits<double>::quiet_NaN();
    double nll_at_estimate = std::numeric_limits<double>::quiet_NaN();
    int iterations = 0;
    std::optional<std::string> boundary_hit;
    Existence existence = Existence::interior;
    bool flat_objective = false;
    std::vector<LocalMinimum> local_minima;  // joint mode
};

// ---- generic pieces ---------------------------------------------------

// Monotone-decreasing root finding: secant steps accepted only while they
// stay inside a maintained sign-change bracket, bisection otherwise.
// f(lo) > 0 > f(hi) required after internal bracket expansion.
struct RootResult {
    double root = 0.0;
    double residual = 0.0;
    int iterations = 0;
};

RootResult safeguarded_secant(const std::function<double(double)>& f, double lo,
                              double hi, double tol, int max_iters = 200);

struct NelderMeadOptions {
    double xtol = 1e-6;   // simplex diameter, internal coordinates
    double ftol = 1e-9;   // value spread over the simplex
    int max_iters = 500;
};

struct NelderMeadResult {
    std::vector<double> x;
    double value = std::numeric_limits<double>::quiet_NaN();
    int iterations = 0;
    int evaluations = 0;
    bool converged = false;
};

NelderMeadResult nelder_mead(const std::function<double(const std::vector<double>&)>& f,
                             const std::vector<double>& start, double initial_step,
                             const NelderMeadOptions& opts);

// Smooth bijection between an open interval and the real line, used to run
// the simplex unconstrained while honoring parameter domains.
struct IntervalMap {
    double lo;
    double hi;
    double to_param(double y) const;
    double to_internal(double p) const;
};

// ---- estimators -------------------------------------------------------

struct EpsilonOptions {
    double tol = 1e-8;       // on the score residual
    int max_iters = 200;
};

EstimateReport estimate_epsilon(const OpinionState& x0,
                                const InteractionSchedule& schedule,
                                const OutcomeTrace& outcomes, double mu_known,
                                double rho, const EpsilonOptions& opts = {});

// Same root, starting from a precomputed distance sequence.
EstimateReport estimate_epsilon_given_distances(const std::vector<double>& distances,
                                                const OutcomeTrace& outcomes,
                                                double rho,
                                                const EpsilonOptions& opts = {});

struct MuOptions {
    std::vector<double> starts = {0.1, 0.25, 0.4};
    NelderMeadOptions nm;
    double boundary_tol = 1e-6;  // distance to 0 or 1/2 that counts as a hit
    double flat_tol = 1e-9;      // NLL spread below which mu is unidentifiable
};

EstimateReport estimate_mu(const OpinionState& x0, const InteractionSchedule& schedule,
                           const OutcomeTrace& outcomes, double epsilon_known,
                           double rho, const MuOptions& opts = {});

struct JointOptions {
    std::vector<double> eps_starts = {0.25, 1.0, 1.75};
    std::vector<double> mu_starts = {0.05, 0.25, 0.45};
    NelderMeadOptions nm;
    double boundary_tol = 1e-6;
    double flat_tol = 1e-9;
    // two minima closer than this in both coordinates are merged
    double distinct_tol = 1e-5;
};

EstimateReport estimate_joint(const OpinionState& x0,
                              const InteractionSchedule& schedule,
                              const OutcomeTrace& outcomes, double rho,
                              const JointOptions& opts = {});

}  // namespace sbcm
