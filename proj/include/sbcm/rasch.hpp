#pragma once

#include <cstddef>
#include <vector>

namespace sbcm {

// Closed-form small-sample diagnostics for the epsilon estimator, via the
// one-ability logistic response model the success probabilities map onto
// (ability = epsilon, item difficulty = pairwise opinion distance, common
// discrimination rho).

// Success probabilities clipped away from {0, 1} before formula
// evaluation; the count of clipped entries is reported alongside.
struct ClippedKappas {
    std::vector<double> kappas;
    std::size_t saturated_count = 0;
};

ClippedKappas clip_kappas(const std::vector<double>& kappas);

// I = rho^2 * sum_t kappa_t (1 - kappa_t)
double fisher_information(const std::vector<double>& kappas, double rho);

// Two published displays of the first-order bias disagree by one factor of
// sum kappa(1-kappa) in the denominator.  `lord` is the form obtained by
// instantiating Lord's classic MLE-bias formula (and the one a direct
// Monte Carlo of the estimator reproduces); `appendix_simplified` keeps the
// other display available for comparison.
enum class BiasFormula : int { lord = 0, appendix_simplified = 1 };

double analytic_bias(const std::vector<double>& kappas, double rho,
                     BiasFormula formula = BiasFormula::lord);

// 1 / fisher_information
double analytic_variance(const std::vector<double>& kappas, double rho);

// Theoretical upper bound 1/(8 rho T) on |bias|
double bias_bound(double rho, std::size_t num_steps);

struct BiasVarianceReport {
    double bias = 0.0;
    double variance = 0.0;
    double bound = 0.0;
    double fisher_information = 0.0;
    std::size_t saturated_count = 0;
    bool within_bound = false;
};

BiasVarianceReport bias_variance_report(const std::vector<double>& kappas, double rho,
                                        BiasFormula formula = BiasFormula::lord);

}  // namespace sbcm
