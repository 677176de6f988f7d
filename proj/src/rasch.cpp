#include "sbcm/rasch.hpp"

#include <cmath>
#include <stdexcept>

namespace sbcm {

namespace {

constexpr double kKappaLo = 1e-300;
constexpr double kKappaHi = 1.0 - 1e-16;

void require_nonempty(const std::vector<double>& kappas) {
    if (kappas.empty()) throw std::domain_error("kappas: empty sequence");
}

}  // namespace

ClippedKappas clip_kappas(const std::vector<double>& kappas) {
    ClippedKappas out;
    out.kappas.reserve(kappas.size());
    for (double k : kappas) {
        if (!(k >= kKappaLo && k <= kKappaHi)) {
            ++out.saturated_count;
            k = k < kKappaLo ? kKappaLo : kKappaHi;
        }
        out.kappas.push_back(k);
    }
    return out;
}

double fisher_information(const std::vector<double>& kappas, double rho) {
    require_nonempty(kappas);
    double s = 0.0;
    for (double k : kappas) s += k * (1.0 - k);
    return rho * rho * s;
}

double analytic_bias(const std::vector<double>& kappas, double rho,
                     BiasFormula formula) {
    require_nonempty(kappas);
    double info = 0.0;   // sum kappa (1-kappa)
    double skew = 0.0;   // sum kappa (1-kappa) (kappa - 1/2)
    for (double k : kappas) {
        const double w = k * (1.0 - k);
        info += w;
        skew += w * (k - 0.5);
    }
    switch (formula) {
        case BiasFormula::lord: return skew / (rho * info * info);
        case BiasFormula::appendix_simplified: return skew / (rho * info);
    }
    throw std::invalid_argument("unknown bias formula variant");
}

double analytic_variance(const std::vector<double>& kappas, double rho) {
    return 1.0 / fisher_information(kappas, rho);
}

double bias_bound(double rho, std::size_t num_steps) {
    if (!(rho > 0.0)) throw std::domain_error("rho: must be positive");
    if (num_steps < 1) throw std::domain_error("num_steps: must be >= 1");
    return 1.0 / (8.0 * rho * static_cast<double>(num_steps));
}

BiasVarianceReport bias_variance_report(const std::vector<double>& kappas, double rho,
                                        BiasFormula formula) {
    const ClippedKappas clipped = clip_kappas(kappas);
    BiasVarianceReport r;
    r.saturated_count = clipped.saturated_count;
    r.bias = analytic_bias(clipped.kappas, rho, formula);
    r.variance = analytic_variance(clipped.kappas, rho);
    r.fisher_information = fisher_information(clipped.kappas, rho);
    r.bound = bias_bound(rho, kappas.size());
    r.within_bound = std::abs(r.bias) < r.bound;
    return r;
}

}  // namespace sbcm
