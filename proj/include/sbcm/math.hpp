#pragma once

#include <cmath>
#include <stdexcept>
#include <string>

namespace sbcm {

// Logistic primitives. All likelihood code funnels through these two
// functions so that saturation behaviour is controlled in one place.

inline void require_finite(double v, const char* name) {
    if (!std::isfinite(v)) {
        throw std::invalid_argument(std::string(name) + " must be finite");
    }
}

// sigma_rho(z) = 1 / (1 + exp(-rho z)), evaluated without overflow on
// either tail.
inline double sigmoid(double z, double rho) {
    require_finite(z, "z");
    require_finite(rho, "rho");
    if (rho <= 0.0) {
        throw std::invalid_argument("rho must be positive");
    }
    const double w = rho * z;
    if (w >= 0.0) {
        return 1.0 / (1.0 + std::exp(-w));
    }
    const double e = std::exp(w);
    return e / (1.0 + e);
}

// log(sigma_rho(z)).  Branches so that neither exp() argument is ever
// positive; exact down to the asymptote log_sigmoid(z) ~ rho*z as z -> -inf.
inline double log_sigmoid(double z, double rho) {
    require_finite(z, "z");
    require_finite(rho, "rho");
    if (rho <= 0.0) {
        throw std::invalid_argument("rho must be positive");
    }
    const double w = rho * z;
    if (w >= 0.0) {
        return -std::log1p(std::exp(-w));
    }
    return w - std::log1p(std::exp(w));
}

inline double logit(double p) {
    return std::log(p) - std::log1p(-p);
}

}  // namespace sbcm
