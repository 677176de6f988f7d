#include "sbcm/params.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>

namespace sbcm {

ParamCheck check_params(const ModelParams& p) {
    ParamCheck c;
    auto fail = [&](const char* field, std::string msg) {
        c.ok = false;
        c.field = field;
        c.message = std::move(msg);
    };
    if (!std::isfinite(p.epsilon) || p.epsilon < 0.0 || p.epsilon > 2.0) {
        fail("epsilon", "epsilon must lie in [0, 2], got " + std::to_string(p.epsilon));
        return c;
    }
    if (!std::isfinite(p.mu) || p.mu < 0.0 || p.mu > 0.5) {
        fail("mu", "mu must lie in [0, 0.5], got " + std::to_string(p.mu));
        return c;
    }
    if (!std::isfinite(p.rho) || p.rho <= 0.0) {
        fail("rho", "rho must be positive and finite, got " + std::to_string(p.rho));
        return c;
    }
    if (p.rho > 1e6) {
        c.warnings.push_back(
            "rho > 1e6: the likelihood is effectively discontinuous; "
            "optimizers may stall");
    }
    return c;
}

void validate_params(const ModelParams& p) {
    const ParamCheck c = check_params(p);
    if (!c.ok) throw std::domain_error(c.field + ": " + c.message);
}

void validate_state(const OpinionState& s) {
    if (s.opinions.size() < 2) {
        throw std::domain_error("opinions: need at least 2 agents");
    }
    for (double v : s.opinions) {
        if (!std::isfinite(v) || v < -1.0 || v > 1.0) {
            throw std::domain_error("opinions: entries must lie in [-1, 1]");
        }
    }
}

void validate_schedule(const InteractionSchedule& s) {
    if (s.num_agents < 2) {
        throw std::domain_error("num_agents: need at least 2 agents");
    }
    for (const auto& [i, j] : s.pairs) {
        if (!(i < j && j < s.num_agents)) {
            throw std::domain_error("schedule: pairs must satisfy 0 <= i < j < N");
        }
    }
}

std::size_t OutcomeTrace::num_successes() const {
    return static_cast<std::size_t>(
        std::accumulate(outcomes.begin(), outcomes.end(), std::uint64_t{0}));
}

void require_aligned(const InteractionSchedule& s, const OutcomeTrace& o) {
    if (s.num_steps() != o.size()) {
        throw std::invalid_argument("schedule and outcomes have different lengths");
    }
}

}  // namespace sbcm
