#include "sbcm/simulate.hpp"

#include <cmath>
#include <stdexcept>

#include "sbcm/math.hpp"

namespace sbcm {

void validate_config(const SimulationConfig& cfg) {
    if (cfg.num_agents < 2) throw std::domain_error("num_agents: need at least 2 agents");
    if (cfg.num_steps < 1) throw std::domain_error("num_steps: need at least 1 step");
    validate_params(cfg.params);
    if (!cfg.initial_opinions.empty()) {
        if (cfg.initial_opinions.size() != cfg.num_agents) {
            throw std::domain_error("initial_opinions: length must equal num_agents");
        }
        for (double v : cfg.initial_opinions) {
            if (!std::isfinite(v) || v < -1.0 || v > 1.0) {
                throw std::domain_error("initial_opinions: entries must lie in [-1, 1]");
            }
        }
    }
}

std::pair<std::uint32_t, std::uint32_t> unrank_pair(std::uint64_t k, std::uint32_t n) {
    // Pairs enumerated row-major: (0,1)..(0,n-1), (1,2)..  Row i starts at
    // offset(i) = i*(2n-i-1)/2.  Invert with a float guess plus fixup.
    const auto offset = [n](std::uint64_t i) { return i * (2 * n - i - 1) / 2; };
    const double nd = static_cast<double>(n);
    double guess = (2.0 * nd - 1.0 - std::sqrt((2.0 * nd - 1.0) * (2.0 * nd - 1.0) -
                                               8.0 * static_cast<double>(k))) /
                   2.0;
    auto i = static_cast<std::uint64_t>(guess > 0.0 ? guess : 0.0);
    if (i > n - 2) i = n - 2;
    while (i > 0 && offset(i) > k) --i;
    while (i < static_cast<std::uint64_t>(n) - 2 && offset(i + 1) <= k) ++i;
    const std::uint64_t j = k - offset(i) + i + 1;
    return {static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(j)};
}

InteractionSchedule draw_schedule(std::uint32_t num_agents, std::uint64_t num_steps,
                                  Rng& rng) {
    if (num_agents < 2) throw std::domain_error("num_agents: need at least 2 agents");
    if (num_steps < 1) throw std::domain_error("num_steps: need at least 1 step");
    const std::uint64_t npairs =
        static_cast<std::uint64_t>(num_agents) * (num_agents - 1) / 2;
    InteractionSchedule s;
    s.num_agents = num_agents;
    s.pairs.reserve(num_steps);
    for (std::uint64_t t = 0; t < num_steps; ++t) {
        s.pairs.push_back(unrank_pair(rng.next_below(npairs), num_agents));
    }
    return s;
}

std::uint8_t step(OpinionState& state, std::pair<std::uint32_t, std::uint32_t> pair,
                  const ModelParams& params, Rng& rng) {
    const auto [i, j] = pair;
    if (i == j || j >= state.opinions.size()) {
        throw std::domain_error("pair: indices must be distinct and in range");
    }
    double& xi = state.opinions[i];
    double& xj = state.opinions[j];
    const double d = std::abs(xi - xj);
    const double p = sigmoid(params.epsilon - d, params.rho);
    const std::uint8_t success = rng.next_double() < p ? 1 : 0;
    if (success) {
        const double oi = xi, oj = xj;
        xi = oi + params.mu * (oj - oi);
        xj = oj + params.mu * (oi - oj);
    }
    state.time_index += 1;
    return success;
}

Trace simulate(const SimulationConfig& cfg) {
    validate_config(cfg);
    Rng rng(cfg.seed);

    Trace trace;
    trace.config = cfg;
    trace.x0.time_index = 0;
    if (cfg.initial_opinions.empty()) {
        trace.x0.opinions.resize(cfg.num_agents);
        for (auto& v : trace.x0.opinions) v = rng.next_symmetric();
    } else {
        trace.x0.opinions = cfg.initial_opinions;
    }

    const std::uint64_t npairs =
        static_cast<std::uint64_t>(cfg.num_agents) * (cfg.num_agents - 1) / 2;
    trace.schedule.num_agents = cfg.num_agents;
    trace.schedule.pairs.reserve(cfg.num_steps);
    trace.outcomes.outcomes.reserve(cfg.num_steps);

    OpinionState state = trace.x0;
    const bool dense = cfg.storage == StateStorage::dense;
    if (dense) {
        trace.states.reserve(cfg.num_steps + 1);
        trace.states.push_back(state);
    }

    for (std::uint64_t t = 1; t <= cfg.num_steps; ++t) {
        // pair draw first, then exactly one uniform for the Bernoulli, so
        // that runs with equal seeds but different epsilon share coupled
        // random number streams
        const auto pair = unrank_pair(rng.next_below(npairs), cfg.num_agents);
        trace.schedule.pairs.push_back(pair);
        const std::uint8_t success = step(state, pair, cfg.params, rng);
        trace.outcomes.outcomes.push_back(success);
        if (dense) {
            trace.states.push_back(state);
        } else if (success) {
            trace.touched.push_back({t, pair.first, pair.second,
                                     state.opinions[pair.first],
                                     state.opinions[pair.second]});
        }
    }
    return trace;
}

OpinionState Trace::state_at(std::uint64_t t) const {
    if (t > config.num_steps) throw std::out_of_range("state_at: t > T");
    if (!states.empty()) return states[t];
    OpinionState s = x0;
    for (const auto& u : touched) {
        if (u.t > t) break;
        s.opinions[u.i] = u.xi;
        s.opinions[u.j] = u.xj;
    }
    s.time_index = t;
    return s;
}

std::vector<OpinionState> replay(const OpinionState& x0,
                                 const InteractionSchedule& schedule,
                                 const OutcomeTrace& outcomes, double mu) {
    require_aligned(schedule, outcomes);
    if (!(mu >= 0.0 && mu <= 0.5)) throw std::domain_error("mu: must lie in [0, 0.5]");
    if (x0.opinions.size() != schedule.num_agents) {
        throw std::invalid_argument("x0 and schedule disagree on the number of agents");
    }
    std::vector<OpinionState> out;
    out.reserve(schedule.num_steps() + 1);
    out.push_back(x0);
    out.back().time_index = 0;
    OpinionState cur = out.back();
    for (std::size_t t = 0; t < schedule.num_steps(); ++t) {
        if (outcomes.outcomes[t]) {
            const auto [i, j] = schedule.pairs[t];
            double& xi = cur.opinions[i];
            double& xj = cur.opinions[j];
            const double oi = xi, oj = xj;
            xi = oi + mu * (oj - oi);
            xj = oj + mu * (oi - oj);
        }
        cur.time_index = t + 1;
        out.push_back(cur);
    }
    return out;
}

void replay_visit(
    const OpinionState& x0, const InteractionSchedule& schedule,
    const OutcomeTrace& outcomes, double mu,
    const std::function<void(std::uint64_t, std::uint32_t, std::uint32_t,
                             const std::vector<double>&)>& visit) {
    require_aligned(schedule, outcomes);
    if (!(mu >= 0.0 && mu <= 0.5)) throw std::domain_error("mu: must lie in [0, 0.5]");
    if (x0.opinions.size() != schedule.num_agents) {
        throw std::invalid_argument("x0 and schedule disagree on the number of agents");
    }
    std::vector<double> x = x0.opinions;
    for (std::size_t t = 0; t < schedule.num_steps(); ++t) {
        const auto [i, j] = schedule.pairs[t];
        visit(t + 1, i, j, x);
        if (outcomes.outcomes[t]) {
            const double oi = x[i], oj = x[j];
            x[i] = oi + mu * (oj - oi);
            x[j] = oj + mu * (oi - oj);
        }
    }
}

}  // namespace sbcm
