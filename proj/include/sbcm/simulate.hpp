#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "sbcm/params.hpp"
#include "sbcm/rng.hpp"

namespace sbcm {

enum class StateStorage : std::uint8_t {
    dense,   // keep all T+1 opinion vectors (memory ~ 8*N*(T+1) bytes)
    sparse,  // keep only the two touched entries per successful step
};

struct SimulationConfig {
    std::uint32_t num_agents = 2;
    std::uint64_t num_steps = 1;
    ModelParams params;
    // When empty, x0 is drawn uniformly from [-1, 1)^N using the seed.
    std::vector<double> initial_opinions;
    std::uint64_t seed = 0;
    StateStorage storage = StateStorage::dense;
};

void validate_config(const SimulationConfig& cfg);

// Post-update values of the pair touched at a successful step.
struct TouchedStep {
    std::uint64_t t;  // 1-based step index
    std::uint32_t i, j;
    double xi, xj;
};

struct Trace {
    SimulationConfig config;
    InteractionSchedule schedule;
    OutcomeTrace outcomes;
    OpinionState x0;
    // Exactly one of the two is populated, per config.storage.
    std::vector<OpinionState> states;       // dense: x^0 .. x^T
    std::vector<TouchedStep> touched;       // sparse

    std::size_t num_successes() const { return outcomes.num_successes(); }
    // State at step t (0..T); O(1) dense, O(m) sparse.
    OpinionState state_at(std::uint64_t t) const;
};

// Uniform draw of T unordered pairs from the N(N-1)/2 pair space
// (index arithmetic over the triangular enumeration, no rejection).
InteractionSchedule draw_schedule(std::uint32_t num_agents, std::uint64_t num_steps,
                                  Rng& rng);

// Unranking helper (exposed for tests): k in [0, N(N-1)/2) -> (i, j), i < j.
std::pair<std::uint32_t, std::uint32_t> unrank_pair(std::uint64_t k, std::uint32_t n);

// One stochastic update.  Consumes exactly one uniform from rng.
// Returns the success bit; the state is updated in place.
std::uint8_t step(OpinionState& state, std::pair<std::uint32_t, std::uint32_t> pair,
                  const ModelParams& params, Rng& rng);

Trace simulate(const SimulationConfig& cfg);

// Deterministic trajectory x^0..x^T given outcomes and mu; consumes no
// randomness.  Dense output.
std::vector<OpinionState> replay(const OpinionState& x0,
                                 const InteractionSchedule& schedule,
                                 const OutcomeTrace& outcomes, double mu);

// Streaming form: walk the trajectory once, calling visit(t, i, j, x)
// with the state x *before* step t is applied (t = 1..T).  The buffer x
// is reused between calls.
void replay_visit(
    const OpinionState& x0, const InteractionSchedule& schedule,
    const OutcomeTrace& outcomes, double mu,
    const std::function<void(std::uint64_t, std::uint32_t, std::uint32_t,
                             const std::vector<double>&)>& visit);

}  // namespace sbcm
