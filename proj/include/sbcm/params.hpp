#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace sbcm {

// Model parameters of the stochastic bounded confidence process.
//   epsilon : confidence bound, [0, 2] (opinion-distance units)
//   mu      : convergence rate, [0, 1/2]
//   rho     : sigmoid steepness, > 0
struct ModelParams {
    double epsilon = 0.0;
    double mu = 0.0;
    double rho = 60.0;
};

struct ParamCheck {
    bool ok = true;
    std::string field;    // offending field when !ok
    std::string message;
    std::vector<std::string> warnings;
};

ParamCheck check_params(const ModelParams& p);

// Throws std::domain_error naming the offending field.
void validate_params(const ModelParams& p);

// Opinions of all agents at one time step; every entry in [-1, 1].
struct OpinionState {
    std::vector<double> opinions;
    std::uint64_t time_index = 0;

    std::size_t num_agents() const { return opinions.size(); }
};

void validate_state(const OpinionState& s);

// Ordered candidate pairs, one per step; pairs stored canonically i < j.
// Step t of the process (t = 1..T) is pairs[t-1].
struct InteractionSchedule {
    std::vector<std::pair<std::uint32_t, std::uint32_t>> pairs;
    std::uint32_t num_agents = 0;

    std::size_t num_steps() const { return pairs.size(); }
};

void validate_schedule(const InteractionSchedule& s);

// Success bit per scheduled step.
struct OutcomeTrace {
    std::vector<std::uint8_t> outcomes;

    std::size_t size() const { return outcomes.size(); }
    std::size_t num_successes() const;
};

// Throws std::invalid_argument when lengths disagree.
void require_aligned(const InteractionSchedule& s, const OutcomeTrace& o);

}  // namespace sbcm
