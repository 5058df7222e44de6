#pragma once

// Capacities for the noisy-stage model: plain discrete memoryless channels,
// channels with an iid state known causally at the encoder (strategy
// letters), and state known non-causally (auxiliary-variable search).

#include <vector>

#include "sr/pmf.hpp"
#include "sr/search.hpp"

namespace sr {

// State-dependent channel P(B | A, S) with an iid state and a bandwidth
// ratio rho (channel uses per source symbol).
struct StateChannel {
    CondPmf p_b_given_as; // from (A, S) to B
    JointPmf p_s;         // single axis labeled S
    double rho = 1.0;

    StateChannel() = default;
    StateChannel(CondPmf w, JointPmf ps, double rho);

    // plain DMC wrapped as a degenerate single-state channel
    static StateChannel stateless(const CondPmf& p_b_given_a, double rho);

    int a_size() const { return p_b_given_as.from_axes()[0].size; }
    int s_size() const { return p_b_given_as.from_axes()[1].size; }
    int b_size() const { return p_b_given_as.to_axes()[0].size; }
};

// Result of any of the capacity computations. `input` is the achieving
// distribution over the op's input alphabet: channel letters for
// dmc_capacity, strategy letters for causal_state_capacity, U letters for
// gelfand_pinsker_capacity. The remaining maximizer fields are filled only
// by the op they belong to.
struct CapacityResult {
    double capacity = 0.0;
    std::vector<double> input;
    std::vector<std::vector<int>> strategies; // causal: strategies[t][s] = channel input
    CondPmf u_given_s;                        // non-causal searches only
    CondPmf a_given_us;
    int iterations = 0;
    double residual = 0.0; // certified optimality gap (upper bound - reported value)
    std::vector<double> residual_history;
    bool lower_bound_only = false; // true when `capacity` is only a search lower bound
    double upper_bound = 0.0;      // always valid: capacity <= upper_bound
};

// Alternating maximization of I(A;B). The residual is the duality-gap bound
// min over iterations of max_a D(w_a || r) minus the current I; it never
// increases. Throws ConvergenceError if the residual stays above tol.
CapacityResult dmc_capacity(const CondPmf& p_b_given_a, double tol = 1e-9,
                            int max_iter = 20000);

// Encoder sees the state causally: code over strategy letters t: S -> A with
// the induced channel P(b|t) = sum_s P(s) P(b | t(s), s). The strategy
// alphabet |A|^|S| is capped (CapExceededError beyond strategy_cap).
CapacityResult causal_state_capacity(const StateChannel& ch, double tol = 1e-9,
                                     int max_iter = 20000, int strategy_cap = 4096);

// Encoder sees the whole state block ahead of time: maximize
// I(U;B) - I(U;S) over P(U|S) and P(A|U,S) by multi-start annealing.
// The result is a certified lower bound (lower_bound_only = true) with
// upper_bound = min(log2|B|, capacity when the decoder also sees S). When
// u_size admits an embedding of the strategy letters, the causal solution
// seeds one restart, so the result cannot fall below it.
// u_size = 0 picks |A|^|S| capped at 16.
CapacityResult gelfand_pinsker_capacity(const StateChannel& ch, int u_size,
                                        const SearchConfig& cfg);

enum class StateMode { Causal, Noncausal };

struct StagePair {
    CapacityResult c1, c2;
    double rho1 = 1.0, rho2 = 1.0;
};

// Capacities for the two transmission stages, dispatched per mode; the
// (c, rho) pairs feed the source-channel rate budgets.
StagePair stage_capacity_pair(const StateChannel& ch1, const StateChannel& ch2,
                              StateMode mode, const SearchConfig& cfg, double tol = 1e-9,
                              int max_iter = 20000);

} // namespace sr
