#pragma once

#include <cstdint>
#include <vector>

#include "sr/distortion.hpp"
#include "sr/search.hpp"
#include "sr/source_spec.hpp"

namespace sr {

// Two-stage description with causal side information. The auxiliary pair
// (W1, W2) is parameterized as a single channel P(W1, W2 | X), so the chain
// (W1, W2) -> X -> (Y, Z) holds by construction. Decoders act symbol by
// symbol: stage 1 maps (side info, W1), stage 2 maps (side info, W1, W2).

struct CausalAuxChannel {
    CondPmf cond; // from (X) to (W1, W2)

    CausalAuxChannel() = default;
    explicit CausalAuxChannel(CondPmf c);

    int x_size() const { return cond.from_axes()[0].size; }
    int w1_size() const { return cond.to_axes()[0].size; }
    int w2_size() const { return cond.to_axes()[1].size; }

    // P(w1, w2 | x) from a row-per-x table with w2 varying fastest.
    static CausalAuxChannel from_rows(int x_size, int w1_size, int w2_size,
                                      const std::vector<std::vector<double>>& rows);
    // W1 = X, W2 degenerate: the perfect-description corner.
    static CausalAuxChannel copy(int x_size);
};

// Deterministic decode tables, row-major over their arguments; entries are
// reconstruction symbols.
struct CausalDecoders {
    std::vector<int> g_y1; // [y][w1]
    std::vector<int> g_z1; // [z][w1]
    std::vector<int> g_y2; // [y][w1][w2]
    std::vector<int> g_z2; // [z][w1][w2]
};

struct CausalRegionPoint {
    double r1 = 0.0;      // stage-1 rate I(X; W1)
    double delta_r = 0.0; // incremental rate I(X; W2 | W1)
    DistortionQuad achieved;
    CausalAuxChannel aux;
    CausalDecoders decoders;
};

// P(X, Y, Z, W1, W2), axes in that order.
JointPmf causal_joint(const SourceSpec& source, const CausalAuxChannel& aux);

// For each decoder, the reconstruction minimizing posterior expected
// distortion per argument tuple; ties break to the lowest symbol.
CausalDecoders optimal_causal_decoders(const SourceSpec& source, const CausalAuxChannel& aux);

CausalRegionPoint evaluate_causal(const SourceSpec& source, const CausalAuxChannel& aux,
                                  const CausalDecoders& decoders);

// Randomized multi-start search for the (r1, delta_r) trade-off under the
// target. Returns a non-dominated frontier of feasible points, sorted by r1.
// Throws InfeasibleTargetError when even a perfect description fails.
std::vector<CausalRegionPoint> min_rates_causal(const SourceSpec& source,
                                                const DistortionQuad& target,
                                                const SearchConfig& cfg);

struct GridSpec {
    int steps = 10;                      // simplex resolution: masses are multiples of 1/steps
    std::size_t max_points = 2'000'000;  // enumeration gate
};

// Exhaustive scan of aux channels on a simplex grid with exact decoder
// synthesis; returns every feasible grid point. Superset-of-optimum up to
// grid resolution; meant as an oracle at tiny sizes.
std::vector<CausalRegionPoint> brute_force_causal(const SourceSpec& source,
                                                  const DistortionQuad& target,
                                                  int w1_size, int w2_size,
                                                  const GridSpec& grid);

struct SeparationResult {
    bool achievable = false;
    double rate1_budget = 0.0; // rho1 * c1
    double rate2_budget = 0.0; // rho2 * c2
    CausalRegionPoint witness; // meaningful when achievable
};

// Joint source-channel feasibility: is there an aux meeting the distortion
// target with I(X;W1) <= rho1*c1 and I(X;W2|W1) <= rho2*c2? `false` means no
// witness was found within the search budget.
SeparationResult separation_check(const SourceSpec& source, const DistortionQuad& target,
                                  double rho1, double rho2, double c1, double c2,
                                  const SearchConfig& cfg);

} // namespace sr
