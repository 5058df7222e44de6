#pragma once

// Rate bounds for two-stage refinement when the decoders see their side
// information as a whole block. Requires the side informations to be ordered:
// the stage-structure below is only valid when X -> Z -> Y, i.e. the Y
// decoder's signal is a degraded version of the Z decoder's.
//
// Everything is driven by one auxiliary channel P(W1, W2, W3, W4, V | X):
//   W1  stage-1 description decoded by both receivers
//   W2  stage-1 refinement only the Z receiver resolves
//   W3  stage-2 description for the Y receiver
//   W4  stage-2 refinement for the Z receiver
//   V   bridge description that lets the Z receiver resolve more of stage 1
// Reconstructions: g_y1(Y, W1), g_z1(Z, W1, W2, V),
//                  g_y2(Y, W1, W3, V), g_z2(Z, W1, W2, W3, W4, V).

#include <cstdint>
#include <vector>

#include "sr/pmf.hpp"
#include "sr/rng.hpp"
#include "sr/search.hpp"
#include "sr/source_spec.hpp"

namespace sr {

// residual I(X;Y|Z) above this is treated as a non-degraded instance
inline constexpr double kDegradedTol = 1e-6;

void require_degraded(const SourceSpec& source, double tol = kDegradedTol);

// Auxiliary channel X -> (W1, W2, W3, W4, V). Cardinalities are capped at
// construction by the sizes sufficient for the achievable region:
//   |W1| <= |X|+6,            |V|  <= |X||W1|+5,       |W2| <= |X||W1||V|+4,
//   |W3| <= |X||W1||W2||V|+3, |W4| <= |X||W1||W2||W3||V|+2
struct NcAuxChannel {
    CondPmf cond;

    NcAuxChannel() = default;
    explicit NcAuxChannel(CondPmf c);

    // rows[x] over (w1, w2, w3, w4, v), v fastest
    static NcAuxChannel from_rows(int x_size, int w1_size, int w2_size, int w3_size,
                                  int w4_size, int v_size,
                                  const std::vector<std::vector<double>>& rows);
    static NcAuxChannel trivial(int x_size); // every component a single letter

    int x_size() const { return cond.from_axes()[0].size; }
    int w1_size() const { return cond.to_axes()[0].size; }
    int w2_size() const { return cond.to_axes()[1].size; }
    int w3_size() const { return cond.to_axes()[2].size; }
    int w4_size() const { return cond.to_axes()[3].size; }
    int v_size() const { return cond.to_axes()[4].size; }
};

// P(X, Y, Z, W1, W2, W3, W4, V); throws NonDegradedSourceError unless
// X -> Z -> Y holds within kDegradedTol.
JointPmf nc_joint(const SourceSpec& source, const NcAuxChannel& aux);

struct NcRates {
    double r1 = 0.0; // stage-1 rate
    double r2 = 0.0; // cumulative rate after stage 2
};

// Converse-side evaluation:
//   r1 = I(X;W1|Y) + I(X;W2,V|W1,Z)
//   r2 = I(X;W1,W3,V|Y) + I(X;W2,W4|W1,W3,V,Z)
// The converse needs slightly smaller alphabets (|W1| <= |X|+5 and so on,
// one below the constructor caps); larger aux throws InputError.
NcRates outer_rates(const SourceSpec& source, const NcAuxChannel& aux);

// I(W2;W3 | X,W1,V). The achievable side requires this to vanish: the two
// stage descriptions must be drawn independently given (X, W1, V).
double extra_markov_residual(const SourceSpec& source, const NcAuxChannel& aux);

// Achievable-side evaluation, valid when extra_markov_residual <= markov_tol
// (throws ExtraMarkovViolated otherwise):
//   r1 as in outer_rates
//   r2 = I(X;W1,V,W3|Y) + I(X;W2|W1,V,Z) + I(X;W4|W1,W2,W3,V,Z)
NcRates inner_rates(const SourceSpec& source, const NcAuxChannel& aux,
                    double markov_tol = 1e-9);

// Deterministic reconstruction tables, row-major over the argument tuples
// listed at the top of this header; posterior-optimal, ties to the lowest
// symbol.
struct NcDecoders {
    std::vector<int> g_y1; // [y][w1]
    std::vector<int> g_z1; // [z][w1][w2][v]
    std::vector<int> g_y2; // [y][w1][w3][v]
    std::vector<int> g_z2; // [z][w1][w2][w3][w4][v]
};

NcDecoders nc_optimal_decoders(const SourceSpec& source, const NcAuxChannel& aux);
DistortionQuad nc_distortions(const SourceSpec& source, const NcAuxChannel& aux,
                              const NcDecoders& decoders);

// Factored aux laws satisfying the independence the achievable side needs:
// P(w1,v|x) * P(w2|x,w1,v) * P(w3|x,w1,v) * P(w4|x,w1,v,w2,w3).
struct InnerFamilyFactors {
    int w1_size = 1, w2_size = 1, w3_size = 1, w4_size = 1, v_size = 1;
    std::vector<std::vector<double>> p_w1v; // [x][(w1,v)], v fastest
    std::vector<std::vector<double>> p_w2;  // [((x,w1),v)][w2]
    std::vector<std::vector<double>> p_w3;  // [((x,w1),v)][w3]
    std::vector<std::vector<double>> p_w4;  // [((((x,w1),v),w2),w3)][w4]
};

NcAuxChannel assemble_inner_family(int x_size, const InnerFamilyFactors& f);
InnerFamilyFactors random_inner_family(int x_size, int w1_size, int w2_size, int w3_size,
                                       int w4_size, int v_size, Rng& rng);

// Reduced families used by the closed-form corner cases. Each returns the
// full five-component aux with the remaining coordinates pinned:
//   z1_slack:     W2, V single letters          rows[x] over (w1, w3, w4)
//   y2_static:    W3, V single letters          rows[x] over (w1, w2, w4)
//   lossless_z1:  W2 = X, V = W3, W4 trivial    rows[x] over (w1, w3)
//   lossless_y2:  W3 = X, V = W2, W4 trivial    rows[x] over (w1, w2)
// (last searched coordinate fastest within a row)
NcAuxChannel assemble_z1_slack(int x_size, int w1_size, int w3_size, int w4_size,
                               const std::vector<std::vector<double>>& rows);
NcAuxChannel assemble_y2_static(int x_size, int w1_size, int w2_size, int w4_size,
                                const std::vector<std::vector<double>>& rows);
NcAuxChannel assemble_lossless_z1(int x_size, int w1_size, int w3_size,
                                  const std::vector<std::vector<double>>& rows);
NcAuxChannel assemble_lossless_y2(int x_size, int w1_size, int w2_size,
                                  const std::vector<std::vector<double>>& rows);

struct NcRegionPoint {
    double r1 = 0.0, r2 = 0.0;
    DistortionQuad achieved;
    NcAuxChannel aux;
    NcDecoders decoders;
};

// inner_rates + optimal decoders + achieved distortions in one step
NcRegionPoint evaluate_inner(const SourceSpec& source, const NcAuxChannel& aux,
                             double markov_tol = 1e-9);

// Where the region collapses to two closed-form stage structures:
//   Z1Slack:  stage-1 Z requirement no tighter than Y's (dz1 >= dy1);
//             stage 1 carries W1 only, stage 2 adds (W3, W4)
//   Y2Static: the Y decoder gains nothing in stage 2 (dy2 == dy1);
//             stage 2 serves only the Z decoder via W4
// Targets satisfying both classify as Z1Slack; neither is an InputError.
enum class SrCaseKind { Z1Slack, Y2Static };

SrCaseKind classify_sr_case(const DistortionQuad& target);

// Frontier search restricted to the classified family. Same conventions as
// min_rates_causal: non-dominated feasible (r1, r2) points sorted by r1,
// InfeasibleTargetError when the target is below the floor or nothing is
// found.
std::vector<NcRegionPoint> sr_special_case(const SourceSpec& source,
                                           const DistortionQuad& target,
                                           const SearchConfig& cfg);

// Which requirement is exact recovery: stage-1 Z (dz1 = 0) or stage-2 Y
// (dy2 = 0).
enum class LosslessStage { Z1, Y2 };

std::vector<NcRegionPoint> lossless_special_case(const SourceSpec& source, LosslessStage stage,
                                                 const DistortionQuad& target,
                                                 const SearchConfig& cfg);

// Randomized consistency sweep: sampled factored aux laws evaluated through
// both bounds. The achievable side must never fall below the converse at the
// same aux: r1 agrees exactly and inner r2 >= outer r2.
struct ConsistencyReport {
    int samples = 0;
    int r1_mismatches = 0;        // |inner.r1 - outer.r1| > tol
    int dominance_violations = 0; // inner.r2 < outer.r2 - tol
    double max_r1_gap = 0.0;
    double min_r2_slack = 0.0;    // min over samples of inner.r2 - outer.r2
    double max_markov_residual = 0.0;
};

ConsistencyReport verify_inner_subset_outer(const SourceSpec& source, int samples,
                                            std::uint64_t seed, double tol = 1e-9);

} // namespace sr
