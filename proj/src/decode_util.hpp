#pragma once

// Internal helpers for synthesizing and scoring deterministic decode tables.
// A table maps a (side-information symbol, aux tuple) cell to the
// reconstruction minimizing posterior expected distortion.

#include <vector>

#include "sr/distortion.hpp"
#include "sr/pmf.hpp"
#include "sr/source_spec.hpp"

namespace sr::detail {

int argmin_reconstruction(const std::vector<double>& posterior, const DistortionMatrix& d);

// joint axis `x_axis` carries the source symbol; cells are indexed row-major
// by (si_axis, aux_axes...).
std::vector<int> synthesize_table(const JointPmf& joint, const DistortionMatrix& d,
                                  int x_axis, int si_axis, const std::vector<int>& aux_axes);

double table_distortion(const JointPmf& joint, const DistortionMatrix& d, int x_axis,
                        int si_axis, const std::vector<int>& aux_axes,
                        const std::vector<int>& table);

// Search objective shaping: distortion excess above target, each measure
// scaled by its matrix's max entry so the penalty is comparable to rates.
double distortion_excess(const DistortionQuad& achieved, const DistortionQuad& target,
                         const SourceSpec& source);

inline constexpr double kFeasibilityPenalty = 64.0;

// Throws InfeasibleTargetError when the target lies below the floor.
void check_target_feasible(const SourceSpec& source, const DistortionQuad& target, double tol);

} // namespace sr::detail
