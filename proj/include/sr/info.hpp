#pragma once

#include <span>
#include <vector>

#include "sr/pmf.hpp"

namespace sr {

// All information quantities are in bits (base-2 logs), with 0*log(0) = 0.

// H of the full joint.
double entropy(const JointPmf& p);

// H of the marginal on the listed axes.
double entropy_of(const JointPmf& p, std::span<const int> axes);

// H(A | B) = H(A,B) - H(B).
double conditional_entropy(const JointPmf& p, std::span<const int> a, std::span<const int> b);

// I(axis0 ; axis1) of a two-axis joint.
double mutual_information(const JointPmf& p);

// I(axis0 ; axis1 | axis2) of a three-axis joint.
double conditional_mutual_information(const JointPmf& p);

// Grouped forms: I(A;B) and I(A;B|C) where A, B, C are disjoint axis-index
// sets of an arbitrary joint. These are what the rate expressions use.
double mi_sets(const JointPmf& p, std::span<const int> a, std::span<const int> b);
double cmi_sets(const JointPmf& p, std::span<const int> a, std::span<const int> b,
                std::span<const int> c);

// True iff axis0 -> axis1 -> axis2 forms a Markov chain, i.e.
// I(axis0; axis2 | axis1) <= tol.
bool is_markov_chain(const JointPmf& p, double tol);

} // namespace sr
