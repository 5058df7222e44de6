#pragma once

#include <cstdint>
#include <vector>

#include "sr/pmf.hpp"
#include "sr/rng.hpp"

namespace sr {

using Seq = std::vector<int>;

// n i.i.d. draws from a joint pmf; returns one symbol sequence per axis.
// Deterministic in (p, n, seed).
std::vector<Seq> sample_iid(const JointPmf& p, int n, std::uint64_t seed);

// Precomputed inverse-cdf sampler for repeated draws from a fixed pmf row.
class DiscreteSampler {
public:
    DiscreteSampler() = default;
    explicit DiscreteSampler(const std::vector<double>& pmf);
    int operator()(Rng& rng) const;

private:
    std::vector<double> cdf_;
};

// Empirical joint type of equal-length sequences, flat row-major over the
// given alphabet sizes (first sequence slowest).
std::vector<double> joint_type(const std::vector<const Seq*>& seqs,
                               const std::vector<int>& sizes);

// Strong (per-cell) typicality: every cell of the empirical joint type is
// within delta of p, and cells where p vanishes are unoccupied. All
// sequences must have the same length and match p's axes in order.
bool is_jointly_typical(const std::vector<const Seq*>& seqs, const JointPmf& p, double delta);

} // namespace sr
