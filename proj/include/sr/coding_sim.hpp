#pragma once

// Seeded Monte-Carlo runs of the block-coding constructions behind the
// single-letter bounds: a two-codebook scheme whose decoders consume side
// information causally, and a five-codebook nested-binning scheme for
// decoders holding full side-information blocks. Encoder error events and
// decode failures are data, never exceptions; reports carry per-event
// tallies and empirical distortions.

#include <cstdint>
#include <utility>
#include <vector>

#include "sr/bounds_noncausal.hpp"
#include "sr/rd_causal.hpp"
#include "sr/sampling.hpp"

namespace sr {

struct SimConfig {
    int n = 100;              // blocklength
    double delta = 0.0;       // per-sequence typicality slack; 0 picks 2/sqrt(n)
    double rate_margin = 0.1; // bits/symbol added to every codebook exponent
    int trials = 100;
    std::uint64_t seed = 1;
    // budget on stored symbols (codeword count x blocklength) summed over all
    // materialized codebooks; lazily generated codebooks are exempt
    std::uint64_t codeword_cap = 1ull << 22;
    // how deep the encoder scans a lazily generated codebook before declaring
    // the no-match event
    std::uint64_t scan_cap = 1ull << 16;
    int max_typical_retries = 64; // codeword redraws before keeping the last
    int workers = 1;

    double effective_delta() const;
    // slack for a joint check over m equal-length sequences
    double slack(int m_sequences) const {
        return static_cast<double>(m_sequences) * effective_delta();
    }
};

// ---------- causal scheme ----------

// Codewords are pure functions of (seed, stream, index): nothing is stored,
// so nominal sizes may saturate to 2^64-1 and the encoder simply stops
// scanning at scan_cap.
class CausalCodebooks {
public:
    CausalCodebooks(const SourceSpec& source, const CausalAuxChannel& aux,
                    const SimConfig& cfg);

    std::uint64_t c1_size() const { return c1_size_; }
    std::uint64_t c2_size() const { return c2_size_; } // per stage-1 index
    int n() const { return cfg_.n; }
    int w1_size() const { return w1_size_; }
    int w2_size() const { return w2_size_; }

    Seq c1(std::uint64_t k) const;
    // w1 must be c1(k); callers already hold it, so it is not regenerated
    Seq c2(std::uint64_t k, std::uint64_t j, const Seq& w1) const;

    // laws the encoder checks typicality against
    const JointPmf& px() const { return p_x_; }
    const JointPmf& pxw1() const { return p_xw1_; }
    const JointPmf& pxw1w2() const { return p_xw1w2_; }

private:
    SimConfig cfg_;
    int w1_size_ = 1, w2_size_ = 1;
    std::uint64_t c1_size_ = 0, c2_size_ = 0;
    JointPmf p_x_, p_w1_, p_w1w2_, p_xw1_, p_xw1w2_;
    DiscreteSampler w1_sampler_;
    std::vector<DiscreteSampler> w2_samplers_; // one per w1 symbol
};

enum class CausalEvent { None = 0, SourceAtypical = 1, NoW1Match = 2, NoW2Match = 3 };

struct CausalEncodeResult {
    bool ok = false;
    CausalEvent event = CausalEvent::None;
    std::uint64_t k = 0, j = 0;
    Seq w1, w2; // the chosen codewords, kept so callers avoid regeneration
};

// Two-step first-typical-index scan in ascending codeword order.
CausalEncodeResult encode_causal(const Seq& x, const CausalCodebooks& books,
                                 const SimConfig& cfg);

struct CausalDecodeResult {
    Seq xhat_y1, xhat_z1, xhat_y2, xhat_z2;
};

// Symbol-by-symbol table decoding; output position i reads only the SI
// symbol at i plus the received indices.
CausalDecodeResult decode_causal(std::uint64_t k, std::uint64_t j, const Seq& y, const Seq& z,
                                 const CausalCodebooks& books, const CausalDecoders& dec);

// ---------- shared report ----------

struct DecodeTally {
    std::uint64_t none_typical = 0; // some stage found no typical candidate
    std::uint64_t ambiguous = 0;    // some stage found several
    std::uint64_t mismatch = 0;     // unique recovery that differs from the encoder's pick
};

// Per-trial record. Distortions are per-symbol means when the trial produced
// reconstructions (ok), kInf otherwise. Fail codes: 0 clean, 1 none typical,
// 2 ambiguous, 3 index mismatch; the causal decoders cannot fail, so both
// stay 0 there.
struct TrialRow {
    int event = 0; // encoder event id, 0 = clean
    bool ok = false;
    int y_fail = 0, z_fail = 0;
    DistortionQuad dist;
};

struct SimReport {
    SimConfig config;
    std::uint64_t trials = 0;
    std::uint64_t trials_ok = 0;
    // tally of encoder events, indexed by (event enum value - 1)
    std::vector<std::uint64_t> encoder_events;
    DecodeTally y_side, z_side;
    DistortionQuad empirical;        // mean per-symbol distortion over ok trials
    std::vector<TrialRow> per_trial; // one row per trial, trial order
};

SimReport simulate_causal(const SourceSpec& source, const CausalAuxChannel& aux,
                          const CausalDecoders& dec, const SimConfig& cfg);

// Mutates side-information symbols at positions after a random cut and
// verifies that decoder outputs before the cut are untouched.
struct CausalityAudit {
    std::uint64_t mutations = 0;
    std::uint64_t violations = 0;
};

CausalityAudit audit_causal_decoders(const SourceSpec& source, const CausalAuxChannel& aux,
                                     const CausalDecoders& dec, const SimConfig& cfg,
                                     std::uint64_t mutations);

// ---------- block side-information scheme ----------

// One materialized codebook with a two-level random partition: contiguous
// slices of a seeded permutation form the bins, equal slices of each bin
// form its sub-bins. Trailing bins and sub-bins may be empty or short.
struct BinnedBook {
    int n = 0;
    std::uint64_t count = 0;
    std::uint64_t bins = 1;
    std::uint64_t bin_width = 0; // ceil(count / bins)
    std::uint64_t sub_bins = 1;  // per bin
    std::uint64_t sub_width = 0; // ceil(bin_width / sub_bins)
    std::vector<int> data;            // count x n symbols, row-major
    std::vector<std::uint32_t> perm;  // position -> codeword index
    std::vector<std::uint32_t> pos;   // codeword index -> position

    void load(std::uint64_t idx, Seq& out) const;
    std::uint64_t bin_of(std::uint64_t idx) const;
    std::uint64_t sub_bin_of(std::uint64_t idx) const;
    // permutation positions [first, last) forming a bin or sub-bin
    std::pair<std::uint64_t, std::uint64_t> bin_range(std::uint64_t b) const;
    std::pair<std::uint64_t, std::uint64_t> sub_bin_range(std::uint64_t b,
                                                          std::uint64_t s) const;
    std::uint64_t stored_symbols() const { return count * static_cast<std::uint64_t>(n); }
};

struct NcCodebooks {
    int n = 0;
    int w1_size = 1, w2_size = 1, w3_size = 1, w4_size = 1, v_size = 1;
    std::uint64_t k1 = 0, kv = 0, kw2 = 0, kw3 = 0, kw4 = 0; // codewords per book
    BinnedBook w1;
    std::vector<BinnedBook> v;  // [i]
    std::vector<BinnedBook> w2; // [i*kv + j]
    std::vector<BinnedBook> w3; // [i*kv + j]
    std::vector<BinnedBook> w4; // [((i*kv + j)*kw2 + k)*kw3 + l]

    // laws for the typicality checks, axes ordered as the sequence tuples
    JointPmf p_x, p_xw1, p_xw1v, p_xw1vw2, p_xw1vw3, p_xw1vw2w3, p_xw1vw2w3w4;
    JointPmf p_yw1, p_yw1v, p_yw1vw3;
    JointPmf p_zw1, p_zw1v, p_zw1vw2, p_zw1vw3, p_zw1vw2w3w4;

    std::uint64_t stored_symbols() const;
};

// Draws all five codebook families and their partitions. Throws
// CapExceededError with a per-book size report when the stored-symbol budget
// would be exceeded (checked before anything is allocated).
NcCodebooks gen_nc_codebooks(const SourceSpec& source, const NcAuxChannel& aux,
                             const SimConfig& cfg);

enum class NcEvent {
    None = 0,
    SourceAtypical = 1, // x alone fails
    NoW1 = 2,
    NoV = 3,
    NoW2 = 4,
    NoW3 = 5,
    TupleAtypical = 6, // (x, w1, v, w2, w3) joint check fails
    NoW4 = 7,
};

struct NcIndices {
    std::uint64_t b1 = 0, b2 = 0, b3 = 0; // stage 1: bins of w1, v, w2
    std::uint64_t b4s = 0, b5 = 0, b6 = 0; // stage 2: sub-bin of v, bins of w3, w4
};

struct NcEncodeResult {
    bool ok = false;
    NcEvent event = NcEvent::None;
    std::uint64_t i = 0, j = 0, k = 0, l = 0, m = 0; // chosen codeword indices
    NcIndices sent;
};

NcEncodeResult encode_nc(const Seq& x, const NcCodebooks& books, const SimConfig& cfg);

enum class DecodeStatus { Skipped = 0, Unique, NoneTypical, Ambiguous };

struct Recovered {
    DecodeStatus status = DecodeStatus::Skipped;
    std::uint64_t index = 0; // codeword index, valid when Unique
};

struct NcYDecodeResult {
    Recovered w1;     // stage 1
    Recovered v, w3;  // stage 2
};

// Stage 1 resolves w1 from bin b1. Stage 2 additionally resolves v inside
// sub-bin (b2, b4s) and w3 from bin b5. Later stages are Skipped as soon as
// an earlier one fails.
NcYDecodeResult decode_nc_y(int stage, const NcIndices& idx, const Seq& y,
                            const NcCodebooks& books, const SimConfig& cfg);

struct NcZDecodeResult {
    Recovered w1, v, w2; // stage 1
    Recovered w3, w4;    // stage 2
};

// The Z side searches the full bin b2 for v (never reading b4s) and decodes
// w2 from b3; stage 2 adds w3 from b5 and w4 from b6.
NcZDecodeResult decode_nc_z(int stage, const NcIndices& idx, const Seq& z,
                            const NcCodebooks& books, const SimConfig& cfg);

// A trial counts as ok when the encoder succeeds and every decode stage is
// Unique; mismatches against the encoder's indices are tallied separately.
SimReport simulate_nc(const SourceSpec& source, const NcAuxChannel& aux,
                      const NcDecoders& dec, const SimConfig& cfg);

} // namespace sr
