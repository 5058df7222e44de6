#include "sr/coding_sim.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <string>

#include "sr/errors.hpp"
#include "sr/info.hpp"
#include "sr/search.hpp"

namespace sr {

namespace {

// causal_joint axes
constexpr int kcX = 0, kcW1 = 3, kcW2 = 4;
// nc_joint axes
constexpr int kX = 0, kY = 1, kZ = 2, kW1 = 3, kW2 = 4, kW3 = 5, kW4 = 6, kV = 7;

constexpr std::uint64_t kTagTrial = 0x721A15ULL;
constexpr std::uint64_t kTagC1 = 0xCB001ULL;
constexpr std::uint64_t kTagC2 = 0xCB002ULL;
constexpr std::uint64_t kTagNcWord = 0x6CB00ULL; // + level 1..5
constexpr std::uint64_t kTagNcBins = 0xB170ULL;  // + level 1..5
constexpr std::uint64_t kTagAudit = 0xA0D17ULL;

constexpr std::uint64_t kSaturated = ~0ull;

void check_config(const SimConfig& cfg) {
    if (cfg.n < 1) throw InputError("SimConfig: n must be >= 1");
    if (cfg.delta < 0.0) throw InputError("SimConfig: delta must be >= 0 (0 picks 2/sqrt(n))");
    if (!(cfg.rate_margin > 0.0)) throw InputError("SimConfig: rate_margin must be positive");
    if (cfg.trials < 1) throw InputError("SimConfig: trials must be >= 1");
    if (cfg.scan_cap < 1) throw InputError("SimConfig: scan_cap must be >= 1");
    if (cfg.max_typical_retries < 0) throw InputError("SimConfig: max_typical_retries must be >= 0");
    if (cfg.workers < 1) throw InputError("SimConfig: workers must be >= 1");
}

// ceil(2^{n(rate + margin)}), saturating well before the multiply-by-n
// symbol accounting can overflow.
std::uint64_t nominal_size(double rate, int n, double margin) {
    const double bits = static_cast<double>(n) * (std::max(rate, 0.0) + margin);
    if (bits >= 63.0) return kSaturated;
    return static_cast<std::uint64_t>(std::ceil(std::exp2(bits)));
}

bool typical(const std::vector<const Seq*>& seqs, const JointPmf& p, const SimConfig& cfg) {
    return is_jointly_typical(seqs, p, cfg.slack(static_cast<int>(seqs.size())));
}

double mean_symbol_distortion(const Seq& x, const Seq& xhat, const DistortionMatrix& d) {
    double s = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) s += d(x[i], xhat[i]);
    return s / static_cast<double>(x.size());
}

std::vector<DiscreteSampler> row_samplers(const CondPmf& cond) {
    const std::size_t fcells = cond.from_cells();
    const std::size_t tcells = cond.to_cells();
    const std::vector<double>& rows = cond.rows();
    std::vector<DiscreteSampler> out;
    out.reserve(fcells);
    for (std::size_t f = 0; f < fcells; ++f) {
        std::vector<double> row(rows.begin() + static_cast<std::ptrdiff_t>(f * tcells),
                                rows.begin() + static_cast<std::ptrdiff_t>((f + 1) * tcells));
        out.emplace_back(row);
    }
    return out;
}

} // namespace

double SimConfig::effective_delta() const {
    return delta > 0.0 ? delta : 2.0 / std::sqrt(static_cast<double>(n));
}

// ---------- causal scheme ----------

CausalCodebooks::CausalCodebooks(const SourceSpec& source, const CausalAuxChannel& aux,
                                 const SimConfig& cfg)
    : cfg_(cfg), w1_size_(aux.w1_size()), w2_size_(aux.w2_size()) {
    check_config(cfg);
    if (aux.x_size() != source.x_size())
        throw InputError("CausalCodebooks: aux alphabet does not match the source");

    const JointPmf joint = causal_joint(source, aux);
    const int ax_x[] = {kcX};
    const int ax_w1[] = {kcW1};
    const int ax_w2[] = {kcW2};
    const int ax_w1w2[] = {kcW1, kcW2};
    const int ax_xw1[] = {kcX, kcW1};
    const int ax_xw1w2[] = {kcX, kcW1, kcW2};
    p_x_ = joint.marginal(ax_x);
    p_w1_ = joint.marginal(ax_w1);
    p_w1w2_ = joint.marginal(ax_w1w2);
    p_xw1_ = joint.marginal(ax_xw1);
    p_xw1w2_ = joint.marginal(ax_xw1w2);

    c1_size_ = nominal_size(mi_sets(joint, ax_x, ax_w1), cfg.n, cfg.rate_margin);
    c2_size_ = nominal_size(cmi_sets(joint, ax_x, ax_w2, ax_w1), cfg.n, cfg.rate_margin);

    w1_sampler_ = DiscreteSampler(p_w1_.mass());
    w2_samplers_ = row_samplers(condition(joint, ax_w1, ax_w2));
}

Seq CausalCodebooks::c1(std::uint64_t k) const {
    if (k >= c1_size_) throw InputError("CausalCodebooks::c1: index out of range");
    Rng rng(derive_seed(cfg_.seed, kTagC1, k));
    Seq w1(static_cast<std::size_t>(cfg_.n));
    for (int attempt = 0;; ++attempt) {
        for (int i = 0; i < cfg_.n; ++i) w1[static_cast<std::size_t>(i)] = w1_sampler_(rng);
        if (attempt >= cfg_.max_typical_retries) break;
        if (typical({&w1}, p_w1_, cfg_)) break;
    }
    return w1;
}

Seq CausalCodebooks::c2(std::uint64_t k, std::uint64_t j, const Seq& w1) const {
    if (k >= c1_size_) throw InputError("CausalCodebooks::c2: stage-1 index out of range");
    if (j >= c2_size_) throw InputError("CausalCodebooks::c2: stage-2 index out of range");
    if (w1.size() != static_cast<std::size_t>(cfg_.n))
        throw InputError("CausalCodebooks::c2: w1 length mismatch");
    Rng rng(derive_seed(cfg_.seed, kTagC2, k, j));
    Seq w2(static_cast<std::size_t>(cfg_.n));
    for (int attempt = 0;; ++attempt) {
        for (int i = 0; i < cfg_.n; ++i) {
            const std::size_t ui = static_cast<std::size_t>(i);
            w2[ui] = w2_samplers_[static_cast<std::size_t>(w1[ui])](rng);
        }
        if (attempt >= cfg_.max_typical_retries) break;
        if (typical({&w1, &w2}, p_w1w2_, cfg_)) break;
    }
    return w2;
}

CausalEncodeResult encode_causal(const Seq& x, const CausalCodebooks& books,
                                 const SimConfig& cfg) {
    if (x.size() != static_cast<std::size_t>(books.n()))
        throw InputError("encode_causal: x length mismatch");
    CausalEncodeResult res;
    if (!typical({&x}, books.px(), cfg)) {
        res.event = CausalEvent::SourceAtypical;
        return res;
    }

    const std::uint64_t kmax = std::min(books.c1_size(), cfg.scan_cap);
    bool found = false;
    Seq w1;
    for (std::uint64_t k = 0; k < kmax; ++k) {
        w1 = books.c1(k);
        if (typical({&x, &w1}, books.pxw1(), cfg)) {
            res.k = k;
            found = true;
            break;
        }
    }
    if (!found) {
        res.event = CausalEvent::NoW1Match;
        return res;
    }

    const std::uint64_t jmax = std::min(books.c2_size(), cfg.scan_cap);
    found = false;
    Seq w2;
    for (std::uint64_t j = 0; j < jmax; ++j) {
        w2 = books.c2(res.k, j, w1);
        if (typical({&x, &w1, &w2}, books.pxw1w2(), cfg)) {
            res.j = j;
            found = true;
            break;
        }
    }
    if (!found) {
        res.event = CausalEvent::NoW2Match;
        return res;
    }

    res.ok = true;
    res.w1 = std::move(w1);
    res.w2 = std::move(w2);
    return res;
}

CausalDecodeResult decode_causal(std::uint64_t k, std::uint64_t j, const Seq& y, const Seq& z,
                                 const CausalCodebooks& books, const CausalDecoders& dec) {
    const std::size_t n = static_cast<std::size_t>(books.n());
    if (y.size() != n || z.size() != n)
        throw InputError("decode_causal: side-information length mismatch");
    const Seq w1 = books.c1(k);
    const Seq w2 = books.c2(k, j, w1);
    const int n1 = books.w1_size();
    const int n2 = books.w2_size();

    CausalDecodeResult out;
    out.xhat_y1.resize(n);
    out.xhat_z1.resize(n);
    out.xhat_y2.resize(n);
    out.xhat_z2.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        const int a = w1[i], b = w2[i];
        out.xhat_y1[i] = dec.g_y1[static_cast<std::size_t>(y[i] * n1 + a)];
        out.xhat_z1[i] = dec.g_z1[static_cast<std::size_t>(z[i] * n1 + a)];
        out.xhat_y2[i] = dec.g_y2[static_cast<std::size_t>((y[i] * n1 + a) * n2 + b)];
        out.xhat_z2[i] = dec.g_z2[static_cast<std::size_t>((z[i] * n1 + a) * n2 + b)];
    }
    return out;
}

SimReport simulate_causal(const SourceSpec& source, const CausalAuxChannel& aux,
                          const CausalDecoders& dec, const SimConfig& cfg) {
    check_config(cfg);
    const CausalCodebooks books(source, aux, cfg);

    struct TrialOut {
        int event = 0;
        bool ok = false;
        double dy1 = 0.0, dz1 = 0.0, dy2 = 0.0, dz2 = 0.0;
    };
    std::vector<TrialOut> slots(static_cast<std::size_t>(cfg.trials));

    parallel_indexed(cfg.trials, cfg.workers, [&](int t) {
        const auto seqs = sample_iid(source.pxyz, cfg.n,
                                     derive_seed(cfg.seed, kTagTrial, static_cast<std::uint64_t>(t)));
        const Seq& x = seqs[0];
        const Seq& y = seqs[1];
        const Seq& z = seqs[2];
        TrialOut& slot = slots[static_cast<std::size_t>(t)];
        const CausalEncodeResult enc = encode_causal(x, books, cfg);
        slot.event = static_cast<int>(enc.event);
        if (!enc.ok) return;
        const CausalDecodeResult d = decode_causal(enc.k, enc.j, y, z, books, dec);
        slot.ok = true;
        slot.dy1 = mean_symbol_distortion(x, d.xhat_y1, source.d_y1);
        slot.dz1 = mean_symbol_distortion(x, d.xhat_z1, source.d_z1);
        slot.dy2 = mean_symbol_distortion(x, d.xhat_y2, source.d_y2);
        slot.dz2 = mean_symbol_distortion(x, d.xhat_z2, source.d_z2);
    });

    SimReport rep;
    rep.config = cfg;
    rep.trials = static_cast<std::uint64_t>(cfg.trials);
    rep.encoder_events.assign(3, 0);
    rep.per_trial.reserve(slots.size());
    double sy1 = 0.0, sz1 = 0.0, sy2 = 0.0, sz2 = 0.0;
    for (const TrialOut& s : slots) {
        TrialRow row;
        row.event = s.event;
        row.ok = s.ok;
        if (s.ok) row.dist = {s.dy1, s.dz1, s.dy2, s.dz2};
        rep.per_trial.push_back(row);
        if (s.event > 0) ++rep.encoder_events[static_cast<std::size_t>(s.event - 1)];
        if (!s.ok) continue;
        ++rep.trials_ok;
        sy1 += s.dy1;
        sz1 += s.dz1;
        sy2 += s.dy2;
        sz2 += s.dz2;
    }
    if (rep.trials_ok > 0) {
        const double inv = 1.0 / static_cast<double>(rep.trials_ok);
        rep.empirical = {sy1 * inv, sz1 * inv, sy2 * inv, sz2 * inv};
    }
    return rep;
}

CausalityAudit audit_causal_decoders(const SourceSpec& source, const CausalAuxChannel& aux,
                                     const CausalDecoders& dec, const SimConfig& cfg,
                                     std::uint64_t mutations) {
    check_config(cfg);
    const CausalCodebooks books(source, aux, cfg);
    Rng rng(derive_seed(cfg.seed, kTagAudit));

    const std::uint64_t kmax = std::min(books.c1_size(), cfg.scan_cap);
    const std::uint64_t jmax = std::min(books.c2_size(), cfg.scan_cap);
    const int ys = source.y_size();
    const int zs = source.z_size();

    CausalityAudit rep;
    if (cfg.n < 2 || (ys < 2 && zs < 2)) return rep; // nothing mutable before an output

    Seq y, z;
    std::uint64_t k = 0, j = 0;
    CausalDecodeResult base;
    int age = 1 << 20; // force a fresh instance on the first pass

    for (std::uint64_t m = 0; m < mutations; ++m) {
        if (age >= 128) {
            const auto seqs = sample_iid(source.pxyz, cfg.n, rng());
            y = seqs[1];
            z = seqs[2];
            k = rng() % kmax;
            j = rng() % jmax;
            base = decode_causal(k, j, y, z, books, dec);
            age = 0;
        }
        ++age;

        // flip the SI at position q; outputs before q must not move
        const int q = 1 + static_cast<int>(rng() % static_cast<std::uint64_t>(cfg.n - 1));
        Seq ym = y, zm = z;
        const std::size_t uq = static_cast<std::size_t>(q);
        if (ys > 1)
            ym[uq] = (ym[uq] + 1 + static_cast<int>(rng() % static_cast<std::uint64_t>(ys - 1))) % ys;
        if (zs > 1)
            zm[uq] = (zm[uq] + 1 + static_cast<int>(rng() % static_cast<std::uint64_t>(zs - 1))) % zs;
        const CausalDecodeResult mut = decode_causal(k, j, ym, zm, books, dec);

        ++rep.mutations;
        for (int i = 0; i < q; ++i) {
            const std::size_t ui = static_cast<std::size_t>(i);
            if (mut.xhat_y1[ui] != base.xhat_y1[ui] || mut.xhat_z1[ui] != base.xhat_z1[ui] ||
                mut.xhat_y2[ui] != base.xhat_y2[ui] || mut.xhat_z2[ui] != base.xhat_z2[ui]) {
                ++rep.violations;
                break;
            }
        }
    }
    return rep;
}

// ---------- block side-information scheme ----------

void BinnedBook::load(std::uint64_t idx, Seq& out) const {
    const std::size_t un = static_cast<std::size_t>(n);
    const std::size_t base = static_cast<std::size_t>(idx) * un;
    out.assign(data.begin() + static_cast<std::ptrdiff_t>(base),
               data.begin() + static_cast<std::ptrdiff_t>(base + un));
}

std::uint64_t BinnedBook::bin_of(std::uint64_t idx) const {
    return pos[static_cast<std::size_t>(idx)] / bin_width;
}

std::uint64_t BinnedBook::sub_bin_of(std::uint64_t idx) const {
    return (pos[static_cast<std::size_t>(idx)] % bin_width) / sub_width;
}

std::pair<std::uint64_t, std::uint64_t> BinnedBook::bin_range(std::uint64_t b) const {
    if (b >= bins) throw InputError("BinnedBook::bin_range: bin index out of range");
    // width >= 2 forces bins < count, so b * bin_width stays far below 2^64
    const std::uint64_t first = b * bin_width;
    return {std::min(first, count), std::min(first + bin_width, count)};
}

std::pair<std::uint64_t, std::uint64_t> BinnedBook::sub_bin_range(std::uint64_t b,
                                                                  std::uint64_t s) const {
    if (s >= sub_bins) throw InputError("BinnedBook::sub_bin_range: sub-bin index out of range");
    const auto [first, last] = bin_range(b);
    const std::uint64_t sf = first + s * sub_width;
    return {std::min(sf, last), std::min(sf + sub_width, last)};
}

std::uint64_t NcCodebooks::stored_symbols() const {
    std::uint64_t total = w1.stored_symbols();
    for (const BinnedBook& b : v) total += b.stored_symbols();
    for (const BinnedBook& b : w2) total += b.stored_symbols();
    for (const BinnedBook& b : w3) total += b.stored_symbols();
    for (const BinnedBook& b : w4) total += b.stored_symbols();
    return total;
}

namespace {

std::uint64_t sat_mul(std::uint64_t a, std::uint64_t b) {
    if (a != 0 && b > kSaturated / a) return kSaturated;
    return a * b;
}

std::uint64_t sat_add(std::uint64_t a, std::uint64_t b) {
    return a > kSaturated - b ? kSaturated : a + b;
}

std::string count_desc(std::uint64_t c, double rate, int n, double margin) {
    if (c != kSaturated) return std::to_string(c);
    std::ostringstream os;
    os << "~2^" << static_cast<long long>(
                       std::ceil(static_cast<double>(n) * (std::max(rate, 0.0) + margin)));
    return os.str();
}

// ceil(count / parts) without overflow
std::uint64_t part_width(std::uint64_t count, std::uint64_t parts) {
    return count / parts + (count % parts != 0 ? 1 : 0);
}

void partition_book(BinnedBook& book, std::uint64_t seed) {
    book.bin_width = part_width(book.count, book.bins);
    book.sub_width = part_width(book.bin_width, book.sub_bins);
    const std::size_t c = static_cast<std::size_t>(book.count);
    book.perm.resize(c);
    std::iota(book.perm.begin(), book.perm.end(), 0u);
    Rng rng(seed);
    for (std::size_t i = 0; i + 1 < c; ++i) {
        const std::size_t r = i + static_cast<std::size_t>(rng() % (book.count - i));
        std::swap(book.perm[i], book.perm[r]);
    }
    book.pos.resize(c);
    for (std::size_t i = 0; i < c; ++i) book.pos[book.perm[i]] = static_cast<std::uint32_t>(i);
}

// Draws `book.count` codewords; symbol i comes from samplers[row_of(i)].
// Atypical draws (jointly with the fixed parent sequences) are redrawn a
// bounded number of times, keeping the final attempt.
template <class RowOf>
void fill_book(BinnedBook& book, const SimConfig& cfg, std::uint64_t level,
               std::uint64_t book_id, const std::vector<DiscreteSampler>& samplers,
               RowOf row_of, std::vector<const Seq*> tuple, const JointPmf& law) {
    const int n = book.n;
    Seq cand(static_cast<std::size_t>(n));
    tuple.push_back(&cand);
    book.data.resize(static_cast<std::size_t>(book.count) * static_cast<std::size_t>(n));
    for (std::uint64_t c = 0; c < book.count; ++c) {
        Rng rng(derive_seed(cfg.seed, kTagNcWord + level, book_id, c));
        for (int attempt = 0;; ++attempt) {
            for (int i = 0; i < n; ++i)
                cand[static_cast<std::size_t>(i)] = samplers[row_of(i)](rng);
            if (attempt >= cfg.max_typical_retries) break;
            if (is_jointly_typical(tuple, law, cfg.slack(static_cast<int>(tuple.size())))) break;
        }
        std::copy(cand.begin(), cand.end(),
                  book.data.begin() + static_cast<std::ptrdiff_t>(c * static_cast<std::uint64_t>(n)));
    }
}

} // namespace

NcCodebooks gen_nc_codebooks(const SourceSpec& source, const NcAuxChannel& aux,
                             const SimConfig& cfg) {
    check_config(cfg);
    if (aux.x_size() != source.x_size())
        throw InputError("gen_nc_codebooks: aux alphabet does not match the source");

    const JointPmf joint = nc_joint(source, aux);
    const int ax_x[] = {kX};
    const int ax_w1[] = {kW1};
    const int ax_v[] = {kV};
    const int ax_w2[] = {kW2};
    const int ax_w3[] = {kW3};
    const int ax_w4[] = {kW4};
    const int ax_y[] = {kY};
    const int ax_z[] = {kZ};
    const int ax_w1v[] = {kW1, kV};
    const int ax_w1vw2[] = {kW1, kV, kW2};
    const int ax_w1vw3[] = {kW1, kV, kW3};
    const int ax_w1vw2w3[] = {kW1, kV, kW2, kW3};
    const int ax_w1vw2w3w4[] = {kW1, kV, kW2, kW3, kW4};

    // codeword exponents use the margin once; bin exponents use it twice so
    // bins strictly outnumber the codewords' excess over the conditional rate
    const double m1 = cfg.rate_margin;
    const double m2 = 2.0 * cfg.rate_margin;
    const int n = cfg.n;

    const int ax_w1z[] = {kW1, kZ};
    const int ax_w1vz[] = {kW1, kV, kZ};
    const int ax_w1vy[] = {kW1, kV, kY};
    const int ax_w1vw2w3z[] = {kW1, kV, kW2, kW3, kZ};

    const double r_w1 = mi_sets(joint, ax_x, ax_w1);
    const double b_w1 = cmi_sets(joint, ax_x, ax_w1, ax_y);
    const double r_v = cmi_sets(joint, ax_x, ax_v, ax_w1);
    const double b_v = cmi_sets(joint, ax_x, ax_v, ax_w1z);
    const double s_v = cmi_sets(joint, ax_z, ax_v, ax_w1) - cmi_sets(joint, ax_y, ax_v, ax_w1);
    const double r_w2 = cmi_sets(joint, ax_x, ax_w2, ax_w1v);
    const double b_w2 = cmi_sets(joint, ax_x, ax_w2, ax_w1vz);
    const double r_w3 = cmi_sets(joint, ax_x, ax_w3, ax_w1v);
    const double b_w3 = cmi_sets(joint, ax_x, ax_w3, ax_w1vy);
    const double r_w4 = cmi_sets(joint, ax_x, ax_w4, ax_w1vw2w3);
    const double b_w4 = cmi_sets(joint, ax_x, ax_w4, ax_w1vw2w3z);

    NcCodebooks books;
    books.n = n;
    books.w1_size = aux.w1_size();
    books.w2_size = aux.w2_size();
    books.w3_size = aux.w3_size();
    books.w4_size = aux.w4_size();
    books.v_size = aux.v_size();
    books.k1 = nominal_size(r_w1, n, m1);
    books.kv = nominal_size(r_v, n, m1);
    books.kw2 = nominal_size(r_w2, n, m1);
    books.kw3 = nominal_size(r_w3, n, m1);
    books.kw4 = nominal_size(r_w4, n, m1);

    const std::uint64_t n_v_books = books.k1;
    const std::uint64_t n_w2_books = sat_mul(books.k1, books.kv);
    const std::uint64_t n_w4_books = sat_mul(sat_mul(n_w2_books, books.kw2), books.kw3);
    std::uint64_t words = books.k1;
    words = sat_add(words, sat_mul(n_v_books, books.kv));
    words = sat_add(words, sat_mul(n_w2_books, books.kw2));
    words = sat_add(words, sat_mul(n_w2_books, books.kw3));
    words = sat_add(words, sat_mul(n_w4_books, books.kw4));
    const std::uint64_t symbols = sat_mul(words, static_cast<std::uint64_t>(n));
    if (symbols > cfg.codeword_cap) {
        std::ostringstream os;
        os << "block codebooks need ";
        if (symbols == kSaturated)
            os << "more than 2^63";
        else
            os << symbols;
        os << " stored symbols, over the cap of " << cfg.codeword_cap << ":\n"
           << "  c_w1: " << count_desc(books.k1, r_w1, n, m1) << " codewords\n"
           << "  c_v:  " << count_desc(n_v_books, r_w1, n, m1) << " books x "
           << count_desc(books.kv, r_v, n, m1) << "\n"
           << "  c_w2: " << count_desc(n_w2_books, r_w1 + r_v, n, 2 * m1) << " books x "
           << count_desc(books.kw2, r_w2, n, m1) << "\n"
           << "  c_w3: " << count_desc(n_w2_books, r_w1 + r_v, n, 2 * m1) << " books x "
           << count_desc(books.kw3, r_w3, n, m1) << "\n"
           << "  c_w4: " << count_desc(n_w4_books, r_w1 + r_v + r_w2 + r_w3, n, 4 * m1)
           << " books x " << count_desc(books.kw4, r_w4, n, m1);
        throw CapExceededError(os.str());
    }

    books.p_x = joint.marginal(ax_x);
    {
        const int a[] = {kX, kW1};
        books.p_xw1 = joint.marginal(a);
    }
    {
        const int a[] = {kX, kW1, kV};
        books.p_xw1v = joint.marginal(a);
    }
    {
        const int a[] = {kX, kW1, kV, kW2};
        books.p_xw1vw2 = joint.marginal(a);
    }
    {
        const int a[] = {kX, kW1, kV, kW3};
        books.p_xw1vw3 = joint.marginal(a);
    }
    {
        const int a[] = {kX, kW1, kV, kW2, kW3};
        books.p_xw1vw2w3 = joint.marginal(a);
    }
    {
        const int a[] = {kX, kW1, kV, kW2, kW3, kW4};
        books.p_xw1vw2w3w4 = joint.marginal(a);
    }
    {
        const int a[] = {kY, kW1};
        books.p_yw1 = joint.marginal(a);
    }
    {
        const int a[] = {kY, kW1, kV};
        books.p_yw1v = joint.marginal(a);
    }
    {
        const int a[] = {kY, kW1, kV, kW3};
        books.p_yw1vw3 = joint.marginal(a);
    }
    {
        const int a[] = {kZ, kW1};
        books.p_zw1 = joint.marginal(a);
    }
    {
        const int a[] = {kZ, kW1, kV};
        books.p_zw1v = joint.marginal(a);
    }
    {
        const int a[] = {kZ, kW1, kV, kW2};
        books.p_zw1vw2 = joint.marginal(a);
    }
    {
        const int a[] = {kZ, kW1, kV, kW3};
        books.p_zw1vw3 = joint.marginal(a);
    }
    {
        const int a[] = {kZ, kW1, kV, kW2, kW3, kW4};
        books.p_zw1vw2w3w4 = joint.marginal(a);
    }

    const JointPmf p_w1 = joint.marginal(ax_w1);
    const JointPmf p_w1v = joint.marginal(ax_w1v);
    const JointPmf p_w1vw2 = joint.marginal(ax_w1vw2);
    const JointPmf p_w1vw3 = joint.marginal(ax_w1vw3);
    const JointPmf p_w1vw2w3w4 = joint.marginal(ax_w1vw2w3w4);

    const std::vector<DiscreteSampler> s_w1{DiscreteSampler(p_w1.mass())};
    const std::vector<DiscreteSampler> s_v_rows = row_samplers(condition(joint, ax_w1, ax_v));
    const std::vector<DiscreteSampler> s_w2_rows = row_samplers(condition(joint, ax_w1v, ax_w2));
    const std::vector<DiscreteSampler> s_w3_rows = row_samplers(condition(joint, ax_w1v, ax_w3));
    const std::vector<DiscreteSampler> s_w4_rows =
        row_samplers(condition(joint, ax_w1vw2w3, ax_w4));

    const int vs = books.v_size;
    const int w2s = books.w2_size;
    const int w3s = books.w3_size;

    books.w1.n = n;
    books.w1.count = books.k1;
    books.w1.bins = nominal_size(b_w1, n, m2);
    fill_book(books.w1, cfg, 1, 0, s_w1, [](int) { return std::size_t{0}; }, {}, p_w1);
    partition_book(books.w1, derive_seed(cfg.seed, kTagNcBins + 1, 0));

    books.v.resize(static_cast<std::size_t>(n_v_books));
    books.w2.resize(static_cast<std::size_t>(n_w2_books));
    books.w3.resize(static_cast<std::size_t>(n_w2_books));
    books.w4.resize(static_cast<std::size_t>(n_w4_books));

    const std::uint64_t v_bins = nominal_size(b_v, n, m2);
    const std::uint64_t v_sub = nominal_size(s_v, n, 0.0);
    const std::uint64_t w2_bins = nominal_size(b_w2, n, m2);
    const std::uint64_t w3_bins = nominal_size(b_w3, n, m2);
    const std::uint64_t w4_bins = nominal_size(b_w4, n, m2);

    Seq w1(static_cast<std::size_t>(n)), v(static_cast<std::size_t>(n));
    Seq w2(static_cast<std::size_t>(n)), w3(static_cast<std::size_t>(n));
    for (std::uint64_t i = 0; i < books.k1; ++i) {
        books.w1.load(i, w1);
        BinnedBook& vb = books.v[static_cast<std::size_t>(i)];
        vb.n = n;
        vb.count = books.kv;
        vb.bins = v_bins;
        vb.sub_bins = v_sub;
        fill_book(vb, cfg, 2, i, s_v_rows,
                  [&](int s) { return static_cast<std::size_t>(w1[static_cast<std::size_t>(s)]); },
                  {&w1}, p_w1v);
        partition_book(vb, derive_seed(cfg.seed, kTagNcBins + 2, i));

        for (std::uint64_t j = 0; j < books.kv; ++j) {
            vb.load(j, v);
            const std::uint64_t pair_id = i * books.kv + j;
            auto row_w1v = [&](int s) {
                const std::size_t us = static_cast<std::size_t>(s);
                return static_cast<std::size_t>(w1[us] * vs + v[us]);
            };

            BinnedBook& w2b = books.w2[static_cast<std::size_t>(pair_id)];
            w2b.n = n;
            w2b.count = books.kw2;
            w2b.bins = w2_bins;
            fill_book(w2b, cfg, 3, pair_id, s_w2_rows, row_w1v, {&w1, &v}, p_w1vw2);
            partition_book(w2b, derive_seed(cfg.seed, kTagNcBins + 3, pair_id));

            BinnedBook& w3b = books.w3[static_cast<std::size_t>(pair_id)];
            w3b.n = n;
            w3b.count = books.kw3;
            w3b.bins = w3_bins;
            fill_book(w3b, cfg, 4, pair_id, s_w3_rows, row_w1v, {&w1, &v}, p_w1vw3);
            partition_book(w3b, derive_seed(cfg.seed, kTagNcBins + 4, pair_id));

            for (std::uint64_t k = 0; k < books.kw2; ++k) {
                w2b.load(k, w2);
                for (std::uint64_t l = 0; l < books.kw3; ++l) {
                    w3b.load(l, w3);
                    const std::uint64_t quad_id = (pair_id * books.kw2 + k) * books.kw3 + l;
                    auto row_w4 = [&](int s) {
                        const std::size_t us = static_cast<std::size_t>(s);
                        return static_cast<std::size_t>(
                            ((w1[us] * vs + v[us]) * w2s + w2[us]) * w3s + w3[us]);
                    };
                    BinnedBook& w4b = books.w4[static_cast<std::size_t>(quad_id)];
                    w4b.n = n;
                    w4b.count = books.kw4;
                    w4b.bins = w4_bins;
                    fill_book(w4b, cfg, 5, quad_id, s_w4_rows, row_w4, {&w1, &v, &w2, &w3},
                              p_w1vw2w3w4);
                    partition_book(w4b, derive_seed(cfg.seed, kTagNcBins + 5, quad_id));
                }
            }
        }
    }
    return books;
}

NcEncodeResult encode_nc(const Seq& x, const NcCodebooks& books, const SimConfig& cfg) {
    if (x.size() != static_cast<std::size_t>(books.n))
        throw InputError("encode_nc: x length mismatch");
    NcEncodeResult res;
    if (!typical({&x}, books.p_x, cfg)) {
        res.event = NcEvent::SourceAtypical;
        return res;
    }

    const std::size_t un = static_cast<std::size_t>(books.n);
    Seq w1(un), v(un), w2(un), w3(un), w4(un);

    bool found = false;
    for (std::uint64_t i = 0; i < books.k1; ++i) {
        books.w1.load(i, w1);
        if (typical({&x, &w1}, books.p_xw1, cfg)) {
            res.i = i;
            found = true;
            break;
        }
    }
    if (!found) {
        res.event = NcEvent::NoW1;
        return res;
    }
    books.w1.load(res.i, w1);

    const BinnedBook& vb = books.v[static_cast<std::size_t>(res.i)];
    found = false;
    for (std::uint64_t j = 0; j < vb.count; ++j) {
        vb.load(j, v);
        if (typical({&x, &w1, &v}, books.p_xw1v, cfg)) {
            res.j = j;
            found = true;
            break;
        }
    }
    if (!found) {
        res.event = NcEvent::NoV;
        return res;
    }
    vb.load(res.j, v);

    const std::uint64_t pair_id = res.i * books.kv + res.j;
    const BinnedBook& w2b = books.w2[static_cast<std::size_t>(pair_id)];
    found = false;
    for (std::uint64_t k = 0; k < w2b.count; ++k) {
        w2b.load(k, w2);
        if (typical({&x, &w1, &v, &w2}, books.p_xw1vw2, cfg)) {
            res.k = k;
            found = true;
            break;
        }
    }
    if (!found) {
        res.event = NcEvent::NoW2;
        return res;
    }
    w2b.load(res.k, w2);

    // w3 is matched against (x, w1, v) only; compatibility with w2 is the
    // joint check below
    const BinnedBook& w3b = books.w3[static_cast<std::size_t>(pair_id)];
    found = false;
    for (std::uint64_t l = 0; l < w3b.count; ++l) {
        w3b.load(l, w3);
        if (typical({&x, &w1, &v, &w3}, books.p_xw1vw3, cfg)) {
            res.l = l;
            found = true;
            break;
        }
    }
    if (!found) {
        res.event = NcEvent::NoW3;
        return res;
    }
    w3b.load(res.l, w3);

    if (!typical({&x, &w1, &v, &w2, &w3}, books.p_xw1vw2w3, cfg)) {
        res.event = NcEvent::TupleAtypical;
        return res;
    }

    const std::uint64_t quad_id = (pair_id * books.kw2 + res.k) * books.kw3 + res.l;
    const BinnedBook& w4b = books.w4[static_cast<std::size_t>(quad_id)];
    found = false;
    for (std::uint64_t m = 0; m < w4b.count; ++m) {
        w4b.load(m, w4);
        if (typical({&x, &w1, &v, &w2, &w3, &w4}, books.p_xw1vw2w3w4, cfg)) {
            res.m = m;
            found = true;
            break;
        }
    }
    if (!found) {
        res.event = NcEvent::NoW4;
        return res;
    }

    res.ok = true;
    res.sent.b1 = books.w1.bin_of(res.i);
    res.sent.b2 = vb.bin_of(res.j);
    res.sent.b3 = w2b.bin_of(res.k);
    res.sent.b4s = vb.sub_bin_of(res.j);
    res.sent.b5 = w3b.bin_of(res.l);
    res.sent.b6 = w4b.bin_of(res.m);
    return res;
}

namespace {

// Scans permutation positions [first, last); Unique needs exactly one
// typical candidate. `scratch` is the tuple's final slot.
Recovered unique_in_range(const BinnedBook& book, std::uint64_t first, std::uint64_t last,
                          const std::vector<const Seq*>& tuple, Seq& scratch,
                          const JointPmf& law, const SimConfig& cfg) {
    Recovered out;
    out.status = DecodeStatus::NoneTypical;
    std::uint64_t hit = 0;
    int hits = 0;
    const double slack = cfg.slack(static_cast<int>(tuple.size()));
    for (std::uint64_t p = first; p < last; ++p) {
        const std::uint64_t idx = book.perm[static_cast<std::size_t>(p)];
        book.load(idx, scratch);
        if (is_jointly_typical(tuple, law, slack)) {
            if (++hits > 1) {
                out.status = DecodeStatus::Ambiguous;
                return out;
            }
            hit = idx;
        }
    }
    if (hits == 1) {
        out.status = DecodeStatus::Unique;
        out.index = hit;
    }
    return out;
}

} // namespace

NcYDecodeResult decode_nc_y(int stage, const NcIndices& idx, const Seq& y,
                            const NcCodebooks& books, const SimConfig& cfg) {
    if (stage != 1 && stage != 2) throw InputError("decode_nc_y: stage must be 1 or 2");
    if (y.size() != static_cast<std::size_t>(books.n))
        throw InputError("decode_nc_y: y length mismatch");

    const std::size_t un = static_cast<std::size_t>(books.n);
    Seq w1(un), v(un), w3(un);
    NcYDecodeResult res;

    const auto [f1, l1] = books.w1.bin_range(idx.b1);
    res.w1 = unique_in_range(books.w1, f1, l1, {&y, &w1}, w1, books.p_yw1, cfg);
    if (stage == 1 || res.w1.status != DecodeStatus::Unique) return res;
    books.w1.load(res.w1.index, w1);

    const BinnedBook& vb = books.v[static_cast<std::size_t>(res.w1.index)];
    const auto [fv, lv] = vb.sub_bin_range(idx.b2, idx.b4s);
    res.v = unique_in_range(vb, fv, lv, {&y, &w1, &v}, v, books.p_yw1v, cfg);
    if (res.v.status != DecodeStatus::Unique) return res;
    vb.load(res.v.index, v);

    const BinnedBook& w3b = books.w3[static_cast<std::size_t>(res.w1.index * books.kv + res.v.index)];
    const auto [f3, l3] = w3b.bin_range(idx.b5);
    res.w3 = unique_in_range(w3b, f3, l3, {&y, &w1, &v, &w3}, w3, books.p_yw1vw3, cfg);
    return res;
}

NcZDecodeResult decode_nc_z(int stage, const NcIndices& idx, const Seq& z,
                            const NcCodebooks& books, const SimConfig& cfg) {
    if (stage != 1 && stage != 2) throw InputError("decode_nc_z: stage must be 1 or 2");
    if (z.size() != static_cast<std::size_t>(books.n))
        throw InputError("decode_nc_z: z length mismatch");

    const std::size_t un = static_cast<std::size_t>(books.n);
    Seq w1(un), v(un), w2(un), w3(un), w4(un);
    NcZDecodeResult res;

    const auto [f1, l1] = books.w1.bin_range(idx.b1);
    res.w1 = unique_in_range(books.w1, f1, l1, {&z, &w1}, w1, books.p_zw1, cfg);
    if (res.w1.status != DecodeStatus::Unique) return res;
    books.w1.load(res.w1.index, w1);

    // the whole bin, not the sub-bin: this decoder never reads b4s
    const BinnedBook& vb = books.v[static_cast<std::size_t>(res.w1.index)];
    const auto [fv, lv] = vb.bin_range(idx.b2);
    res.v = unique_in_range(vb, fv, lv, {&z, &w1, &v}, v, books.p_zw1v, cfg);
    if (res.v.status != DecodeStatus::Unique) return res;
    vb.load(res.v.index, v);

    const std::uint64_t pair_id = res.w1.index * books.kv + res.v.index;
    const BinnedBook& w2b = books.w2[static_cast<std::size_t>(pair_id)];
    const auto [f2, l2] = w2b.bin_range(idx.b3);
    res.w2 = unique_in_range(w2b, f2, l2, {&z, &w1, &v, &w2}, w2, books.p_zw1vw2, cfg);
    if (stage == 1 || res.w2.status != DecodeStatus::Unique) return res;
    w2b.load(res.w2.index, w2);

    const BinnedBook& w3b = books.w3[static_cast<std::size_t>(pair_id)];
    const auto [f3, l3] = w3b.bin_range(idx.b5);
    res.w3 = unique_in_range(w3b, f3, l3, {&z, &w1, &v, &w3}, w3, books.p_zw1vw3, cfg);
    if (res.w3.status != DecodeStatus::Unique) return res;
    w3b.load(res.w3.index, w3);

    const std::uint64_t quad_id = (pair_id * books.kw2 + res.w2.index) * books.kw3 + res.w3.index;
    const BinnedBook& w4b = books.w4[static_cast<std::size_t>(quad_id)];
    const auto [f4, l4] = w4b.bin_range(idx.b6);
    res.w4 = unique_in_range(w4b, f4, l4, {&z, &w1, &v, &w2, &w3, &w4}, w4,
                             books.p_zw1vw2w3w4, cfg);
    return res;
}

SimReport simulate_nc(const SourceSpec& source, const NcAuxChannel& aux,
                      const NcDecoders& dec, const SimConfig& cfg) {
    check_config(cfg);
    const NcCodebooks books = gen_nc_codebooks(source, aux, cfg);

    struct TrialOut {
        int event = 0;
        bool ok = false;
        int y_fail = 0, z_fail = 0; // 0 none, 1 none-typical, 2 ambiguous, 3 mismatch
        double dy1 = 0.0, dz1 = 0.0, dy2 = 0.0, dz2 = 0.0;
    };
    std::vector<TrialOut> slots(static_cast<std::size_t>(cfg.trials));

    const int n1 = books.w1_size;
    const int n2 = books.w2_size;
    const int n3 = books.w3_size;
    const int n4 = books.w4_size;
    const int nv = books.v_size;
    const std::size_t un = static_cast<std::size_t>(books.n);

    parallel_indexed(cfg.trials, cfg.workers, [&](int t) {
        TrialOut& slot = slots[static_cast<std::size_t>(t)];
        const auto seqs = sample_iid(source.pxyz, cfg.n,
                                     derive_seed(cfg.seed, kTagTrial, static_cast<std::uint64_t>(t)));
        const Seq& x = seqs[0];
        const Seq& y = seqs[1];
        const Seq& z = seqs[2];

        const NcEncodeResult enc = encode_nc(x, books, cfg);
        slot.event = static_cast<int>(enc.event);
        if (!enc.ok) return;

        const NcYDecodeResult yd = decode_nc_y(2, enc.sent, y, books, cfg);
        const NcZDecodeResult zd = decode_nc_z(2, enc.sent, z, books, cfg);

        auto classify = [](std::initializer_list<DecodeStatus> stages) {
            for (DecodeStatus s : stages) {
                if (s == DecodeStatus::NoneTypical || s == DecodeStatus::Skipped) return 1;
                if (s == DecodeStatus::Ambiguous) return 2;
            }
            return 0;
        };
        slot.y_fail = classify({yd.w1.status, yd.v.status, yd.w3.status});
        slot.z_fail = classify({zd.w1.status, zd.v.status, zd.w2.status, zd.w3.status, zd.w4.status});
        if (slot.y_fail == 0 &&
            (yd.w1.index != enc.i || yd.v.index != enc.j || yd.w3.index != enc.l))
            slot.y_fail = 3;
        if (slot.z_fail == 0 &&
            (zd.w1.index != enc.i || zd.v.index != enc.j || zd.w2.index != enc.k ||
             zd.w3.index != enc.l || zd.w4.index != enc.m))
            slot.z_fail = 3;
        if (slot.y_fail == 1 || slot.y_fail == 2 || slot.z_fail == 1 || slot.z_fail == 2) return;
        slot.ok = true;

        // reconstructions run off what each decoder recovered
        Seq w1y(un), vy(un), w3y(un);
        books.w1.load(yd.w1.index, w1y);
        books.v[static_cast<std::size_t>(yd.w1.index)].load(yd.v.index, vy);
        books.w3[static_cast<std::size_t>(yd.w1.index * books.kv + yd.v.index)].load(yd.w3.index,
                                                                                     w3y);
        Seq w1z(un), vz(un), w2z(un), w3z(un), w4z(un);
        books.w1.load(zd.w1.index, w1z);
        const std::uint64_t zpair = zd.w1.index * books.kv + zd.v.index;
        books.v[static_cast<std::size_t>(zd.w1.index)].load(zd.v.index, vz);
        books.w2[static_cast<std::size_t>(zpair)].load(zd.w2.index, w2z);
        books.w3[static_cast<std::size_t>(zpair)].load(zd.w3.index, w3z);
        books.w4[static_cast<std::size_t>((zpair * books.kw2 + zd.w2.index) * books.kw3 +
                                          zd.w3.index)]
            .load(zd.w4.index, w4z);

        double sy1 = 0.0, sz1 = 0.0, sy2 = 0.0, sz2 = 0.0;
        for (std::size_t i = 0; i < un; ++i) {
            const int xy1 = dec.g_y1[static_cast<std::size_t>(y[i] * n1 + w1y[i])];
            const int xz1 = dec.g_z1[static_cast<std::size_t>(
                ((z[i] * n1 + w1z[i]) * n2 + w2z[i]) * nv + vz[i])];
            const int xy2 = dec.g_y2[static_cast<std::size_t>(
                ((y[i] * n1 + w1y[i]) * n3 + w3y[i]) * nv + vy[i])];
            const int xz2 = dec.g_z2[static_cast<std::size_t>(
                ((((z[i] * n1 + w1z[i]) * n2 + w2z[i]) * n3 + w3z[i]) * n4 + w4z[i]) * nv +
                vz[i])];
            sy1 += source.d_y1(x[i], xy1);
            sz1 += source.d_z1(x[i], xz1);
            sy2 += source.d_y2(x[i], xy2);
            sz2 += source.d_z2(x[i], xz2);
        }
        const double inv = 1.0 / static_cast<double>(un);
        slot.dy1 = sy1 * inv;
        slot.dz1 = sz1 * inv;
        slot.dy2 = sy2 * inv;
        slot.dz2 = sz2 * inv;
    });

    SimReport rep;
    rep.config = cfg;
    rep.trials = static_cast<std::uint64_t>(cfg.trials);
    rep.encoder_events.assign(7, 0);
    rep.per_trial.reserve(slots.size());
    double sy1 = 0.0, sz1 = 0.0, sy2 = 0.0, sz2 = 0.0;
    for (const TrialOut& s : slots) {
        TrialRow row;
        row.event = s.event;
        row.ok = s.ok;
        row.y_fail = s.y_fail;
        row.z_fail = s.z_fail;
        if (s.ok) row.dist = {s.dy1, s.dz1, s.dy2, s.dz2};
        rep.per_trial.push_back(row);
        if (s.event > 0) ++rep.encoder_events[static_cast<std::size_t>(s.event - 1)];
        if (s.y_fail == 1) ++rep.y_side.none_typical;
        if (s.y_fail == 2) ++rep.y_side.ambiguous;
        if (s.y_fail == 3) ++rep.y_side.mismatch;
        if (s.z_fail == 1) ++rep.z_side.none_typical;
        if (s.z_fail == 2) ++rep.z_side.ambiguous;
        if (s.z_fail == 3) ++rep.z_side.mismatch;
        if (!s.ok) continue;
        ++rep.trials_ok;
        sy1 += s.dy1;
        sz1 += s.dz1;
        sy2 += s.dy2;
        sz2 += s.dz2;
    }
    if (rep.trials_ok > 0) {
        const double inv = 1.0 / static_cast<double>(rep.trials_ok);
        rep.empirical = {sy1 * inv, sz1 * inv, sy2 * inv, sz2 * inv};
    }
    return rep;
}

} // namespace sr
