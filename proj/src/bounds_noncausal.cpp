#include "sr/bounds_noncausal.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>

#include "decode_util.hpp"
#include "sr/errors.hpp"
#include "sr/info.hpp"

namespace sr {

namespace {

// axis positions in nc_joint
constexpr int kX = 0, kY = 1, kZ = 2, kW1 = 3, kW2 = 4, kW3 = 5, kW4 = 6, kV = 7;

void check_caps(const NcAuxChannel& a, int slack, const char* who) {
    const long long nx = a.x_size();
    const long long n1 = a.w1_size(), n2 = a.w2_size(), n3 = a.w3_size(), n4 = a.w4_size(),
                    nv = a.v_size();
    auto fail = [&](const char* comp, long long cap) {
        throw InputError(std::string(who) + ": |" + comp + "| exceeds " + std::to_string(cap));
    };
    if (n1 > nx + 1 + slack) fail("W1", nx + 1 + slack);
    if (nv > nx * n1 + slack) fail("V", nx * n1 + slack);
    if (n2 > nx * n1 * nv + slack - 1) fail("W2", nx * n1 * nv + slack - 1);
    if (n3 > nx * n1 * n2 * nv + slack - 2) fail("W3", nx * n1 * n2 * nv + slack - 2);
    if (n4 > nx * n1 * n2 * n3 * nv + slack - 3) fail("W4", nx * n1 * n2 * n3 * nv + slack - 3);
}

NcRates rates_from_joint_inner(const JointPmf& j, double markov_tol) {
    const int x[] = {kX}, y[] = {kY};
    const int w1[] = {kW1}, w2[] = {kW2}, w4[] = {kW4};
    const int w3s[] = {kW3};
    const int xw1v[] = {kX, kW1, kV};
    const double residual = cmi_sets(j, w2, w3s, xw1v);
    if (residual > markov_tol)
        throw ExtraMarkovViolated("I(W2;W3|X,W1,V) = " + std::to_string(residual) +
                                  "; the stage descriptions must be conditionally independent");
    const int w2v[] = {kW2, kV}, w1z[] = {kW1, kZ};
    const int w1vw3[] = {kW1, kV, kW3}, w1vz[] = {kW1, kV, kZ};
    const int w123vz[] = {kW1, kW2, kW3, kV, kZ};
    NcRates r;
    r.r1 = cmi_sets(j, x, w1, y) + cmi_sets(j, x, w2v, w1z);
    r.r2 = cmi_sets(j, x, w1vw3, y) + cmi_sets(j, x, w2, w1vz) + cmi_sets(j, x, w4, w123vz);
    return r;
}

NcDecoders decoders_from_joint(const JointPmf& j, const SourceSpec& source) {
    NcDecoders dec;
    dec.g_y1 = detail::synthesize_table(j, source.d_y1, kX, kY, {kW1});
    dec.g_z1 = detail::synthesize_table(j, source.d_z1, kX, kZ, {kW1, kW2, kV});
    dec.g_y2 = detail::synthesize_table(j, source.d_y2, kX, kY, {kW1, kW3, kV});
    dec.g_z2 = detail::synthesize_table(j, source.d_z2, kX, kZ, {kW1, kW2, kW3, kW4, kV});
    return dec;
}

DistortionQuad distortions_from_joint(const JointPmf& j, const SourceSpec& source,
                                      const NcDecoders& dec) {
    DistortionQuad q;
    q.dy1 = detail::table_distortion(j, source.d_y1, kX, kY, {kW1}, dec.g_y1);
    q.dz1 = detail::table_distortion(j, source.d_z1, kX, kZ, {kW1, kW2, kV}, dec.g_z1);
    q.dy2 = detail::table_distortion(j, source.d_y2, kX, kY, {kW1, kW3, kV}, dec.g_y2);
    q.dz2 = detail::table_distortion(j, source.d_z2, kX, kZ, {kW1, kW2, kW3, kW4, kV}, dec.g_z2);
    return q;
}

NcRegionPoint evaluate_inner_joint(const JointPmf& j, const SourceSpec& source,
                                   const NcAuxChannel& aux, double markov_tol) {
    NcRegionPoint pt;
    const NcRates r = rates_from_joint_inner(j, markov_tol);
    pt.r1 = r.r1;
    pt.r2 = r.r2;
    pt.decoders = decoders_from_joint(j, source);
    pt.achieved = distortions_from_joint(j, source, pt.decoders);
    pt.aux = aux;
    return pt;
}

} // namespace

void require_degraded(const SourceSpec& source, double tol) {
    const double residual = source.degradedness_residual();
    if (residual > tol)
        throw NonDegradedSourceError("I(X;Y|Z) = " + std::to_string(residual) +
                                     " exceeds " + std::to_string(tol) +
                                     "; the Y signal must be a degraded version of Z");
}

NcAuxChannel::NcAuxChannel(CondPmf c) : cond(std::move(c)) {
    if (cond.from_axes().size() != 1 || cond.from_axes()[0].label != "X")
        throw InputError("NcAuxChannel: conditioning must be on X alone");
    const char* want[] = {"W1", "W2", "W3", "W4", "V"};
    if (cond.to_axes().size() != 5)
        throw InputError("NcAuxChannel: outputs must be W1, W2, W3, W4, V");
    for (int i = 0; i < 5; ++i)
        if (cond.to_axes()[static_cast<std::size_t>(i)].label != want[i])
            throw InputError("NcAuxChannel: outputs must be labeled W1, W2, W3, W4, V in order");
    check_caps(*this, 5, "NcAuxChannel");
}

NcAuxChannel NcAuxChannel::from_rows(int x_size, int w1_size, int w2_size, int w3_size,
                                     int w4_size, int v_size,
                                     const std::vector<std::vector<double>>& rows) {
    if (static_cast<int>(rows.size()) != x_size)
        throw InputError("NcAuxChannel: need one row per source symbol");
    const std::size_t cells = static_cast<std::size_t>(w1_size) * static_cast<std::size_t>(w2_size) *
                              static_cast<std::size_t>(w3_size) * static_cast<std::size_t>(w4_size) *
                              static_cast<std::size_t>(v_size);
    std::vector<double> flat;
    flat.reserve(static_cast<std::size_t>(x_size) * cells);
    for (const auto& r : rows) {
        if (r.size() != cells)
            throw InputError("NcAuxChannel: row length must be |W1||W2||W3||W4||V|");
        flat.insert(flat.end(), r.begin(), r.end());
    }
    return NcAuxChannel(CondPmf({Alphabet(x_size, "X")},
                                {Alphabet(w1_size, "W1"), Alphabet(w2_size, "W2"),
                                 Alphabet(w3_size, "W3"), Alphabet(w4_size, "W4"),
                                 Alphabet(v_size, "V")},
                                std::move(flat)));
}

NcAuxChannel NcAuxChannel::trivial(int x_size) {
    std::vector<std::vector<double>> rows(static_cast<std::size_t>(x_size),
                                          std::vector<double>{1.0});
    return from_rows(x_size, 1, 1, 1, 1, 1, rows);
}

JointPmf nc_joint(const SourceSpec& source, const NcAuxChannel& aux) {
    if (aux.x_size() != source.x_size())
        throw InputError("nc_joint: aux channel |X| does not match source");
    require_degraded(source);
    return compose(source.pxyz, aux.cond);
}

NcRates outer_rates(const SourceSpec& source, const NcAuxChannel& aux) {
    check_caps(aux, 4, "outer_rates");
    const JointPmf j = nc_joint(source, aux);
    const int x[] = {kX}, y[] = {kY};
    const int w1[] = {kW1};
    const int w2v[] = {kW2, kV}, w1z[] = {kW1, kZ};
    const int w13v[] = {kW1, kW3, kV}, w24[] = {kW2, kW4};
    const int w13vz[] = {kW1, kW3, kV, kZ};
    NcRates r;
    r.r1 = cmi_sets(j, x, w1, y) + cmi_sets(j, x, w2v, w1z);
    r.r2 = cmi_sets(j, x, w13v, y) + cmi_sets(j, x, w24, w13vz);
    return r;
}

double extra_markov_residual(const SourceSpec& source, const NcAuxChannel& aux) {
    const JointPmf j = nc_joint(source, aux);
    const int w2[] = {kW2}, w3[] = {kW3}, xw1v[] = {kX, kW1, kV};
    return cmi_sets(j, w2, w3, xw1v);
}

NcRates inner_rates(const SourceSpec& source, const NcAuxChannel& aux, double markov_tol) {
    return rates_from_joint_inner(nc_joint(source, aux), markov_tol);
}

NcDecoders nc_optimal_decoders(const SourceSpec& source, const NcAuxChannel& aux) {
    return decoders_from_joint(nc_joint(source, aux), source);
}

DistortionQuad nc_distortions(const SourceSpec& source, const NcAuxChannel& aux,
                              const NcDecoders& decoders) {
    return distortions_from_joint(nc_joint(source, aux), source, decoders);
}

NcAuxChannel assemble_inner_family(int x_size, const InnerFamilyFactors& f) {
    const int n1 = f.w1_size, n2 = f.w2_size, n3 = f.w3_size, n4 = f.w4_size, nv = f.v_size;
    const std::size_t stage1_cells = static_cast<std::size_t>(x_size) *
                                     static_cast<std::size_t>(n1) * static_cast<std::size_t>(nv);
    if (f.p_w1v.size() != static_cast<std::size_t>(x_size) || f.p_w2.size() != stage1_cells ||
        f.p_w3.size() != stage1_cells ||
        f.p_w4.size() != stage1_cells * static_cast<std::size_t>(n2) * static_cast<std::size_t>(n3))
        throw InputError("assemble_inner_family: factor table shapes do not match the sizes");
    auto check_rows = [](const std::vector<std::vector<double>>& t, int len, const char* name) {
        for (const auto& r : t)
            if (static_cast<int>(r.size()) != len)
                throw InputError(std::string("assemble_inner_family: bad row length in ") + name);
    };
    check_rows(f.p_w1v, n1 * nv, "p_w1v");
    check_rows(f.p_w2, n2, "p_w2");
    check_rows(f.p_w3, n3, "p_w3");
    check_rows(f.p_w4, n4, "p_w4");

    std::vector<std::vector<double>> rows(static_cast<std::size_t>(x_size));
    for (int x = 0; x < x_size; ++x) {
        std::vector<double> row(static_cast<std::size_t>(n1 * n2 * n3 * n4 * nv), 0.0);
        for (int w1 = 0; w1 < n1; ++w1)
            for (int v = 0; v < nv; ++v) {
                const double base =
                    f.p_w1v[static_cast<std::size_t>(x)][static_cast<std::size_t>(w1 * nv + v)];
                const std::size_t c1 =
                    (static_cast<std::size_t>(x) * static_cast<std::size_t>(n1) +
                     static_cast<std::size_t>(w1)) * static_cast<std::size_t>(nv) +
                    static_cast<std::size_t>(v);
                for (int w2 = 0; w2 < n2; ++w2) {
                    const double m2 = f.p_w2[c1][static_cast<std::size_t>(w2)];
                    for (int w3 = 0; w3 < n3; ++w3) {
                        const double m3 = f.p_w3[c1][static_cast<std::size_t>(w3)];
                        const std::size_t c2 =
                            (c1 * static_cast<std::size_t>(n2) + static_cast<std::size_t>(w2)) *
                                static_cast<std::size_t>(n3) +
                            static_cast<std::size_t>(w3);
                        for (int w4 = 0; w4 < n4; ++w4)
                            row[static_cast<std::size_t>(
                                (((w1 * n2 + w2) * n3 + w3) * n4 + w4) * nv + v)] =
                                base * m2 * m3 * f.p_w4[c2][static_cast<std::size_t>(w4)];
                    }
                }
            }
        rows[static_cast<std::size_t>(x)] = std::move(row);
    }
    return NcAuxChannel::from_rows(x_size, n1, n2, n3, n4, nv, rows);
}

InnerFamilyFactors random_inner_family(int x_size, int w1_size, int w2_size, int w3_size,
                                       int w4_size, int v_size, Rng& rng) {
    InnerFamilyFactors f;
    f.w1_size = w1_size;
    f.w2_size = w2_size;
    f.w3_size = w3_size;
    f.w4_size = w4_size;
    f.v_size = v_size;
    const std::size_t s1 = static_cast<std::size_t>(x_size) * static_cast<std::size_t>(w1_size) *
                           static_cast<std::size_t>(v_size);
    for (int x = 0; x < x_size; ++x)
        f.p_w1v.push_back(random_simplex_row(w1_size * v_size, rng));
    for (std::size_t c = 0; c < s1; ++c) f.p_w2.push_back(random_simplex_row(w2_size, rng));
    for (std::size_t c = 0; c < s1; ++c) f.p_w3.push_back(random_simplex_row(w3_size, rng));
    const std::size_t s2 = s1 * static_cast<std::size_t>(w2_size) * static_cast<std::size_t>(w3_size);
    for (std::size_t c = 0; c < s2; ++c) f.p_w4.push_back(random_simplex_row(w4_size, rng));
    return f;
}

NcAuxChannel assemble_z1_slack(int x_size, int w1_size, int w3_size, int w4_size,
                               const std::vector<std::vector<double>>& rows) {
    // (w1, w3, w4) with W2 and V singletons lays out exactly like the full
    // (w1, w2, w3, w4, v) order, so the rows pass through unchanged
    return NcAuxChannel::from_rows(x_size, w1_size, 1, w3_size, w4_size, 1, rows);
}

NcAuxChannel assemble_y2_static(int x_size, int w1_size, int w2_size, int w4_size,
                                const std::vector<std::vector<double>>& rows) {
    return NcAuxChannel::from_rows(x_size, w1_size, w2_size, 1, w4_size, 1, rows);
}

NcAuxChannel assemble_lossless_z1(int x_size, int w1_size, int w3_size,
                                  const std::vector<std::vector<double>>& rows) {
    if (static_cast<int>(rows.size()) != x_size)
        throw InputError("assemble_lossless_z1: need one row per source symbol");
    const std::size_t cells = static_cast<std::size_t>(w1_size) * static_cast<std::size_t>(x_size) *
                              static_cast<std::size_t>(w3_size) * static_cast<std::size_t>(w3_size);
    std::vector<std::vector<double>> full(static_cast<std::size_t>(x_size),
                                          std::vector<double>(cells, 0.0));
    for (int x = 0; x < x_size; ++x) {
        if (static_cast<int>(rows[static_cast<std::size_t>(x)].size()) != w1_size * w3_size)
            throw InputError("assemble_lossless_z1: row length must be |W1||W3|");
        for (int w1 = 0; w1 < w1_size; ++w1)
            for (int w3 = 0; w3 < w3_size; ++w3) {
                // W2 echoes the source symbol, V echoes W3, W4 is trivial
                const std::size_t flat =
                    ((static_cast<std::size_t>(w1) * static_cast<std::size_t>(x_size) +
                      static_cast<std::size_t>(x)) * static_cast<std::size_t>(w3_size) +
                     static_cast<std::size_t>(w3)) * static_cast<std::size_t>(w3_size) +
                    static_cast<std::size_t>(w3);
                full[static_cast<std::size_t>(x)][flat] =
                    rows[static_cast<std::size_t>(x)][static_cast<std::size_t>(w1 * w3_size + w3)];
            }
    }
    return NcAuxChannel::from_rows(x_size, w1_size, x_size, w3_size, 1, w3_size, full);
}

NcAuxChannel assemble_lossless_y2(int x_size, int w1_size, int w2_size,
                                  const std::vector<std::vector<double>>& rows) {
    if (static_cast<int>(rows.size()) != x_size)
        throw InputError("assemble_lossless_y2: need one row per source symbol");
    const std::size_t cells = static_cast<std::size_t>(w1_size) * static_cast<std::size_t>(w2_size) *
                              static_cast<std::size_t>(x_size) * static_cast<std::size_t>(w2_size);
    std::vector<std::vector<double>> full(static_cast<std::size_t>(x_size),
                                          std::vector<double>(cells, 0.0));
    for (int x = 0; x < x_size; ++x) {
        if (static_cast<int>(rows[static_cast<std::size_t>(x)].size()) != w1_size * w2_size)
            throw InputError("assemble_lossless_y2: row length must be |W1||W2|");
        for (int w1 = 0; w1 < w1_size; ++w1)
            for (int w2 = 0; w2 < w2_size; ++w2) {
                // W3 echoes the source symbol, V echoes W2, W4 is trivial
                const std::size_t flat =
                    ((static_cast<std::size_t>(w1) * static_cast<std::size_t>(w2_size) +
                      static_cast<std::size_t>(w2)) * static_cast<std::size_t>(x_size) +
                     static_cast<std::size_t>(x)) * static_cast<std::size_t>(w2_size) +
                    static_cast<std::size_t>(w2);
                full[static_cast<std::size_t>(x)][flat] =
                    rows[static_cast<std::size_t>(x)][static_cast<std::size_t>(w1 * w2_size + w2)];
            }
    }
    return NcAuxChannel::from_rows(x_size, w1_size, w2_size, x_size, 1, w2_size, full);
}

NcRegionPoint evaluate_inner(const SourceSpec& source, const NcAuxChannel& aux,
                             double markov_tol) {
    return evaluate_inner_joint(nc_joint(source, aux), source, aux, markov_tol);
}

SrCaseKind classify_sr_case(const DistortionQuad& target) {
    if (target.dz1 >= target.dy1) return SrCaseKind::Z1Slack;
    if (target.dy2 == target.dy1) return SrCaseKind::Y2Static;
    throw InputError("target fits neither closed-form shape: need dz1 >= dy1 or dy2 == dy1");
}

namespace {

struct NcBest {
    bool has = false;
    double objective = kInf;
    NcRegionPoint point;
};

SimplexProduct reduced_copy_rows(int nx, int w1_size, int cells_per_row) {
    // point mass at (w1 = x, everything else = 0); w1 is the slowest coordinate
    const int sub = cells_per_row / w1_size;
    SimplexProduct rows(static_cast<std::size_t>(nx),
                        std::vector<double>(static_cast<std::size_t>(cells_per_row), 0.0));
    for (int x = 0; x < nx; ++x) rows[static_cast<std::size_t>(x)][static_cast<std::size_t>(x * sub)] = 1.0;
    return rows;
}

SimplexProduct reduced_noisy_copy(int nx, int w1_size, int cells_per_row, double q) {
    SimplexProduct rows = reduced_copy_rows(nx, w1_size, cells_per_row);
    for (auto& row : rows)
        for (auto& v : row)
            v = (1.0 - q) * v + q / static_cast<double>(cells_per_row);
    return rows;
}

std::vector<NcRegionPoint> prune_frontier(std::vector<NcRegionPoint> pts) {
    std::sort(pts.begin(), pts.end(), [](const NcRegionPoint& a, const NcRegionPoint& b) {
        if (a.r1 != b.r1) return a.r1 < b.r1;
        return a.r2 < b.r2;
    });
    std::vector<NcRegionPoint> out;
    double best_r2 = kInf;
    for (auto& p : pts) {
        if (p.r2 < best_r2 - 1e-12) {
            best_r2 = p.r2;
            out.push_back(std::move(p));
        }
    }
    return out;
}

// Frontier search over one reduced family. `assemble` maps search rows (one
// per source symbol) to the full aux channel.
std::vector<NcRegionPoint> reduced_frontier_search(
    const SourceSpec& source, const DistortionQuad& target, const SearchConfig& cfg,
    std::uint64_t tag, int w1_size, int cells_per_row,
    const std::function<NcAuxChannel(const SimplexProduct&)>& assemble) {
    require_degraded(source);
    detail::check_target_feasible(source, target, cfg.dist_tol);

    const int nx = source.x_size();
    const bool can_copy = w1_size >= nx;
    const std::vector<int> row_sizes(static_cast<std::size_t>(nx), cells_per_row);
    const SimplexProduct copy_rows =
        can_copy ? reduced_copy_rows(nx, w1_size, cells_per_row) : SimplexProduct{};

    const double lambdas[] = {1.0, 0.75, 0.5, 0.25, 0.0};
    const int nl = 5;
    const int total = nl * cfg.restarts;
    std::vector<NcBest> found(static_cast<std::size_t>(total));

    parallel_indexed(total, cfg.workers, [&](int job) {
        const double lambda = lambdas[job / cfg.restarts];
        const int restart = job % cfg.restarts;
        Rng rng(derive_seed(cfg.seed, tag, static_cast<std::uint64_t>(job)));
        NcBest& best = found[static_cast<std::size_t>(job)];

        auto eval = [&](const SimplexProduct& rows) {
            const NcAuxChannel aux = assemble(rows);
            const JointPmf j = compose(source.pxyz, aux.cond);
            const NcRegionPoint pt = evaluate_inner_joint(j, source, aux, 1e-9);
            const double rate_obj = lambda * pt.r1 + (1.0 - lambda) * pt.r2;
            if (pt.achieved.meets(target, cfg.dist_tol) &&
                (!best.has || rate_obj < best.objective)) {
                best.has = true;
                best.objective = rate_obj;
                best.point = pt;
            }
            return rate_obj +
                   detail::kFeasibilityPenalty * detail::distortion_excess(pt.achieved, target, source);
        };

        SimplexProduct start;
        switch (restart % 4) {
        case 0: start = uniform_simplex_product(row_sizes); break;
        case 1:
            start = can_copy ? reduced_noisy_copy(nx, w1_size, cells_per_row, u01(rng))
                             : random_simplex_product(row_sizes, rng);
            break;
        case 2:
            start = can_copy ? reduced_noisy_copy(nx, w1_size, cells_per_row, 0.1 + 0.8 * u01(rng))
                             : random_simplex_product(row_sizes, rng);
            break;
        default: start = random_simplex_product(row_sizes, rng); break;
        }
        const SimplexProduct end = anneal(std::move(start), cfg.steps, 0.5, 0.01, rng, eval);

        if (!can_copy) return;
        // repair pass: blend toward the copy rows until feasible, then tighten
        auto feasible_at = [&](double t, NcRegionPoint& pt) {
            SimplexProduct mix = end;
            for (std::size_t r = 0; r < mix.size(); ++r)
                for (std::size_t c = 0; c < mix[r].size(); ++c)
                    mix[r][c] = (1.0 - t) * end[r][c] + t * copy_rows[r][c];
            const NcAuxChannel aux = assemble(mix);
            const JointPmf j = compose(source.pxyz, aux.cond);
            pt = evaluate_inner_joint(j, source, aux, 1e-9);
            return pt.achieved.meets(target, cfg.dist_tol);
        };
        double lo = 0.0, hi = -1.0;
        NcRegionPoint pt;
        for (int i = 0; i <= 10; ++i) {
            const double t = static_cast<double>(i) / 10.0;
            if (feasible_at(t, pt)) { hi = t; break; }
            lo = t;
        }
        if (hi < 0.0) return;
        NcRegionPoint repaired;
        feasible_at(hi, repaired);
        for (int it = 0; it < 12; ++it) {
            const double mid = 0.5 * (lo + hi);
            if (feasible_at(mid, pt)) {
                hi = mid;
                repaired = pt;
            } else {
                lo = mid;
            }
        }
        const double rate_obj = lambda * repaired.r1 + (1.0 - lambda) * repaired.r2;
        if (!best.has || rate_obj < best.objective) {
            best.has = true;
            best.objective = rate_obj;
            best.point = repaired;
        }
    });

    std::vector<NcRegionPoint> pts;
    for (auto& f : found)
        if (f.has) pts.push_back(std::move(f.point));
    if (pts.empty())
        throw InfeasibleTargetError("no feasible point found within the search budget");
    return prune_frontier(std::move(pts));
}

} // namespace

std::vector<NcRegionPoint> sr_special_case(const SourceSpec& source, const DistortionQuad& target,
                                           const SearchConfig& cfg) {
    const SrCaseKind kind = classify_sr_case(target);
    const int nx = source.x_size();
    const int w1_size = std::min(nx + 5, std::max(cfg.aux_cap, 2));
    const int s2 = 2; // stage-2 refinement letters
    if (kind == SrCaseKind::Z1Slack)
        return reduced_frontier_search(
            source, target, cfg, 0x5CA5EAULL, w1_size, w1_size * s2 * s2,
            [=](const SimplexProduct& rows) { return assemble_z1_slack(nx, w1_size, s2, s2, rows); });
    return reduced_frontier_search(
        source, target, cfg, 0x5CA5EBULL, w1_size, w1_size * s2 * s2,
        [=](const SimplexProduct& rows) { return assemble_y2_static(nx, w1_size, s2, s2, rows); });
}

std::vector<NcRegionPoint> lossless_special_case(const SourceSpec& source, LosslessStage stage,
                                                 const DistortionQuad& target,
                                                 const SearchConfig& cfg) {
    const int nx = source.x_size();
    const int w1_size = std::min(nx + 5, std::max(cfg.aux_cap, 2));
    const int letters = 2;
    if (stage == LosslessStage::Z1) {
        if (target.dz1 != 0.0)
            throw InputError("lossless_special_case: the stage-1 Z target must be exactly zero");
        return reduced_frontier_search(
            source, target, cfg, 0x1055A1ULL, w1_size, w1_size * letters,
            [=](const SimplexProduct& rows) {
                return assemble_lossless_z1(nx, w1_size, letters, rows);
            });
    }
    if (target.dy2 != 0.0)
        throw InputError("lossless_special_case: the stage-2 Y target must be exactly zero");
    return reduced_frontier_search(
        source, target, cfg, 0x1055B2ULL, w1_size, w1_size * letters,
        [=](const SimplexProduct& rows) { return assemble_lossless_y2(nx, w1_size, letters, rows); });
}

ConsistencyReport verify_inner_subset_outer(const SourceSpec& source, int samples,
                                            std::uint64_t seed, double tol) {
    require_degraded(source);
    ConsistencyReport rep;
    double slack_min = kInf;
    for (int i = 0; i < samples; ++i) {
        Rng rng(derive_seed(seed, 0x1CCE55ULL, static_cast<std::uint64_t>(i)));
        const InnerFamilyFactors f = random_inner_family(source.x_size(), 2, 2, 2, 2, 2, rng);
        const NcAuxChannel aux = assemble_inner_family(source.x_size(), f);
        rep.max_markov_residual =
            std::max(rep.max_markov_residual, extra_markov_residual(source, aux));
        const NcRates in = inner_rates(source, aux, 1e-9);
        const NcRates out = outer_rates(source, aux);
        const double gap = std::abs(in.r1 - out.r1);
        rep.max_r1_gap = std::max(rep.max_r1_gap, gap);
        if (gap > tol) ++rep.r1_mismatches;
        const double slack = in.r2 - out.r2;
        slack_min = std::min(slack_min, slack);
        if (slack < -tol) ++rep.dominance_violations;
        ++rep.samples;
    }
    rep.min_r2_slack = samples > 0 ? slack_min : 0.0;
    return rep;
}

} // namespace sr
