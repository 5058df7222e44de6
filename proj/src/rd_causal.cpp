#include "sr/rd_causal.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

#include "decode_util.hpp"
#include "sr/errors.hpp"
#include "sr/info.hpp"

namespace sr {

namespace {

// axis positions in causal_joint
constexpr int kX = 0, kY = 1, kZ = 2, kW1 = 3, kW2 = 4;

std::vector<int> synthesize_table(const JointPmf& joint, const DistortionMatrix& d,
                                  int si_axis, const std::vector<int>& aux_axes) {
    return detail::synthesize_table(joint, d, kX, si_axis, aux_axes);
}

double table_distortion(const JointPmf& joint, const DistortionMatrix& d, int si_axis,
                        const std::vector<int>& aux_axes, const std::vector<int>& table) {
    return detail::table_distortion(joint, d, kX, si_axis, aux_axes, table);
}

using detail::distortion_excess;
constexpr double kPenalty = detail::kFeasibilityPenalty;

CausalAuxChannel aux_from_product(int x_size, int w1_size, int w2_size, const SimplexProduct& rows) {
    std::vector<std::vector<double>> r(rows.begin(), rows.end());
    return CausalAuxChannel::from_rows(x_size, w1_size, w2_size, r);
}

// Noisy-copy start: symbol x concentrates on aux cell (x mod w1, 0) with the
// remaining mass q spread evenly. Useful basin for rate-distortion shapes.
SimplexProduct noisy_copy_product(int x_size, int w1_size, int w2_size, double q) {
    SimplexProduct p;
    const int cols = w1_size * w2_size;
    for (int x = 0; x < x_size; ++x) {
        std::vector<double> row(static_cast<std::size_t>(cols), q / static_cast<double>(cols));
        row[static_cast<std::size_t>((x % w1_size) * w2_size)] += 1.0 - q;
        p.push_back(std::move(row));
    }
    return p;
}

struct FeasibleBest {
    bool has = false;
    double objective = kInf;
    CausalRegionPoint point;
};

} // namespace

CausalAuxChannel::CausalAuxChannel(CondPmf c) : cond(std::move(c)) {
    if (cond.from_axes().size() != 1 || cond.from_axes()[0].label != "X")
        throw InputError("CausalAuxChannel: conditioning must be on X alone");
    if (cond.to_axes().size() != 2 || cond.to_axes()[0].label != "W1" ||
        cond.to_axes()[1].label != "W2")
        throw InputError("CausalAuxChannel: outputs must be labeled W1, W2");
    const int nx = x_size();
    if (w1_size() > nx + 5)
        throw InputError("CausalAuxChannel: |W1| exceeds |X|+5");
    if (w2_size() > nx * w1_size() + 2)
        throw InputError("CausalAuxChannel: |W2| exceeds |X||W1|+2");
}

CausalAuxChannel CausalAuxChannel::from_rows(int x_size, int w1_size, int w2_size,
                                             const std::vector<std::vector<double>>& rows) {
    if (static_cast<int>(rows.size()) != x_size)
        throw InputError("CausalAuxChannel: need one row per source symbol");
    std::vector<double> flat;
    flat.reserve(static_cast<std::size_t>(x_size * w1_size * w2_size));
    for (const auto& r : rows) {
        if (static_cast<int>(r.size()) != w1_size * w2_size)
            throw InputError("CausalAuxChannel: row length must be |W1|*|W2|");
        flat.insert(flat.end(), r.begin(), r.end());
    }
    return CausalAuxChannel(CondPmf({Alphabet(x_size, "X")},
                                    {Alphabet(w1_size, "W1"), Alphabet(w2_size, "W2")},
                                    std::move(flat)));
}

CausalAuxChannel CausalAuxChannel::copy(int x_size) {
    std::vector<std::vector<double>> rows(static_cast<std::size_t>(x_size),
                                          std::vector<double>(static_cast<std::size_t>(x_size), 0.0));
    for (int x = 0; x < x_size; ++x) rows[static_cast<std::size_t>(x)][static_cast<std::size_t>(x)] = 1.0;
    return from_rows(x_size, x_size, 1, rows);
}

JointPmf causal_joint(const SourceSpec& source, const CausalAuxChannel& aux) {
    if (aux.x_size() != source.x_size())
        throw InputError("causal_joint: aux channel |X| does not match source");
    return compose(source.pxyz, aux.cond);
}

CausalDecoders optimal_causal_decoders(const SourceSpec& source, const CausalAuxChannel& aux) {
    const JointPmf joint = causal_joint(source, aux);
    CausalDecoders dec;
    dec.g_y1 = synthesize_table(joint, source.d_y1, kY, {kW1});
    dec.g_z1 = synthesize_table(joint, source.d_z1, kZ, {kW1});
    dec.g_y2 = synthesize_table(joint, source.d_y2, kY, {kW1, kW2});
    dec.g_z2 = synthesize_table(joint, source.d_z2, kZ, {kW1, kW2});
    return dec;
}

CausalRegionPoint evaluate_causal(const SourceSpec& source, const CausalAuxChannel& aux,
                                  const CausalDecoders& decoders) {
    const JointPmf joint = causal_joint(source, aux);
    CausalRegionPoint pt;
    const int x[] = {kX}, w1[] = {kW1}, w2[] = {kW2};
    pt.r1 = mi_sets(joint, x, w1);
    pt.delta_r = cmi_sets(joint, x, w2, w1);
    pt.achieved.dy1 = table_distortion(joint, source.d_y1, kY, {kW1}, decoders.g_y1);
    pt.achieved.dz1 = table_distortion(joint, source.d_z1, kZ, {kW1}, decoders.g_z1);
    pt.achieved.dy2 = table_distortion(joint, source.d_y2, kY, {kW1, kW2}, decoders.g_y2);
    pt.achieved.dz2 = table_distortion(joint, source.d_z2, kZ, {kW1, kW2}, decoders.g_z2);
    pt.aux = aux;
    pt.decoders = decoders;
    return pt;
}

namespace {

using detail::check_target_feasible;

// Blend the search point toward the copy channel until the target is met;
// returns the evaluation at the smallest feasible blend found, if any.
bool copy_blend_repair(const SourceSpec& source, int w1_size, int w2_size,
                       const SimplexProduct& from, const DistortionQuad& target, double tol,
                       CausalRegionPoint& out) {
    const int nx = source.x_size();
    if (w1_size < nx) return false;
    SimplexProduct copy_rows(static_cast<std::size_t>(nx),
                             std::vector<double>(static_cast<std::size_t>(w1_size * w2_size), 0.0));
    for (int x = 0; x < nx; ++x)
        copy_rows[static_cast<std::size_t>(x)][static_cast<std::size_t>(x * w2_size)] = 1.0;

    auto eval_blend = [&](double t, CausalRegionPoint& pt) {
        SimplexProduct mix = from;
        for (std::size_t r = 0; r < mix.size(); ++r)
            for (std::size_t c = 0; c < mix[r].size(); ++c)
                mix[r][c] = (1.0 - t) * from[r][c] + t * copy_rows[r][c];
        const auto aux = aux_from_product(nx, w1_size, w2_size, mix);
        pt = evaluate_causal(source, aux, optimal_causal_decoders(source, aux));
        return pt.achieved.meets(target, tol);
    };

    // coarse ascending scan, then bisect the bracketing interval
    double lo = 0.0, hi = -1.0;
    CausalRegionPoint pt;
    for (int i = 0; i <= 10; ++i) {
        const double t = static_cast<double>(i) / 10.0;
        if (eval_blend(t, pt)) { hi = t; break; }
        lo = t;
    }
    if (hi < 0.0) return false;
    CausalRegionPoint best_pt;
    eval_blend(hi, best_pt);
    for (int it = 0; it < 12; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (eval_blend(mid, pt)) {
            hi = mid;
            best_pt = pt;
        } else {
            lo = mid;
        }
    }
    out = best_pt;
    return true;
}

std::vector<CausalRegionPoint> prune_frontier(std::vector<CausalRegionPoint> pts) {
    std::sort(pts.begin(), pts.end(), [](const CausalRegionPoint& a, const CausalRegionPoint& b) {
        if (a.r1 != b.r1) return a.r1 < b.r1;
        return a.delta_r < b.delta_r;
    });
    std::vector<CausalRegionPoint> out;
    double best_dr = kInf;
    for (auto& p : pts) {
        if (p.delta_r < best_dr - 1e-12) {
            best_dr = p.delta_r;
            out.push_back(std::move(p));
        }
    }
    return out;
}

} // namespace

std::vector<CausalRegionPoint> min_rates_causal(const SourceSpec& source,
                                                const DistortionQuad& target,
                                                const SearchConfig& cfg) {
    check_target_feasible(source, target, cfg.dist_tol);
    const int nx = source.x_size();
    const int w1_size = std::min(nx + 5, std::max(cfg.aux_cap, 2));
    const int w2_size = std::min(nx * w1_size + 2, std::max(cfg.aux_cap, 2));
    const std::vector<int> row_sizes(static_cast<std::size_t>(nx), w1_size * w2_size);

    const double lambdas[] = {1.0, 0.75, 0.5, 0.25, 0.0};
    const int nl = 5;
    const int total = nl * cfg.restarts;
    std::vector<FeasibleBest> found(static_cast<std::size_t>(total));

    parallel_indexed(total, cfg.workers, [&](int job) {
        const int li = job / cfg.restarts;
        const int restart = job % cfg.restarts;
        const double lambda = lambdas[li];
        Rng rng(derive_seed(cfg.seed, 0xCA05A1ULL, static_cast<std::uint64_t>(job)));

        FeasibleBest& best = found[static_cast<std::size_t>(job)];
        auto eval = [&](const SimplexProduct& rows) {
            const auto aux = aux_from_product(nx, w1_size, w2_size, rows);
            const auto pt = evaluate_causal(source, aux, optimal_causal_decoders(source, aux));
            const double rate_obj = lambda * pt.r1 + (1.0 - lambda) * pt.delta_r;
            if (pt.achieved.meets(target, cfg.dist_tol) &&
                (!best.has || rate_obj < best.objective)) {
                best.has = true;
                best.objective = rate_obj;
                best.point = pt;
            }
            return rate_obj + kPenalty * distortion_excess(pt.achieved, target, source);
        };

        SimplexProduct start;
        switch (restart % 4) {
        case 0: start = uniform_simplex_product(row_sizes); break; // identical rows: rate 0
        case 1: start = noisy_copy_product(nx, w1_size, w2_size, u01(rng)); break;
        case 2: start = noisy_copy_product(nx, w1_size, w2_size, 0.1 + 0.8 * u01(rng)); break;
        default: start = random_simplex_product(row_sizes, rng); break;
        }
        const auto end = anneal(std::move(start), cfg.steps, 0.5, 0.01, rng, eval);

        // repair pass: pull the best point (feasible or not) toward the copy
        // channel so every restart contributes a feasible candidate if one exists
        CausalRegionPoint repaired;
        if (copy_blend_repair(source, w1_size, w2_size, end, target, cfg.dist_tol, repaired)) {
            const double rate_obj = lambda * repaired.r1 + (1.0 - lambda) * repaired.delta_r;
            if (!best.has || rate_obj < best.objective) {
                best.has = true;
                best.objective = rate_obj;
                best.point = repaired;
            }
        }
    });

    std::vector<CausalRegionPoint> pts;
    for (auto& f : found)
        if (f.has) pts.push_back(std::move(f.point));
    if (pts.empty())
        throw InfeasibleTargetError("no feasible point found within the search budget");
    return prune_frontier(std::move(pts));
}

std::vector<CausalRegionPoint> brute_force_causal(const SourceSpec& source,
                                                  const DistortionQuad& target,
                                                  int w1_size, int w2_size,
                                                  const GridSpec& grid) {
    if (grid.steps < 1) throw InputError("brute_force_causal: steps must be >= 1");
    const int cells = w1_size * w2_size;
    // all compositions of grid.steps into `cells` parts
    std::vector<std::vector<double>> options;
    std::vector<int> comp(static_cast<std::size_t>(cells), 0);
    const double inv = 1.0 / static_cast<double>(grid.steps);
    std::function<void(int, int)> rec = [&](int cell, int left) {
        if (cell == cells - 1) {
            comp[static_cast<std::size_t>(cell)] = left;
            std::vector<double> row(static_cast<std::size_t>(cells));
            for (int c = 0; c < cells; ++c) row[static_cast<std::size_t>(c)] = comp[static_cast<std::size_t>(c)] * inv;
            options.push_back(std::move(row));
            return;
        }
        for (int k = 0; k <= left; ++k) {
            comp[static_cast<std::size_t>(cell)] = k;
            rec(cell + 1, left - k);
        }
    };
    rec(0, grid.steps);

    const int nx = source.x_size();
    double total = 1.0;
    for (int x = 0; x < nx; ++x) total *= static_cast<double>(options.size());
    if (total > static_cast<double>(grid.max_points))
        throw CapExceededError("brute_force_causal: grid has " + std::to_string(total) +
                               " points, gate is " + std::to_string(grid.max_points));

    std::vector<CausalRegionPoint> feasible;
    std::vector<std::size_t> pick(static_cast<std::size_t>(nx), 0);
    std::vector<std::vector<double>> rows(static_cast<std::size_t>(nx));
    for (;;) {
        for (int x = 0; x < nx; ++x) rows[static_cast<std::size_t>(x)] = options[pick[static_cast<std::size_t>(x)]];
        const auto aux = CausalAuxChannel::from_rows(nx, w1_size, w2_size, rows);
        const auto pt = evaluate_causal(source, aux, optimal_causal_decoders(source, aux));
        if (pt.achieved.meets(target, 1e-12)) feasible.push_back(pt);
        int x = nx - 1;
        for (; x >= 0; --x) {
            if (++pick[static_cast<std::size_t>(x)] < options.size()) break;
            pick[static_cast<std::size_t>(x)] = 0;
        }
        if (x < 0) break;
    }
    return feasible;
}

SeparationResult separation_check(const SourceSpec& source, const DistortionQuad& target,
                                  double rho1, double rho2, double c1, double c2,
                                  const SearchConfig& cfg) {
    if (rho1 < 0.0 || rho2 < 0.0 || c1 < 0.0 || c2 < 0.0)
        throw InputError("separation_check: bandwidth ratios and capacities must be nonnegative");
    check_target_feasible(source, target, cfg.dist_tol);

    SeparationResult res;
    res.rate1_budget = rho1 * c1;
    res.rate2_budget = rho2 * c2;
    const double b1 = res.rate1_budget, b2 = res.rate2_budget;

    const int nx = source.x_size();
    const int w1_size = std::min(nx + 5, std::max(cfg.aux_cap, 2));
    const int w2_size = std::min(nx * w1_size + 2, std::max(cfg.aux_cap, 2));
    const std::vector<int> row_sizes(static_cast<std::size_t>(nx), w1_size * w2_size);

    std::vector<FeasibleBest> found(static_cast<std::size_t>(cfg.restarts));
    parallel_indexed(cfg.restarts, cfg.workers, [&](int restart) {
        Rng rng(derive_seed(cfg.seed, 0x5EA9A7ULL, static_cast<std::uint64_t>(restart)));
        FeasibleBest& best = found[static_cast<std::size_t>(restart)];
        auto eval = [&](const SimplexProduct& rows) {
            const auto aux = aux_from_product(nx, w1_size, w2_size, rows);
            const auto pt = evaluate_causal(source, aux, optimal_causal_decoders(source, aux));
            const double rate_excess = std::max(0.0, pt.r1 - b1) + std::max(0.0, pt.delta_r - b2);
            if (pt.r1 <= b1 + 1e-9 && pt.delta_r <= b2 + 1e-9 &&
                pt.achieved.meets(target, cfg.dist_tol)) {
                const double margin = pt.r1 + pt.delta_r;
                if (!best.has || margin < best.objective) {
                    best.has = true;
                    best.objective = margin;
                    best.point = pt;
                }
            }
            return rate_excess + kPenalty * distortion_excess(pt.achieved, target, source);
        };
        SimplexProduct start;
        switch (restart % 3) {
        case 0: start = uniform_simplex_product(row_sizes); break;
        case 1: start = noisy_copy_product(nx, w1_size, w2_size, 0.1 + 0.8 * u01(rng)); break;
        default: start = random_simplex_product(row_sizes, rng); break;
        }
        anneal(std::move(start), cfg.steps, 0.5, 0.01, rng, eval);
    });

    for (auto& f : found) {
        if (f.has && (!res.achievable || f.objective < res.witness.r1 + res.witness.delta_r)) {
            res.achievable = true;
            res.witness = std::move(f.point);
        }
    }
    return res;
}

} // namespace sr
