#include "sr/channels.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "sr/errors.hpp"

namespace sr {

namespace {

constexpr double kTinyMass = 1e-300; // floor for output marginals inside logs
constexpr double kHuge = std::numeric_limits<double>::infinity();

double log2_ratio(double num, double den) { return std::log2(num / std::max(den, kTinyMass)); }

} // namespace

StateChannel::StateChannel(CondPmf w, JointPmf ps, double rho_)
    : p_b_given_as(std::move(w)), p_s(std::move(ps)), rho(rho_) {
    if (p_b_given_as.from_axes().size() != 2 || p_b_given_as.from_axes()[0].label != "A" ||
        p_b_given_as.from_axes()[1].label != "S")
        throw InputError("StateChannel: channel must condition on (A, S)");
    if (p_b_given_as.to_axes().size() != 1 || p_b_given_as.to_axes()[0].label != "B")
        throw InputError("StateChannel: channel output must be labeled B");
    if (p_s.rank() != 1 || p_s.axis(0).label != "S")
        throw InputError("StateChannel: state pmf must have the single axis S");
    if (p_s.axis(0).size != s_size())
        throw InputError("StateChannel: state pmf size does not match the channel");
    if (!(rho > 0.0)) throw InputError("StateChannel: rho must be positive");
}

StateChannel StateChannel::stateless(const CondPmf& p_b_given_a, double rho) {
    if (p_b_given_a.from_axes().size() != 1 || p_b_given_a.to_axes().size() != 1)
        throw InputError("StateChannel::stateless: need a single-input single-output channel");
    const int na = p_b_given_a.from_axes()[0].size;
    const int nb = p_b_given_a.to_axes()[0].size;
    CondPmf w({Alphabet(na, "A"), Alphabet(1, "S")}, {Alphabet(nb, "B")}, p_b_given_a.rows());
    return StateChannel(std::move(w), JointPmf({Alphabet(1, "S")}, {1.0}), rho);
}

namespace {

// Blahut iteration with a certified optimality gap. With throw_on_fail false
// the best lower bound found so far is returned instead; capacity stays a
// true lower bound and upper_bound a true upper bound either way.
CapacityResult ba_core(const CondPmf& w, double tol, int max_iter, bool throw_on_fail) {
    const int na = w.from_axes()[0].size;
    const int nb = w.to_axes()[0].size;

    std::vector<double> p(static_cast<std::size_t>(na), 1.0 / static_cast<double>(na));
    std::vector<double> r(static_cast<std::size_t>(nb));
    std::vector<double> d(static_cast<std::size_t>(na));

    CapacityResult res;
    double best_upper = kHuge;  // running min of max_a D(w_a || r)
    double best_lower = 0.0;   // running max of I(p; w), certified achievable
    res.input = p;
    for (int it = 1; it <= max_iter; ++it) {
        std::fill(r.begin(), r.end(), 0.0);
        for (int a = 0; a < na; ++a)
            for (int b = 0; b < nb; ++b)
                r[static_cast<std::size_t>(b)] += p[static_cast<std::size_t>(a)] *
                                                  w(static_cast<std::size_t>(a), static_cast<std::size_t>(b));
        double lower = 0.0, upper = 0.0, dmax = -kHuge;
        for (int a = 0; a < na; ++a) {
            double da = 0.0;
            for (int b = 0; b < nb; ++b) {
                const double m = w(static_cast<std::size_t>(a), static_cast<std::size_t>(b));
                if (m > 0.0) da += m * log2_ratio(m, r[static_cast<std::size_t>(b)]);
            }
            d[static_cast<std::size_t>(a)] = da;
            lower += p[static_cast<std::size_t>(a)] * da;
            upper = std::max(upper, da);
            dmax = std::max(dmax, da);
        }
        best_upper = std::min(best_upper, upper);
        if (lower > best_lower) {
            best_lower = lower;
            res.input = p;
        }
        res.iterations = it;
        res.capacity = best_lower;
        res.residual = std::max(best_upper - best_lower, 0.0);
        res.upper_bound = best_lower + res.residual;
        res.residual_history.push_back(res.residual);
        if (res.residual <= tol) return res;
        double z = 0.0;
        for (int a = 0; a < na; ++a) {
            auto& pa = p[static_cast<std::size_t>(a)];
            pa *= std::exp2(d[static_cast<std::size_t>(a)] - dmax);
            z += pa;
        }
        for (auto& pa : p) pa /= z;
    }
    if (throw_on_fail)
        throw ConvergenceError("dmc_capacity: residual " + std::to_string(res.residual) +
                               " above tol after " + std::to_string(max_iter) + " iterations");
    return res;
}

} // namespace

CapacityResult dmc_capacity(const CondPmf& w, double tol, int max_iter) {
    if (w.from_axes().size() != 1 || w.to_axes().size() != 1)
        throw InputError("dmc_capacity: channel must map one input axis to one output axis");
    if (!(tol > 0.0)) throw InputError("dmc_capacity: tol must be positive");
    if (max_iter < 1) throw InputError("dmc_capacity: max_iter must be >= 1");
    return ba_core(w, tol, max_iter, true);
}

namespace {

struct StrategyChannel {
    CondPmf w; // P(b | t) = sum_s P(s) P(b | t(s), s)
    std::vector<std::vector<int>> strategies;
};

// strategy t maps state s to input (t / na^s) % na
StrategyChannel strategy_channel(const StateChannel& ch, int strategy_cap) {
    const int na = ch.a_size(), ns = ch.s_size(), nb = ch.b_size();
    if (static_cast<double>(ns) * std::log2(static_cast<double>(na)) >
        std::log2(static_cast<double>(strategy_cap)) + 1e-12)
        throw CapExceededError("causal_state_capacity: strategy alphabet |A|^|S| exceeds " +
                               std::to_string(strategy_cap));
    int n_strat = 1;
    for (int s = 0; s < ns; ++s) n_strat *= na;

    std::vector<std::vector<int>> strategies(static_cast<std::size_t>(n_strat),
                                             std::vector<int>(static_cast<std::size_t>(ns)));
    std::vector<double> rows;
    rows.reserve(static_cast<std::size_t>(n_strat) * static_cast<std::size_t>(nb));
    for (int t = 0; t < n_strat; ++t) {
        int rem = t;
        for (int s = 0; s < ns; ++s) {
            strategies[static_cast<std::size_t>(t)][static_cast<std::size_t>(s)] = rem % na;
            rem /= na;
        }
        for (int b = 0; b < nb; ++b) {
            double m = 0.0;
            for (int s = 0; s < ns; ++s) {
                const int a = strategies[static_cast<std::size_t>(t)][static_cast<std::size_t>(s)];
                m += ch.p_s[static_cast<std::size_t>(s)] *
                     ch.p_b_given_as(static_cast<std::size_t>(a * ns + s), static_cast<std::size_t>(b));
            }
            rows.push_back(m);
        }
    }
    return {CondPmf({Alphabet(n_strat, "T")}, {Alphabet(nb, "B")}, std::move(rows)),
            std::move(strategies)};
}

} // namespace

CapacityResult causal_state_capacity(const StateChannel& ch, double tol, int max_iter,
                                     int strategy_cap) {
    StrategyChannel strat = strategy_channel(ch, strategy_cap);
    CapacityResult res = dmc_capacity(strat.w, tol, max_iter);
    res.strategies = std::move(strat.strategies);
    return res;
}

namespace {

// objective evaluator for the non-causal search; rows are
// [P(U|S=0..ns-1), then P(A|U=u,S=s) at index ns + u*ns + s]
double gp_objective(const StateChannel& ch, int nu, const SimplexProduct& rows) {
    const int na = ch.a_size(), ns = ch.s_size(), nb = ch.b_size();
    std::vector<double> pu(static_cast<std::size_t>(nu), 0.0);
    for (int s = 0; s < ns; ++s)
        for (int u = 0; u < nu; ++u)
            pu[static_cast<std::size_t>(u)] +=
                ch.p_s[static_cast<std::size_t>(s)] * rows[static_cast<std::size_t>(s)][static_cast<std::size_t>(u)];

    double ius = 0.0;
    for (int s = 0; s < ns; ++s)
        for (int u = 0; u < nu; ++u) {
            const double m = ch.p_s[static_cast<std::size_t>(s)] *
                             rows[static_cast<std::size_t>(s)][static_cast<std::size_t>(u)];
            if (m > 0.0) ius += m * log2_ratio(rows[static_cast<std::size_t>(s)][static_cast<std::size_t>(u)],
                                               pu[static_cast<std::size_t>(u)]);
        }

    // P(U=u, B=b) and the output marginal
    std::vector<double> pub(static_cast<std::size_t>(nu) * static_cast<std::size_t>(nb), 0.0);
    std::vector<double> pb(static_cast<std::size_t>(nb), 0.0);
    for (int u = 0; u < nu; ++u)
        for (int s = 0; s < ns; ++s) {
            const double mus = ch.p_s[static_cast<std::size_t>(s)] *
                               rows[static_cast<std::size_t>(s)][static_cast<std::size_t>(u)];
            if (mus == 0.0) continue;
            const auto& arow = rows[static_cast<std::size_t>(ns + u * ns + s)];
            for (int a = 0; a < na; ++a) {
                const double ma = arow[static_cast<std::size_t>(a)];
                if (ma == 0.0) continue;
                for (int b = 0; b < nb; ++b) {
                    const double m = mus * ma *
                                     ch.p_b_given_as(static_cast<std::size_t>(a * ns + s),
                                                     static_cast<std::size_t>(b));
                    pub[static_cast<std::size_t>(u * nb + b)] += m;
                    pb[static_cast<std::size_t>(b)] += m;
                }
            }
        }
    double iub = 0.0;
    for (int u = 0; u < nu; ++u)
        for (int b = 0; b < nb; ++b) {
            const double m = pub[static_cast<std::size_t>(u * nb + b)];
            if (m > 0.0)
                iub += m * log2_ratio(m, pu[static_cast<std::size_t>(u)] * pb[static_cast<std::size_t>(b)]);
        }
    return iub - ius;
}

} // namespace

CapacityResult gelfand_pinsker_capacity(const StateChannel& ch, int u_size,
                                        const SearchConfig& cfg) {
    const int na = ch.a_size(), ns = ch.s_size(), nb = ch.b_size();
    if (u_size < 0) throw InputError("gelfand_pinsker_capacity: u_size must be nonnegative");

    const double strat_bits = static_cast<double>(ns) * std::log2(static_cast<double>(na));
    int n_strat = 0;
    if (strat_bits <= 12.0 + 1e-12) {
        n_strat = 1;
        for (int s = 0; s < ns; ++s) n_strat *= na;
    }
    int nu = u_size;
    if (nu == 0) nu = (n_strat > 0 && n_strat <= 16) ? n_strat : 16;

    // state known at both ends; also caps the non-causal value. The slice
    // solves use their certified upper bounds, so a slow solve only loosens
    // the reported gap, never invalidates it.
    double ub = 0.0;
    for (int s = 0; s < ns; ++s) {
        std::vector<double> slice;
        slice.reserve(static_cast<std::size_t>(na) * static_cast<std::size_t>(nb));
        for (int a = 0; a < na; ++a)
            for (int b = 0; b < nb; ++b)
                slice.push_back(ch.p_b_given_as(static_cast<std::size_t>(a * ns + s),
                                                static_cast<std::size_t>(b)));
        CondPmf w({Alphabet(na, "A")}, {Alphabet(nb, "B")}, std::move(slice));
        ub += ch.p_s[static_cast<std::size_t>(s)] * ba_core(w, 1e-10, 20000, false).upper_bound;
    }
    ub = std::min(ub, std::log2(static_cast<double>(nb)));

    // warm starts: the causal solution (when the strategy letters embed into
    // U) and the state-oblivious solution on the averaged channel
    CapacityResult causal;
    const bool have_causal = n_strat > 0 && nu >= n_strat;
    if (have_causal) {
        StrategyChannel strat = strategy_channel(ch, n_strat);
        causal = ba_core(strat.w, 1e-10, 20000, false);
        causal.strategies = std::move(strat.strategies);
    }

    std::vector<double> avg_rows;
    for (int a = 0; a < na; ++a)
        for (int b = 0; b < nb; ++b) {
            double m = 0.0;
            for (int s = 0; s < ns; ++s)
                m += ch.p_s[static_cast<std::size_t>(s)] *
                     ch.p_b_given_as(static_cast<std::size_t>(a * ns + s), static_cast<std::size_t>(b));
            avg_rows.push_back(m);
        }
    CondPmf avg({Alphabet(na, "A")}, {Alphabet(nb, "B")}, std::move(avg_rows));
    const CapacityResult oblivious = ba_core(avg, 1e-10, 20000, false);

    std::vector<int> row_sizes;
    for (int s = 0; s < ns; ++s) row_sizes.push_back(nu);
    for (int i = 0; i < nu * ns; ++i) row_sizes.push_back(na);

    auto delta_row = [](int cells, int at) {
        std::vector<double> row(static_cast<std::size_t>(cells), 0.0);
        row[static_cast<std::size_t>(at)] = 1.0;
        return row;
    };
    auto padded = [&](const std::vector<double>& p) {
        std::vector<double> row(static_cast<std::size_t>(nu), 0.0);
        for (std::size_t i = 0; i < p.size() && i < row.size(); ++i) row[i] = p[i];
        project_to_simplex(row); // renormalizes when nu < |p|
        return row;
    };

    struct GpBest {
        double value = -kHuge;
        SimplexProduct rows;
    };
    std::vector<GpBest> found(static_cast<std::size_t>(cfg.restarts));

    parallel_indexed(cfg.restarts, cfg.workers, [&](int restart) {
        Rng rng(derive_seed(cfg.seed, 0x6E1F9ULL, static_cast<std::uint64_t>(restart)));
        SimplexProduct start;
        if (restart == 0 && have_causal) {
            for (int s = 0; s < ns; ++s) start.push_back(padded(causal.input));
            for (int u = 0; u < nu; ++u)
                for (int s = 0; s < ns; ++s) {
                    const int a = u < n_strat
                                      ? causal.strategies[static_cast<std::size_t>(u)][static_cast<std::size_t>(s)]
                                      : 0;
                    start.push_back(delta_row(na, a));
                }
        } else if (restart == 1 || (restart == 0 && !have_causal)) {
            for (int s = 0; s < ns; ++s) start.push_back(padded(oblivious.input));
            for (int u = 0; u < nu; ++u)
                for (int s = 0; s < ns; ++s) start.push_back(delta_row(na, u % na));
        } else {
            start = random_simplex_product(row_sizes, rng);
        }
        GpBest& best = found[static_cast<std::size_t>(restart)];
        auto eval = [&](const SimplexProduct& rows) {
            const double v = gp_objective(ch, nu, rows);
            if (v > best.value) {
                best.value = v;
                best.rows = rows;
            }
            return -v;
        };
        anneal(std::move(start), cfg.steps, 0.5, 0.01, rng, eval);
    });

    GpBest merged;
    for (auto& f : found)
        if (f.value > merged.value) merged = std::move(f);

    CapacityResult res;
    res.lower_bound_only = true;
    res.upper_bound = ub;
    res.iterations = cfg.restarts;
    if (merged.value <= 0.0) {
        // a single U letter always attains zero
        merged.value = 0.0;
        merged.rows.clear();
        for (int s = 0; s < ns; ++s) merged.rows.push_back(delta_row(nu, 0));
        for (int i = 0; i < nu * ns; ++i) merged.rows.push_back(delta_row(na, 0));
    }
    res.capacity = merged.value;
    res.residual = std::max(ub - res.capacity, 0.0);

    std::vector<double> u_rows, a_rows;
    for (int s = 0; s < ns; ++s)
        u_rows.insert(u_rows.end(), merged.rows[static_cast<std::size_t>(s)].begin(),
                      merged.rows[static_cast<std::size_t>(s)].end());
    // stored (u, s) row-major to match the (U, S) conditioning axes
    for (int u = 0; u < nu; ++u)
        for (int s = 0; s < ns; ++s) {
            const auto& r = merged.rows[static_cast<std::size_t>(ns + u * ns + s)];
            a_rows.insert(a_rows.end(), r.begin(), r.end());
        }
    res.u_given_s = CondPmf({Alphabet(ns, "S")}, {Alphabet(nu, "U")}, std::move(u_rows));
    res.a_given_us = CondPmf({Alphabet(nu, "U"), Alphabet(ns, "S")}, {Alphabet(na, "A")},
                             std::move(a_rows));
    res.input.assign(static_cast<std::size_t>(nu), 0.0);
    for (int s = 0; s < ns; ++s)
        for (int u = 0; u < nu; ++u)
            res.input[static_cast<std::size_t>(u)] +=
                ch.p_s[static_cast<std::size_t>(s)] *
                merged.rows[static_cast<std::size_t>(s)][static_cast<std::size_t>(u)];
    return res;
}

StagePair stage_capacity_pair(const StateChannel& ch1, const StateChannel& ch2, StateMode mode,
                              const SearchConfig& cfg, double tol, int max_iter) {
    StagePair out;
    out.rho1 = ch1.rho;
    out.rho2 = ch2.rho;
    if (mode == StateMode::Causal) {
        out.c1 = causal_state_capacity(ch1, tol, max_iter);
        out.c2 = causal_state_capacity(ch2, tol, max_iter);
    } else {
        out.c1 = gelfand_pinsker_capacity(ch1, 0, cfg);
        out.c2 = gelfand_pinsker_capacity(ch2, 0, cfg);
    }
    return out;
}

} // namespace sr
