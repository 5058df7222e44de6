#pragma once

// Independent reference implementations used only by tests. These
// deliberately avoid the library's solver paths: the rate-distortion curve
// comes from alternating minimization over the reconstruction channel, and
// decoder tables from exhaustive enumeration.

#include <cmath>
#include <limits>
#include <vector>

#include "sr/distortion.hpp"
#include "sr/pmf.hpp"

namespace oracles {

inline double h2(double p) {
    if (p <= 0.0 || p >= 1.0) return 0.0;
    return -p * std::log2(p) - (1.0 - p) * std::log2(1.0 - p);
}

// Classical R(D) for a memoryless source via alternating minimization at a
// fixed Lagrange multiplier s <= 0 (rate in bits). Returns (rate, distortion)
// at the stationary point.
inline std::pair<double, double> rd_at_multiplier(const std::vector<double>& px,
                                                  const sr::DistortionMatrix& d, double s,
                                                  int iters = 3000) {
    const int nx = static_cast<int>(px.size());
    const int nh = d.xhat_size();
    std::vector<double> q(static_cast<std::size_t>(nh), 1.0 / nh); // output marginal
    std::vector<double> cond(static_cast<std::size_t>(nx * nh), 0.0);
    for (int it = 0; it < iters; ++it) {
        for (int x = 0; x < nx; ++x) {
            double norm = 0.0;
            for (int h = 0; h < nh; ++h) {
                const double v = q[static_cast<std::size_t>(h)] * std::exp2(s * d(x, h));
                cond[static_cast<std::size_t>(x * nh + h)] = v;
                norm += v;
            }
            for (int h = 0; h < nh; ++h) cond[static_cast<std::size_t>(x * nh + h)] /= norm;
        }
        for (int h = 0; h < nh; ++h) {
            double m = 0.0;
            for (int x = 0; x < nx; ++x)
                m += px[static_cast<std::size_t>(x)] * cond[static_cast<std::size_t>(x * nh + h)];
            q[static_cast<std::size_t>(h)] = m;
        }
    }
    double rate = 0.0, dist = 0.0;
    for (int x = 0; x < nx; ++x)
        for (int h = 0; h < nh; ++h) {
            const double joint = px[static_cast<std::size_t>(x)] * cond[static_cast<std::size_t>(x * nh + h)];
            if (joint > 0.0)
                rate += joint * std::log2(cond[static_cast<std::size_t>(x * nh + h)] /
                                          q[static_cast<std::size_t>(h)]);
            dist += joint * d(x, h);
        }
    return {std::max(rate, 0.0), dist};
}

// R(D) by bisection on the multiplier.
inline double rate_distortion(const std::vector<double>& px, const sr::DistortionMatrix& d,
                              double target_d) {
    double dmin = 0.0;
    for (int x = 0; x < d.x_size(); ++x) {
        double best = std::numeric_limits<double>::infinity();
        for (int h = 0; h < d.xhat_size(); ++h) best = std::min(best, d(x, h));
        dmin += px[static_cast<std::size_t>(x)] * best;
    }
    if (target_d <= dmin + 1e-12) target_d = dmin + 1e-12;

    double lo = -400.0, hi = 0.0; // distortion(s) increases toward s = 0
    auto dist_at = [&](double s) { return rd_at_multiplier(px, d, s).second; };
    if (dist_at(hi) <= target_d) return 0.0;
    for (int it = 0; it < 80; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (dist_at(mid) > target_d) hi = mid; else lo = mid;
    }
    return rd_at_multiplier(px, d, lo).first;
}

// Best decode table by brute force over all maps (cells -> reconstruction),
// judged by exact expected distortion. weight[cell][x] are joint masses.
inline double exhaustive_best_distortion(const std::vector<std::vector<double>>& weight,
                                         const sr::DistortionMatrix& d) {
    // each cell is independent, but enumerate fully anyway at tiny sizes to
    // keep this oracle structurally different from the per-cell argmin
    const std::size_t cells = weight.size();
    const int nh = d.xhat_size();
    std::vector<int> table(cells, 0);
    double best = std::numeric_limits<double>::infinity();
    for (;;) {
        double total = 0.0;
        for (std::size_t c = 0; c < cells; ++c)
            for (int x = 0; x < d.x_size(); ++x)
                total += weight[c][static_cast<std::size_t>(x)] * d(x, table[c]);
        best = std::min(best, total);
        std::size_t c = 0;
        for (; c < cells; ++c) {
            if (++table[c] < nh) break;
            table[c] = 0;
        }
        if (c == cells) break;
    }
    return best;
}

} // namespace oracles
