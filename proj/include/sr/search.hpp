#pragma once

#include <cstdint>
#include <functional>
#include <thread>
#include <vector>

#include "sr/rng.hpp"

namespace sr {

// Knobs shared by all randomized searches. Results are deterministic in
// (seed, restarts, steps) regardless of `workers`: each restart draws from
// its own derived seed and results are merged in restart order.
struct SearchConfig {
    int restarts = 16;
    int steps = 400;
    std::uint64_t seed = 1;
    int workers = 1;
    double dist_tol = 1e-9; // feasibility slack on distortion targets
    int aux_cap = 4;        // cap on default auxiliary alphabet sizes
};

// A point in a product of probability simplices (one row per conditioning
// cell of whatever channel is being optimized).
using SimplexProduct = std::vector<std::vector<double>>;

// Clamp negatives to zero and renormalize; all-zero rows become uniform.
void project_to_simplex(std::vector<double>& row);

std::vector<double> random_simplex_row(int cells, Rng& rng);
SimplexProduct random_simplex_product(const std::vector<int>& row_sizes, Rng& rng);
SimplexProduct uniform_simplex_product(const std::vector<int>& row_sizes);

// Standard normal via Box-Muller on the portable u01 mapping.
double gauss(Rng& rng);

// Greedy annealing from `start`: proposes row perturbations with a step size
// decaying geometrically from step_hi to step_lo, keeps strict improvements
// of eval (lower is better). eval is called on every candidate, including the
// start, so callers can collect side information.
template <class Eval>
SimplexProduct anneal(SimplexProduct start, int steps, double step_hi, double step_lo,
                      Rng& rng, Eval&& eval) {
    double best = eval(start);
    SimplexProduct cur = start;
    if (steps <= 0) return cur;
    const double decay = std::pow(step_lo / step_hi, 1.0 / static_cast<double>(steps));
    double step = step_hi;
    for (int t = 0; t < steps; ++t, step *= decay) {
        SimplexProduct cand = cur;
        const double move = u01(rng);
        if (move < 0.10) {
            // fresh redraw of one row: basin hopping
            auto& row = cand[static_cast<std::size_t>(rng() % cand.size())];
            row = random_simplex_row(static_cast<int>(row.size()), rng);
        } else if (move < 0.25) {
            // perturb every row
            for (auto& row : cand) {
                for (auto& v : row) v += step * gauss(rng);
                project_to_simplex(row);
            }
        } else {
            auto& row = cand[static_cast<std::size_t>(rng() % cand.size())];
            for (auto& v : row) v += step * gauss(rng);
            project_to_simplex(row);
        }
        const double val = eval(cand);
        if (val < best) {
            best = val;
            cur = std::move(cand);
        }
    }
    return cur;
}

// Runs fn(0..count-1), splitting indices over up to `workers` threads.
// Callers keep per-index state, so scheduling cannot affect results.
void parallel_indexed(int count, int workers, const std::function<void(int)>& fn);

} // namespace sr
