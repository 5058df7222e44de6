#include "sr/search.hpp"

#include <atomic>
#include <cmath>

namespace sr {

void project_to_simplex(std::vector<double>& row) {
    double sum = 0.0;
    for (auto& v : row) {
        if (v < 0.0) v = 0.0;
        sum += v;
    }
    if (sum <= 0.0) {
        const double u = 1.0 / static_cast<double>(row.size());
        for (auto& v : row) v = u;
        return;
    }
    for (auto& v : row) v /= sum;
}

std::vector<double> random_simplex_row(int cells, Rng& rng) {
    std::vector<double> row(static_cast<std::size_t>(cells));
    double sum = 0.0;
    for (auto& v : row) {
        v = exp1(rng);
        sum += v;
    }
    for (auto& v : row) v /= sum;
    return row;
}

SimplexProduct random_simplex_product(const std::vector<int>& row_sizes, Rng& rng) {
    SimplexProduct p;
    p.reserve(row_sizes.size());
    for (int k : row_sizes) p.push_back(random_simplex_row(k, rng));
    return p;
}

SimplexProduct uniform_simplex_product(const std::vector<int>& row_sizes) {
    SimplexProduct p;
    for (int k : row_sizes)
        p.emplace_back(static_cast<std::size_t>(k), 1.0 / static_cast<double>(k));
    return p;
}

double gauss(Rng& rng) {
    double u1;
    do { u1 = u01(rng); } while (u1 <= 0.0);
    const double u2 = u01(rng);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * 3.141592653589793 * u2);
}

void parallel_indexed(int count, int workers, const std::function<void(int)>& fn) {
    if (workers <= 1 || count <= 1) {
        for (int i = 0; i < count; ++i) fn(i);
        return;
    }
    std::atomic<int> next{0};
    auto worker = [&]() {
        for (;;) {
            const int i = next.fetch_add(1);
            if (i >= count) return;
            fn(i);
        }
    };
    const int nthreads = std::min(workers, count);
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(nthreads));
    for (int t = 0; t < nthreads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
}

} // namespace sr
