#include "sr/info.hpp"

#include <cmath>

#include "sr/errors.hpp"

namespace sr {

namespace {

double entropy_raw(const std::vector<double>& mass) {
    double h = 0.0;
    for (double m : mass)
        if (m > 0.0) h -= m * std::log2(m);
    return h;
}

std::vector<int> concat(std::span<const int> a, std::span<const int> b) {
    std::vector<int> out(a.begin(), a.end());
    out.insert(out.end(), b.begin(), b.end());
    return out;
}

} // namespace

double entropy(const JointPmf& p) { return entropy_raw(p.mass()); }

double entropy_of(const JointPmf& p, std::span<const int> axes) {
    if (static_cast<int>(axes.size()) == p.rank()) {
        bool identity = true;
        for (int i = 0; i < p.rank(); ++i)
            if (axes[static_cast<std::size_t>(i)] != i) { identity = false; break; }
        if (identity) return entropy(p);
    }
    return entropy(p.marginal(axes));
}

double conditional_entropy(const JointPmf& p, std::span<const int> a, std::span<const int> b) {
    auto ab = concat(a, b);
    return entropy_of(p, ab) - entropy_of(p, b);
}

double mutual_information(const JointPmf& p) {
    if (p.rank() != 2) throw InputError("mutual_information: expects a two-axis joint");
    const int a[] = {0}, b[] = {1};
    return mi_sets(p, a, b);
}

double conditional_mutual_information(const JointPmf& p) {
    if (p.rank() != 3) throw InputError("conditional_mutual_information: expects a three-axis joint");
    const int a[] = {0}, b[] = {1}, c[] = {2};
    return cmi_sets(p, a, b, c);
}

double mi_sets(const JointPmf& p, std::span<const int> a, std::span<const int> b) {
    auto ab = concat(a, b);
    // I(A;B) = H(A) + H(B) - H(A,B); clamp tiny negatives from rounding
    double v = entropy_of(p, a) + entropy_of(p, b) - entropy_of(p, ab);
    return v < 0.0 && v > -1e-12 ? 0.0 : v;
}

double cmi_sets(const JointPmf& p, std::span<const int> a, std::span<const int> b,
                std::span<const int> c) {
    if (c.empty()) return mi_sets(p, a, b);
    auto ac = concat(a, c);
    auto bc = concat(b, c);
    auto abc = concat(a, bc);
    double v = entropy_of(p, ac) + entropy_of(p, bc) - entropy_of(p, c) - entropy_of(p, abc);
    return v < 0.0 && v > -1e-12 ? 0.0 : v;
}

bool is_markov_chain(const JointPmf& p, double tol) {
    if (p.rank() != 3) throw InputError("is_markov_chain: expects a three-axis joint");
    const int a[] = {0}, b[] = {1}, c[] = {2};
    return cmi_sets(p, a, c, b) <= tol;
}

} // namespace sr
