#include "sr/sampling.hpp"

#include <algorithm>
#include <cmath>

#include "sr/errors.hpp"

namespace sr {

DiscreteSampler::DiscreteSampler(const std::vector<double>& pmf) {
    cdf_.resize(pmf.size());
    double acc = 0.0;
    for (std::size_t i = 0; i < pmf.size(); ++i) {
        acc += pmf[i];
        cdf_[i] = acc;
    }
    if (!cdf_.empty()) cdf_.back() = 1.0; // guard against rounding at the top
}

int DiscreteSampler::operator()(Rng& rng) const {
    const double u = u01(rng);
    auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
    if (it == cdf_.end()) --it;
    return static_cast<int>(it - cdf_.begin());
}

std::vector<Seq> sample_iid(const JointPmf& p, int n, std::uint64_t seed) {
    if (n < 0) throw InputError("sample_iid: negative length");
    Rng rng(seed);
    DiscreteSampler draw(p.mass());
    std::vector<Seq> out(static_cast<std::size_t>(p.rank()), Seq(static_cast<std::size_t>(n)));
    std::vector<int> idx(static_cast<std::size_t>(p.rank()));
    for (int i = 0; i < n; ++i) {
        const auto flat = static_cast<std::size_t>(draw(rng));
        p.unflatten(flat, idx);
        for (int a = 0; a < p.rank(); ++a)
            out[static_cast<std::size_t>(a)][static_cast<std::size_t>(i)] = idx[static_cast<std::size_t>(a)];
    }
    return out;
}

std::vector<double> joint_type(const std::vector<const Seq*>& seqs,
                               const std::vector<int>& sizes) {
    if (seqs.empty() || seqs.size() != sizes.size())
        throw InputError("joint_type: sequence/alphabet count mismatch");
    const std::size_t n = seqs[0]->size();
    for (const Seq* s : seqs)
        if (s->size() != n) throw InputError("joint_type: sequences differ in length");

    std::size_t cells = 1;
    for (int s : sizes) cells *= static_cast<std::size_t>(s);
    std::vector<double> type(cells, 0.0);
    if (n == 0) return type;

    for (std::size_t i = 0; i < n; ++i) {
        std::size_t flat = 0;
        for (std::size_t a = 0; a < seqs.size(); ++a)
            flat = flat * static_cast<std::size_t>(sizes[a]) +
                   static_cast<std::size_t>((*seqs[a])[i]);
        type[flat] += 1.0;
    }
    const double inv = 1.0 / static_cast<double>(n);
    for (auto& t : type) t *= inv;
    return type;
}

bool is_jointly_typical(const std::vector<const Seq*>& seqs, const JointPmf& p, double delta) {
    std::vector<int> sizes;
    for (int a = 0; a < p.rank(); ++a) sizes.push_back(p.axis(a).size);
    const auto type = joint_type(seqs, sizes);
    for (std::size_t c = 0; c < type.size(); ++c) {
        const double pc = p[c];
        if (pc == 0.0) {
            if (type[c] > 0.0) return false;
        } else if (std::abs(type[c] - pc) > delta) {
            return false;
        }
    }
    return true;
}

} // namespace sr
