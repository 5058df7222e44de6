#include "sr/pmf.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

namespace sr {

namespace {

std::vector<std::size_t> make_strides(const std::vector<Alphabet>& axes) {
    std::vector<std::size_t> s(axes.size(), 1);
    for (int i = static_cast<int>(axes.size()) - 2; i >= 0; --i)
        s[i] = s[i + 1] * static_cast<std::size_t>(axes[i + 1].size);
    return s;
}

std::size_t total_cells(const std::vector<Alphabet>& axes) {
    std::size_t n = 1;
    for (const auto& a : axes) n *= static_cast<std::size_t>(a.size);
    return n;
}

void check_distribution(const std::vector<double>& mass, const char* what) {
    double sum = 0.0;
    for (double m : mass) {
        if (!(m >= 0.0))
            throw InputError(std::string(what) + ": negative or non-finite mass");
        sum += m;
    }
    if (std::abs(sum - 1.0) > kPmfTol)
        throw InputError(std::string(what) + ": masses sum to " + std::to_string(sum));
}

void check_labels_distinct(const std::vector<Alphabet>& axes, const char* what) {
    std::set<std::string> seen;
    for (const auto& a : axes)
        if (!seen.insert(a.label).second)
            throw InputError(std::string(what) + ": duplicate axis label '" + a.label + "'");
}

} // namespace

JointPmf::JointPmf(std::vector<Alphabet> axes, std::vector<double> mass)
    : axes_(std::move(axes)), mass_(std::move(mass)) {
    if (axes_.empty()) throw InputError("JointPmf: needs at least one axis");
    check_labels_distinct(axes_, "JointPmf");
    if (mass_.size() != total_cells(axes_))
        throw InputError("JointPmf: mass size does not match axis sizes");
    check_distribution(mass_, "JointPmf");
    strides_ = make_strides(axes_);
}

std::size_t JointPmf::flat_index(std::span<const int> idx) const {
    std::size_t flat = 0;
    for (std::size_t i = 0; i < axes_.size(); ++i) flat += strides_[i] * static_cast<std::size_t>(idx[i]);
    return flat;
}

void JointPmf::unflatten(std::size_t flat, std::span<int> idx) const {
    for (std::size_t i = 0; i < axes_.size(); ++i) {
        idx[i] = static_cast<int>(flat / strides_[i]);
        flat %= strides_[i];
    }
}

int JointPmf::axis_index(const std::string& label) const {
    for (std::size_t i = 0; i < axes_.size(); ++i)
        if (axes_[i].label == label) return static_cast<int>(i);
    throw InputError("JointPmf: no axis labeled '" + label + "'");
}

JointPmf JointPmf::marginal(std::span<const int> keep) const {
    if (keep.empty()) throw InputError("marginal: keep list is empty");
    std::vector<Alphabet> out_axes;
    std::vector<std::size_t> out_strides;
    for (int k : keep) {
        if (k < 0 || k >= rank()) throw InputError("marginal: axis index out of range");
        out_axes.push_back(axes_[static_cast<std::size_t>(k)]);
        out_strides.push_back(strides_[static_cast<std::size_t>(k)]);
    }
    check_labels_distinct(out_axes, "marginal");

    std::vector<double> out(total_cells(out_axes), 0.0);
    const auto out_local = make_strides(out_axes);
    std::vector<int> idx(axes_.size());
    for (std::size_t flat = 0; flat < mass_.size(); ++flat) {
        if (mass_[flat] == 0.0) continue;
        std::size_t o = 0;
        for (std::size_t i = 0; i < out_strides.size(); ++i)
            o += out_local[i] * (flat / out_strides[i] % static_cast<std::size_t>(out_axes[i].size));
        out[o] += mass_[flat];
    }
    // renormalization is deliberately absent: marginals of a valid pmf sum to
    // 1 up to accumulated rounding, which stays far below kPmfTol here
    double sum = std::accumulate(out.begin(), out.end(), 0.0);
    if (std::abs(sum - 1.0) > kPmfTol)
        for (auto& m : out) m /= sum;
    return JointPmf(std::move(out_axes), std::move(out));
}

CondPmf::CondPmf(std::vector<Alphabet> from, std::vector<Alphabet> to, std::vector<double> rows)
    : from_(std::move(from)), to_(std::move(to)), rows_(std::move(rows)) {
    if (from_.empty() || to_.empty()) throw InputError("CondPmf: needs from and to axes");
    {
        auto all = from_;
        all.insert(all.end(), to_.begin(), to_.end());
        check_labels_distinct(all, "CondPmf");
    }
    to_cells_ = total_cells(to_);
    const std::size_t nrows = total_cells(from_);
    if (rows_.size() != nrows * to_cells_)
        throw InputError("CondPmf: row data size does not match axis sizes");
    for (std::size_t r = 0; r < nrows; ++r) {
        double sum = 0.0;
        for (std::size_t c = 0; c < to_cells_; ++c) {
            double m = rows_[r * to_cells_ + c];
            if (!(m >= 0.0)) throw InputError("CondPmf: negative or non-finite mass");
            sum += m;
        }
        if (std::abs(sum - 1.0) > kPmfTol)
            throw InputError("CondPmf: row " + std::to_string(r) + " sums to " + std::to_string(sum));
    }
}

JointPmf compose(const JointPmf& px, const CondPmf& cond) {
    // locate cond's conditioning axes inside px by label
    std::vector<int> from_pos;
    for (const auto& a : cond.from_axes()) {
        int i = px.axis_index(a.label);
        if (px.axis(i).size != a.size)
            throw InputError("compose: axis '" + a.label + "' size mismatch");
        from_pos.push_back(i);
    }

    std::vector<Alphabet> out_axes = px.axes();
    out_axes.insert(out_axes.end(), cond.to_axes().begin(), cond.to_axes().end());

    // strides of the conditioning tuple inside cond's row indexing
    std::vector<std::size_t> from_strides(from_pos.size(), 1);
    for (int i = static_cast<int>(from_pos.size()) - 2; i >= 0; --i)
        from_strides[i] = from_strides[i + 1] *
                          static_cast<std::size_t>(cond.from_axes()[static_cast<std::size_t>(i) + 1].size);

    const std::size_t tcells = cond.to_cells();
    std::vector<double> out(px.cells() * tcells, 0.0);
    for (std::size_t flat = 0; flat < px.cells(); ++flat) {
        const double base = px[flat];
        std::size_t row = 0;
        for (std::size_t i = 0; i < from_pos.size(); ++i) {
            const auto pos = static_cast<std::size_t>(from_pos[i]);
            row += from_strides[i] *
                   (flat / px.stride(static_cast<int>(pos)) % static_cast<std::size_t>(px.axis(static_cast<int>(pos)).size));
        }
        if (base == 0.0) continue;
        for (std::size_t t = 0; t < tcells; ++t) out[flat * tcells + t] = base * cond(row, t);
    }
    return JointPmf(std::move(out_axes), std::move(out));
}

JointPmf marginalize(const JointPmf& p, std::span<const int> keep) {
    return p.marginal(keep);
}

CondPmf condition(const JointPmf& p, std::span<const int> given, std::span<const int> to) {
    std::vector<int> all(given.begin(), given.end());
    all.insert(all.end(), to.begin(), to.end());
    JointPmf joint = p.marginal(all);
    std::vector<Alphabet> from_axes, to_axes;
    for (int g : given) from_axes.push_back(p.axis(g));
    for (int t : to) to_axes.push_back(p.axis(t));

    std::size_t fcells = 1, tcells = 1;
    for (const auto& a : from_axes) fcells *= static_cast<std::size_t>(a.size);
    for (const auto& a : to_axes) tcells *= static_cast<std::size_t>(a.size);

    std::vector<double> rows(fcells * tcells, 0.0);
    for (std::size_t f = 0; f < fcells; ++f) {
        double denom = 0.0;
        for (std::size_t t = 0; t < tcells; ++t) denom += joint[f * tcells + t];
        if (denom <= 0.0) {
            for (std::size_t t = 0; t < tcells; ++t) rows[f * tcells + t] = 1.0 / static_cast<double>(tcells);
        } else {
            for (std::size_t t = 0; t < tcells; ++t) rows[f * tcells + t] = joint[f * tcells + t] / denom;
        }
    }
    return CondPmf(std::move(from_axes), std::move(to_axes), std::move(rows));
}

} // namespace sr
