#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "sr/alphabet.hpp"
#include "sr/errors.hpp"

namespace sr {

// Masses must sum to 1 within this tolerance and be nonnegative.
inline constexpr double kPmfTol = 1e-12;

// Joint pmf over an ordered list of finite axes, stored flat in row-major
// order (axis 0 slowest, last axis fastest). Axis labels must be distinct;
// compositions match conditioning variables by label.
class JointPmf {
public:
    JointPmf() = default;
    JointPmf(std::vector<Alphabet> axes, std::vector<double> mass);

    int rank() const { return static_cast<int>(axes_.size()); }
    const Alphabet& axis(int i) const { return axes_.at(static_cast<std::size_t>(i)); }
    const std::vector<Alphabet>& axes() const { return axes_; }
    std::size_t cells() const { return mass_.size(); }
    const std::vector<double>& mass() const { return mass_; }

    double operator[](std::size_t flat) const { return mass_[flat]; }
    double at(std::span<const int> idx) const { return mass_[flat_index(idx)]; }

    std::size_t stride(int i) const { return strides_[static_cast<std::size_t>(i)]; }
    std::size_t flat_index(std::span<const int> idx) const;
    void unflatten(std::size_t flat, std::span<int> idx) const;

    // Position of the axis with the given label; throws if absent.
    int axis_index(const std::string& label) const;

    // Marginal over the axes listed in `keep`, in the order given. Regrouping
    // (reordering) is allowed; discarded axes are summed out.
    JointPmf marginal(std::span<const int> keep) const;

private:
    std::vector<Alphabet> axes_;
    std::vector<double> mass_;
    std::vector<std::size_t> strides_;
};

// Conditional pmf P(to | from), a row-stochastic matrix with one row per
// joint realization of `from` (row-major over from-axes) and one column per
// joint realization of `to` (row-major over to-axes).
class CondPmf {
public:
    CondPmf() = default;
    CondPmf(std::vector<Alphabet> from, std::vector<Alphabet> to, std::vector<double> rows);

    const std::vector<Alphabet>& from_axes() const { return from_; }
    const std::vector<Alphabet>& to_axes() const { return to_; }
    std::size_t from_cells() const { return rows_.size() / to_cells(); }
    std::size_t to_cells() const { return to_cells_; }
    double operator()(std::size_t from_flat, std::size_t to_flat) const {
        return rows_[from_flat * to_cells_ + to_flat];
    }
    const std::vector<double>& rows() const { return rows_; }

private:
    std::vector<Alphabet> from_;
    std::vector<Alphabet> to_;
    std::vector<double> rows_;
    std::size_t to_cells_ = 1;
};

// P(from-axes of px, to-axes of cond) = px * cond, matching cond's
// conditioning variables against px's axes by label. Result axes are px's
// axes followed by cond's output axes. Marginalizing the result back onto
// px's axes reproduces px exactly.
JointPmf compose(const JointPmf& px, const CondPmf& cond);

// Convenience wrapper around JointPmf::marginal.
JointPmf marginalize(const JointPmf& p, std::span<const int> keep);

// Extract P(to | given) from a joint pmf; rows with zero conditioning mass
// are filled uniformly so the result is always row-stochastic.
CondPmf condition(const JointPmf& p, std::span<const int> given, std::span<const int> to);

} // namespace sr
