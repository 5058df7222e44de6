#pragma once

#include <limits>
#include <vector>

#include "sr/alphabet.hpp"
#include "sr/pmf.hpp"

namespace sr {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

// Single-letter distortion d(x, xhat) >= 0, rows indexed by the source
// symbol, columns by the reconstruction symbol. Reconstruction alphabets may
// differ per decoder, hence per-matrix column counts.
class DistortionMatrix {
public:
    DistortionMatrix() = default;
    DistortionMatrix(int x_size, int xhat_size, std::vector<double> values);

    static DistortionMatrix hamming(int n);

    int x_size() const { return x_size_; }
    int xhat_size() const { return xhat_size_; }
    double operator()(int x, int xhat) const {
        return values_[static_cast<std::size_t>(x) * static_cast<std::size_t>(xhat_size_) +
                       static_cast<std::size_t>(xhat)];
    }
    const std::vector<double>& values() const { return values_; }
    double max_value() const;

private:
    int x_size_ = 0, xhat_size_ = 0;
    std::vector<double> values_;
};

// One requirement or achieved value per decoder/stage. kInf means
// unconstrained.
struct DistortionQuad {
    double dy1 = kInf, dz1 = kInf, dy2 = kInf, dz2 = kInf;

    bool meets(const DistortionQuad& target, double tol) const {
        return dy1 <= target.dy1 + tol && dz1 <= target.dz1 + tol &&
               dy2 <= target.dy2 + tol && dz2 <= target.dz2 + tol;
    }
};

// E d(X, Xhat) for a two-axis joint over (source, reconstruction).
double expected_distortion(const JointPmf& p_x_xhat, const DistortionMatrix& d);

} // namespace sr
