#include "sr/distortion.hpp"

#include <algorithm>

#include "sr/errors.hpp"

namespace sr {

DistortionMatrix::DistortionMatrix(int x_size, int xhat_size, std::vector<double> values)
    : x_size_(x_size), xhat_size_(xhat_size), values_(std::move(values)) {
    if (x_size_ < 1 || xhat_size_ < 1)
        throw InputError("DistortionMatrix: alphabet sizes must be >= 1");
    if (values_.size() != static_cast<std::size_t>(x_size_) * static_cast<std::size_t>(xhat_size_))
        throw InputError("DistortionMatrix: value count does not match dimensions");
    for (double v : values_)
        if (!(v >= 0.0) || v == kInf)
            throw InputError("DistortionMatrix: entries must be finite and nonnegative");
}

DistortionMatrix DistortionMatrix::hamming(int n) {
    std::vector<double> v(static_cast<std::size_t>(n) * static_cast<std::size_t>(n), 1.0);
    for (int i = 0; i < n; ++i) v[static_cast<std::size_t>(i) * static_cast<std::size_t>(n + 1)] = 0.0;
    return DistortionMatrix(n, n, std::move(v));
}

double DistortionMatrix::max_value() const {
    return *std::max_element(values_.begin(), values_.end());
}

double expected_distortion(const JointPmf& p, const DistortionMatrix& d) {
    if (p.rank() != 2) throw InputError("expected_distortion: expects a two-axis joint");
    if (p.axis(0).size != d.x_size() || p.axis(1).size != d.xhat_size())
        throw InputError("expected_distortion: joint axes do not match distortion dimensions");
    double sum = 0.0;
    const int nx = p.axis(0).size, nh = p.axis(1).size;
    for (int x = 0; x < nx; ++x)
        for (int h = 0; h < nh; ++h)
            sum += p[static_cast<std::size_t>(x) * static_cast<std::size_t>(nh) +
                     static_cast<std::size_t>(h)] * d(x, h);
    return sum;
}

} // namespace sr
