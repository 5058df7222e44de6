#include "decode_util.hpp"

#include <algorithm>

namespace sr::detail {

int argmin_reconstruction(const std::vector<double>& posterior, const DistortionMatrix& d) {
    int best = 0;
    double best_cost = kInf;
    for (int h = 0; h < d.xhat_size(); ++h) {
        double cost = 0.0;
        for (int x = 0; x < d.x_size(); ++x) cost += posterior[static_cast<std::size_t>(x)] * d(x, h);
        if (cost < best_cost) { // strict: ties keep the lowest symbol
            best_cost = cost;
            best = h;
        }
    }
    return best;
}

namespace {

// row-major cell index over (si, aux...) for one joint configuration
std::size_t table_cell(const JointPmf& joint, const std::vector<int>& idx, int si_axis,
                       const std::vector<int>& aux_axes) {
    std::size_t cell = static_cast<std::size_t>(idx[static_cast<std::size_t>(si_axis)]);
    for (int a : aux_axes)
        cell = cell * static_cast<std::size_t>(joint.axis(a).size) +
               static_cast<std::size_t>(idx[static_cast<std::size_t>(a)]);
    return cell;
}

} // namespace

std::vector<int> synthesize_table(const JointPmf& joint, const DistortionMatrix& d,
                                  int x_axis, int si_axis, const std::vector<int>& aux_axes) {
    const int nx = joint.axis(x_axis).size;
    const int ns = joint.axis(si_axis).size;
    std::size_t naux = 1;
    for (int a : aux_axes) naux *= static_cast<std::size_t>(joint.axis(a).size);

    std::vector<double> weight(static_cast<std::size_t>(ns) * naux * static_cast<std::size_t>(nx), 0.0);
    std::vector<int> idx(static_cast<std::size_t>(joint.rank()));
    for (std::size_t flat = 0; flat < joint.cells(); ++flat) {
        const double m = joint[flat];
        if (m == 0.0) continue;
        joint.unflatten(flat, idx);
        const std::size_t cell = table_cell(joint, idx, si_axis, aux_axes);
        weight[cell * static_cast<std::size_t>(nx) + static_cast<std::size_t>(idx[static_cast<std::size_t>(x_axis)])] += m;
    }

    std::vector<int> table(static_cast<std::size_t>(ns) * naux);
    std::vector<double> post(static_cast<std::size_t>(nx));
    for (std::size_t cell = 0; cell < table.size(); ++cell) {
        for (int x = 0; x < nx; ++x)
            post[static_cast<std::size_t>(x)] = weight[cell * static_cast<std::size_t>(nx) + static_cast<std::size_t>(x)];
        table[cell] = argmin_reconstruction(post, d);
    }
    return table;
}

double distortion_excess(const DistortionQuad& achieved, const DistortionQuad& target,
                         const SourceSpec& source) {
    double excess = 0.0;
    const DistortionMatrix* mats[] = {&source.d_y1, &source.d_z1, &source.d_y2, &source.d_z2};
    const double a[] = {achieved.dy1, achieved.dz1, achieved.dy2, achieved.dz2};
    const double t[] = {target.dy1, target.dz1, target.dy2, target.dz2};
    for (int i = 0; i < 4; ++i) {
        if (t[i] == kInf) continue;
        const double scale = std::max(mats[i]->max_value(), 1e-9);
        excess += std::max(0.0, a[i] - t[i]) / scale;
    }
    return excess;
}

void check_target_feasible(const SourceSpec& source, const DistortionQuad& target, double tol) {
    const DistortionQuad floor = distortion_floor(source);
    if (!floor.meets(target, tol)) {
        auto fmt = [](double v) { return v == kInf ? std::string("inf") : std::to_string(v); };
        throw InfeasibleTargetError(
            "target (" + fmt(target.dy1) + ", " + fmt(target.dz1) + ", " + fmt(target.dy2) +
            ", " + fmt(target.dz2) + ") lies below the distortion floor (" + fmt(floor.dy1) +
            ", " + fmt(floor.dz1) + ", " + fmt(floor.dy2) + ", " + fmt(floor.dz2) + ")");
    }
}

double table_distortion(const JointPmf& joint, const DistortionMatrix& d, int x_axis,
                        int si_axis, const std::vector<int>& aux_axes,
                        const std::vector<int>& table) {
    double sum = 0.0;
    std::vector<int> idx(static_cast<std::size_t>(joint.rank()));
    for (std::size_t flat = 0; flat < joint.cells(); ++flat) {
        const double m = joint[flat];
        if (m == 0.0) continue;
        joint.unflatten(flat, idx);
        const std::size_t cell = table_cell(joint, idx, si_axis, aux_axes);
        sum += m * d(idx[static_cast<std::size_t>(x_axis)], table[cell]);
    }
    return sum;
}

} // namespace sr::detail
