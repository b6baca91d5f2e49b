// SPDX-License-Identifier: Apache-2.0
//
// geochan: geometry-based radio channel estimation, prediction, and fusion
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
// ------------------------------------------------------------------------

#include "geochan/geometry.hpp"

#include <stdexcept>

namespace geochan {

static void require_nondegenerate(const MvaPoint& mva) {
    if (mva.position.norm() < kMvaDegeneracyThreshold)
        throw std::invalid_argument("degenerate-mva: mirror point norm below 1e-9 m");
}

std::vector<PathId> enumerate_paths(int n_surfaces) {
    if (n_surfaces < 0)
        throw std::invalid_argument("enumerate_paths: surface count must be non-negative");

    std::vector<PathId> paths;
    paths.reserve(static_cast<std::size_t>(n_surfaces) * n_surfaces + 1);
    paths.push_back({0, 0});
    for (int s = 1; s <= n_surfaces; ++s)
        for (int sp = 1; sp <= n_surfaces; ++sp)
            paths.push_back({s, sp});
    return paths;
}

Surface surface_from_mva(const MvaPoint& mva) {
    require_nondegenerate(mva);
    return {0.5 * mva.position, mva.position.normalized()};
}

Eigen::Vector3d mirror_point(const Eigen::Vector3d& p, const MvaPoint& mva) {
    require_nondegenerate(mva);
    const Eigen::Vector3d& m = mva.position;
    const double scale = 2.0 * p.dot(m) / m.squaredNorm() - 1.0;
    return p - scale * m;
}

Eigen::Matrix3d householder(const MvaPoint& mva) {
    require_nondegenerate(mva);
    const Eigen::Vector3d& m = mva.position;
    return Eigen::Matrix3d::Identity() - (2.0 / m.squaredNorm()) * (m * m.transpose());
}

AnchorArray build_layout(const Eigen::Vector3d& pa_center,
                         const Eigen::Matrix3d& pa_rotation,
                         const Eigen::Matrix3Xd& antenna_template,
                         PathId path,
                         const std::vector<MvaPoint>& mvas) {
    auto surface = [&](int s) -> const MvaPoint& {
        if (s < 1 || s > static_cast<int>(mvas.size()))
            throw std::invalid_argument("build_layout: path references an unknown surface");
        return mvas[static_cast<std::size_t>(s) - 1];
    };

    AnchorArray out;
    switch (path.bounces()) {
        case 0:
            out.center = pa_center;
            out.orientation = pa_rotation;
            break;
        case 1: {
            const MvaPoint& m = surface(path.s);
            out.center = mirror_point(pa_center, m);
            out.orientation = householder(m) * pa_rotation;
            break;
        }
        default: {
            const MvaPoint& m1 = surface(path.s);
            const MvaPoint& m2 = surface(path.s_prime);
            out.center = mirror_point(mirror_point(pa_center, m1), m2);
            out.orientation = householder(m2) * householder(m1) * pa_rotation;
            break;
        }
    }
    out.antenna_template = antenna_template;
    out.layout = (out.orientation * antenna_template).colwise() + out.center;
    return out;
}

Eigen::VectorXd path_lengths(const AnchorArray& layout, const Eigen::Vector3d& agent) {
    return (layout.layout.colwise() - agent).colwise().norm().transpose();
}

Eigen::Matrix3Xd ura_template(int rows, int cols, double spacing) {
    if (rows < 1 || cols < 1)
        throw std::invalid_argument("ura_template: grid dimensions must be positive");

    Eigen::Matrix3Xd t(3, static_cast<Eigen::Index>(rows) * cols);
    const double x0 = -0.5 * (cols - 1) * spacing;
    const double y0 = -0.5 * (rows - 1) * spacing;
    Eigen::Index m = 0;
    for (int r = 0; r < rows; ++r)
        for (int c = 0; c < cols; ++c, ++m)
            t.col(m) = Eigen::Vector3d(x0 + c * spacing, y0 + r * spacing, 0.0);
    return t;
}

} // namespace geochan
