// SPDX-License-Identifier: Apache-2.0
//
// geochan: geometry-based radio channel estimation, prediction, and fusion
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
// ------------------------------------------------------------------------

#ifndef GEOCHAN_GEOMETRY_HPP
#define GEOCHAN_GEOMETRY_HPP

#include <Eigen/Dense>
#include <vector>

namespace geochan {

// Mirroring the coordinate origin across a planar surface yields a single
// 3-vector that encodes both the surface position and its orientation.
// All surfaces are represented this way; the vector must not vanish.
struct MvaPoint {
    Eigen::Vector3d position = Eigen::Vector3d::Zero(); // meters
};

// A surface recovered from its mirrored-origin point: an (infinite) plane
// through `wall_point` with unit normal `normal`.
struct Surface {
    Eigen::Vector3d wall_point;
    Eigen::Vector3d normal;
};

// Mirror points with norm below this are rejected; the reflection maps
// divide by the squared norm.
inline constexpr double kMvaDegeneracyThreshold = 1e-9; // meters

// Identifies a propagation path between agent and anchor:
//   (0,0)            line of sight
//   (s,s), s >= 1    single bounce at surface s
//   (s,s'), s != s'  double bounce at surface s then s'
struct PathId {
    int s = 0;
    int s_prime = 0;

    bool is_los() const { return s == 0 && s_prime == 0; }
    int bounces() const { return is_los() ? 0 : (s == s_prime ? 1 : 2); }
    bool operator==(const PathId&) const = default;
};

// All K = S^2 + 1 paths for S surfaces: line of sight first, then the
// bounce pairs with the first surface as the outer index.
std::vector<PathId> enumerate_paths(int n_surfaces);

// Plane description (wall point and unit normal) of the surface encoded by
// `mva`. Throws std::invalid_argument for degenerate mirror points.
Surface surface_from_mva(const MvaPoint& mva);

// Image of `p` under reflection across the surface encoded by `mva`:
// p - (2 p.m / |m|^2 - 1) m. Throws std::invalid_argument if degenerate.
Eigen::Vector3d mirror_point(const Eigen::Vector3d& p, const MvaPoint& mva);

// Householder reflection matrix I - 2 m m^T / |m|^2 mapping an anchor
// orientation to its mirror image's orientation.
Eigen::Matrix3d householder(const MvaPoint& mva);

// A physical or virtual anchor array: phase center, orientation in global
// coordinates, the local antenna template, and the resulting 3xM layout.
// Invariant: layout.col(m) == center + orientation * antenna_template.col(m).
struct AnchorArray {
    Eigen::Vector3d center = Eigen::Vector3d::Zero();
    Eigen::Matrix3d orientation = Eigen::Matrix3d::Identity();
    Eigen::Matrix3Xd antenna_template; // offsets from the phase center
    Eigen::Matrix3Xd layout;           // column m is the global position of antenna m
};

// Array layout of the (possibly mirrored) anchor reached over `path`.
// The physical anchor sits at `pa_center` with rotation `pa_rotation` and
// antenna offsets `antenna_template` (3xM, relative to the phase center).
// `mvas` lists the surface mirror points, indexed by surface id - 1.
AnchorArray build_layout(const Eigen::Vector3d& pa_center,
                         const Eigen::Matrix3d& pa_rotation,
                         const Eigen::Matrix3Xd& antenna_template,
                         PathId path,
                         const std::vector<MvaPoint>& mvas);

// Euclidean distances from `agent` to every antenna in `layout`.
Eigen::VectorXd path_lengths(const AnchorArray& layout, const Eigen::Vector3d& agent);

// Centered uniform rectangular array in the local x-y plane with the given
// element spacing; columns ordered row-major over the grid.
Eigen::Matrix3Xd ura_template(int rows, int cols, double spacing);

} // namespace geochan

#endif
