// SPDX-License-Identifier: Apache-2.0
//
// geochan: geometry-based radio channel estimation, prediction, and fusion
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
// ------------------------------------------------------------------------
//
// Hand-rolled generators shared by the property-style tests. Every draw
// goes through geochan::RandomStream so failures replay from the printed
// seed alone.

#ifndef GEOCHAN_TESTS_SUPPORT_HPP
#define GEOCHAN_TESTS_SUPPORT_HPP

#include "geochan/random.hpp"

#include <Eigen/Dense>
#include <complex>

namespace testgen {

inline Eigen::Vector3d vector3(geochan::RandomStream& rng, double lo, double hi) {
    return {rng.uniform(lo, hi), rng.uniform(lo, hi), rng.uniform(lo, hi)};
}

// Nonzero mirror point: magnitude in [0.5, 8] in a random direction.
inline Eigen::Vector3d mirror3(geochan::RandomStream& rng) {
    Eigen::Vector3d v;
    do {
        v = vector3(rng, -1.0, 1.0);
    } while (v.norm() < 1e-3);
    return v.normalized() * rng.uniform(0.5, 8.0);
}

inline std::complex<double> complex_normal(geochan::RandomStream& rng) {
    return rng.circular_normal(1.0);
}

inline Eigen::VectorXcd complex_vector(geochan::RandomStream& rng, Eigen::Index n) {
    Eigen::VectorXcd v(n);
    for (Eigen::Index i = 0; i < n; ++i)
        v[i] = complex_normal(rng);
    return v;
}

inline Eigen::MatrixXcd complex_matrix(geochan::RandomStream& rng, Eigen::Index rows,
                                       Eigen::Index cols) {
    Eigen::MatrixXcd m(rows, cols);
    for (Eigen::Index j = 0; j < cols; ++j)
        m.col(j) = complex_vector(rng, rows);
    return m;
}

// Random Hermitian positive semidefinite matrix G G^H of the given rank.
inline Eigen::MatrixXcd psd_matrix(geochan::RandomStream& rng, Eigen::Index n,
                                   Eigen::Index rank) {
    const Eigen::MatrixXcd g = complex_matrix(rng, n, rank);
    return g * g.adjoint();
}

// Proper rotation from a random axis and angle.
inline Eigen::Matrix3d rotation(geochan::RandomStream& rng) {
    Eigen::Vector3d axis;
    do {
        axis = vector3(rng, -1.0, 1.0);
    } while (axis.norm() < 1e-3);
    return Eigen::AngleAxisd(rng.uniform(-3.14, 3.14), axis.normalized()).toRotationMatrix();
}

} // namespace testgen

#endif
