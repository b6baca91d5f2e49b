// SPDX-License-Identifier: Apache-2.0
//
// geochan: geometry-based radio channel estimation, prediction, and fusion
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
// ------------------------------------------------------------------------

#ifndef GEOCHAN_CSI_HPP
#define GEOCHAN_CSI_HPP

#include "geochan/channel.hpp"
#include "geochan/filter.hpp"

#include <Eigen/Dense>
#include <optional>

namespace geochan {

// All channel-state vectors here live at the carrier only (single tone,
// length M). The prediction covariance R_p = Psi P Psi^H is kept as its
// factor A with R_p = A A^H; it has rank at most the path count.
struct CsiTriple {
    Eigen::VectorXcd measured;      // noisy snapshot h~
    Eigen::VectorXcd predicted;     // geometry-based reconstruction h_p
    Eigen::VectorXcd fused;         // posterior-mean combination h_f
    double r_meas_var = 0.0;        // measurement noise variance sigma2
    Eigen::MatrixXcd r_pred_factor; // A, M x r

    Eigen::MatrixXcd r_pred() const { return r_pred_factor * r_pred_factor.adjoint(); }
};

// Geometry-based channel reconstruction at a state estimate, plus the
// byproducts the fusion step needs. sigma2 comes from the random-amplitude
// concentration at one tone; r_pred_factor from the floored source
// covariance mapped through the dictionary.
struct CsiPrediction {
    Eigen::VectorXcd h_pred;        // M
    double sigma2 = 0.0;
    Eigen::MatrixXcd r_pred_factor; // M x r
    bool clamped = false;
    bool rank_deficient = false;
};

// Single-tone copy of a scene's radio grid (offset zero only).
Scene carrier_scene(const Scene& scene);

// h_p = Psi(x_hat) * pinv(Psi(x_hat)) * y: project the carrier snapshot
// onto the channel subspace spanned by the dictionary at the estimate.
// `scene` must already carry a single-tone grid.
CsiPrediction predict_csi(const Scene& scene, const SceneState& estimate,
                          const Observation& carrier_obs, int anchor_id);

// LMMSE combination h_f = h_p + R_p (sigma2 I + R_p)^-1 (h~ - h_p), with
// the inverse applied through the rank-r core sigma2 I_r + A^H A. Throws
// when sigma2 == 0 and the core is singular.
Eigen::VectorXcd fuse_csi(const Eigen::VectorXcd& measured, const Eigen::VectorXcd& predicted,
                          const Eigen::MatrixXcd& r_pred_factor, double meas_var);

// Convenience: predict then fuse against the same snapshot.
CsiTriple csi_triple(const Scene& scene, const SceneState& estimate,
                     const Observation& carrier_obs, int anchor_id);

// CSI for the next step: amplitudes concentrated from the previous
// snapshot at the previous estimate, re-emitted through the dictionary at
// the noise-free motion propagation of that estimate.
Eigen::VectorXcd predict_future_csi(const Scene& scene, const SceneState& prev_estimate,
                                    const Observation& prev_carrier_obs, int anchor_id,
                                    const MotionModel& motion);

} // namespace geochan

#endif
