// SPDX-License-Identifier: Apache-2.0
//
// geochan: geometry-based radio channel estimation, prediction, and fusion
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
// ------------------------------------------------------------------------

#include "geochan/csi.hpp"
#include "geochan/likelihood.hpp"

#include <stdexcept>

namespace geochan {

Scene carrier_scene(const Scene& scene) {
    Scene s = scene;
    s.radio.n_freq = 1;
    s.radio.freq_offsets = Eigen::VectorXd::Zero(1);
    return s;
}

CsiPrediction predict_csi(const Scene& scene, const SceneState& estimate,
                          const Observation& carrier_obs, int anchor_id) {
    if (scene.radio.n_freq != 1)
        throw std::invalid_argument("predict_csi: scene must use a single-tone grid");

    const Dictionary dict =
        build_dictionary(scene, estimate.position, estimate.mva_points(), anchor_id);
    const Eigen::MatrixXcd psi = dict.active();
    const Eigen::Index n = psi.rows();
    const Eigen::Index k = psi.cols();
    if (n <= k)
        throw std::invalid_argument("predict_csi: need more antennas than paths");

    const DictionaryFactor factor(psi);
    const Eigen::VectorXcd alpha = factor.pinv_apply(carrier_obs.y);
    const double energy = std::max(
        carrier_obs.y.squaredNorm() - std::real((carrier_obs.y.adjoint() * psi * alpha)(0)), 0.0);

    CsiPrediction out;
    out.h_pred = psi * alpha;
    out.rank_deficient = factor.rank_deficient();
    out.sigma2 = energy / static_cast<double>(n - k);

    Eigen::MatrixXcd p = alpha * alpha.adjoint() - out.sigma2 * factor.pinv_gram();
    const Eigen::MatrixXcd a = psd_factor(0.5 * (p + p.adjoint().eval()), &out.clamped);
    out.r_pred_factor = psi * a;
    return out;
}

Eigen::VectorXcd fuse_csi(const Eigen::VectorXcd& measured, const Eigen::VectorXcd& predicted,
                          const Eigen::MatrixXcd& r_pred_factor, double meas_var) {
    if (meas_var < 0.0)
        throw std::invalid_argument("fuse_csi: negative measurement variance");
    if (r_pred_factor.cols() == 0)
        return predicted;

    // R_p (sigma2 I + R_p)^-1 d == A (sigma2 I_r + A^H A)^-1 A^H d; the
    // right-hand form stays defined at sigma2 = 0 while A keeps full
    // column rank.
    Eigen::MatrixXcd core = r_pred_factor.adjoint() * r_pred_factor;
    core.diagonal().array() += meas_var;
    const Eigen::LLT<Eigen::MatrixXcd> llt(core);
    if (llt.info() != Eigen::Success)
        throw std::invalid_argument(
            "fuse_csi: zero measurement variance with a rank-deficient prediction covariance");

    const Eigen::VectorXcd innovation = measured - predicted;
    return predicted + r_pred_factor * llt.solve(r_pred_factor.adjoint() * innovation);
}

CsiTriple csi_triple(const Scene& scene, const SceneState& estimate,
                     const Observation& carrier_obs, int anchor_id) {
    const CsiPrediction pred = predict_csi(scene, estimate, carrier_obs, anchor_id);

    CsiTriple out;
    out.measured = carrier_obs.y;
    out.predicted = pred.h_pred;
    out.r_meas_var = pred.sigma2;
    out.r_pred_factor = pred.r_pred_factor;
    out.fused = fuse_csi(out.measured, out.predicted, out.r_pred_factor, out.r_meas_var);
    return out;
}

Eigen::VectorXcd predict_future_csi(const Scene& scene, const SceneState& prev_estimate,
                                    const Observation& prev_carrier_obs, int anchor_id,
                                    const MotionModel& motion) {
    if (scene.radio.n_freq != 1)
        throw std::invalid_argument("predict_future_csi: scene must use a single-tone grid");

    const Dictionary prev_dict =
        build_dictionary(scene, prev_estimate.position, prev_estimate.mva_points(), anchor_id);
    const DictionaryFactor factor(prev_dict.active());
    const Eigen::VectorXcd alpha = factor.pinv_apply(prev_carrier_obs.y);

    const SceneState future = motion.propagate_mean(prev_estimate);
    const Dictionary next_dict =
        build_dictionary(scene, future.position, future.mva_points(), anchor_id);
    return next_dict.active() * alpha;
}

} // namespace geochan
