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
#include "support.hpp"

#include <catch_amalgamated.hpp>

#include <cmath>
#include <complex>
#include <stdexcept>

using namespace geochan;

namespace {

// Dense LMMSE oracle in the textbook gain form:
//   h_f = R_p (R_p + s2 I)^-1 h_meas + s2 (R_p + s2 I)^-1 h_pred.
Eigen::VectorXcd dense_lmmse(const Eigen::VectorXcd& measured,
                             const Eigen::VectorXcd& predicted,
                             const Eigen::MatrixXcd& r_pred, double s2) {
    const Eigen::Index m = measured.size();
    const Eigen::MatrixXcd total = r_pred + s2 * Eigen::MatrixXcd::Identity(m, m);
    const Eigen::MatrixXcd inv = total.inverse();
    return r_pred * inv * measured + s2 * inv * predicted;
}

Scene carrier_test_scene(int rows = 4, int cols = 4) {
    Scene s;
    s.radio = make_radio(6.175e9, 500e6, 1);
    s.anchors = {{{3.0, 1.5, 2.4}, Eigen::Matrix3d::Identity()},
                 {{-3.0, 1.2, 2.2}, Eigen::Matrix3d::Identity()}};
    s.antenna_template = ura_template(rows, cols, 0.5 * s.radio.wavelength());
    s.mvas = {{{0.0, 4.0, 0.0}}};
    return s;
}

SceneState state_at(const Eigen::Vector3d& p, const Scene& scene) {
    SceneState s;
    s.position = p;
    s.velocity = Eigen::Vector2d::Zero();
    s.mvas.resize(3 * scene.n_surfaces());
    for (int i = 0; i < scene.n_surfaces(); ++i)
        s.mvas.segment<3>(3 * i) = scene.mvas[static_cast<std::size_t>(i)].position;
    return s;
}

} // namespace

TEST_CASE("carrier_scene keeps only the zero-offset tone") {
    Scene wide = carrier_test_scene();
    wide.radio = make_radio(6.175e9, 500e6, 4);
    const Scene carrier = carrier_scene(wide);
    CHECK(carrier.radio.n_freq == 1);
    REQUIRE(carrier.radio.freq_offsets.size() == 1);
    CHECK(carrier.radio.freq_offsets[0] == 0.0);
    CHECK(carrier.radio.fc == wide.radio.fc);
    CHECK(carrier.anchors.size() == wide.anchors.size());
}

TEST_CASE("prediction projects the snapshot onto the dictionary span") {
    const Scene scene = carrier_test_scene();
    const Eigen::Vector3d truth(0.4, -0.9, 1.1);
    const SceneState est = state_at(truth, scene);
    const AmplitudeModel amps;

    // Noise-free snapshot at the estimate: projection returns it exactly.
    const Observation clean = synthesize_observation(scene, truth, 0, amps, 0.0, 0);
    const CsiPrediction p0 = predict_csi(scene, est, clean, 0);
    CHECK((p0.h_pred - clean.y).norm() < 1e-10 * clean.y.norm());
    CHECK(p0.sigma2 < 1e-12 * clean.y.squaredNorm());
    CHECK(!p0.rank_deficient);

    // Noisy snapshot: dense projector oracle.
    const Observation noisy = synthesize_observation(scene, truth, 0, amps, 0.1, 5);
    const CsiPrediction p1 = predict_csi(scene, est, noisy, 0);
    const Eigen::MatrixXcd psi = build_dictionary(scene, truth, 0).columns;
    const Eigen::MatrixXcd proj = psi * (psi.adjoint() * psi).inverse() * psi.adjoint();
    CHECK((p1.h_pred - proj * noisy.y).norm() < 1e-8 * noisy.y.norm());

    // The stray energy estimate uses the N - K divisor.
    const double energy = (noisy.y - proj * noisy.y).squaredNorm();
    CHECK(p1.sigma2 == Catch::Approx(energy / double(16 - 2)).epsilon(1e-8));

    // r_pred factor squares back to the floored source covariance mapped
    // through the dictionary: check PSD and the span.
    const Eigen::MatrixXcd r_pred = p1.r_pred_factor * p1.r_pred_factor.adjoint();
    CHECK((r_pred - r_pred.adjoint()).norm() < 1e-10);
    CHECK((proj * r_pred - r_pred).norm() < 1e-8 * r_pred.norm());
}

TEST_CASE("prediction rejects unusable inputs") {
    Scene wide = carrier_test_scene();
    wide.radio = make_radio(6.175e9, 500e6, 4);
    const SceneState est = state_at({0.4, -0.9, 1.1}, wide);
    Observation obs;
    obs.y = Eigen::VectorXcd::Zero(64);
    CHECK_THROWS_AS(predict_csi(wide, est, obs, 0), std::invalid_argument);

    // One antenna and one tone cannot support two paths.
    const Scene tiny = carrier_test_scene(1, 1);
    Observation one;
    one.y = Eigen::VectorXcd::Zero(1);
    CHECK_THROWS_AS(predict_csi(tiny, state_at({0.4, -0.9, 1.1}, tiny), one, 0),
                    std::invalid_argument);
}

TEST_CASE("fusion degenerates to the prediction when its covariance vanishes") {
    RandomStream rng(401);
    const Eigen::VectorXcd measured = testgen::complex_vector(rng, 6);
    const Eigen::VectorXcd predicted = testgen::complex_vector(rng, 6);
    const Eigen::MatrixXcd empty(6, 0);

    const Eigen::VectorXcd fused = fuse_csi(measured, predicted, empty, 0.3);
    CHECK((fused - predicted).norm() == 0.0);
}

TEST_CASE("fusion returns the measurement when the noise variance vanishes") {
    RandomStream rng(402);
    const Eigen::VectorXcd measured = testgen::complex_vector(rng, 6);
    const Eigen::VectorXcd predicted = testgen::complex_vector(rng, 6);
    // Full-rank factor: zero measurement noise is well posed.
    const Eigen::MatrixXcd a = testgen::complex_matrix(rng, 6, 6);

    const Eigen::VectorXcd fused = fuse_csi(measured, predicted, a, 0.0);
    CHECK((fused - measured).norm() < 1e-6 * measured.norm());

    // Tiny but nonzero variance converges to the same limit.
    const Eigen::VectorXcd near = fuse_csi(measured, predicted, a, 1e-12);
    CHECK((near - measured).norm() < 1e-5 * measured.norm());
}

TEST_CASE("fusion rejects the doubly degenerate case") {
    RandomStream rng(403);
    const Eigen::VectorXcd measured = testgen::complex_vector(rng, 4);
    const Eigen::VectorXcd predicted = testgen::complex_vector(rng, 4);
    Eigen::MatrixXcd a = testgen::complex_matrix(rng, 4, 2);
    a.col(1).setZero(); // singular core

    CHECK_THROWS_AS(fuse_csi(measured, predicted, a, 0.0), std::invalid_argument);
    CHECK_NOTHROW(fuse_csi(measured, predicted, a, 0.1));
}

TEST_CASE("scalar fusion is the exact convex combination") {
    RandomStream rng(404);
    for (int i = 0; i < 20; ++i) {
        const std::complex<double> meas = testgen::complex_normal(rng);
        const std::complex<double> pred = testgen::complex_normal(rng);
        const double r_p = rng.uniform(0.01, 2.0);
        const double s2 = rng.uniform(0.01, 2.0);

        Eigen::VectorXcd vm(1), vp(1);
        vm << meas;
        vp << pred;
        Eigen::MatrixXcd a(1, 1);
        a << std::sqrt(r_p);

        const std::complex<double> fused = fuse_csi(vm, vp, a, s2)[0];
        const std::complex<double> expect = (r_p * meas + s2 * pred) / (r_p + s2);
        CHECK(std::abs(fused - expect) < 1e-12);
    }
}

TEST_CASE("fusion agrees with the dense gain-form oracle") {
    RandomStream rng(405);
    for (int i = 0; i < 100; ++i) {
        const Eigen::Index m = 2 + static_cast<Eigen::Index>(rng.uniform(0.0, 7.0));
        const Eigen::VectorXcd measured = testgen::complex_vector(rng, m);
        const Eigen::VectorXcd predicted = testgen::complex_vector(rng, m);
        const Eigen::MatrixXcd a = testgen::complex_matrix(rng, m, m); // full rank
        const double s2 = rng.uniform(0.01, 2.0);

        const Eigen::VectorXcd fused = fuse_csi(measured, predicted, a, s2);
        const Eigen::VectorXcd expect = dense_lmmse(measured, predicted, a * a.adjoint(), s2);
        CHECK((fused - expect).norm() < 1e-8 * expect.norm());
    }
}

TEST_CASE("fusion shrinks the innovation") {
    RandomStream rng(406);
    for (int i = 0; i < 50; ++i) {
        const Eigen::VectorXcd measured = testgen::complex_vector(rng, 6);
        const Eigen::VectorXcd predicted = testgen::complex_vector(rng, 6);
        const Eigen::MatrixXcd a = testgen::complex_matrix(rng, 6, 3);
        const double s2 = rng.uniform(0.01, 2.0);

        const Eigen::VectorXcd fused = fuse_csi(measured, predicted, a, s2);
        // The gain has spectral norm below one, so the correction never
        // exceeds the innovation.
        CHECK((fused - predicted).norm() <= (measured - predicted).norm() + 1e-10);
    }
}

TEST_CASE("csi_triple packages prediction and fusion consistently") {
    const Scene scene = carrier_test_scene();
    const Eigen::Vector3d truth(0.4, -0.9, 1.1);
    const SceneState est = state_at(truth, scene);
    const AmplitudeModel amps;
    const Observation obs = synthesize_observation(scene, truth, 1, amps, 0.05, 9);

    const CsiTriple trip = csi_triple(scene, est, obs, 1);
    CHECK((trip.measured - obs.y).norm() == 0.0);

    const CsiPrediction pred = predict_csi(scene, est, obs, 1);
    CHECK((trip.predicted - pred.h_pred).norm() == 0.0);
    CHECK(trip.r_meas_var == pred.sigma2);
    CHECK((trip.fused - fuse_csi(obs.y, pred.h_pred, pred.r_pred_factor, pred.sigma2)).norm() ==
          0.0);
    CHECK(trip.r_pred().rows() == obs.y.size());
}

TEST_CASE("fused CSI dominates both inputs in mean squared error") {
    // Monte Carlo at -6 dB: prediction from an independent probe snapshot,
    // fusion against a fresh measurement, errors against the clean channel.
    const Scene scene = carrier_test_scene();
    const Eigen::Vector3d truth(0.4, -0.9, 1.1);
    const SceneState est = state_at(truth, scene);
    const AmplitudeModel amps;

    const Eigen::VectorXcd clean = synthesize_observation(scene, truth, 0, amps, 0.0, 0).y;
    const double snr = std::pow(10.0, -0.6);
    const double noise_var = clean.squaredNorm() / double(clean.size()) / snr;

    double mse_meas = 0.0, mse_pred = 0.0, mse_fused = 0.0;
    const int n_draws = 10000;
    for (int i = 0; i < n_draws; ++i) {
        const Observation probe = synthesize_observation(
            scene, truth, 0, amps, noise_var, derive_seed(71, {static_cast<std::uint64_t>(i), 0}));
        const Observation meas = synthesize_observation(
            scene, truth, 0, amps, noise_var, derive_seed(71, {static_cast<std::uint64_t>(i), 1}));

        const CsiPrediction pred = predict_csi(scene, est, probe, 0);
        const Eigen::VectorXcd fused =
            fuse_csi(meas.y, pred.h_pred, pred.r_pred_factor, noise_var);

        mse_meas += (meas.y - clean).squaredNorm();
        mse_pred += (pred.h_pred - clean).squaredNorm();
        mse_fused += (fused - clean).squaredNorm();
    }
    mse_meas /= double(n_draws);
    mse_pred /= double(n_draws);
    mse_fused /= double(n_draws);

    CHECK(mse_fused < mse_meas);
    CHECK(mse_fused < mse_pred);
}

TEST_CASE("future CSI re-emits concentrated amplitudes at the propagated state") {
    const Scene scene = carrier_test_scene();
    const Eigen::Vector3d prev_pos(0.4, -0.9, 1.1);
    SceneState prev = state_at(prev_pos, scene);
    prev.velocity = {0.12, 0.0};
    MotionModel motion; // dt = 1

    const AmplitudeModel amps;
    const Observation prev_obs = synthesize_observation(scene, prev_pos, 0, amps, 0.02, 15);

    const Eigen::VectorXcd future = predict_future_csi(scene, prev, prev_obs, 0, motion);

    // Dense oracle: amplitudes at the previous state, dictionary at the
    // noise-free propagation.
    const Eigen::MatrixXcd psi_prev = build_dictionary(scene, prev_pos, 0).columns;
    const Eigen::VectorXcd alpha =
        (psi_prev.adjoint() * psi_prev).inverse() * psi_prev.adjoint() * prev_obs.y;
    const SceneState moved = motion.propagate_mean(prev);
    const Eigen::MatrixXcd psi_next =
        build_dictionary(scene, moved.position, moved.mva_points(), 0).columns;
    const Eigen::VectorXcd expect = psi_next * alpha;

    CHECK((future - expect).norm() < 1e-8 * expect.norm());
}
