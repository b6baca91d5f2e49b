// SPDX-License-Identifier: Apache-2.0
//
// geochan: geometry-based radio channel estimation, prediction, and fusion
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
// ------------------------------------------------------------------------

#include "geochan/beamform.hpp"
#include "geochan/random.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace geochan {

double path_gain(const std::vector<Eigen::VectorXcd>& weights,
                 const std::vector<Eigen::VectorXcd>& truth) {
    if (weights.size() != truth.size())
        throw std::invalid_argument("path_gain: need one weight vector per anchor");

    std::complex<double> acc = 0.0;
    for (std::size_t j = 0; j < weights.size(); ++j) {
        const double norm = weights[j].norm();
        if (norm > 0.0)
            acc += weights[j].dot(truth[j]) / norm;
    }
    return std::norm(acc);
}

double expected_reciprocity_loss(double snr) {
    if (snr < 0.0)
        throw std::invalid_argument("expected_reciprocity_loss: snr must be >= 0");
    if (std::isinf(snr))
        return 1.0;
    return snr / (1.0 + snr);
}

EfficiencyReport efficiency_step(const Scene& carrier,
                                 const std::vector<Eigen::VectorXcd>& clean,
                                 const std::vector<Observation>& snapshots,
                                 const std::vector<Observation>* prev_snapshots,
                                 const SceneState& estimate, const SceneState* prev_estimate,
                                 const MotionModel& motion, double noise_var, int time_index) {
    const std::size_t n_anchors = clean.size();
    if (snapshots.size() != n_anchors)
        throw std::invalid_argument("efficiency_step: need one snapshot per anchor");

    EfficiencyReport rep;
    rep.time_index = time_index;

    double perfect = 0.0;
    for (const Eigen::VectorXcd& hj : clean)
        perfect += hj.norm();
    rep.pg_perfect = perfect * perfect;
    rep.snr = channel_snr(clean, std::vector<double>(n_anchors, noise_var));

    std::vector<Eigen::VectorXcd> measured, predicted, fused;
    for (std::size_t j = 0; j < n_anchors; ++j) {
        const CsiTriple triple =
            csi_triple(carrier, estimate, snapshots[j], static_cast<int>(j));
        measured.push_back(triple.measured);
        predicted.push_back(triple.predicted);
        fused.push_back(triple.fused);
    }
    rep.pg_measured = path_gain(measured, clean);
    rep.pg_predicted = path_gain(predicted, clean);
    rep.pg_fused = path_gain(fused, clean);

    if (prev_snapshots == nullptr || prev_estimate == nullptr) {
        rep.pg_outdated = std::numeric_limits<double>::quiet_NaN();
        rep.pg_future_predicted = std::numeric_limits<double>::quiet_NaN();
        return rep;
    }

    std::vector<Eigen::VectorXcd> outdated, future;
    for (std::size_t j = 0; j < n_anchors; ++j) {
        outdated.push_back((*prev_snapshots)[j].y);
        future.push_back(predict_future_csi(carrier, *prev_estimate, (*prev_snapshots)[j],
                                            static_cast<int>(j), motion));
    }
    rep.pg_outdated = path_gain(outdated, clean);
    rep.pg_future_predicted = path_gain(future, clean);
    return rep;
}

// RNG purposes inside one aging evaluation.
namespace {
constexpr std::uint64_t kSnapshotDraw = 1;
} // namespace

std::vector<EfficiencyReport> aging_comparison(const Scene& scene,
                                               const std::vector<SceneState>& truth,
                                               const std::vector<SceneState>& estimates,
                                               const AmplitudeModel& amps, double noise_var,
                                               const MotionModel& motion, std::uint64_t seed) {
    if (truth.size() != estimates.size())
        throw std::invalid_argument("aging_comparison: truth/estimate lengths differ");
    if (truth.size() < 2)
        throw std::invalid_argument("aging_comparison: need at least two steps");

    const Scene carrier = carrier_scene(scene);
    const std::size_t n_steps = truth.size();
    const std::size_t n_anchors = static_cast<std::size_t>(carrier.n_anchors());

    std::vector<std::vector<Eigen::VectorXcd>> clean(n_steps);
    std::vector<std::vector<Observation>> noisy(n_steps);
    for (std::size_t n = 0; n < n_steps; ++n) {
        clean[n].resize(n_anchors);
        noisy[n].resize(n_anchors);
        for (std::size_t j = 0; j < n_anchors; ++j) {
            const Eigen::Vector3d& pos = truth[n].position;
            const int jj = static_cast<int>(j);
            clean[n][j] =
                synthesize_observation(carrier, pos, jj, amps, 0.0, 0, static_cast<int>(n) + 1).y;
            noisy[n][j] = synthesize_observation(
                carrier, pos, jj, amps, noise_var,
                derive_seed(seed, {kSnapshotDraw, static_cast<std::uint64_t>(n),
                                   static_cast<std::uint64_t>(j)}),
                static_cast<int>(n) + 1);
        }
    }

    std::vector<EfficiencyReport> reports;
    reports.reserve(n_steps);
    for (std::size_t n = 0; n < n_steps; ++n) {
        const std::vector<Observation>* prev_snap = n > 0 ? &noisy[n - 1] : nullptr;
        const SceneState* prev_est = n > 0 ? &estimates[n - 1] : nullptr;
        reports.push_back(efficiency_step(carrier, clean[n], noisy[n], prev_snap, estimates[n],
                                          prev_est, motion, noise_var,
                                          static_cast<int>(n) + 1));
    }
    return reports;
}

} // namespace geochan
