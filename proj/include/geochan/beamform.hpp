// SPDX-License-Identifier: Apache-2.0
//
// geochan: geometry-based radio channel estimation, prediction, and fusion
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
// ------------------------------------------------------------------------

#ifndef GEOCHAN_BEAMFORM_HPP
#define GEOCHAN_BEAMFORM_HPP

#include "geochan/csi.hpp"

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

namespace geochan {

// Conjugate-beamforming path gains of one time step, all linear and all
// bounded by pg_perfect = (sum_j ||h_j||)^2. The first step of a
// trajectory has no previous snapshot, so its aging entries are NaN.
struct EfficiencyReport {
    double pg_measured = 0.0;         // weights = noisy snapshot at n
    double pg_predicted = 0.0;        // weights = geometry-based CSI at n
    double pg_fused = 0.0;            // weights = LMMSE combination at n
    double pg_outdated = 0.0;         // weights = snapshot taken at n-1
    double pg_future_predicted = 0.0; // weights = CSI predicted from n-1
    double pg_perfect = 0.0;
    double snr = 0.0; // linear, of the step's carrier snapshots
    int time_index = 0;
};

// Receive-to-transmit power ratio of per-anchor conjugate beamforming with
// unit power split per anchor: |sum_j w_j^H h_j / ||w_j|| |^2. Anchors
// with zero-norm weights transmit nothing and contribute zero.
double path_gain(const std::vector<Eigen::VectorXcd>& weights,
                 const std::vector<Eigen::VectorXcd>& truth);

// Expected efficiency (fraction of pg_perfect) when beamforming on a
// noisy snapshot at the given linear SNR: snr / (1 + snr).
double expected_reciprocity_loss(double snr);

// Scores one step given its clean carrier channels, the per-anchor noisy
// snapshots, and the state estimates. Null previous-step arguments yield
// NaN aging entries. `carrier` must use a single-tone grid.
EfficiencyReport efficiency_step(const Scene& carrier,
                                 const std::vector<Eigen::VectorXcd>& clean,
                                 const std::vector<Observation>& snapshots,
                                 const std::vector<Observation>* prev_snapshots,
                                 const SceneState& estimate, const SceneState* prev_estimate,
                                 const MotionModel& motion, double noise_var, int time_index);

// Walks a trajectory and scores every CSI variant against the true carrier
// channels of each step: measured, geometry-predicted, fused, one-step
// outdated, and future-predicted. Truth states drive the synthesis;
// estimate states drive prediction (pass the truth twice for an oracle
// run). Snapshots are drawn deterministically from `seed`.
std::vector<EfficiencyReport> aging_comparison(const Scene& scene,
                                               const std::vector<SceneState>& truth,
                                               const std::vector<SceneState>& estimates,
                                               const AmplitudeModel& amps, double noise_var,
                                               const MotionModel& motion, std::uint64_t seed);

} // namespace geochan

#endif
