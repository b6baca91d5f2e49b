// SPDX-License-Identifier: Apache-2.0
//
// geochan: geometry-based radio channel estimation, prediction, and fusion
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
// ------------------------------------------------------------------------

#ifndef GEOCHAN_FILTER_HPP
#define GEOCHAN_FILTER_HPP

#include "geochan/channel.hpp"
#include "geochan/likelihood.hpp"

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <utility>
#include <vector>

namespace geochan {

// Joint agent-plus-map state: agent position, horizontal velocity, and the
// stacked surface mirror points. Total dimension 5 + 3S.
struct SceneState {
    Eigen::Vector3d position = Eigen::Vector3d::Zero(); // m
    Eigen::Vector2d velocity = Eigen::Vector2d::Zero(); // m/s, horizontal
    Eigen::VectorXd mvas;                               // stacked 3S, m

    int n_surfaces() const { return static_cast<int>(mvas.size()) / 3; }
    int dim() const { return 5 + static_cast<int>(mvas.size()); }

    Eigen::VectorXd to_vector() const;
    static SceneState from_vector(const Eigen::VectorXd& v);
    std::vector<MvaPoint> mva_points() const;
    SceneHypothesis hypothesis() const { return {position, mva_points()}; }
};

// Nearly constant velocity on the agent, random walk on the mirror points:
//   position += dt * [velocity; 0] + noise(sigma_p)
//   velocity += noise(sigma_v)
//   mvas     += noise(sigma_mva)
struct MotionModel {
    double dt = 1.0;          // s
    double sigma_p = 0.01;    // m
    double sigma_v = 0.05;    // m/s
    double sigma_mva = 0.001; // m

    Eigen::MatrixXd transition_matrix(int n_surfaces) const;
    Eigen::VectorXd process_std(int n_surfaces) const; // sqrt of diag(Q)
    SceneState propagate_mean(const SceneState& s) const; // noise-free step
};

// Weighted particle cloud; weights live in log domain and are normalized
// so that exp(log_weights) sums to 1.
struct ParticleSet {
    std::vector<SceneState> states;
    Eigen::VectorXd log_weights;

    int size() const { return static_cast<int>(states.size()); }
    Eigen::VectorXd weights() const; // normalized linear weights
    double ess() const;              // effective sample size 1/sum(w^2)
};

// Diagnostics of one weight update.
struct UpdateDiagnostics {
    bool degenerate_fallback = false; // no particle had a finite log-density
    int clamped_anchors = 0;
    int rank_deficient_anchors = 0;
    double max_loglik = 0.0;
};

using LogLikFn =
    std::function<LogLikelihood(const SceneState&, const std::vector<Observation>&)>;

// Per-dimension jitter bandwidths used after resampling.
using BandwidthRule = std::function<Eigen::VectorXd(const ParticleSet&)>;

// Silverman's rule: scale * (4 / ((d+2) N))^(1/(d+4)) times the weighted
// per-dimension standard deviation of the cloud.
BandwidthRule silverman_rule(double scale = 1.0);

// Independent uniform draws inside the axis-aligned state box; equal weights.
ParticleSet init_uniform(const SceneState& bounds_min, const SceneState& bounds_max,
                         int n_particles, std::uint64_t seed);

// One motion step x <- F x + q applied to every particle; weights unchanged.
ParticleSet predict(const ParticleSet& ps, const MotionModel& mm, std::uint64_t seed);

// Bayes update: log-weights += log-likelihood, then renormalized. If no
// particle scores a finite density the weights fall back to uniform and the
// diagnostics flag it.
ParticleSet update(const ParticleSet& ps, const std::vector<Observation>& observations,
                   const LogLikFn& loglik_fn, UpdateDiagnostics* diag = nullptr);

// Systematic resampling plus per-dimension Gaussian jitter whenever the
// effective sample size drops below ess_threshold * N; identity otherwise.
ParticleSet resample_regularized(const ParticleSet& ps, const BandwidthRule& bandwidth_rule,
                                 double ess_threshold, std::uint64_t seed);

// Weighted mean state and weighted covariance of the cloud.
std::pair<SceneState, Eigen::MatrixXd> estimate(const ParticleSet& ps);

} // namespace geochan

#endif
