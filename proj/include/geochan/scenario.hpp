// SPDX-License-Identifier: Apache-2.0
//
// geochan: geometry-based radio channel estimation, prediction, and fusion
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
// ------------------------------------------------------------------------

#ifndef GEOCHAN_SCENARIO_HPP
#define GEOCHAN_SCENARIO_HPP

#include "geochan/channel.hpp"
#include "geochan/filter.hpp"

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace geochan {

// Axis-aligned box used to obstruct the direct path.
struct BoxObstacle {
    Eigen::Vector3d lo = Eigen::Vector3d::Zero();
    Eigen::Vector3d hi = Eigen::Vector3d::Zero();
};

// Slab test: does the closed segment a-b meet the box anywhere?
bool segment_intersects_box(const Eigen::Vector3d& a, const Eigen::Vector3d& b,
                            const BoxObstacle& box);

// Complete description of one synthetic experiment: world, waveform,
// trajectory, amplitude model, filter settings, and seeds. Built-in
// factories provide ready-made instances; load_config reads the same
// fields from a key-value text file (schema documented in the README).
struct ScenarioConfig {
    // Waveform and arrays.
    double fc = 6.175e9;
    double bandwidth = 500e6;
    int n_freq = 4;           // generation tone count
    int inference_n_freq = 4; // tones the estimator uses; divides n_freq
    int array_rows = 4;
    int array_cols = 4;
    double array_spacing = 0.0; // meters; 0 picks half a carrier wavelength

    // World.
    std::vector<PhysicalAnchor> anchors;
    std::vector<MvaPoint> mvas_true;
    std::vector<bool> path_mask; // empty: all paths enabled

    // Amplitudes and direct-path blocking.
    double reference_gain = 1.0;
    double reflection_loss = 0.5;
    std::optional<BoxObstacle> obstacle;
    std::optional<std::pair<int, int>> olos_steps; // 1-based inclusive window

    // Trajectory and noise.
    std::vector<Eigen::Vector3d> waypoints;
    double speed = 0.12; // m/s along the polyline
    int n_steps = 50;
    double snr_at_start_db = 0.0; // calibrates the noise variance at step 1

    // Filter.
    int n_particles = 500;
    double ess_threshold = 0.5;
    double jitter_scale = 1.0;
    MotionModel motion;
    Eigen::Vector3d init_pos_min = Eigen::Vector3d::Zero();
    Eigen::Vector3d init_pos_max = Eigen::Vector3d::Zero();
    Eigen::Vector2d init_vel_min = Eigen::Vector2d::Zero();
    Eigen::Vector2d init_vel_max = Eigen::Vector2d::Zero();
    std::vector<Eigen::Vector3d> init_mva_min; // one box per surface
    std::vector<Eigen::Vector3d> init_mva_max;

    // Campaign.
    std::uint64_t seed = 1;
    std::uint64_t bf_seed = 0xb3a3; // beamforming-evaluation noise only
    int runs = 1;
    double convergence_cut = 0.2; // fraction of leading steps outside RMSE

    // Throws std::invalid_argument naming the offending field.
    void validate() const;

    double spacing() const; // resolved array spacing in meters
    Scene scene() const;            // generation-grid world with true surfaces
    Scene inference_scene() const;  // estimator's (possibly thinner) grid

    // Truth states for steps 1..n_steps: positions walk the waypoint
    // polyline at constant speed, velocities are the forward differences,
    // surfaces are the true mirror points.
    std::vector<SceneState> trajectory() const;

    // Amplitude model of one (step, anchor) pair; the blocking predicate
    // combines the forced window with the obstacle shadow toward the
    // anchor.
    AmplitudeModel amplitude_model(int step_1based, int anchor_id) const;

    SceneState bounds_min() const;
    SceneState bounds_max() const;
};

// Desk-scale scene: 5 anchors with 4x4 arrays, one wall, a rectangular
// walk, 4 tones of 500 MHz.
ScenarioConfig desk_scenario();

// Hall-scale scene: 15 anchors with 8x8 arrays, two walls, 6 tones.
ScenarioConfig hall_scenario();

ScenarioConfig parse_config(std::istream& in, const std::string& origin = "<stream>");
ScenarioConfig load_config(const std::string& path);
void save_config(const ScenarioConfig& config, std::ostream& out);

} // namespace geochan

#endif
