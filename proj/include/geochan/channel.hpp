// SPDX-License-Identifier: Apache-2.0
//
// geochan: geometry-based radio channel estimation, prediction, and fusion
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
// ------------------------------------------------------------------------

#ifndef GEOCHAN_CHANNEL_HPP
#define GEOCHAN_CHANNEL_HPP

#include "geochan/geometry.hpp"

#include <Eigen/Dense>
#include <complex>
#include <cstdint>
#include <functional>
#include <vector>

namespace geochan {

// OFDM-style frequency grid: n_freq tones spaced at bandwidth / n_freq,
// centered on the carrier fc. freq_offsets holds the per-tone offsets from
// fc in Hz and is symmetric about zero for grids built by make_radio.
struct RadioConfig {
    double fc = 6.175e9;         // Hz
    double bandwidth = 500e6;    // Hz
    int n_freq = 1;              // tone count
    Eigen::VectorXd freq_offsets; // Hz, one entry per tone
    double c = 299792458.0;      // m/s

    double wavelength() const { return c / fc; }
    double delta_f() const { return bandwidth / n_freq; }
};

// Symmetric grid: offset k = (k - (n_freq-1)/2) * delta_f.
RadioConfig make_radio(double fc, double bandwidth, int n_freq);

// Evenly spaced subset of an existing grid, used when inference evaluates
// fewer tones than generation. n_freq must divide full.n_freq; the picked
// rows sit half a slot off center when the stride is even.
RadioConfig subset_radio(const RadioConfig& full, int n_freq);

// Row indices into a frequency-fastest stacked vector that correspond to
// keeping only the tones of subset_radio(full, n_keep), for all M antennas.
std::vector<int> subset_rows(int n_full, int n_keep, int n_antennas);

// A physical anchor: phase center plus mounting rotation. All anchors of a
// scene share one antenna template.
struct PhysicalAnchor {
    Eigen::Vector3d center = Eigen::Vector3d::Zero();
    Eigen::Matrix3d rotation = Eigen::Matrix3d::Identity();
};

// Static world model shared by the simulator and the estimator: radio grid,
// anchors, the common antenna template, and the surface mirror points.
// path_enabled optionally masks propagation paths out of every dictionary
// (length S^2+1 in enumerate_paths order); empty means all enabled.
struct Scene {
    RadioConfig radio;
    std::vector<PhysicalAnchor> anchors;
    Eigen::Matrix3Xd antenna_template;
    std::vector<MvaPoint> mvas;
    std::vector<bool> path_enabled;

    int n_antennas() const { return static_cast<int>(antenna_template.cols()); }
    int n_anchors() const { return static_cast<int>(anchors.size()); }
    int n_surfaces() const { return static_cast<int>(mvas.size()); }
};

// Per-anchor dictionary: one unit-modulus column per propagation path,
// stacked frequency-fastest (row m*n_freq + k is antenna m, tone k).
// Disabled columns are kept in place; active() drops them, and downstream
// model orders count active columns only.
struct Dictionary {
    Eigen::MatrixXcd columns;     // (n_freq*M) x K
    std::vector<PathId> path_ids; // length K
    std::vector<bool> enabled;    // length K

    int n_active() const;
    std::vector<int> active_indices() const;
    Eigen::MatrixXcd active() const;
};

// One noisy stacked channel snapshot for one anchor at one time step.
struct Observation {
    Eigen::VectorXcd y;
    int anchor_id = 0;
    int time_index = 0;
};

// Synthetic path amplitudes: free-space 1/d decay from a reference gain at
// 1 m, an extra multiplicative loss per bounce, and an optional predicate
// that zeroes the direct path (obstructed line of sight). Amplitudes are
// constant across antennas and tones of one anchor.
struct AmplitudeModel {
    double reference_gain = 1.0;
    double reflection_loss = 0.5; // linear, in (0, 1]
    std::function<bool(const Eigen::Vector3d&)> los_blocked; // empty: never

    bool blocked(const Eigen::Vector3d& agent) const {
        return los_blocked && los_blocked(agent);
    }
};

// Stacked phase response for one path: element (tone k, antenna m) equals
// exp(-j*2*pi/c*(fc + offset_k)*d_m), placed at row m*n_freq + k.
Eigen::VectorXcd manifold_column(const RadioConfig& radio, const Eigen::VectorXd& lengths);

// Dictionary for anchor `anchor_id` with the agent at `agent`, using the
// scene's own surfaces, or an explicit surface hypothesis.
Dictionary build_dictionary(const Scene& scene, const Eigen::Vector3d& agent, int anchor_id);
Dictionary build_dictionary(const Scene& scene, const Eigen::Vector3d& agent,
                            const std::vector<MvaPoint>& mvas, int anchor_id);

// Path amplitudes in dictionary column order under `amps`; the distance of
// each path is agent to (possibly mirrored) anchor phase center.
Eigen::VectorXd path_amplitudes(const Scene& scene, const Eigen::Vector3d& agent,
                                const std::vector<MvaPoint>& mvas, int anchor_id,
                                const AmplitudeModel& amps);

// y = Psi * alpha + w with w drawn i.i.d. circular Gaussian at per-element
// variance noise_var. Deterministic in rng_seed.
Observation synthesize_observation(const Scene& scene, const Eigen::Vector3d& agent,
                                   int anchor_id, const AmplitudeModel& amps,
                                   double noise_var, std::uint64_t rng_seed,
                                   int time_index = 0);

// Average per-element SNR over anchors: (1/J) sum_j (|h_j|^2/len_j)/var_j.
double channel_snr(const std::vector<Eigen::VectorXcd>& truth,
                   const std::vector<double>& noise_vars);

// Per-element noise variance that makes channel_snr equal snr_target when
// applied uniformly to every anchor.
double calibrate_noise(const std::vector<Eigen::VectorXcd>& truth, double snr_target);

} // namespace geochan

#endif
