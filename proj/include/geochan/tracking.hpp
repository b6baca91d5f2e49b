// SPDX-License-Identifier: Apache-2.0
//
// geochan: geometry-based radio channel estimation, prediction, and fusion
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
// ------------------------------------------------------------------------

#ifndef GEOCHAN_TRACKING_HPP
#define GEOCHAN_TRACKING_HPP

#include "geochan/beamform.hpp"
#include "geochan/scenario.hpp"

#include <string>
#include <vector>

namespace geochan {

// Everything recorded about one time step of one run.
struct StepRecord {
    int run = 0;  // 1-based
    int step = 0; // 1-based
    SceneState truth;
    SceneState estimate;
    Eigen::VectorXd cov_diag;
    double ess = 0.0;
    UpdateDiagnostics update_diag;
    EfficiencyReport efficiency; // all-zero when CSI evaluation is off
};

// One Monte Carlo run: its steps plus position RMSE over the converged
// window (leading convergence_cut fraction of steps discarded).
struct RunRecord {
    int run = 0;
    std::vector<StepRecord> steps;
    double rmse_horizontal = 0.0;
    double rmse_vertical = 0.0;
};

struct TrackingOptions {
    LikelihoodModel::Kind kind = LikelihoodModel::Kind::stochastic;
    bool los_only = false;
    bool evaluate_csi = true;
};

// First 1-based step index inside the converged window.
int converged_from(int n_steps, double convergence_cut);

// Horizontal position RMSE of one run over steps first..last (1-based,
// inclusive, clipped to the recorded range).
double window_rmse_horizontal(const RunRecord& run, int first, int last);
double window_rmse_vertical(const RunRecord& run, int first, int last);

// Full campaign: for each run, init -> per step {synthesize observations
// at every anchor -> update -> estimate -> [CSI scoring] -> resample ->
// predict}. Deterministic in (config.seed, config.bf_seed); the
// beamforming-evaluation noise never feeds back into tracking.
std::vector<RunRecord> run_tracking(const ScenarioConfig& config,
                                    const TrackingOptions& opts = {});

// Noise variance the campaign uses, calibrated on the step-1 channels.
double calibrated_noise_var(const ScenarioConfig& config);

// The exact observations the campaign sees at one (run, step): wideband
// snapshots on the generation grid, and the single-tone snapshots the CSI
// scoring uses. simulate/track/evaluate all share these draw chains.
std::vector<Observation> step_observations(const ScenarioConfig& config, int run_0based,
                                           int step_1based, double noise_var);
std::vector<Observation> step_carrier_snapshots(const ScenarioConfig& config, int run_0based,
                                                int step_1based, double noise_var);

// Noise-free single-tone channels at one step's true position.
std::vector<Eigen::VectorXcd> step_carrier_truth(const ScenarioConfig& config,
                                                 int step_1based);

// steps.csv rows in the documented column layout; path gains are decibel
// ratios against the same step's perfect-CSI gain.
void write_steps_csv(const std::string& path, const std::vector<RunRecord>& records);

// estimates.csv: full estimated state per (run, step), so CSI evaluation
// can rerun without refiltering.
void write_estimates_csv(const std::string& path, const std::vector<RunRecord>& records);
std::vector<std::vector<SceneState>> read_estimates_csv(const std::string& path,
                                                        int n_surfaces);

// Rebuilds skeleton records from steps.csv (positions, ESS, and path gains
// as fractions of the perfect gain); enough for summarize().
std::vector<RunRecord> read_steps_csv(const std::string& path);

} // namespace geochan

#endif
