// SPDX-License-Identifier: Apache-2.0
//
// geochan: geometry-based radio channel estimation, prediction, and fusion
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
// ------------------------------------------------------------------------

#ifndef GEOCHAN_METRICS_HPP
#define GEOCHAN_METRICS_HPP

#include "geochan/tracking.hpp"

#include <string>
#include <vector>

namespace geochan {

// Campaign-level metrics over the converged window (the leading
// convergence_cut fraction of each run is discarded). Path-gain means are
// taken in the linear domain over finite entries and reported as decibel
// ratios against perfect CSI.
struct Summary {
    int n_runs = 0;
    int n_steps = 0;
    int converged_from_step = 0;

    double rmse_horizontal = 0.0; // pooled over runs, meters
    double rmse_vertical = 0.0;
    std::vector<double> run_rmse_horizontal; // one entry per run
    std::vector<double> run_rmse_vertical;

    // cdf_horizontal[i] = fraction of windowed steps with horizontal error
    // <= cdf_error_m[i]; the grid runs 0, 0.01, 0.02, ... meters.
    std::vector<double> cdf_error_m;
    std::vector<double> cdf_horizontal;
    std::vector<double> cdf_vertical;

    double mean_ess = 0.0;
    double mean_pg_measured_db = 0.0;
    double mean_pg_predicted_db = 0.0;
    double mean_pg_fused_db = 0.0;
    double mean_pg_outdated_db = 0.0;
    double mean_pg_future_db = 0.0;
};

Summary summarize(const std::vector<RunRecord>& records, double convergence_cut);

std::string summary_to_json(const Summary& summary);
void write_summary_json(const std::string& path, const Summary& summary);

// Median of a copy of the values; NaNs are rejected.
double median(std::vector<double> values);

} // namespace geochan

#endif
