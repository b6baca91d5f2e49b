// SPDX-License-Identifier: Apache-2.0
//
// geochan: geometry-based radio channel estimation, prediction, and fusion
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
// ------------------------------------------------------------------------

#include "geochan/metrics.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <stdexcept>

namespace geochan {

static std::vector<double> cdf_over(const std::vector<double>& errors,
                                    std::vector<double>& grid_out) {
    double max_err = 0.0;
    for (double e : errors)
        if (std::isfinite(e))
            max_err = std::max(max_err, e);

    const int n_bins = std::min(static_cast<int>(std::ceil(max_err / 0.01)) + 1, 100000);
    grid_out.resize(static_cast<std::size_t>(n_bins));
    std::vector<double> cdf(static_cast<std::size_t>(n_bins));
    for (int i = 0; i < n_bins; ++i) {
        const double edge = 0.01 * i;
        grid_out[static_cast<std::size_t>(i)] = edge;
        int count = 0;
        for (double e : errors)
            if (e <= edge + 1e-12)
                ++count;
        cdf[static_cast<std::size_t>(i)] =
            errors.empty() ? 0.0 : static_cast<double>(count) / static_cast<double>(errors.size());
    }
    return cdf;
}

// Mean of the finite entries in the linear domain, reported in dB;
// NaN when nothing contributed.
static double mean_db(const std::vector<double>& linear) {
    double acc = 0.0;
    int count = 0;
    for (double v : linear) {
        if (std::isnan(v))
            continue;
        acc += v;
        ++count;
    }
    if (count == 0)
        return std::numeric_limits<double>::quiet_NaN();
    const double mean = acc / count;
    return mean > 0.0 ? 10.0 * std::log10(mean) : -std::numeric_limits<double>::infinity();
}

Summary summarize(const std::vector<RunRecord>& records, double convergence_cut) {
    if (records.empty())
        throw std::invalid_argument("summarize: no records");

    Summary s;
    s.n_runs = static_cast<int>(records.size());
    for (const RunRecord& run : records)
        for (const StepRecord& rec : run.steps)
            s.n_steps = std::max(s.n_steps, rec.step);
    s.converged_from_step = converged_from(s.n_steps, convergence_cut);

    double acc_h = 0.0, acc_v = 0.0, acc_ess = 0.0;
    int count = 0, count_all = 0;
    std::vector<double> err_h, err_v;
    std::vector<double> pg[5];
    for (const RunRecord& run : records) {
        s.run_rmse_horizontal.push_back(
            window_rmse_horizontal(run, s.converged_from_step, s.n_steps));
        s.run_rmse_vertical.push_back(window_rmse_vertical(run, s.converged_from_step, s.n_steps));
        for (const StepRecord& rec : run.steps) {
            acc_ess += rec.ess;
            ++count_all;
            if (rec.step < s.converged_from_step)
                continue;
            const double eh =
                (rec.estimate.position.head<2>() - rec.truth.position.head<2>()).norm();
            const double ev = std::abs(rec.estimate.position[2] - rec.truth.position[2]);
            acc_h += eh * eh;
            acc_v += ev * ev;
            ++count;
            err_h.push_back(eh);
            err_v.push_back(ev);

            const EfficiencyReport& e = rec.efficiency;
            if (e.pg_perfect > 0.0) {
                pg[0].push_back(e.pg_measured / e.pg_perfect);
                pg[1].push_back(e.pg_predicted / e.pg_perfect);
                pg[2].push_back(e.pg_fused / e.pg_perfect);
                pg[3].push_back(e.pg_outdated / e.pg_perfect);
                pg[4].push_back(e.pg_future_predicted / e.pg_perfect);
            }
        }
    }
    if (count == 0)
        throw std::invalid_argument("summarize: converged window is empty");

    s.rmse_horizontal = std::sqrt(acc_h / count);
    s.rmse_vertical = std::sqrt(acc_v / count);
    s.cdf_horizontal = cdf_over(err_h, s.cdf_error_m);
    std::vector<double> grid_v;
    s.cdf_vertical = cdf_over(err_v, grid_v);
    // One shared grid: pad the shorter CDF with ones.
    if (grid_v.size() > s.cdf_error_m.size()) {
        s.cdf_error_m = grid_v;
        s.cdf_horizontal.resize(grid_v.size(), 1.0);
    } else {
        s.cdf_vertical.resize(s.cdf_error_m.size(), 1.0);
    }

    s.mean_ess = acc_ess / count_all;
    s.mean_pg_measured_db = mean_db(pg[0]);
    s.mean_pg_predicted_db = mean_db(pg[1]);
    s.mean_pg_fused_db = mean_db(pg[2]);
    s.mean_pg_outdated_db = mean_db(pg[3]);
    s.mean_pg_future_db = mean_db(pg[4]);
    return s;
}

static nlohmann::json finite_or_string(double v) {
    if (std::isnan(v))
        return "nan";
    if (std::isinf(v))
        return v > 0 ? "inf" : "-inf";
    return v;
}

std::string summary_to_json(const Summary& s) {
    nlohmann::json j;
    j["n_runs"] = s.n_runs;
    j["n_steps"] = s.n_steps;
    j["converged_from_step"] = s.converged_from_step;
    j["rmse_horizontal_m"] = finite_or_string(s.rmse_horizontal);
    j["rmse_vertical_m"] = finite_or_string(s.rmse_vertical);
    j["run_rmse_horizontal_m"] = s.run_rmse_horizontal;
    j["run_rmse_vertical_m"] = s.run_rmse_vertical;
    j["cdf_error_m"] = s.cdf_error_m;
    j["cdf_horizontal"] = s.cdf_horizontal;
    j["cdf_vertical"] = s.cdf_vertical;
    j["mean_ess"] = finite_or_string(s.mean_ess);
    j["mean_pg_measured_db"] = finite_or_string(s.mean_pg_measured_db);
    j["mean_pg_predicted_db"] = finite_or_string(s.mean_pg_predicted_db);
    j["mean_pg_fused_db"] = finite_or_string(s.mean_pg_fused_db);
    j["mean_pg_outdated_db"] = finite_or_string(s.mean_pg_outdated_db);
    j["mean_pg_future_db"] = finite_or_string(s.mean_pg_future_db);
    return j.dump(2) + "\n";
}

void write_summary_json(const std::string& path, const Summary& summary) {
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw std::runtime_error("write_summary_json: cannot open " + path);
    out << summary_to_json(summary);
    if (!out)
        throw std::runtime_error("write_summary_json: write failed for " + path);
}

double median(std::vector<double> values) {
    if (values.empty())
        throw std::invalid_argument("median: no values");
    for (double v : values)
        if (std::isnan(v))
            throw std::invalid_argument("median: NaN value");
    std::sort(values.begin(), values.end());
    const std::size_t n = values.size();
    return n % 2 == 1 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

} // namespace geochan
