// SPDX-License-Identifier: Apache-2.0
//
// geochan: geometry-based radio channel estimation, prediction, and fusion
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
// ------------------------------------------------------------------------

#include "geochan/tracking.hpp"
#include "geochan/io.hpp"
#include "geochan/random.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace geochan {

// RNG purposes; the beamforming stream hangs off config.bf_seed instead of
// config.seed so its draws can never shift the tracking estimates.
namespace {
constexpr std::uint64_t kInitDraw = 1;
constexpr std::uint64_t kPredictDraw = 2;
constexpr std::uint64_t kObservationDraw = 3;
constexpr std::uint64_t kResampleDraw = 4;
} // namespace

int converged_from(int n_steps, double convergence_cut) {
    return static_cast<int>(std::floor(convergence_cut * n_steps)) + 1;
}

static double window_rmse(const RunRecord& run, int first, int last, bool horizontal) {
    double acc = 0.0;
    int count = 0;
    for (const StepRecord& rec : run.steps) {
        if (rec.step < first || rec.step > last)
            continue;
        if (horizontal)
            acc += (rec.estimate.position.head<2>() - rec.truth.position.head<2>()).squaredNorm();
        else
            acc += std::pow(rec.estimate.position[2] - rec.truth.position[2], 2);
        ++count;
    }
    return count > 0 ? std::sqrt(acc / count) : std::numeric_limits<double>::quiet_NaN();
}

double window_rmse_horizontal(const RunRecord& run, int first, int last) {
    return window_rmse(run, first, last, true);
}

double window_rmse_vertical(const RunRecord& run, int first, int last) {
    return window_rmse(run, first, last, false);
}

double calibrated_noise_var(const ScenarioConfig& config) {
    const Scene gen = config.scene();
    const std::vector<SceneState> truth = config.trajectory();
    std::vector<Eigen::VectorXcd> clean;
    for (int j = 0; j < gen.n_anchors(); ++j)
        clean.push_back(synthesize_observation(gen, truth.front().position, j,
                                               config.amplitude_model(1, j), 0.0, 0, 1)
                            .y);
    return calibrate_noise(clean, std::pow(10.0, config.snr_at_start_db / 10.0));
}

std::vector<Observation> step_observations(const ScenarioConfig& config, int run_0based,
                                           int step_1based, double noise_var) {
    const Scene gen = config.scene();
    const Eigen::Vector3d pos =
        config.trajectory()[static_cast<std::size_t>(step_1based) - 1].position;
    std::vector<Observation> observations;
    for (int j = 0; j < gen.n_anchors(); ++j)
        observations.push_back(synthesize_observation(
            gen, pos, j, config.amplitude_model(step_1based, j), noise_var,
            derive_seed(config.seed, {kObservationDraw, static_cast<std::uint64_t>(run_0based),
                                      static_cast<std::uint64_t>(step_1based),
                                      static_cast<std::uint64_t>(j)}),
            step_1based));
    return observations;
}

std::vector<Observation> step_carrier_snapshots(const ScenarioConfig& config, int run_0based,
                                                int step_1based, double noise_var) {
    const Scene carrier = carrier_scene(config.scene());
    const Eigen::Vector3d pos =
        config.trajectory()[static_cast<std::size_t>(step_1based) - 1].position;
    std::vector<Observation> snapshots;
    for (int j = 0; j < carrier.n_anchors(); ++j)
        snapshots.push_back(synthesize_observation(
            carrier, pos, j, config.amplitude_model(step_1based, j), noise_var,
            derive_seed(config.bf_seed, {static_cast<std::uint64_t>(run_0based),
                                         static_cast<std::uint64_t>(step_1based),
                                         static_cast<std::uint64_t>(j)}),
            step_1based));
    return snapshots;
}

std::vector<Eigen::VectorXcd> step_carrier_truth(const ScenarioConfig& config,
                                                 int step_1based) {
    const Scene carrier = carrier_scene(config.scene());
    const Eigen::Vector3d pos =
        config.trajectory()[static_cast<std::size_t>(step_1based) - 1].position;
    std::vector<Eigen::VectorXcd> clean;
    for (int j = 0; j < carrier.n_anchors(); ++j)
        clean.push_back(synthesize_observation(carrier, pos, j,
                                               config.amplitude_model(step_1based, j), 0.0, 0,
                                               step_1based)
                            .y);
    return clean;
}

std::vector<RunRecord> run_tracking(const ScenarioConfig& config, const TrackingOptions& opts) {
    config.validate();

    const Scene gen = config.scene();
    const Scene carrier = carrier_scene(gen);
    const LikelihoodModel model(config.inference_scene(), opts.kind, opts.los_only);
    const std::vector<SceneState> truth = config.trajectory();
    const double noise_var = calibrated_noise_var(config);
    const int n_anchors = gen.n_anchors();
    const bool thin_grid = config.inference_n_freq != config.n_freq;
    const std::vector<int> rows =
        thin_grid ? subset_rows(config.n_freq, config.inference_n_freq,
                                config.array_rows * config.array_cols)
                  : std::vector<int>{};

    const LogLikFn loglik = [&model](const SceneState& s, const std::vector<Observation>& obs) {
        return model(s.hypothesis(), obs);
    };
    const BandwidthRule bandwidth = silverman_rule(config.jitter_scale);

    std::vector<RunRecord> records;
    for (int r = 0; r < config.runs; ++r) {
        RunRecord run;
        run.run = r + 1;

        ParticleSet ps =
            init_uniform(config.bounds_min(), config.bounds_max(), config.n_particles,
                         derive_seed(config.seed, {kInitDraw, static_cast<std::uint64_t>(r)}));

        std::vector<Observation> prev_snapshots;
        SceneState prev_estimate;
        for (int n = 1; n <= config.n_steps; ++n) {
            const SceneState& truth_n = truth[static_cast<std::size_t>(n - 1)];

            std::vector<Observation> observations;
            for (int j = 0; j < n_anchors; ++j) {
                Observation obs = synthesize_observation(
                    gen, truth_n.position, j, config.amplitude_model(n, j), noise_var,
                    derive_seed(config.seed,
                                {kObservationDraw, static_cast<std::uint64_t>(r),
                                 static_cast<std::uint64_t>(n), static_cast<std::uint64_t>(j)}),
                    n);
                if (thin_grid) {
                    Eigen::VectorXcd sub(static_cast<Eigen::Index>(rows.size()));
                    for (std::size_t i = 0; i < rows.size(); ++i)
                        sub[static_cast<Eigen::Index>(i)] = obs.y[rows[i]];
                    obs.y = std::move(sub);
                }
                observations.push_back(std::move(obs));
            }

            StepRecord rec;
            rec.run = r + 1;
            rec.step = n;
            rec.truth = truth_n;

            ps = update(ps, observations, loglik, &rec.update_diag);
            const auto [est, cov] = estimate(ps);
            rec.estimate = est;
            rec.cov_diag = cov.diagonal();
            rec.ess = ps.ess();

            if (opts.evaluate_csi) {
                std::vector<Eigen::VectorXcd> clean;
                std::vector<Observation> snapshots;
                for (int j = 0; j < n_anchors; ++j) {
                    const AmplitudeModel amp = config.amplitude_model(n, j);
                    clean.push_back(
                        synthesize_observation(carrier, truth_n.position, j, amp, 0.0, 0, n).y);
                    snapshots.push_back(synthesize_observation(
                        carrier, truth_n.position, j, amp, noise_var,
                        derive_seed(config.bf_seed,
                                    {static_cast<std::uint64_t>(r), static_cast<std::uint64_t>(n),
                                     static_cast<std::uint64_t>(j)}),
                        n));
                }
                rec.efficiency = efficiency_step(
                    carrier, clean, snapshots, n > 1 ? &prev_snapshots : nullptr, est,
                    n > 1 ? &prev_estimate : nullptr, config.motion, noise_var, n);
                prev_snapshots = std::move(snapshots);
                prev_estimate = est;
            }
            run.steps.push_back(std::move(rec));

            ps = resample_regularized(
                ps, bandwidth, config.ess_threshold,
                derive_seed(config.seed, {kResampleDraw, static_cast<std::uint64_t>(r),
                                          static_cast<std::uint64_t>(n)}));
            ps = predict(ps, config.motion,
                         derive_seed(config.seed, {kPredictDraw, static_cast<std::uint64_t>(r),
                                                   static_cast<std::uint64_t>(n)}));
        }

        const int first = converged_from(config.n_steps, config.convergence_cut);
        run.rmse_horizontal = window_rmse_horizontal(run, first, config.n_steps);
        run.rmse_vertical = window_rmse_vertical(run, first, config.n_steps);
        records.push_back(std::move(run));
    }
    return records;
}

static std::string db_ratio(double pg, double pg_perfect) {
    if (!(pg_perfect > 0.0) || std::isnan(pg))
        return "nan";
    if (pg <= 0.0)
        return "-inf";
    return format_double(10.0 * std::log10(pg / pg_perfect));
}

void write_steps_csv(const std::string& path, const std::vector<RunRecord>& records) {
    const std::vector<std::string> header = {
        "run",        "step",       "px",          "py",          "pz",
        "ex",         "ey",         "ez",          "ess",         "pg_meas_db",
        "pg_pred_db", "pg_fused_db", "pg_outdated_db", "pg_future_db"};

    std::vector<std::vector<std::string>> rows;
    for (const RunRecord& run : records) {
        for (const StepRecord& rec : run.steps) {
            const EfficiencyReport& e = rec.efficiency;
            rows.push_back({std::to_string(rec.run), std::to_string(rec.step),
                            format_double(rec.truth.position[0]),
                            format_double(rec.truth.position[1]),
                            format_double(rec.truth.position[2]),
                            format_double(rec.estimate.position[0]),
                            format_double(rec.estimate.position[1]),
                            format_double(rec.estimate.position[2]), format_double(rec.ess),
                            db_ratio(e.pg_measured, e.pg_perfect),
                            db_ratio(e.pg_predicted, e.pg_perfect),
                            db_ratio(e.pg_fused, e.pg_perfect),
                            db_ratio(e.pg_outdated, e.pg_perfect),
                            db_ratio(e.pg_future_predicted, e.pg_perfect)});
        }
    }
    write_csv(path, header, rows);
}

void write_estimates_csv(const std::string& path, const std::vector<RunRecord>& records) {
    std::vector<std::string> header = {"run", "step", "ex", "ey", "ez", "evx", "evy"};
    const int n_surfaces =
        records.empty() || records.front().steps.empty()
            ? 0
            : records.front().steps.front().estimate.n_surfaces();
    for (int s = 1; s <= n_surfaces; ++s)
        for (const char* axis : {"x", "y", "z"})
            header.push_back("m" + std::to_string(s) + axis);

    std::vector<std::vector<std::string>> rows;
    for (const RunRecord& run : records) {
        for (const StepRecord& rec : run.steps) {
            std::vector<std::string> row = {std::to_string(rec.run), std::to_string(rec.step)};
            const Eigen::VectorXd v = rec.estimate.to_vector();
            for (Eigen::Index i = 0; i < v.size(); ++i)
                row.push_back(format_double(v[i]));
            rows.push_back(std::move(row));
        }
    }
    write_csv(path, header, rows);
}

std::vector<RunRecord> read_steps_csv(const std::string& path) {
    const CsvTable table = read_csv(path);
    const int c_run = table.column("run");
    const int c_step = table.column("step");
    const int c_p[3] = {table.column("px"), table.column("py"), table.column("pz")};
    const int c_e[3] = {table.column("ex"), table.column("ey"), table.column("ez")};
    const int c_ess = table.column("ess");
    const int c_pg[5] = {table.column("pg_meas_db"), table.column("pg_pred_db"),
                         table.column("pg_fused_db"), table.column("pg_outdated_db"),
                         table.column("pg_future_db")};

    std::vector<RunRecord> records;
    for (const std::vector<std::string>& row : table.rows) {
        auto cell = [&](int c) { return std::stod(row[static_cast<std::size_t>(c)]); };
        const int run = std::stoi(row[static_cast<std::size_t>(c_run)]);
        if (run < 1)
            throw std::runtime_error("read_steps_csv: run must be >= 1");
        if (static_cast<int>(records.size()) < run)
            records.resize(static_cast<std::size_t>(run));
        records[static_cast<std::size_t>(run) - 1].run = run;

        StepRecord rec;
        rec.run = run;
        rec.step = std::stoi(row[static_cast<std::size_t>(c_step)]);
        rec.truth.position = {cell(c_p[0]), cell(c_p[1]), cell(c_p[2])};
        rec.estimate.position = {cell(c_e[0]), cell(c_e[1]), cell(c_e[2])};
        rec.ess = cell(c_ess);
        rec.efficiency.pg_perfect = 1.0;
        double* pg[5] = {&rec.efficiency.pg_measured, &rec.efficiency.pg_predicted,
                         &rec.efficiency.pg_fused, &rec.efficiency.pg_outdated,
                         &rec.efficiency.pg_future_predicted};
        for (int i = 0; i < 5; ++i)
            *pg[i] = std::pow(10.0, cell(c_pg[i]) / 10.0);
        records[static_cast<std::size_t>(run) - 1].steps.push_back(std::move(rec));
    }
    return records;
}

std::vector<std::vector<SceneState>> read_estimates_csv(const std::string& path,
                                                        int n_surfaces) {
    const CsvTable table = read_csv(path);
    const int expect = 2 + 5 + 3 * n_surfaces;
    if (static_cast<int>(table.header.size()) != expect)
        throw std::runtime_error("read_estimates_csv: column count does not match surface count");

    std::vector<std::vector<SceneState>> runs;
    for (const std::vector<std::string>& row : table.rows) {
        const int run = std::stoi(row[0]);
        const int step = std::stoi(row[1]);
        if (run < 1 || step < 1)
            throw std::runtime_error("read_estimates_csv: run and step must be >= 1");
        if (static_cast<int>(runs.size()) < run)
            runs.resize(static_cast<std::size_t>(run));
        std::vector<SceneState>& steps = runs[static_cast<std::size_t>(run) - 1];
        if (static_cast<int>(steps.size()) + 1 != step)
            throw std::runtime_error("read_estimates_csv: steps of run " + std::to_string(run) +
                                     " are not consecutive");

        Eigen::VectorXd v(expect - 2);
        for (int i = 2; i < expect; ++i)
            v[i - 2] = std::stod(row[static_cast<std::size_t>(i)]);
        steps.push_back(SceneState::from_vector(v));
    }
    return runs;
}

} // namespace geochan
