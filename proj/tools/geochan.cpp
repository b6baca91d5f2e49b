// SPDX-License-Identifier: Apache-2.0
//
// geochan: geometry-based radio channel estimation, prediction, and fusion
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
// ------------------------------------------------------------------------
//
// Command-line front end: simulate raw observations, run the tracking
// pipeline, score CSI prediction and fusion from saved estimates, and
// summarize step files into metrics.

#include "geochan/io.hpp"
#include "geochan/metrics.hpp"
#include "geochan/tracking.hpp"

#include <CLI11.hpp>

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

namespace {

struct CommonArgs {
    std::string config_path;
    std::string out_dir = "out";
    std::uint64_t seed = 0;
    bool seed_set = false;
    int runs = 0;
};

void add_common(CLI::App* cmd, CommonArgs* args, bool needs_config) {
    auto* copt = cmd->add_option("--config", args->config_path, "scenario config file");
    if (needs_config)
        copt->required();
    cmd->add_option("--out", args->out_dir, "output directory");
    cmd->add_option("--seed", args->seed, "override the config's master seed")
        ->each([args](const std::string&) { args->seed_set = true; });
    cmd->add_option("--runs", args->runs, "override the config's run count");
}

geochan::ScenarioConfig load_with_overrides(const CommonArgs& args) {
    geochan::ScenarioConfig config = geochan::load_config(args.config_path);
    if (args.seed_set)
        config.seed = args.seed;
    if (args.runs > 0)
        config.runs = args.runs;
    config.validate();
    return config;
}

std::string join(const std::string& dir, const std::string& name) {
    return (std::filesystem::path(dir) / name).string();
}

void write_observation_csv(const std::string& path,
                           const std::vector<std::vector<geochan::Observation>>& per_step) {
    std::vector<std::vector<std::string>> rows;
    for (std::size_t n = 0; n < per_step.size(); ++n)
        for (const geochan::Observation& obs : per_step[n])
            for (Eigen::Index i = 0; i < obs.y.size(); ++i)
                rows.push_back({std::to_string(n + 1), std::to_string(obs.anchor_id),
                                std::to_string(i), geochan::format_double(obs.y[i].real()),
                                geochan::format_double(obs.y[i].imag())});
    geochan::write_csv(path, {"step", "anchor", "index", "re", "im"}, rows);
}

int cmd_simulate(const CommonArgs& args) {
    const geochan::ScenarioConfig config = load_with_overrides(args);
    std::filesystem::create_directories(args.out_dir);
    const double noise_var = geochan::calibrated_noise_var(config);

    std::vector<std::vector<geochan::Observation>> wideband, carrier;
    std::vector<std::vector<std::string>> truth_rows;
    const std::vector<geochan::SceneState> truth = config.trajectory();
    for (int n = 1; n <= config.n_steps; ++n) {
        wideband.push_back(geochan::step_observations(config, 0, n, noise_var));
        carrier.push_back(geochan::step_carrier_snapshots(config, 0, n, noise_var));
        const geochan::SceneState& t = truth[static_cast<std::size_t>(n) - 1];
        truth_rows.push_back({std::to_string(n), geochan::format_double(t.position[0]),
                              geochan::format_double(t.position[1]),
                              geochan::format_double(t.position[2]),
                              geochan::format_double(t.velocity[0]),
                              geochan::format_double(t.velocity[1])});
    }

    write_observation_csv(join(args.out_dir, "observations.csv"), wideband);
    write_observation_csv(join(args.out_dir, "carrier_observations.csv"), carrier);
    geochan::write_csv(join(args.out_dir, "truth.csv"),
                       {"step", "px", "py", "pz", "vx", "vy"}, truth_rows);
    std::cout << "simulate: wrote " << config.n_steps << " steps ("
              << config.anchors.size() << " anchors, noise variance "
              << geochan::format_double(noise_var) << ") to " << args.out_dir << "\n";
    return 0;
}

int cmd_track(const CommonArgs& args, const std::string& likelihood, bool los_only) {
    const geochan::ScenarioConfig config = load_with_overrides(args);
    std::filesystem::create_directories(args.out_dir);

    geochan::TrackingOptions opts;
    opts.kind = likelihood == "det" ? geochan::LikelihoodModel::Kind::deterministic
                                    : geochan::LikelihoodModel::Kind::stochastic;
    opts.los_only = los_only;

    const std::vector<geochan::RunRecord> records = geochan::run_tracking(config, opts);
    geochan::write_steps_csv(join(args.out_dir, "steps.csv"), records);
    geochan::write_estimates_csv(join(args.out_dir, "estimates.csv"), records);

    for (const geochan::RunRecord& run : records)
        std::cout << "track: run " << run.run << " horizontal RMSE "
                  << geochan::format_double(run.rmse_horizontal) << " m, vertical "
                  << geochan::format_double(run.rmse_vertical) << " m\n";
    return 0;
}

std::string db_cell(double pg, double pg_perfect) {
    if (!(pg_perfect > 0.0) || std::isnan(pg))
        return "nan";
    if (pg <= 0.0)
        return "-inf";
    return geochan::format_double(10.0 * std::log10(pg / pg_perfect));
}

int cmd_evaluate(const CommonArgs& args) {
    const geochan::ScenarioConfig config = load_with_overrides(args);
    const double noise_var = geochan::calibrated_noise_var(config);
    const geochan::Scene carrier = geochan::carrier_scene(config.scene());

    const std::vector<std::vector<geochan::SceneState>> estimates = geochan::read_estimates_csv(
        join(args.out_dir, "estimates.csv"), static_cast<int>(config.mvas_true.size()));

    std::vector<std::vector<std::string>> rows;
    for (std::size_t r = 0; r < estimates.size(); ++r) {
        const std::vector<geochan::SceneState>& runs_estimates = estimates[r];
        std::vector<geochan::Observation> prev;
        for (std::size_t n = 0; n < runs_estimates.size(); ++n) {
            const int step = static_cast<int>(n) + 1;
            const std::vector<Eigen::VectorXcd> clean =
                geochan::step_carrier_truth(config, step);
            const std::vector<geochan::Observation> snapshots =
                geochan::step_carrier_snapshots(config, static_cast<int>(r), step, noise_var);
            const geochan::EfficiencyReport rep = geochan::efficiency_step(
                carrier, clean, snapshots, n > 0 ? &prev : nullptr, runs_estimates[n],
                n > 0 ? &runs_estimates[n - 1] : nullptr, config.motion, noise_var, step);
            rows.push_back({std::to_string(r + 1), std::to_string(step),
                            geochan::format_double(10.0 * std::log10(rep.snr)),
                            db_cell(rep.pg_measured, rep.pg_perfect),
                            db_cell(rep.pg_predicted, rep.pg_perfect),
                            db_cell(rep.pg_fused, rep.pg_perfect),
                            db_cell(rep.pg_outdated, rep.pg_perfect),
                            db_cell(rep.pg_future_predicted, rep.pg_perfect)});
            prev = snapshots;
        }
    }
    geochan::write_csv(join(args.out_dir, "efficiency.csv"),
                       {"run", "step", "snr_db", "pg_meas_db", "pg_pred_db", "pg_fused_db",
                        "pg_outdated_db", "pg_future_db"},
                       rows);
    std::cout << "evaluate: wrote " << rows.size() << " rows to "
              << join(args.out_dir, "efficiency.csv") << "\n";
    return 0;
}

int cmd_summarize(const CommonArgs& args) {
    double cut = 0.2;
    if (!args.config_path.empty())
        cut = geochan::load_config(args.config_path).convergence_cut;

    const std::vector<geochan::RunRecord> records =
        geochan::read_steps_csv(join(args.out_dir, "steps.csv"));
    const geochan::Summary summary = geochan::summarize(records, cut);
    geochan::write_summary_json(join(args.out_dir, "summary.json"), summary);
    std::cout << "summarize: " << summary.n_runs << " runs, horizontal RMSE "
              << geochan::format_double(summary.rmse_horizontal) << " m, vertical "
              << geochan::format_double(summary.rmse_vertical) << " m\n";
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"geometry-based radio channel estimation, prediction, and fusion"};
    app.require_subcommand(1);

    CommonArgs sim_args, track_args, eval_args, sum_args;
    std::string likelihood = "sto";
    bool los_only = false;

    CLI::App* simulate = app.add_subcommand("simulate", "emit synthetic observations");
    add_common(simulate, &sim_args, true);

    CLI::App* track = app.add_subcommand("track", "run the full tracking pipeline");
    add_common(track, &track_args, true);
    track->add_option("--likelihood", likelihood, "likelihood family: det or sto")
        ->check(CLI::IsMember({"det", "sto"}));
    track->add_flag("--los-only", los_only, "mask every reflected path out of the model");

    CLI::App* evaluate = app.add_subcommand("evaluate", "score CSI from saved estimates");
    add_common(evaluate, &eval_args, true);

    CLI::App* summarize = app.add_subcommand("summarize", "condense steps.csv into summary.json");
    add_common(summarize, &sum_args, false);

    CLI11_PARSE(app, argc, argv);

    try {
        if (simulate->parsed())
            return cmd_simulate(sim_args);
        if (track->parsed())
            return cmd_track(track_args, likelihood, los_only);
        if (evaluate->parsed())
            return cmd_evaluate(eval_args);
        if (summarize->parsed())
            return cmd_summarize(sum_args);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
