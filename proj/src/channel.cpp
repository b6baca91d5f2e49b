// SPDX-License-Identifier: Apache-2.0
//
// geochan: geometry-based radio channel estimation, prediction, and fusion
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
// ------------------------------------------------------------------------

#include "geochan/channel.hpp"
#include "geochan/random.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace geochan {

RadioConfig make_radio(double fc, double bandwidth, int n_freq) {
    if (fc <= 0.0 || bandwidth < 0.0 || n_freq < 1)
        throw std::invalid_argument("make_radio: need fc > 0, bandwidth >= 0, n_freq >= 1");

    RadioConfig r;
    r.fc = fc;
    r.bandwidth = bandwidth;
    r.n_freq = n_freq;
    r.freq_offsets.resize(n_freq);
    const double df = r.delta_f();
    for (int k = 0; k < n_freq; ++k)
        r.freq_offsets[k] = (k - 0.5 * (n_freq - 1)) * df;
    return r;
}

RadioConfig subset_radio(const RadioConfig& full, int n_freq) {
    if (n_freq < 1 || full.n_freq % n_freq != 0)
        throw std::invalid_argument("subset_radio: subset size must divide the full grid");

    const int stride = full.n_freq / n_freq;
    const int start = (stride - 1) / 2;
    RadioConfig r = full;
    r.n_freq = n_freq;
    r.freq_offsets.resize(n_freq);
    for (int k = 0; k < n_freq; ++k)
        r.freq_offsets[k] = full.freq_offsets[start + k * stride];
    return r;
}

std::vector<int> subset_rows(int n_full, int n_keep, int n_antennas) {
    if (n_keep < 1 || n_full % n_keep != 0)
        throw std::invalid_argument("subset_rows: subset size must divide the full grid");

    const int stride = n_full / n_keep;
    const int start = (stride - 1) / 2;
    std::vector<int> rows;
    rows.reserve(static_cast<std::size_t>(n_keep) * n_antennas);
    for (int m = 0; m < n_antennas; ++m)
        for (int k = 0; k < n_keep; ++k)
            rows.push_back(m * n_full + start + k * stride);
    return rows;
}

int Dictionary::n_active() const {
    int n = 0;
    for (bool e : enabled)
        n += e ? 1 : 0;
    return n;
}

std::vector<int> Dictionary::active_indices() const {
    std::vector<int> idx;
    idx.reserve(enabled.size());
    for (int k = 0; k < static_cast<int>(enabled.size()); ++k)
        if (enabled[static_cast<std::size_t>(k)])
            idx.push_back(k);
    return idx;
}

Eigen::MatrixXcd Dictionary::active() const {
    const std::vector<int> idx = active_indices();
    Eigen::MatrixXcd out(columns.rows(), static_cast<Eigen::Index>(idx.size()));
    for (std::size_t k = 0; k < idx.size(); ++k)
        out.col(static_cast<Eigen::Index>(k)) = columns.col(idx[k]);
    return out;
}

Eigen::VectorXcd manifold_column(const RadioConfig& radio, const Eigen::VectorXd& lengths) {
    if (radio.freq_offsets.size() != radio.n_freq)
        throw std::invalid_argument("manifold_column: freq_offsets size mismatch");

    const int n_freq = radio.n_freq;
    const Eigen::Index m_ant = lengths.size();
    const double two_pi_over_c = 2.0 * std::numbers::pi / radio.c;

    Eigen::VectorXcd out(m_ant * n_freq);
    for (Eigen::Index m = 0; m < m_ant; ++m) {
        const double base = -two_pi_over_c * lengths[m];
        for (int k = 0; k < n_freq; ++k)
            out[m * n_freq + k] = std::polar(1.0, base * (radio.fc + radio.freq_offsets[k]));
    }
    return out;
}

static void check_anchor_id(const Scene& scene, int anchor_id) {
    if (anchor_id < 0 || anchor_id >= scene.n_anchors())
        throw std::invalid_argument("anchor_id out of range");
}

Dictionary build_dictionary(const Scene& scene, const Eigen::Vector3d& agent,
                            const std::vector<MvaPoint>& mvas, int anchor_id) {
    check_anchor_id(scene, anchor_id);
    const PhysicalAnchor& pa = scene.anchors[static_cast<std::size_t>(anchor_id)];
    const std::vector<PathId> paths = enumerate_paths(static_cast<int>(mvas.size()));
    const Eigen::Index k_total = static_cast<Eigen::Index>(paths.size());

    if (!scene.path_enabled.empty() && scene.path_enabled.size() != paths.size())
        throw std::invalid_argument("build_dictionary: path_enabled length must be S^2+1");

    Dictionary dict;
    dict.columns.resize(static_cast<Eigen::Index>(scene.n_antennas()) * scene.radio.n_freq, k_total);
    dict.path_ids = paths;
    dict.enabled.resize(paths.size(), true);
    for (Eigen::Index k = 0; k < k_total; ++k) {
        const AnchorArray layout = build_layout(pa.center, pa.rotation, scene.antenna_template,
                                                paths[static_cast<std::size_t>(k)], mvas);
        dict.columns.col(k) = manifold_column(scene.radio, path_lengths(layout, agent));
        if (!scene.path_enabled.empty())
            dict.enabled[static_cast<std::size_t>(k)] = scene.path_enabled[static_cast<std::size_t>(k)];
    }
    return dict;
}

Dictionary build_dictionary(const Scene& scene, const Eigen::Vector3d& agent, int anchor_id) {
    return build_dictionary(scene, agent, scene.mvas, anchor_id);
}

Eigen::VectorXd path_amplitudes(const Scene& scene, const Eigen::Vector3d& agent,
                                const std::vector<MvaPoint>& mvas, int anchor_id,
                                const AmplitudeModel& amps) {
    check_anchor_id(scene, anchor_id);
    const PhysicalAnchor& pa = scene.anchors[static_cast<std::size_t>(anchor_id)];
    const std::vector<PathId> paths = enumerate_paths(static_cast<int>(mvas.size()));
    const bool los_off = amps.blocked(agent);

    Eigen::VectorXd a(static_cast<Eigen::Index>(paths.size()));
    for (std::size_t k = 0; k < paths.size(); ++k) {
        const PathId path = paths[k];
        if (path.is_los() && los_off) {
            a[static_cast<Eigen::Index>(k)] = 0.0;
            continue;
        }
        const AnchorArray layout = build_layout(pa.center, pa.rotation, scene.antenna_template,
                                                path, mvas);
        const double d = (layout.center - agent).norm();
        if (d <= 0.0)
            throw std::invalid_argument("path_amplitudes: agent coincides with a phase center");
        a[static_cast<Eigen::Index>(k)] =
            amps.reference_gain / d * std::pow(amps.reflection_loss, path.bounces());
    }
    return a;
}

Observation synthesize_observation(const Scene& scene, const Eigen::Vector3d& agent,
                                   int anchor_id, const AmplitudeModel& amps,
                                   double noise_var, std::uint64_t rng_seed,
                                   int time_index) {
    if (noise_var < 0.0)
        throw std::invalid_argument("synthesize_observation: noise_var must be >= 0");

    const Dictionary dict = build_dictionary(scene, agent, anchor_id);
    const Eigen::VectorXd amp = path_amplitudes(scene, agent, scene.mvas, anchor_id, amps);

    Observation obs;
    obs.anchor_id = anchor_id;
    obs.time_index = time_index;
    obs.y = dict.columns * amp.cast<std::complex<double>>();
    if (noise_var > 0.0) {
        RandomStream rng(rng_seed);
        for (Eigen::Index i = 0; i < obs.y.size(); ++i)
            obs.y[i] += rng.circular_normal(noise_var);
    }
    return obs;
}

double channel_snr(const std::vector<Eigen::VectorXcd>& truth,
                   const std::vector<double>& noise_vars) {
    if (truth.empty() || truth.size() != noise_vars.size())
        throw std::invalid_argument("channel_snr: need one noise variance per truth vector");

    double acc = 0.0;
    for (std::size_t j = 0; j < truth.size(); ++j) {
        // Zero variance is the noiseless limit and yields infinity.
        if (truth[j].size() == 0 || noise_vars[j] < 0.0)
            throw std::invalid_argument("channel_snr: empty channel or negative variance");
        acc += truth[j].squaredNorm() / static_cast<double>(truth[j].size()) / noise_vars[j];
    }
    return acc / static_cast<double>(truth.size());
}

double calibrate_noise(const std::vector<Eigen::VectorXcd>& truth, double snr_target) {
    if (truth.empty() || snr_target <= 0.0)
        throw std::invalid_argument("calibrate_noise: need channels and snr_target > 0");

    double mean_energy = 0.0;
    for (const Eigen::VectorXcd& h : truth)
        mean_energy += h.squaredNorm() / static_cast<double>(h.size());
    return mean_energy / static_cast<double>(truth.size()) / snr_target;
}

} // namespace geochan
