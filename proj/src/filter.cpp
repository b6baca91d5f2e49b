// SPDX-License-Identifier: Apache-2.0
//
// geochan: geometry-based radio channel estimation, prediction, and fusion
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
// ------------------------------------------------------------------------

#include "geochan/filter.hpp"
#include "geochan/random.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace geochan {

Eigen::VectorXd SceneState::to_vector() const {
    Eigen::VectorXd v(dim());
    v.head<3>() = position;
    v.segment<2>(3) = velocity;
    v.tail(mvas.size()) = mvas;
    return v;
}

SceneState SceneState::from_vector(const Eigen::VectorXd& v) {
    if (v.size() < 5)
        throw std::invalid_argument("SceneState::from_vector: need at least 5 entries");
    if ((v.size() - 5) % 3 != 0)
        throw std::invalid_argument("SceneState::from_vector: mirror block must stack 3-vectors");

    SceneState s;
    s.position = v.head<3>();
    s.velocity = v.segment<2>(3);
    s.mvas = v.tail(v.size() - 5);
    return s;
}

std::vector<MvaPoint> SceneState::mva_points() const {
    std::vector<MvaPoint> pts(static_cast<std::size_t>(n_surfaces()));
    for (int s = 0; s < n_surfaces(); ++s)
        pts[static_cast<std::size_t>(s)].position = mvas.segment<3>(3 * s);
    return pts;
}

Eigen::MatrixXd MotionModel::transition_matrix(int n_surfaces) const {
    const int d = 5 + 3 * n_surfaces;
    Eigen::MatrixXd f = Eigen::MatrixXd::Identity(d, d);
    f(0, 3) = dt;
    f(1, 4) = dt;
    return f;
}

Eigen::VectorXd MotionModel::process_std(int n_surfaces) const {
    Eigen::VectorXd s(5 + 3 * n_surfaces);
    s.head<3>().setConstant(sigma_p);
    s.segment<2>(3).setConstant(sigma_v);
    s.tail(3 * n_surfaces).setConstant(sigma_mva);
    return s;
}

SceneState MotionModel::propagate_mean(const SceneState& s) const {
    SceneState out = s;
    out.position.head<2>() += dt * s.velocity;
    return out;
}

Eigen::VectorXd ParticleSet::weights() const {
    if (log_weights.size() == 0)
        return {};
    const double max_lw = log_weights.maxCoeff();
    Eigen::VectorXd w = (log_weights.array() - max_lw).exp();
    return w / w.sum();
}

double ParticleSet::ess() const {
    const Eigen::VectorXd w = weights();
    return 1.0 / w.squaredNorm();
}

BandwidthRule silverman_rule(double scale) {
    return [scale](const ParticleSet& ps) {
        const int n = ps.size();
        const int d = ps.states.empty() ? 0 : ps.states.front().dim();
        const Eigen::VectorXd w = ps.weights();

        Eigen::VectorXd mean = Eigen::VectorXd::Zero(d);
        for (int i = 0; i < n; ++i)
            mean += w[i] * ps.states[static_cast<std::size_t>(i)].to_vector();
        Eigen::VectorXd var = Eigen::VectorXd::Zero(d);
        for (int i = 0; i < n; ++i) {
            const Eigen::VectorXd delta =
                ps.states[static_cast<std::size_t>(i)].to_vector() - mean;
            var += w[i] * delta.cwiseAbs2();
        }

        const double factor =
            scale * std::pow(4.0 / ((d + 2.0) * n), 1.0 / (d + 4.0));
        return (factor * var.cwiseSqrt()).eval();
    };
}

ParticleSet init_uniform(const SceneState& bounds_min, const SceneState& bounds_max,
                         int n_particles, std::uint64_t seed) {
    if (n_particles < 1)
        throw std::invalid_argument("init_uniform: need at least one particle");
    if (bounds_min.mvas.size() != bounds_max.mvas.size())
        throw std::invalid_argument("init_uniform: bound dimensions differ");

    const Eigen::VectorXd lo = bounds_min.to_vector();
    const Eigen::VectorXd hi = bounds_max.to_vector();
    if ((lo.array() > hi.array()).any())
        throw std::invalid_argument("init_uniform: empty box (min exceeds max)");

    RandomStream rng(seed);
    ParticleSet ps;
    ps.states.resize(static_cast<std::size_t>(n_particles));
    for (SceneState& s : ps.states) {
        Eigen::VectorXd v(lo.size());
        for (Eigen::Index k = 0; k < v.size(); ++k)
            v[k] = rng.uniform(lo[k], hi[k]);
        s = SceneState::from_vector(v);
    }
    ps.log_weights =
        Eigen::VectorXd::Constant(n_particles, -std::log(static_cast<double>(n_particles)));
    return ps;
}

ParticleSet predict(const ParticleSet& ps, const MotionModel& mm, std::uint64_t seed) {
    RandomStream rng(seed);
    ParticleSet out = ps;
    for (SceneState& s : out.states) {
        const Eigen::VectorXd sigma = mm.process_std(s.n_surfaces());
        Eigen::VectorXd v = mm.propagate_mean(s).to_vector();
        for (Eigen::Index k = 0; k < v.size(); ++k)
            v[k] += sigma[k] * rng.normal();
        s = SceneState::from_vector(v);
    }
    return out;
}

ParticleSet update(const ParticleSet& ps, const std::vector<Observation>& observations,
                   const LogLikFn& loglik_fn, UpdateDiagnostics* diag) {
    UpdateDiagnostics local;
    ParticleSet out = ps;
    Eigen::VectorXd ll(ps.size());
    for (int i = 0; i < ps.size(); ++i) {
        const LogLikelihood l = loglik_fn(ps.states[static_cast<std::size_t>(i)], observations);
        ll[i] = l.value;
        local.clamped_anchors += l.clamped_anchors;
        local.rank_deficient_anchors += l.rank_deficient_anchors;
    }

    Eigen::VectorXd lw = ps.log_weights + ll;
    const double max_lw = lw.maxCoeff();
    if (!std::isfinite(max_lw)) {
        // Every particle is impossible under the observations; restart from
        // uniform weights rather than producing NaNs.
        local.degenerate_fallback = true;
        local.max_loglik = max_lw;
        out.log_weights.setConstant(ps.size(), -std::log(static_cast<double>(ps.size())));
        if (diag)
            *diag = local;
        return out;
    }

    const double log_norm = max_lw + std::log((lw.array() - max_lw).exp().sum());
    out.log_weights = lw.array() - log_norm;
    local.max_loglik = ll.maxCoeff();
    if (diag)
        *diag = local;
    return out;
}

ParticleSet resample_regularized(const ParticleSet& ps, const BandwidthRule& bandwidth_rule,
                                 double ess_threshold, std::uint64_t seed) {
    const int n = ps.size();
    if (n == 0 || ps.ess() >= ess_threshold * n)
        return ps;

    const Eigen::VectorXd w = ps.weights();
    const Eigen::VectorXd h = bandwidth_rule(ps);

    RandomStream rng(seed);
    const double u0 = rng.uniform() / n;

    ParticleSet out;
    out.states.resize(static_cast<std::size_t>(n));
    out.log_weights =
        Eigen::VectorXd::Constant(n, -std::log(static_cast<double>(n)));

    double cum = w[0];
    int j = 0;
    for (int i = 0; i < n; ++i) {
        const double u = u0 + static_cast<double>(i) / n;
        while (u > cum && j < n - 1)
            cum += w[++j];
        Eigen::VectorXd v = ps.states[static_cast<std::size_t>(j)].to_vector();
        for (Eigen::Index k = 0; k < v.size(); ++k)
            v[k] += h[k] * rng.normal();
        out.states[static_cast<std::size_t>(i)] = SceneState::from_vector(v);
    }
    return out;
}

std::pair<SceneState, Eigen::MatrixXd> estimate(const ParticleSet& ps) {
    if (ps.size() == 0)
        throw std::invalid_argument("estimate: empty particle set");

    const Eigen::VectorXd w = ps.weights();
    const int d = ps.states.front().dim();

    Eigen::VectorXd mean = Eigen::VectorXd::Zero(d);
    for (int i = 0; i < ps.size(); ++i)
        mean += w[i] * ps.states[static_cast<std::size_t>(i)].to_vector();

    Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(d, d);
    for (int i = 0; i < ps.size(); ++i) {
        const Eigen::VectorXd delta = ps.states[static_cast<std::size_t>(i)].to_vector() - mean;
        cov += w[i] * (delta * delta.transpose());
    }
    return {SceneState::from_vector(mean), cov};
}

} // namespace geochan
