// SPDX-License-Identifier: Apache-2.0
//
// geochan: geometry-based radio channel estimation, prediction, and fusion
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
// ------------------------------------------------------------------------

#include "geochan/likelihood.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace geochan {

static constexpr double kLogPi = 1.1447298858494001741; // ln(pi)

DictionaryFactor::DictionaryFactor(const Eigen::MatrixXcd& psi)
    : psi_(psi), svd_(psi, Eigen::ComputeThinU | Eigen::ComputeThinV) {
    const Eigen::VectorXd& s = svd_.singularValues();
    const double cutoff = s.size() > 0 ? kRankTolerance * s[0] : 0.0;
    rank_ = 0;
    for (Eigen::Index i = 0; i < s.size(); ++i)
        if (s[i] > cutoff && s[i] > 0.0)
            ++rank_;
}

Eigen::VectorXcd DictionaryFactor::pinv_apply(const Eigen::VectorXcd& y) const {
    const Eigen::VectorXcd uy = svd_.matrixU().leftCols(rank_).adjoint() * y;
    const Eigen::VectorXd s = svd_.singularValues().head(rank_);
    return svd_.matrixV().leftCols(rank_) * (uy.array() / s.array().cast<std::complex<double>>()).matrix();
}

Eigen::MatrixXcd DictionaryFactor::pinv_gram() const {
    const Eigen::MatrixXcd w =
        svd_.matrixV().leftCols(rank_) *
        svd_.singularValues().head(rank_).cwiseInverse().asDiagonal();
    Eigen::MatrixXcd g = w * w.adjoint();
    return 0.5 * (g + g.adjoint().eval());
}

// ---- low-rank kernels ----

static Eigen::LLT<Eigen::MatrixXcd> core_llt(const Eigen::MatrixXcd& f, double sigma2) {
    Eigen::MatrixXcd c = f.adjoint() * f;
    c.diagonal().array() += sigma2;
    Eigen::LLT<Eigen::MatrixXcd> llt(c);
    if (llt.info() != Eigen::Success)
        throw std::runtime_error("low-rank core factorization failed (matrix not positive definite)");
    return llt;
}

double lowrank_logdet(const Eigen::MatrixXcd& f, double sigma2, Eigen::Index n) {
    if (sigma2 <= 0.0)
        throw std::invalid_argument("lowrank_logdet: sigma2 must be > 0");
    if (f.cols() == 0)
        return static_cast<double>(n) * std::log(sigma2);

    const Eigen::LLT<Eigen::MatrixXcd> llt = core_llt(f, sigma2);
    double logdet_core = 0.0;
    for (Eigen::Index i = 0; i < f.cols(); ++i)
        logdet_core += 2.0 * std::log(std::real(llt.matrixLLT()(i, i)));
    return static_cast<double>(n - f.cols()) * std::log(sigma2) + logdet_core;
}

Eigen::VectorXcd lowrank_solve(const Eigen::MatrixXcd& f, double sigma2,
                               const Eigen::VectorXcd& b) {
    if (sigma2 <= 0.0)
        throw std::invalid_argument("lowrank_solve: sigma2 must be > 0");
    if (f.cols() == 0)
        return b / sigma2;

    const Eigen::LLT<Eigen::MatrixXcd> llt = core_llt(f, sigma2);
    return (b - f * llt.solve(f.adjoint() * b)) / sigma2;
}

double lowrank_quadform(const Eigen::MatrixXcd& f, double sigma2,
                        const Eigen::VectorXcd& b) {
    if (sigma2 <= 0.0)
        throw std::invalid_argument("lowrank_quadform: sigma2 must be > 0");
    if (f.cols() == 0)
        return b.squaredNorm() / sigma2;

    const Eigen::LLT<Eigen::MatrixXcd> llt = core_llt(f, sigma2);
    const Eigen::VectorXcd t = f.adjoint() * b;
    return (b.squaredNorm() - std::real(t.dot(llt.solve(t)))) / sigma2;
}

Eigen::MatrixXcd psd_factor(const Eigen::MatrixXcd& p_hat, bool* clamped) {
    const Eigen::MatrixXcd sym = 0.5 * (p_hat + p_hat.adjoint().eval());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> eig(sym);
    if (eig.info() != Eigen::Success)
        throw std::runtime_error("psd_factor: eigendecomposition failed");

    const Eigen::VectorXd& lam = eig.eigenvalues();
    if (clamped)
        *clamped = (lam.array() < 0.0).any();

    int r = 0;
    for (Eigen::Index i = 0; i < lam.size(); ++i)
        if (lam[i] > 0.0)
            ++r;

    Eigen::MatrixXcd a(p_hat.rows(), r);
    int col = 0;
    for (Eigen::Index i = 0; i < lam.size(); ++i)
        if (lam[i] > 0.0)
            a.col(col++) = eig.eigenvectors().col(i) * std::sqrt(lam[i]);
    return a;
}

// ---- concentration operations ----

static void check_obs(const Dictionary& dict, const Observation& obs) {
    if (obs.y.size() != dict.columns.rows())
        throw std::invalid_argument("observation length does not match dictionary rows");
}

Eigen::VectorXcd concentrate_amplitudes(const Dictionary& dict, const Observation& obs,
                                        bool* rank_deficient) {
    check_obs(dict, obs);
    const DictionaryFactor factor(dict.active());
    if (rank_deficient)
        *rank_deficient = factor.rank_deficient();
    return factor.pinv_apply(obs.y);
}

static double subspace_energy(const DictionaryFactor& factor, const Eigen::VectorXcd& y) {
    const Eigen::VectorXcd alpha = factor.pinv_apply(y);
    return y.squaredNorm() - std::real((y.adjoint() * factor.psi() * alpha)(0));
}

double noise_subspace_energy(const Dictionary& dict, const Observation& obs) {
    check_obs(dict, obs);
    return subspace_energy(DictionaryFactor(dict.active()), obs.y);
}

double concentrate_noise_det(const Dictionary& dict, const Observation& obs) {
    return std::max(noise_subspace_energy(dict, obs), 0.0) /
           static_cast<double>(dict.columns.rows());
}

double concentrate_noise_sto(const Dictionary& dict, const Observation& obs) {
    const Eigen::Index n = dict.columns.rows();
    const int k = dict.n_active();
    if (n <= k)
        throw std::invalid_argument("concentrate_noise_sto: need more samples than model order");
    return std::max(noise_subspace_energy(dict, obs), 0.0) / static_cast<double>(n - k);
}

Eigen::MatrixXcd concentrate_source_cov(const Dictionary& dict, const Observation& obs,
                                        double sigma2_hat) {
    check_obs(dict, obs);
    const DictionaryFactor factor(dict.active());
    const Eigen::VectorXcd alpha = factor.pinv_apply(obs.y);
    Eigen::MatrixXcd p = alpha * alpha.adjoint() - sigma2_hat * factor.pinv_gram();
    return 0.5 * (p + p.adjoint().eval());
}

// ---- per-anchor log-densities ----

// Floor for the concentrated noise variance, relative to per-sample signal
// energy; keeps the densities finite when a hypothesis fits exactly.
static double noise_floor(const Eigen::VectorXcd& y) {
    const double per_sample = y.squaredNorm() / static_cast<double>(y.size());
    const double floor = 1e-12 * per_sample;
    return floor > 0.0 ? floor : std::numeric_limits<double>::min();
}

LogLikelihood anchor_loglik_det(const Eigen::MatrixXcd& psi, const Eigen::VectorXcd& y) {
    const Eigen::Index n = y.size();
    const DictionaryFactor factor(psi);
    const double energy = std::max(subspace_energy(factor, y), 0.0);

    double sigma2 = energy / static_cast<double>(n);
    const double floor = noise_floor(y);
    const bool clamped = sigma2 < floor;
    if (clamped)
        sigma2 = floor;

    LogLikelihood out;
    out.value = -static_cast<double>(n) * (kLogPi + std::log(sigma2)) - energy / sigma2;
    out.clamped_anchors = clamped ? 1 : 0;
    out.rank_deficient_anchors = factor.rank_deficient() ? 1 : 0;
    return out;
}

LogLikelihood anchor_loglik_sto(const Eigen::MatrixXcd& psi, const Eigen::VectorXcd& y) {
    const Eigen::Index n = y.size();
    const Eigen::Index k = psi.cols();
    if (n <= k)
        throw std::invalid_argument("anchor_loglik_sto: need more samples than model order");

    const DictionaryFactor factor(psi);
    const Eigen::VectorXcd alpha = factor.pinv_apply(y);
    const double energy =
        std::max(y.squaredNorm() - std::real((y.adjoint() * psi * alpha)(0)), 0.0);

    double sigma2 = energy / static_cast<double>(n - k);
    const double floor = noise_floor(y);
    bool clamped = sigma2 < floor;
    if (clamped)
        sigma2 = floor;

    Eigen::MatrixXcd p = alpha * alpha.adjoint() - sigma2 * factor.pinv_gram();
    bool p_clamped = false;
    const Eigen::MatrixXcd a = psd_factor(p, &p_clamped);
    clamped = clamped || p_clamped;

    const Eigen::MatrixXcd f = psi * a;
    const Eigen::VectorXcd resid = y - psi * alpha;

    LogLikelihood out;
    out.value = -static_cast<double>(n) * kLogPi - lowrank_logdet(f, sigma2, n) -
                lowrank_quadform(f, sigma2, resid);
    out.clamped_anchors = clamped ? 1 : 0;
    out.rank_deficient_anchors = factor.rank_deficient() ? 1 : 0;
    return out;
}

// ---- scene-level likelihood ----

static LogLikelihood scene_loglik(const Scene& scene, const SceneHypothesis& hyp,
                                  const std::vector<Observation>& observations,
                                  LikelihoodModel::Kind kind) {
    LogLikelihood total;
    for (const Observation& obs : observations) {
        const Dictionary dict = build_dictionary(scene, hyp.agent, hyp.mvas, obs.anchor_id);
        const LogLikelihood part = kind == LikelihoodModel::Kind::deterministic
                                       ? anchor_loglik_det(dict.active(), obs.y)
                                       : anchor_loglik_sto(dict.active(), obs.y);
        total.value += part.value;
        total.clamped_anchors += part.clamped_anchors;
        total.rank_deficient_anchors += part.rank_deficient_anchors;
    }
    return total;
}

LogLikelihood loglik_deterministic(const Scene& scene, const SceneHypothesis& hyp,
                                   const std::vector<Observation>& observations) {
    return scene_loglik(scene, hyp, observations, LikelihoodModel::Kind::deterministic);
}

LogLikelihood loglik_stochastic(const Scene& scene, const SceneHypothesis& hyp,
                                const std::vector<Observation>& observations) {
    return scene_loglik(scene, hyp, observations, LikelihoodModel::Kind::stochastic);
}

LikelihoodModel::LikelihoodModel(Scene scene, Kind kind, bool los_only)
    : scene_(std::move(scene)), kind_(kind), los_only_(los_only) {
    if (los_only_) {
        const std::vector<PathId> paths = enumerate_paths(scene_.n_surfaces());
        if (scene_.path_enabled.empty())
            scene_.path_enabled.assign(paths.size(), true);
        for (std::size_t k = 0; k < paths.size(); ++k)
            scene_.path_enabled[k] = scene_.path_enabled[k] && paths[k].is_los();
    }
}

LogLikelihood LikelihoodModel::operator()(const SceneHypothesis& hyp,
                                          const std::vector<Observation>& observations) const {
    // A hypothesis with a collapsed mirror point has no defined dictionary;
    // score it as impossible instead of throwing inside the filter loop.
    for (const MvaPoint& m : hyp.mvas)
        if (m.position.norm() < kMvaDegeneracyThreshold)
            return {-std::numeric_limits<double>::infinity(), 0, 0};
    return scene_loglik(scene_, hyp, observations, kind_);
}

} // namespace geochan
