// SPDX-License-Identifier: Apache-2.0
//
// geochan: geometry-based radio channel estimation, prediction, and fusion
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
// ------------------------------------------------------------------------

#ifndef GEOCHAN_LIKELIHOOD_HPP
#define GEOCHAN_LIKELIHOOD_HPP

#include "geochan/channel.hpp"

#include <Eigen/Dense>
#include <vector>

namespace geochan {

// Relative singular-value cutoff of the rank-revealing dictionary
// factorization: directions with s < tol * s_max are truncated.
inline constexpr double kRankTolerance = 1e-8;

// Closed-form conditional estimates of the per-anchor nuisance parameters
// given a geometry hypothesis: path amplitudes (least squares), noise
// variance, and the single-snapshot source covariance. Dimensions follow
// the active dictionary columns.
struct ConcentratedEstimates {
    Eigen::VectorXcd alpha_hat; // K
    double sigma2_hat = 0.0;
    Eigen::MatrixXcd p_hat;     // K x K, Hermitian
};

// Sum over anchors of per-anchor log-densities, with counters for the
// numerical guards that fired while evaluating them.
struct LogLikelihood {
    double value = 0.0;
    int clamped_anchors = 0;        // noise floor or covariance flooring applied
    int rank_deficient_anchors = 0; // dictionary lost column rank
};

// Rank-revealing decomposition of a dictionary, shared by every operation
// that needs the pseudoinverse. Truncates at kRankTolerance.
class DictionaryFactor {
  public:
    explicit DictionaryFactor(const Eigen::MatrixXcd& psi);

    Eigen::Index rows() const { return psi_.rows(); }
    Eigen::Index cols() const { return psi_.cols(); }
    int rank() const { return rank_; }
    bool rank_deficient() const { return rank_ < cols(); }
    const Eigen::MatrixXcd& psi() const { return psi_; }

    // pinv(Psi) * y
    Eigen::VectorXcd pinv_apply(const Eigen::VectorXcd& y) const;
    // pinv(Psi) * pinv(Psi)^H, a K x K Hermitian matrix
    Eigen::MatrixXcd pinv_gram() const;

  private:
    Eigen::MatrixXcd psi_;
    Eigen::JacobiSVD<Eigen::MatrixXcd> svd_;
    int rank_ = 0;
};

// ---- low-rank kernels for R = sigma2*I_N + F*F^H with tall F (N x r) ----
// These never form the N x N matrix; determinant via the Sylvester
// identity, solves and quadratic forms via the Woodbury identity.

double lowrank_logdet(const Eigen::MatrixXcd& f, double sigma2, Eigen::Index n);
Eigen::VectorXcd lowrank_solve(const Eigen::MatrixXcd& f, double sigma2,
                               const Eigen::VectorXcd& b);
double lowrank_quadform(const Eigen::MatrixXcd& f, double sigma2,
                        const Eigen::VectorXcd& b);

// Factor A (K x r) of the nearest positive semidefinite matrix to a
// Hermitian p_hat, so that A*A^H equals p_hat with negative eigenvalues
// floored at zero. r is the count of strictly positive eigenvalues.
// Sets *clamped when flooring changed anything.
Eigen::MatrixXcd psd_factor(const Eigen::MatrixXcd& p_hat, bool* clamped = nullptr);

// ---- concentration operations (active dictionary columns only) ----

Eigen::VectorXcd concentrate_amplitudes(const Dictionary& dict, const Observation& obs,
                                        bool* rank_deficient = nullptr);

// ||P_perp y||^2 = ||y||^2 - (y^H Psi)(pinv(Psi) y), the energy outside the
// dictionary column space, computed without forming the projector.
double noise_subspace_energy(const Dictionary& dict, const Observation& obs);

// Noise-variance estimates: residual energy over N (treating amplitudes as
// unknown constants) or over N - K (treating them as random).
double concentrate_noise_det(const Dictionary& dict, const Observation& obs);
double concentrate_noise_sto(const Dictionary& dict, const Observation& obs);

// Single-snapshot source covariance (alpha_hat)(alpha_hat)^H minus the
// noise-induced bias sigma2_hat * pinv(Psi) pinv(Psi)^H.
Eigen::MatrixXcd concentrate_source_cov(const Dictionary& dict, const Observation& obs,
                                        double sigma2_hat);

// ---- per-anchor log-densities on raw matrices (test and kernel entry) ----

// Profile log-density with amplitudes as unknown constants:
//   -N*ln(pi*sigma2_hat) - E/sigma2_hat,  E = noise-subspace energy.
LogLikelihood anchor_loglik_det(const Eigen::MatrixXcd& psi, const Eigen::VectorXcd& y);

// Profile log-density with random amplitudes:
//   -N*ln(pi) - ln|R| - (y - Psi a)^H R^-1 (y - Psi a),
//   R = Psi P Psi^H + sigma2*I evaluated through the low-rank kernels.
LogLikelihood anchor_loglik_sto(const Eigen::MatrixXcd& psi, const Eigen::VectorXcd& y);

// ---- scene-level likelihood ----

// Agent and surface hypothesis that a likelihood is evaluated at.
struct SceneHypothesis {
    Eigen::Vector3d agent = Eigen::Vector3d::Zero();
    std::vector<MvaPoint> mvas;
};

// Joint log-likelihood of per-anchor observations under a hypothesis; the
// product over anchors is computed as a sum of logs. LikelihoodModel holds
// the static scene so per-hypothesis evaluation allocates only dictionary
// work. With los_only, every reflected path is masked out of the model.
class LikelihoodModel {
  public:
    enum class Kind { deterministic, stochastic };

    LikelihoodModel(Scene scene, Kind kind, bool los_only = false);

    LogLikelihood operator()(const SceneHypothesis& hyp,
                             const std::vector<Observation>& observations) const;

    const Scene& scene() const { return scene_; }
    Kind kind() const { return kind_; }
    bool los_only() const { return los_only_; }

  private:
    Scene scene_;
    Kind kind_;
    bool los_only_;
};

LogLikelihood loglik_deterministic(const Scene& scene, const SceneHypothesis& hyp,
                                   const std::vector<Observation>& observations);
LogLikelihood loglik_stochastic(const Scene& scene, const SceneHypothesis& hyp,
                                const std::vector<Observation>& observations);

} // namespace geochan

#endif
