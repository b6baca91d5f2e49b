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
#include "support.hpp"

#include <catch_amalgamated.hpp>

#include <cmath>
#include <map>
#include <stdexcept>

using namespace geochan;

namespace {

SceneState make_state(double px, double py, double pz, double vx, double vy,
                      const Eigen::Vector3d& mva) {
    SceneState s;
    s.position = {px, py, pz};
    s.velocity = {vx, vy};
    s.mvas = mva;
    return s;
}

// Box corners for a one-surface state.
SceneState box_lo() { return make_state(-1.0, -2.0, 0.0, -0.5, -0.5, {-0.2, 3.0, -0.2}); }
SceneState box_hi() { return make_state(1.0, 0.0, 2.0, 0.5, 0.5, {0.2, 4.0, 0.2}); }

} // namespace

TEST_CASE("state vector round-trips and exposes the hypothesis") {
    const SceneState s = make_state(1.0, -2.0, 0.5, 0.1, -0.2, {0.0, 4.0, 0.0});
    CHECK(s.n_surfaces() == 1);
    CHECK(s.dim() == 8);

    const Eigen::VectorXd v = s.to_vector();
    REQUIRE(v.size() == 8);
    CHECK(v[0] == 1.0);
    CHECK(v[3] == 0.1);
    CHECK(v[5] == 0.0);
    CHECK(v[6] == 4.0);

    const SceneState back = SceneState::from_vector(v);
    CHECK((back.position - s.position).norm() == 0.0);
    CHECK((back.velocity - s.velocity).norm() == 0.0);
    CHECK((back.mvas - s.mvas).norm() == 0.0);

    const SceneHypothesis hyp = s.hypothesis();
    CHECK((hyp.agent - s.position).norm() == 0.0);
    REQUIRE(hyp.mvas.size() == 1);
    CHECK((hyp.mvas[0].position - Eigen::Vector3d(0.0, 4.0, 0.0)).norm() == 0.0);

    CHECK_THROWS_AS(SceneState::from_vector(Eigen::VectorXd::Zero(7)),
                    std::invalid_argument);
}

TEST_CASE("transition matrix couples position to velocity only") {
    MotionModel mm;
    mm.dt = 0.5;
    const Eigen::MatrixXd f = mm.transition_matrix(1);
    REQUIRE(f.rows() == 8);
    Eigen::MatrixXd expect = Eigen::MatrixXd::Identity(8, 8);
    expect(0, 3) = 0.5;
    expect(1, 4) = 0.5;
    CHECK((f - expect).norm() == 0.0);

    const SceneState s = make_state(1.0, 2.0, 1.0, 0.2, -0.4, {0.0, 4.0, 0.0});
    const SceneState next = mm.propagate_mean(s);
    CHECK((next.to_vector() - f * s.to_vector()).norm() < 1e-14);
    CHECK(next.position[0] == 1.0 + 0.5 * 0.2);
    CHECK(next.position[1] == 2.0 + 0.5 * -0.4);
    CHECK(next.position[2] == 1.0); // vertical position has no velocity state

    const Eigen::VectorXd q = mm.process_std(1);
    REQUIRE(q.size() == 8);
    CHECK(q[0] == mm.sigma_p);
    CHECK(q[2] == mm.sigma_p);
    CHECK(q[3] == mm.sigma_v);
    CHECK(q[4] == mm.sigma_v);
    CHECK(q[5] == mm.sigma_mva);
    CHECK(q[7] == mm.sigma_mva);
}

TEST_CASE("uniform initialization fills the box with equal weights") {
    const int n = 20000;
    const ParticleSet ps = init_uniform(box_lo(), box_hi(), n, 77);
    REQUIRE(ps.size() == n);
    CHECK(ps.ess() == Catch::Approx(double(n)));

    const Eigen::VectorXd lo = box_lo().to_vector();
    const Eigen::VectorXd hi = box_hi().to_vector();
    Eigen::VectorXd mean = Eigen::VectorXd::Zero(8);
    for (const SceneState& s : ps.states) {
        const Eigen::VectorXd v = s.to_vector();
        CHECK((v.array() >= lo.array()).all());
        CHECK((v.array() <= hi.array()).all());
        mean += v;
    }
    mean /= double(n);
    // Sample mean of a uniform box: center within ~4 sigma/sqrt(n).
    for (Eigen::Index k = 0; k < 8; ++k) {
        const double center = 0.5 * (lo[k] + hi[k]);
        const double tol = 4.0 * (hi[k] - lo[k]) / std::sqrt(12.0 * n);
        CHECK(std::abs(mean[k] - center) < tol);
    }

    // Deterministic in the seed, sensitive to it.
    const ParticleSet again = init_uniform(box_lo(), box_hi(), 50, 77);
    const ParticleSet other = init_uniform(box_lo(), box_hi(), 50, 78);
    CHECK((again.states[0].to_vector() -
           init_uniform(box_lo(), box_hi(), 50, 77).states[0].to_vector())
              .norm() == 0.0);
    CHECK((again.states[0].to_vector() - other.states[0].to_vector()).norm() > 0.0);

    CHECK_THROWS_AS(init_uniform(box_hi(), box_lo(), 10, 1), std::invalid_argument);
}

TEST_CASE("prediction without noise is the exact mean propagation") {
    MotionModel mm;
    mm.sigma_p = 0.0;
    mm.sigma_v = 0.0;
    mm.sigma_mva = 0.0;

    const ParticleSet ps = init_uniform(box_lo(), box_hi(), 20, 5);
    const ParticleSet next = predict(ps, mm, 9);
    for (int i = 0; i < 20; ++i)
        CHECK((next.states[static_cast<std::size_t>(i)].to_vector() -
               mm.propagate_mean(ps.states[static_cast<std::size_t>(i)]).to_vector())
                  .norm() == 0.0);
    CHECK((next.log_weights - ps.log_weights).norm() == 0.0);
}

TEST_CASE("prediction noise matches the process covariance") {
    MotionModel mm; // defaults: 0.01 / 0.05 / 0.001
    const int n = 20000;

    // Start every particle at the same point so spread is pure noise.
    ParticleSet ps;
    ps.states.assign(n, make_state(0.0, 0.0, 1.0, 0.1, 0.0, {0.0, 4.0, 0.0}));
    ps.log_weights = Eigen::VectorXd::Constant(n, -std::log(double(n)));

    const ParticleSet next = predict(ps, mm, 13);
    const Eigen::VectorXd center = mm.propagate_mean(ps.states[0]).to_vector();
    Eigen::VectorXd var = Eigen::VectorXd::Zero(8);
    for (const SceneState& s : next.states) {
        const Eigen::VectorXd d = s.to_vector() - center;
        var += d.cwiseProduct(d);
    }
    var /= double(n);

    const Eigen::VectorXd std_expect = mm.process_std(1);
    for (Eigen::Index k = 0; k < 8; ++k) {
        const double expect = std_expect[k] * std_expect[k];
        CHECK(std::abs(var[k] - expect) < 0.05 * expect + 1e-12);
    }
}

TEST_CASE("update multiplies weights by the likelihood") {
    ParticleSet ps;
    ps.states = {box_lo(), box_hi()};
    ps.log_weights = Eigen::VectorXd::Constant(2, -std::log(2.0));

    // Likelihood that prefers the first particle by a known factor.
    const LogLikFn fn = [](const SceneState& s, const std::vector<Observation>&) {
        LogLikelihood ll;
        ll.value = s.position[0] < 0.0 ? std::log(3.0) : 0.0;
        ll.clamped_anchors = 1;
        return ll;
    };

    UpdateDiagnostics diag;
    const ParticleSet post = update(ps, {}, fn, &diag);
    const Eigen::VectorXd w = post.weights();
    CHECK(w[0] == Catch::Approx(0.75).margin(1e-12));
    CHECK(w[1] == Catch::Approx(0.25).margin(1e-12));
    CHECK(w.sum() == Catch::Approx(1.0).margin(1e-12));
    CHECK(!diag.degenerate_fallback);
    CHECK(diag.clamped_anchors == 2);
    CHECK(diag.max_loglik == std::log(3.0));

    // A constant likelihood leaves the weights untouched.
    const LogLikFn flat = [](const SceneState&, const std::vector<Observation>&) {
        LogLikelihood ll;
        ll.value = -123.4;
        return ll;
    };
    const ParticleSet same = update(ps, {}, flat);
    CHECK((same.weights() - ps.weights()).norm() < 1e-12);
}

TEST_CASE("update falls back to uniform when every density vanishes") {
    ParticleSet ps;
    ps.states = {box_lo(), box_hi(), box_lo()};
    ps.log_weights = Eigen::VectorXd::Constant(3, -std::log(3.0));

    const LogLikFn doomed = [](const SceneState&, const std::vector<Observation>&) {
        LogLikelihood ll;
        ll.value = -std::numeric_limits<double>::infinity();
        return ll;
    };

    UpdateDiagnostics diag;
    const ParticleSet post = update(ps, {}, doomed, &diag);
    CHECK(diag.degenerate_fallback);
    const Eigen::VectorXd w = post.weights();
    for (Eigen::Index i = 0; i < 3; ++i)
        CHECK(w[i] == Catch::Approx(1.0 / 3.0).margin(1e-12));
}

TEST_CASE("weights and effective sample size behave at the extremes") {
    ParticleSet ps;
    ps.states.assign(4, box_lo());
    ps.log_weights = Eigen::VectorXd::Constant(4, -std::log(4.0));
    CHECK(ps.ess() == Catch::Approx(4.0));

    // One dominant particle: ESS collapses to ~1.
    ps.log_weights << 0.0, -40.0, -40.0, -40.0;
    CHECK(ps.ess() == Catch::Approx(1.0).epsilon(1e-10));
    CHECK(ps.weights().sum() == Catch::Approx(1.0));
}

TEST_CASE("resampling is skipped above the threshold and rebalances below it") {
    const ParticleSet ps = init_uniform(box_lo(), box_hi(), 100, 3);

    // Healthy cloud: untouched.
    const ParticleSet same = resample_regularized(ps, silverman_rule(), 0.5, 17);
    CHECK((same.log_weights - ps.log_weights).norm() == 0.0);
    CHECK((same.states[0].to_vector() - ps.states[0].to_vector()).norm() == 0.0);

    // Skewed cloud with a zero-bandwidth rule: pure systematic resampling.
    ParticleSet skew = ps;
    for (int i = 0; i < 100; ++i)
        skew.log_weights[i] = (i < 10) ? 0.0 : -30.0;
    skew.log_weights.array() -=
        std::log(skew.log_weights.array().exp().sum()); // normalize

    const BandwidthRule no_jitter = [](const ParticleSet& cloud) {
        return Eigen::VectorXd::Zero(cloud.states[0].dim());
    };
    const ParticleSet post = resample_regularized(skew, no_jitter, 0.5, 17);

    // Uniform weights afterwards.
    const Eigen::VectorXd w = post.weights();
    for (int i = 0; i < 100; ++i)
        CHECK(w[i] == Catch::Approx(0.01).margin(1e-12));

    // Systematic resampling keeps per-particle counts within one of N*w.
    std::map<double, int> counts;
    for (const SceneState& s : post.states)
        counts[s.position[0]] += 1;
    const Eigen::VectorXd skew_w = skew.weights();
    for (int i = 0; i < 100; ++i) {
        const double expect = 100.0 * skew_w[i];
        const int got = counts.count(ps.states[static_cast<std::size_t>(i)].position[0])
                            ? counts[ps.states[static_cast<std::size_t>(i)].position[0]]
                            : 0;
        CHECK(got >= static_cast<int>(std::floor(expect)));
        CHECK(got <= static_cast<int>(std::ceil(expect)) + 1);
    }
}

TEST_CASE("resampling jitter spreads particles at the bandwidth scale") {
    ParticleSet ps;
    ps.states.assign(5000, box_lo());
    // One dominant particle forces ESS ~ 1, far below any threshold.
    ps.log_weights = Eigen::VectorXd::Constant(5000, -40.0);
    ps.log_weights[0] = 0.0;

    const Eigen::VectorXd bw = Eigen::VectorXd::Constant(8, 0.05);
    const BandwidthRule fixed = [bw](const ParticleSet&) { return bw; };
    const ParticleSet post = resample_regularized(ps, fixed, 0.5, 23);

    Eigen::VectorXd var = Eigen::VectorXd::Zero(8);
    const Eigen::VectorXd center = box_lo().to_vector();
    for (const SceneState& s : post.states) {
        const Eigen::VectorXd d = s.to_vector() - center;
        var += d.cwiseProduct(d);
    }
    var /= 5000.0;
    for (Eigen::Index k = 0; k < 8; ++k)
        CHECK(std::abs(var[k] - 0.0025) < 0.1 * 0.0025);
}

TEST_CASE("silverman rule scales the weighted spread by the cloud-size factor") {
    // Two equal-weight particles differing in one coordinate: weighted stds
    // are half ranges, and the dimension factor follows the formula.
    ParticleSet ps;
    ps.states = {make_state(0.0, 0.0, 0.0, 0.0, 0.0, {0.0, 4.0, 0.0}),
                 make_state(2.0, 0.0, 0.0, 0.0, 0.0, {0.0, 4.0, 0.0})};
    ps.log_weights = Eigen::VectorXd::Constant(2, -std::log(2.0));

    const Eigen::VectorXd bw = silverman_rule()(ps);
    REQUIRE(bw.size() == 8);
    const double d = 8.0, n = 2.0;
    const double factor = std::pow(4.0 / ((d + 2.0) * n), 1.0 / (d + 4.0));
    CHECK(bw[0] == Catch::Approx(factor * 1.0)); // std of {0,2} is 1
    CHECK(bw[1] == 0.0);

    const Eigen::VectorXd scaled = silverman_rule(2.5)(ps);
    CHECK(scaled[0] == Catch::Approx(2.5 * factor));
}

TEST_CASE("estimate returns the weighted mean and covariance") {
    ParticleSet ps;
    ps.states = {make_state(0.0, 0.0, 0.0, 0.0, 0.0, {0.0, 4.0, 0.0}),
                 make_state(1.0, 2.0, 0.0, 0.0, 0.0, {0.0, 4.0, 0.0}),
                 make_state(-1.0, 4.0, 0.0, 0.0, 0.0, {0.0, 4.0, 0.0})};
    Eigen::VectorXd w(3);
    w << 0.5, 0.25, 0.25;
    ps.log_weights = w.array().log();

    const auto [mean, cov] = estimate(ps);
    // Hand-computed: x = 0.5*0 + 0.25*1 + 0.25*(-1) = 0; y = 1.5.
    CHECK(mean.position[0] == Catch::Approx(0.0).margin(1e-12));
    CHECK(mean.position[1] == Catch::Approx(1.5));

    // Covariance oracle by explicit loop.
    Eigen::MatrixXd expect = Eigen::MatrixXd::Zero(8, 8);
    const Eigen::VectorXd mu = mean.to_vector();
    for (int i = 0; i < 3; ++i) {
        const Eigen::VectorXd d = ps.states[static_cast<std::size_t>(i)].to_vector() - mu;
        expect += w[i] * d * d.transpose();
    }
    CHECK((cov - expect).norm() < 1e-12);
}

TEST_CASE("a full cycle is deterministic in its seeds") {
    const LogLikFn fn = [](const SceneState& s, const std::vector<Observation>&) {
        LogLikelihood ll;
        ll.value = -s.position.squaredNorm();
        return ll;
    };
    MotionModel mm;

    auto run_once = [&] {
        ParticleSet ps = init_uniform(box_lo(), box_hi(), 200, 11);
        ps = update(ps, {}, fn);
        ps = resample_regularized(ps, silverman_rule(), 0.99, 12); // force resample
        ps = predict(ps, mm, 13);
        return estimate(ps).first.to_vector();
    };

    const Eigen::VectorXd a = run_once();
    const Eigen::VectorXd b = run_once();
    CHECK((a - b).norm() == 0.0);
}
