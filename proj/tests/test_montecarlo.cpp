// Copyright 2026 The popkit developers.
//
// This source code is licensed under the Apache License, Version 2.0 found in
// the LICENSE file in the root directory of this source tree.

#include "popkit/montecarlo.hpp"

#include <algorithm>
#include <cmath>

#include "doctest.h"
#include "popkit/scaling.hpp"

using namespace popkit;

namespace {

RmpsSpec physical_spec(int n, int d, int r, const KrausChannel& ch) {
  RmpsSpec s;
  s.n_sites = n;
  s.d = d;
  s.r = r;
  s.variant = RmpsVariant::physical;
  s.channel = ch;
  return s;
}

RmpsSpec ladder_spec(int n, int d, int r, double eps) {
  RmpsSpec s;
  s.n_sites = n;
  s.d = d;
  s.r = r;
  s.variant = RmpsVariant::ladder;
  s.ladder_epsilon = eps;
  return s;
}

}  // namespace

TEST_SUITE("montecarlo") {

TEST_CASE("haar unitaries are unitary and moment-correct") {
  RandomStream stream{777, 0};
  auto rng = stream.make_engine();
  for (int dim : {2, 5}) {
    const Eigen::MatrixXcd u = sample_haar_unitary(dim, rng);
    CHECK((u.adjoint() * u - Eigen::MatrixXcd::Identity(dim, dim)).cwiseAbs().maxCoeff() < 1e-12);
  }

  const int dim = 4, n = 10000;
  double m2 = 0.0, m4 = 0.0, m2_sq = 0.0, m4_sq = 0.0;
  for (int i = 0; i < n; ++i) {
    const Eigen::MatrixXcd u = sample_haar_unitary(dim, rng);
    const double a2 = std::norm(u(0, 0));
    m2 += a2;
    m2_sq += a2 * a2;
    m4 += a2 * a2;
    m4_sq += a2 * a2 * a2 * a2;
  }
  m2 /= n;
  m4 /= n;
  const double se2 = std::sqrt((m2_sq / n - m2 * m2) / n);
  const double se4 = std::sqrt((m4_sq / n - m4 * m4) / n);
  CHECK(std::abs(m2 - 1.0 / dim) < 3.0 * se2);
  CHECK(std::abs(m4 - 2.0 / (dim * (dim + 1.0))) < 3.0 * se4);
}

TEST_CASE("streams are reproducible and independent") {
  RandomStream a{123, 9};
  auto rng1 = a.make_engine();
  auto rng2 = a.make_engine();
  const Eigen::MatrixXcd u1 = sample_haar_unitary(3, rng1);
  const Eigen::MatrixXcd u2 = sample_haar_unitary(3, rng2);
  CHECK((u1 - u2).cwiseAbs().maxCoeff() == 0.0);

  auto rng3 = RandomStream{123, 10}.make_engine();
  const Eigen::MatrixXcd u3 = sample_haar_unitary(3, rng3);
  CHECK((u1 - u3).cwiseAbs().maxCoeff() > 1e-3);

  const RmpsSpec spec = physical_spec(5, 2, 1, make_depolarizing(2, 0.2));
  const auto s1 = sample_rmps_overlaps(spec, 3, 4, {55, 1});
  const auto s2 = sample_rmps_overlaps(spec, 3, 4, {55, 1});
  for (std::size_t i = 0; i < s1.samples.size(); ++i) {
    CHECK(s1.samples[i].w == s2.samples[i].w);
    CHECK(s1.samples[i].bitstring == s2.samples[i].bitstring);
  }
}

TEST_CASE("physical sampler matches the exact transfer matrix") {
  // Identity channel first, then a noisy one.
  {
    const RmpsSpec spec = physical_spec(8, 2, 3, make_identity_channel(2));
    const auto res = sample_rmps_overlaps(spec, 4000, 5, {1001, 0});
    const MomentEstimate est = empirical_moments(res.samples, 2);
    CHECK(std::abs(est.values[0] - 1.0) < 3.0 * est.std_errors[0]);
    CHECK(std::abs(est.values[1] - rmps_moment(spec, 2)) < 3.0 * est.std_errors[1]);
    for (const auto& s : res.samples) CHECK(s.w >= 0.0);
  }
  {
    const RmpsSpec spec = physical_spec(6, 2, 2, make_depolarizing(2, 0.25));
    const auto res = sample_rmps_overlaps(spec, 4000, 5, {1002, 0});
    const MomentEstimate est = empirical_moments(res.samples, 3);
    CHECK(std::abs(est.values[1] - rmps_moment(spec, 2)) < 3.5 * est.std_errors[1]);
    CHECK(std::abs(est.values[2] - rmps_moment(spec, 3)) < 3.5 * est.std_errors[2]);
  }
  {
    const RmpsSpec spec = physical_spec(5, 2, 1, make_amplitude_damping(0.3));
    const auto res = sample_rmps_overlaps(spec, 4000, 4, {1003, 0});
    const MomentEstimate est = empirical_moments(res.samples, 2);
    CHECK(std::abs(est.values[1] - rmps_moment(spec, 2)) < 3.5 * est.std_errors[1]);
  }
}

TEST_CASE("physical sampler agrees with a dense density-matrix oracle") {
  // Same ensemble, two independent generation routes: the MPS shortcut
  // w = D <psi| prod rho_x |psi> versus explicit channel action on the
  // dense density matrix of a test-built staircase state.
  const int n = 6, d = 2, r = 2, chi = 4, big_d = 64;
  const double eps = 0.3;
  const RmpsSpec spec = physical_spec(n, d, r, make_depolarizing(2, eps));
  const auto res = sample_rmps_overlaps(spec, 3000, 8, {31415, 0});
  const MomentEstimate est = empirical_moments(res.samples, 2);

  RandomStream stream{92653, 0};
  const int n_circuits = 3000;
  std::vector<double> vals(static_cast<std::size_t>(n_circuits));
  for (int c = 0; c < n_circuits; ++c) {
    auto rng = stream.substream(static_cast<std::uint64_t>(c)).make_engine();
    Eigen::VectorXcd psi = sample_haar_isometry(d * chi, chi, rng).col(0);
    for (int g = 1; g < n - r; ++g) {
      const Eigen::MatrixXcd v = sample_haar_isometry(d * chi, chi, rng);
      const Eigen::Index prefix = psi.size() / chi;
      Eigen::VectorXcd next(prefix * d * chi);
      for (Eigen::Index pfx = 0; pfx < prefix; ++pfx)
        for (int o = 0; o < d * chi; ++o) {
          std::complex<double> acc = 0.0;
          for (int a = 0; a < chi; ++a) acc += v(o, a) * psi(pfx * chi + a);
          next(pfx * d * chi + o) = acc;
        }
      psi = next;
    }
    // Global depolarizing acting independently per site: p_noise(x) is a
    // binomial mixture over which sites were replaced by 1/d.
    // Equivalently contract |psi|^2 against prod_x rho_x diagonals; for
    // the depolarizing channel rho_x is diagonal, so p(x) follows from
    // the probabilities alone.
    Eigen::VectorXd p = psi.cwiseAbs2();
    for (int site = 0; site < n; ++site) {
      Eigen::VectorXd mixed(big_d);
      std::size_t stride = 1;
      for (int i = 0; i < n - 1 - site; ++i) stride *= static_cast<std::size_t>(d);
      for (std::size_t idx = 0; idx < static_cast<std::size_t>(big_d); ++idx) {
        const std::size_t digit = (idx / stride) % static_cast<std::size_t>(d);
        const std::size_t partner = digit == 0 ? idx + stride : idx - stride;
        mixed(static_cast<Eigen::Index>(idx)) =
            (1.0 - eps) * p(static_cast<Eigen::Index>(idx)) +
            (eps / d) * (p(static_cast<Eigen::Index>(idx)) +
                         p(static_cast<Eigen::Index>(partner)));
      }
      p = mixed;
    }
    vals[static_cast<std::size_t>(c)] = p.squaredNorm();
  }
  const MeanErr dense = mean_std_err(vals);
  // E[w^2] = D * sum_x p^2 on the dense side.
  const double dense_m2 = big_d * dense.mean;
  const double dense_se = big_d * dense.std_err;
  const double combined = std::sqrt(est.std_errors[1] * est.std_errors[1] + dense_se * dense_se);
  CHECK(std::abs(est.values[1] - dense_m2) < 3.5 * combined);
}

TEST_CASE("ladder sampler matches the exact noisy transfer matrix") {
  const RmpsSpec spec = ladder_spec(6, 2, 1, 0.3);
  const auto res = sample_rmps_overlaps(spec, 6000, 6, {777, 2});  // exact path
  CHECK(res.tail_bound == 0.0);
  const MomentEstimate est = empirical_moments(res.samples, 3);
  CHECK(std::abs(est.values[0] - 1.0) < 3.5 * est.std_errors[0]);
  CHECK(std::abs(est.values[1] - rmps_moment(spec, 2)) < 3.5 * est.std_errors[1]);
  CHECK(std::abs(est.values[2] - rmps_moment(spec, 3)) < 3.5 * est.std_errors[2]);
  for (const auto& s : res.samples) CHECK(s.w >= 0.0);
}

TEST_CASE("pattern sum with probe resets is unbiased") {
  // The stochastic-reset estimator must agree with the exact mixed-state
  // path on E[w]; its higher moments carry a positive probe-variance
  // inflation that shrinks with chi.
  const RmpsSpec spec = ladder_spec(10, 2, 3, 0.25);  // chi = 8
  LadderSampleOptions dp;
  dp.method = LadderMethod::pattern_dp;
  dp.m_max = spec.n_gates();
  const auto res = sample_rmps_overlaps(spec, 8000, 4, {778, 4}, dp);
  const MomentEstimate est = empirical_moments(res.samples, 2);
  CHECK(std::abs(est.values[0] - 1.0) < 3.5 * est.std_errors[0]);
  const double exact_m2 = rmps_moment(spec, 2);
  CHECK(est.values[1] > exact_m2 - 3.5 * est.std_errors[1]);
  CHECK(est.values[1] < exact_m2 * 1.10);  // inflation stays moderate at chi = 8
  for (const auto& s : res.samples) CHECK(s.w >= 0.0);
}

TEST_CASE("ladder truncation reports its tail") {
  const RmpsSpec spec = ladder_spec(8, 2, 1, 0.2);
  LadderSampleOptions opt;
  opt.method = LadderMethod::pattern_dp;
  opt.m_max = 1;
  const auto res = sample_rmps_overlaps(spec, 2000, 4, {778, 2}, opt);
  CHECK(res.m_max_used == 1);
  CHECK(res.tail_bound > 0.05);
  const MomentEstimate est = empirical_moments(res.samples, 1);
  // Truncation discards probability mass, biasing E[w] low.
  CHECK(est.values[0] < 1.0);

  LadderSampleOptions auto_opt;
  auto_opt.method = LadderMethod::pattern_dp;
  auto_opt.auto_m_max = true;
  auto_opt.tail_target = 1e-6;
  const auto res2 = sample_rmps_overlaps(spec, 10, 2, {779, 2}, auto_opt);
  CHECK(res2.tail_bound <= 1e-6);
  CHECK(res2.m_max_used > 1);
}

TEST_CASE("brickwall exact simulation basics") {
  BrickwallSpec spec;
  spec.n_sites = 4;
  spec.depth = 3;
  spec.d = 2;
  spec.channel = make_identity_channel(4);
  auto rng = RandomStream{42, 0}.make_engine();
  const BrickwallDists clean = simulate_brickwall_exact(spec, rng);
  CHECK((clean.p_noisy - clean.p_ideal).cwiseAbs().maxCoeff() < 1e-12);
  CHECK(clean.purity == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(clean.p_ideal.sum() == doctest::Approx(1.0).epsilon(1e-10));

  spec.channel = make_depolarizing(4, 0.1);
  const BrickwallDists noisy = simulate_brickwall_exact(spec, rng);
  CHECK(noisy.purity < 1.0);
  CHECK(noisy.p_noisy.sum() == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(noisy.p_noisy.minCoeff() >= 0.0);

  spec.n_sites = 12;
  CHECK_THROWS_AS(simulate_brickwall_exact(spec, rng), std::invalid_argument);
}

TEST_CASE("haar global sampling: PT and SPT regimes") {
  {
    const HaarGlobalResult res = sample_haar_global(256, 0.0, 400, 50, {31337, 0});
    CHECK(std::abs(res.xeb.mean - 1.0) < 3.0 * res.xeb.std_err);
    std::vector<double> w;
    w.reserve(res.samples.size());
    for (const auto& s : res.samples) w.push_back(s.w);
    std::sort(w.begin(), w.end());
    const double ks = ks_statistic(w, [](double v) { return 1.0 - std::exp(-v); });
    CHECK(ks < ks_critical(0.01, w.size()));
  }
  {
    const double eps = 0.4;
    const HaarGlobalResult res = sample_haar_global(256, eps, 400, 50, {31338, 0});
    CHECK(std::abs(res.xeb.mean - (1.0 - eps)) < 3.0 * res.xeb.std_err);
    std::vector<double> w;
    w.reserve(res.samples.size());
    for (const auto& s : res.samples) w.push_back(s.w);
    std::sort(w.begin(), w.end());
    CHECK(w.front() >= eps);  // SPT support starts at the shift
    const double ks = ks_statistic(w, [&](double v) {
      return v < eps ? 0.0 : 1.0 - std::exp(-(v - eps) / (1.0 - eps));
    });
    CHECK(ks < ks_critical(0.01, w.size()));
  }
}

TEST_CASE("jackknife error shrinks with more circuits") {
  const RmpsSpec spec = physical_spec(6, 2, 1, make_depolarizing(2, 0.2));
  const auto res1 = sample_rmps_overlaps(spec, 400, 4, {9090, 1});
  const auto res2 = sample_rmps_overlaps(spec, 800, 4, {9090, 1});
  const MomentEstimate e1 = empirical_moments(res1.samples, 2);
  const MomentEstimate e2 = empirical_moments(res2.samples, 2);
  const double ratio = e1.std_errors[1] / e2.std_errors[1];
  CHECK(ratio > 1.1);
  CHECK(ratio < 1.9);
}

TEST_CASE("estimator guards") {
  CHECK_THROWS_AS(empirical_moments({}, 2), std::invalid_argument);
  Eigen::VectorXd a(2), b(3);
  CHECK_THROWS_AS(empirical_xeb(a, b), std::invalid_argument);
}

}  // TEST_SUITE
