// Copyright 2026 The popkit developers.
//
// This source code is licensed under the Apache License, Version 2.0 found in
// the LICENSE file in the root directory of this source tree.

#include "popkit/rmps.hpp"

#include <cmath>

#include "doctest.h"
#include "popkit/random.hpp"
#include "popkit/stats.hpp"
#include "popkit/weingarten.hpp"

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

// I_k via the paper-normalized transfer operator, for small sizes.
double ipr_from_transfer(const TransferOperator& op, int steps) {
  Eigen::VectorXd v = op.right;
  for (int i = 0; i < steps; ++i) v = op.T * v;
  return op.left.dot(v);
}

}  // namespace

TEST_SUITE("rmps") {

TEST_CASE("first moment is one for trace-preserving channels") {
  for (int k : {1}) {
    CHECK(rmps_moment(physical_spec(6, 2, 1, make_identity_channel(2)), k) ==
          doctest::Approx(1.0).epsilon(1e-10));
    CHECK(rmps_moment(physical_spec(6, 2, 2, make_depolarizing(2, 0.3)), k) ==
          doctest::Approx(1.0).epsilon(1e-10));
    CHECK(rmps_moment(physical_spec(5, 2, 1, make_amplitude_damping(0.4)), k) ==
          doctest::Approx(1.0).epsilon(1e-10));
    CHECK(rmps_moment(ladder_spec(6, 2, 1, 0.0), k) == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(rmps_moment(ladder_spec(6, 2, 1, 0.35), k) == doctest::Approx(1.0).epsilon(1e-10));
  }
  CHECK(ipr_physical(physical_spec(6, 2, 1, make_depolarizing(2, 0.2)), 1) ==
        doctest::Approx(1.0).epsilon(1e-10));
  CHECK(ipr_ladder(ladder_spec(6, 2, 1, 0.2), 1) == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("transfer operator assembly") {
  const RmpsSpec spec = physical_spec(6, 2, 1, make_depolarizing(2, 0.25));
  const TransferOperator op = build_physical_transfer(spec, 2);
  const PermutationTable& t2 = PermutationTable::cached(2);
  const Eigen::VectorXd lam = lambda_weights(spec.channel, t2);
  const ReplicaMatrix want = lam.asDiagonal() * gram_matrix(t2, 2) * weingarten_matrix(t2, 4);
  CHECK((op.T - want).cwiseAbs().maxCoeff() < 1e-14);
  CHECK((op.right - lam.array().pow(2).matrix()).cwiseAbs().maxCoeff() < 1e-14);

  // k = 1 with the identity channel: every factor is the scalar 1.
  const TransferOperator op1 = build_physical_transfer(physical_spec(6, 2, 1,
                                                        make_identity_channel(2)), 1);
  CHECK(op1.T(0, 0) == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("paper-normalized and rescaled paths agree at small size") {
  for (int k : {1, 2, 3}) {
    const RmpsSpec spec = physical_spec(6, 2, 2, make_depolarizing(2, 0.3));
    const TransferOperator op = build_physical_transfer(spec, k);
    const double ipr = ipr_from_transfer(op, spec.n_sites - spec.r - 1);
    const double big_d = std::pow(2.0, spec.n_sites);
    CHECK(rmps_moment(spec, k) ==
          doctest::Approx(ipr * std::pow(big_d, k - 1)).epsilon(1e-9));

    const RmpsSpec lad = ladder_spec(6, 2, 2, 0.3);
    const TransferOperator lop = build_ladder_transfer(lad, k);
    const double ipr_l = big_d * ipr_from_transfer(lop, lad.n_sites - lad.r - 1);
    CHECK(rmps_moment(lad, k) == doctest::Approx(ipr_l * std::pow(big_d, k - 1)).epsilon(1e-9));
  }
}

TEST_CASE("ladder at zero noise equals the identity-channel physical model") {
  for (int k : {2, 3}) {
    const double a = rmps_moment(physical_spec(7, 2, 1, make_identity_channel(2)), k);
    const double b = rmps_moment(ladder_spec(7, 2, 1, 0.0), k);
    CHECK(a == doctest::Approx(b).epsilon(1e-10));
  }
}

TEST_CASE("full depolarizing noise gives the classical moments") {
  // eps = 1 drives every output probability to 1/D, so E[w^k] = 1.
  for (int k : {2, 3}) {
    CHECK(rmps_moment(physical_spec(8, 2, 2, make_depolarizing(2, 1.0)), k) ==
          doctest::Approx(1.0).epsilon(1e-8));
  }
}

TEST_CASE("moments decrease with k through the IPR normalization") {
  const RmpsSpec spec = physical_spec(8, 2, 2, make_depolarizing(2, 0.1));
  double prev = ipr_physical(spec, 1);
  for (int k = 2; k <= 4; ++k) {
    const double cur = ipr_physical(spec, k);
    CHECK(cur < prev);
    CHECK(cur > 0.0);
    prev = cur;
  }
}

TEST_CASE("weak-noise transfer matrix replacement") {
  // Swapping Lambda for d(1 - eps_eff P) changes I_k at order eps^2.
  const PermutationTable& t3 = PermutationTable::cached(3);
  const ReplicaMatrix p = fixed_point_matrix(t3);
  const auto moment_gap = [&](double eps) {
    const RmpsSpec spec = physical_spec(7, 2, 1, make_depolarizing(2, eps));
    const TransferOperator op = build_physical_transfer(spec, 3);
    const double exact = ipr_from_transfer(op, spec.n_sites - spec.r - 1);

    const double eps_eff = effective_epsilon(spec.channel);
    const Eigen::VectorXd lam_lin =
        2.0 * (Eigen::VectorXd::Ones(p.rows()) - eps_eff * p.diagonal());
    TransferOperator lin = op;
    const ReplicaMatrix gw = gram_matrix(t3, 2) * weingarten_matrix(t3, 4);
    lin.T = lam_lin.asDiagonal() * gw;
    lin.right = lam_lin.array().pow(spec.r + 1).matrix();
    const double approx = ipr_from_transfer(lin, spec.n_sites - spec.r - 1);
    return std::abs(approx / exact - 1.0);
  };
  const double g1 = moment_gap(0.08), g2 = moment_gap(0.04);
  CHECK(g1 / g2 == doctest::Approx(4.0).epsilon(0.25));
}

TEST_CASE("ladder converges to the scaling-limit moment") {
  // d = 2, x = 0.5 means chi = N; eta = 2 split over the gates.
  const double eta = 2.0;
  const double target = rescaled_moment(2, {0.5, eta});
  RmpsSpec spec = ladder_spec(32, 2, 5, 0.0);
  spec.ladder_epsilon = eta / spec.n_gates();
  const double got = rmps_moment(spec, 2);
  CHECK(std::abs(got / target - 1.0) < 0.1);
}

TEST_CASE("scaling convergence report") {
  const auto rows = scaling_convergence_report(RmpsVariant::ladder, 2, 0.5, 2.0, {16, 32, 64});
  REQUIRE(rows.size() == 3);
  for (const auto& r : rows) {
    CHECK(r.chi == r.n_sites);  // x = 0.5 at d = 2 puts chi at N exactly
    CHECK(r.x_attained == doctest::Approx(0.5));
  }
  CHECK(rows[0].rel_dev > rows[1].rel_dev);
  CHECK(rows[1].rel_dev > rows[2].rel_dev);

  // eta = 0 branch reduces to the noiseless moment law; the finite-size
  // deviation shrinks roughly as 1/N (about 6.5% at N = 64).
  const auto clean = scaling_convergence_report(RmpsVariant::ladder, 2, 0.5, 0.0, {64, 128});
  CHECK(clean[0].prediction == doctest::Approx(2.0 * std::exp(0.5)).epsilon(1e-10));
  CHECK(clean[0].rel_dev < 0.10);
  CHECK(clean[1].rel_dev < 0.6 * clean[0].rel_dev);

  // Physical variant drives the same scaling limit.
  const auto phys = scaling_convergence_report(RmpsVariant::physical, 2, 0.5, 2.0, {16, 64});
  CHECK(phys[1].rel_dev < phys[0].rel_dev);

  CHECK_THROWS_AS(scaling_convergence_report(RmpsVariant::ladder, 2, 0.0, 1.0, {16}),
                  std::invalid_argument);
}

TEST_CASE("physical moment against a dense Haar Monte Carlo oracle") {
  // N = 4, chi = 2, identity channel: E[sum_x p(x)^2] from explicit
  // staircase statevectors vs the exact transfer matrix.
  const int n = 4, d = 2, r = 1;
  const int chi = 2, big_d = 16;
  const int n_circuits = 20000;
  const RmpsSpec spec = physical_spec(n, d, r, make_identity_channel(2));
  const double exact = ipr_physical(spec, 2);

  RandomStream stream{424242, 0};
  std::vector<double> vals(n_circuits);
  for (int c = 0; c < n_circuits; ++c) {
    auto rng = stream.substream(static_cast<std::uint64_t>(c)).make_engine();
    // state on sites 0..r as the first isometry's |0...0> column
    Eigen::VectorXcd psi = sample_haar_isometry(d * chi, chi, rng).col(0);
    for (int g = 1; g < n - r; ++g) {
      const Eigen::MatrixXcd v = sample_haar_isometry(d * chi, chi, rng);
      // psi (x) |0>, gate acts on the trailing r+1 digits (bond + fresh).
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
    REQUIRE(psi.size() == big_d);
    vals[static_cast<std::size_t>(c)] = psi.cwiseAbs2().squaredNorm();
  }
  const MeanErr est = mean_std_err(vals);
  CHECK(std::abs(est.mean - exact) < 3.0 * est.std_err);
}

TEST_CASE("spec validation") {
  CHECK_THROWS_AS(rmps_moment(physical_spec(2, 2, 1, make_identity_channel(2)), 2),
                  std::invalid_argument);
  CHECK_THROWS_AS(rmps_moment(physical_spec(6, 2, 1, make_identity_channel(4)), 2),
                  std::invalid_argument);
  CHECK_THROWS_AS(rmps_moment(ladder_spec(6, 2, 1, 1.5), 2), std::invalid_argument);
}

}  // TEST_SUITE
