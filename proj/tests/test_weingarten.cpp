// Copyright 2026 The popkit developers.
//
// This source code is licensed under the Apache License, Version 2.0 found in
// the LICENSE file in the root directory of this source tree.

#include "popkit/weingarten.hpp"

#include <complex>
#include <random>

#include "doctest.h"
#include "popkit/random.hpp"

using namespace popkit;

TEST_SUITE("weingarten") {

TEST_CASE("gram matrix values") {
  const PermutationTable t2(2);
  const ReplicaMatrix g = gram_matrix(t2, 2);
  CHECK(g(0, 0) == 4.0);
  CHECK(g(0, 1) == 2.0);
  CHECK(g(1, 0) == 2.0);
  CHECK(g(1, 1) == 4.0);

  const ReplicaMatrix ones = gram_matrix(PermutationTable(3), 1);
  CHECK((ones.array() == 1.0).all());

  const ReplicaMatrix g35 = gram_matrix(PermutationTable(3), 5);
  for (Eigen::Index i = 0; i < g35.rows(); ++i) CHECK(g35(i, i) == 125.0);
}

TEST_CASE("gram entries are class functions of the relative permutation") {
  const PermutationTable& t = PermutationTable::cached(4);
  const ReplicaMatrix g = gram_matrix(t, 3);
  std::mt19937_64 rng(3);
  std::uniform_int_distribution<std::size_t> dist(0, t.size() - 1);
  for (int rep = 0; rep < 50; ++rep) {
    const std::size_t i = dist(rng), j = dist(rng), c = dist(rng);
    const Permutation& tau = t[c];
    const auto ic = t.index_of(tau.compose(t[i]).compose(tau.inverse()));
    const auto jc = t.index_of(tau.compose(t[j]).compose(tau.inverse()));
    CHECK(g(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) ==
          g(static_cast<Eigen::Index>(ic), static_cast<Eigen::Index>(jc)));
  }
}

TEST_CASE("weingarten matrix small cases") {
  const ReplicaMatrix wg = weingarten_matrix(PermutationTable(2), 2);
  CHECK(wg(0, 0) == doctest::Approx(4.0 / 12.0).epsilon(1e-12));
  CHECK(wg(0, 1) == doctest::Approx(-2.0 / 12.0).epsilon(1e-12));

  const PermutationTable t3(3);
  const ReplicaMatrix prod = gram_matrix(t3, 4) * weingarten_matrix(t3, 4);
  CHECK((prod - ReplicaMatrix::Identity(6, 6)).cwiseAbs().maxCoeff() < 1e-10);

  const ReplicaMatrix wg1 = weingarten_matrix(PermutationTable(1), 7);
  CHECK(wg1(0, 0) == doctest::Approx(1.0 / 7.0).epsilon(1e-14));
}

TEST_CASE("pseudo-inverse identities across k and q") {
  for (int k = 2; k <= 6; ++k) {
    const PermutationTable& t = PermutationTable::cached(k);
    for (int q : {2, 3, 4, 8, 16}) {
      const ReplicaMatrix g = gram_matrix(t, q);
      const ReplicaMatrix wg = weingarten_matrix(t, q);
      const double scale_g = g.cwiseAbs().maxCoeff();
      const double scale_w = wg.cwiseAbs().maxCoeff();
      CHECK((g * wg * g - g).cwiseAbs().maxCoeff() / scale_g < 1e-10);
      CHECK((wg * g * wg - wg).cwiseAbs().maxCoeff() / scale_w < 1e-10);
    }
  }
}

TEST_CASE("large-q expansion of G and Wg") {
  const PermutationTable& t2 = PermutationTable::cached(2);
  for (int q : {2, 4, 8, 100}) CHECK(gram_expansion_residual(t2, q) < 1e-15);

  const PermutationTable& t3 = PermutationTable::cached(3);
  const double r50 = gram_expansion_residual(t3, 50);
  const double r100 = gram_expansion_residual(t3, 100);
  CHECK(r50 / r100 == doctest::Approx(4.0).epsilon(0.15));
  CHECK(r100 < 1e-3);

  const double w50 = weingarten_expansion_residual(t3, 50);
  const double w100 = weingarten_expansion_residual(t3, 100);
  CHECK(w50 / w100 == doctest::Approx(4.0).epsilon(0.15));
}

TEST_CASE("noisy weingarten reductions") {
  const PermutationTable& t3 = PermutationTable::cached(3);
  const ReplicaMatrix base = weingarten_matrix(t3, 5);
  CHECK((noisy_weingarten(t3, 5, 0.0) - base).cwiseAbs().maxCoeff() < 1e-14);

  const PermutationTable& t1 = PermutationTable::cached(1);
  for (double eps : {0.0, 0.3, 0.7, 1.0}) {
    const ReplicaMatrix w = noisy_weingarten(t1, 6, eps);
    CHECK(w(0, 0) == doctest::Approx(1.0 / 6.0).epsilon(1e-12));
  }

  // At eps = 1 only the all-fixed-point term survives: the trace channel.
  const PermutationTable& t2 = PermutationTable::cached(2);
  const ReplicaMatrix w1 = noisy_weingarten(t2, 4, 1.0);
  CHECK(w1(0, 0) == doctest::Approx(1.0 / 16.0).epsilon(1e-12));
  CHECK(std::abs(w1(0, 1)) < 1e-14);
  CHECK(std::abs(w1(1, 1)) < 1e-14);
}

TEST_CASE("fixed point removal choice is immaterial") {
  const PermutationTable& t4 = PermutationTable::cached(4);
  const ReplicaMatrix a = noisy_weingarten(t4, 6, 0.3, FixedPointRemoval::first);
  const ReplicaMatrix b = noisy_weingarten(t4, 6, 0.3, FixedPointRemoval::last);
  CHECK((a - b).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("noisy weingarten is continuous in eps") {
  const PermutationTable& t3 = PermutationTable::cached(3);
  const double delta = 1e-6;
  const ReplicaMatrix a = noisy_weingarten(t3, 4, 0.5);
  const ReplicaMatrix b = noisy_weingarten(t3, 4, 0.5 + delta);
  CHECK((a - b).cwiseAbs().maxCoeff() < 100.0 * delta);
}

// Monte Carlo oracle: reconstruct E[((1-eps) U (x) U* + (eps/q)|e>><<e|)^{(x)2}]
// over Haar(4) draws and compare its permutation-basis coefficients with
// the closed-form noisy Weingarten matrix.
TEST_CASE("noisy weingarten against a Haar Monte Carlo oracle") {
  const int q = 4;
  const double eps = 0.1;
  const int n_samples = 100000;
  const PermutationTable& t2 = PermutationTable::cached(2);

  // Single-replica vectorized basis: 16-dim, index i*q + j.
  Eigen::VectorXcd vec_e = Eigen::VectorXcd::Zero(q * q);
  for (int i = 0; i < q; ++i) vec_e(i * q + i) = 1.0;

  // Two-replica permutation vectors in the 256-dim space (replica-major).
  const auto perm_vec2 = [&](bool swap) {
    Eigen::VectorXd v = Eigen::VectorXd::Zero(q * q * q * q);
    for (int i1 = 0; i1 < q; ++i1)
      for (int i2 = 0; i2 < q; ++i2) {
        const int j1 = swap ? i2 : i1;
        const int j2 = swap ? i1 : i2;
        v((i1 * q + j1) * q * q + (i2 * q + j2)) = 1.0;
      }
    return v;
  };
  const Eigen::VectorXd alpha[2] = {perm_vec2(false), perm_vec2(true)};

  const ReplicaMatrix gram = gram_matrix(t2, q);
  const ReplicaMatrix gram_inv = gram.inverse();

  Eigen::Matrix2d mean = Eigen::Matrix2d::Zero();
  Eigen::Matrix2d m2 = Eigen::Matrix2d::Zero();
  RandomStream stream{20260808, 1};
  auto rng = stream.make_engine();
  for (int s = 0; s < n_samples; ++s) {
    const Eigen::MatrixXcd u = sample_haar_unitary(q, rng);
    Eigen::MatrixXcd x = Eigen::MatrixXcd::Zero(q * q, q * q);
    for (int i = 0; i < q; ++i)
      for (int j = 0; j < q; ++j)
        for (int a = 0; a < q; ++a)
          for (int b = 0; b < q; ++b)
            x(i * q + j, a * q + b) = (1.0 - eps) * u(i, a) * std::conj(u(j, b));
    x += (eps / q) * (vec_e * vec_e.transpose());

    // H_s[alpha, beta] = <<alpha| X (x) X |beta>> via vec(X B X^T).
    Eigen::Matrix2d h;
    for (int bidx = 0; bidx < 2; ++bidx) {
      Eigen::MatrixXcd bmat(q * q, q * q);
      for (int r = 0; r < q * q; ++r)
        for (int c = 0; c < q * q; ++c) bmat(r, c) = alpha[bidx](r * q * q + c);
      const Eigen::MatrixXcd img = x * bmat * x.transpose();
      for (int aidx = 0; aidx < 2; ++aidx) {
        std::complex<double> acc = 0.0;
        for (int r = 0; r < q * q; ++r)
          for (int c = 0; c < q * q; ++c)
            acc += alpha[aidx](r * q * q + c) * img(r, c);
        h(aidx, bidx) = acc.real();
      }
    }
    const Eigen::Matrix2d coeff = gram_inv * h * gram_inv;
    mean += coeff;
    m2 += coeff.cwiseProduct(coeff);
  }
  mean /= n_samples;
  m2 /= n_samples;

  const ReplicaMatrix expected = noisy_weingarten(t2, q, eps);
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) {
      const double var = std::max(0.0, m2(i, j) - mean(i, j) * mean(i, j));
      const double se = std::sqrt(var / n_samples);
      CHECK(std::abs(mean(i, j) - expected(i, j)) < 3.0 * se + 1e-12);
    }
}

}  // TEST_SUITE
