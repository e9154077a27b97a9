// Copyright 2026 The popkit developers.
//
// This source code is licensed under the Apache License, Version 2.0 found in
// the LICENSE file in the root directory of this source tree.

#include "popkit/channels.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include <Eigen/Eigenvalues>

namespace popkit {

double KrausChannel::cptp_residual() const {
  Eigen::MatrixXcd acc = Eigen::MatrixXcd::Zero(dim, dim);
  for (const auto& k : kraus) acc += k.adjoint() * k;
  acc -= Eigen::MatrixXcd::Identity(dim, dim);
  return acc.cwiseAbs().maxCoeff();
}

Eigen::MatrixXcd KrausChannel::apply(const Eigen::MatrixXcd& rho) const {
  Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(dim, dim);
  for (const auto& k : kraus) out += k * rho * k.adjoint();
  return out;
}

Eigen::MatrixXcd KrausChannel::superoperator() const {
  const int q = dim;
  Eigen::MatrixXcd s = Eigen::MatrixXcd::Zero(q * q, q * q);
  for (const auto& k : kraus) {
    // vec(K rho K^dag) = (K kron K^*) vec(rho) in row-major vectorization.
    for (int i = 0; i < q; ++i)
      for (int j = 0; j < q; ++j)
        for (int a = 0; a < q; ++a)
          for (int b = 0; b < q; ++b)
            s(i * q + j, a * q + b) += k(i, a) * std::conj(k(j, b));
  }
  return s;
}

KrausChannel make_identity_channel(int q) {
  if (q < 1) throw std::invalid_argument("make_identity_channel: q must be >= 1");
  KrausChannel c;
  c.dim = q;
  c.kraus = {Eigen::MatrixXcd::Identity(q, q)};
  c.label = "identity";
  c.param = 0.0;
  return c;
}

KrausChannel make_depolarizing(int q, double eps) {
  if (q < 1) throw std::invalid_argument("make_depolarizing: q must be >= 1");
  if (eps < 0.0 || eps > 1.0)
    throw std::invalid_argument("make_depolarizing: eps must be in [0, 1]");
  using namespace std::complex_literals;
  const double omega_arg = 2.0 * std::numbers::pi / q;

  Eigen::MatrixXcd shift = Eigen::MatrixXcd::Zero(q, q);   // X|j> = |j+1 mod q>
  Eigen::MatrixXcd clock = Eigen::MatrixXcd::Zero(q, q);   // Z|j> = w^j |j>
  for (int j = 0; j < q; ++j) {
    shift((j + 1) % q, j) = 1.0;
    clock(j, j) = std::exp(1i * (omega_arg * j));
  }

  KrausChannel c;
  c.dim = q;
  c.label = "depolarizing";
  c.param = eps;
  const double p_weyl = eps / (q * q);
  c.kraus.reserve(static_cast<std::size_t>(q) * q);
  c.kraus.push_back(std::sqrt(1.0 - eps + p_weyl) * Eigen::MatrixXcd::Identity(q, q));
  Eigen::MatrixXcd xa = Eigen::MatrixXcd::Identity(q, q);
  for (int a = 0; a < q; ++a) {
    Eigen::MatrixXcd w = xa;
    for (int b = 0; b < q; ++b) {
      if (a != 0 || b != 0) c.kraus.push_back(std::sqrt(p_weyl) * w);
      w = w * clock;
    }
    xa = shift * xa;
  }
  return c;
}

KrausChannel make_amplitude_damping(double gamma) {
  if (gamma < 0.0 || gamma > 1.0)
    throw std::invalid_argument("make_amplitude_damping: gamma must be in [0, 1]");
  KrausChannel c;
  c.dim = 2;
  c.label = "amplitude_damping";
  c.param = gamma;
  Eigen::MatrixXcd k0 = Eigen::MatrixXcd::Zero(2, 2);
  Eigen::MatrixXcd k1 = Eigen::MatrixXcd::Zero(2, 2);
  k0(0, 0) = 1.0;
  k0(1, 1) = std::sqrt(1.0 - gamma);
  k1(0, 1) = std::sqrt(gamma);
  c.kraus = {k0, k1};
  return c;
}

Eigen::MatrixXcd projected_adjoint(const KrausChannel& channel, int x) {
  if (x < 0 || x >= channel.dim)
    throw std::invalid_argument("projected_adjoint: basis index out of range");
  Eigen::MatrixXcd rho = Eigen::MatrixXcd::Zero(channel.dim, channel.dim);
  for (const auto& k : channel.kraus)
    rho += k.adjoint().col(x) * k.row(x);
  return rho;
}

Eigen::VectorXd lambda_weights(const KrausChannel& channel, const PermutationTable& table) {
  const int q = channel.dim;
  const int k = table.degree();
  const auto n = static_cast<Eigen::Index>(table.size());

  // tr[rho_x^a] from the (real, non-negative) eigenvalues of each rho_x.
  std::vector<std::vector<double>> power_traces(static_cast<std::size_t>(q));
  for (int x = 0; x < q; ++x) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(projected_adjoint(channel, x));
    if (es.info() != Eigen::Success)
      throw std::runtime_error("lambda_weights: eigensolver failed");
    auto& tr = power_traces[static_cast<std::size_t>(x)];
    tr.assign(static_cast<std::size_t>(k + 1), 0.0);
    for (int a = 1; a <= k; ++a) {
      double s = 0.0;
      for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i)
        s += std::pow(es.eigenvalues()(i), a);
      tr[static_cast<std::size_t>(a)] = s;
    }
  }

  Eigen::VectorXd lam(n);
  for (Eigen::Index s = 0; s < n; ++s) {
    const auto cc = cycle_counts(table[static_cast<std::size_t>(s)]);
    double total = 0.0;
    for (int x = 0; x < q; ++x) {
      double w = 1.0;
      for (int a = 1; a <= k; ++a) {
        const int m = cc.by_length[static_cast<std::size_t>(a - 1)];
        for (int rep = 0; rep < m; ++rep)
          w *= power_traces[static_cast<std::size_t>(x)][static_cast<std::size_t>(a)];
      }
      total += w;
    }
    lam(s) = total;
  }
  return lam;
}

double effective_epsilon(const KrausChannel& channel) {
  double acc = 0.0;
  for (int x = 0; x < channel.dim; ++x) {
    const Eigen::MatrixXcd rho = projected_adjoint(channel, x);
    acc += 1.0 - rho(x, x).real();
  }
  return acc / channel.dim;
}

}  // namespace popkit
