// Copyright 2026 The popkit developers.
//
// This source code is licensed under the Apache License, Version 2.0 found in
// the LICENSE file in the root directory of this source tree.

#include "popkit/rmps.hpp"

#include <cmath>
#include <stdexcept>

#include "popkit/weingarten.hpp"

namespace popkit {

long RmpsSpec::chi() const {
  long c = 1;
  for (int i = 0; i < r; ++i) {
    c *= d;
    if (c > (1L << 30)) throw std::invalid_argument("RmpsSpec: chi too large");
  }
  return c;
}

void RmpsSpec::validate() const {
  if (d < 2) throw std::invalid_argument("RmpsSpec: d must be >= 2");
  if (r < 0) throw std::invalid_argument("RmpsSpec: r must be >= 0");
  if (n_sites <= r + 1) throw std::invalid_argument("RmpsSpec: need N > r + 1");
  if (variant == RmpsVariant::physical) {
    if (channel.dim != d) throw std::invalid_argument("RmpsSpec: channel dimension != d");
  } else {
    if (ladder_epsilon < 0.0 || ladder_epsilon > 1.0)
      throw std::invalid_argument("RmpsSpec: ladder_epsilon must be in [0, 1]");
  }
  (void)chi();
}

TransferOperator build_physical_transfer(const RmpsSpec& spec, int k) {
  spec.validate();
  if (spec.variant != RmpsVariant::physical)
    throw std::invalid_argument("build_physical_transfer: spec is not physical-variant");
  if (k < 1 || k > 6) throw std::invalid_argument("build_physical_transfer: k must be in [1, 6]");
  const PermutationTable& table = PermutationTable::cached(k);
  const Eigen::VectorXd lam = lambda_weights(spec.channel, table);
  const ReplicaMatrix g = gram_matrix(table, static_cast<int>(spec.chi()));
  const ReplicaMatrix wg = weingarten_matrix(table, spec.gate_dim());

  TransferOperator op;
  op.T = lam.asDiagonal() * g * wg;
  op.left = wg * Eigen::VectorXd::Ones(g.rows());  // Wg symmetric: (1|Wg as a column
  op.right = lam.array().pow(spec.r + 1).matrix();
  return op;
}

TransferOperator build_ladder_transfer(const RmpsSpec& spec, int k) {
  spec.validate();
  if (spec.variant != RmpsVariant::ladder)
    throw std::invalid_argument("build_ladder_transfer: spec is not ladder-variant");
  if (k < 1 || k > 6) throw std::invalid_argument("build_ladder_transfer: k must be in [1, 6]");
  const PermutationTable& table = PermutationTable::cached(k);
  const ReplicaMatrix g = gram_matrix(table, static_cast<int>(spec.chi()));
  const ReplicaMatrix wg = noisy_weingarten(table, spec.gate_dim(), spec.ladder_epsilon);

  TransferOperator op;
  op.T = g * wg;
  op.left = wg * Eigen::VectorXd::Ones(g.rows());
  op.right = Eigen::VectorXd::Ones(g.rows());
  return op;
}

namespace {

// Gram matrix divided by q^k: entries q^{cycles - k} stay O(1).
ReplicaMatrix gram_scaled(const PermutationTable& table, long q) {
  const auto n = static_cast<Eigen::Index>(table.size());
  const int k = table.degree();
  ReplicaMatrix g(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = i; j < n; ++j) {
      const int cycles = relative_cycle_count(table[static_cast<std::size_t>(i)],
                                              table[static_cast<std::size_t>(j)]);
      g(i, j) = g(j, i) = std::pow(static_cast<double>(q), cycles - k);
    }
  return g;
}

}  // namespace

double rmps_moment(const RmpsSpec& spec, int k) {
  spec.validate();
  if (k < 1 || k > 6) throw std::invalid_argument("rmps_moment: k must be in [1, 6]");
  const PermutationTable& table = PermutationTable::cached(k);
  const long chi = spec.chi();
  const double qk = std::pow(static_cast<double>(spec.gate_dim()), k);
  const int steps = spec.n_sites - spec.r - 1;

  const ReplicaMatrix g = gram_scaled(table, chi);
  if (spec.variant == RmpsVariant::physical) {
    // E[w^k] = (1| Wg' [ (Lam/d) G' Wg' ]^{N-r-1} (Lam/d)^{r+1} |1),
    // Wg' = (d chi)^k Wg(d chi), G' = G(chi)/chi^k: every factor is O(1).
    const ReplicaMatrix wg = qk * weingarten_matrix(table, spec.gate_dim());
    const Eigen::VectorXd lam = lambda_weights(spec.channel, table) / spec.d;
    Eigen::VectorXd v = wg * Eigen::VectorXd::Ones(g.rows());
    for (int s = 0; s < steps; ++s) v = wg * (g * lam.cwiseProduct(v));
    return v.dot(lam.array().pow(spec.r + 1).matrix());
  }
  const ReplicaMatrix wg = qk * noisy_weingarten(table, spec.gate_dim(), spec.ladder_epsilon);
  Eigen::VectorXd v = wg * Eigen::VectorXd::Ones(g.rows());
  for (int s = 0; s < steps; ++s) v = wg * (g * v);
  return v.sum();
}

double ipr_physical(const RmpsSpec& spec, int k) {
  if (spec.variant != RmpsVariant::physical)
    throw std::invalid_argument("ipr_physical: spec is not physical-variant");
  const double log_d = std::log(static_cast<double>(spec.d));
  return rmps_moment(spec, k) * std::exp((1.0 - k) * spec.n_sites * log_d);
}

double ipr_ladder(const RmpsSpec& spec, int k) {
  if (spec.variant != RmpsVariant::ladder)
    throw std::invalid_argument("ipr_ladder: spec is not ladder-variant");
  const double log_d = std::log(static_cast<double>(spec.d));
  return rmps_moment(spec, k) * std::exp((1.0 - k) * spec.n_sites * log_d);
}

std::vector<ConvergenceRow> scaling_convergence_report(RmpsVariant variant, int k, double x,
                                                       double eta, const std::vector<int>& n_list,
                                                       int d) {
  if (x <= 0.0) throw std::invalid_argument("scaling_convergence_report: x must be > 0");
  std::vector<ConvergenceRow> rows;
  rows.reserve(n_list.size());
  for (int n : n_list) {
    const double chi_target = (d - 1) * static_cast<double>(n) / (d * x);
    if (chi_target < 1.0)
      throw std::invalid_argument("scaling_convergence_report: no admissible chi");
    // Round in log space: r minimizes |log chi - log chi_target|.
    const double r_real = std::log(chi_target) / std::log(static_cast<double>(d));
    int r = std::max(0, static_cast<int>(std::lround(r_real)));
    while (n <= r + 1 && r > 0) --r;
    if (n <= r + 1) throw std::invalid_argument("scaling_convergence_report: no admissible chi");

    RmpsSpec spec;
    spec.n_sites = n;
    spec.d = d;
    spec.r = r;
    spec.variant = variant;
    if (variant == RmpsVariant::ladder) {
      spec.ladder_epsilon = eta / spec.n_gates();
    } else {
      // Depolarizing rate with effective epsilon eta/N: eps_eff = eps (d-1)/d.
      spec.channel = make_depolarizing(d, eta * d / ((d - 1) * static_cast<double>(n)));
    }

    ConvergenceRow row;
    row.n_sites = n;
    row.r = r;
    row.chi = spec.chi();
    row.x_attained = (d - 1) * static_cast<double>(n) / (d * static_cast<double>(row.chi));
    row.moment = rmps_moment(spec, k);
    row.prediction = rescaled_moment(k, {row.x_attained, eta});
    row.rel_dev = std::abs(row.moment / row.prediction - 1.0);
    rows.push_back(row);
  }
  return rows;
}

}  // namespace popkit
