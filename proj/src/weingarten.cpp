// Copyright 2026 The popkit developers.
//
// This source code is licensed under the Apache License, Version 2.0 found in
// the LICENSE file in the root directory of this source tree.

#include "popkit/weingarten.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <stdexcept>
#include <utility>

#include <Eigen/Eigenvalues>

namespace popkit {

namespace {

double binomial(int n, int r) {
  double v = 1.0;
  for (int i = 0; i < r; ++i) v = v * (n - i) / (i + 1);
  return v;
}

// Relabels p restricted to {0..k-1} \ removed (removed points must be fixed).
Permutation remove_fixed_points(const Permutation& p, const std::vector<int>& removed) {
  const int k = p.degree();
  std::vector<int> new_label(static_cast<std::size_t>(k), -1);
  int next = 0;
  for (int i = 0; i < k; ++i) {
    if (std::find(removed.begin(), removed.end(), i) == removed.end())
      new_label[static_cast<std::size_t>(i)] = next++;
  }
  std::vector<int> im(static_cast<std::size_t>(next));
  for (int i = 0; i < k; ++i) {
    if (new_label[static_cast<std::size_t>(i)] < 0) continue;
    im[static_cast<std::size_t>(new_label[static_cast<std::size_t>(i)])] =
        new_label[static_cast<std::size_t>(p(i))];
  }
  return Permutation(std::move(im));
}

}  // namespace

ReplicaMatrix gram_matrix(const PermutationTable& table, int q) {
  if (q < 1) throw std::invalid_argument("gram_matrix: q must be >= 1");
  const auto n = static_cast<Eigen::Index>(table.size());
  ReplicaMatrix g(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i; j < n; ++j) {
      const int cycles = relative_cycle_count(table[static_cast<std::size_t>(i)],
                                              table[static_cast<std::size_t>(j)]);
      g(i, j) = g(j, i) = std::pow(static_cast<double>(q), cycles);
    }
  }
  return g;
}

ReplicaMatrix weingarten_matrix(const PermutationTable& table, int q) {
  const ReplicaMatrix g = gram_matrix(table, q);
  Eigen::SelfAdjointEigenSolver<ReplicaMatrix> es(g);
  if (es.info() != Eigen::Success)
    throw std::runtime_error("weingarten_matrix: spectral decomposition failed");
  const Eigen::VectorXd& ev = es.eigenvalues();
  const double cutoff = 1e-12 * ev.cwiseAbs().maxCoeff();
  Eigen::VectorXd inv = Eigen::VectorXd::Zero(ev.size());
  for (Eigen::Index i = 0; i < ev.size(); ++i)
    if (std::abs(ev(i)) > cutoff) inv(i) = 1.0 / ev(i);
  return es.eigenvectors() * inv.asDiagonal() * es.eigenvectors().transpose();
}

const ReplicaMatrix& weingarten_matrix_cached(int k, int q) {
  static std::mutex mu;
  static std::map<std::pair<int, int>, std::unique_ptr<ReplicaMatrix>> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto& slot = cache[{k, q}];
  if (!slot)
    slot = std::make_unique<ReplicaMatrix>(weingarten_matrix(PermutationTable::cached(k), q));
  return *slot;
}

double gram_expansion_residual(const PermutationTable& table, int q) {
  const auto n = static_cast<Eigen::Index>(table.size());
  const double qk = std::pow(static_cast<double>(q), table.degree());
  ReplicaMatrix r = gram_matrix(table, q) / qk;
  r -= ReplicaMatrix::Identity(n, n);
  r -= transposition_adjacency(table) / static_cast<double>(q);
  return r.cwiseAbs().maxCoeff();
}

double weingarten_expansion_residual(const PermutationTable& table, int q) {
  const auto n = static_cast<Eigen::Index>(table.size());
  const double qk = std::pow(static_cast<double>(q), table.degree());
  ReplicaMatrix r = weingarten_matrix(table, q) * qk;
  r -= ReplicaMatrix::Identity(n, n);
  r += transposition_adjacency(table) / static_cast<double>(q);
  return r.cwiseAbs().maxCoeff();
}

ReplicaMatrix noisy_weingarten(const PermutationTable& table, int q, double eps,
                               FixedPointRemoval removal) {
  if (eps < 0.0 || eps > 1.0)
    throw std::invalid_argument("noisy_weingarten: eps must be in [0, 1]");
  const int k = table.degree();
  const auto n = static_cast<Eigen::Index>(table.size());

  ReplicaMatrix out = ReplicaMatrix::Zero(n, n);
  for (Eigen::Index a = 0; a < n; ++a) {
    const Permutation& pi = table[static_cast<std::size_t>(a)];
    for (Eigen::Index b = 0; b < n; ++b) {
      const Permutation& sigma = table[static_cast<std::size_t>(b)];
      std::vector<int> common;
      for (int i = 0; i < k; ++i)
        if (pi(i) == i && sigma(i) == i) common.push_back(i);
      const int nf = static_cast<int>(common.size());

      double val = 0.0;
      for (int i = 0; i <= nf; ++i) {
        double weight = binomial(nf, i) * std::pow(eps / q, i) * std::pow(1.0 - eps, k - i);
        if (weight == 0.0) continue;
        double wg_entry;
        if (k - i == 0) {
          wg_entry = 1.0;  // empty tensor factor
        } else {
          std::vector<int> removed(common.begin(), common.begin() + i);
          if (removal == FixedPointRemoval::last)
            removed.assign(common.end() - i, common.end());
          const Permutation pr = remove_fixed_points(pi, removed);
          const Permutation sr = remove_fixed_points(sigma, removed);
          const PermutationTable& sub = PermutationTable::cached(k - i);
          const ReplicaMatrix& wg = weingarten_matrix_cached(k - i, q);
          wg_entry = wg(static_cast<Eigen::Index>(sub.index_of(pr)),
                        static_cast<Eigen::Index>(sub.index_of(sr)));
        }
        val += weight * wg_entry;
      }
      out(a, b) = val;
    }
  }
  return out;
}

}  // namespace popkit
