// Copyright 2026 The popkit developers.
//
// This source code is licensed under the Apache License, Version 2.0 found in
// the LICENSE file in the root directory of this source tree.

#include "popkit/perm.hpp"

#include <algorithm>
#include <array>
#include <memory>
#include <mutex>
#include <numeric>
#include <stdexcept>

namespace popkit {

std::int64_t factorial(int k) {
  if (k < 0) throw std::invalid_argument("factorial: negative argument");
  std::int64_t f = 1;
  for (int i = 2; i <= k; ++i) f *= i;
  return f;
}

Permutation::Permutation(std::vector<int> images) : images_(std::move(images)) {
  const int k = degree();
  if (k < 1 || k > kMaxReplicaDegree)
    throw std::invalid_argument("Permutation: degree must be in [1, 7]");
  std::array<bool, kMaxReplicaDegree> seen{};
  for (int v : images_) {
    if (v < 0 || v >= k || seen[static_cast<std::size_t>(v)])
      throw std::invalid_argument("Permutation: images are not a bijection");
    seen[static_cast<std::size_t>(v)] = true;
  }
}

Permutation Permutation::identity(int k) {
  std::vector<int> im(static_cast<std::size_t>(k));
  std::iota(im.begin(), im.end(), 0);
  return Permutation(std::move(im));
}

bool Permutation::is_identity() const {
  for (int i = 0; i < degree(); ++i)
    if ((*this)(i) != i) return false;
  return true;
}

Permutation Permutation::inverse() const {
  std::vector<int> im(images_.size());
  for (int i = 0; i < degree(); ++i) im[static_cast<std::size_t>(images_[static_cast<std::size_t>(i)])] = i;
  return Permutation(std::move(im));
}

Permutation Permutation::compose(const Permutation& rhs) const {
  if (degree() != rhs.degree())
    throw std::invalid_argument("Permutation::compose: degree mismatch");
  std::vector<int> im(images_.size());
  for (int i = 0; i < degree(); ++i) im[static_cast<std::size_t>(i)] = (*this)(rhs(i));
  return Permutation(std::move(im));
}

int CycleCounts::degree() const {
  int k = 0;
  for (std::size_t a = 0; a < by_length.size(); ++a)
    k += static_cast<int>(a + 1) * by_length[a];
  return k;
}

int CycleCounts::total_cycles() const {
  int c = 0;
  for (int n : by_length) c += n;
  return c;
}

CycleCounts cycle_counts(const Permutation& p) {
  const int k = p.degree();
  CycleCounts out;
  out.by_length.assign(static_cast<std::size_t>(k), 0);
  std::array<bool, kMaxReplicaDegree> done{};
  for (int i = 0; i < k; ++i) {
    if (done[static_cast<std::size_t>(i)]) continue;
    int len = 0, j = i;
    do {
      done[static_cast<std::size_t>(j)] = true;
      j = p(j);
      ++len;
    } while (j != i);
    ++out.by_length[static_cast<std::size_t>(len - 1)];
  }
  return out;
}

PermutationTable::PermutationTable(int k) : k_(k) {
  if (k < 1 || k > kMaxReplicaDegree)
    throw std::invalid_argument("PermutationTable: degree must be in [1, 7]");
  std::vector<int> im(static_cast<std::size_t>(k));
  std::iota(im.begin(), im.end(), 0);
  elements_.reserve(static_cast<std::size_t>(factorial(k)));
  do {
    elements_.emplace_back(im);
  } while (std::next_permutation(im.begin(), im.end()));
}

std::size_t PermutationTable::index_of(const Permutation& p) const {
  if (p.degree() != k_)
    throw std::invalid_argument("PermutationTable::index_of: degree mismatch");
  // Lexicographic rank via the factorial number system.
  std::size_t rank = 0;
  const auto& im = p.images();
  for (int i = 0; i < k_; ++i) {
    int smaller = 0;
    for (int j = i + 1; j < k_; ++j)
      if (im[static_cast<std::size_t>(j)] < im[static_cast<std::size_t>(i)]) ++smaller;
    rank += static_cast<std::size_t>(smaller) * static_cast<std::size_t>(factorial(k_ - 1 - i));
  }
  return rank;
}

const PermutationTable& PermutationTable::cached(int k) {
  static std::mutex mu;
  static std::array<std::unique_ptr<PermutationTable>, kMaxReplicaDegree + 1> tables;
  if (k < 1 || k > kMaxReplicaDegree)
    throw std::invalid_argument("PermutationTable::cached: degree must be in [1, 7]");
  std::lock_guard<std::mutex> lock(mu);
  auto& slot = tables[static_cast<std::size_t>(k)];
  if (!slot) slot = std::make_unique<PermutationTable>(k);
  return *slot;
}

int relative_cycle_count(const Permutation& sigma, const Permutation& pi) {
  if (sigma.degree() != pi.degree())
    throw std::invalid_argument("relative_cycle_count: degree mismatch");
  return cycle_counts(sigma.inverse().compose(pi)).total_cycles();
}

int common_fixed_points(const Permutation& sigma, const Permutation& pi) {
  if (sigma.degree() != pi.degree())
    throw std::invalid_argument("common_fixed_points: degree mismatch");
  int n = 0;
  for (int i = 0; i < sigma.degree(); ++i)
    if (sigma(i) == i && pi(i) == i) ++n;
  return n;
}

ReplicaMatrix fixed_point_matrix(const PermutationTable& table) {
  const auto n = static_cast<Eigen::Index>(table.size());
  ReplicaMatrix out = ReplicaMatrix::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto cc = cycle_counts(table[static_cast<std::size_t>(i)]);
    out(i, i) = table.degree() - cc.fixed_points();
  }
  return out;
}

ReplicaMatrix transposition_adjacency(const PermutationTable& table) {
  const auto n = static_cast<Eigen::Index>(table.size());
  const int k = table.degree();
  ReplicaMatrix out = ReplicaMatrix::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i + 1; j < n; ++j) {
      const auto rel = cycle_counts(
          table[static_cast<std::size_t>(i)].inverse().compose(table[static_cast<std::size_t>(j)]));
      const bool transposition = rel.fixed_points() == k - 2 && rel.total_cycles() == k - 1;
      if (transposition) out(i, j) = out(j, i) = 1.0;
    }
  }
  return out;
}

}  // namespace popkit
