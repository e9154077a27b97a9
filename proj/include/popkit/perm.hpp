// Copyright 2026 The popkit developers.
//
// This source code is licensed under the Apache License, Version 2.0 found in
// the LICENSE file in the root directory of this source tree.

#ifndef POPKIT_PERM_HPP
#define POPKIT_PERM_HPP

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

namespace popkit {

/// Dense real matrix indexed by the canonical ordering of S_k (size k! x k!).
using ReplicaMatrix = Eigen::MatrixXd;

inline constexpr int kMaxReplicaDegree = 7;  // 7! = 5040 keeps dense algebra tractable

std::int64_t factorial(int k);

/// A permutation of {0, ..., k-1}, stored as its image sequence.
class Permutation {
 public:
  explicit Permutation(std::vector<int> images);
  static Permutation identity(int k);

  int degree() const { return static_cast<int>(images_.size()); }
  int operator()(int i) const { return images_[static_cast<std::size_t>(i)]; }
  const std::vector<int>& images() const { return images_; }

  bool is_identity() const;
  Permutation inverse() const;
  /// Composition acting as (a * b)(i) = a(b(i)).
  Permutation compose(const Permutation& rhs) const;

  bool operator==(const Permutation& rhs) const { return images_ == rhs.images_; }

 private:
  std::vector<int> images_;
};

/// Cycle-type statistics: by_length[a-1] = number of cycles of length a.
struct CycleCounts {
  std::vector<int> by_length;

  int degree() const;             // sum of a * by_length[a-1]
  int fixed_points() const { return by_length.empty() ? 0 : by_length[0]; }
  int total_cycles() const;
};

CycleCounts cycle_counts(const Permutation& p);

/// All k! elements of S_k in lexicographic order of image sequences,
/// identity first. The ordering is the canonical index space shared by
/// every replica matrix in this library.
class PermutationTable {
 public:
  explicit PermutationTable(int k);

  int degree() const { return k_; }
  std::size_t size() const { return elements_.size(); }
  const Permutation& operator[](std::size_t i) const { return elements_[i]; }
  const std::vector<Permutation>& elements() const { return elements_; }

  /// Lexicographic rank; inverse of operator[].
  std::size_t index_of(const Permutation& p) const;

  /// Shared per-degree table (thread-safe, built once).
  static const PermutationTable& cached(int k);

 private:
  int k_;
  std::vector<Permutation> elements_;
};

/// Number of cycles of sigma^{-1} pi; the exponent of q in the overlap
/// <<sigma|pi>>_q.
int relative_cycle_count(const Permutation& sigma, const Permutation& pi);

/// Number of points fixed by both sigma and pi.
int common_fixed_points(const Permutation& sigma, const Permutation& pi);

/// Diagonal matrix with entries P_ss = k - n_F(sigma). P_ee = 0.
ReplicaMatrix fixed_point_matrix(const PermutationTable& table);

/// 0/1 symmetric adjacency: A_sp = 1 iff sigma pi^{-1} is a transposition.
ReplicaMatrix transposition_adjacency(const PermutationTable& table);

}  // namespace popkit

#endif
