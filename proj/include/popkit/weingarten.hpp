// Copyright 2026 The popkit developers.
//
// This source code is licensed under the Apache License, Version 2.0 found in
// the LICENSE file in the root directory of this source tree.

#ifndef POPKIT_WEINGARTEN_HPP
#define POPKIT_WEINGARTEN_HPP

#include "popkit/perm.hpp"

namespace popkit {

/// Overlap (Gram) matrix G_sp(q) = q^{#cycles(sigma^{-1} pi)} on S_k.
/// Symmetric, positive semidefinite; diagonal entries are q^k.
ReplicaMatrix gram_matrix(const PermutationTable& table, int q);

/// Weingarten matrix: Moore-Penrose pseudo-inverse of gram_matrix(k, q).
/// G is invertible for q >= k, where this is the plain inverse. For q < k
/// the spectrum is cut at 1e-12 times the largest eigenvalue (the Gram
/// matrix is singular there and the pseudo-inverse needs a regularization
/// choice; this cutoff is ours).
ReplicaMatrix weingarten_matrix(const PermutationTable& table, int q);

/// Cached copy of weingarten_matrix keyed by (degree, q). Safe for
/// concurrent readers; writes are idempotent.
const ReplicaMatrix& weingarten_matrix_cached(int k, int q);

/// Max-entry norm of q^{-k} G(q) - 1 - A/q. Decays as O(q^{-2});
/// identically zero for k = 2.
double gram_expansion_residual(const PermutationTable& table, int q);

/// Max-entry norm of q^{k} Wg(q) - 1 + A/q, the dual O(q^{-2}) check.
double weingarten_expansion_residual(const PermutationTable& table, int q);

/// Which of the common fixed points get removed when reducing a pair of
/// permutations. The Weingarten value depends only on the cycle type, so
/// the choice must not matter; tests exercise both.
enum class FixedPointRemoval { first, last };

/// Noisy Weingarten coefficients for the channel-dressed gate average
///   E[((1-eps) U (x) U* + (eps/q) |e>><<e|)^{(x) k}].
/// Entry (pi, sigma) sums over how many common fixed points of (pi, sigma)
/// came from the trace-replacing part of the channel, each term weighted
/// binomially and backed by a reduced-degree Weingarten matrix at the same
/// dimension q. Reduces to weingarten_matrix at eps = 0.
ReplicaMatrix noisy_weingarten(const PermutationTable& table, int q, double eps,
                               FixedPointRemoval removal = FixedPointRemoval::first);

}  // namespace popkit

#endif
