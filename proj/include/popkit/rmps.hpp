// Copyright 2026 The popkit developers.
//
// This source code is licensed under the Apache License, Version 2.0 found in
// the LICENSE file in the root directory of this source tree.

#ifndef POPKIT_RMPS_HPP
#define POPKIT_RMPS_HPP

#include <vector>

#include "popkit/channels.hpp"
#include "popkit/perm.hpp"
#include "popkit/scaling.hpp"

namespace popkit {

enum class RmpsVariant {
  physical,  // one channel per physical site, after state generation
  ladder,    // depolarizing on the full d*chi block after every staircase gate
};

/// A noisy random matrix product state generated by a staircase of
/// Haar gates of size d*chi, chi = d^r.
struct RmpsSpec {
  int n_sites = 0;
  int d = 2;
  int r = 1;
  RmpsVariant variant = RmpsVariant::physical;
  KrausChannel channel;        // physical variant: acts on dimension d
  double ladder_epsilon = 0.0; // ladder variant: per-gate depolarizing rate

  long chi() const;
  int gate_dim() const { return d * static_cast<int>(chi()); }
  int n_gates() const { return n_sites - r; }
  void validate() const;
};

/// Transfer operator and boundary vectors in the paper's normalization.
/// Physical: T = Lambda(d) G(chi) Wg(d chi), (L| = (1|Wg, |R) = Lambda^{r+1}|1).
/// Ladder:   T = G(chi) Wg~(d chi, eps), (L| = (1|Wg~, |R) = |1).
struct TransferOperator {
  ReplicaMatrix T;
  Eigen::VectorXd left;
  Eigen::VectorXd right;
};

TransferOperator build_physical_transfer(const RmpsSpec& spec, int k);
TransferOperator build_ladder_transfer(const RmpsSpec& spec, int k);

/// E[w^k] = D^{k-1} I_k, evaluated with rescaled transfer factors so that
/// no d^{-kN} underflow occurs at large N. k <= 6.
double rmps_moment(const RmpsSpec& spec, int k);

/// I_k = sum_x E[p(x)^k]. Equals 1 at k = 1 for any trace-preserving
/// channel. Underflows to 0 when D^{k-1} overflows the double range;
/// use rmps_moment for large N.
double ipr_physical(const RmpsSpec& spec, int k);
double ipr_ladder(const RmpsSpec& spec, int k);

struct ConvergenceRow {
  int n_sites = 0;
  int r = 0;
  long chi = 0;
  double x_attained = 0.0;
  double moment = 0.0;      // E[w^k] at finite size
  double prediction = 0.0;  // scaling-limit moment at (x_attained, eta)
  double rel_dev = 0.0;
};

/// Finite-size-to-scaling-limit convergence sweep at fixed (x, eta).
/// chi is quantized to powers of d; r is chosen to minimize
/// |log chi - log((d-1)N/(d x))| and the attained x is recorded.
std::vector<ConvergenceRow> scaling_convergence_report(RmpsVariant variant, int k, double x,
                                                       double eta, const std::vector<int>& n_list,
                                                       int d = 2);

}  // namespace popkit

#endif
