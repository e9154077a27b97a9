// Copyright 2026 The popkit developers.
//
// This source code is licensed under the Apache License, Version 2.0 found in
// the LICENSE file in the root directory of this source tree.

#ifndef POPKIT_CHANNELS_HPP
#define POPKIT_CHANNELS_HPP

#include <complex>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "popkit/perm.hpp"

namespace popkit {

/// A CPTP map on a q-dimensional system, stored in Kraus form.
struct KrausChannel {
  int dim = 0;
  std::vector<Eigen::MatrixXcd> kraus;
  std::string label;
  double param = 0.0;  // native channel parameter (eps or gamma)

  /// Largest entry of |sum_a K_a^dag K_a - 1|.
  double cptp_residual() const;
  Eigen::MatrixXcd apply(const Eigen::MatrixXcd& rho) const;
  /// Superoperator in the row-major vectorization, so that
  /// vec(N(rho)) = S vec(rho); a q^2 x q^2 matrix.
  Eigen::MatrixXcd superoperator() const;
};

KrausChannel make_identity_channel(int q);

/// N(rho) = (1-eps) rho + eps tr(rho) 1/q, via the Heisenberg-Weyl Kraus set.
KrausChannel make_depolarizing(int q, double eps);

/// Standard two-Kraus qubit amplitude damping towards |0>.
KrausChannel make_amplitude_damping(double gamma);

/// rho_x = sum_a K_a^dag |x><x| K_a, the adjoint channel applied to the
/// measurement projector. Positive semidefinite; sums to the identity over x.
Eigen::MatrixXcd projected_adjoint(const KrausChannel& channel, int x);

/// Diagonal of the noise weight matrix on S_k:
///   Lambda_ss = sum_x prod_a tr[rho_x^a]^{n_C(a; sigma)}.
/// Entries are class functions of sigma. Identity channel gives q * ones.
Eigen::VectorXd lambda_weights(const KrausChannel& channel, const PermutationTable& table);

/// Leading-order noise rate of the weak-noise expansion
/// Lambda = q (1 - eps_eff P + ...): eps_eff = (1/q) sum_x (1 - <x|rho_x|x>).
/// Non-negative for any CPTP channel.
double effective_epsilon(const KrausChannel& channel);

}  // namespace popkit

#endif
