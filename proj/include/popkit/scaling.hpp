// Copyright 2026 The popkit developers.
//
// This source code is licensed under the Apache License, Version 2.0 found in
// the LICENSE file in the root directory of this source tree.

#ifndef POPKIT_SCALING_HPP
#define POPKIT_SCALING_HPP

#include <vector>

#include "popkit/perm.hpp"

namespace popkit {

/// The two universal parameters: rescaled inverse depth x and rescaled
/// noise eta. Both dimensionless and non-negative.
struct ScalingPoint {
  double x = 0.0;
  double eta = 0.0;
};

enum class Regime { short_depth, intermediate, deep };

/// Documented thresholds (the crossovers are smooth; these labels are
/// ours): short_depth if x > 3 eta, deep if x < min(1, eta/3).
Regime classify_regime(const ScalingPoint& p);

/// Cached structural matrices of S_k in the canonical table order.
const ReplicaMatrix& adjacency_cached(int k);
const ReplicaMatrix& field_cached(int k);

/// k-th moment of the rescaled output probability in the scaling limit,
///   E[w^k] = (1| exp(x A - eta P) |1),
/// evaluated by exact dense exponentiation of the k! x k! generator.
/// Equals k! exp(x k(k-1)/2) at eta = 0 and 1 identically at k = 1.
double rescaled_moment(int k, const ScalingPoint& p);

/// Closed-form scaling-limit XEB,
///   2 e^{-eta/2} [cosh(theta) + x sinh(theta)/theta] - 1,
/// theta = sqrt(x^2 + (eta/2)^2). Agrees with rescaled_moment(2, {x, eta/2}) - 1.
double xeb_scaling(const ScalingPoint& p);

/// log(1 + xeb) - log(1 + e^{-eta}): deviation from the infinite-depth value.
double delta_log_xeb(const ScalingPoint& p);

/// Short-depth expansion k! exp(x k(k-1)/2 - eta (k-1)); valid for eta << x.
double asymptotic_moment_short_depth(int k, const ScalingPoint& p);

/// Deep-regime expansion exp(x^2 k(k-1)/(4 eta)) (1 + x k(k-1)/(2 eta));
/// requires eta > 0.
double asymptotic_moment_deep(int k, const ScalingPoint& p);

/// Moments under a global depolarizing channel on Haar states:
/// sum_sigma (1-eps)^{P_ss}. Gives k! at eps=0 and 1 at eps=1.
double global_depolarizing_moment(int k, double eps_glob);

/// Moments of the shifted Porter-Thomas distribution with shift eps.
double spt_moment(int k, double eps);

// Reference densities of the rescaled probability w.
double pt_pdf(double w);
double spt_pdf(double w, double eps);

/// Noiseless finite-depth density: w = w_PT * g with g log-normal,
/// mu = -x/2, sigma^2 = x, evaluated by quadrature over the log-normal
/// factor. Reduces to exp(-w) at x = 0.
double lognormal_pt_pdf(double w, double x);

struct DensityCurve {
  std::vector<double> w;
  std::vector<double> pdf;
};

/// lognormal_pt_pdf sampled on a log-spaced grid (default [1e-6, 50],
/// 4096 points) and renormalized to unit mass on the grid.
DensityCurve lognormal_pt_curve(double x, double w_min = 1e-6, double w_max = 50.0,
                                int n = 4096);

}  // namespace popkit

#endif
