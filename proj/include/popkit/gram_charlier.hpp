// Copyright 2026 The popkit developers.
//
// This source code is licensed under the Apache License, Version 2.0 found in
// the LICENSE file in the root directory of this source tree.

#ifndef POPKIT_GRAM_CHARLIER_HPP
#define POPKIT_GRAM_CHARLIER_HPP

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "popkit/scaling.hpp"

namespace popkit {

/// E[w^k] for k = 1..k_max, optionally with standard errors.
struct MomentVector {
  std::vector<double> values;
  std::vector<double> std_errors;

  int k_max() const { return static_cast<int>(values.size()); }
  double moment(int k) const { return values.at(static_cast<std::size_t>(k - 1)); }
};

/// Probabilists' Hermite polynomial He_n(y).
double hermite_he(int n, double y);

/// Gaussian-base Hermite series for the density of y = log w:
///   f(y) = phi(z)/sigma [1 + sum_{n>=3} c_n He_n(z)], z = (y - mu)/sigma.
/// Moments have the closed form E[w^k] = e^{k mu + k^2 sigma^2/2}
/// (1 + sum_n c_n (k sigma)^n), which is what the fit matches.
struct GramCharlierModel {
  double mu = 0.0;
  double sigma = 1.0;
  std::vector<double> hermite_coeffs;  // c_3 .. c_m
  std::vector<double> residuals;       // |model/input - 1| per fitted moment

  int order() const { return static_cast<int>(hermite_coeffs.size()) + 2; }
  double model_moment(int k) const;
  /// Raw series density in y; may dip negative before clipping.
  double density_log_raw(double y) const;
};

class FitError : public std::runtime_error {
 public:
  FitError(const std::string& msg, std::vector<double> last_residuals)
      : std::runtime_error(msg), residuals(std::move(last_residuals)) {}
  std::vector<double> residuals;
};

/// Constrained least squares on log-moments: E[w] = 1 is eliminated
/// analytically through mu, and (sigma, c_3..c_m) match the k = 2..k_max
/// inputs. With order = k_max the system is square and the residuals
/// reach ~1e-12; with order < k_max the best least-squares fit is
/// returned with its residuals.
GramCharlierModel fit_gram_charlier(const MomentVector& moments, int order = 4);

struct PopCurve {
  std::vector<double> w;
  std::vector<double> pdf_w;      // density in w
  std::vector<double> pdf_log;    // density in y = log w at y = log w_i
  double clipped_mass = 0.0;      // negative series mass removed by clipping
  std::string method;
};

/// Model density on a log-spaced w grid, clipped at zero and renormalized
/// to unit mass. Throws if more than half a percent of mass is clipped
/// when `strict_clip` is set.
PopCurve pop_curve(const GramCharlierModel& model, double w_min = 1e-6, double w_max = 50.0,
                   int n = 4096, bool strict_clip = false);

/// pdf at a single w (clipped, unnormalized): pdf_y(log w)/w.
double pop_pdf(const GramCharlierModel& model, double w);
double pop_pdf_log(const GramCharlierModel& model, double y);

struct PopPredictOptions {
  int order = 4;
  double eta_switch = 1.0;  // below: Gram-Charlier factor convolved with PT
  int k_max = 6;
  double w_min = 1e-6;
  double w_max = 50.0;
  int n_grid = 4096;
  bool strict_clip = false;
};

struct PopPrediction {
  PopCurve curve;
  std::optional<GramCharlierModel> model;
  MomentVector input_moments;
};

/// The universal probability-of-probabilities density at (x, eta), built
/// from the scaling-limit moments. eta = 0 bypasses the fit (log-normal
/// times Porter-Thomas); small eta fits the log-normal-like factor and
/// convolves with Porter-Thomas; large eta fits log w directly.
PopPrediction pop_prediction(const ScalingPoint& point, const PopPredictOptions& options = {});

/// CDF of a curve by cumulative trapezoid, linearly interpolated.
std::function<double(double)> curve_cdf(const PopCurve& curve);

/// k-th moment of the curve by trapezoid quadrature.
double curve_moment(const PopCurve& curve, int k);

}  // namespace popkit

#endif
