// Copyright 2026 The popkit developers.
//
// This source code is licensed under the Apache License, Version 2.0 found in
// the LICENSE file in the root directory of this source tree.

#include "popkit/gram_charlier.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <numbers>
#include <stdexcept>

#include <Eigen/Dense>

namespace popkit {

double hermite_he(int n, double y) {
  if (n == 0) return 1.0;
  if (n == 1) return y;
  double prev = 1.0, cur = y;
  for (int i = 1; i < n; ++i) {
    const double next = y * cur - i * prev;
    prev = cur;
    cur = next;
  }
  return cur;
}

double GramCharlierModel::model_moment(int k) const {
  const double ks = k * sigma;
  double series = 1.0;
  for (std::size_t i = 0; i < hermite_coeffs.size(); ++i)
    series += hermite_coeffs[i] * std::pow(ks, static_cast<int>(i) + 3);
  return std::exp(k * mu + 0.5 * ks * ks) * series;
}

double GramCharlierModel::density_log_raw(double y) const {
  const double z = (y - mu) / sigma;
  double series = 1.0;
  for (std::size_t i = 0; i < hermite_coeffs.size(); ++i)
    series += hermite_coeffs[i] * hermite_he(static_cast<int>(i) + 3, z);
  const double phi = std::exp(-0.5 * z * z) / (sigma * std::sqrt(2.0 * std::numbers::pi));
  return phi * series;
}

namespace {

// mu from the E[w] = 1 constraint at given (sigma, c).
double constrained_mu(double sigma, const std::vector<double>& c) {
  double series = 1.0;
  for (std::size_t i = 0; i < c.size(); ++i)
    series += c[i] * std::pow(sigma, static_cast<int>(i) + 3);
  if (series <= 1e-12) return std::numeric_limits<double>::quiet_NaN();
  return -0.5 * sigma * sigma - std::log(series);
}

Eigen::VectorXd fit_residuals(const Eigen::VectorXd& theta, const MomentVector& moments,
                              double ridge) {
  // theta(0) = log sigma, theta(1..) = c_3..c_m. The optional ridge adds
  // sqrt(ridge) c_n rows, biasing the solver towards small corrections.
  const double sigma = std::exp(theta(0));
  std::vector<double> c(static_cast<std::size_t>(theta.size() - 1));
  for (std::size_t i = 0; i < c.size(); ++i) c[i] = theta(static_cast<Eigen::Index>(i) + 1);
  GramCharlierModel m;
  m.sigma = sigma;
  m.hermite_coeffs = c;
  m.mu = constrained_mu(sigma, c);

  const auto n_fit = static_cast<Eigen::Index>(moments.k_max() - 1);
  const auto n_pen = static_cast<Eigen::Index>(ridge > 0.0 ? c.size() : 0);
  Eigen::VectorXd r = Eigen::VectorXd::Zero(n_fit + n_pen);
  if (!std::isfinite(m.mu)) {
    r.setConstant(1e6);
    return r;
  }
  for (int k = 2; k <= moments.k_max(); ++k) {
    const double model = m.model_moment(k);
    if (!(model > 0.0)) {
      r.setConstant(1e6);
      return r;
    }
    r(k - 2) = std::log(model) - std::log(moments.moment(k));
  }
  for (Eigen::Index i = 0; i < n_pen; ++i)
    r(n_fit + i) = std::sqrt(ridge) * c[static_cast<std::size_t>(i)];
  return r;
}

double negative_series_mass(const GramCharlierModel& model) {
  const int m = 4096;
  const double lo = model.mu - 14.0 * model.sigma;
  const double hi = model.mu + 14.0 * model.sigma;
  const double h = (hi - lo) / (m - 1);
  double clipped = 0.0;
  for (int i = 0; i < m; ++i) {
    const double f = model.density_log_raw(lo + h * i);
    if (f < 0.0) clipped -= ((i == 0 || i == m - 1) ? 0.5 : 1.0) * f * h;
  }
  return clipped;
}

GramCharlierModel fit_once(const MomentVector& moments, int order, double ridge) {
  const int n_params = order - 1;  // log sigma + c_3..c_order

  Eigen::VectorXd theta = Eigen::VectorXd::Zero(n_params);
  theta(0) = std::log(std::max(1e-4, std::sqrt(std::log(std::max(1.0 + 1e-12, moments.moment(2))))));

  Eigen::VectorXd r = fit_residuals(theta, moments, ridge);
  double cost = r.squaredNorm();
  double lambda = 1e-6;
  for (int iter = 0; iter < 400; ++iter) {
    if (r.cwiseAbs().maxCoeff() < 1e-13) break;
    Eigen::MatrixXd jac(r.size(), n_params);
    for (int p = 0; p < n_params; ++p) {
      const double h = 1e-7 * std::max(1.0, std::abs(theta(p)));
      Eigen::VectorXd tp = theta;
      tp(p) += h;
      jac.col(p) = (fit_residuals(tp, moments, ridge) - r) / h;
    }
    bool accepted = false;
    for (int attempt = 0; attempt < 40 && !accepted; ++attempt) {
      const Eigen::MatrixXd a =
          jac.transpose() * jac + lambda * Eigen::MatrixXd::Identity(n_params, n_params);
      const Eigen::VectorXd step = a.ldlt().solve(jac.transpose() * r);
      const Eigen::VectorXd trial = theta - step;
      const Eigen::VectorXd rt = fit_residuals(trial, moments, ridge);
      const double ct = rt.squaredNorm();
      if (std::isfinite(ct) && ct < cost) {
        theta = trial;
        r = rt;
        cost = ct;
        lambda = std::max(1e-12, lambda * 0.3);
        accepted = true;
      } else {
        lambda *= 10.0;
      }
    }
    if (!accepted) break;
  }

  if (!std::isfinite(cost)) {
    std::vector<double> res(r.data(), r.data() + r.size());
    throw FitError("fit_gram_charlier: diverged", res);
  }

  GramCharlierModel model;
  model.sigma = std::exp(theta(0));
  model.hermite_coeffs.assign(theta.data() + 1, theta.data() + n_params);
  model.mu = constrained_mu(model.sigma, model.hermite_coeffs);
  model.residuals.resize(static_cast<std::size_t>(moments.k_max()));
  model.residuals[0] = 0.0;  // k = 1 enforced through mu
  for (int k = 2; k <= moments.k_max(); ++k)
    model.residuals[static_cast<std::size_t>(k - 1)] =
        std::abs(model.model_moment(k) / moments.moment(k) - 1.0);
  return model;
}

}  // namespace

GramCharlierModel fit_gram_charlier(const MomentVector& moments, int order) {
  if (order < 2 || order > 8) throw std::invalid_argument("fit_gram_charlier: order must be in [2, 8]");
  if (moments.k_max() < order)
    throw std::invalid_argument("fit_gram_charlier: need k_max >= order");
  if (moments.k_max() < 2) throw std::invalid_argument("fit_gram_charlier: need k_max >= 2");
  for (double v : moments.values)
    if (!(v > 0.0) || !std::isfinite(v))
      throw std::invalid_argument("fit_gram_charlier: moments must be positive and finite");
  if (std::abs(moments.moment(1) - 1.0) > 1e-6)
    throw std::invalid_argument("fit_gram_charlier: E[w] must equal 1");

  // Plain constrained least squares first. When the input sits far from
  // any lognormal, the exact moment solution can carry huge Hermite
  // coefficients and a badly negative series; in that case retry with a
  // growing ridge on the coefficients and keep the first result whose
  // negative mass is acceptable (or the least negative one seen).
  GramCharlierModel best = fit_once(moments, order, 0.0);
  double best_neg = negative_series_mass(best);
  if (best_neg <= 0.005) return best;
  for (double ridge : {1e-4, 1e-3, 1e-2, 1e-1, 1.0}) {
    const GramCharlierModel trial = fit_once(moments, order, ridge);
    const double neg = negative_series_mass(trial);
    if (neg < best_neg) {
      best = trial;
      best_neg = neg;
    }
    if (best_neg <= 0.005) break;
  }
  return best;
}

double pop_pdf_log(const GramCharlierModel& model, double y) {
  return std::max(0.0, model.density_log_raw(y));
}

double pop_pdf(const GramCharlierModel& model, double w) {
  if (w <= 0.0) return 0.0;
  return pop_pdf_log(model, std::log(w)) / w;
}

PopCurve pop_curve(const GramCharlierModel& model, double w_min, double w_max, int n,
                   bool strict_clip) {
  if (n < 16 || w_min <= 0.0 || w_max <= w_min)
    throw std::invalid_argument("pop_curve: bad grid");

  // Clipped mass on a wide internal y grid: the raw series integrates to
  // one exactly, so the clipped excess is int max(0, -f) dy.
  double clipped = 0.0, positive = 0.0;
  {
    const int m = 8192;
    const double lo = model.mu - 14.0 * model.sigma;
    const double hi = model.mu + 14.0 * model.sigma;
    const double h = (hi - lo) / (m - 1);
    for (int i = 0; i < m; ++i) {
      const double f = model.density_log_raw(lo + h * i);
      const double wgt = (i == 0 || i == m - 1) ? 0.5 : 1.0;
      if (f < 0.0)
        clipped -= wgt * f * h;
      else
        positive += wgt * f * h;
    }
  }
  if (strict_clip && clipped > 0.005)
    throw std::runtime_error("pop_curve: clipped negative mass exceeds 0.5%");

  PopCurve c;
  c.method = "gram_charlier";
  c.clipped_mass = clipped;
  c.w.resize(static_cast<std::size_t>(n));
  c.pdf_w.resize(static_cast<std::size_t>(n));
  c.pdf_log.resize(static_cast<std::size_t>(n));
  const double step = std::log(w_max / w_min) / (n - 1);
  for (int i = 0; i < n; ++i) {
    const double w = w_min * std::exp(step * i);
    const double fy = pop_pdf_log(model, std::log(w)) / std::max(positive, 1e-300);
    c.w[static_cast<std::size_t>(i)] = w;
    c.pdf_log[static_cast<std::size_t>(i)] = fy;
    c.pdf_w[static_cast<std::size_t>(i)] = fy / w;
  }
  return c;
}

namespace {

PopCurve convolved_with_pt(const GramCharlierModel& factor, double w_min, double w_max, int n) {
  PopCurve c;
  c.method = "gram_charlier_pt";
  c.clipped_mass = 0.0;
  c.w.resize(static_cast<std::size_t>(n));
  c.pdf_w.resize(static_cast<std::size_t>(n));
  c.pdf_log.resize(static_cast<std::size_t>(n));

  // Normalize the clipped factor density in y_g first.
  const int m = 4097;
  const double lo = factor.mu - 12.0 * factor.sigma;
  const double hi = factor.mu + 12.0 * factor.sigma;
  const double h = (hi - lo) / (m - 1);
  std::vector<double> fy(static_cast<std::size_t>(m));
  double mass = 0.0;
  for (int i = 0; i < m; ++i) {
    fy[static_cast<std::size_t>(i)] = pop_pdf_log(factor, lo + h * i);
    mass += ((i == 0 || i == m - 1) ? 0.5 : 1.0) * fy[static_cast<std::size_t>(i)] * h;
  }
  for (auto& v : fy) v /= mass;

  const double step = std::log(w_max / w_min) / (n - 1);
  for (int i = 0; i < n; ++i) {
    const double w = w_min * std::exp(step * i);
    double acc = 0.0;
    for (int j = 0; j < m; ++j) {
      const double y = lo + h * j;
      const double wgt = (j == 0 || j == m - 1) ? 0.5 : 1.0;
      acc += wgt * fy[static_cast<std::size_t>(j)] * std::exp(-y - w * std::exp(-y)) * h;
    }
    c.w[static_cast<std::size_t>(i)] = w;
    c.pdf_w[static_cast<std::size_t>(i)] = acc;
    c.pdf_log[static_cast<std::size_t>(i)] = acc * w;
  }
  return c;
}

}  // namespace

PopPrediction pop_prediction(const ScalingPoint& point, const PopPredictOptions& options) {
  PopPrediction out;
  out.input_moments.values.resize(static_cast<std::size_t>(options.k_max));
  for (int k = 1; k <= options.k_max; ++k)
    out.input_moments.values[static_cast<std::size_t>(k - 1)] = rescaled_moment(k, point);

  if (point.eta <= 0.0) {
    const DensityCurve base = lognormal_pt_curve(point.x, options.w_min, options.w_max,
                                                 options.n_grid);
    out.curve.method = "lognormal_pt";
    out.curve.w = base.w;
    out.curve.pdf_w = base.pdf;
    out.curve.pdf_log.resize(base.w.size());
    for (std::size_t i = 0; i < base.w.size(); ++i)
      out.curve.pdf_log[i] = base.pdf[i] * base.w[i];
    return out;
  }

  if (point.eta < options.eta_switch) {
    // Fit the finite-depth factor g (moments E[w^k]/k!) and convolve with
    // the Porter-Thomas part.
    MomentVector g_moments;
    g_moments.values.resize(static_cast<std::size_t>(options.k_max));
    for (int k = 1; k <= options.k_max; ++k)
      g_moments.values[static_cast<std::size_t>(k - 1)] =
          out.input_moments.values[static_cast<std::size_t>(k - 1)] /
          static_cast<double>(factorial(k));
    out.model = fit_gram_charlier(g_moments, options.order);
    out.curve = convolved_with_pt(*out.model, options.w_min, options.w_max, options.n_grid);
    return out;
  }

  out.model = fit_gram_charlier(out.input_moments, options.order);
  out.curve = pop_curve(*out.model, options.w_min, options.w_max, options.n_grid,
                        options.strict_clip);
  return out;
}

std::function<double(double)> curve_cdf(const PopCurve& curve) {
  const std::size_t n = curve.w.size();
  auto cdf = std::make_shared<std::vector<double>>(n, 0.0);
  double acc = 0.0;
  for (std::size_t i = 1; i < n; ++i) {
    acc += 0.5 * (curve.pdf_w[i] + curve.pdf_w[i - 1]) * (curve.w[i] - curve.w[i - 1]);
    (*cdf)[i] = acc;
  }
  const double total = std::max(acc, 1e-300);
  auto w_grid = std::make_shared<std::vector<double>>(curve.w);
  return [cdf, w_grid, total](double w) {
    const auto& grid = *w_grid;
    if (w <= grid.front()) return 0.0;
    if (w >= grid.back()) return 1.0;
    const auto it = std::upper_bound(grid.begin(), grid.end(), w);
    const std::size_t i = static_cast<std::size_t>(it - grid.begin());
    const double t = (w - grid[i - 1]) / (grid[i] - grid[i - 1]);
    return ((*cdf)[i - 1] + t * ((*cdf)[i] - (*cdf)[i - 1])) / total;
  };
}

double curve_moment(const PopCurve& curve, int k) {
  double acc = 0.0;
  for (std::size_t i = 1; i < curve.w.size(); ++i) {
    const double f0 = std::pow(curve.w[i - 1], k) * curve.pdf_w[i - 1];
    const double f1 = std::pow(curve.w[i], k) * curve.pdf_w[i];
    acc += 0.5 * (f0 + f1) * (curve.w[i] - curve.w[i - 1]);
  }
  return acc;
}

}  // namespace popkit
