// Copyright 2026 The popkit developers.
//
// This source code is licensed under the Apache License, Version 2.0 found in
// the LICENSE file in the root directory of this source tree.

#ifndef POPKIT_STATS_HPP
#define POPKIT_STATS_HPP

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace popkit {

struct MeanErr {
  double mean = 0.0;
  double std_err = 0.0;
};

MeanErr mean_std_err(const std::vector<double>& values);

/// Jackknife standard error of the pooled mean, leaving one group
/// (circuit realization) out at a time.
MeanErr jackknife_grouped_mean(const std::vector<double>& group_sums,
                               const std::vector<std::int64_t>& group_counts);

/// Two-sided one-sample Kolmogorov-Smirnov statistic against a reference
/// CDF. `sorted_samples` must be ascending.
double ks_statistic(const std::vector<double>& sorted_samples,
                    const std::function<double(double)>& cdf);

/// Critical KS distance at significance alpha (supported: 0.01, 0.05)
/// in the large-n approximation c(alpha)/sqrt(n).
double ks_critical(double alpha, std::size_t n);

struct Histogram {
  std::vector<double> edges;   // size bins + 1
  std::vector<std::int64_t> counts;
  std::int64_t underflow = 0;
  std::int64_t overflow = 0;
  std::int64_t total = 0;

  std::string to_json() const;
};

/// Log-spaced histogram over [lo, hi] with under/overflow counters.
Histogram log_histogram(const std::vector<double>& values, double lo = 1e-4, double hi = 50.0,
                        int bins = 120);

}  // namespace popkit

#endif
