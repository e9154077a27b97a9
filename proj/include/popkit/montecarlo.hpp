// Copyright 2026 The popkit developers.
//
// This source code is licensed under the Apache License, Version 2.0 found in
// the LICENSE file in the root directory of this source tree.

#ifndef POPKIT_MONTECARLO_HPP
#define POPKIT_MONTECARLO_HPP

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "popkit/brickwall.hpp"
#include "popkit/random.hpp"
#include "popkit/rmps.hpp"
#include "popkit/stats.hpp"

namespace popkit {

/// One draw of the rescaled output probability w = D <x| rho |x>.
struct OverlapSample {
  double w = 0.0;
  std::int64_t circuit_id = 0;
  std::string bitstring;
};

enum class LadderMethod {
  automatic,   // exact mixed-state evolution for chi <= 32, patterns above
  pattern_dp,  // truncated error-pattern sum with stochastic block resets
  exact,       // chi x chi mixed-state evolution (every pattern order)
};

struct LadderSampleOptions {
  int m_max = 3;             // error-pattern truncation order (pattern_dp)
  bool auto_m_max = false;   // raise m_max until the tail bound is below target
  double tail_target = 1e-5;
  LadderMethod method = LadderMethod::automatic;
  int probe_repeats = 1;     // independent reset-probe sets averaged per sample
};

struct RmpsSampleResult {
  std::vector<OverlapSample> samples;
  double tail_bound = 0.0;       // binomial mass of the discarded patterns
  int m_max_used = 0;
  double probe_noise_rel = 0.0;  // rms relative spread across probe repeats
};

/// Bitstring overlaps of noisy staircase RMPS.
///
/// Physical variant: w is evaluated exactly by contracting the pure MPS
/// against the product of projected-adjoint matrices rho_x.
///
/// Ladder variant: the per-gate depolarizing channel is expanded as
/// (1-eps) identity + eps (uniform block reset); patterns of up to m_max
/// resets are summed exactly by a transfer recursion over gate positions,
/// with each reset realized by a stochastic-trace probe of the maximally
/// mixed block. The discarded >m_max tail carries the reported binomial
/// bound.
RmpsSampleResult sample_rmps_overlaps(const RmpsSpec& spec, int n_circuits,
                                      int n_bits_per_circuit, const RandomStream& stream,
                                      const LadderSampleOptions& options = {});

struct BrickwallDists {
  Eigen::VectorXd p_noisy;
  Eigen::VectorXd p_ideal;
  double purity = 0.0;
};

/// Exact density-matrix simulation of one noisy brickwall circuit next to
/// its ideal statevector twin (same gates). Needs d^n_sites <= 1024.
BrickwallDists simulate_brickwall_exact(const BrickwallSpec& spec, std::mt19937_64& rng);

/// D sum_x p_noisy(x) p_ideal(x) - 1.
double empirical_xeb(const Eigen::VectorXd& p_noisy, const Eigen::VectorXd& p_ideal);

/// Circuit-averaged empirical XEB with a standard error over realizations.
MeanErr brickwall_empirical_xeb(const BrickwallSpec& spec, int n_circuits,
                                const RandomStream& stream);

struct MomentEstimate {
  std::vector<double> values;      // E[w^k], k = 1..k_max
  std::vector<double> std_errors;  // jackknife over circuit realizations
};

MomentEstimate empirical_moments(const std::vector<OverlapSample>& samples, int k_max);

struct HaarGlobalResult {
  std::vector<OverlapSample> samples;
  MeanErr xeb;
};

/// Haar-random states of dimension dim under a global depolarizing
/// channel: per-state exact XEB and uniformly drawn bitstring overlaps.
HaarGlobalResult sample_haar_global(int dim, double eps_glob, int n_states,
                                    int n_bits_per_state, const RandomStream& stream);

}  // namespace popkit

#endif
