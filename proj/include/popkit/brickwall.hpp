// Copyright 2026 The popkit developers.
//
// This source code is licensed under the Apache License, Version 2.0 found in
// the LICENSE file in the root directory of this source tree.

#ifndef POPKIT_BRICKWALL_HPP
#define POPKIT_BRICKWALL_HPP

#include <string>
#include <utility>
#include <vector>

#include "popkit/channels.hpp"
#include "popkit/perm.hpp"

namespace popkit {

enum class NoisePlacement {
  two_site_per_gate,       // channel on the gate's two qudits, with each gate
  one_site_per_layer,      // channel on every qudit after every layer
};

enum class NoiseTiming { after_gate, before_gate };

/// Brickwall of Haar two-qudit gates with open boundaries. Even layers
/// pair sites (0,1),(2,3),...; odd layers (1,2),(3,4),....
struct BrickwallSpec {
  int n_sites = 0;  // even
  int depth = 0;    // layers
  int d = 2;
  KrausChannel channel;  // dim d (one_site_per_layer) or d^2 (two_site_per_gate)
  NoisePlacement placement = NoisePlacement::two_site_per_gate;
  NoiseTiming timing = NoiseTiming::after_gate;

  void validate() const;
  bool noiseless() const;
};

std::vector<std::pair<int, int>> brickwall_layer_pairs(int n_sites, int layer);

struct AveragedGate {
  int k = 0;
  int d = 0;
  ReplicaMatrix weingarten;  // Wg(d^2) on S_k
};

/// Haar average of a two-qudit gate in the replicated picture:
/// sum_{pi,sigma} Wg_{pi,sigma}(d^2) |sigma>><<pi| with the per-site
/// factorization |sigma>>_{d^2} = |sigma>>_d (x) |sigma>>_d.
AveragedGate averaged_gate_decomposition(int k, int d);

/// Bond factor of one site between a lower permutation label and an upper
/// gate: J_{pi,sigma} = <<pi| (N on masked replicas) |sigma>>_d. The
/// identity channel (or an empty mask) gives the pure Gram overlap G(d).
ReplicaMatrix site_noise_matrix(const KrausChannel& channel, int k,
                                const std::vector<bool>& noisy_replica_mask, int d);

/// Mixing of the shared pair label under a two-site channel applied right
/// after a gate: N|sigma>>_{d^2} = sum_tau R_{tau,sigma} |tau>>_{d^2}.
/// Exact closed form for the depolarizing channel at any k; dense
/// reconstruction (k <= 2) otherwise, which throws if the channel leaves
/// the permutation span.
ReplicaMatrix pair_label_mixing(const KrausChannel& channel, int k,
                                const std::vector<bool>& noisy_replica_mask);

/// Exact circuit-averaged linear XEB (k = 2, noise on one replica).
/// Needs d^(2 n_sites) <= 2^24 contraction states.
double xeb_brickwall_avg(const BrickwallSpec& spec);

/// Exact circuit-averaged IPR I_k (all replicas noisy), k <= 3.
double ipr_brickwall_avg(const BrickwallSpec& spec, int k);

struct XebCurveRow {
  int n_sites = 0;
  int depth = 0;
  double rate = 0.0;
  double xeb = 0.0;
  double delta_log = 0.0;  // log(1+xeb) - log(1+e^{-eta_hat})
};

/// XEB versus depth for a list of sizes, with per-gate error rate
/// eta0 / (N t). The rate depends on the target depth, so every (N, t)
/// point is contracted from scratch. Each size uses its own measured
/// deep-depth plateau as the x -> 0 reference of delta_log. The channel
/// is depolarizing by default; "amplitude_damping" with one-site
/// placement gives the damping-noise variant (d = 2).
std::vector<XebCurveRow> brickwall_xeb_curve(const std::vector<int>& n_list, int t_max, int d,
                                             double eta0,
                                             NoisePlacement placement = NoisePlacement::two_site_per_gate,
                                             const std::string& channel_type = "depolarizing");

}  // namespace popkit

#endif
