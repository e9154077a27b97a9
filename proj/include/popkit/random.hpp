// Copyright 2026 The popkit developers.
//
// This source code is licensed under the Apache License, Version 2.0 found in
// the LICENSE file in the root directory of this source tree.

#ifndef POPKIT_RANDOM_HPP
#define POPKIT_RANDOM_HPP

#include <cstdint>
#include <random>

#include <Eigen/Dense>

namespace popkit {

/// Reproducible random source: identical (seed, id) pairs give identical
/// draws, distinct ids give independent streams.
struct RandomStream {
  std::uint64_t seed = 0;
  std::uint64_t id = 0;

  std::mt19937_64 make_engine() const;
  RandomStream substream(std::uint64_t task) const;
};

/// Haar-distributed unitary via QR of a complex Ginibre matrix with the
/// R-diagonal phases folded back into Q.
Eigen::MatrixXcd sample_haar_unitary(int dim, std::mt19937_64& rng);

/// First `cols` columns of a Haar unitary (a Haar-distributed isometry).
Eigen::MatrixXcd sample_haar_isometry(int rows, int cols, std::mt19937_64& rng);

/// Uniformly distributed unit vector (column of a Haar unitary).
Eigen::VectorXcd sample_haar_state(int dim, std::mt19937_64& rng);

}  // namespace popkit

#endif
