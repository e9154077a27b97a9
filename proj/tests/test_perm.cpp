// Copyright 2026 The popkit developers.
//
// This source code is licensed under the Apache License, Version 2.0 found in
// the LICENSE file in the root directory of this source tree.

#include "popkit/perm.hpp"

#include <random>

#include "doctest.h"

using namespace popkit;

namespace {

Permutation random_perm(int k, std::mt19937_64& rng) {
  const PermutationTable& table = PermutationTable::cached(k);
  std::uniform_int_distribution<std::size_t> dist(0, table.size() - 1);
  return table[dist(rng)];
}

}  // namespace

TEST_SUITE("perm") {

TEST_CASE("enumeration sizes and ordering") {
  CHECK(PermutationTable(1).size() == 1);
  CHECK(PermutationTable(2).size() == 2);
  CHECK(PermutationTable(4).size() == 24);
  CHECK(PermutationTable(7).size() == 5040);
  CHECK_THROWS_AS(PermutationTable(0), std::invalid_argument);
  CHECK_THROWS_AS(PermutationTable(8), std::invalid_argument);

  const PermutationTable t4(4);
  CHECK(t4[0].is_identity());
  for (std::size_t i = 1; i < t4.size(); ++i)
    CHECK(t4[i - 1].images() < t4[i].images());  // lexicographic
  for (std::size_t i = 0; i < t4.size(); ++i) CHECK(t4.index_of(t4[i]) == i);
}

TEST_CASE("cycle counts") {
  CHECK(cycle_counts(Permutation({0, 1, 2})).by_length == std::vector<int>{3, 0, 0});
  CHECK(cycle_counts(Permutation({1, 0, 2})).by_length == std::vector<int>{1, 1, 0});
  CHECK(cycle_counts(Permutation({1, 2, 0})).by_length == std::vector<int>{0, 0, 1});
  const auto cc = cycle_counts(Permutation({1, 0, 3, 2, 4}));
  CHECK(cc.degree() == 5);
  CHECK(cc.fixed_points() == 1);
  CHECK(cc.total_cycles() == 3);
}

TEST_CASE("fixed point matrix") {
  const PermutationTable t2(2);
  const ReplicaMatrix p2 = fixed_point_matrix(t2);
  CHECK(p2(0, 0) == 0.0);
  CHECK(p2(1, 1) == 2.0);
  CHECK(p2(0, 1) == 0.0);

  // Entries for S_3 in canonical (lexicographic) order.
  const ReplicaMatrix p3 = fixed_point_matrix(PermutationTable(3));
  const std::vector<double> want{0, 2, 2, 3, 3, 2};
  for (int i = 0; i < 6; ++i) CHECK(p3(i, i) == want[static_cast<std::size_t>(i)]);

  for (int k = 2; k <= 6; ++k) {
    const ReplicaMatrix p = fixed_point_matrix(PermutationTable::cached(k));
    CHECK(p(0, 0) == 0.0);  // identity first
    for (Eigen::Index i = 1; i < p.rows(); ++i) CHECK(p(i, i) >= 2.0);
  }
}

TEST_CASE("transposition adjacency") {
  const ReplicaMatrix a2 = transposition_adjacency(PermutationTable(2));
  CHECK(a2(0, 0) == 0.0);
  CHECK(a2(0, 1) == 1.0);
  CHECK(a2(1, 0) == 1.0);
  CHECK(a2(1, 1) == 0.0);

  for (int k = 2; k <= 5; ++k) {
    const ReplicaMatrix a = transposition_adjacency(PermutationTable::cached(k));
    const double row_sum = k * (k - 1) / 2.0;
    CHECK((a - a.transpose()).cwiseAbs().maxCoeff() == 0.0);
    CHECK(a.diagonal().cwiseAbs().maxCoeff() == 0.0);
    const Eigen::VectorXd ones = Eigen::VectorXd::Ones(a.rows());
    CHECK((a * ones - row_sum * ones).cwiseAbs().maxCoeff() == 0.0);
  }
}

TEST_CASE("relative cycle count and common fixed points") {
  const Permutation e2 = Permutation::identity(2);
  const Permutation swap({1, 0});
  CHECK(relative_cycle_count(e2, swap) == 1);
  CHECK(common_fixed_points(e2, swap) == 0);

  const Permutation s({1, 0, 2});   // (0 1)
  const Permutation p({2, 1, 0});   // (0 2)
  CHECK(relative_cycle_count(s, p) == 1);
  CHECK(common_fixed_points(s, p) == 0);

  std::mt19937_64 rng(7);
  for (int rep = 0; rep < 50; ++rep) {
    const Permutation q = random_perm(5, rng);
    CHECK(relative_cycle_count(q, q) == 5);
    CHECK(common_fixed_points(q, q) == cycle_counts(q).fixed_points());
  }
  CHECK_THROWS_AS(relative_cycle_count(e2, Permutation::identity(3)), std::invalid_argument);
}

TEST_CASE("group axioms on sampled triples") {
  std::mt19937_64 rng(11);
  const PermutationTable& t = PermutationTable::cached(5);
  for (int rep = 0; rep < 200; ++rep) {
    const Permutation a = random_perm(5, rng), b = random_perm(5, rng), c = random_perm(5, rng);
    CHECK(a.compose(b).compose(c) == a.compose(b.compose(c)));
  }
  for (std::size_t i = 0; i < PermutationTable::cached(4).size(); ++i) {
    const Permutation& p = PermutationTable::cached(4)[i];
    CHECK(p.compose(p.inverse()).is_identity());
    CHECK(t.degree() == 5);  // cached table untouched by other lookups
  }
}

TEST_CASE("cycle type is a class function") {
  std::mt19937_64 rng(13);
  for (int rep = 0; rep < 100; ++rep) {
    const Permutation s = random_perm(5, rng);
    const Permutation p = random_perm(5, rng);
    const Permutation conj = p.compose(s).compose(p.inverse());
    CHECK(cycle_counts(conj).by_length == cycle_counts(s).by_length);
  }
}

}  // TEST_SUITE
