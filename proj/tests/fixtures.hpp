#pragma once

#include <algorithm>
#include <numeric>
#include <random>

#include "mmlab/dynamics.hpp"
#include "mmlab/generators.hpp"
#include "oracles.hpp"

namespace fixture {

using namespace mmlab;

inline std::vector<std::uint8_t> transposition01(std::size_t n) {
  std::vector<std::uint8_t> t(n);
  std::iota(t.begin(), t.end(), std::uint8_t{0});
  std::swap(t[0], t[1]);
  return t;
}

// A = {sigma : sigma^{-1}(0) < sigma^{-1}(1)}, i.e. 0 appears before 1 in the word.
inline SubsetMask zero_before_one(const FiniteMMSpace& sn) {
  SubsetMask a(sn.size());
  for (std::size_t i = 0; i < sn.size(); ++i) {
    const auto& w = sn.labels()[i];
    a.set(i, w.find('0') < w.find('1'));
  }
  return a;
}

inline std::size_t factorial(std::size_t n) { return n <= 1 ? 1 : n * factorial(n - 1); }

inline IsometricAction transposition_action(std::size_t n) {
  return IsometricAction(symmetric_group(n),
                         {identity_permutation(factorial(n)), symmetric_left_translation(n, transposition01(n))},
                         {"e", "t01"});
}

// Star metric: center 0, leaves at radius 1 + group, d(i, j) = r_i + r_j.
// Permuting leaves inside a group keeps every distance and fixes the center.
struct FixedPointInstance {
  IsometricAction action;
  std::size_t fixed;
};

inline FixedPointInstance random_fixed_point_action(std::mt19937_64& rng) {
  const std::size_t n = 2 + rng() % 7;
  std::vector<int> group(n, -1);
  std::vector<double> radius(n, 0.0);
  const std::size_t groups = 1 + rng() % 3;
  for (std::size_t i = 1; i < n; ++i) {
    group[i] = static_cast<int>(rng() % groups);
    radius[i] = 1.0 + group[i];
  }
  std::vector<std::vector<double>> d(n, std::vector<double>(n, 0.0));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      if (i != j) d[i][j] = radius[i] + radius[j];
  auto space = oracle::dense_space(d);
  std::vector<Permutation> elems;
  const std::size_t count = 1 + rng() % 3;
  for (std::size_t e = 0; e < count; ++e) {
    Permutation g = identity_permutation(n);
    for (std::size_t k = 0; k < groups; ++k) {
      std::vector<std::size_t> members;
      for (std::size_t i = 1; i < n; ++i)
        if (group[i] == static_cast<int>(k)) members.push_back(i);
      auto shuffled = members;
      std::shuffle(shuffled.begin(), shuffled.end(), rng);
      for (std::size_t m = 0; m < members.size(); ++m) g[members[m]] = shuffled[m];
    }
    elems.push_back(g);
  }
  return {IsometricAction(space, elems), 0};
}

}  // namespace fixture
