#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "mmlab/core.hpp"

namespace mmlab {

/// Joint probability matrix, rows indexed by the first marginal.
struct Coupling {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> joint;  // row-major

  double at(std::size_t i, std::size_t j) const { return joint[i * cols + j]; }
  std::vector<double> row_sums() const;
  std::vector<double> col_sums() const;
};

struct MeasurePair {
  std::vector<double> mu1;
  std::vector<double> mu2;
};

struct EmdResult {
  double distance = 0;
  Coupling witness;
};

/// Throws InputError unless `mu` is a probability vector of length n
/// (entries >= 0, sum within 1e-9 of one).
void check_probability(std::span<const double> mu, std::size_t n, const char* name);

/// Minimum-cost transportation between `supply` and `demand` with a dense
/// rows x cols cost matrix. Exact up to floating point; zero-mass rows and
/// columns are dropped before solving and come back as zero rows/columns.
EmdResult solve_transport(std::span<const double> supply, std::span<const double> demand,
                          std::span<const double> cost);

/// Transportation (earth mover's) distance between two measures on `space`.
EmdResult emd(const FiniteMMSpace& space, const MeasurePair& pair);

/// Independent check of emd: enumerates every vertex of the coupling
/// polytope (spanning-tree bases) and keeps the cheapest. n <= 6.
double emd_oracle(const FiniteMMSpace& space, const MeasurePair& pair);

/// mu pushed forward by the point map i -> perm[i].
std::vector<double> pushforward(std::span<const double> mu, std::span<const std::size_t> perm);

/// emd between mu and its pushforward under a bijection of the points.
double translate_distance(const FiniteMMSpace& space, std::span<const double> mu,
                          std::span<const std::size_t> perm);

}  // namespace mmlab
