#pragma once

#include <array>
#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include "mmlab/core.hpp"

namespace mmlab {

struct SamplerConfig {
  std::uint64_t seed = 0;
  std::size_t sample_count = 1;
};

/// Independent generator for sample `index`; samples can be drawn in any
/// order or on any worker and still produce identical output.
std::mt19937_64 sample_stream(std::uint64_t seed, std::uint64_t index);

/// {0,1}^n with the normalized Hamming distance and uniform weights.
/// Point i has coordinate k equal to bit (n-1-k) of i, so labels read as binary.
FiniteMMSpace hamming_cube(std::size_t n, std::size_t max_n = 20);

/// S_n in lexicographic order, normalized Hamming distance, uniform weights.
FiniteMMSpace symmetric_group(std::size_t n, std::size_t max_n = 7);

enum class SphereMetric { Euclidean, Geodesic };

/// Uniform samples on S^dim in R^(dim+1).
FiniteMMSpace sphere_sampled(std::size_t dim, const SamplerConfig& cfg, SphereMetric metric);

/// Haar-distributed samples of SO(n) with the operator-norm distance.
FiniteMMSpace so_n_sampled(std::size_t n, const SamplerConfig& cfg);

/// 2x2 matrix over F_p, stored as {a, b, c, d} for [[a, b], [c, d]].
using Mat2 = std::array<std::uint32_t, 4>;

struct WordMetricGroup {
  std::uint32_t p = 0;
  std::vector<Mat2> elements;  // elements[0] is the identity
  std::vector<Mat2> gens;      // closed under inverse
  std::vector<std::uint16_t> dist;  // word-length matrix, row-major

  std::size_t size() const { return elements.size(); }
  std::uint16_t distance(std::size_t i, std::size_t j) const { return dist[i * size() + j]; }
  /// Uniform weights over the group, raw (unnormalized) word metric.
  FiniteMMSpace to_space() const;
};

bool is_prime(std::uint64_t p);

/// SL(2, F_p) with the word metric of the elementary generators
/// [[1,1],[0,1]], [[1,0],[1,1]] and their inverses.
WordMetricGroup sl2_word_metric(std::uint32_t p, std::uint32_t max_p = 13);

Mat2 mat_mul(const Mat2& x, const Mat2& y, std::uint32_t p);
Mat2 mat_inv(const Mat2& x, std::uint32_t p);

/// X^n for a finite set X with probability vector `base_weights`, product
/// measure and normalized Hamming distance.
FiniteMMSpace product_space(std::span<const double> base_weights, std::size_t n,
                            std::size_t max_points = std::size_t{1} << 20);

}  // namespace mmlab
