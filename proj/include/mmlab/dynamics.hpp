#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mmlab/core.hpp"

namespace mmlab {

/// Point map i -> perm[i].
using Permutation = std::vector<std::size_t>;

bool is_bijection(std::span<const std::size_t> perm, std::size_t n);
Permutation compose(const Permutation& outer, const Permutation& inner);  // outer after inner
Permutation inverse(const Permutation& perm);
Permutation identity_permutation(std::size_t n);

/// Image g(A) = {g(a) : a in A}.
SubsetMask image_of(const Permutation& g, const SubsetMask& set);

/// Finitely many isometries of a space. The elements need not form a group.
class IsometricAction {
 public:
  /// Throws InputError if some element is not a bijection or moves a distance.
  IsometricAction(FiniteMMSpace space, std::vector<Permutation> elements, std::vector<std::string> names = {});

  const FiniteMMSpace& space() const { return space_; }
  const std::vector<Permutation>& elements() const { return elements_; }
  const std::vector<std::string>& names() const { return names_; }
  bool preserves_measure() const;

 private:
  FiniteMMSpace space_;
  std::vector<Permutation> elements_;
  std::vector<std::string> names_;
};

/// Empty when `perm` is a bijection with d(perm x, perm y) == d(x, y).
std::vector<std::string> check_isometry(const FiniteMMSpace& space, const Permutation& perm);

struct EssentialResult {
  bool essential = false;
  std::optional<std::size_t> witness;  // a point in every translate
  double eps = 0;                      // the certificate that was checked
  std::vector<std::size_t> family;
};

/// Whether the translates g_i(A_eps), i in `family`, share a point. This
/// checks one (eps, family) certificate, not every eps and family.
EssentialResult is_essential(const IsometricAction& action, const SubsetMask& set, double eps,
                             std::span<const std::size_t> family);

/// g(A_eps) == (g A)_eps for an arbitrary point permutation g.
bool translate_commutation_check(const FiniteMMSpace& space, const Permutation& g, const SubsetMask& set, double eps);
bool translate_commutation_check(const IsometricAction& action, const SubsetMask& set, double eps, std::size_t g);

/// A partition of the points into disjoint parts.
struct Cover {
  std::vector<SubsetMask> parts;
  std::vector<std::string> check(std::size_t n) const;
};

struct ConcentrationPropertyResult {
  bool holds = false;
  std::optional<std::size_t> essential_part;
  double eps = 0;
  std::vector<std::size_t> family;
};

ConcentrationPropertyResult concentration_property_check(const IsometricAction& action, const Cover& cover, double eps,
                                                         std::span<const std::size_t> family);

std::vector<std::size_t> fixed_points(const IsometricAction& action);

/// Point permutation of symmetric_group(n) induced by sigma -> pi o sigma.
Permutation symmetric_left_translation(std::size_t n, const std::vector<std::uint8_t>& pi);

/// Point permutation of hamming_cube(n) moving coordinate k to position pi[k].
Permutation cube_coordinate_action(std::size_t n, const std::vector<std::size_t>& pi);

/// Lexicographic rank of a permutation of {0..n-1}; matches symmetric_group order.
std::size_t permutation_rank(std::span<const std::uint8_t> perm);

struct LeaderCertificate {
  bool inessential_certified = false;
  double threshold = 0;
};

/// sqrt(2)/2 - sqrt(3)/3 and whether eps is strictly below it, in which case
/// 3 (sqrt(2)/2 - eps)^2 > 1 rules out a common point of the three translates.
LeaderCertificate leader_certificate(double eps);

/// True when every one of the three equal coordinate blocks of x has norm at
/// least sqrt(2)/2 - eps. Impossible for unit x once eps is below threshold.
bool leader_block_test(std::span<const double> x, double eps);

struct LeaderEmpirical {
  std::size_t violations = 0;
  std::size_t samples = 0;
  std::size_t dimension = 0;
};

LeaderEmpirical leader_empirical(std::size_t dim_half, std::size_t sample_count, double eps, std::uint64_t seed);

/// r-coloring of all k-subsets of {0..ground-1}; colors[i] belongs to the i-th
/// k-subset in lexicographic order.
struct ColoredHypergraph {
  std::size_t ground = 0;
  std::size_t k = 0;
  std::size_t r = 0;
  std::vector<std::uint8_t> colors;

  static std::vector<std::vector<std::size_t>> subsets(std::size_t ground, std::size_t k);
  std::vector<std::string> check() const;
};

std::uint64_t binomial(std::size_t n, std::size_t k);

/// Lexicographically first l-subset whose k-subsets share one color.
std::optional<SubsetMask> find_monochromatic(const ColoredHypergraph& h, std::size_t l);

struct RamseyResult {
  bool all_colorings_contain = false;
  std::optional<ColoredHypergraph> counterexample;  // lexicographically smallest
  std::uint64_t colorings_checked = 0;
};

/// Whether every r-coloring of the k-subsets of an N-set has a monochromatic
/// l-subset. The first k-subset's color is fixed to 0 (colors are symmetric).
RamseyResult ramsey_verify(std::size_t k, std::size_t l, std::size_t r, std::size_t n,
                           std::uint64_t max_colorings = std::uint64_t{1} << 26);

}  // namespace mmlab
