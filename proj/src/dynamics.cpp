#include "mmlab/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <random>

#include "mmlab/generators.hpp"

namespace mmlab {

bool is_bijection(std::span<const std::size_t> perm, std::size_t n) {
  if (perm.size() != n) return false;
  std::vector<char> hit(n, 0);
  for (std::size_t v : perm) {
    if (v >= n || hit[v]) return false;
    hit[v] = 1;
  }
  return true;
}

Permutation compose(const Permutation& outer, const Permutation& inner) {
  Permutation out(inner.size());
  for (std::size_t i = 0; i < inner.size(); ++i) out[i] = outer[inner[i]];
  return out;
}

Permutation inverse(const Permutation& perm) {
  Permutation out(perm.size());
  for (std::size_t i = 0; i < perm.size(); ++i) out[perm[i]] = i;
  return out;
}

Permutation identity_permutation(std::size_t n) {
  Permutation out(n);
  std::iota(out.begin(), out.end(), std::size_t{0});
  return out;
}

SubsetMask image_of(const Permutation& g, const SubsetMask& set) {
  SubsetMask out(set.size());
  for (std::size_t i = 0; i < set.size(); ++i)
    if (set.test(i)) out.set(g[i]);
  return out;
}

std::vector<std::string> check_isometry(const FiniteMMSpace& space, const Permutation& perm) {
  const std::size_t n = space.size();
  if (!is_bijection(perm, n)) return {"not a bijection on the points"};
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      if (space.dist(perm[i], perm[j]) != space.dist(i, j))
        return {"distance not preserved at (" + std::to_string(i) + "," + std::to_string(j) + ")"};
  return {};
}

IsometricAction::IsometricAction(FiniteMMSpace space, std::vector<Permutation> elements,
                                 std::vector<std::string> names)
    : space_(std::move(space)), elements_(std::move(elements)), names_(std::move(names)) {
  if (names_.empty()) {
    for (std::size_t i = 0; i < elements_.size(); ++i) names_.push_back("g" + std::to_string(i));
  }
  if (names_.size() != elements_.size()) throw InputError("one name per action element required");
  for (std::size_t i = 0; i < elements_.size(); ++i) {
    if (const auto bad = check_isometry(space_, elements_[i]); !bad.empty()) {
      throw InputError("element " + names_[i] + ": " + bad.front());
    }
  }
}

bool IsometricAction::preserves_measure() const {
  const auto& w = space_.weights();
  for (const auto& g : elements_)
    for (std::size_t i = 0; i < g.size(); ++i)
      if (std::abs(w[g[i]] - w[i]) > 1e-12) return false;
  return true;
}

EssentialResult is_essential(const IsometricAction& action, const SubsetMask& set, double eps,
                             std::span<const std::size_t> family) {
  const auto& space = action.space();
  const SubsetMask thick = neighborhood(space, set, eps);
  SubsetMask common(space.size(), true);
  for (std::size_t idx : family) {
    if (idx >= action.elements().size()) throw InputError("family index out of range");
    const SubsetMask image = image_of(action.elements()[idx], thick);
    for (std::size_t x = 0; x < space.size(); ++x)
      if (!image.test(x)) common.set(x, false);
  }
  EssentialResult out;
  out.eps = eps;
  out.family.assign(family.begin(), family.end());
  for (std::size_t x = 0; x < space.size(); ++x) {
    if (common.test(x)) {
      out.essential = true;
      out.witness = x;
      break;
    }
  }
  return out;
}

bool translate_commutation_check(const FiniteMMSpace& space, const Permutation& g, const SubsetMask& set, double eps) {
  if (!is_bijection(g, space.size())) throw InputError("action is not a bijection on points");
  return image_of(g, neighborhood(space, set, eps)) == neighborhood(space, image_of(g, set), eps);
}

bool translate_commutation_check(const IsometricAction& action, const SubsetMask& set, double eps, std::size_t g) {
  if (g >= action.elements().size()) throw InputError("element index out of range");
  return translate_commutation_check(action.space(), action.elements()[g], set, eps);
}

std::vector<std::string> Cover::check(std::size_t n) const {
  std::vector<std::string> out;
  std::vector<int> owners(n, 0);
  for (std::size_t p = 0; p < parts.size(); ++p) {
    if (parts[p].size() != n) {
      out.push_back("part " + std::to_string(p) + " has the wrong length");
      return out;
    }
    for (std::size_t i = 0; i < n; ++i) owners[i] += parts[p].test(i) ? 1 : 0;
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (owners[i] == 0) out.push_back("point " + std::to_string(i) + " is not covered");
    if (owners[i] > 1) out.push_back("point " + std::to_string(i) + " lies in several parts");
  }
  return out;
}

ConcentrationPropertyResult concentration_property_check(const IsometricAction& action, const Cover& cover, double eps,
                                                         std::span<const std::size_t> family) {
  if (const auto bad = cover.check(action.space().size()); !bad.empty()) throw InputError("invalid cover: " + bad.front());
  ConcentrationPropertyResult out;
  out.eps = eps;
  out.family.assign(family.begin(), family.end());
  for (std::size_t p = 0; p < cover.parts.size(); ++p) {
    if (cover.parts[p].empty()) continue;
    if (is_essential(action, cover.parts[p], eps, family).essential) {
      out.holds = true;
      out.essential_part = p;
      break;
    }
  }
  return out;
}

std::vector<std::size_t> fixed_points(const IsometricAction& action) {
  std::vector<std::size_t> out;
  for (std::size_t x = 0; x < action.space().size(); ++x) {
    const bool fixed = std::all_of(action.elements().begin(), action.elements().end(),
                                   [x](const Permutation& g) { return g[x] == x; });
    if (fixed) out.push_back(x);
  }
  return out;
}

std::size_t permutation_rank(std::span<const std::uint8_t> perm) {
  const std::size_t n = perm.size();
  std::size_t rank = 0;
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t smaller = 0;
    for (std::size_t j = i + 1; j < n; ++j) smaller += perm[j] < perm[i];
    rank = rank * (n - i) + smaller;
  }
  return rank;
}

Permutation symmetric_left_translation(std::size_t n, const std::vector<std::uint8_t>& pi) {
  if (pi.size() != n) throw InputError("permutation has the wrong degree");
  std::vector<std::uint8_t> sigma(n);
  std::iota(sigma.begin(), sigma.end(), std::uint8_t{0});
  Permutation out;
  std::vector<std::uint8_t> image(n);
  do {
    for (std::size_t i = 0; i < n; ++i) image[i] = pi[sigma[i]];
    out.push_back(permutation_rank(image));
  } while (std::next_permutation(sigma.begin(), sigma.end()));
  return out;
}

Permutation cube_coordinate_action(std::size_t n, const std::vector<std::size_t>& pi) {
  if (!is_bijection(pi, n)) throw InputError("coordinate permutation is not a bijection");
  const std::size_t count = std::size_t{1} << n;
  Permutation out(count);
  for (std::size_t x = 0; x < count; ++x) {
    std::size_t y = 0;
    for (std::size_t k = 0; k < n; ++k) {
      const std::size_t bit = (x >> (n - 1 - k)) & 1U;
      y |= bit << (n - 1 - pi[k]);
    }
    out[x] = y;
  }
  return out;
}

LeaderCertificate leader_certificate(double eps) {
  LeaderCertificate out;
  out.threshold = std::sqrt(2.0) / 2.0 - std::sqrt(3.0) / 3.0;
  if (eps > 0 && eps < out.threshold) {
    const double r = std::sqrt(2.0) / 2.0 - eps;
    out.inessential_certified = 3.0 * r * r > 1.0;
  }
  return out;
}

bool leader_block_test(std::span<const double> x, double eps) {
  if (x.size() % 3 != 0) throw InputError("dimension must split into three equal blocks");
  const std::size_t block = x.size() / 3;
  const double level = std::sqrt(2.0) / 2.0 - eps;
  for (std::size_t b = 0; b < 3; ++b) {
    double sq = 0;
    for (std::size_t i = b * block; i < (b + 1) * block; ++i) sq += x[i] * x[i];
    if (std::sqrt(sq) < level) return false;
  }
  return true;
}

LeaderEmpirical leader_empirical(std::size_t dim_half, std::size_t sample_count, double eps, std::uint64_t seed) {
  const std::size_t dim = 2 * dim_half;
  if (dim_half == 0 || dim % 6 != 0) throw InputError("2 * dim_half must be a positive multiple of 6");
  if (eps < 0 || eps >= leader_certificate(eps).threshold) {
    throw InputError("eps must lie in [0, sqrt(2)/2 - sqrt(3)/3)");
  }
  LeaderEmpirical out;
  out.samples = sample_count;
  out.dimension = dim;
  std::vector<double> x(dim);
  for (std::size_t s = 0; s < sample_count; ++s) {
    auto rng = sample_stream(seed, s);
    std::normal_distribution<double> normal;
    double norm = 0;
    while (!(norm > 1e-150)) {
      norm = 0;
      for (auto& v : x) {
        v = normal(rng);
        norm += v * v;
      }
      norm = std::sqrt(norm);
    }
    for (auto& v : x) v /= norm;
    if (leader_block_test(x, eps)) ++out.violations;
  }
  return out;
}

std::uint64_t binomial(std::size_t n, std::size_t k) {
  if (k > n) return 0;
  k = std::min(k, n - k);
  std::uint64_t out = 1;
  for (std::size_t i = 1; i <= k; ++i) out = out * (n - k + i) / i;
  return out;
}

std::vector<std::vector<std::size_t>> ColoredHypergraph::subsets(std::size_t ground, std::size_t k) {
  std::vector<std::vector<std::size_t>> out;
  if (k > ground) return out;
  std::vector<std::size_t> cur(k);
  std::iota(cur.begin(), cur.end(), std::size_t{0});
  for (;;) {
    out.push_back(cur);
    std::size_t i = k;
    while (i > 0 && cur[i - 1] == ground - k + i - 1) --i;
    if (i == 0) break;
    ++cur[i - 1];
    for (std::size_t j = i; j < k; ++j) cur[j] = cur[j - 1] + 1;
  }
  return out;
}

std::vector<std::string> ColoredHypergraph::check() const {
  std::vector<std::string> out;
  if (k == 0) out.push_back("k must be positive");
  if (r == 0) out.push_back("need at least one color");
  if (colors.size() != binomial(ground, k)) out.push_back("one color per k-subset required");
  for (std::uint8_t c : colors)
    if (c >= r) {
      out.push_back("color out of range");
      break;
    }
  return out;
}

namespace {

// Index of every k-subset, addressed by its bitmask over the ground set.
class SubsetIndex {
 public:
  SubsetIndex(std::size_t ground, std::size_t k) : ground_(ground), k_(k) {
    std::size_t idx = 0;
    for (const auto& s : ColoredHypergraph::subsets(ground, k)) ranks_[mask(s)] = idx++;
  }
  std::size_t rank(std::uint64_t m) const { return ranks_.at(m); }
  static std::uint64_t mask(const std::vector<std::size_t>& s) {
    std::uint64_t m = 0;
    for (std::size_t v : s) m |= std::uint64_t{1} << v;
    return m;
  }

 private:
  std::size_t ground_, k_;
  std::unordered_map<std::uint64_t, std::size_t> ranks_;
};

// DFS over ascending l-subsets. Adding element e creates the k-subsets made
// of e and k-1 earlier elements; all must match the first color seen.
bool search_mono(const ColoredHypergraph& h, const SubsetIndex& index, std::size_t l, std::vector<std::size_t>& cur,
                 int color, std::size_t start) {
  if (cur.size() == l) return true;
  for (std::size_t e = start; e + (l - cur.size()) <= h.ground; ++e) {
    int c = color;
    bool ok = true;
    if (cur.size() + 1 >= h.k) {
      const std::size_t pick = h.k - 1;
      std::vector<std::size_t> sel(pick);
      std::iota(sel.begin(), sel.end(), std::size_t{0});
      for (;;) {
        std::uint64_t m = std::uint64_t{1} << e;
        for (std::size_t s : sel) m |= std::uint64_t{1} << cur[s];
        const int here = h.colors[index.rank(m)];
        if (c < 0) c = here;
        if (here != c) {
          ok = false;
          break;
        }
        std::size_t i = pick;
        while (i > 0 && sel[i - 1] == cur.size() - pick + i - 1) --i;
        if (i == 0) break;
        ++sel[i - 1];
        for (std::size_t j = i; j < pick; ++j) sel[j] = sel[j - 1] + 1;
      }
    }
    if (!ok) continue;
    cur.push_back(e);
    if (search_mono(h, index, l, cur, c, e + 1)) return true;
    cur.pop_back();
  }
  return false;
}

std::optional<SubsetMask> find_with_index(const ColoredHypergraph& h, const SubsetIndex& index, std::size_t l) {
  std::vector<std::size_t> cur;
  if (!search_mono(h, index, l, cur, -1, 0)) return std::nullopt;
  return SubsetMask::from_indices(h.ground, cur);
}

}  // namespace

std::optional<SubsetMask> find_monochromatic(const ColoredHypergraph& h, std::size_t l) {
  if (const auto bad = h.check(); !bad.empty()) throw InputError("invalid coloring: " + bad.front());
  if (h.ground > 63) throw InputError("ground set limited to 63 elements");
  if (l > h.ground) throw InputError("l exceeds the ground set");
  return find_with_index(h, SubsetIndex(h.ground, h.k), l);
}

RamseyResult ramsey_verify(std::size_t k, std::size_t l, std::size_t r, std::size_t n, std::uint64_t max_colorings) {
  if (k == 0 || r == 0) throw InputError("k and r must be positive");
  if (n > 63) throw InputError("ground set limited to 63 elements");
  if (l > n) throw InputError("l exceeds the ground set");
  const std::uint64_t slots = binomial(n, k);
  std::uint64_t total = 1;
  for (std::uint64_t i = 1; i < slots; ++i) {  // first slot fixed
    if (total > max_colorings / r) throw InputError("coloring count exceeds the enumeration cap");
    total *= r;
  }

  ColoredHypergraph h{n, k, r, std::vector<std::uint8_t>(slots, 0)};
  const SubsetIndex index(n, k);
  RamseyResult out;
  if (slots == 0) {
    // No k-subsets: every l-subset is vacuously monochromatic.
    out.all_colorings_contain = true;
    out.colorings_checked = 1;
    return out;
  }
  for (;;) {
    ++out.colorings_checked;
    if (!find_with_index(h, index, l)) {
      out.counterexample = h;
      return out;
    }
    // Next coloring in lexicographic order, slot 0 most significant and fixed.
    std::size_t pos = slots;
    while (pos > 1) {
      --pos;
      if (h.colors[pos] + 1u < r) {
        ++h.colors[pos];
        std::fill(h.colors.begin() + static_cast<std::ptrdiff_t>(pos) + 1, h.colors.end(), 0);
        break;
      }
      if (pos == 1) {
        out.all_colorings_contain = true;
        return out;
      }
    }
    if (slots == 1) {
      out.all_colorings_contain = true;
      return out;
    }
  }
}

}  // namespace mmlab
