#include "mmlab/core.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <sstream>

#include "kdtree.hpp"
#include "parallel.hpp"

namespace mmlab {

namespace {

double operator_norm_distance(const CloudMetric& c, std::size_t i, std::size_t j) {
  const auto m = static_cast<Eigen::Index>(std::llround(std::sqrt(static_cast<double>(c.dim))));
  using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  Eigen::Map<const RowMat> a(c.coords.data() + i * c.dim, m, m);
  Eigen::Map<const RowMat> b(c.coords.data() + j * c.dim, m, m);
  const Eigen::MatrixXd diff = a - b;
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(diff);
  return svd.singularValues()(0);
}

double cloud_distance(const CloudMetric& c, std::size_t i, std::size_t j) {
  const double* x = c.coords.data() + i * c.dim;
  const double* y = c.coords.data() + j * c.dim;
  switch (c.kind) {
    case CloudKind::Euclidean: {
      double s = 0;
      for (std::size_t d = 0; d < c.dim; ++d) s += (x[d] - y[d]) * (x[d] - y[d]);
      return std::sqrt(s);
    }
    case CloudKind::Geodesic: {
      // 2 atan2(|x - y|, |x + y|) is accurate at both small and large angles.
      double minus = 0, plus = 0;
      for (std::size_t d = 0; d < c.dim; ++d) {
        minus += (x[d] - y[d]) * (x[d] - y[d]);
        plus += (x[d] + y[d]) * (x[d] + y[d]);
      }
      return 2.0 * std::atan2(std::sqrt(minus), std::sqrt(plus));
    }
    case CloudKind::OperatorNorm:
      return operator_norm_distance(c, i, j);
  }
  return 0;
}

std::size_t infer_size(const Metric::Repr& r) {
  return std::visit(
      [](const auto& m) -> std::size_t {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, DenseMetric>) {
          return m.n;
        } else if constexpr (std::is_same_v<T, WordMetric>) {
          return m.length == 0 ? 0 : m.letters.size() / m.length;
        } else {
          return m.dim == 0 ? 0 : m.coords.size() / m.dim;
        }
      },
      r);
}

}  // namespace

Metric Metric::dense(std::size_t n, std::vector<double> data) {
  if (data.size() != n * n) throw InputError("distance matrix must be n x n");
  return Metric(DenseMetric{n, std::move(data)}, n);
}

Metric Metric::words(std::size_t length, std::vector<std::uint8_t> letters) {
  if (length == 0) throw InputError("word length must be positive");
  if (letters.size() % length != 0) throw InputError("letter count is not a multiple of word length");
  Repr r = WordMetric{length, std::move(letters)};
  const std::size_t n = infer_size(r);
  return Metric(std::move(r), n);
}

Metric Metric::cloud(CloudKind kind, std::size_t dim, std::vector<double> coords) {
  if (dim == 0) throw InputError("point dimension must be positive");
  if (coords.size() % dim != 0) throw InputError("coordinate count is not a multiple of dimension");
  if (kind == CloudKind::OperatorNorm) {
    const auto m = static_cast<std::size_t>(std::llround(std::sqrt(static_cast<double>(dim))));
    if (m * m != dim) throw InputError("operator-norm points must be square matrices");
  }
  Repr r = CloudMetric{kind, dim, std::move(coords)};
  const std::size_t n = infer_size(r);
  return Metric(std::move(r), n);
}

double Metric::operator()(std::size_t i, std::size_t j) const {
  if (const auto* d = std::get_if<DenseMetric>(&repr_)) return d->data[i * d->n + j];
  if (const auto* w = std::get_if<WordMetric>(&repr_)) {
    const std::uint8_t* a = w->letters.data() + i * w->length;
    const std::uint8_t* b = w->letters.data() + j * w->length;
    std::size_t diff = 0;
    for (std::size_t k = 0; k < w->length; ++k) diff += a[k] != b[k];
    return static_cast<double>(diff) / static_cast<double>(w->length);
  }
  return cloud_distance(std::get<CloudMetric>(repr_), i, j);
}

std::vector<double> Metric::to_matrix() const {
  if (const auto* d = std::get_if<DenseMetric>(&repr_)) return d->data;
  std::vector<double> out(n_ * n_, 0.0);
  for (std::size_t i = 0; i < n_; ++i) {
    for (std::size_t j = i + 1; j < n_; ++j) {
      out[i * n_ + j] = out[j * n_ + i] = (*this)(i, j);
    }
  }
  return out;
}

FiniteMMSpace::FiniteMMSpace(std::vector<std::string> labels, Metric metric,
                             std::vector<double> weights)
    : labels_(std::move(labels)), metric_(std::move(metric)), weights_(std::move(weights)) {
  if (weights_.empty()) throw InputError("space must have at least one point");
  if (labels_.size() != weights_.size() || metric_.size() != weights_.size()) {
    std::ostringstream os;
    os << "size mismatch: " << labels_.size() << " labels, " << metric_.size()
       << " metric points, " << weights_.size() << " weights";
    throw InputError(os.str());
  }
  const double total = std::accumulate(weights_.begin(), weights_.end(), 0.0);
  const double gap = std::abs(total - 1.0);
  if (gap > 1e-12 && gap <= 1e-9) {
    for (auto& w : weights_) w /= total;
    std::ostringstream os;
    os.precision(17);
    os << "weights summed to " << total << " and were renormalized";
    warning_ = os.str();
  }
}

FiniteMMSpace FiniteMMSpace::with_weights(std::vector<double> weights) const {
  return FiniteMMSpace(labels_, metric_, std::move(weights));
}

FiniteMMSpace point_space() { return FiniteMMSpace({"*"}, Metric::dense(1, {0.0}), {1.0}); }

SubsetMask SubsetMask::from_indices(std::size_t n, std::span<const std::size_t> indices) {
  SubsetMask m(n);
  for (std::size_t i : indices) {
    if (i >= n) throw InputError("subset index " + std::to_string(i) + " out of range");
    m.set(i);
  }
  return m;
}

std::size_t SubsetMask::count() const {
  return static_cast<std::size_t>(std::count(bits_.begin(), bits_.end(), std::uint8_t{1}));
}

std::vector<std::size_t> SubsetMask::indices() const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < bits_.size(); ++i)
    if (bits_[i]) out.push_back(i);
  return out;
}

SubsetMask SubsetMask::complement() const {
  SubsetMask out(size());
  for (std::size_t i = 0; i < size(); ++i) out.set(i, !test(i));
  return out;
}

bool SubsetMask::is_subset_of(const SubsetMask& other) const {
  for (std::size_t i = 0; i < size(); ++i)
    if (test(i) && !other.test(i)) return false;
  return true;
}

std::string to_string(CurveKind kind) {
  switch (kind) {
    case CurveKind::Exact: return "exact";
    case CurveKind::LowerBoundSearch: return "lower_bound_search";
    case CurveKind::AnalyticCap: return "analytic_cap";
  }
  return "exact";
}

CurveKind curve_kind_from_string(const std::string& s) {
  if (s == "exact") return CurveKind::Exact;
  if (s == "lower_bound_search") return CurveKind::LowerBoundSearch;
  if (s == "analytic_cap") return CurveKind::AnalyticCap;
  throw InputError("unknown curve kind '" + s + "'");
}

std::vector<std::string> ConcentrationCurve::check() const {
  std::vector<std::string> out;
  if (eps.size() != alpha.size()) out.push_back("eps and alpha lengths differ");
  const std::size_t n = std::min(eps.size(), alpha.size());
  for (std::size_t i = 0; i < n; ++i) {
    if (!(eps[i] > 0)) out.push_back("eps must be positive at index " + std::to_string(i));
    if (i > 0 && !(eps[i] > eps[i - 1])) out.push_back("eps not ascending at index " + std::to_string(i));
    if (!(alpha[i] >= 0 && alpha[i] <= 0.5)) out.push_back("alpha outside [0, 1/2] at index " + std::to_string(i));
    if (i > 0 && alpha[i] > alpha[i - 1] + 1e-12) out.push_back("alpha increases at index " + std::to_string(i));
  }
  return out;
}

std::vector<std::string> validate_space(const FiniteMMSpace& space) {
  constexpr std::size_t kMaxReports = 100;
  std::vector<std::string> out;
  auto report = [&](std::string msg) {
    if (out.size() < kMaxReports) out.push_back(std::move(msg));
  };
  auto pair = [](std::size_t i, std::size_t j) {
    return "(" + std::to_string(i) + "," + std::to_string(j) + ")";
  };

  const std::size_t n = space.size();
  double total = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double w = space.weights()[i];
    if (!std::isfinite(w) || w < 0) report("negative or non-finite weight at " + std::to_string(i));
    total += w;
  }
  if (std::abs(total - 1.0) > 1e-12) {
    std::ostringstream os;
    os.precision(17);
    os << "weights sum to " << total << ", not 1";
    report(os.str());
  }

  const auto& repr = space.metric().repr();
  if (const auto* d = std::get_if<DenseMetric>(&repr)) {
    const auto at = [&](std::size_t i, std::size_t j) { return d->data[i * n + j]; };
    for (std::size_t i = 0; i < n; ++i) {
      if (at(i, i) != 0.0) report("nonzero diagonal at " + pair(i, i));
      for (std::size_t j = 0; j < n; ++j) {
        if (!std::isfinite(at(i, j)) || at(i, j) < 0) report("negative or non-finite distance at " + pair(i, j));
      }
      for (std::size_t j = i + 1; j < n; ++j) {
        if (at(i, j) != at(j, i)) report("symmetry violated at " + pair(i, j));
      }
    }
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t k = i + 1; k < n; ++k) {
        for (std::size_t j = 0; j < n; ++j) {
          if (j == i || j == k) continue;
          const double via = at(i, j) + at(j, k);
          if (at(i, k) > via + 1e-12 * std::max(1.0, via)) {
            report("triangle inequality violated at (" + std::to_string(i) + "," + std::to_string(j) +
                   "," + std::to_string(k) + ")");
          }
        }
      }
    }
  } else if (const auto* c = std::get_if<CloudMetric>(&repr)) {
    // Distances are induced by a norm, so only the coordinates need checking.
    for (std::size_t i = 0; i < n; ++i) {
      double sq = 0;
      bool finite = true;
      for (std::size_t k = 0; k < c->dim; ++k) {
        const double v = c->coords[i * c->dim + k];
        finite = finite && std::isfinite(v);
        sq += v * v;
      }
      if (!finite) report("non-finite coordinate at point " + std::to_string(i));
      if (c->kind == CloudKind::Geodesic && std::abs(std::sqrt(sq) - 1.0) > 1e-9) {
        report("geodesic point " + std::to_string(i) + " is not a unit vector");
      }
    }
  }
  if (out.size() == kMaxReports) out.push_back("further violations suppressed");
  return out;
}

namespace {

bool use_tree(const FiniteMMSpace& space, std::size_t members) {
  const auto* c = std::get_if<CloudMetric>(&space.metric().repr());
  return c != nullptr && c->kind != CloudKind::OperatorNorm && space.size() > 256 && members > 16;
}

SubsetMask tree_neighborhood(const FiniteMMSpace& space, const SubsetMask& set, double eps) {
  const auto& c = std::get<CloudMetric>(space.metric().repr());
  const std::size_t n = space.size();
  SubsetMask out = set;
  double radius = eps + kDistanceSlack;
  if (c.kind == CloudKind::Geodesic) {
    if (eps >= std::numbers::pi) return SubsetMask(n, true);
    radius = 2.0 * std::sin(std::min(eps, std::numbers::pi) / 2.0);
  }
  radius = radius * (1 + 1e-9) + 1e-12;
  detail::KdTree tree(c.coords, c.dim, set.indices());
  for (std::size_t x = 0; x < n; ++x) {
    if (out.test(x)) continue;
    std::span<const double> q(c.coords.data() + x * c.dim, c.dim);
    const bool hit = tree.any_within(q, radius, [&](std::size_t a) {
      return space.dist(x, a) <= eps + kDistanceSlack;
    });
    if (hit) out.set(x);
  }
  return out;
}

}  // namespace

SubsetMask neighborhood(const FiniteMMSpace& space, const SubsetMask& set, double eps) {
  if (set.size() != space.size()) throw InputError("subset length does not match the space");
  const auto members = set.indices();
  if (members.empty()) throw InputError("empty set has no neighborhood");
  if (eps < 0) throw InputError("eps must be non-negative");
  if (use_tree(space, members.size())) return tree_neighborhood(space, set, eps);
  SubsetMask out = set;
  for (std::size_t x = 0; x < space.size(); ++x) {
    if (out.test(x)) continue;
    for (std::size_t a : members) {
      if (space.dist(x, a) <= eps + kDistanceSlack) {
        out.set(x);
        break;
      }
    }
  }
  return out;
}

double measure(const FiniteMMSpace& space, const SubsetMask& set) {
  if (set.size() != space.size()) throw InputError("subset length does not match the space");
  double total = 0;
  for (std::size_t i = 0; i < set.size(); ++i)
    if (set.test(i)) total += space.weights()[i];
  return std::clamp(total, 0.0, 1.0);
}

double diameter(const FiniteMMSpace& space) {
  double best = 0;
  for (std::size_t i = 0; i < space.size(); ++i)
    for (std::size_t j = i + 1; j < space.size(); ++j) best = std::max(best, space.dist(i, j));
  return best;
}

double alpha_exact(const FiniteMMSpace& space, double eps, const ExactOptions& opts) {
  const std::size_t n = space.size();
  if (n > opts.max_points || n > 30) {
    throw InputError("instance too large for exact enumeration; use alpha_lower_bound");
  }
  if (eps < 0) throw InputError("eps must be non-negative");
  if (eps == 0) return 0.5;

  std::vector<std::uint32_t> ball(n, 0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      if (space.dist(i, j) <= eps + kDistanceSlack) ball[i] |= std::uint32_t{1} << j;

  // Subsets are split into low and high halves so that every union of balls
  // and every measure is a combination of two small lookup tables.
  const std::size_t lo_bits = n / 2;
  const std::size_t hi_bits = n - lo_bits;
  const std::uint32_t lo_mask = (std::uint32_t{1} << lo_bits) - 1;
  auto tables = [&](std::size_t offset, std::size_t bits) {
    const std::size_t size = std::size_t{1} << bits;
    std::vector<std::uint32_t> nb(size, 0);
    std::vector<double> mass(size, 0.0);
    for (std::size_t s = 1; s < size; ++s) {
      const auto low = static_cast<std::size_t>(std::countr_zero(s));
      const std::size_t rest = s & (s - 1);
      nb[s] = nb[rest] | ball[offset + low];
      mass[s] = mass[rest] + space.weights()[offset + low];
    }
    return std::pair{nb, mass};
  };
  const auto [nb_lo, mass_lo] = tables(0, lo_bits);
  const auto [nb_hi, mass_hi] = tables(lo_bits, hi_bits);
  const auto mass_of = [&](std::uint32_t m) { return mass_lo[m & lo_mask] + mass_hi[m >> lo_bits]; };

  // The outside mass is summed directly rather than taken as 1 - inside, so a
  // neighborhood covering every point gives exactly 0.
  const std::uint32_t full = n == 32 ? ~std::uint32_t{0} : (std::uint32_t{1} << n) - 1;
  std::vector<double> best(nb_hi.size(), 0.0);
  detail::parallel_for(nb_hi.size(), opts.threads, [&](std::size_t h) {
    double local = 0;
    for (std::size_t l = 0; l < nb_lo.size(); ++l) {
      if (mass_hi[h] + mass_lo[l] < 0.5 - kHalfMassSlack) continue;
      local = std::max(local, mass_of(full & ~(nb_hi[h] | nb_lo[l])));
    }
    best[h] = local;
  });
  return std::clamp(*std::max_element(best.begin(), best.end()), 0.0, 0.5);
}

ConcentrationCurve exact_curve(const FiniteMMSpace& space, std::span<const double> eps_grid,
                               const ExactOptions& opts) {
  ConcentrationCurve curve;
  curve.kind = CurveKind::Exact;
  for (double e : eps_grid) {
    curve.eps.push_back(e);
    curve.alpha.push_back(alpha_exact(space, e, opts));
  }
  return curve;
}

}  // namespace mmlab
