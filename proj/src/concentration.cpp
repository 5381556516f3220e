#include "mmlab/concentration.hpp"

#include <algorithm>
#include <bit>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <deque>
#include <limits>
#include <numbers>
#include <numeric>
#include <random>
#include <sstream>

#include "mmlab/generators.hpp"
#include "parallel.hpp"

namespace mmlab {

namespace {

// Shortest prefix of `order` whose mass reaches one half.
SubsetMask half_prefix(const FiniteMMSpace& space, const std::vector<std::size_t>& order) {
  SubsetMask out(space.size());
  double mass = 0;
  for (std::size_t i : order) {
    out.set(i);
    mass += space.weights()[i];
    if (mass >= 0.5 - kHalfMassSlack) break;
  }
  return out;
}

std::vector<std::size_t> order_by(const std::vector<double>& key) {
  std::vector<std::size_t> order(key.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return key[a] < key[b]; });
  return order;
}

std::vector<SubsetMask> candidate_sets(const FiniteMMSpace& space, const SearchConfig& cfg) {
  const std::size_t n = space.size();
  std::vector<std::size_t> centers(n);
  std::iota(centers.begin(), centers.end(), std::size_t{0});
  if (n > cfg.max_ball_centers) {
    auto rng = sample_stream(cfg.seed, 0);
    std::shuffle(centers.begin(), centers.end(), rng);
    centers.resize(cfg.max_ball_centers);
    std::sort(centers.begin(), centers.end());
  }

  std::vector<SubsetMask> out;
  std::vector<double> key(n);
  for (std::size_t c : centers) {
    for (std::size_t x = 0; x < n; ++x) key[x] = space.dist(c, x);
    out.push_back(half_prefix(space, order_by(key)));
    for (auto& k : key) k = -k;
    out.push_back(half_prefix(space, order_by(key)));
  }

  const auto* cloud = std::get_if<CloudMetric>(&space.metric().repr());
  const bool linear = cloud != nullptr && cloud->kind != CloudKind::OperatorNorm;
  for (std::size_t r = 0; r < cfg.restarts; ++r) {
    auto rng = sample_stream(cfg.seed, 1 + r);
    if (linear) {
      // Sublevel sets of a random linear functional: half-spaces, which are
      // hemispheres on the sphere.
      std::normal_distribution<double> normal;
      std::vector<double> u(cloud->dim);
      for (auto& v : u) v = normal(rng);
      for (std::size_t x = 0; x < n; ++x) {
        double s = 0;
        for (std::size_t d = 0; d < cloud->dim; ++d) s += u[d] * cloud->coords[x * cloud->dim + d];
        key[x] = s;
      }
    } else {
      std::uniform_int_distribution<std::size_t> pick(0, n - 1);
      const std::size_t a = pick(rng), b = pick(rng);
      for (std::size_t x = 0; x < n; ++x) key[x] = space.dist(x, a) - space.dist(x, b);
    }
    out.push_back(half_prefix(space, order_by(key)));
  }
  return out;
}

// First-improvement swaps on a bitset representation of the eps-balls.
SubsetMask local_swaps(const FiniteMMSpace& space, double eps, SubsetMask set, std::size_t passes) {
  const std::size_t n = space.size();
  const std::size_t words = (n + 63) / 64;
  std::vector<std::uint64_t> balls(n * words, 0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      if (space.dist(i, j) <= eps + kDistanceSlack) balls[i * words + j / 64] |= std::uint64_t{1} << (j % 64);

  std::vector<std::uint64_t> acc(words);
  const auto& w = space.weights();
  auto nb_mass = [&](const std::vector<std::size_t>& members) {
    std::fill(acc.begin(), acc.end(), 0);
    for (std::size_t a : members)
      for (std::size_t k = 0; k < words; ++k) acc[k] |= balls[a * words + k];
    double m = 0;
    for (std::size_t k = 0; k < words; ++k) {
      for (std::uint64_t bits = acc[k]; bits != 0; bits &= bits - 1) m += w[k * 64 + static_cast<std::size_t>(std::countr_zero(bits))];
    }
    return m;
  };
  auto mass_of = [&](const std::vector<std::size_t>& members) {
    double m = 0;
    for (std::size_t a : members) m += w[a];
    return m;
  };

  std::vector<std::size_t> members = set.indices();
  double best = nb_mass(members);
  for (std::size_t pass = 0; pass < passes; ++pass) {
    bool improved = false;
    for (std::size_t slot = 0; slot < members.size(); ++slot) {
      std::vector<std::size_t> trial = members;
      trial.erase(trial.begin() + static_cast<std::ptrdiff_t>(slot));
      if (!trial.empty() && mass_of(trial) >= 0.5 - kHalfMassSlack) {
        const double m = nb_mass(trial);
        if (m < best - 1e-15) {
          members = std::move(trial);
          best = m;
          improved = true;
          --slot;
          continue;
        }
      }
      for (std::size_t b = 0; b < n; ++b) {
        if (std::find(members.begin(), members.end(), b) != members.end()) continue;
        trial = members;
        trial[slot] = b;
        if (mass_of(trial) < 0.5 - kHalfMassSlack) continue;
        const double m = nb_mass(trial);
        if (m < best - 1e-15) {
          members = std::move(trial);
          best = m;
          improved = true;
          break;
        }
      }
    }
    if (!improved) break;
  }
  return SubsetMask::from_indices(n, members);
}

}  // namespace

LowerBoundResult alpha_lower_bound_search(const FiniteMMSpace& space, double eps, const SearchConfig& cfg) {
  if (eps < 0) throw InputError("eps must be non-negative");
  if (eps == 0) return {0.5, half_prefix(space, order_by(std::vector<double>(space.size(), 0.0)))};
  const auto candidates = candidate_sets(space, cfg);
  // Outside mass summed directly, so a full cover gives exactly 0.
  const auto outside = [&](const SubsetMask& a) { return measure(space, neighborhood(space, a, eps).complement()); };
  std::vector<double> out_mass(candidates.size());
  detail::parallel_for(candidates.size(), cfg.threads, [&](std::size_t i) { out_mass[i] = outside(candidates[i]); });
  const auto best_it = std::max_element(out_mass.begin(), out_mass.end());
  SubsetMask best = candidates[static_cast<std::size_t>(best_it - out_mass.begin())];
  double best_out = *best_it;
  if (space.size() <= cfg.swap_limit && cfg.swap_passes > 0) {
    best = local_swaps(space, eps, std::move(best), cfg.swap_passes);
    best_out = std::max(best_out, outside(best));
  }
  return {std::clamp(best_out, 0.0, 0.5), std::move(best)};
}

double alpha_lower_bound(const FiniteMMSpace& space, double eps, const SearchConfig& cfg) {
  return alpha_lower_bound_search(space, eps, cfg).alpha;
}

double alpha_upper_surrogate(const FiniteMMSpace& space, double eps) {
  if (eps < 0) throw InputError("eps must be non-negative");
  if (eps == 0) return 0.5;
  const std::size_t n = space.size();
  double uncovered = 0;
  for (std::size_t x = 0; x < n; ++x) {
    double ball = 0;
    for (std::size_t y = 0; y < n; ++y)
      if (space.dist(x, y) <= eps + kDistanceSlack) ball += space.weights()[y];
    if (!(ball > 0.5 + kHalfMassSlack)) uncovered += space.weights()[x];
  }
  return std::clamp(uncovered, 0.0, 0.5);
}

ConcentrationCurve lower_bound_curve(const FiniteMMSpace& space, std::span<const double> eps_grid,
                                     const SearchConfig& cfg) {
  ConcentrationCurve curve;
  curve.kind = CurveKind::LowerBoundSearch;
  for (double e : eps_grid) {
    curve.eps.push_back(e);
    curve.alpha.push_back(alpha_lower_bound(space, e, cfg));
  }
  // alpha is non-increasing, so a lower bound at a larger eps is also one at
  // every smaller eps.
  for (std::size_t i = curve.alpha.size(); i-- > 1;) {
    curve.alpha[i - 1] = std::max(curve.alpha[i - 1], curve.alpha[i]);
  }
  return curve;
}

double hamming_cube_alpha(std::size_t n, double eps) {
  if (n == 0 || n > 24) throw InputError("hamming_cube_alpha supports 1 <= n <= 24");
  if (eps < 0) throw InputError("eps must be non-negative");
  if (eps == 0) return 0.5;
  std::size_t radius = 0;
  while (radius < n && static_cast<double>(radius + 1) / static_cast<double>(n) <= eps + kDistanceSlack) ++radius;

  const std::uint32_t count = std::uint32_t{1} << n;
  std::vector<std::uint32_t> order(count);
  std::iota(order.begin(), order.end(), 0U);
  std::sort(order.begin(), order.end(), [](std::uint32_t x, std::uint32_t y) {
    const int px = std::popcount(x), py = std::popcount(y);
    if (px != py) return px < py;
    if (x == y) return false;
    const std::uint32_t diff = x ^ y;
    return (x & (diff & (~diff + 1))) != 0;
  });

  std::vector<std::int32_t> dist(count, -1);
  std::deque<std::uint32_t> queue;
  for (std::uint32_t k = 0; k < count / 2; ++k) {
    dist[order[k]] = 0;
    queue.push_back(order[k]);
  }
  std::size_t reached = queue.size();
  while (!queue.empty()) {
    const std::uint32_t v = queue.front();
    queue.pop_front();
    if (static_cast<std::size_t>(dist[v]) == radius) continue;
    for (std::size_t b = 0; b < n; ++b) {
      const std::uint32_t u = v ^ (std::uint32_t{1} << b);
      if (dist[u] < 0) {
        dist[u] = dist[v] + 1;
        ++reached;
        queue.push_back(u);
      }
    }
  }
  return std::clamp(1.0 - static_cast<double>(reached) / static_cast<double>(count), 0.0, 0.5);
}

ConcentrationCurve hamming_cube_curve(std::size_t n, std::span<const double> eps_grid) {
  ConcentrationCurve curve;
  curve.kind = CurveKind::Exact;
  for (double e : eps_grid) {
    curve.eps.push_back(e);
    curve.alpha.push_back(hamming_cube_alpha(n, e));
  }
  return curve;
}

std::vector<std::string> check_lipschitz(const FiniteMMSpace& space, const LipschitzFunction& f) {
  std::vector<std::string> out;
  if (f.values.size() != space.size()) {
    out.push_back("function has " + std::to_string(f.values.size()) + " values for " +
                  std::to_string(space.size()) + " points");
    return out;
  }
  if (!(f.constant > 0)) out.push_back("Lipschitz constant must be positive");
  for (std::size_t i = 0; i < space.size() && out.size() < 10; ++i) {
    for (std::size_t j = i + 1; j < space.size() && out.size() < 10; ++j) {
      const double allowed = f.constant * space.dist(i, j);
      if (std::abs(f.values[i] - f.values[j]) > allowed * (1 + 1e-9) + 1e-15) {
        out.push_back("Lipschitz bound violated at (" + std::to_string(i) + "," + std::to_string(j) + ")");
      }
    }
  }
  return out;
}

LipschitzFunction rescaled(const LipschitzFunction& f) {
  if (f.constant <= 1.0) return f;
  LipschitzFunction out = f;
  for (auto& v : out.values) v /= f.constant;
  out.constant = 1.0;
  return out;
}

double median(const FiniteMMSpace& space, const LipschitzFunction& f) {
  if (f.values.size() != space.size()) throw InputError("function length does not match the space");
  const auto order = order_by(f.values);
  const auto& w = space.weights();
  // below = mu{f < v}, so mu{f >= v} = 1 - below and mu{f <= v} = below + mu{f = v}.
  double below = 0;
  for (std::size_t k = 0; k < order.size();) {
    const double v = f.values[order[k]];
    double level = 0;
    std::size_t j = k;
    while (j < order.size() && f.values[order[j]] == v) level += w[order[j++]];
    if (1.0 - below >= 0.5 - kHalfMassSlack && below + level >= 0.5 - kHalfMassSlack) return v;
    below += level;
    k = j;
  }
  return f.values[order.back()];
}

TailCheck tail_check(const FiniteMMSpace& space, const LipschitzFunction& f, double eps, const ExactOptions& opts) {
  if (f.constant > 1.0 + 1e-12) throw InputError("tail_check needs a 1-Lipschitz function; rescale first");
  if (const auto bad = check_lipschitz(space, f); !bad.empty()) throw InputError("function is not Lipschitz: " + bad.front());
  if (!(eps > 0)) throw InputError("eps must be positive");
  const double m = median(space, f);
  TailCheck out;
  for (std::size_t i = 0; i < space.size(); ++i)
    if (std::abs(f.values[i] - m) > eps + kDistanceSlack) out.tail_mass += space.weights()[i];
  if (space.size() <= opts.max_points) {
    out.bound = 2.0 * alpha_exact(space, eps, opts);
  } else {
    out.bound = 2.0 * alpha_upper_surrogate(space, eps);
    out.exact_bound = false;
  }
  out.holds = out.tail_mass <= out.bound + 1e-12;
  return out;
}

GaussianFit gaussian_fit(std::span<const std::pair<double, ConcentrationCurve>> curves) {
  std::vector<double> xs, ys;
  for (const auto& [n, curve] : curves) {
    for (std::size_t i = 0; i < curve.eps.size() && i < curve.alpha.size(); ++i) {
      if (curve.alpha[i] > 0) {
        xs.push_back(n * curve.eps[i] * curve.eps[i]);
        ys.push_back(std::log(curve.alpha[i]));
      }
    }
  }
  const auto count = static_cast<double>(xs.size());
  if (xs.size() < 2) throw InputError("underdetermined fit");
  const double mx = std::accumulate(xs.begin(), xs.end(), 0.0) / count;
  const double my = std::accumulate(ys.begin(), ys.end(), 0.0) / count;
  double sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
  }
  if (sxx <= 1e-300) throw InputError("underdetermined fit");
  const double slope = sxy / sxx;
  const double intercept = my - slope * mx;
  double sq = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double r = ys[i] - (intercept + slope * xs[i]);
    sq += r * r;
  }
  GaussianFit fit{std::exp(intercept), -slope, std::sqrt(sq / count)};
  if (!(fit.c2 > 0)) {
    std::ostringstream os;
    os.precision(6);
    os << "data show no Gaussian decay (fitted c2 = " << fit.c2 << ")";
    throw InputError(os.str());
  }
  return fit;
}

LevyTrend levy_check(std::span<const ConcentrationCurve> curves, std::span<const double> eps_grid, double threshold,
                     double slack) {
  LevyTrend out;
  out.threshold = threshold;
  out.slack = slack;
  for (const auto& curve : curves) {
    std::vector<double> row;
    for (double e : eps_grid) {
      const auto it = std::find_if(curve.eps.begin(), curve.eps.end(),
                                   [e](double x) { return std::abs(x - e) <= 1e-12 * std::max(1.0, std::abs(e)); });
      if (it == curve.eps.end()) throw InputError("curve does not contain eps grid value");
      row.push_back(curve.alpha[static_cast<std::size_t>(it - curve.eps.begin())]);
    }
    out.table.push_back(std::move(row));
  }
  if (out.table.empty() || eps_grid.empty()) return out;
  bool trend = true;
  for (std::size_t k = 0; k < eps_grid.size(); ++k) {
    if (!(out.table.back()[k] < threshold)) trend = false;
    for (std::size_t i = 1; i < out.table.size(); ++i)
      if (out.table[i][k] > out.table[i - 1][k] + slack) trend = false;
  }
  out.is_levy_trend = trend;
  return out;
}

double sphere_cap_alpha(std::size_t dim, double eps) {
  if (dim == 0) throw InputError("sphere dimension must be at least 1");
  if (eps < 0) throw InputError("eps must be non-negative");
  if (eps >= std::numbers::pi / 2) return 0.0;
  const double power = static_cast<double>(dim) - 1.0;
  auto density = [power](double t) { return power == 0.0 ? 1.0 : std::pow(std::sin(t), power); };
  using Quadrature = boost::math::quadrature::gauss_kronrod<double, 61>;
  const double tail = Quadrature::integrate(density, std::numbers::pi / 2 + eps, std::numbers::pi, 20, 1e-12);
  const double total = Quadrature::integrate(density, 0.0, std::numbers::pi, 20, 1e-12);
  return std::clamp(tail / total, 0.0, 0.5);
}

}  // namespace mmlab
