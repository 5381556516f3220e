#include "mmlab/observable.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <set>

#include "mmlab/generators.hpp"

namespace mmlab {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::vector<std::string> check_breaks(const std::vector<double>& breaks, std::size_t pieces) {
  std::vector<std::string> out;
  if (breaks.size() < 2) {
    out.push_back("need at least two breakpoints");
    return out;
  }
  if (breaks.front() != 0.0) out.push_back("first breakpoint must be 0");
  if (breaks.back() != 1.0) out.push_back("last breakpoint must be 1");
  for (std::size_t k = 1; k < breaks.size(); ++k)
    if (!(breaks[k] > breaks[k - 1])) out.push_back("breakpoints not strictly ascending at " + std::to_string(k));
  if (pieces != breaks.size() - 1) out.push_back("one value per interval required");
  return out;
}

// The set of lambda satisfying the defining condition is an up-set, so the
// infimum lies in the first interval [levels[i], levels[i+1]) that contains a
// satisfying lambda; inside it the tail mass is constant.
double first_crossing(const std::vector<double>& levels, const std::vector<double>& tail) {
  for (std::size_t i = 0; i < levels.size(); ++i) {
    const double hi = i + 1 < levels.size() ? levels[i + 1] : kInf;
    if (tail[i] < hi) return std::max(levels[i], tail[i]);
  }
  return levels.back();
}

// Largest mass of values inside any closed window of width `width`.
double window_mass(const std::vector<double>& u, const std::vector<double>& m, double width) {
  double best = 0, acc = 0;
  std::size_t lo = 0;
  for (std::size_t hi = 0; hi < u.size(); ++hi) {
    acc += m[hi];
    while (u[hi] - u[lo] > width * (1 + 1e-12) + 1e-15) acc -= m[lo++];
    best = std::max(best, acc);
  }
  return best;
}

struct Cell {
  std::size_t row, col;
  double mass;
};

struct Candidate {
  Coupling joint;
  std::vector<Cell> cells;  // order defines the interval layout on [0, 1]
};

Candidate northwest_corner(std::span<const double> a, std::span<const double> b,
                           const std::vector<std::size_t>& row_order, const std::vector<std::size_t>& col_order) {
  Candidate out;
  out.joint = Coupling{a.size(), b.size(), std::vector<double>(a.size() * b.size(), 0.0)};
  std::size_t i = 0, j = 0;
  double r = a[row_order[0]], c = b[col_order[0]];
  while (i < a.size() && j < b.size()) {
    const double m = std::min(r, c);
    if (m > 0) {
      out.joint.joint[row_order[i] * b.size() + col_order[j]] += m;
      out.cells.push_back({row_order[i], col_order[j], m});
    }
    r -= m;
    c -= m;
    if (r <= 1e-15 && ++i < a.size()) r = a[row_order[i]];
    if (c <= 1e-15 && ++j < b.size()) c = b[col_order[j]];
  }
  return out;
}

Candidate product_coupling(std::span<const double> a, std::span<const double> b) {
  Candidate out;
  out.joint = Coupling{a.size(), b.size(), std::vector<double>(a.size() * b.size(), 0.0)};
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < b.size(); ++j) {
      const double m = a[i] * b[j];
      out.joint.joint[i * b.size() + j] = m;
      if (m > 0) out.cells.push_back({i, j, m});
    }
  return out;
}

// Capped distance-to-set functions and their negatives, before the anchor
// shift.
std::vector<std::vector<double>> base_functions(const FiniteMMSpace& space, std::size_t pair_limit) {
  const std::size_t n = space.size();
  const std::vector<double> d = space.metric().to_matrix();
  std::vector<std::vector<double>> raw;
  for (std::size_t s = 0; s < n; ++s) raw.emplace_back(d.begin() + static_cast<std::ptrdiff_t>(s * n),
                                                       d.begin() + static_cast<std::ptrdiff_t>((s + 1) * n));
  if (n <= pair_limit) {
    for (std::size_t a = 0; a < n; ++a)
      for (std::size_t b = a + 1; b < n; ++b) {
        std::vector<double> v(n);
        for (std::size_t x = 0; x < n; ++x) v[x] = std::min(d[a * n + x], d[b * n + x]);
        raw.push_back(std::move(v));
      }
  }
  const std::size_t positives = raw.size();
  for (std::size_t k = 0; k < positives; ++k) {
    std::vector<double> v = raw[k];
    for (auto& x : v) x = -x;
    raw.push_back(std::move(v));
  }
  for (auto& v : raw) {
    std::vector<double> capped(n, kInf);
    for (std::size_t x = 0; x < n; ++x)
      for (std::size_t y = 0; y < n; ++y) capped[x] = std::min(capped[x], v[y] + d[x * n + y]);
    v = std::move(capped);
  }
  return raw;
}

std::vector<std::vector<double>> shifted_unique(const std::vector<std::vector<double>>& base, std::size_t anchor) {
  std::vector<std::vector<double>> out;
  std::set<std::vector<double>> seen;
  for (const auto& v : base) {
    std::vector<double> s(v.size());
    for (std::size_t x = 0; x < v.size(); ++x) s[x] = v[x] - v[anchor];
    s[anchor] = 0.0;
    if (seen.insert(s).second) out.push_back(std::move(s));
  }
  return out;
}

double directed_modulo_constants(const std::vector<std::vector<double>>& from,
                                 const std::vector<std::vector<double>>& to, std::span<const double> masses,
                                 double current, double cutoff) {
  std::vector<double> diff(masses.size());
  for (const auto& a : from) {
    double nearest = kInf;
    for (const auto& b : to) {
      for (std::size_t k = 0; k < diff.size(); ++k) diff[k] = a[k] - b[k];
      nearest = std::min(nearest, me1_to_constants(diff, masses));
      if (nearest <= current) break;
    }
    current = std::max(current, nearest);
    if (current >= cutoff) return current;
  }
  return current;
}

// Hausdorff distance modulo constants between two families sampled on cells.
double cell_hausdorff(const std::vector<std::vector<double>>& a, const std::vector<std::vector<double>>& b,
                      std::span<const double> masses, double cutoff) {
  const double forward = directed_modulo_constants(a, b, masses, 0.0, cutoff);
  if (forward >= cutoff) return forward;
  return directed_modulo_constants(b, a, masses, forward, cutoff);
}

std::vector<std::vector<double>> on_cells(const std::vector<std::vector<double>>& funcs, const std::vector<Cell>& cells,
                                          bool use_rows) {
  std::vector<std::vector<double>> out;
  out.reserve(funcs.size());
  for (const auto& f : funcs) {
    std::vector<double> v(cells.size());
    for (std::size_t k = 0; k < cells.size(); ++k) v[k] = f[use_rows ? cells[k].row : cells[k].col];
    out.push_back(std::move(v));
  }
  return out;
}

Parametrization from_cells(const std::vector<Cell>& cells, bool use_rows) {
  Parametrization p;
  p.breaks.push_back(0.0);
  double acc = 0;
  for (const auto& c : cells) {
    acc += c.mass;
    p.breaks.push_back(acc);
    p.owner.push_back(use_rows ? c.row : c.col);
  }
  p.breaks.back() = 1.0;
  return p;
}

}  // namespace

std::vector<std::string> StepFunction::check() const { return check_breaks(breaks, values.size()); }

double me1_cells(std::span<const double> values, std::span<const double> masses) {
  std::vector<std::pair<double, double>> pts;
  for (std::size_t k = 0; k < values.size(); ++k)
    if (masses[k] > 0) pts.emplace_back(std::abs(values[k]), masses[k]);
  std::sort(pts.begin(), pts.end());
  std::vector<double> levels{0.0}, level_mass{0.0};
  for (const auto& [v, m] : pts) {
    if (v > levels.back()) {
      levels.push_back(v);
      level_mass.push_back(0.0);
    }
    level_mass.back() += m;
  }
  // tail[i] = mass strictly above levels[i]
  std::vector<double> tail(levels.size(), 0.0);
  for (std::size_t i = levels.size() - 1; i-- > 0;) tail[i] = tail[i + 1] + level_mass[i + 1];
  return first_crossing(levels, tail);
}

double me1(const StepFunction& h1, const StepFunction& h2) {
  if (const auto bad = h1.check(); !bad.empty()) throw InputError("invalid step function: " + bad.front());
  if (const auto bad = h2.check(); !bad.empty()) throw InputError("invalid step function: " + bad.front());
  std::vector<double> cuts;
  std::merge(h1.breaks.begin(), h1.breaks.end(), h2.breaks.begin(), h2.breaks.end(), std::back_inserter(cuts));
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
  std::vector<double> diff, mass;
  std::size_t p = 0, q = 0;
  for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
    while (h1.breaks[p + 1] <= cuts[k]) ++p;
    while (h2.breaks[q + 1] <= cuts[k]) ++q;
    diff.push_back(h1.values[p] - h2.values[q]);
    mass.push_back(cuts[k + 1] - cuts[k]);
  }
  return me1_cells(diff, mass);
}

double me1_to_constants(std::span<const double> values, std::span<const double> masses) {
  std::vector<std::pair<double, double>> pts;
  double total = 0;
  for (std::size_t k = 0; k < values.size(); ++k)
    if (masses[k] > 0) {
      pts.emplace_back(values[k], masses[k]);
      total += masses[k];
    }
  if (pts.empty()) return 0.0;
  std::sort(pts.begin(), pts.end());
  std::vector<double> u, m;
  for (const auto& [v, w] : pts) {
    if (!u.empty() && v == u.back()) {
      m.back() += w;
    } else {
      u.push_back(v);
      m.push_back(w);
    }
  }
  // tail(lambda) = total - (heaviest window of width 2 lambda) is non-increasing
  // and only steps at half-gaps between values. Bisection finds the first
  // double where tail(lambda) < lambda; the answer is then read off at the
  // half-gap opening that step, so no list of all O(m^2) gaps is built.
  auto tail = [&](double lambda) { return std::max(0.0, total - window_mass(u, m, 2 * lambda)); };
  double lo = 0, hi = std::max(1.0, total) * 2;
  for (int it = 0; it < 4096; ++it) {
    const double mid = lo + (hi - lo) / 2;
    if (mid <= lo || mid >= hi) break;
    (tail(mid) < mid ? hi : lo) = mid;
  }
  double gap = 0;
  for (std::size_t i = 0, j = 0; i < u.size(); ++i) {
    j = std::max(j, i);
    while (j + 1 < u.size() && u[j + 1] - u[i] <= 2 * hi * (1 + 1e-12) + 1e-15) ++j;
    gap = std::max(gap, (u[j] - u[i]) / 2);
  }
  return std::max(gap, tail(gap));
}

std::vector<std::string> Parametrization::check(const FiniteMMSpace& space) const {
  auto out = check_breaks(breaks, owner.size());
  if (!out.empty()) return out;
  std::vector<double> push(space.size(), 0.0);
  for (std::size_t k = 0; k < owner.size(); ++k) {
    if (owner[k] >= space.size()) {
      out.push_back("interval owner out of range at " + std::to_string(k));
      return out;
    }
    push[owner[k]] += breaks[k + 1] - breaks[k];
  }
  for (std::size_t i = 0; i < space.size(); ++i)
    if (std::abs(push[i] - space.weights()[i]) > 1e-12) out.push_back("pushforward differs at point " + std::to_string(i));
  return out;
}

Parametrization canonical_parametrization(const FiniteMMSpace& space) {
  std::vector<Cell> cells;
  for (std::size_t i = 0; i < space.size(); ++i)
    if (space.weights()[i] > 0) cells.push_back({i, 0, space.weights()[i]});
  return from_cells(cells, true);
}

StepFunction compose(std::span<const double> values, const Parametrization& param) {
  StepFunction h;
  h.breaks = param.breaks;
  for (std::size_t owner : param.owner) {
    if (owner >= values.size()) throw InputError("parametrization refers to a missing point");
    h.values.push_back(values[owner]);
  }
  return h;
}

std::vector<std::vector<double>> lipschitz_extremes(const FiniteMMSpace& space, std::size_t anchor,
                                                    std::size_t pair_limit) {
  if (anchor >= space.size()) throw InputError("anchor index out of range");
  return shifted_unique(base_functions(space, pair_limit), anchor);
}

LipschitzSet lipschitz_set(const FiniteMMSpace& space, const Parametrization& param, std::size_t anchor) {
  LipschitzSet out;
  for (const auto& v : lipschitz_extremes(space, anchor)) out.members.push_back(compose(v, param));
  return out;
}

double hausdorff_me1(const LipschitzSet& a, const LipschitzSet& b) {
  if (a.members.empty() || b.members.empty()) throw InputError("Hausdorff distance needs non-empty sets");
  auto directed = [](const LipschitzSet& from, const LipschitzSet& to) {
    double worst = 0;
    for (const auto& f : from.members) {
      double nearest = kInf;
      for (const auto& g : to.members) nearest = std::min(nearest, me1(f, g));
      worst = std::max(worst, nearest);
    }
    return worst;
  };
  return std::max(directed(a, b), directed(b, a));
}

double hausdorff_me1_modulo_constants(const LipschitzSet& a, const LipschitzSet& b) {
  if (a.members.empty() || b.members.empty()) throw InputError("Hausdorff distance needs non-empty sets");
  // Bring every member onto the common refinement of all breakpoints.
  std::vector<double> cuts;
  for (const auto* set : {&a, &b})
    for (const auto& h : set->members) {
      if (const auto bad = h.check(); !bad.empty()) throw InputError("invalid step function: " + bad.front());
      cuts.insert(cuts.end(), h.breaks.begin(), h.breaks.end());
    }
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
  std::vector<double> masses;
  for (std::size_t k = 0; k + 1 < cuts.size(); ++k) masses.push_back(cuts[k + 1] - cuts[k]);
  auto sample = [&](const LipschitzSet& set) {
    std::vector<std::vector<double>> out;
    for (const auto& h : set.members) {
      std::vector<double> v;
      std::size_t p = 0;
      for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
        while (h.breaks[p + 1] <= cuts[k]) ++p;
        v.push_back(h.values[p]);
      }
      out.push_back(std::move(v));
    }
    return out;
  };
  return cell_hausdorff(sample(a), sample(b), masses, kInf);
}

ObsDistanceResult obs_distance(const FiniteMMSpace& x, const FiniteMMSpace& y, const SearchConfig& cfg) {
  const auto& wx = x.weights();
  const auto& wy = y.weights();
  const std::size_t nx = x.size(), ny = y.size();
  // Anchoring only shifts members by constants, which the comparison
  // quotients out, so the families are built once.
  const auto fx = shifted_unique(base_functions(x, 12), 0);
  const auto fy = shifted_unique(base_functions(y, 12), 0);

  std::vector<std::size_t> rows(nx), cols(ny);
  std::iota(rows.begin(), rows.end(), std::size_t{0});
  std::iota(cols.begin(), cols.end(), std::size_t{0});
  std::vector<std::size_t> best_rows = rows, best_cols = cols;

  const bool exhaustive = nx * ny <= 36;
  std::vector<std::size_t> perm_rows = rows, perm_cols = cols;
  bool perms_left = true;

  ObsDistanceResult result;
  result.upper = kInf;
  std::vector<std::vector<double>> seen;

  for (std::size_t k = 0; k < std::max<std::size_t>(cfg.budget, 1); ++k) {
    Candidate cand;
    std::vector<std::size_t> cand_rows, cand_cols;
    if (k == 0) {
      cand_rows = rows;
      cand_cols = cols;
      cand = northwest_corner(wx, wy, cand_rows, cand_cols);
    } else if (k == 1) {
      cand = product_coupling(wx, wy);
    } else if (exhaustive) {
      if (!perms_left) break;
      cand_rows = perm_rows;
      cand_cols = perm_cols;
      cand = northwest_corner(wx, wy, cand_rows, cand_cols);
      if (!std::next_permutation(perm_cols.begin(), perm_cols.end())) {
        perms_left = std::next_permutation(perm_rows.begin(), perm_rows.end());
      }
    } else {
      auto rng = sample_stream(cfg.seed, k);
      cand_rows = best_rows;
      cand_cols = best_cols;
      if (k % 2 == 0) {
        std::shuffle(cand_rows.begin(), cand_rows.end(), rng);
        std::shuffle(cand_cols.begin(), cand_cols.end(), rng);
      } else {
        auto& side = (rng() % 2 == 0 && nx > 1) || ny < 2 ? cand_rows : cand_cols;
        if (side.size() > 1) {
          std::uniform_int_distribution<std::size_t> pick(0, side.size() - 1);
          std::swap(side[pick(rng)], side[pick(rng)]);
        }
      }
      cand = northwest_corner(wx, wy, cand_rows, cand_cols);
    }

    if (std::find(seen.begin(), seen.end(), cand.joint.joint) != seen.end()) continue;
    seen.push_back(cand.joint.joint);
    ++result.candidates;

    std::vector<double> masses;
    for (const auto& c : cand.cells) masses.push_back(c.mass);
    const double value = cell_hausdorff(on_cells(fx, cand.cells, true), on_cells(fy, cand.cells, false), masses,
                                        result.upper);
    if (value < result.upper) {
      result.upper = value;
      result.coupling = cand.joint;
      result.param_x = from_cells(cand.cells, true);
      result.param_y = from_cells(cand.cells, false);
      result.anchor_x = cand.cells.front().row;
      result.anchor_y = cand.cells.front().col;
      if (!cand_rows.empty()) {
        best_rows = cand_rows;
        best_cols = cand_cols;
      }
    }
  }
  return result;
}

LevyConvergence levy_convergence_test(std::span<const FiniteMMSpace> spaces, const SearchConfig& cfg, double slack) {
  LevyConvergence out;
  out.slack = slack;
  const FiniteMMSpace target = point_space();
  for (const auto& s : spaces) out.dists.push_back(obs_distance(s, target, cfg).upper);
  if (out.dists.size() >= 2) {
    bool trend = out.dists.back() < out.dists.front();
    for (std::size_t k = 1; k < out.dists.size(); ++k)
      if (out.dists[k] > out.dists[k - 1] + slack) trend = false;
    out.decreasing_trend = trend;
  }
  return out;
}

}  // namespace mmlab
