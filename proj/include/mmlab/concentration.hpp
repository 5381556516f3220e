#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "mmlab/core.hpp"

namespace mmlab {

/// Knobs for the heuristic searches (set search here, coupling search in the
/// observable module). Every search is a deterministic function of the config.
struct SearchConfig {
  std::uint64_t seed = 0;
  /// Ball seeds: every point when n <= max_ball_centers, else a seeded sample.
  std::size_t max_ball_centers = 32;
  /// Sublevel sets of randomly drawn Lipschitz functions.
  std::size_t restarts = 8;
  /// Greedy swap passes, applied only to spaces with at most swap_limit points.
  std::size_t swap_passes = 2;
  std::size_t swap_limit = 256;
  /// Number of coupling candidates tried by obs_distance.
  std::size_t budget = 64;
  unsigned threads = 1;
};

struct LowerBoundResult {
  double alpha = 0;
  SubsetMask best_set;  // the half-measure set achieving alpha
};

LowerBoundResult alpha_lower_bound_search(const FiniteMMSpace& space, double eps, const SearchConfig& cfg = {});

/// 1 - mu(N(A*, eps)) for the best half-measure set A* found; never exceeds
/// the true concentration function.
double alpha_lower_bound(const FiniteMMSpace& space, double eps, const SearchConfig& cfg = {});

/// Upper bound 1 - mu{x : mu(B(x, eps)) > 1/2}. Any half-measure set meets
/// every ball of measure above one half, so those centers lie in A_eps.
double alpha_upper_surrogate(const FiniteMMSpace& space, double eps);

ConcentrationCurve lower_bound_curve(const FiniteMMSpace& space, std::span<const double> eps_grid,
                                     const SearchConfig& cfg = {});

/// Exact concentration function of the Hamming cube {0,1}^n. The first
/// 2^(n-1) vertices in simplicial order have the smallest neighborhoods of
/// all half-measure sets, so one BFS gives the exact value.
double hamming_cube_alpha(std::size_t n, double eps);

ConcentrationCurve hamming_cube_curve(std::size_t n, std::span<const double> eps_grid);

struct LipschitzFunction {
  std::vector<double> values;
  double constant = 1.0;
};

/// Empty when |f(x) - f(y)| <= constant * d(x, y) holds everywhere, up to a
/// 1e-9 relative tolerance; otherwise the offending pairs.
std::vector<std::string> check_lipschitz(const FiniteMMSpace& space, const LipschitzFunction& f);

/// Divides values and constant by the constant when it exceeds one.
LipschitzFunction rescaled(const LipschitzFunction& f);

/// Smallest attained value M with mu{f >= M} >= 1/2 and mu{f <= M} >= 1/2.
double median(const FiniteMMSpace& space, const LipschitzFunction& f);

struct TailCheck {
  double tail_mass = 0;
  double bound = 0;
  bool holds = false;
  /// False when the bound uses alpha_upper_surrogate instead of alpha_exact.
  bool exact_bound = true;
};

TailCheck tail_check(const FiniteMMSpace& space, const LipschitzFunction& f, double eps,
                     const ExactOptions& opts = {});

struct GaussianFit {
  double c1 = 0;
  double c2 = 0;
  double residual = 0;
};

/// Least squares for log alpha = log c1 - c2 * n * eps^2. Points with alpha == 0
/// are skipped.
GaussianFit gaussian_fit(std::span<const std::pair<double, ConcentrationCurve>> curves);

struct LevyTrend {
  bool is_levy_trend = false;
  std::vector<std::vector<double>> table;  // table[curve][eps]
  double threshold = 0.05;
  double slack = 0.02;
};

LevyTrend levy_check(std::span<const ConcentrationCurve> curves, std::span<const double> eps_grid,
                     double threshold = 0.05, double slack = 0.02);

/// Normalized measure of the points farther than pi/2 + eps from a great
/// hemisphere of S^dim, geodesic metric.
double sphere_cap_alpha(std::size_t dim, double eps);

}  // namespace mmlab
