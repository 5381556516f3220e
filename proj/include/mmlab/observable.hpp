#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "mmlab/concentration.hpp"
#include "mmlab/core.hpp"
#include "mmlab/transport.hpp"

namespace mmlab {

/// Piecewise-constant function on [0, 1]: values[k] on [breaks[k], breaks[k+1]).
struct StepFunction {
  std::vector<double> breaks;
  std::vector<double> values;

  static StepFunction constant(double c) { return {{0.0, 1.0}, {c}}; }
  std::vector<std::string> check() const;
};

/// Ky Fan metric inf{lambda > 0 : Leb{|h1 - h2| > lambda} < lambda}, exact.
double me1(const StepFunction& h1, const StepFunction& h2);

/// me1 of a function given by its values on cells of the given masses
/// against the zero function.
double me1_cells(std::span<const double> values, std::span<const double> masses);

/// inf over constants c of me1(h, c), for h given on cells.
double me1_to_constants(std::span<const double> values, std::span<const double> masses);

/// A map [0,1] -> X: interval [breaks[k], breaks[k+1]) goes to point owner[k].
struct Parametrization {
  std::vector<double> breaks;
  std::vector<std::size_t> owner;

  /// Empty when the pushforward of Lebesgue measure matches the weights
  /// of `space` (within 1e-12).
  std::vector<std::string> check(const FiniteMMSpace& space) const;
};

/// Intervals laid out in point order with lengths equal to the weights.
Parametrization canonical_parametrization(const FiniteMMSpace& space);

StepFunction compose(std::span<const double> values, const Parametrization& param);

struct LipschitzSet {
  std::vector<StepFunction> members;
};

/// 1-Lipschitz functions vanishing at `anchor`: x -> d(x,S) - d(anchor,S) for
/// every singleton S (and every pair when n <= pair_limit), their negatives,
/// each passed through the McShane cap min_y(v(y) + d(x,y)). Duplicates are
/// removed; order is deterministic.
std::vector<std::vector<double>> lipschitz_extremes(const FiniteMMSpace& space, std::size_t anchor,
                                                    std::size_t pair_limit = 12);

LipschitzSet lipschitz_set(const FiniteMMSpace& space, const Parametrization& param, std::size_t anchor);

/// Hausdorff distance in me1 between two finite sets of step functions.
double hausdorff_me1(const LipschitzSet& a, const LipschitzSet& b);

/// Same, with each set closed under adding constants.
double hausdorff_me1_modulo_constants(const LipschitzSet& a, const LipschitzSet& b);

struct ObsDistanceResult {
  double upper = 0;
  Parametrization param_x;
  Parametrization param_y;
  std::size_t anchor_x = 0;
  std::size_t anchor_y = 0;
  Coupling coupling;
  std::size_t candidates = 0;  // couplings evaluated
};

/// Upper estimate of Gromov's observable distance between X and Y, searched
/// over parametrization pairs induced by couplings of the two weight vectors.
/// The first cfg.budget candidates of a fixed sequence are evaluated, so a
/// larger budget never reports a larger value.
ObsDistanceResult obs_distance(const FiniteMMSpace& x, const FiniteMMSpace& y, const SearchConfig& cfg = {});

struct LevyConvergence {
  std::vector<double> dists;
  bool decreasing_trend = false;
  double slack = 0.02;
};

LevyConvergence levy_convergence_test(std::span<const FiniteMMSpace> spaces, const SearchConfig& cfg = {},
                                      double slack = 0.02);

}  // namespace mmlab
