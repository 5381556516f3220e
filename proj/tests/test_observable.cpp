#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "mmlab/generators.hpp"
#include "mmlab/observable.hpp"
#include "oracles.hpp"

using namespace mmlab;

namespace {

// inf{lambda : Leb{|h| > lambda} < lambda} by bisection on the monotone
// predicate, with |h| given as values on cells.
double ky_fan_bisect(const std::vector<double>& v, const std::vector<double>& m) {
  auto ok = [&](double lambda) {
    double tail = 0;
    for (std::size_t i = 0; i < v.size(); ++i)
      if (std::abs(v[i]) > lambda) tail += m[i];
    return tail < lambda;
  };
  double lo = 0, hi = 1.0 + 1e-9;
  for (int it = 0; it < 200; ++it) {
    const double mid = (lo + hi) / 2;
    (ok(mid) ? hi : lo) = mid;
  }
  return hi;
}

StepFunction random_step(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0, 1);
  std::uniform_real_distribution<double> val(-1.5, 1.5);
  std::vector<double> cuts{0.0, 1.0};
  const int k = 1 + static_cast<int>(rng() % 5);
  for (int i = 0; i < k; ++i) cuts.push_back(u(rng));
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
  StepFunction h{cuts, {}};
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) h.values.push_back(val(rng));
  return h;
}

// h1 - h2 on the common refinement, as (values, masses).
std::pair<std::vector<double>, std::vector<double>> difference(const StepFunction& a, const StepFunction& b) {
  std::vector<double> cuts = a.breaks;
  cuts.insert(cuts.end(), b.breaks.begin(), b.breaks.end());
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
  auto at = [](const StepFunction& h, double x) {
    std::size_t p = 0;
    while (p + 2 < h.breaks.size() && h.breaks[p + 1] <= x) ++p;
    return h.values[p];
  };
  std::vector<double> v, m;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    v.push_back(at(a, cuts[i]) - at(b, cuts[i]));
    m.push_back(cuts[i + 1] - cuts[i]);
  }
  return {v, m};
}

bool is_one_lipschitz(const FiniteMMSpace& s, const std::vector<double>& f) {
  for (std::size_t i = 0; i < s.size(); ++i)
    for (std::size_t j = 0; j < s.size(); ++j)
      if (std::abs(f[i] - f[j]) > s.dist(i, j) + 1e-12) return false;
  return true;
}

}  // namespace

TEST_CASE("me1 examples") {
  const auto zero = StepFunction::constant(0);
  CHECK(me1(zero, zero) == 0);
  for (double c : {0.1, 0.37, 0.9, 1.0}) CHECK(me1(zero, StepFunction::constant(c)) == doctest::Approx(c));
  for (double c : {1.2, 7.0}) CHECK(me1(zero, StepFunction::constant(c)) == 1.0);
  const StepFunction bump{{0, 0.3, 1}, {0.5, 0}};
  CHECK(me1(zero, bump) == doctest::Approx(0.3));
  CHECK(me1(bump, zero) == doctest::Approx(0.3));
}

TEST_CASE("me1 matches a bisection oracle") {
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 300; ++trial) {
    const auto a = random_step(rng), b = random_step(rng);
    const auto [v, m] = difference(a, b);
    CHECK(me1(a, b) == doctest::Approx(ky_fan_bisect(v, m)).epsilon(1e-9));
    CHECK(me1_cells(v, m) == doctest::Approx(ky_fan_bisect(v, m)).epsilon(1e-9));
  }
}

TEST_CASE("me1 is a metric bounded by one") {
  std::mt19937_64 rng(18);
  for (int trial = 0; trial < 300; ++trial) {
    const auto a = random_step(rng), b = random_step(rng), c = random_step(rng);
    CHECK(me1(a, a) == 0);
    CHECK(std::abs(me1(a, b) - me1(b, a)) <= 1e-9);
    CHECK(me1(a, c) <= me1(a, b) + me1(b, c) + 1e-9);
    CHECK(me1(a, b) <= 1.0);
  }
}

TEST_CASE("me1 to constants is the best constant shift") {
  std::mt19937_64 rng(19);
  std::uniform_real_distribution<double> u(-1, 1);
  for (int trial = 0; trial < 100; ++trial) {
    const auto h = random_step(rng);
    std::vector<double> m;
    for (std::size_t i = 0; i + 1 < h.breaks.size(); ++i) m.push_back(h.breaks[i + 1] - h.breaks[i]);
    const double best = me1_to_constants(h.values, m);
    // no constant on a fine grid does better
    double grid_best = 1.0;
    for (double c = -2; c <= 2; c += 0.001) {
      std::vector<double> shifted = h.values;
      for (auto& x : shifted) x -= c;
      grid_best = std::min(grid_best, ky_fan_bisect(shifted, m));
    }
    CHECK(best <= grid_best + 1e-9);
    CHECK(best >= grid_best - 0.0011);
  }
}

TEST_CASE("step function validation") {
  CHECK(StepFunction::constant(1).check().empty());
  CHECK_FALSE(StepFunction{{0, 0.5, 0.4, 1}, {1, 2, 3}}.check().empty());
  CHECK_FALSE(StepFunction{{0, 1}, {1, 2}}.check().empty());
  CHECK_FALSE(StepFunction{{0.1, 1}, {1}}.check().empty());
}

TEST_CASE("lipschitz extremes") {
  CHECK(lipschitz_extremes(point_space(), 0) == std::vector<std::vector<double>>{{0.0}});

  const auto two = oracle::dense_space({{0, 1}, {1, 0}});
  auto fam = lipschitz_extremes(two, 0);
  std::sort(fam.begin(), fam.end());
  CHECK(fam == std::vector<std::vector<double>>{{0, -1}, {0, 0}, {0, 1}});

  const auto cube = hamming_cube(3);
  const auto f = lipschitz_extremes(cube, 5);
  std::vector<double> to_anchor(8);
  for (std::size_t x = 0; x < 8; ++x) to_anchor[x] = cube.dist(x, 5);
  CHECK(std::find(f.begin(), f.end(), to_anchor) != f.end());
}

TEST_CASE("lipschitz extremes are anchored and 1-Lipschitz") {
  std::mt19937_64 rng(23);
  for (int trial = 0; trial < 50; ++trial) {
    const auto s = oracle::random_space(rng, 1 + trial % 14, trial % 2 == 0);
    const std::size_t anchor = static_cast<std::size_t>(trial) % s.size();
    for (const auto& f : lipschitz_extremes(s, anchor)) {
      CHECK(f[anchor] == 0);
      CHECK(is_one_lipschitz(s, f));
    }
  }
}

TEST_CASE("parametrizations push Lebesgue measure to the weights") {
  const auto s = oracle::dense_space({{0, 1, 2}, {1, 0, 1}, {2, 1, 0}}, {0.2, 0.5, 0.3});
  const auto p = canonical_parametrization(s);
  CHECK(p.check(s).empty());
  const Parametrization wrong{{0, 0.5, 0.7, 1}, {0, 1, 2}};
  CHECK_FALSE(wrong.check(s).empty());
  const auto h = compose(std::vector<double>{3, 4, 5}, p);
  CHECK(h.values == std::vector<double>{3, 4, 5});
  CHECK(h.breaks[1] == doctest::Approx(0.2));
}

TEST_CASE("hausdorff distance in me1") {
  const LipschitzSet zero{{StepFunction::constant(0)}};
  const LipschitzSet both{{StepFunction::constant(0), StepFunction::constant(0.5)}};
  CHECK(hausdorff_me1(zero, zero) == 0);
  CHECK(hausdorff_me1(zero, both) == doctest::Approx(0.5));
  CHECK(hausdorff_me1(both, zero) == doctest::Approx(0.5));
  // Modulo constants the shifted member collapses onto zero.
  CHECK(hausdorff_me1_modulo_constants(zero, both) == 0);
  CHECK_THROWS_AS(hausdorff_me1(zero, LipschitzSet{}), InputError);

  std::mt19937_64 rng(29);
  for (int trial = 0; trial < 30; ++trial) {
    LipschitzSet a, b;
    for (int i = 0; i < 3; ++i) a.members.push_back(random_step(rng));
    for (int i = 0; i < 4; ++i) b.members.push_back(random_step(rng));
    CHECK(hausdorff_me1(a, b) == doctest::Approx(hausdorff_me1(b, a)));
    CHECK(hausdorff_me1_modulo_constants(a, b) <= hausdorff_me1(a, b) + 1e-12);
  }
}

TEST_CASE("observable distance examples") {
  CHECK(obs_distance(point_space(), point_space()).upper == 0);
  const auto cube2 = hamming_cube(2);
  const auto r = obs_distance(cube2, point_space());
  CHECK(r.upper <= 0.5);
  CHECK(r.upper > 0);
  CHECK(r.param_x.check(cube2).empty());
  CHECK(r.param_y.check(point_space()).empty());

  // Against the point, the distance is the worst member's distance to the
  // constants: anchored distance functions on the two-cube take values
  // 0, 1/2, 1 with masses 1/4, 1/2, 1/4.
  CHECK(r.upper == doctest::Approx(0.25));
}

TEST_CASE("observable distance from a space to itself is zero") {
  std::mt19937_64 rng(37);
  for (int trial = 0; trial < 20; ++trial) {
    const auto s = oracle::random_space(rng, 1 + trial % 8, trial % 2 == 0, trial % 3 == 0);
    CHECK(obs_distance(s, s).upper == doctest::Approx(0).epsilon(1e-12));
  }
  for (const auto& s : {hamming_cube(3), symmetric_group(3), sl2_word_metric(2).to_space()})
    CHECK(obs_distance(s, s).upper == doctest::Approx(0).epsilon(1e-12));
}

TEST_CASE("larger budgets never raise the estimate") {
  std::mt19937_64 rng(41);
  for (int trial = 0; trial < 10; ++trial) {
    const auto x = oracle::random_space(rng, 3 + trial % 6);
    const auto y = oracle::random_space(rng, 4 + trial % 5);
    SearchConfig cfg;
    cfg.seed = static_cast<std::uint64_t>(trial);
    double prev = 2.0;
    for (std::size_t budget : {1u, 2u, 4u, 8u, 16u, 64u, 128u}) {
      cfg.budget = budget;
      const double u = obs_distance(x, y, cfg).upper;
      CHECK(u <= prev + 1e-15);
      prev = u;
    }
  }
}

TEST_CASE("observable distance is deterministic per seed") {
  std::mt19937_64 rng(43);
  const auto x = oracle::random_space(rng, 9);
  const auto y = oracle::random_space(rng, 7);
  SearchConfig cfg;
  cfg.seed = 5;
  const auto a = obs_distance(x, y, cfg), b = obs_distance(x, y, cfg);
  CHECK(a.upper == b.upper);
  CHECK(a.coupling.joint == b.coupling.joint);
}

TEST_CASE("levy convergence") {
  const std::vector<FiniteMMSpace> points(3, point_space());
  const auto p = levy_convergence_test(points);
  CHECK(p.dists == std::vector<double>{0, 0, 0});

  const std::vector<FiniteMMSpace> same(3, hamming_cube(2));
  const auto f = levy_convergence_test(same);
  CHECK(f.dists[0] == f.dists[2]);
  CHECK_FALSE(f.decreasing_trend);

  std::vector<FiniteMMSpace> cubes;
  for (std::size_t n = 2; n <= 8; n += 2) cubes.push_back(hamming_cube(n));
  const auto c = levy_convergence_test(cubes);
  CHECK(c.decreasing_trend);
  CHECK(c.dists.back() < c.dists.front());
}
