#include "mmlab/transport.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <string>

namespace mmlab {

namespace {

constexpr double kMassTol = 1e-14;
constexpr double kInf = std::numeric_limits<double>::infinity();

std::vector<std::size_t> support(std::span<const double> mu) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < mu.size(); ++i)
    if (mu[i] > 0) out.push_back(i);
  return out;
}

}  // namespace

std::vector<double> Coupling::row_sums() const {
  std::vector<double> out(rows, 0.0);
  for (std::size_t i = 0; i < rows; ++i)
    for (std::size_t j = 0; j < cols; ++j) out[i] += at(i, j);
  return out;
}

std::vector<double> Coupling::col_sums() const {
  std::vector<double> out(cols, 0.0);
  for (std::size_t i = 0; i < rows; ++i)
    for (std::size_t j = 0; j < cols; ++j) out[j] += at(i, j);
  return out;
}

void check_probability(std::span<const double> mu, std::size_t n, const char* name) {
  if (mu.size() != n) {
    throw InputError(std::string(name) + " has " + std::to_string(mu.size()) + " entries for " + std::to_string(n) +
                     " points");
  }
  double total = 0;
  for (double v : mu) {
    if (!std::isfinite(v) || v < 0) throw InputError(std::string(name) + " has a negative or non-finite entry");
    total += v;
  }
  if (std::abs(total - 1.0) > 1e-9) throw InputError(std::string(name) + " does not sum to one");
}

// Successive shortest paths with Johnson potentials. Arcs source->sink have
// unbounded capacity, so every augmentation exhausts a supply, a demand, or
// the flow on a reverse arc.
EmdResult solve_transport(std::span<const double> supply, std::span<const double> demand,
                          std::span<const double> cost) {
  const std::size_t full_rows = supply.size(), full_cols = demand.size();
  if (cost.size() != full_rows * full_cols) throw InputError("cost matrix has the wrong shape");
  const auto row_idx = support(supply);
  const auto col_idx = support(demand);
  const std::size_t R = row_idx.size(), C = col_idx.size();

  EmdResult out;
  out.witness = Coupling{full_rows, full_cols, std::vector<double>(full_rows * full_cols, 0.0)};
  if (R == 0 || C == 0) return out;

  std::vector<double> c(R * C);
  for (std::size_t i = 0; i < R; ++i)
    for (std::size_t j = 0; j < C; ++j) c[i * C + j] = cost[row_idx[i] * full_cols + col_idx[j]];
  std::vector<double> left(R), need(C);
  for (std::size_t i = 0; i < R; ++i) left[i] = supply[row_idx[i]];
  for (std::size_t j = 0; j < C; ++j) need[j] = demand[col_idx[j]];
  std::vector<double> flow(R * C, 0.0);

  const std::size_t V = R + C;
  std::vector<double> pot(V, 0.0), dist(V);
  std::vector<std::size_t> parent(V);
  std::vector<char> done(V);
  constexpr std::size_t kNone = std::numeric_limits<std::size_t>::max();

  for (std::size_t iter = 0; iter < 4 * V * V + 16; ++iter) {
    const bool any_supply = std::any_of(left.begin(), left.end(), [](double v) { return v > kMassTol; });
    const bool any_demand = std::any_of(need.begin(), need.end(), [](double v) { return v > kMassTol; });
    if (!any_supply || !any_demand) break;

    std::fill(dist.begin(), dist.end(), kInf);
    std::fill(parent.begin(), parent.end(), kNone);
    std::fill(done.begin(), done.end(), 0);
    for (std::size_t i = 0; i < R; ++i)
      if (left[i] > kMassTol) dist[i] = 0;
    for (;;) {
      std::size_t u = kNone;
      for (std::size_t v = 0; v < V; ++v)
        if (!done[v] && dist[v] < kInf && (u == kNone || dist[v] < dist[u])) u = v;
      if (u == kNone) break;
      done[u] = 1;
      if (u < R) {
        for (std::size_t j = 0; j < C; ++j) {
          const double nd = dist[u] + std::max(0.0, c[u * C + j] + pot[u] - pot[R + j]);
          if (nd < dist[R + j]) {
            dist[R + j] = nd;
            parent[R + j] = u;
          }
        }
      } else {
        const std::size_t j = u - R;
        for (std::size_t i = 0; i < R; ++i) {
          if (flow[i * C + j] <= kMassTol) continue;
          const double nd = dist[u] + std::max(0.0, -c[i * C + j] + pot[u] - pot[i]);
          if (nd < dist[i]) {
            dist[i] = nd;
            parent[i] = u;
          }
        }
      }
    }

    std::size_t target = kNone;
    for (std::size_t j = 0; j < C; ++j)
      if (need[j] > kMassTol && dist[R + j] < kInf && (target == kNone || dist[R + j] < dist[target])) target = R + j;
    if (target == kNone) break;
    const double reach = dist[target];
    for (std::size_t v = 0; v < V; ++v) pot[v] += std::min(dist[v], reach);

    double delta = need[target - R];
    std::size_t v = target;
    while (parent[v] != kNone) {
      const std::size_t p = parent[v];
      if (p >= R) delta = std::min(delta, flow[v * C + (p - R)]);  // reverse arc sink p -> source v
      v = p;
    }
    delta = std::min(delta, left[v]);

    left[v] -= delta;
    need[target - R] -= delta;
    v = target;
    while (parent[v] != kNone) {
      const std::size_t p = parent[v];
      if (p < R) {
        flow[p * C + (v - R)] += delta;
      } else {
        flow[v * C + (p - R)] = std::max(0.0, flow[v * C + (p - R)] - delta);
      }
      v = p;
    }
  }

  for (std::size_t i = 0; i < R; ++i)
    for (std::size_t j = 0; j < C; ++j) {
      out.witness.joint[row_idx[i] * full_cols + col_idx[j]] = flow[i * C + j];
      out.distance += flow[i * C + j] * c[i * C + j];
    }
  return out;
}

EmdResult emd(const FiniteMMSpace& space, const MeasurePair& pair) {
  const std::size_t n = space.size();
  check_probability(pair.mu1, n, "mu1");
  check_probability(pair.mu2, n, "mu2");
  return solve_transport(pair.mu1, pair.mu2, space.metric().to_matrix());
}

double emd_oracle(const FiniteMMSpace& space, const MeasurePair& pair) {
  const std::size_t n = space.size();
  if (n > 6) throw InputError("emd_oracle enumerates vertices and is limited to n <= 6");
  check_probability(pair.mu1, n, "mu1");
  check_probability(pair.mu2, n, "mu2");
  const auto rows = support(pair.mu1);
  const auto cols = support(pair.mu2);
  const std::size_t R = rows.size(), C = cols.size(), V = R + C;
  const std::size_t basis_size = V - 1;

  struct Cell {
    std::size_t r, c;
  };
  std::vector<Cell> cells;
  for (std::size_t i = 0; i < R; ++i)
    for (std::size_t j = 0; j < C; ++j) cells.push_back({i, j});

  double best = kInf;
  std::vector<std::size_t> chosen;

  // A basis is a spanning tree on the R + C marginal nodes; its flows follow by
  // repeatedly peeling leaves.
  auto evaluate = [&]() {
    std::vector<double> residual(V);
    for (std::size_t i = 0; i < R; ++i) residual[i] = pair.mu1[rows[i]];
    for (std::size_t j = 0; j < C; ++j) residual[R + j] = pair.mu2[cols[j]];
    std::vector<std::size_t> degree(V, 0);
    for (std::size_t e : chosen) {
      ++degree[cells[e].r];
      ++degree[R + cells[e].c];
    }
    std::vector<char> used(chosen.size(), 0);
    double total = 0;
    for (std::size_t step = 0; step < chosen.size(); ++step) {
      std::size_t pick = chosen.size(), leaf = 0;
      for (std::size_t k = 0; k < chosen.size() && pick == chosen.size(); ++k) {
        if (used[k]) continue;
        const std::size_t a = cells[chosen[k]].r, b = R + cells[chosen[k]].c;
        if (degree[a] == 1) pick = k, leaf = a;
        else if (degree[b] == 1) pick = k, leaf = b;
      }
      const Cell& cell = cells[chosen[pick]];
      const double amount = residual[leaf];
      if (amount < -1e-12) return;
      const std::size_t a = cell.r, b = R + cell.c;
      residual[a] -= amount;
      residual[b] -= amount;
      --degree[a];
      --degree[b];
      used[pick] = 1;
      total += amount * space.dist(rows[cell.r], cols[cell.c]);
    }
    best = std::min(best, total);
  };

  std::vector<std::size_t> comp(V);
  std::function<void(std::size_t)> extend = [&](std::size_t start) {
    if (chosen.size() == basis_size) {
      evaluate();
      return;
    }
    if (cells.size() - start < basis_size - chosen.size()) return;
    for (std::size_t e = start; e < cells.size(); ++e) {
      // Reject edges closing a cycle: recompute components of the chosen forest.
      std::iota(comp.begin(), comp.end(), std::size_t{0});
      auto find = [&](std::size_t x) {
        while (comp[x] != x) x = comp[x] = comp[comp[x]];
        return x;
      };
      for (std::size_t k : chosen) comp[find(cells[k].r)] = find(R + cells[k].c);
      if (find(cells[e].r) == find(R + cells[e].c)) continue;
      chosen.push_back(e);
      extend(e + 1);
      chosen.pop_back();
    }
  };
  if (basis_size == 0) return 0.0;
  extend(0);
  return best;
}

std::vector<double> pushforward(std::span<const double> mu, std::span<const std::size_t> perm) {
  if (perm.size() != mu.size()) throw InputError("action length does not match the measure");
  std::vector<double> out(mu.size(), 0.0);
  std::vector<char> hit(mu.size(), 0);
  for (std::size_t i = 0; i < perm.size(); ++i) {
    if (perm[i] >= mu.size() || hit[perm[i]]) throw InputError("action is not a bijection on points");
    hit[perm[i]] = 1;
    out[perm[i]] += mu[i];
  }
  return out;
}

double translate_distance(const FiniteMMSpace& space, std::span<const double> mu, std::span<const std::size_t> perm) {
  const auto image = pushforward(mu, perm);
  return emd(space, MeasurePair{{mu.begin(), mu.end()}, image}).distance;
}

}  // namespace mmlab
