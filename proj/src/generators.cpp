#include "mmlab/generators.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <deque>
#include <numeric>
#include <string>

namespace mmlab {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::string word_label(std::span<const std::uint8_t> word, std::size_t alphabet) {
  std::string out;
  for (std::size_t k = 0; k < word.size(); ++k) {
    if (alphabet > 10 && k > 0) out += '.';
    out += alphabet > 10 ? std::to_string(word[k]) : std::string(1, static_cast<char>('0' + word[k]));
  }
  return out;
}

std::size_t checked_power(std::size_t base, std::size_t exp, std::size_t cap) {
  std::size_t out = 1;
  for (std::size_t i = 0; i < exp; ++i) {
    if (base != 0 && out > cap / base) return cap + 1;
    out *= base;
  }
  return out;
}

}  // namespace

std::mt19937_64 sample_stream(std::uint64_t seed, std::uint64_t index) {
  return std::mt19937_64(splitmix64(splitmix64(seed) ^ splitmix64(index + 0x632be59bd9b4e019ULL)));
}

FiniteMMSpace hamming_cube(std::size_t n, std::size_t max_n) {
  if (n == 0) throw InputError("cube dimension must be positive");
  if (n > max_n || n > 30) {
    throw InputError("hamming cube of dimension " + std::to_string(n) +
                     " is too large to enumerate; use a sampled product space instead");
  }
  const std::size_t count = std::size_t{1} << n;
  std::vector<std::uint8_t> letters(count * n);
  std::vector<std::string> labels(count);
  for (std::size_t i = 0; i < count; ++i) {
    for (std::size_t k = 0; k < n; ++k) letters[i * n + k] = static_cast<std::uint8_t>((i >> (n - 1 - k)) & 1U);
    labels[i] = word_label({letters.data() + i * n, n}, 2);
  }
  return FiniteMMSpace(std::move(labels), Metric::words(n, std::move(letters)),
                       std::vector<double>(count, 1.0 / static_cast<double>(count)));
}

FiniteMMSpace symmetric_group(std::size_t n, std::size_t max_n) {
  if (n == 0) throw InputError("symmetric group degree must be positive");
  if (n > max_n || n > 12) throw InputError("symmetric group S_" + std::to_string(n) + " exceeds the enumeration cap");
  std::vector<std::uint8_t> perm(n);
  std::iota(perm.begin(), perm.end(), std::uint8_t{0});
  std::vector<std::uint8_t> letters;
  std::vector<std::string> labels;
  do {
    letters.insert(letters.end(), perm.begin(), perm.end());
    labels.push_back(word_label(perm, n));
  } while (std::next_permutation(perm.begin(), perm.end()));
  const std::size_t count = labels.size();
  return FiniteMMSpace(std::move(labels), Metric::words(n, std::move(letters)),
                       std::vector<double>(count, 1.0 / static_cast<double>(count)));
}

FiniteMMSpace sphere_sampled(std::size_t dim, const SamplerConfig& cfg, SphereMetric metric) {
  if (dim == 0) throw InputError("sphere dimension must be at least 1");
  if (cfg.sample_count == 0) throw InputError("sample_count must be at least 1");
  const std::size_t ambient = dim + 1;
  std::vector<double> coords(cfg.sample_count * ambient);
  for (std::size_t s = 0; s < cfg.sample_count; ++s) {
    auto rng = sample_stream(cfg.seed, s);
    std::normal_distribution<double> normal;
    double* x = coords.data() + s * ambient;
    double norm = 0;
    while (!(norm > 1e-150)) {
      norm = 0;
      for (std::size_t d = 0; d < ambient; ++d) {
        x[d] = normal(rng);
        norm += x[d] * x[d];
      }
      norm = std::sqrt(norm);
    }
    for (std::size_t d = 0; d < ambient; ++d) x[d] /= norm;
  }
  std::vector<std::string> labels(cfg.sample_count);
  for (std::size_t s = 0; s < cfg.sample_count; ++s) labels[s] = "s" + std::to_string(s);
  const auto kind = metric == SphereMetric::Geodesic ? CloudKind::Geodesic : CloudKind::Euclidean;
  return FiniteMMSpace(std::move(labels), Metric::cloud(kind, ambient, std::move(coords)),
                       std::vector<double>(cfg.sample_count, 1.0 / static_cast<double>(cfg.sample_count)));
}

FiniteMMSpace so_n_sampled(std::size_t n, const SamplerConfig& cfg) {
  if (n < 2) throw InputError("SO(n) requires n >= 2");
  if (cfg.sample_count == 0) throw InputError("sample_count must be at least 1");
  const auto dim = static_cast<Eigen::Index>(n);
  std::vector<double> coords(cfg.sample_count * n * n);
  for (std::size_t s = 0; s < cfg.sample_count; ++s) {
    auto rng = sample_stream(cfg.seed, s);
    std::normal_distribution<double> normal;
    Eigen::MatrixXd g(dim, dim);
    for (Eigen::Index r = 0; r < dim; ++r)
      for (Eigen::Index c = 0; c < dim; ++c) g(r, c) = normal(rng);
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(g);
    Eigen::MatrixXd q = qr.householderQ();
    const Eigen::MatrixXd& packed = qr.matrixQR();
    // Q * sign(diag R) is Haar on O(n).
    for (Eigen::Index c = 0; c < dim; ++c) {
      if (packed(c, c) < 0) q.col(c) = -q.col(c);
    }
    if (q.determinant() < 0) q.col(dim - 1) = -q.col(dim - 1);
    double* out = coords.data() + s * n * n;
    for (Eigen::Index r = 0; r < dim; ++r)
      for (Eigen::Index c = 0; c < dim; ++c) out[r * dim + c] = q(r, c);
  }
  std::vector<std::string> labels(cfg.sample_count);
  for (std::size_t s = 0; s < cfg.sample_count; ++s) labels[s] = "T" + std::to_string(s);
  return FiniteMMSpace(std::move(labels), Metric::cloud(CloudKind::OperatorNorm, n * n, std::move(coords)),
                       std::vector<double>(cfg.sample_count, 1.0 / static_cast<double>(cfg.sample_count)));
}

bool is_prime(std::uint64_t p) {
  if (p < 2) return false;
  for (std::uint64_t d = 2; d * d <= p; ++d)
    if (p % d == 0) return false;
  return true;
}

Mat2 mat_mul(const Mat2& x, const Mat2& y, std::uint32_t p) {
  auto m = [p](std::uint64_t a, std::uint64_t b, std::uint64_t c, std::uint64_t d) {
    return static_cast<std::uint32_t>((a * b + c * d) % p);
  };
  return {m(x[0], y[0], x[1], y[2]), m(x[0], y[1], x[1], y[3]), m(x[2], y[0], x[3], y[2]),
          m(x[2], y[1], x[3], y[3])};
}

Mat2 mat_inv(const Mat2& x, std::uint32_t p) {
  // Determinant one, so the inverse is the adjugate.
  return {x[3], (p - x[1]) % p, (p - x[2]) % p, x[0]};
}

WordMetricGroup sl2_word_metric(std::uint32_t p, std::uint32_t max_p) {
  if (!is_prime(p)) throw InputError("p = " + std::to_string(p) + " is not prime");
  if (p > max_p) throw InputError("p = " + std::to_string(p) + " exceeds the SL(2,F_p) cap of " + std::to_string(max_p));

  WordMetricGroup g;
  g.p = p;
  const auto encode = [p](const Mat2& m) {
    return ((static_cast<std::size_t>(m[0]) * p + m[1]) * p + m[2]) * p + m[3];
  };
  std::vector<std::int32_t> index(static_cast<std::size_t>(p) * p * p * p, -1);
  const Mat2 identity{1, 0, 0, 1};
  g.elements.push_back(identity);
  index[encode(identity)] = 0;
  for (std::uint32_t a = 0; a < p; ++a)
    for (std::uint32_t b = 0; b < p; ++b)
      for (std::uint32_t c = 0; c < p; ++c)
        for (std::uint32_t d = 0; d < p; ++d) {
          const Mat2 m{a, b, c, d};
          if (m == identity) continue;
          if ((static_cast<std::uint64_t>(a) * d + static_cast<std::uint64_t>(p - b % p) * c) % p != 1 % p) continue;
          index[encode(m)] = static_cast<std::int32_t>(g.elements.size());
          g.elements.push_back(m);
        }

  const Mat2 upper{1, 1 % p, 0, 1}, lower{1, 0, 1 % p, 1};
  for (const Mat2& s : {upper, lower}) {
    const Mat2 inv = mat_inv(s, p);
    for (const Mat2& t : {s, inv})
      if (std::find(g.gens.begin(), g.gens.end(), t) == g.gens.end()) g.gens.push_back(t);
  }

  // Word length of every element by BFS on the right Cayley graph.
  const std::size_t n = g.elements.size();
  constexpr std::uint16_t kUnreached = 0xffff;
  std::vector<std::uint16_t> length(n, kUnreached);
  length[0] = 0;
  std::deque<std::size_t> queue{0};
  while (!queue.empty()) {
    const std::size_t cur = queue.front();
    queue.pop_front();
    for (const Mat2& s : g.gens) {
      const auto next = static_cast<std::size_t>(index[encode(mat_mul(g.elements[cur], s, p))]);
      if (length[next] == kUnreached) {
        length[next] = static_cast<std::uint16_t>(length[cur] + 1);
        queue.push_back(next);
      }
    }
  }
  if (std::find(length.begin(), length.end(), kUnreached) != length.end()) {
    throw std::logic_error("Cayley graph of SL(2,F_p) is disconnected");
  }

  // d(g, h) = |g h^-1|, invariant under right multiplication.
  std::vector<Mat2> inverses(n);
  for (std::size_t i = 0; i < n; ++i) inverses[i] = mat_inv(g.elements[i], p);
  g.dist.assign(n * n, 0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      g.dist[i * n + j] = length[static_cast<std::size_t>(index[encode(mat_mul(g.elements[i], inverses[j], p))])];
  return g;
}

FiniteMMSpace WordMetricGroup::to_space() const {
  const std::size_t n = size();
  std::vector<double> d(dist.begin(), dist.end());
  std::vector<std::string> labels(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& m = elements[i];
    labels[i] = "[[" + std::to_string(m[0]) + "," + std::to_string(m[1]) + "],[" + std::to_string(m[2]) + "," +
                std::to_string(m[3]) + "]]";
  }
  return FiniteMMSpace(std::move(labels), Metric::dense(n, std::move(d)),
                       std::vector<double>(n, 1.0 / static_cast<double>(n)));
}

FiniteMMSpace product_space(std::span<const double> base_weights, std::size_t n, std::size_t max_points) {
  const std::size_t k = base_weights.size();
  if (k == 0) throw InputError("base measure must have at least one atom");
  if (k > 255) throw InputError("base alphabet limited to 255 atoms");
  if (n == 0) throw InputError("power must be positive");
  const std::size_t count = checked_power(k, n, max_points);
  if (count > max_points) throw InputError("product space exceeds the point cap");

  std::vector<std::uint8_t> letters(count * n);
  std::vector<double> weights(count);
  std::vector<std::string> labels(count);
  for (std::size_t i = 0; i < count; ++i) {
    std::size_t rest = i;
    double w = 1.0;
    for (std::size_t pos = n; pos-- > 0;) {
      const auto letter = static_cast<std::uint8_t>(rest % k);
      rest /= k;
      letters[i * n + pos] = letter;
      w *= base_weights[letter];
    }
    weights[i] = w;
    labels[i] = word_label({letters.data() + i * n, n}, k);
  }
  return FiniteMMSpace(std::move(labels), Metric::words(n, std::move(letters)), std::move(weights));
}

}  // namespace mmlab
