#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace mmlab {

/// Raised for malformed or out-of-range inputs. The CLI maps it to exit code 2.
class InputError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Absolute slack used in every closed comparison d(x, y) <= eps.
inline constexpr double kDistanceSlack = 1e-12;
/// Tolerance used when testing mu(A) >= 1/2.
inline constexpr double kHalfMassSlack = 1e-12;

enum class CloudKind { Euclidean, Geodesic, OperatorNorm };

/// Explicit row-major distance matrix.
struct DenseMetric {
  std::size_t n = 0;
  std::vector<double> data;
};

/// Points are words of fixed length; distance is the fraction of positions
/// where two words differ. Covers Hamming cubes, product spaces and S_n.
struct WordMetric {
  std::size_t length = 0;
  std::vector<std::uint8_t> letters;  // n * length
};

/// Points are coordinate vectors. Geodesic assumes unit vectors on a sphere;
/// OperatorNorm stores square matrices row-major and measures the largest
/// singular value of the difference.
struct CloudMetric {
  CloudKind kind = CloudKind::Euclidean;
  std::size_t dim = 0;
  std::vector<double> coords;  // n * dim
};

class Metric {
 public:
  using Repr = std::variant<DenseMetric, WordMetric, CloudMetric>;

  Metric() = default;
  static Metric dense(std::size_t n, std::vector<double> data);
  static Metric words(std::size_t length, std::vector<std::uint8_t> letters);
  static Metric cloud(CloudKind kind, std::size_t dim, std::vector<double> coords);

  std::size_t size() const { return n_; }
  double operator()(std::size_t i, std::size_t j) const;
  const Repr& repr() const { return repr_; }

  /// Materializes the full n x n matrix, row-major.
  std::vector<double> to_matrix() const;

 private:
  explicit Metric(Repr r, std::size_t n) : repr_(std::move(r)), n_(n) {}
  Repr repr_;
  std::size_t n_ = 0;
};

/// A finite metric space with a probability measure. Immutable once built.
///
/// The constructor only checks shapes. Weight vectors whose sum is within
/// 1e-9 of one are renormalized and the fact is recorded in warning();
/// axiom checks live in validate_space().
class FiniteMMSpace {
 public:
  FiniteMMSpace(std::vector<std::string> labels, Metric metric, std::vector<double> weights);

  std::size_t size() const { return weights_.size(); }
  double dist(std::size_t i, std::size_t j) const { return metric_(i, j); }
  const Metric& metric() const { return metric_; }
  const std::vector<double>& weights() const { return weights_; }
  const std::vector<std::string>& labels() const { return labels_; }
  const std::optional<std::string>& warning() const { return warning_; }

  /// Same points and metric, different probability vector.
  FiniteMMSpace with_weights(std::vector<double> weights) const;

 private:
  std::vector<std::string> labels_;
  Metric metric_;
  std::vector<double> weights_;
  std::optional<std::string> warning_;
};

/// Single point of weight one.
FiniteMMSpace point_space();

class SubsetMask {
 public:
  SubsetMask() = default;
  explicit SubsetMask(std::size_t n, bool value = false) : bits_(n, value ? 1 : 0) {}
  static SubsetMask from_indices(std::size_t n, std::span<const std::size_t> indices);

  std::size_t size() const { return bits_.size(); }
  bool test(std::size_t i) const { return bits_[i] != 0; }
  void set(std::size_t i, bool v = true) { bits_[i] = v ? 1 : 0; }
  std::size_t count() const;
  bool empty() const { return count() == 0; }
  std::vector<std::size_t> indices() const;
  SubsetMask complement() const;
  bool is_subset_of(const SubsetMask& other) const;

  friend bool operator==(const SubsetMask&, const SubsetMask&) = default;

 private:
  std::vector<std::uint8_t> bits_;
};

enum class CurveKind { Exact, LowerBoundSearch, AnalyticCap };

std::string to_string(CurveKind kind);
CurveKind curve_kind_from_string(const std::string& s);

/// Sampled concentration function. alpha at eps = 0 is 1/2 by convention and
/// is never stored; eps values are strictly positive and ascending.
struct ConcentrationCurve {
  std::vector<double> eps;
  std::vector<double> alpha;
  CurveKind kind = CurveKind::Exact;

  /// Empty when the invariants hold.
  std::vector<std::string> check() const;
};

std::vector<std::string> validate_space(const FiniteMMSpace& space);

SubsetMask neighborhood(const FiniteMMSpace& space, const SubsetMask& set, double eps);

double measure(const FiniteMMSpace& space, const SubsetMask& set);

double diameter(const FiniteMMSpace& space);

struct ExactOptions {
  std::size_t max_points = 20;
  unsigned threads = 1;
};

/// Concentration function by enumeration of all subsets.
double alpha_exact(const FiniteMMSpace& space, double eps, const ExactOptions& opts = {});

ConcentrationCurve exact_curve(const FiniteMMSpace& space, std::span<const double> eps_grid,
                               const ExactOptions& opts = {});

}  // namespace mmlab
