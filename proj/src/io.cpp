#include "mmlab/io.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "mmlab/generators.hpp"

namespace mmlab::io {

namespace {

std::string kind_name(CloudKind kind) {
  switch (kind) {
    case CloudKind::Euclidean:
      return "euclidean";
    case CloudKind::Geodesic:
      return "geodesic";
    case CloudKind::OperatorNorm:
      return "operator_norm";
  }
  return "euclidean";
}

CloudKind kind_from_name(const std::string& s) {
  if (s == "euclidean") return CloudKind::Euclidean;
  if (s == "geodesic") return CloudKind::Geodesic;
  if (s == "operator_norm") return CloudKind::OperatorNorm;
  throw InputError("unknown point metric kind: " + s);
}

template <class T>
T get(const json& doc, const char* key) {
  if (!doc.contains(key)) throw InputError(std::string("missing field: ") + key);
  try {
    return doc.at(key).get<T>();
  } catch (const json::exception&) {
    throw InputError(std::string("malformed field: ") + key);
  }
}

template <class T>
std::vector<T> flatten_rows(const json& rows, std::size_t& width, const char* what) {
  if (!rows.is_array()) throw InputError(std::string(what) + " must be an array of rows");
  std::vector<T> out;
  width = 0;
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const auto row = rows[r].get<std::vector<T>>();
    if (r == 0) width = row.size();
    if (row.size() != width) throw InputError(std::string(what) + " rows differ in length");
    out.insert(out.end(), row.begin(), row.end());
  }
  return out;
}

std::uint64_t fnv1a(const std::string& text) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

}  // namespace

json read_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw InputError("invalid JSON in " + path.string() + ": " + e.what());
  }
}

void write_json(const std::filesystem::path& path, const json& doc) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << doc.dump(2) << '\n';
}

json to_json(const FiniteMMSpace& space) {
  json doc;
  doc["labels"] = space.labels();
  const std::size_t n = space.size();
  std::visit(
      [&](const auto& m) {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, DenseMetric>) {
          json rows = json::array();
          for (std::size_t i = 0; i < n; ++i)
            rows.push_back(std::vector<double>(m.data.begin() + i * n, m.data.begin() + (i + 1) * n));
          doc["metric"] = {{"type", "matrix"}, {"data", rows}};
        } else if constexpr (std::is_same_v<T, WordMetric>) {
          json rows = json::array();
          for (std::size_t i = 0; i < n; ++i)
            rows.push_back(std::vector<int>(m.letters.begin() + i * m.length, m.letters.begin() + (i + 1) * m.length));
          doc["metric"] = {{"type", "words"}, {"letters", rows}};
        } else {
          json rows = json::array();
          for (std::size_t i = 0; i < n; ++i)
            rows.push_back(std::vector<double>(m.coords.begin() + i * m.dim, m.coords.begin() + (i + 1) * m.dim));
          doc["metric"] = {{"type", "points"}, {"kind", kind_name(m.kind)}, {"coords", rows}};
        }
      },
      space.metric().repr());
  doc["weights"] = space.weights();
  return doc;
}

FiniteMMSpace space_from_json(const json& doc) {
  if (!doc.is_object()) throw InputError("mm-space document must be an object");
  const json& metric = doc.contains("metric") ? doc["metric"] : throw InputError("missing field: metric");
  const auto type = get<std::string>(metric, "type");
  Metric m;
  std::size_t width = 0;
  if (type == "matrix") {
    auto data = flatten_rows<double>(get<json>(metric, "data"), width, "metric data");
    if (width * width != data.size()) throw InputError("metric matrix is not square");
    m = Metric::dense(width, std::move(data));
  } else if (type == "hamming_normalized") {
    m = hamming_cube(get<std::size_t>(metric, "n")).metric();
  } else if (type == "words") {
    std::vector<int> raw = flatten_rows<int>(get<json>(metric, "letters"), width, "word letters");
    std::vector<std::uint8_t> letters;
    for (int v : raw) {
      if (v < 0 || v > 255) throw InputError("word letters must lie in 0..255");
      letters.push_back(static_cast<std::uint8_t>(v));
    }
    if (width == 0) throw InputError("words must be non-empty");
    m = Metric::words(width, std::move(letters));
  } else if (type == "points") {
    auto coords = flatten_rows<double>(get<json>(metric, "coords"), width, "point coordinates");
    if (width == 0) throw InputError("points need at least one coordinate");
    m = Metric::cloud(kind_from_name(metric.value("kind", std::string("euclidean"))), width, std::move(coords));
  } else {
    throw InputError("unknown metric type: " + type);
  }
  const std::size_t n = m.size();
  std::vector<double> weights =
      doc.contains("weights") ? get<std::vector<double>>(doc, "weights") : std::vector<double>(n, 1.0 / n);
  std::vector<std::string> labels;
  if (doc.contains("labels")) {
    labels = get<std::vector<std::string>>(doc, "labels");
  } else {
    for (std::size_t i = 0; i < n; ++i) labels.push_back(std::to_string(i));
  }
  return FiniteMMSpace(std::move(labels), std::move(m), std::move(weights));
}

std::vector<double> measure_from_json(const json& doc) {
  if (doc.is_array()) return doc.get<std::vector<double>>();
  return get<std::vector<double>>(doc, "weights");
}

LipschitzFunction function_from_json(const json& doc) {
  LipschitzFunction f;
  f.values = get<std::vector<double>>(doc, "values");
  f.constant = doc.value("constant", 1.0);
  return f;
}

SubsetMask set_from_json(const json& doc, std::size_t n) {
  if (doc.is_object() && doc.contains("mask")) {
    const auto bits = get<std::vector<int>>(doc, "mask");
    if (bits.size() != n) throw InputError("mask length does not match the space");
    SubsetMask out(n);
    for (std::size_t i = 0; i < n; ++i) out.set(i, bits[i] != 0);
    return out;
  }
  const auto idx = doc.is_array() ? doc.get<std::vector<std::size_t>>() : get<std::vector<std::size_t>>(doc, "indices");
  for (std::size_t i : idx)
    if (i >= n) throw InputError("set index out of range: " + std::to_string(i));
  return SubsetMask::from_indices(n, idx);
}

std::vector<Permutation> action_from_json(const json& doc, std::vector<std::string>* names) {
  auto perms = get<std::vector<Permutation>>(doc, "permutations");
  if (names && doc.contains("names")) *names = get<std::vector<std::string>>(doc, "names");
  return perms;
}

json to_json(const StepFunction& h) { return {{"breaks", h.breaks}, {"values", h.values}}; }

json to_json(const Coupling& c) {
  json rows = json::array();
  for (std::size_t i = 0; i < c.rows; ++i)
    rows.push_back(std::vector<double>(c.joint.begin() + i * c.cols, c.joint.begin() + (i + 1) * c.cols));
  return rows;
}

json to_json(const ColoredHypergraph& h) {
  json subsets = json::array();
  const auto all = ColoredHypergraph::subsets(h.ground, h.k);
  for (std::size_t i = 0; i < all.size(); ++i) subsets.push_back({{"subset", all[i]}, {"color", h.colors[i]}});
  return {{"ground", h.ground}, {"k", h.k}, {"r", h.r}, {"colors", subsets}};
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string curve_to_csv(const ConcentrationCurve& curve) {
  std::string out = "eps,alpha,kind\n";
  const std::string kind = to_string(curve.kind);
  for (std::size_t i = 0; i < curve.eps.size(); ++i)
    out += format_double(curve.eps[i]) + "," + format_double(curve.alpha[i]) + "," + kind + "\n";
  return out;
}

ConcentrationCurve curve_from_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line.rfind("eps,alpha,kind", 0) != 0) throw InputError("curve CSV lacks the header");
  ConcentrationCurve curve;
  bool first = true;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream row(line);
    std::string e, a, k;
    if (!std::getline(row, e, ',') || !std::getline(row, a, ',') || !std::getline(row, k)) {
      throw InputError("malformed curve row: " + line);
    }
    try {
      curve.eps.push_back(std::stod(e));
      curve.alpha.push_back(std::stod(a));
    } catch (const std::exception&) {
      throw InputError("malformed curve row: " + line);
    }
    const CurveKind kind = curve_kind_from_string(k);
    if (!first && kind != curve.kind) throw InputError("curve mixes kinds");
    curve.kind = kind;
    first = false;
  }
  if (const auto bad = curve.check(); !bad.empty()) throw InputError("invalid curve: " + bad.front());
  return curve;
}

FiniteMMSpace generate(const json& d) {
  const auto family = get<std::string>(d, "family");
  if (family == "hamming_cube") return hamming_cube(get<std::size_t>(d, "n"));
  if (family == "symmetric_group") return symmetric_group(get<std::size_t>(d, "n"));
  if (family == "sl2") return sl2_word_metric(get<std::uint32_t>(d, "p")).to_space();
  SamplerConfig cfg{d.value("seed", std::uint64_t{0}), d.value("samples", std::size_t{1})};
  if (family == "sphere") {
    const auto metric = d.value("metric", std::string("euclidean"));
    if (metric != "euclidean" && metric != "geodesic") throw InputError("sphere metric must be euclidean or geodesic");
    return sphere_sampled(get<std::size_t>(d, "dim"), cfg,
                          metric == "geodesic" ? SphereMetric::Geodesic : SphereMetric::Euclidean);
  }
  if (family == "so_n") return so_n_sampled(get<std::size_t>(d, "n"), cfg);
  if (family == "product") {
    const auto base = get<std::vector<double>>(d, "base_weights");
    return product_space(base, get<std::size_t>(d, "n"));
  }
  throw InputError("unknown generator family: " + family);
}

FiniteMMSpace generate_cached(const json& descriptor) {
  const char* dir = std::getenv("MMLAB_CACHE_DIR");
  if (!dir || !*dir) return generate(descriptor);
  const std::string key = descriptor.dump();
  char name[32];
  std::snprintf(name, sizeof name, "%016llx.json", static_cast<unsigned long long>(fnv1a(key)));
  const std::filesystem::path path = std::filesystem::path(dir) / name;
  if (std::filesystem::exists(path)) {
    const json cached = read_json(path);
    if (cached.value("descriptor", json()) == descriptor) return space_from_json(cached.at("space"));
  }
  FiniteMMSpace space = generate(descriptor);
  std::filesystem::create_directories(dir);
  write_json(path, {{"descriptor", descriptor}, {"space", to_json(space)}});
  return space;
}

}  // namespace mmlab::io
