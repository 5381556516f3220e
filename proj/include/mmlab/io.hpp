#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "mmlab/concentration.hpp"
#include "mmlab/core.hpp"
#include "mmlab/dynamics.hpp"
#include "mmlab/observable.hpp"
#include "mmlab/transport.hpp"

namespace mmlab::io {

using nlohmann::json;

json read_json(const std::filesystem::path& path);
/// Writes `doc.dump(2)` plus a trailing newline.
void write_json(const std::filesystem::path& path, const json& doc);

json to_json(const FiniteMMSpace& space);
/// Accepts metric types "matrix", "hamming_normalized", "words" and "points".
FiniteMMSpace space_from_json(const json& doc);

/// A plain array or {"weights": [...]}.
std::vector<double> measure_from_json(const json& doc);
LipschitzFunction function_from_json(const json& doc);
/// {"indices": [...]}, {"mask": [0/1...]} or a plain index array.
SubsetMask set_from_json(const json& doc, std::size_t n);
std::vector<Permutation> action_from_json(const json& doc, std::vector<std::string>* names = nullptr);

json to_json(const StepFunction& h);
json to_json(const Coupling& c);
json to_json(const ColoredHypergraph& h);

/// Header `eps,alpha,kind`, numbers printed with 17 significant digits.
std::string curve_to_csv(const ConcentrationCurve& curve);
ConcentrationCurve curve_from_csv(const std::string& text);

std::string format_double(double v);

/// {"family": hamming_cube|symmetric_group|sphere|so_n|sl2|product, ...}.
FiniteMMSpace generate(const json& descriptor);

/// generate() memoized in $MMLAB_CACHE_DIR when that variable is set.
FiniteMMSpace generate_cached(const json& descriptor);

}  // namespace mmlab::io
