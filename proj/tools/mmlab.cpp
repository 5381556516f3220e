// mmlab command-line driver. Every subcommand reads JSON/CSV, writes JSON or
// CSV to --out (or stdout) and, when --out is given, a replayable manifest.

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include "mmlab/concentration.hpp"
#include "mmlab/core.hpp"
#include "mmlab/dynamics.hpp"
#include "mmlab/generators.hpp"
#include "mmlab/io.hpp"
#include "mmlab/observable.hpp"
#include "mmlab/transport.hpp"

namespace {

using mmlab::io::json;

constexpr const char* kToolVersion = "mmlab 0.1.0";

const std::set<std::string> kInputFlags = {"--space", "--mu1", "--mu2", "--x",   "--y",
                                           "--f",     "--action", "--set", "--curve", "--manifest"};

struct Common {
  std::string out;
  std::uint64_t seed = 0;
  unsigned threads = 1;
};

std::vector<double> parse_list(const std::string& text) {
  std::vector<double> out;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    try {
      out.push_back(std::stod(item));
    } catch (const std::exception&) {
      throw mmlab::InputError("not a number: " + item);
    }
  }
  return out;
}

std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw mmlab::InputError("cannot open " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

mmlab::FiniteMMSpace load_space(const std::string& path) {
  return mmlab::io::space_from_json(mmlab::io::read_json(path));
}

class Runner {
 public:
  Runner(std::vector<std::string> argv) : argv_(std::move(argv)) {}

  int run();

 private:
  void emit(const std::string& text);
  void emit(const json& doc) { emit(doc.dump(2) + "\n"); }
  json manifest() const;

  std::vector<std::string> argv_;
  CLI::App* active_ = nullptr;
  Common common_;
};

void Runner::emit(const std::string& text) {
  if (common_.out.empty()) {
    std::cout << text;
    return;
  }
  {
    std::ofstream out(common_.out, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + common_.out);
    out << text;
  }
  mmlab::io::write_json(common_.out + ".manifest.json", manifest());
}

json Runner::manifest() const {
  json params = json::object();
  json inputs = json::array();
  for (const CLI::Option* opt : active_->get_options()) {
    if (opt->count() == 0 || opt->get_name() == "--help") continue;
    const auto& res = opt->results();
    params[opt->get_name()] = res.size() == 1 ? json(res.front()) : json(res);
    if (kInputFlags.count(opt->get_name())) {
      for (const auto& r : res) inputs.push_back(r);
    }
  }
  return {{"command", active_->get_name()},
          {"inputs", inputs},
          {"seed", common_.seed},
          {"parameters", params},
          {"tool_version", kToolVersion},
          {"argv", argv_}};
}

int Runner::run() {
  CLI::App app{"Finite metric-measure space laboratory", "mmlab"};
  app.require_subcommand(1);

  auto add_common = [&](CLI::App* sub, bool seeded) {
    sub->add_option("--out", common_.out, "Output file (default: stdout)");
    if (seeded) sub->add_option("--seed", common_.seed, "Random seed");
    sub->add_option("--threads", common_.threads, "Worker threads; never changes results")->check(CLI::PositiveNumber);
  };

  // generate
  std::string family, sphere_metric = "euclidean", base_weights;
  std::size_t gen_n = 0, gen_dim = 0, gen_samples = 1;
  std::uint32_t gen_p = 0;
  auto* generate = app.add_subcommand("generate", "Build a generator family as an mm-space file");
  generate->add_option("--family", family, "hamming_cube|symmetric_group|sphere|so_n|sl2|product")->required();
  generate->add_option("--n", gen_n, "Size parameter");
  generate->add_option("--p", gen_p, "Prime for sl2");
  generate->add_option("--dim", gen_dim, "Ambient dimension for sphere");
  generate->add_option("--samples", gen_samples, "Sample count for sphere and so_n");
  generate->add_option("--metric", sphere_metric, "euclidean|geodesic (sphere)");
  generate->add_option("--base-weights", base_weights, "Comma-separated base weights (product)");
  add_common(generate, true);

  // validate
  std::string space_path;
  auto* validate = app.add_subcommand("validate", "Check metric axioms and weights");
  validate->add_option("--space", space_path)->required();
  add_common(validate, false);

  // alpha
  std::string eps_text, mode = "exact";
  std::size_t alpha_n = 0, alpha_dim = 0;
  mmlab::SearchConfig search;
  auto* alpha = app.add_subcommand("alpha", "Concentration function at one eps or along a grid");
  alpha->add_option("--space", space_path);
  alpha->add_option("--eps", eps_text, "One value, or a comma-separated grid (CSV output)")->required();
  alpha->add_option("--mode", mode)->check(CLI::IsMember({"exact", "lower", "cube", "cap"}));
  alpha->add_option("--n", alpha_n, "Cube dimension for --mode cube");
  alpha->add_option("--dim", alpha_dim, "Sphere dimension for --mode cap");
  alpha->add_option("--restarts", search.restarts);
  add_common(alpha, true);

  // fit
  std::vector<std::string> curve_specs;
  auto* fit = app.add_subcommand("fit", "Log-linear Gaussian fit over curves");
  fit->add_option("--curve", curve_specs, "n:path.csv, repeatable")->required();
  add_common(fit, false);

  // levy
  std::string grid_text;
  double threshold = 0.05, slack = 0.02;
  auto* levy = app.add_subcommand("levy", "Levy-family trend over curves");
  levy->add_option("--curve", curve_specs, "path.csv, repeatable, in sequence order")->required();
  levy->add_option("--eps", grid_text, "Comma-separated grid")->required();
  levy->add_option("--threshold", threshold);
  levy->add_option("--slack", slack);
  add_common(levy, false);

  // emd
  std::string mu1_path, mu2_path;
  bool with_coupling = false;
  auto* emd = app.add_subcommand("emd", "Transportation distance between two measures");
  emd->add_option("--space", space_path)->required();
  emd->add_option("--mu1", mu1_path)->required();
  emd->add_option("--mu2", mu2_path)->required();
  emd->add_flag("--coupling", with_coupling, "Include the optimal coupling");
  add_common(emd, false);

  // obsdist
  std::string x_path, y_path;
  auto* obs = app.add_subcommand("obsdist", "Upper estimate of the observable distance");
  obs->add_option("--x", x_path)->required();
  obs->add_option("--y", y_path)->required();
  obs->add_option("--budget", search.budget, "Coupling candidates to evaluate");
  add_common(obs, true);

  // median / tail
  std::string f_path;
  double eps = 0;
  auto* med = app.add_subcommand("median", "Median of a 1-Lipschitz function");
  med->add_option("--space", space_path)->required();
  med->add_option("--f", f_path)->required();
  add_common(med, false);
  auto* tail = app.add_subcommand("tail", "Check mu{|f - M_f| > eps} <= 2 alpha(eps)");
  tail->add_option("--space", space_path)->required();
  tail->add_option("--f", f_path)->required();
  tail->add_option("--eps", eps)->required();
  add_common(tail, false);

  // essential
  std::string action_path, set_path, family_text;
  auto* essential = app.add_subcommand("essential", "Test one essentiality certificate");
  essential->add_option("--space", space_path)->required();
  essential->add_option("--action", action_path)->required();
  essential->add_option("--set", set_path)->required();
  essential->add_option("--eps", eps)->required();
  essential->add_option("--family", family_text, "Comma-separated element indices (default: all)");
  add_common(essential, false);

  // leader
  std::size_t dim_half = 150, leader_samples = 0;
  auto* leader = app.add_subcommand("leader", "Inessential-set certificate on the unit sphere");
  leader->add_option("--eps", eps)->required();
  leader->add_option("--dim-half", dim_half);
  leader->add_option("--samples", leader_samples, "Monte Carlo samples (0 skips the empirical check)");
  add_common(leader, true);

  // ramsey
  std::size_t rk = 2, rl = 3, rr = 2, rn = 6;
  auto* ramsey = app.add_subcommand("ramsey", "Exhaustive monochromatic-subset search");
  ramsey->add_option("--k", rk);
  ramsey->add_option("--l", rl);
  ramsey->add_option("--r", rr);
  ramsey->add_option("--n", rn);
  add_common(ramsey, false);

  // replay
  std::string manifest_path, replay_out;
  auto* replay = app.add_subcommand("replay", "Re-run the command recorded in a manifest");
  replay->add_option("--manifest", manifest_path)->required();
  replay->add_option("--out", replay_out, "Write to this path instead of the recorded one");

  try {
    std::vector<std::string> rev(argv_.rbegin(), argv_.rend() - 1);
    app.parse(rev);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << app.help() << "\n" << json{{"error", e.what()}}.dump() << "\n";
    return 2;
  }
  active_ = app.get_subcommands().front();
  const std::string cmd = active_->get_name();
  search.seed = common_.seed;
  search.threads = common_.threads;

  if (cmd == "replay") {
    const json m = mmlab::io::read_json(manifest_path);
    auto args = m.at("argv").get<std::vector<std::string>>();
    if (!replay_out.empty()) {
      for (std::size_t i = 0; i + 1 < args.size(); ++i)
        if (args[i] == "--out") args[i + 1] = replay_out;
    }
    return Runner(std::move(args)).run();
  }

  if (cmd == "generate") {
    json d = {{"family", family}};
    if (family == "hamming_cube" || family == "symmetric_group" || family == "so_n" || family == "product") d["n"] = gen_n;
    if (family == "sl2") d["p"] = gen_p;
    if (family == "sphere") {
      d["dim"] = gen_dim;
      d["metric"] = sphere_metric;
    }
    if (family == "sphere" || family == "so_n") {
      d["seed"] = common_.seed;
      d["samples"] = gen_samples;
    }
    if (family == "product") d["base_weights"] = parse_list(base_weights);
    json doc = mmlab::io::to_json(mmlab::io::generate_cached(d));
    doc["metadata"] = d;
    if (family == "sl2") {
      // The word metric depends on the generating set, so it is recorded.
      json gens = json::array();
      for (const auto& g : mmlab::sl2_word_metric(static_cast<std::uint32_t>(gen_p)).gens) gens.push_back(g);
      doc["metadata"]["generators"] = gens;
    }
    emit(doc);
  } else if (cmd == "validate") {
    const auto violations = mmlab::validate_space(load_space(space_path));
    emit(json{{"violations", violations}});
    if (!violations.empty()) {
      std::cerr << json{{"error", "space failed validation"}, {"violations", violations.size()}}.dump() << "\n";
      return 2;
    }
  } else if (cmd == "alpha") {
    const auto grid = parse_list(eps_text);
    if (grid.empty()) throw mmlab::InputError("--eps is empty");
    mmlab::ConcentrationCurve curve;
    if (mode == "cube") {
      curve = mmlab::hamming_cube_curve(alpha_n, grid);
    } else if (mode == "cap") {
      curve.kind = mmlab::CurveKind::AnalyticCap;
      curve.eps = grid;
      for (double e : grid) curve.alpha.push_back(mmlab::sphere_cap_alpha(alpha_dim, e));
    } else {
      if (space_path.empty()) throw mmlab::InputError("--space is required for this mode");
      const auto space = load_space(space_path);
      if (mode == "exact") {
        curve = mmlab::exact_curve(space, grid, mmlab::ExactOptions{20, common_.threads});
      } else {
        curve = mmlab::lower_bound_curve(space, grid, search);
      }
    }
    if (grid.size() == 1) {
      emit(json{{"alpha", curve.alpha.front()}, {"eps", grid.front()}, {"kind", mmlab::to_string(curve.kind)}});
    } else {
      emit(mmlab::io::curve_to_csv(curve));
    }
  } else if (cmd == "fit") {
    std::vector<std::pair<double, mmlab::ConcentrationCurve>> curves;
    for (const auto& spec : curve_specs) {
      const auto colon = spec.find(':');
      if (colon == std::string::npos) throw mmlab::InputError("expected n:path, got " + spec);
      curves.emplace_back(parse_list(spec.substr(0, colon)).at(0),
                          mmlab::io::curve_from_csv(read_text(spec.substr(colon + 1))));
    }
    const auto r = mmlab::gaussian_fit(curves);
    emit(json{{"c1", r.c1}, {"c2", r.c2}, {"residual", r.residual}});
  } else if (cmd == "levy") {
    std::vector<mmlab::ConcentrationCurve> curves;
    for (const auto& path : curve_specs) curves.push_back(mmlab::io::curve_from_csv(read_text(path)));
    const auto r = mmlab::levy_check(curves, parse_list(grid_text), threshold, slack);
    emit(json{{"is_levy_trend", r.is_levy_trend}, {"table", r.table}, {"threshold", r.threshold}, {"slack", r.slack}});
  } else if (cmd == "emd") {
    const auto space = load_space(space_path);
    mmlab::MeasurePair pair{mmlab::io::measure_from_json(mmlab::io::read_json(mu1_path)),
                            mmlab::io::measure_from_json(mmlab::io::read_json(mu2_path))};
    const auto r = mmlab::emd(space, pair);
    json doc = {{"distance", r.distance}};
    if (with_coupling) doc["coupling"] = mmlab::io::to_json(r.witness);
    emit(doc);
  } else if (cmd == "obsdist") {
    const auto r = mmlab::obs_distance(load_space(x_path), load_space(y_path), search);
    emit(json{{"upper", r.upper},
              {"anchors", {r.anchor_x, r.anchor_y}},
              {"coupling", mmlab::io::to_json(r.coupling)},
              {"candidates", r.candidates}});
  } else if (cmd == "median" || cmd == "tail") {
    const auto space = load_space(space_path);
    const auto f = mmlab::io::function_from_json(mmlab::io::read_json(f_path));
    if (cmd == "median") {
      emit(json{{"median", mmlab::median(space, f)}});
    } else {
      const auto r = mmlab::tail_check(space, f, eps);
      emit(json{{"tail_mass", r.tail_mass}, {"bound", r.bound}, {"holds", r.holds}, {"exact_bound", r.exact_bound}});
    }
  } else if (cmd == "essential") {
    auto space = load_space(space_path);
    std::vector<std::string> names;
    auto perms = mmlab::io::action_from_json(mmlab::io::read_json(action_path), &names);
    const std::size_t n = space.size();
    const auto set = mmlab::io::set_from_json(mmlab::io::read_json(set_path), n);
    const mmlab::IsometricAction action(std::move(space), std::move(perms), std::move(names));
    std::vector<std::size_t> fam;
    if (family_text.empty()) {
      for (std::size_t i = 0; i < action.elements().size(); ++i) fam.push_back(i);
    } else {
      for (double v : parse_list(family_text)) fam.push_back(static_cast<std::size_t>(v));
    }
    const auto r = mmlab::is_essential(action, set, eps, fam);
    emit(json{{"essential", r.essential},
              {"witness", r.witness ? json(*r.witness) : json(nullptr)},
              {"eps", r.eps},
              {"family", r.family}});
  } else if (cmd == "leader") {
    const auto cert = mmlab::leader_certificate(eps);
    json doc = {{"threshold", cert.threshold}, {"inessential_certified", cert.inessential_certified}};
    if (leader_samples > 0) {
      const auto emp = mmlab::leader_empirical(dim_half, leader_samples, eps, common_.seed);
      doc["violations"] = emp.violations;
      doc["samples"] = emp.samples;
      doc["dimension"] = emp.dimension;
    }
    emit(doc);
  } else if (cmd == "ramsey") {
    const auto r = mmlab::ramsey_verify(rk, rl, rr, rn);
    emit(json{{"all_colorings_contain", r.all_colorings_contain},
              {"counterexample", r.counterexample ? mmlab::io::to_json(*r.counterexample) : json(nullptr)},
              {"colorings_checked", r.colorings_checked}});
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  std::vector<std::string> args(argv, argv + argc);
  try {
    return Runner(std::move(args)).run();
  } catch (const mmlab::InputError& e) {
    std::cerr << json{{"error", e.what()}}.dump() << "\n";
    return 2;
  } catch (const json::exception& e) {
    std::cerr << json{{"error", e.what()}}.dump() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << json{{"error", e.what()}, {"internal", true}}.dump() << "\n";
    return 1;
  }
}
