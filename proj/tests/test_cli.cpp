#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sys/wait.h>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

fs::path scratch() {
  static const fs::path dir = [] {
    auto p = fs::temp_directory_path() / ("mmlab_cli_test_" + std::to_string(::getpid()));
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
  }();
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

Run run(const std::string& args, const std::string& env = "") {
  const auto out = scratch() / "stdout.txt";
  const auto err = scratch() / "stderr.txt";
  const std::string cmd = "cd '" + scratch().string() + "' && " + env + " '" + MMLAB_CLI + "' " + args + " >'" +
                          out.string() + "' 2>'" + err.string() + "'";
  const int status = std::system(cmd.c_str());
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, slurp(out), slurp(err)};
}

void write(const std::string& name, const std::string& text) { std::ofstream(scratch() / name) << text; }

}  // namespace

TEST_CASE("generate, validate and alpha") {
  REQUIRE(run("generate --family hamming_cube --n 3 --out cube3.json").code == 0);
  CHECK(fs::exists(scratch() / "cube3.json.manifest.json"));
  CHECK(run("validate --space cube3.json").code == 0);

  REQUIRE(run("generate --family hamming_cube --n 2 --out cube2.json").code == 0);
  const auto a = run("alpha --space cube2.json --eps 0.4 --mode exact");
  REQUIRE(a.code == 0);
  CHECK(json::parse(a.out).at("alpha") == 0.5);

  const auto curve = run("alpha --space cube2.json --eps 0.25,0.5 --mode exact");
  CHECK(curve.out == "eps,alpha,kind\n0.25,0.5,exact\n0.5,0,exact\n");
}

TEST_CASE("ramsey") {
  const auto five = json::parse(run("ramsey --k 2 --l 3 --r 2 --n 5").out);
  CHECK(five.at("all_colorings_contain") == false);
  CHECK_FALSE(five.at("counterexample").is_null());
  CHECK(json::parse(run("ramsey --n 6").out).at("all_colorings_contain") == true);
}

TEST_CASE("exit codes") {
  const auto unknown = run("alpha --space cube2.json --eps 0.4 --frobnicate 3");
  CHECK(unknown.code == 2);
  CHECK(unknown.err.find("Usage") != std::string::npos);
  CHECK(run("nonsense").code == 2);

  write("broken.json", R"({"labels":["a","b"],"metric":{"type":"matrix","data":[[0,1],[2,0]]},"weights":[0.5,0.5]})");
  const auto v = run("validate --space broken.json");
  CHECK(v.code == 2);
  CHECK(json::parse(v.out).at("violations").size() == 1);

  const auto missing = run("alpha --space does_not_exist.json --eps 0.1");
  CHECK(missing.code == 2);
  CHECK(json::parse(missing.err).contains("error"));

  write("garbage.json", "{not json");
  CHECK(run("validate --space garbage.json").code == 2);
}

TEST_CASE("emd, median, tail and essential") {
  write("line.json", R"({"labels":["a","b","c"],"metric":{"type":"matrix","data":[[0,1,2],[1,0,1],[2,1,0]]},"weights":[0.2,0.3,0.5]})");
  write("mu1.json", "[1, 0, 0]");
  write("mu2.json", R"({"weights": [0, 0.5, 0.5]})");
  const auto e = json::parse(run("emd --space line.json --mu1 mu1.json --mu2 mu2.json --coupling").out);
  CHECK(e.at("distance").get<double>() == doctest::Approx(1.5));
  CHECK(e.at("coupling").size() == 3);
  CHECK_FALSE(json::parse(run("emd --space line.json --mu1 mu1.json --mu2 mu2.json").out).contains("coupling"));

  write("f.json", R"({"values": [0, 0.5, 0.5, 1]})");
  CHECK(json::parse(run("median --space cube2.json --f f.json").out).at("median") == 0.5);
  const auto t = json::parse(run("tail --space cube2.json --f f.json --eps 0.4").out);
  CHECK(t.at("tail_mass") == 0.5);
  CHECK(t.at("holds") == true);

  write("swap.json", R"({"permutations": [[0,1,2,3],[3,2,1,0]]})");
  write("set.json", R"({"indices": [0]})");
  const auto ess = json::parse(run("essential --space cube2.json --action swap.json --set set.json --eps 0.4").out);
  CHECK(ess.at("essential") == false);
  const auto ess2 =
      json::parse(run("essential --space cube2.json --action swap.json --set set.json --eps 0.5 --family 1").out);
  CHECK(ess2.at("essential") == true);
}

TEST_CASE("replaying a manifest reproduces the output bytes") {
  const std::vector<std::pair<std::string, std::string>> cases{
      {"generate --family sphere --dim 2 --samples 300 --seed 11 --out sphere.json", "sphere.json"},
      {"alpha --space sphere.json --eps 0.1,0.3,0.6 --mode lower --seed 3 --out lower.csv", "lower.csv"},
      {"obsdist --x cube2.json --y sphere.json --budget 16 --seed 4 --out obs.json", "obs.json"},
      {"leader --eps 0.12 --dim-half 30 --samples 2000 --seed 9 --out leader.json", "leader.json"},
      {"ramsey --n 5 --out ramsey.json", "ramsey.json"},
  };
  for (const auto& [args, out] : cases) {
    INFO(args);
    REQUIRE(run(args).code == 0);
    REQUIRE(run("replay --manifest " + out + ".manifest.json --out replay_" + out).code == 0);
    CHECK(slurp(scratch() / out) == slurp(scratch() / ("replay_" + out)));
    const auto m = json::parse(slurp(scratch() / (out + ".manifest.json")));
    for (const char* key : {"command", "inputs", "seed", "parameters", "tool_version"}) CHECK(m.contains(key));
  }
}

TEST_CASE("thread count never changes results") {
  REQUIRE(run("alpha --space sphere.json --eps 0.1,0.3 --mode lower --threads 1 --out t1.csv").code == 0);
  REQUIRE(run("alpha --space sphere.json --eps 0.1,0.3 --mode lower --threads 4 --out t4.csv").code == 0);
  CHECK(slurp(scratch() / "t1.csv") == slurp(scratch() / "t4.csv"));
}

TEST_CASE("generator cache") {
  const std::string env = "MMLAB_CACHE_DIR='" + (scratch() / "cache").string() + "'";
  REQUIRE(run("generate --family sl2 --p 3 --out g1.json", env).code == 0);
  REQUIRE(run("generate --family sl2 --p 3 --out g2.json", env).code == 0);
  CHECK(slurp(scratch() / "g1.json") == slurp(scratch() / "g2.json"));
  const auto meta = json::parse(slurp(scratch() / "g1.json")).at("metadata");
  CHECK(meta.at("p") == 3);
  // the two elementary matrices and their inverses, row-major mod 3
  CHECK(meta.at("generators").size() == 4);
  CHECK(std::ranges::count(meta.at("generators"), json{1, 1, 0, 1}) == 1);
  CHECK(std::ranges::count(meta.at("generators"), json{1, 0, 1, 1}) == 1);
  CHECK(std::distance(fs::directory_iterator(scratch() / "cache"), fs::directory_iterator()) == 1);
}
