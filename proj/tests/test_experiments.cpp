#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <numbers>

#include "beurling/errors.hpp"
#include "beurling/experiments.hpp"

using namespace beurling;

namespace {

std::filesystem::path scratch(const std::string& name) {
  return std::filesystem::temp_directory_path() / ("beurling_unit_" + name);
}

std::string first_line(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::string line;
  std::getline(in, line);
  return line;
}

std::string path_of(const json& config) {
  try {
    validate_config(config);
  } catch (const ConfigError& e) {
    return e.path();
  }
  return "valid";
}

}  // namespace

TEST_CASE("experiment names") {
  CHECK(experiment_from_string("random-example") == Experiment::kRandomExample);
  CHECK(experiment_from_string("DENSITY") == Experiment::kDensity);
  CHECK_THROWS_AS(experiment_from_string("bogus"), ConfigError);
}

TEST_CASE("config validation names the offending field") {
  CHECK(path_of({{"experiment", "VERIFY"}}) == "valid");
  CHECK(path_of({{"experiment", "VERIFY"}, {"colour", 1}}) == "/colour");
  CHECK(path_of({{"experiment", "DENSITY"}, {"X", 1e5}}) == "/system");
  CHECK(path_of({{"experiment", "DENSITY"}, {"system", {{"kind", "usual"}}}, {"X", "big"}}) == "/X");
  CHECK(path_of({{"experiment", "COUNTEREXAMPLE"}}) == "/seed");
  CHECK(path_of({{"experiment", "RANDOM_EXAMPLE"}, {"seeds", {{"count", 0}}}}) == "/seeds/count");
  CHECK(path_of({{"experiment", "RANDOM_EXAMPLE"}, {"seed", 1}, {"holder", {{"dt", 0.1}}}}) == "/holder/dt");
  CHECK(path_of({{"experiment", "SMOOTH"}, {"perturbation", json::object()}, {"sigma_list", {1.0}}}) ==
        "/sigma_list/0");
  CHECK(path_of({{"experiment", "VERIFY"}, {"expect", {{"passed", {{"between", 1}}}}}}) == "/expect/passed/between");
  CHECK(path_of(json::array()) == "/");
}

TEST_CASE("exit codes") {
  RunOptions opt;
  opt.out_dir = scratch("exit");
  CHECK(run({{"experiment", "DENSITY"}, {"X", 1e5}}, opt).exit_code == kExitConfig);
  const json unknown_kind = {{"experiment", "DENSITY"}, {"system", {{"kind", "weird"}}}, {"X", 1e5}};
  const RunResult k = run(unknown_kind, opt);
  CHECK(k.exit_code == kExitConfig);
  CHECK(k.message.find("/system/kind") != std::string::npos);
  const json too_big = {{"experiment", "DENSITY"}, {"system", {{"kind", "usual"}, {"params", {{"Y", 1e12}}}}}, {"X", 1e12}};
  CHECK(run(too_big, opt).exit_code == kExitCapacity);
  const json gate = {{"experiment", "DENSITY"},
                     {"system", {{"kind", "usual"}, {"params", {{"Y", 1e4}}}}},
                     {"X", 1e4},
                     {"expect", {{"estimate", {{"min", 2.0}}}}}};
  CHECK(run(gate, opt).exit_code == kExitAssertion);
  const json pass = {{"experiment", "DENSITY"},
                     {"system", {{"kind", "usual"}, {"params", {{"Y", 1e4}}}}},
                     {"X", 1e4},
                     {"expect", {{"estimate", {{"min", 0.99}, {"max", 1.01}}}, {"trend", "CONVERGENT"}}}};
  CHECK(run(pass, opt).exit_code == kExitOk);
  const json missing_metric = {{"experiment", "VERIFY"}, {"expect", {{"nothing", 1}}}};
  CHECK(run(missing_metric, opt).exit_code == kExitConfig);
}

TEST_CASE("csv columns") {
  RunOptions opt;
  opt.out_dir = scratch("csv");
  const json density = {{"experiment", "DENSITY"}, {"system", {{"kind", "usual"}, {"params", {{"Y", 1e4}}}}}, {"X", 1e4}};
  REQUIRE(run(density, opt).exit_code == kExitOk);
  CHECK(first_line(opt.out_dir / "density.csv") == "logx,ratio");
  const json diamond = {{"experiment", "DIAMOND"},
                        {"perturbation", {{"kind", "random_sign"}, {"params", {{"n_max", 10}}}}},
                        {"seed", 1},
                        {"logY_max", 10}};
  REQUIRE(run(diamond, opt).exit_code == kExitOk);
  CHECK(first_line(opt.out_dir / "diamond.csv") == "logY,partial_integral");
  const json smooth = {{"experiment", "SMOOTH"},
                       {"perturbation", {{"kind", "measure"}, {"params", {{"atoms", {{std::numbers::e, 1.0}}}}}}},
                       {"u_grid", {2.0, 3.0}}};
  const RunResult s = run(smooth, opt);
  REQUIRE(s.exit_code == kExitOk);
  CHECK(first_line(opt.out_dir / "smooth.csv") == "u,value,eps");
  CHECK(s.report["metrics"]["side_rel_max"].get<double>() < 1e-6);
  CHECK(s.report["files"].contains("smooth.csv"));
}

TEST_CASE("seed override and determinism") {
  const json config = {{"experiment", "DIAMOND"},
                       {"perturbation", {{"kind", "random_sign"}, {"params", {{"n_max", 12}}}}},
                       {"seed", 1},
                       {"logY_max", 12}};
  RunOptions a, b, c;
  a.out_dir = scratch("seed_a");
  b.out_dir = scratch("seed_b");
  c.out_dir = scratch("seed_c");
  c.seed = 2;
  const RunResult ra = run(config, a), rb = run(config, b), rc = run(config, c);
  CHECK(ra.report["files"] == rb.report["files"]);
  CHECK(ra.report["files"] != rc.report["files"]);
}

TEST_CASE("oscillating splice") {
  RunOptions opt;
  opt.out_dir = scratch("oscillate");
  const RunResult r = run({{"experiment", "OSCILLATE"}}, opt);
  REQUIRE(r.exit_code == kExitOk);
  CHECK(r.report["metrics"]["trend"] == "OSCILLATING");
  CHECK(r.report["metrics"]["liminf"].get<double>() < r.report["metrics"]["limsup"].get<double>());
}
