#include <cstdio>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "beurling/errors.hpp"
#include "beurling/experiments.hpp"

namespace {

struct Args {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
  int threads = 1;
};

beurling::json load_config(const std::string& path, beurling::Experiment e) {
  if (path.empty()) return {{"experiment", beurling::to_string(e)}};
  std::ifstream in(path);
  if (!in) throw beurling::ConfigError("/", "cannot open " + path);
  beurling::json j;
  try {
    j = beurling::json::parse(in);
  } catch (const beurling::json::parse_error& err) {
    throw beurling::ConfigError("/", std::string("malformed JSON: ") + err.what());
  }
  if (!j.is_object()) throw beurling::ConfigError("/", "expected an object");
  if (!j.contains("experiment")) j["experiment"] = beurling::to_string(e);
  if (beurling::experiment_from_string(j["experiment"].get<std::string>()) != e) {
    throw beurling::ConfigError("/experiment", "does not match the subcommand");
  }
  return j;
}

int execute(beurling::Experiment e, const Args& a) {
  beurling::json config;
  try {
    config = load_config(a.config, e);
  } catch (const beurling::ConfigError& err) {
    std::cerr << "config error at " << err.path() << ": " << err.what() << '\n';
    return beurling::kExitConfig;
  }
  beurling::RunOptions opt;
  opt.out_dir = a.out.empty() ? beurling::default_out_dir() : std::filesystem::path(a.out);
  opt.seed = a.seed;
  opt.threads = a.threads;
  const beurling::RunResult r = beurling::run(config, opt);
  if (r.report.contains("metrics")) std::cout << r.report["metrics"].dump(2) << '\n';
  if (!r.message.empty()) std::cerr << r.message << '\n';
  if (r.exit_code == beurling::kExitOk || r.exit_code == beurling::kExitAssertion) {
    std::cerr << "outputs in " << opt.out_dir.string() << '\n';
  }
  return r.exit_code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Numerical laboratory for generalized prime systems"};
  app.require_subcommand(1);
  const std::pair<const char*, beurling::Experiment> commands[] = {
      {"density", beurling::Experiment::kDensity},
      {"diamond", beurling::Experiment::kDiamond},
      {"random-example", beurling::Experiment::kRandomExample},
      {"counterexample", beurling::Experiment::kCounterexample},
      {"smooth", beurling::Experiment::kSmooth},
      {"verify", beurling::Experiment::kVerify},
      {"oscillate", beurling::Experiment::kOscillate},
  };
  Args args;
  std::optional<beurling::Experiment> chosen;
  for (const auto& [name, e] : commands) {
    CLI::App* sub = app.add_subcommand(name, "Run the " + beurling::to_string(e) + " experiment");
    sub->add_option("--config", args.config, "JSON configuration file");
    sub->add_option("--seed", args.seed, "Seed, overrides the configuration");
    sub->add_option("--out", args.out, "Output directory (default $BEURLING_OUT_DIR or ./beurling_out)");
    sub->add_option("--threads", args.threads, "Worker threads")->check(CLI::PositiveNumber);
    sub->callback([&chosen, e = e] { chosen = e; });
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& err) {
    const int code = app.exit(err);
    return code == 0 ? 0 : beurling::kExitConfig;
  }
  return execute(*chosen, args);
}
