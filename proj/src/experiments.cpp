#include "beurling/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <fstream>
#include <mutex>
#include <thread>

#include "beurling/csv.hpp"
#include "beurling/integer_lattice.hpp"
#include "beurling/smoothing.hpp"
#include "beurling/verify.hpp"

namespace beurling {

namespace fs = std::filesystem;

std::string to_string(Experiment e) {
  switch (e) {
    case Experiment::kDensity: return "DENSITY";
    case Experiment::kDiamond: return "DIAMOND";
    case Experiment::kRandomExample: return "RANDOM_EXAMPLE";
    case Experiment::kCounterexample: return "COUNTEREXAMPLE";
    case Experiment::kSmooth: return "SMOOTH";
    case Experiment::kVerify: return "VERIFY";
    case Experiment::kOscillate: return "OSCILLATE";
  }
  return "VERIFY";
}

Experiment experiment_from_string(const std::string& s) {
  std::string k;
  for (char c : s) k.push_back(c == '-' ? '_' : static_cast<char>(std::toupper(static_cast<unsigned char>(c))));
  for (Experiment e : {Experiment::kDensity, Experiment::kDiamond, Experiment::kRandomExample,
                       Experiment::kCounterexample, Experiment::kSmooth, Experiment::kVerify,
                       Experiment::kOscillate}) {
    if (to_string(e) == k) return e;
  }
  throw ConfigError("/experiment", "unknown experiment '" + s + "'");
}

fs::path default_out_dir() {
  if (const char* env = std::getenv("BEURLING_OUT_DIR"); env && *env) return env;
  return "beurling_out";
}

namespace {

// ------------------------------------------------------------ config access

class Fields {
 public:
  Fields(const json& obj, std::string base) : obj_(obj), base_(std::move(base)) {
    if (!obj_.is_object()) throw ConfigError(base_.empty() ? "/" : base_, "expected an object");
  }

  std::string path(std::string_view key) const { return base_ + "/" + std::string(key); }
  bool has(const char* key) const { return obj_.contains(key); }

  void only(std::initializer_list<std::string_view> allowed) const {
    for (auto it = obj_.begin(); it != obj_.end(); ++it) {
      if (std::find(allowed.begin(), allowed.end(), it.key()) == allowed.end()) {
        throw ConfigError(path(it.key()), "unknown field");
      }
    }
  }

  double number(const char* key, std::optional<double> def = std::nullopt) const {
    if (!obj_.contains(key)) {
      if (def) return *def;
      throw ConfigError(path(key), "required number missing");
    }
    const json& v = obj_.at(key);
    if (!v.is_number()) throw ConfigError(path(key), "expected a number");
    const double d = v.get<double>();
    if (!std::isfinite(d)) throw ConfigError(path(key), "expected a finite number");
    return d;
  }

  double positive(const char* key, std::optional<double> def = std::nullopt) const {
    const double d = number(key, def);
    if (!(d > 0.0)) throw ConfigError(path(key), "must be positive");
    return d;
  }

  long long integer(const char* key, std::optional<long long> def = std::nullopt) const {
    if (!obj_.contains(key)) {
      if (def) return *def;
      throw ConfigError(path(key), "required integer missing");
    }
    const json& v = obj_.at(key);
    if (!v.is_number_integer()) throw ConfigError(path(key), "expected an integer");
    return v.get<long long>();
  }

  std::optional<std::uint64_t> seed(const char* key) const {
    if (!obj_.contains(key)) return std::nullopt;
    const json& v = obj_.at(key);
    if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<long long>() >= 0)) {
      throw ConfigError(path(key), "expected a nonnegative integer");
    }
    return v.get<std::uint64_t>();
  }

  bool boolean(const char* key, bool def) const {
    if (!obj_.contains(key)) return def;
    if (!obj_.at(key).is_boolean()) throw ConfigError(path(key), "expected a boolean");
    return obj_.at(key).get<bool>();
  }

  std::string string(const char* key, std::optional<std::string> def = std::nullopt) const {
    if (!obj_.contains(key)) {
      if (def) return *def;
      throw ConfigError(path(key), "required string missing");
    }
    if (!obj_.at(key).is_string()) throw ConfigError(path(key), "expected a string");
    return obj_.at(key).get<std::string>();
  }

  std::vector<double> numbers(const char* key, std::optional<std::vector<double>> def = std::nullopt) const {
    if (!obj_.contains(key)) {
      if (def) return *def;
      throw ConfigError(path(key), "required list missing");
    }
    const json& v = obj_.at(key);
    if (!v.is_array()) throw ConfigError(path(key), "expected a list of numbers");
    std::vector<double> out;
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (!v[i].is_number()) throw ConfigError(path(key) + "/" + std::to_string(i), "expected a number");
      out.push_back(v[i].get<double>());
    }
    return out;
  }

  // X or logX.
  double horizon(const char* key, std::optional<double> def_log = std::nullopt) const {
    const std::string log_key = std::string("log") + key;
    if (obj_.contains(log_key)) return std::exp(number(log_key.c_str()));
    if (obj_.contains(key)) return positive(key);
    if (def_log) return std::exp(*def_log);
    throw ConfigError(path(key), "required horizon missing (" + std::string(key) + " or " + log_key + ")");
  }

  json object(const char* key) const {
    if (!obj_.contains(key)) throw ConfigError(path(key), "required object missing");
    if (!obj_.at(key).is_object()) throw ConfigError(path(key), "expected an object");
    return obj_.at(key);
  }

  json object_or_empty(const char* key) const {
    if (!obj_.contains(key)) return json::object();
    return object(key);
  }

 private:
  json obj_;
  std::string base_;
};

// Grid spec: a list, or {"from", "to", "step"}.
std::vector<double> grid(const Fields& f, const char* key, std::vector<double> def) {
  if (!f.has(key)) return def;
  const std::string p = f.path(key);
  try {
    return f.numbers(key);
  } catch (const ConfigError&) {
  }
  const Fields g(f.object(key), p);
  g.only({"from", "to", "step"});
  const double from = g.number("from"), to = g.number("to"), step = g.positive("step");
  if (to < from) throw ConfigError(p + "/to", "must not be below from");
  std::vector<double> out;
  const auto n = static_cast<long long>(std::floor((to - from) / step + 1e-9));
  for (long long i = 0; i <= n; ++i) out.push_back(from + static_cast<double>(i) * step);
  return out;
}

template <class... Extra>
void only_with_common(const Fields& f, Extra... extra) {
  static_assert(sizeof...(Extra) > 0);
  f.only({"experiment", "name", "seed", "expect", "tolerances", extra...});
}

DensityOptions density_options(const Fields& root) {
  DensityOptions opt;
  if (!root.has("tolerances")) return opt;
  const Fields t(root.object("tolerances"), "/tolerances");
  t.only({"spread_tol", "slope_tol", "x_lo", "points_per_decade"});
  opt.spread_tol = t.positive("spread_tol", opt.spread_tol);
  opt.slope_tol = t.positive("slope_tol", opt.slope_tol);
  opt.x_lo = t.positive("x_lo", opt.x_lo);
  opt.points_per_decade = static_cast<int>(t.integer("points_per_decade", opt.points_per_decade));
  if (opt.points_per_decade < 2) throw ConfigError("/tolerances/points_per_decade", "must be >= 2");
  return opt;
}

void check_system_shape(const json& j, const std::string& path) {
  const Fields f(j, path);
  if (f.has("kind")) f.string("kind");
  if (f.has("params")) f.object("params");
  if (f.has("seed")) f.seed("seed");
}

// Injects the run seed into stochastic nested descriptions.
json with_seed(json j, std::optional<std::uint64_t> seed, bool force) {
  if (!seed || !j.is_object()) return j;
  if (force || !j.contains("seed")) j["seed"] = *seed;
  if (j.contains("params") && j["params"].is_object()) {
    for (const char* k : {"P", "P1", "first", "second"}) {
      if (j["params"].contains(k)) j["params"][k] = with_seed(j["params"][k], seed, force);
    }
  }
  return j;
}

// ----------------------------------------------------------------- params

struct DensityParams {
  json system;
  double X;
  bool write_integers;
  DensityOptions opt;
};

struct DiamondParams {
  json perturbation;
  std::vector<double> Y_grid;
};

struct HolderParams {
  int n_max;
  double T, dt;
  std::vector<double> deltas;
  double fit_lo, beta_lo, beta_hi, omega_max;
  long long c_pairs;
};

struct RandomParams {
  double alpha;
  int n_max;
  std::vector<std::uint64_t> seeds;
  double eps, u_probe, gap_rel_tol, log_mid;
  std::vector<double> residual_u;
  HolderParams holder;
};

struct CounterParams {
  double logY;
  std::uint64_t seed;
  double step, gain_from, gain_to;
  bool diamond;
};

struct SmoothParams {
  json perturbation;
  std::vector<double> eps_list, u_grid, sigma_list;
  double u_probe;
  bool tilt0;
};

struct OscillateParams {
  double X;
  std::vector<double> log_edges;
  bool seeded;
  std::uint64_t seed;
  DensityOptions opt;
};

std::optional<std::uint64_t> effective_seed(const Fields& root, const RunOptions* options) {
  if (options && options->seed) return options->seed;
  return root.seed("seed");
}

DensityParams parse_density(const Fields& root, const RunOptions* o) {
  only_with_common(root, "system", "X", "logX", "write_integers");
  DensityParams p;
  check_system_shape(root.object("system"), "/system");
  p.system = with_seed(root.object("system"), effective_seed(root, o), o && o->seed);
  p.X = root.horizon("X");
  if (p.X < 10.0) throw ConfigError("/X", "must be at least 10");
  p.write_integers = root.boolean("write_integers", false);
  p.opt = density_options(root);
  return p;
}

DiamondParams parse_diamond(const Fields& root, const RunOptions* o) {
  only_with_common(root, "perturbation", "logY_max", "Y_grid");
  DiamondParams p;
  check_system_shape(root.object("perturbation"), "/perturbation");
  p.perturbation = with_seed(root.object("perturbation"), effective_seed(root, o), o && o->seed);
  if (root.has("Y_grid")) {
    p.Y_grid = root.numbers("Y_grid");
    if (p.Y_grid.empty()) throw ConfigError("/Y_grid", "must not be empty");
  } else {
    const double n = root.positive("logY_max");
    for (int k = 1; k <= static_cast<int>(std::floor(n + 1e-9)); ++k) p.Y_grid.push_back(std::exp(static_cast<double>(k)));
  }
  std::sort(p.Y_grid.begin(), p.Y_grid.end());
  return p;
}

std::vector<std::uint64_t> parse_seeds(const Fields& root, const RunOptions* o, const json& seeds) {
  std::vector<std::uint64_t> out;
  if (!seeds.is_null()) {
    const Fields s(seeds, "/seeds");
    s.only({"first", "count"});
    const std::uint64_t first = o && o->seed ? *o->seed : s.seed("first").value_or(0);
    const long long count = s.integer("count");
    if (count < 1) throw ConfigError("/seeds/count", "must be >= 1");
    for (long long i = 0; i < count; ++i) out.push_back(first + static_cast<std::uint64_t>(i));
    return out;
  }
  const auto seed = effective_seed(root, o);
  if (!seed) throw ConfigError("/seed", "a seed is mandatory for stochastic experiments");
  out.push_back(*seed);
  return out;
}

RandomParams parse_random(const Fields& root, const RunOptions* o) {
  only_with_common(root, "alpha", "n_max", "seeds", "eps", "u_probe", "gap_rel_tol", "log_mid",
                   "residual_u", "holder");
  RandomParams p;
  p.alpha = root.number("alpha", 1.0);
  p.n_max = static_cast<int>(root.integer("n_max", 50));
  if (p.n_max < 2) throw ConfigError("/n_max", "must be >= 2");
  p.seeds = parse_seeds(root, o, root.has("seeds") ? root.object("seeds") : json());
  p.eps = root.positive("eps", 0.1);
  p.u_probe = root.number("u_probe", 12.0);
  p.gap_rel_tol = root.positive("gap_rel_tol", 0.05);
  p.log_mid = root.positive("log_mid", std::floor(p.n_max / 2.0));
  if (p.log_mid >= p.n_max) throw ConfigError("/log_mid", "must be below n_max");
  p.residual_u = root.numbers("residual_u", std::vector<double>{5.0, 10.0, 15.0, 20.0});
  const Fields h(root.object_or_empty("holder"), "/holder");
  h.only({"n_max", "T", "dt", "delta_min", "delta_max", "n_deltas", "fit_lo", "beta_lo", "beta_hi",
          "omega_max", "c_pairs"});
  p.holder.n_max = static_cast<int>(h.integer("n_max", 200));
  p.holder.T = h.positive("T", 50.0);
  p.holder.dt = h.positive("dt", 2.5e-4);
  const double dmin = h.positive("delta_min", 1e-3), dmax = h.positive("delta_max", 1.0);
  const long long nd = h.integer("n_deltas", 16);
  if (nd < 2 || dmax <= dmin) throw ConfigError("/holder/n_deltas", "need >= 2 deltas with delta_max > delta_min");
  for (long long i = 0; i < nd; ++i) {
    p.holder.deltas.push_back(dmin * std::pow(dmax / dmin, static_cast<double>(i) / static_cast<double>(nd - 1)));
  }
  p.holder.fit_lo = h.number("fit_lo", 20.0 / p.holder.n_max);
  p.holder.beta_lo = h.number("beta_lo", 0.05);
  p.holder.beta_hi = h.number("beta_hi", 0.5);
  p.holder.omega_max = h.positive("omega_max", 0.05);
  p.holder.c_pairs = h.integer("c_pairs", 0);
  if (p.holder.dt > dmin / 4.0) throw ConfigError("/holder/dt", "must be at most delta_min / 4");
  return p;
}

CounterParams parse_counter(const Fields& root, const RunOptions* o) {
  only_with_common(root, "logY", "log_grid_step", "gain_from", "gain_to", "diamond");
  CounterParams p;
  p.logY = root.positive("logY", 20.0);
  if (p.logY < 2.0 || std::exp(p.logY) > kSieveBound) throw ConfigError("/logY", "must lie in [2, log 1e9]");
  const auto seed = effective_seed(root, o);
  if (!seed) throw ConfigError("/seed", "a seed is mandatory for stochastic experiments");
  p.seed = *seed;
  p.step = root.positive("log_grid_step", 1.0);
  p.gain_from = root.positive("gain_from", std::min(10.0, p.logY));
  p.gain_to = root.positive("gain_to", p.logY);
  if (p.gain_to > p.logY || p.gain_from > p.gain_to) throw ConfigError("/gain_to", "need gain_from <= gain_to <= logY");
  p.diamond = root.boolean("diamond", true);
  return p;
}

SmoothParams parse_smooth(const Fields& root, const RunOptions* o) {
  only_with_common(root, "perturbation", "eps_list", "u_grid", "sigma_list", "u_probe", "tilt0");
  SmoothParams p;
  check_system_shape(root.object("perturbation"), "/perturbation");
  p.perturbation = with_seed(root.object("perturbation"), effective_seed(root, o), o && o->seed);
  p.eps_list = root.numbers("eps_list", std::vector<double>{0.1});
  for (std::size_t i = 0; i < p.eps_list.size(); ++i) {
    if (!(p.eps_list[i] > 0.0)) throw ConfigError("/eps_list/" + std::to_string(i), "must be positive");
  }
  p.u_grid = grid(root, "u_grid", {2, 3, 4, 5, 6, 7, 8, 9, 10});
  p.sigma_list = root.numbers("sigma_list", std::vector<double>{1.25, 1.5, 2.0});
  for (std::size_t i = 0; i < p.sigma_list.size(); ++i) {
    if (!(p.sigma_list[i] > 1.0)) throw ConfigError("/sigma_list/" + std::to_string(i), "must exceed 1");
  }
  p.u_probe = root.number("u_probe", 10.0);
  p.tilt0 = root.boolean("tilt0", true);
  return p;
}

OscillateParams parse_oscillate(const Fields& root, const RunOptions* o) {
  only_with_common(root, "X", "logX", "log_edges", "coins");
  OscillateParams p;
  p.X = root.horizon("X", std::log(1e6));
  if (p.X > kSieveBound) throw ConfigError("/X", "exceeds the sieve bound");
  p.log_edges = root.numbers("log_edges", std::vector<double>{2.0, 4.0, 8.0, 16.0});
  if (!std::is_sorted(p.log_edges.begin(), p.log_edges.end())) throw ConfigError("/log_edges", "must be increasing");
  const std::string coins = root.string("coins", "forced");
  if (coins != "forced" && coins != "seeded") throw ConfigError("/coins", "expected forced or seeded");
  p.seeded = coins == "seeded";
  const auto seed = effective_seed(root, o);
  if (p.seeded && !seed) throw ConfigError("/seed", "a seed is mandatory for seeded coins");
  p.seed = seed.value_or(0);
  p.opt = density_options(root);
  return p;
}

void parse_expect(const Fields& root) {
  if (!root.has("expect")) return;
  const json& e = root.object("expect");
  for (auto it = e.begin(); it != e.end(); ++it) {
    const std::string p = "/expect/" + it.key();
    if (it.value().is_object()) {
      const Fields g(it.value(), p);
      g.only({"min", "max", "equals"});
      if (g.has("min")) g.number("min");
      if (g.has("max")) g.number("max");
    } else if (!it.value().is_primitive()) {
      throw ConfigError(p, "expected a value or {min, max, equals}");
    }
  }
}

Experiment parse_experiment(const Fields& root) { return experiment_from_string(root.string("experiment")); }

void parse_all(const json& config, const RunOptions* o) {
  const Fields root(config, "");
  const Experiment e = parse_experiment(root);
  switch (e) {
    case Experiment::kDensity: parse_density(root, o); break;
    case Experiment::kDiamond: parse_diamond(root, o); break;
    case Experiment::kRandomExample: parse_random(root, o); break;
    case Experiment::kCounterexample: parse_counter(root, o); break;
    case Experiment::kSmooth: parse_smooth(root, o); break;
    case Experiment::kVerify: root.only({"experiment", "name", "seed", "expect", "tolerances"}); break;
    case Experiment::kOscillate: parse_oscillate(root, o); break;
  }
  parse_expect(root);
}

// ------------------------------------------------------------------ output

class Outputs {
 public:
  explicit Outputs(fs::path dir) : dir_(std::move(dir)) { fs::create_directories(dir_); }

  std::ofstream open(const std::string& name) {
    const fs::path p = dir_ / name;
    std::ofstream out(p, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + p.string());
    files_.push_back(p);
    return out;
  }

  const std::vector<fs::path>& files() const { return files_; }

 private:
  fs::path dir_;
  std::vector<fs::path> files_;
};

// Wraps constructor-level domain errors from nested descriptions.
template <class F>
auto at_path(const std::string& path, F&& f) {
  try {
    return f();
  } catch (const ConfigError& e) {
    throw ConfigError(path + e.path(), e.what());
  } catch (const DomainError& e) {
    throw ConfigError(path, e.what());
  } catch (const UnsupportedError& e) {
    throw ConfigError(path, e.what());
  }
}

// --------------------------------------------------------------- experiments

json run_density(const DensityParams& p, Outputs& out) {
  const GenPrimeSystem sys = at_path("/system", [&] { return system_from_json(p.system); });
  const IntegerMultiset n = generate(sys, p.X);
  const DensityReport r = density_estimate(n, p.opt);
  {
    auto f = out.open("density.csv");
    CsvWriter w(f, {"logx", "ratio"});
    for (std::size_t i = 0; i < r.log_x.size(); ++i) {
      w.cell(r.log_x[i]).cell(r.ratio[i]);
      w.end_row();
    }
  }
  if (p.write_integers) {
    auto f = out.open("integers.csv");
    n.write_csv(f);
  }
  json metrics = {{"estimate", r.estimate},
                  {"trend", to_string(r.trend)},
                  {"liminf", r.liminf},
                  {"limsup", r.limsup},
                  {"N_X", n.count(p.X)}};
  if (sys.metadata.contains("removed") || sys.metadata.contains("added")) {
    const auto removed = sys.metadata.value("removed", std::vector<double>{});
    const auto added = sys.metadata.value("added", std::vector<double>{});
    const double d = euler_density(removed, added);
    metrics["euler_density"] = d;
    metrics["euler_gap"] = std::abs(r.estimate - d);
  }
  return {{"metrics", metrics}, {"density", r.to_json()}, {"system", sys.metadata}};
}

json run_diamond(const DiamondParams& p, Outputs& out) {
  const Perturbation a = at_path("/perturbation", [&] { return perturbation_from_json(p.perturbation); });
  const DiamondReport r = diamond_integral(a, p.Y_grid);
  {
    auto f = out.open("diamond.csv");
    CsvWriter w(f, {"logY", "partial_integral"});
    for (const DiamondPoint& pt : r.points) {
      w.cell(std::log(pt.Y)).cell(pt.value);
      w.end_row();
    }
  }
  json metrics = {{"trend", to_string(r.trend)}, {"slope", r.slope}, {"final", r.points.back().value}};
  const std::size_t N = r.blocks.size();
  if (N >= 2) {
    const double mid = r.blocks[N / 2 - 1], top = r.blocks[N - 1];
    metrics["half_growth"] = mid > 0.0 ? (top - mid) / mid : 0.0;
  }
  return {{"metrics", metrics}, {"diamond", r.to_json()}, {"perturbation", a.metadata}};
}

struct SeedResult {
  std::uint64_t seed;
  DiamondReport diamond;
  double diamond_ratio;
  DensityProbe density;
  ModulusEstimate modulus;
  std::vector<double> residual;
  std::optional<CModulusReport> c_modulus;
};

SeedResult run_seed(const RandomParams& p, std::uint64_t seed) {
  SeedResult r;
  r.seed = seed;
  const Perturbation a = random_sign_system(p.alpha, p.n_max, seed);
  std::vector<double> grid;
  for (int k = 1; k <= p.n_max; ++k) grid.push_back(std::exp(static_cast<double>(k)));
  r.diamond = diamond_integral(a, grid);
  {
    const double i_mid = r.diamond.blocks[static_cast<std::size_t>(p.log_mid) - 1];
    const double i_top = r.diamond.blocks.back();
    r.diamond_ratio = i_mid > 0.0 ? (i_top - i_mid) / i_mid : 0.0;
  }
  r.density = density_via_C1(a, p.eps, p.u_probe, DensityRoute::kFourier);
  if (!p.residual_u.empty()) r.residual = theorem2_residual(a, p.residual_u);
  const Perturbation h = random_sign_system(p.alpha, p.holder.n_max, seed);
  const LineSamples L = sample_line(h, LineWhich::kA, 1.0, p.holder.T, p.holder.dt);
  r.modulus = holder_modulus(L, p.holder.deltas, {64, p.holder.fit_lo});
  if (p.holder.c_pairs > 0) {
    const double sig[] = {1.0, 1.5};
    r.c_modulus = c_modulus_bound_check(h, sig, static_cast<std::size_t>(p.holder.c_pairs), r.modulus,
                                        p.holder.T, seed);
  }
  return r;
}

json run_random(const RandomParams& p, int threads, Outputs& out) {
  std::vector<std::optional<SeedResult>> results(p.seeds.size());
  std::vector<std::exception_ptr> errors(p.seeds.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < p.seeds.size(); i = next++) {
      try {
        results[i] = run_seed(p, p.seeds[i]);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const int n_threads = std::max(1, std::min<int>(threads, static_cast<int>(p.seeds.size())));
  std::vector<std::thread> pool;
  for (int t = 1; t < n_threads; ++t) pool.emplace_back(worker);
  worker();
  for (std::thread& t : pool) t.join();
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }

  std::size_t log_div = 0, gap_ok = 0, holder_ok = 0;
  double ratio_min = kInfinity;
  json per_seed = json::array();
  auto seeds_csv = out.open("seeds.csv");
  CsvWriter ws(seeds_csv, {"seed", "diamond_trend", "diamond_ratio", "gap_rel", "beta_hat", "omega_min"});
  auto mod_csv = out.open("modulus.csv");
  CsvWriter wm(mod_csv, {"seed", "delta", "omega"});
  auto dia_csv = out.open("diamond.csv");
  CsvWriter wd(dia_csv, {"seed", "logY", "partial_integral"});
  auto res_csv = out.open("residual.csv");
  CsvWriter wr(res_csv, {"seed", "u", "residual"});
  for (const auto& opt : results) {
    const SeedResult& r = *opt;
    const double gap_rel = r.density.gap / std::abs(r.density.reference_c1);
    const bool is_log = r.diamond.trend == DiamondTrend::kLogDivergent;
    const bool gap_pass = gap_rel < p.gap_rel_tol;
    const bool holder_pass = r.modulus.beta_hat > p.holder.beta_lo && r.modulus.beta_hat < p.holder.beta_hi &&
                             r.modulus.omega.front() < p.holder.omega_max;
    log_div += is_log;
    gap_ok += gap_pass;
    holder_ok += holder_pass;
    ratio_min = std::min(ratio_min, r.diamond_ratio);
    ws.cell(static_cast<long long>(r.seed)).cell(to_string(r.diamond.trend)).cell(r.diamond_ratio)
        .cell(gap_rel).cell(r.modulus.beta_hat).cell(r.modulus.omega.front());
    ws.end_row();
    for (std::size_t i = 0; i < r.modulus.deltas.size(); ++i) {
      wm.cell(static_cast<long long>(r.seed)).cell(r.modulus.deltas[i]).cell(r.modulus.omega[i]);
      wm.end_row();
    }
    for (std::size_t n = 0; n < r.diamond.blocks.size(); ++n) {
      wd.cell(static_cast<long long>(r.seed)).cell(static_cast<double>(n + 1)).cell(r.diamond.blocks[n]);
      wd.end_row();
    }
    for (std::size_t i = 0; i < r.residual.size(); ++i) {
      wr.cell(static_cast<long long>(r.seed)).cell(p.residual_u[i]).cell(r.residual[i]);
      wr.end_row();
    }
    json s = {{"seed", r.seed},
              {"diamond_trend", to_string(r.diamond.trend)},
              {"diamond_slope", r.diamond.slope},
              {"diamond_ratio", r.diamond_ratio},
              {"density", r.density.to_json()},
              {"gap_rel", gap_rel},
              {"modulus", r.modulus.to_json()},
              {"residual", r.residual}};
    if (r.c_modulus) s["c_modulus"] = r.c_modulus->to_json();
    per_seed.push_back(s);
  }
  const auto n = static_cast<double>(results.size());
  json metrics = {{"seeds", results.size()},
                  {"log_divergent_fraction", static_cast<double>(log_div) / n},
                  {"diamond_ratio_min", ratio_min},
                  {"gap_fraction", static_cast<double>(gap_ok) / n},
                  {"holder_fraction", static_cast<double>(holder_ok) / n}};
  return {{"metrics", metrics}, {"seeds", per_seed}};
}

json run_counter(const CounterParams& p, Outputs& out) {
  const double Y = std::exp(p.logY);
  std::vector<double> grid;
  for (double l = p.step; l <= p.logY + 1e-9; l += p.step) grid.push_back(std::exp(std::min(l, p.logY)));
  std::vector<PartialDensityPoint> plus, minus;
  json coins, diamond_json;
  std::string plus_trend;
  {
    const GenPrimeSystem p1 = usual_primes(Y);
    GenPrimeSystem sys = block_coinflip_system(Y, p.seed);
    coins = sys.metadata;
    const GenPrimeSystem pp = plus_system(sys, p1);
    const GenPrimeSystem pm = minus_system(sys, p1);
    sys = GenPrimeSystem{};
    plus = partial_density_product(pp, p1, grid);
    minus = partial_density_product(pm, p1, grid);
    if (p.diamond) {
      const DiamondReport d = diamond_integral(perturbation_of(pp, Reference::kPi), grid);
      plus_trend = to_string(d.trend);
      diamond_json = d.to_json();
    }
  }
  {
    auto f = out.open("counterexample.csv");
    CsvWriter w(f, {"logY", "plus_value", "plus_gap", "minus_value", "minus_gap"});
    for (std::size_t i = 0; i < grid.size(); ++i) {
      w.cell(std::log(grid[i])).cell(plus[i].value).cell(plus[i].gap()).cell(minus[i].value).cell(minus[i].gap());
      w.end_row();
    }
  }
  bool increasing = true;
  for (std::size_t i = 1; i < plus.size(); ++i) increasing = increasing && plus[i].gap() > plus[i - 1].gap();
  auto at = [&](const std::vector<PartialDensityPoint>& v, double logy) {
    std::size_t best = 0;
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (std::abs(std::log(v[i].Y) - logy) < std::abs(std::log(v[best].Y) - logy)) best = i;
    }
    return v[best];
  };
  json metrics = {{"plus_strictly_increasing", increasing},
                  {"plus_gain", at(plus, p.gain_to).gap() - at(plus, p.gain_from).gap()},
                  {"plus_final_value", plus.back().value},
                  {"plus_final_gap", plus.back().gap()},
                  {"minus_ratio", minus.back().value / minus.front().value},
                  {"minus_final_value", minus.back().value}};
  if (p.diamond) metrics["plus_diamond_trend"] = plus_trend;
  json rows = json::array();
  for (std::size_t i = 0; i < grid.size(); ++i) {
    rows.push_back({{"Y", grid[i]},
                    {"plus_value", plus[i].value},
                    {"plus_gap", plus[i].gap()},
                    {"minus_value", minus[i].value},
                    {"minus_gap", minus[i].gap()}});
  }
  json report = {{"metrics", metrics}, {"rows", rows}, {"coins", coins}};
  if (p.diamond) report["plus_diamond"] = diamond_json;
  return report;
}

json run_smooth(const SmoothParams& p, Outputs& out) {
  const Perturbation a = at_path("/perturbation", [&] { return perturbation_from_json(p.perturbation); });
  double u_max = p.u_probe;
  for (double u : p.u_grid) u_max = std::max(u_max, u);
  double eps_max = 0.0;
  for (double e : p.eps_list) eps_max = std::max(eps_max, e);
  std::optional<StepFunction> n;
  std::string conv_note;
  try {
    n = associated_counting(a, std::exp(u_max + kKernelWidth * eps_max));
  } catch (const UnsupportedError& e) {
    conv_note = e.what();
  }
  json sides = json::array();
  double side_rel_max = 0.0;
  auto smooth_csv = out.open("smooth.csv");
  CsvWriter ws(smooth_csv, {"u", "value", "eps"});
  auto sides_csv = out.open("sides.csv");
  CsvWriter wsd(sides_csv, {"u", "eps", "sigma", "fourier", "convolution", "rel_diff"});
  for (double eps : p.eps_list) {
    if (n) {
      const SmoothedCounting c1 = smooth_counting(*n, eps, p.u_grid, 1.0);
      for (std::size_t i = 0; i < p.u_grid.size(); ++i) {
        ws.cell(p.u_grid[i]).cell(c1.values[i]).cell(eps);
        ws.end_row();
      }
    }
    for (double sigma : p.sigma_list) {
      const SmoothedCounting f = fourier_counting(a, sigma, eps, p.u_grid);
      std::optional<SmoothedCounting> c;
      if (n) c = smooth_counting(*n, eps, p.u_grid, sigma);
      for (std::size_t i = 0; i < p.u_grid.size(); ++i) {
        wsd.cell(p.u_grid[i]).cell(eps).cell(sigma).cell(f.values[i]);
        if (c) {
          const double rel = std::abs(f.values[i] - c->values[i]) / std::abs(c->values[i]);
          side_rel_max = std::max(side_rel_max, rel);
          wsd.cell(c->values[i]).cell(rel);
        } else {
          wsd.cell("").cell("");
        }
        wsd.end_row();
      }
    }
  }
  json tilt0 = json::array();
  if (n && p.tilt0) {
    const SmoothedCounting t0 = smooth_counting(*n, p.eps_list.front(), p.u_grid, 0.0);
    tilt0 = t0.values;
  }
  const double eps0 = p.eps_list.front();
  const FourierDerivative d = fourier_derivative(a, eps0, p.u_grid);
  {
    auto f = out.open("derivative.csv");
    CsvWriter w(f, {"u", "value"});
    for (std::size_t i = 0; i < d.u.size(); ++i) {
      w.cell(d.u[i]).cell(d.values[i]);
      w.end_row();
    }
  }
  const DensityProbe probe = density_via_C1(a, eps0, p.u_probe);
  json metrics = {{"c1", d.c1},
                  {"mass", d.mass},
                  {"mass_error", std::abs(d.mass - d.c1)},
                  {"density_estimate", probe.estimate},
                  {"density_gap", probe.gap}};
  if (n) metrics["side_rel_max"] = side_rel_max;
  json report = {{"metrics", metrics}, {"density", probe.to_json()}, {"tilt0_literal", tilt0}};
  if (!conv_note.empty()) report["convolution_skipped"] = conv_note;
  return report;
}

json run_verify(Outputs& out) {
  const VerifyReport r = run_invariant_suite();
  {
    auto f = out.open("verify.csv");
    CsvWriter w(f, {"property", "passed", "detail"});
    for (const PropertyResult& x : r.results) {
      w.cell(x.name).cell(x.passed ? "true" : "false").cell(x.detail);
      w.end_row();
    }
  }
  json metrics = {{"passed", r.passed()}, {"first_failure", r.first_failure()}};
  return {{"metrics", metrics}, {"verify", r.to_json()}};
}

json run_oscillate(const OscillateParams& p, Outputs& out) {
  std::vector<double> edges;
  for (double l : p.log_edges) edges.push_back(std::exp(l));
  GenPrimeSystem spliced;
  {
    const GenPrimeSystem p1 = usual_primes(p.X);
    const GenPrimeSystem heads =
        block_coinflip_system(p.X, p.seed, p.seeded ? CoinForce::kNone : CoinForce::kAllHeads);
    const GenPrimeSystem tails =
        block_coinflip_system(p.X, p.seed, p.seeded ? CoinForce::kNone : CoinForce::kAllTails);
    spliced = alternate_systems(plus_system(heads, p1), minus_system(tails, p1), edges);
  }
  const IntegerMultiset n = generate(spliced, p.X);
  const DensityReport r = density_estimate(n, p.opt);
  {
    auto f = out.open("density.csv");
    CsvWriter w(f, {"logx", "ratio"});
    for (std::size_t i = 0; i < r.log_x.size(); ++i) {
      w.cell(r.log_x[i]).cell(r.ratio[i]);
      w.end_row();
    }
  }
  json metrics = {{"trend", to_string(r.trend)},
                  {"liminf", r.liminf},
                  {"limsup", r.limsup},
                  {"estimate", r.estimate}};
  return {{"metrics", metrics}, {"density", r.to_json()}, {"system", spliced.metadata}};
}

// ------------------------------------------------------------------- gates

json evaluate_gates(const json& expect, const json& metrics, bool& all_pass) {
  json gates = json::array();
  all_pass = true;
  for (auto it = expect.begin(); it != expect.end(); ++it) {
    if (!metrics.contains(it.key())) {
      throw ConfigError("/expect/" + it.key(), "no such metric for this experiment");
    }
    const json& m = metrics.at(it.key());
    const json& want = it.value();
    bool pass = true;
    if (want.is_object()) {
      if (want.contains("min")) pass = pass && m.is_number() && m.get<double>() >= want["min"].get<double>();
      if (want.contains("max")) pass = pass && m.is_number() && m.get<double>() <= want["max"].get<double>();
      if (want.contains("equals")) pass = pass && m == want["equals"];
    } else {
      pass = m == want;
    }
    all_pass = all_pass && pass;
    gates.push_back({{"metric", it.key()}, {"expected", want}, {"actual", m}, {"pass", pass}});
  }
  return gates;
}

}  // namespace

void validate_config(const json& config) { parse_all(config, nullptr); }

RunResult run(const json& config, const RunOptions& options) {
  RunResult result;
  try {
    parse_all(config, &options);
    const Fields root(config, "");
    const Experiment e = parse_experiment(root);
    Outputs out(options.out_dir);
    json body;
    switch (e) {
      case Experiment::kDensity: body = run_density(parse_density(root, &options), out); break;
      case Experiment::kDiamond: body = run_diamond(parse_diamond(root, &options), out); break;
      case Experiment::kRandomExample:
        body = run_random(parse_random(root, &options), options.threads, out);
        break;
      case Experiment::kCounterexample: body = run_counter(parse_counter(root, &options), out); break;
      case Experiment::kSmooth: body = run_smooth(parse_smooth(root, &options), out); break;
      case Experiment::kVerify: body = run_verify(out); break;
      case Experiment::kOscillate: body = run_oscillate(parse_oscillate(root, &options), out); break;
    }
    json report = {{"experiment", to_string(e)}, {"config", config}};
    if (options.seed) report["seed_override"] = *options.seed;
    for (auto it = body.begin(); it != body.end(); ++it) report[it.key()] = it.value();
    bool pass = true;
    if (config.contains("expect")) report["gates"] = evaluate_gates(config.at("expect"), report["metrics"], pass);
    if (e == Experiment::kVerify && !report["metrics"]["passed"].get<bool>()) pass = false;
    json digests = json::object();
    for (const fs::path& f : out.files()) digests[f.filename().string()] = file_digest(f);
    report["files"] = digests;
    {
      auto f = out.open("report.json");
      f << report.dump(2) << '\n';
    }
    result.files = out.files();
    result.report = std::move(report);
    if (!pass) {
      result.exit_code = kExitAssertion;
      result.message = e == Experiment::kVerify ? "property violated: " + result.report["metrics"]["first_failure"].get<std::string>()
                                                : "expectation gate failed";
    }
  } catch (const ConfigError& e) {
    result.exit_code = kExitConfig;
    result.message = std::string("config error at ") + (e.path().empty() ? "/" : e.path()) + ": " + e.what();
  } catch (const CapacityError& e) {
    result.exit_code = kExitCapacity;
    result.message = std::string("capacity: ") + e.what();
  } catch (const DomainError& e) {
    result.exit_code = kExitConfig;
    result.message = std::string("invalid parameters: ") + e.what();
  } catch (const UnsupportedError& e) {
    result.exit_code = kExitConfig;
    result.message = std::string("unsupported: ") + e.what();
  } catch (const std::exception& e) {
    result.exit_code = kExitAssertion;
    result.message = std::string("numerical failure: ") + e.what();
  }
  return result;
}

}  // namespace beurling
