#include "beurling/prime_systems.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>

#include "beurling/csv.hpp"
#include "beurling/rng.hpp"

namespace beurling {

std::string to_string(Reference r) { return r == Reference::kTau ? "tau" : "pi"; }

Reference reference_from_string(const std::string& s) {
  if (s == "tau") return Reference::kTau;
  if (s == "pi") return Reference::kPi;
  throw DomainError("unknown reference: " + s);
}

// ---------------------------------------------------------------------- tau

namespace {

// (e^w - 1) / w, the tau integrand after y = e^w.
double tau_integrand(double w) {
  if (w == 0.0) return 1.0;
  return std::expm1(w) / w;
}

class TauTable {
 public:
  static constexpr double kStep = 0.125;
  static constexpr int kCells = 512;  // covers log y in [0, 64]

  TauTable() {
    values_[0] = 0.0;
    for (int k = 0; k < kCells; ++k) {
      const double a = k * kStep, b = (k + 1) * kStep;
      const double scale = std::max(1.0, values_[k] + tau_integrand(b) * kStep);
      values_[k + 1] =
          values_[k] + adaptive_simpson(tau_integrand, a, b, 1e-15 * scale).value;
    }
  }

  double operator()(double w) const {
    const double cell = std::floor(w / kStep);
    const int k = cell >= kCells ? kCells : static_cast<int>(cell);
    const double a = k * kStep;
    if (w == a) return values_[k];
    const double scale =
        std::max(1.0, values_[k] + tau_integrand(w) * (w - a));
    return values_[k] + adaptive_simpson(tau_integrand, a, w, 1e-14 * scale).value;
  }

 private:
  std::array<double, kCells + 1> values_{};
};

}  // namespace

double tau(double y) {
  if (!(y >= 1.0)) throw DomainError("tau: y must be >= 1");
  if (y == 1.0) return 0.0;
  static const TauTable table;
  return table(std::log(y));
}

// -------------------------------------------------------------------- sieve

std::vector<std::uint64_t> sieve_primes(std::uint64_t limit) {
  std::vector<std::uint64_t> primes;
  if (limit < 2) return primes;
  primes.push_back(2);
  if (limit < 3) return primes;

  // Base primes up to sqrt(limit) with a plain sieve.
  const auto root = static_cast<std::uint64_t>(std::sqrt(static_cast<double>(limit))) + 1;
  std::vector<bool> small(root + 1, true);
  std::vector<std::uint64_t> base;
  for (std::uint64_t i = 3; i <= root; i += 2) {
    if (!small[i]) continue;
    base.push_back(i);
    for (std::uint64_t j = i * i; j <= root; j += 2 * i) small[j] = false;
  }

  // Segment over odd numbers: slot k <-> lo + 2k.
  constexpr std::uint64_t kSegment = 1U << 18;
  std::vector<char> mark(kSegment);
  for (std::uint64_t lo = 3; lo <= limit; lo += 2 * kSegment) {
    const std::uint64_t hi = std::min(limit, lo + 2 * kSegment - 1);
    const std::uint64_t slots = (hi - lo) / 2 + 1;
    std::fill(mark.begin(), mark.begin() + static_cast<std::ptrdiff_t>(slots), 1);
    for (std::uint64_t p : base) {
      if (p * p > hi) break;
      std::uint64_t start = std::max(p * p, (lo + p - 1) / p * p);
      if (start % 2 == 0) start += p;
      for (std::uint64_t m = start; m <= hi; m += 2 * p) mark[(m - lo) / 2] = 0;
    }
    for (std::uint64_t k = 0; k < slots; ++k) {
      if (mark[k]) primes.push_back(lo + 2 * k);
    }
  }
  return primes;
}

// ----------------------------------------------------------- GenPrimeSystem

void GenPrimeSystem::check_growth(double bound) {
  if (!std::isfinite(truncation_Y)) return;
  const double ratio = counting(truncation_Y) / truncation_Y;
  metadata["growth_ratio"] = ratio;
  if (ratio > bound) {
    metadata["warnings"].push_back("P(Y)/Y = " + format_real(ratio) +
                                   " exceeds the o(y) surrogate bound " +
                                   format_real(bound));
  }
}

json GenPrimeSystem::to_json() const {
  json j = counting.to_json();
  j["kind"] = "custom";
  j["reference"] = to_string(reference);
  j["free"] = free;
  j["truncation_Y"] = format_real(truncation_Y);
  j["metadata"] = metadata;
  return j;
}

json Perturbation::to_json() const {
  json j = measure.to_json();
  j["reference"] = to_string(reference);
  j["horizon"] = format_real(horizon);
  j["metadata"] = metadata;
  return j;
}

GenPrimeSystem usual_primes(double Y) {
  if (!(Y >= 2.0)) throw DomainError("usual_primes: Y must be >= 2");
  if (Y > kSieveBound) {
    throw CapacityError("usual_primes: Y exceeds the sieve bound 1e9", kSieveBound);
  }
  const auto primes = sieve_primes(static_cast<std::uint64_t>(std::floor(Y)));
  std::vector<Atom> atoms;
  atoms.reserve(primes.size());
  for (std::uint64_t p : primes) atoms.push_back({static_cast<double>(p), 1.0});
  GenPrimeSystem sys{StepFunction(std::move(atoms), 0.0, std::nullopt, Y), Y,
                     true, Reference::kTau,
                     {{"kind", "usual"}, {"Y", Y}}};
  return sys;
}

Perturbation random_sign_system(double alpha, int n_max, std::uint64_t seed) {
  if (n_max < 1) throw DomainError("random_sign_system: n_max must be >= 1");
  if (!std::isfinite(alpha)) throw DomainError("random_sign_system: alpha must be finite");
  const CounterRng rng(seed);
  std::vector<Atom> atoms;
  atoms.reserve(static_cast<std::size_t>(n_max));
  int plus = 0;
  for (int n = 1; n <= n_max; ++n) {
    const int sign = rng.sign(static_cast<std::uint64_t>(n));
    plus += sign > 0;
    const double magnitude = std::exp(static_cast<double>(n) - alpha * std::log(n));
    atoms.push_back({std::exp(static_cast<double>(n)), sign * magnitude});
  }
  Perturbation p{SignedMeasure(std::move(atoms)), Reference::kTau,
                 std::exp(static_cast<double>(n_max) + 1.0),
                 {{"kind", "random_sign"},
                  {"alpha", alpha},
                  {"n_max", n_max},
                  {"seed", seed},
                  {"plus_fraction", static_cast<double>(plus) / n_max}}};
  if (!(alpha > 0.5 && alpha <= 1.0)) {
    p.metadata["warnings"].push_back("alpha outside (1/2, 1]; exploratory run");
  }
  const double growth = std::abs(p.induced(p.horizon)) / p.horizon;
  p.metadata["growth_ratio"] = growth;
  if (growth > GenPrimeSystem::kGrowthBound) {
    p.metadata["warnings"].push_back("|a(Y)|/Y exceeds the o(y) surrogate bound");
  }
  return p;
}

GenPrimeSystem block_coinflip_system(double Y, std::uint64_t seed, CoinForce force) {
  if (!(Y >= std::numbers::e)) throw DomainError("block_coinflip_system: Y must be >= e");
  if (Y > kSieveBound) {
    throw CapacityError("block_coinflip_system: Y exceeds the sieve bound", kSieveBound);
  }
  const CounterRng rng(seed);
  const auto primes = sieve_primes(static_cast<std::uint64_t>(std::floor(Y)));
  const int last_block = static_cast<int>(std::floor(std::log(Y)));
  json coins = json::array();
  std::vector<bool> heads(static_cast<std::size_t>(last_block) + 1);
  for (int n = 0; n <= last_block; ++n) {
    bool h = rng.coin(static_cast<std::uint64_t>(n));
    if (force == CoinForce::kAllHeads) h = true;
    if (force == CoinForce::kAllTails) h = false;
    heads[static_cast<std::size_t>(n)] = h;
    coins.push_back(h ? "double" : "suppress");
  }
  std::vector<Atom> atoms;
  for (std::uint64_t p : primes) {
    const auto n = static_cast<std::size_t>(std::floor(std::log(static_cast<double>(p))));
    if (heads[n]) atoms.push_back({static_cast<double>(p), 2.0});
  }
  GenPrimeSystem sys{StepFunction(std::move(atoms), 0.0, std::nullopt, Y), Y,
                     false, Reference::kPi,
                     {{"kind", "block_coinflip"},
                      {"Y", Y},
                      {"seed", seed},
                      {"blocks", coins},
                      {"last_block_truncated",
                       Y < std::exp(static_cast<double>(last_block) + 1.0)}}};
  sys.check_growth();
  return sys;
}

namespace {

GenPrimeSystem combined(const GenPrimeSystem& p, const GenPrimeSystem& p1, bool plus) {
  StepFunction c = plus ? combine_max(p.counting, p1.counting)
                        : combine_min(p.counting, p1.counting);
  GenPrimeSystem sys{std::move(c), p.truncation_Y, false, Reference::kPi,
                     {{"kind", plus ? "plus" : "minus"},
                      {"P", p.metadata},
                      {"P1", p1.metadata}}};
  return sys;
}

}  // namespace

GenPrimeSystem plus_system(const GenPrimeSystem& p, const GenPrimeSystem& p1) {
  return combined(p, p1, true);
}

GenPrimeSystem minus_system(const GenPrimeSystem& p, const GenPrimeSystem& p1) {
  return combined(p, p1, false);
}

double BoundedStep::sup_abs() const {
  std::vector<Atom> sorted(jumps);
  std::sort(sorted.begin(), sorted.end(),
            [](const Atom& a, const Atom& b) { return a.location < b.location; });
  double v = offset, sup = std::abs(offset);
  for (const Atom& a : sorted) {
    v += a.weight;
    sup = std::max(sup, std::abs(v));
  }
  return sup;
}

GenPrimeSystem perturb_bounded(const GenPrimeSystem& p, const BoundedStep& g) {
  std::vector<Atom> merged(p.counting.atoms().begin(), p.counting.atoms().end());
  merged.insert(merged.end(), g.jumps.begin(), g.jumps.end());
  std::sort(merged.begin(), merged.end(),
            [](const Atom& a, const Atom& b) { return a.location < b.location; });
  std::vector<Atom> atoms;
  for (const Atom& a : merged) {
    if (!atoms.empty() && atoms.back().location == a.location) {
      atoms.back().weight += a.weight;
    } else {
      atoms.push_back(a);
    }
  }
  std::vector<Atom> positive;
  for (const Atom& a : atoms) {
    if (a.weight < 0.0) {
      throw DomainError("perturb_bounded: P + g decreases at breakpoint " +
                        format_real(a.location));
    }
    if (a.weight > 0.0) positive.push_back(a);
  }
  GenPrimeSystem out = p;
  out.counting = StepFunction(std::move(positive), p.counting.base() + g.offset,
                              p.counting.smooth(), p.counting.horizon());
  out.free = false;
  out.metadata = {{"kind", "perturb_bounded"}, {"P", p.metadata}, {"sup_g", g.sup_abs()}};
  return out;
}

Perturbation perturbation_of(const GenPrimeSystem& p, Reference reference) {
  const StepFunction& c = p.counting;
  std::vector<Atom> atoms(c.atoms().begin(), c.atoms().end());
  std::optional<SmoothPart> smooth;
  if (reference == Reference::kTau) {
    double scale = -1.0;
    if (c.smooth()) {
      if (c.smooth()->kind() != SmoothPart::Kind::kTau) {
        throw UnsupportedError("perturbation_of: only tau-shaped smooth parts are supported");
      }
      scale += c.smooth()->scale();
    }
    if (scale != 0.0) smooth = SmoothPart::tau(scale);
  } else {
    if (!c.purely_atomic()) {
      throw UnsupportedError("perturbation_of: reference pi needs an atomic system");
    }
    if (!std::isfinite(p.truncation_Y)) {
      throw DomainError("perturbation_of: reference pi needs a finite horizon");
    }
    for (std::uint64_t q : sieve_primes(static_cast<std::uint64_t>(std::floor(p.truncation_Y)))) {
      atoms.push_back({static_cast<double>(q), -1.0});
    }
  }
  Perturbation out{SignedMeasure(std::move(atoms), smooth), reference, p.truncation_Y,
                   {{"kind", "perturbation_of"}, {"reference", to_string(reference)},
                    {"P", p.metadata}}};
  if (std::isfinite(out.horizon)) {
    const double growth = std::abs(out.induced(out.horizon)) / out.horizon;
    out.metadata["growth_ratio"] = growth;
    if (growth > GenPrimeSystem::kGrowthBound) {
      out.metadata["warnings"].push_back("|a(Y)|/Y exceeds the o(y) surrogate bound");
    }
  }
  return out;
}

GenPrimeSystem jitter_free(const GenPrimeSystem& p, std::uint64_t seed, double rel_offset) {
  if (!p.counting.purely_atomic()) {
    throw UnsupportedError("jitter_free: system must be purely atomic");
  }
  const CounterRng rng(seed);
  std::vector<Atom> atoms;
  std::uint64_t counter = 0;
  for (const Atom& a : p.counting.atoms()) {
    // Integer weights are split into separate generators, each moved on its own.
    const double copies = std::floor(a.weight);
    const bool split = copies == a.weight && copies > 1.0 && copies < 1e6;
    const int n = split ? static_cast<int>(copies) : 1;
    for (int i = 0; i < n; ++i) {
      const double u = 2.0 * rng.uniform(counter++) - 1.0;
      atoms.push_back({a.location * (1.0 + rel_offset * u), split ? 1.0 : a.weight});
    }
  }
  std::vector<double> gens;
  for (const Atom& a : atoms) {
    if (gens.size() >= 24) break;
    gens.push_back(a.location);
  }
  std::sort(gens.begin(), gens.end());
  GenPrimeSystem out = p;
  out.counting = StepFunction(std::move(atoms), p.counting.base(), std::nullopt,
                              p.counting.horizon());
  out.free = numerically_free(gens);
  out.metadata = {{"kind", "jitter_free"}, {"P", p.metadata}, {"seed", seed},
                  {"rel_offset", rel_offset}, {"checked_generators", gens.size()}};
  return out;
}

bool numerically_free(std::span<const double> generators, int max_degree, double tol) {
  std::vector<double> logs;
  for (double g : generators) {
    if (!(g > 1.0)) throw DomainError("numerically_free: generators must be > 1");
    logs.push_back(std::log(g));
  }
  std::sort(logs.begin(), logs.end());
  for (std::size_t i = 1; i < logs.size(); ++i) {
    if (logs[i] - logs[i - 1] < tol) return false;
  }
  std::vector<double> sums;
  // Nondecreasing index sequences of length 1..max_degree.
  auto recurse = [&](auto&& self, std::size_t start, int depth, double acc) -> void {
    if (depth > 0) sums.push_back(acc);
    if (depth == max_degree) return;
    for (std::size_t i = start; i < logs.size(); ++i) {
      if (sums.size() > 20'000'000) {
        throw CapacityError("numerically_free: too many exponent vectors", 0.0);
      }
      self(self, i, depth + 1, acc + logs[i]);
    }
  };
  recurse(recurse, 0, 0, 0.0);
  std::sort(sums.begin(), sums.end());
  for (std::size_t i = 1; i < sums.size(); ++i) {
    if (sums[i] - sums[i - 1] < tol) return false;
  }
  return true;
}

GenPrimeSystem alternate_systems(const GenPrimeSystem& first, const GenPrimeSystem& second,
                                 std::span<const double> edges) {
  if (!first.counting.purely_atomic() || !second.counting.purely_atomic()) {
    throw UnsupportedError("alternate_systems: inputs must be purely atomic");
  }
  if (!std::is_sorted(edges.begin(), edges.end())) {
    throw DomainError("alternate_systems: edges must be increasing");
  }
  auto block_of = [&](double y) {
    return static_cast<std::size_t>(std::upper_bound(edges.begin(), edges.end(), y) -
                                    edges.begin());
  };
  std::vector<Atom> atoms;
  for (const Atom& a : first.counting.atoms()) {
    if (block_of(a.location) % 2 == 0) atoms.push_back(a);
  }
  for (const Atom& a : second.counting.atoms()) {
    if (block_of(a.location) % 2 == 1) atoms.push_back(a);
  }
  const double horizon = std::min(first.truncation_Y, second.truncation_Y);
  std::vector<Atom> kept;
  for (const Atom& a : atoms) {
    if (a.location <= horizon) kept.push_back(a);
  }
  json e = json::array();
  for (double x : edges) e.push_back(x);
  GenPrimeSystem out{StepFunction(std::move(kept), first.counting.base(), std::nullopt, horizon),
                     horizon, false, first.reference,
                     {{"kind", "alternate"}, {"first", first.metadata},
                      {"second", second.metadata}, {"edges", e}}};
  return out;
}

// --------------------------------------------------------------------- JSON

namespace {

double horizon_param(const json& params, const char* name) {
  const std::string log_name = std::string("log") + name;
  if (params.contains(log_name)) return std::exp(params.at(log_name).get<double>());
  if (params.contains(name)) return params.at(name).get<double>();
  throw ConfigError(std::string("/params/") + name, "missing horizon (" + std::string(name) +
                                                        " or " + log_name + ")");
}

std::uint64_t required_seed(const json& j) {
  if (!j.contains("seed")) throw ConfigError("/seed", "seed is mandatory for stochastic systems");
  return j.at("seed").get<std::uint64_t>();
}

CoinForce force_param(const json& params) {
  const std::string f = params.value("force", std::string("none"));
  if (f == "none") return CoinForce::kNone;
  if (f == "heads") return CoinForce::kAllHeads;
  if (f == "tails") return CoinForce::kAllTails;
  throw ConfigError("/params/force", "expected none, heads or tails");
}

// Drops the listed generators and adds new ones with weight 1.
GenPrimeSystem edit_generators(const GenPrimeSystem& p, const std::vector<double>& remove,
                               const std::vector<double>& add) {
  std::vector<Atom> atoms;
  for (const Atom& a : p.counting.atoms()) {
    if (std::find(remove.begin(), remove.end(), a.location) == remove.end()) atoms.push_back(a);
  }
  for (double g : add) {
    if (!(g > 1.0)) throw ConfigError("/params/add", "generators must exceed 1");
    atoms.push_back({g, 1.0});
  }
  GenPrimeSystem out = p;
  out.counting = StepFunction(std::move(atoms), p.counting.base(), std::nullopt, p.counting.horizon());
  out.free = remove.empty() && add.empty() ? p.free : false;
  out.metadata["removed"] = remove;
  out.metadata["added"] = add;
  return out;
}

}  // namespace

GenPrimeSystem system_from_json(const json& j) {
  if (!j.is_object()) throw ConfigError("", "system must be an object");
  const std::string kind = j.value("kind", std::string("custom"));
  const json params = j.value("params", json::object());
  GenPrimeSystem sys;
  try {
    if (kind == "usual") {
      sys = usual_primes(horizon_param(params, "Y"));
      if (params.contains("remove") || params.contains("add")) {
        sys = edit_generators(sys, params.value("remove", std::vector<double>{}),
                              params.value("add", std::vector<double>{}));
      }
    } else if (kind == "block_coinflip") {
      const CoinForce force = force_param(params);
      const std::uint64_t seed = force == CoinForce::kNone ? required_seed(j)
                                                           : j.value("seed", std::uint64_t{0});
      sys = block_coinflip_system(horizon_param(params, "Y"), seed, force);
    } else if (kind == "plus" || kind == "minus") {
      if (!params.contains("P")) throw ConfigError("/params/P", "missing");
      if (!params.contains("P1")) throw ConfigError("/params/P1", "missing");
      const GenPrimeSystem p = system_from_json(params.at("P"));
      const GenPrimeSystem p1 = system_from_json(params.at("P1"));
      sys = kind == "plus" ? plus_system(p, p1) : minus_system(p, p1);
    } else if (kind == "alternate") {
      const GenPrimeSystem a = system_from_json(params.at("first"));
      const GenPrimeSystem b = system_from_json(params.at("second"));
      std::vector<double> edges;
      if (params.contains("log_edges")) {
        for (const json& e : params.at("log_edges")) edges.push_back(std::exp(e.get<double>()));
      } else {
        edges = params.at("edges").get<std::vector<double>>();
      }
      sys = alternate_systems(a, b, edges);
    } else if (kind == "custom") {
      const json& body = params.contains("atoms") || params.contains("smooth") ? params : j;
      sys.counting = StepFunction::from_json(body);
      sys.truncation_Y = sys.counting.horizon();
      sys.free = body.value("free", false);
      sys.metadata = {{"kind", "custom"}};
    } else if (kind == "random_sign") {
      throw UnsupportedError("random_sign describes a perturbation, not a counting function");
    } else {
      throw ConfigError("/kind", "unknown system kind '" + kind + "'");
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("/params", e.what());
  }
  if (j.contains("reference")) {
    sys.reference = reference_from_string(j.at("reference").get<std::string>());
  }
  return sys;
}

Perturbation perturbation_from_json(const json& j) {
  if (!j.is_object()) throw ConfigError("", "system must be an object");
  const std::string kind = j.value("kind", std::string("custom"));
  if (kind == "random_sign") {
    const json params = j.value("params", json::object());
    try {
      return random_sign_system(params.value("alpha", 1.0), params.at("n_max").get<int>(),
                                required_seed(j));
    } catch (const nlohmann::json::exception& e) {
      throw ConfigError("/params", e.what());
    }
  }
  if (kind == "measure") {
    const json params = j.value("params", json::object());
    Perturbation p{SignedMeasure::from_json(params),
                   reference_from_string(j.value("reference", std::string("tau"))),
                   kInfinity, {{"kind", "measure"}}};
    if (params.contains("horizon")) p.horizon = params.at("horizon").get<double>();
    return p;
  }
  const GenPrimeSystem sys = system_from_json(j);
  return perturbation_of(sys, sys.reference);
}

}  // namespace beurling
