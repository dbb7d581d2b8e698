#include <doctest.h>

#include <cmath>
#include <map>
#include <numbers>

#include "beurling/errors.hpp"
#include "beurling/integer_lattice.hpp"
#include "beurling/rng.hpp"

using namespace beurling;

namespace {

// Brute-force factorization counts: every exponent vector with product <= X.
std::map<long long, double> brute_counts(const std::vector<double>& gens, double X) {
  std::map<long long, double> out;
  std::vector<int> e(gens.size(), 0);
  while (true) {
    double v = 1.0;
    for (std::size_t i = 0; i < gens.size(); ++i) v *= std::pow(gens[i], e[i]);
    if (v <= X * (1 + 1e-12)) out[std::llround(v * 1e6)] += 1.0;
    std::size_t i = 0;
    for (; i < gens.size(); ++i) {
      ++e[i];
      double w = 1.0;
      for (std::size_t j = 0; j < gens.size(); ++j) w *= std::pow(gens[j], e[j]);
      if (w <= X * (1 + 1e-12)) break;
      e[i] = 0;
    }
    if (i == gens.size()) break;
  }
  return out;
}

}  // namespace

TEST_CASE("small enumerations") {
  const IntegerMultiset a = generate(StepFunction({{2.0, 1.0}, {3.0, 1.0}, {5.0, 1.0}}), 10.0);
  std::vector<double> values;
  for (const LatticeEntry& e : a.entries()) {
    values.push_back(e.value);
    CHECK(e.multiplicity == 1.0);
  }
  CHECK(values == std::vector<double>{1, 2, 3, 4, 5, 6, 8, 9, 10});
  CHECK(a.count(10.0) == 9.0);

  const IntegerMultiset empty = generate(StepFunction(), 1e3);
  CHECK(empty.size() == 1);
  CHECK(empty.count(1e3) == 1.0);

  const IntegerMultiset b = generate(StepFunction({{2.0, 1.0}, {4.0, 1.0}}), 8.0);
  std::map<double, double> mult;
  for (const LatticeEntry& e : b.entries()) mult[e.value] = e.multiplicity;
  CHECK(mult[1.0] == 1.0);
  CHECK(mult[2.0] == 1.0);
  CHECK(mult[4.0] == 2.0);
  CHECK(mult[8.0] == 2.0);
  CHECK(b.count(8.0) == 6.0);
  CHECK_THROWS_AS(b.count(9.0), DomainError);
}

TEST_CASE("enumeration matches brute-force factorization counts") {
  const CounterRng rng(7);
  for (std::uint64_t trial = 0; trial < 20; ++trial) {
    std::vector<double> gens;
    for (int i = 0; i < 3; ++i) gens.push_back(1.2 + 10.0 * rng.uniform(3 * trial + i));
    std::vector<Atom> atoms;
    for (double g : gens) atoms.push_back({g, 1.0});
    const double X = 2000.0;
    const IntegerMultiset n = generate(StepFunction(atoms), X);
    const auto brute = brute_counts(gens, X);
    double total = 0.0;
    for (const auto& [k, c] : brute) total += c;
    CHECK(n.count(X) == total);
  }
}

TEST_CASE("integer weights count as repeated generators") {
  // weight 2 at 3: multiplicity of 3^e is e + 1
  const IntegerMultiset n = generate(StepFunction({{3.0, 2.0}}), 100.0);
  for (const LatticeEntry& e : n.entries()) {
    const int k = static_cast<int>(std::lround(std::log(e.value) / std::log(3.0)));
    CHECK(e.multiplicity == k + 1);
  }
}

TEST_CASE("naturals and odd numbers") {
  const IntegerMultiset n = generate(usual_primes(1e5), 1e5);
  CHECK(n.count(1e5) == 100000.0);
  CHECK(n.count(1.0) == 1.0);
  const GenPrimeSystem primes = usual_primes(1e5);
  std::vector<Atom> odd;
  for (const Atom& a : primes.counting.atoms()) {
    if (a.location != 2.0) odd.push_back(a);
  }
  const IntegerMultiset o = generate(StepFunction(odd, 0.0, std::nullopt, 1e5), 1e5);
  CHECK(o.count(1e5) == 50000.0);
  const DensityReport r = density_estimate(o);
  CHECK(r.estimate == doctest::Approx(0.5).epsilon(0.002));
  CHECK(r.trend == Trend::kConvergent);
}

TEST_CASE("density classifier") {
  const DensityReport nat = density_estimate(generate(usual_primes(1e6), 1e6));
  CHECK(std::abs(nat.estimate - 1.0) <= 0.001);
  CHECK(nat.trend == Trend::kConvergent);
  const DensityReport two = density_estimate(generate(StepFunction({{2.0, 1.0}}), 1e6));
  CHECK(two.trend == Trend::kVanishing);
  CHECK(two.estimate < 1e-3);
  const DensityReport tiny = density_estimate(generate(usual_primes(100.0), 100.0));
  CHECK(tiny.trend == Trend::kUndecided);
  CHECK_FALSE(tiny.diagnostics.empty());
}

TEST_CASE("euler density") {
  const double two[] = {2.0};
  CHECK(euler_density(two) == 0.5);
  const double twothree[] = {2.0, 3.0};
  CHECK(euler_density(twothree) == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
  const double e[] = {std::numbers::e};
  CHECK(euler_density({}, e) == doctest::Approx(1.0 / (1.0 - std::exp(-1.0))).epsilon(1e-15));
  const double bad[] = {1.0};
  CHECK_THROWS_AS(euler_density(bad), DomainError);
}

TEST_CASE("added generator density by enumeration") {
  const IntegerMultiset n = generate(
      system_from_json({{"kind", "usual"}, {"params", {{"Y", 1e6}, {"add", {std::numbers::e}}}}}), 1e6);
  const DensityReport r = density_estimate(n);
  CHECK(r.estimate == doctest::Approx(1.0 / (1.0 - std::exp(-1.0))).epsilon(0.005));
}

TEST_CASE("partial density products") {
  const GenPrimeSystem pi = usual_primes(1000.0);
  const double grid[] = {10.0, 100.0, 1000.0};
  for (const PartialDensityPoint& p : partial_density_product(pi, pi, grid)) {
    CHECK(p.value == doctest::Approx(1.0).epsilon(1e-14));
  }
  std::vector<Atom> extra(pi.counting.atoms().begin(), pi.counting.atoms().end());
  extra.push_back({std::numbers::e, 1.0});
  const GenPrimeSystem plus{StepFunction(extra, 0.0, std::nullopt, 1000.0), 1000.0};
  const auto pts = partial_density_product(plus, pi, grid);
  for (const PartialDensityPoint& p : pts) {
    CHECK(p.value == doctest::Approx(1.0 / (1.0 - std::exp(-1.0))).epsilon(1e-13));
  }
  // Direct product oracle for a doubled-prime system.
  const GenPrimeSystem heads = block_coinflip_system(1000.0, 0, CoinForce::kAllHeads);
  const double last[] = {1000.0};
  double direct = 1.0;
  for (const Atom& a : pi.counting.atoms()) direct /= 1.0 - 1.0 / a.location;
  CHECK(partial_density_product(heads, pi, last)[0].value == doctest::Approx(direct).epsilon(1e-12));
}

TEST_CASE("capacity error reports the reached horizon") {
  try {
    generate(usual_primes(1e6), 1e6, {kMergeTol, 1000});
    FAIL("expected capacity error");
  } catch (const CapacityError& e) {
    CHECK(e.reached() >= 999.0);
    CHECK(e.reached() < 1001.0);
  }
}

TEST_CASE("associated counting of the e system") {
  const Perturbation a{SignedMeasure({{std::numbers::e, 1.0}}), Reference::kTau, kInfinity, {}};
  const StepFunction n = associated_counting(a, 1e4);
  // N = N0 * sum_k delta_{e^k}: N(x) = sum_{e^k <= x} x / e^k
  for (double x : {5.0, 50.0, 5000.0}) {
    double oracle = 0.0;
    for (int k = 0; std::exp(k) <= x; ++k) oracle += x / std::exp(k);
    CHECK(n(x) == doctest::Approx(oracle).epsilon(1e-12));
  }
  const Perturbation neg{SignedMeasure({{3.0, -1.0}}), Reference::kTau, kInfinity, {}};
  CHECK_THROWS_AS(associated_counting(neg, 100.0), UnsupportedError);
}
