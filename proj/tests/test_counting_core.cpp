#include <doctest.h>

#include <cmath>
#include <numbers>

#include "beurling/errors.hpp"
#include "beurling/prime_systems.hpp"
#include "beurling/quadrature.hpp"
#include "beurling/step_function.hpp"

using namespace beurling;

namespace {

// tau(y) = sum_k L^k / (k k!), L = log y.
double tau_series(double y) {
  const double L = std::log(y);
  double term = 1.0, sum = 0.0;
  for (int k = 1; k < 400; ++k) {
    term *= L / k;
    sum += term / k;
    if (term / k < 1e-18 * sum) break;
  }
  return sum;
}

double tau_gauss(double y) {
  // integral over w in [0, log y] of (e^w - 1) / w
  const GaussRule& g = gauss_legendre(16);
  const double L = std::log(y);
  const int panels = 64;
  double sum = 0.0;
  for (int p = 0; p < panels; ++p) {
    const double a = L * p / panels, b = L * (p + 1) / panels;
    for (std::size_t i = 0; i < g.nodes.size(); ++i) {
      const double w = 0.5 * (a + b) + 0.5 * (b - a) * g.nodes[i];
      sum += 0.5 * (b - a) * g.weights[i] * std::expm1(w) / w;
    }
  }
  return sum;
}

}  // namespace

TEST_CASE("step function evaluation is right-continuous") {
  const StepFunction f({{2.0, 1.0}});
  CHECK(f(1.5) == 0.0);
  CHECK(f(2.0) == 1.0);
  CHECK(f.eval_left(2.0) == 0.0);
  CHECK_THROWS_AS(f(0.5), DomainError);
}

TEST_CASE("pi truncated at 10") {
  const StepFunction pi = usual_primes(10.0).counting;
  CHECK(pi(10.0) == 4.0);
  CHECK(pi(6.9) == 3.0);
}

TEST_CASE("equal locations merge and weights must be positive") {
  const StepFunction f({{3.0, 1.0}, {3.0, 2.0}, {2.0, 1.0}});
  REQUIRE(f.atoms().size() == 2);
  CHECK(f.atoms()[1].weight == 3.0);
  CHECK_THROWS_AS(StepFunction({{2.0, -1.0}}), DomainError);
  CHECK_THROWS_AS(StepFunction({{0.5, 1.0}}), DomainError);
}

TEST_CASE("ramps smooth part") {
  const StepFunction n(std::vector<Atom>{}, 1.0, SmoothPart::ramps({{1.0, 1.0}}));
  CHECK(n(1.0) == doctest::Approx(1.0));
  CHECK(n(7.5) == doctest::Approx(7.5));
}

TEST_CASE("stieltjes sums") {
  const SignedMeasure e({{std::numbers::e, 1.0}});
  CHECK(stieltjes([](double y) { return 1.0 / y; }, e, 1.0, 10.0) == doctest::Approx(std::exp(-1.0)).epsilon(1e-15));
  const SignedMeasure two({{2.0, 1.0}, {3.0, 1.0}});
  CHECK(stieltjes([](double) { return 1.0; }, two, 1.0, 10.0) == 2.0);
  const SignedMeasure pi({{2.0, 1.0}, {3.0, 1.0}, {5.0, 1.0}, {7.0, 1.0}});
  const double oracle = 1.0 / 4 + 1.0 / 9 + 1.0 / 25 + 1.0 / 49;
  CHECK(stieltjes([](double y) { return 1.0 / (y * y); }, pi, 1.0, 10.0) == doctest::Approx(oracle).epsilon(1e-15));
  CHECK_THROWS_AS(stieltjes([](double) { return std::nan(""); }, pi, 1.0, 10.0), EvaluationError);
}

TEST_CASE("stieltjes against a tau smooth part") {
  // d tau(y) = (1 - 1/y) / log y dy, so the integral of log y / (1 - 1/y) is the length.
  const SignedMeasure m(std::vector<Atom>{}, SmoothPart::tau(1.0));
  const double v = stieltjes([](double y) { return std::log(y) / (1.0 - 1.0 / y); }, m, 2.0, 20.0);
  CHECK(v == doctest::Approx(18.0).epsilon(1e-9));
}

TEST_CASE("combine_max and combine_min") {
  const StepFunction p({{2.0, 1.0}, {3.0, 1.0}});
  const StepFunction g({{2.5, 1.0}});
  const StepFunction hi = combine_max(p, g), lo = combine_min(p, g);
  for (double y = 1.0; y < 6.0; y += 0.05) {
    CHECK(hi(y) == std::max(p(y), g(y)));
    CHECK(lo(y) == std::min(p(y), g(y)));
  }
  CHECK(hi(2.7) == 1.0);
  CHECK(hi(3.0) == 2.0);
  const StepFunction same = combine_max(p, p);
  CHECK(same.atoms().size() == p.atoms().size());
  CHECK_THROWS_AS(combine_max(StepFunction({{2.0, 1.0}}, 0.0, std::nullopt, 10.0),
                              StepFunction({{2.0, 1.0}}, 0.0, std::nullopt, 20.0)),
                  DomainError);
}

TEST_CASE("tau against its series and an independent rule") {
  for (double y : {1.0001, 1.5, std::numbers::e, 10.0, 1e3, 1e8, 1e20}) {
    CHECK(tau(y) == doctest::Approx(tau_series(y)).epsilon(1e-13));
  }
  CHECK(tau(std::numbers::e) == doctest::Approx(tau_gauss(std::numbers::e)).epsilon(1e-8));
  CHECK(tau(1.0) == 0.0);
}

TEST_CASE("json round trip") {
  const StepFunction f({{2.0, 1.0}, {4.5, 2.0}}, 1.0, SmoothPart::ramps({{3.0, 0.5}}), 100.0);
  const StepFunction g = StepFunction::from_json(f.to_json());
  for (double y : {1.0, 2.0, 3.5, 4.5, 99.0}) CHECK(g(y) == f(y));
  CHECK(g.horizon() == 100.0);
}

TEST_CASE("adaptive simpson reports tolerance failure") {
  CHECK(integrate_or_throw([](double x) { return std::exp(x); }, 0.0, 1.0) ==
        doctest::Approx(std::numbers::e - 1.0).epsilon(1e-12));
  CHECK_THROWS_AS(integrate_or_throw([](double x) { return 1.0 / x; }, 0.0, 1.0, 1e-12, 8), ToleranceError);
}
