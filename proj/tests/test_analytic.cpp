#include <doctest.h>

#include <cmath>
#include <numbers>

#include "beurling/analytic.hpp"
#include "beurling/errors.hpp"
#include "beurling/quadrature.hpp"
#include "beurling/rng.hpp"

using namespace beurling;

namespace {

Perturbation delta_at(double p, double w = 1.0) {
  return {SignedMeasure({{p, w}}), Reference::kTau, kInfinity, {}};
}

const Perturbation kZero{SignedMeasure(), Reference::kTau, kInfinity, {}};

}  // namespace

TEST_CASE("A of a single atom") {
  const Perturbation e = delta_at(std::numbers::e);
  CHECK(std::abs(A_of(e, 1.0).value - std::exp(-1.0)) < 1e-15);
  CHECK(std::abs(A_of(e, cplx(1.0, std::numbers::pi)).value + std::exp(-1.0)) < 1e-15);
  CHECK_THROWS_AS(A_of(e, cplx(0.5, 0.0)), DomainError);
}

TEST_CASE("A agrees with integration by parts") {
  // A(s) = a(Y) Y^-s + s * integral_1^Y a(y) y^(-s-1) dy for da supported in [1, Y].
  const Perturbation a = random_sign_system(1.0, 8, 5);
  const double Y = std::exp(8.5);
  for (cplx s : {cplx(1.0, 0.0), cplx(1.3, 4.0), cplx(2.0, -7.5)}) {
    cplx integral = 0.0;
    double lo = 1.0;
    for (const Atom& at : a.measure.atoms()) {
      const double c = a.induced(lo);
      integral += integrate_or_throw([&](double w) { return c * std::exp(-s * w); }, std::log(lo),
                                     std::log(at.location), 1e-13);
      lo = at.location;
    }
    integral += integrate_or_throw([&](double w) { return a.induced(lo) * std::exp(-s * w); }, std::log(lo),
                                   std::log(Y), 1e-13);
    const cplx oracle = a.induced(Y) * std::exp(-s * std::log(Y)) + s * integral;
    CHECK(std::abs(A_of(a, s).value - oracle) < 1e-8);
  }
}

TEST_CASE("B closed form and conditioning") {
  CHECK(std::abs(B_of(kZero, 2.0)) == 0.0);
  const cplx b = B_of(delta_at(std::numbers::e), 2.0);
  CHECK(std::abs(b - cplx(-std::log(1.0 - std::exp(-2.0)), 0.0)) < 1e-10);
  CHECK(b.real() == doctest::Approx(0.145413).epsilon(1e-6));
  CHECK_THROWS_AS(B_of(delta_at(1.0 + 1e-12), 1.0), ConditioningError);
}

TEST_CASE("C against the closed-form product") {
  // C(s) = prod_j (1 - e^(-s n_j))^(-w_j) for atoms at e^(n_j).
  const Perturbation a = random_sign_system(1.0, 12, 3);
  const CounterRng rng(17);
  for (std::uint64_t i = 0; i < 10; ++i) {
    const cplx s(1.0 + rng.uniform(2 * i), 30.0 * (rng.uniform(2 * i + 1) - 0.5));
    cplx log_oracle = 0.0;
    for (const Atom& at : a.measure.atoms()) {
      log_oracle += -at.weight * std::log(1.0 - std::exp(-s * std::log(at.location)));
    }
    const cplx c = C_of(a, s);
    CHECK(std::abs(c - std::exp(log_oracle)) < 1e-9 * std::abs(c));
  }
}

TEST_CASE("C and Z for the reference and the e system") {
  CHECK(std::abs(C_of(kZero, cplx(1.7, 3.0)) - 1.0) == 0.0);
  CHECK(std::abs(Z_of(kZero, 2.0) - 2.0) < 1e-15);
  CHECK(C_of(delta_at(std::numbers::e), 2.0).real() == doctest::Approx(1.0 / (1.0 - std::exp(-2.0))).epsilon(1e-13));
  CHECK_THROWS_AS(Z_of(kZero, 1.0), PoleError);
}

TEST_CASE("pi reference recovers the Euler product") {
  const Perturbation zero = perturbation_of(usual_primes(1000.0), Reference::kPi);
  const cplx s(2.0, 1.0);
  cplx prod = 1.0;
  for (std::uint64_t p : sieve_primes(1000)) prod /= 1.0 - std::pow(static_cast<double>(p), -s);
  CHECK(std::abs(Z_of(zero, s) - prod) < 1e-12 * std::abs(prod));
}

TEST_CASE("Diamond integral closed forms") {
  std::vector<double> grid;
  for (int n = 1; n <= 20; ++n) grid.push_back(std::exp(static_cast<double>(n)));
  const DiamondReport zero = diamond_integral(kZero, grid);
  for (const DiamondPoint& p : zero.points) CHECK(p.value == 0.0);
  CHECK(zero.trend == DiamondTrend::kBounded);
  const Perturbation one{SignedMeasure({{2.0, 1.0}}), Reference::kTau, kInfinity, {}};
  const DiamondReport r = diamond_integral(one, grid);
  for (const DiamondPoint& p : r.points) {
    CHECK(p.value == doctest::Approx(std::exp(-1.0) - 1.0 / p.Y).epsilon(1e-13));
  }
  CHECK(r.trend == DiamondTrend::kBounded);
}

TEST_CASE("Diamond integral against quadrature and its derivative") {
  const Perturbation a = perturbation_of(usual_primes(200.0), Reference::kTau);
  const double Y = 150.0;
  const double grid[] = {Y, Y * (1.0 + 1e-6)};
  const DiamondReport r = diamond_integral(a, grid);
  double oracle = 0.0;
  std::vector<double> cuts{std::numbers::e};
  for (const Atom& at : a.measure.atoms()) {
    if (at.location > std::numbers::e && at.location < Y) cuts.push_back(at.location);
  }
  cuts.push_back(Y);
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    auto f = [&](double w) {
      const double y = std::exp(w);
      return std::abs(a.induced(y)) / y;
    };
    const double a0 = std::log(cuts[i]), b0 = std::log(cuts[i + 1]);
    // split at a sign change of the integrand if any
    const GaussRule& g = gauss_legendre(16);
    const int panels = 400;
    for (int p = 0; p < panels; ++p) {
      const double lo = a0 + (b0 - a0) * p / panels, hi = a0 + (b0 - a0) * (p + 1) / panels;
      for (std::size_t k = 0; k < g.nodes.size(); ++k) {
        oracle += 0.5 * (hi - lo) * g.weights[k] * f(0.5 * (lo + hi) + 0.5 * (hi - lo) * g.nodes[k]);
      }
    }
  }
  CHECK(r.points[0].value == doctest::Approx(oracle).epsilon(1e-7));
  const double fd = (r.points[1].value - r.points[0].value) / (Y * 1e-6);
  CHECK(fd == doctest::Approx(std::abs(a.induced(Y)) / (Y * Y)).epsilon(1e-4));
}

TEST_CASE("random example is logarithmically divergent") {
  std::vector<double> grid;
  for (int n = 1; n <= 50; ++n) grid.push_back(std::exp(static_cast<double>(n)));
  const DiamondReport r = diamond_integral(random_sign_system(1.0, 50, 1), grid);
  CHECK(r.trend == DiamondTrend::kLogDivergent);
  for (std::size_t i = 1; i < r.blocks.size(); ++i) CHECK(r.blocks[i] >= r.blocks[i - 1]);
}

TEST_CASE("line samples and modulus") {
  const LineSamples c = sample_line(kZero, LineWhich::kC, 1.0, 2.0, 0.01);
  for (const cplx& v : c.values) CHECK(std::abs(v - 1.0) < 1e-15);
  const double deltas[] = {0.05, 0.1, 0.5};
  const ModulusEstimate m = holder_modulus(c, deltas);
  for (double w : m.omega) CHECK(w == 0.0);
  CHECK_THROWS_AS(holder_modulus(c, std::vector<double>{0.02}), ResolutionError);
  const LineSamples a = sample_line(delta_at(std::numbers::e), LineWhich::kA, 1.0, 3.0, 0.001);
  // A(1+it) = e^-1 e^-it: omega(delta) = 2 e^-1 sin(delta / 2)
  const double d2[] = {0.01, 0.03, 0.064};
  const ModulusEstimate ma = holder_modulus(a, d2);
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(ma.omega[i] == doctest::Approx(2.0 * std::exp(-1.0) * std::sin(d2[i] / 2.0)).epsilon(1e-6));
  }
  CHECK(ma.beta_hat == doctest::Approx(1.0).epsilon(0.01));
}

TEST_CASE("C modulus bound") {
  const double deltas[] = {0.01, 0.03, 0.1, 0.3, 1.0};
  const double sig[] = {1.0, 1.5};
  const LineSamples z = sample_line(kZero, LineWhich::kA, 1.0, 5.0, 0.0025);
  const CModulusReport zr = c_modulus_bound_check(kZero, sig, 200, holder_modulus(z, deltas), 5.0, 1);
  CHECK(zr.k_hat == 0.0);
  const Perturbation e = delta_at(std::numbers::e);
  const LineSamples l = sample_line(e, LineWhich::kA, 1.0, 5.0, 0.0025);
  const CModulusReport er = c_modulus_bound_check(e, sig, 400, holder_modulus(l, deltas), 5.0, 1);
  CHECK(std::isfinite(er.k_hat));
  CHECK(er.stable);
}
