#include <doctest.h>

#include <cmath>
#include <numbers>

#include "beurling/errors.hpp"
#include "beurling/integer_lattice.hpp"
#include "beurling/quadrature.hpp"
#include "beurling/smoothing.hpp"

using namespace beurling;

namespace {

const Perturbation kZero{SignedMeasure(), Reference::kTau, kInfinity, {}};

double phi(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

StepFunction n0(double horizon) {
  return StepFunction(std::vector<Atom>{}, 1.0, SmoothPart::ramps({{1.0, 1.0}}), horizon);
}

}  // namespace

TEST_CASE("kernel normalisation") {
  const double mass = integrate_or_throw([](double v) { return gauss_kernel(0.1, v); }, -2.0, 2.0, 1e-13);
  CHECK(mass == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(gamma(0.1, 0.0) == 1.0);
  CHECK_THROWS_AS(gauss_kernel(0.0, 1.0), DomainError);
}

TEST_CASE("smoothing the reference counting function") {
  const double eps = 0.1;
  const double u[] = {0.0, 0.5, 2.0, 6.0};
  const SmoothedCounting s = smooth_counting(n0(std::exp(7.0)), eps, u, 1.0);
  for (std::size_t i = 0; i < 4; ++i) {
    CHECK(std::exp(-u[i]) * s.values[i] == doctest::Approx(phi(u[i] / eps)).epsilon(1e-12));
  }
  CHECK(std::abs(std::exp(-0.5) * s.values[1] - 1.0) < 3e-7);
  CHECK_THROWS_AS(smooth_counting(n0(std::exp(5.0)), eps, u, 1.0), DomainError);
}

TEST_CASE("smoothing against direct convolution") {
  const StepFunction n({{2.0, 1.0}, {3.0, 2.0}, {7.5, 1.0}}, 1.0, SmoothPart::ramps({{4.0, 0.25}}), 1e3);
  const double eps = 0.2;
  for (double tilt : {0.0, 1.0, 1.5}) {
    for (double u : {0.3, 1.1, 2.0, 3.5}) {
      std::vector<double> cuts{-12 * eps};
      for (double b : {std::log(2.0), std::log(3.0), std::log(4.0), std::log(7.5)}) {
        if (u - b > -12 * eps && u - b < 12 * eps) cuts.push_back(u - b);
      }
      if (u > -12 * eps && u < 12 * eps) cuts.push_back(u);
      cuts.push_back(12 * eps);
      std::sort(cuts.begin(), cuts.end());
      double oracle = 0.0;
      for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
        const double xm = std::exp(u - 0.5 * (cuts[i] + cuts[i + 1]));
        if (xm < 1.0) continue;
        const double step = 1.0 + (xm >= 2.0) + 2.0 * (xm >= 3.0) + (xm >= 7.5);
        oracle += integrate_or_throw(
            [&](double v) {
              const double x = std::exp(u - v);
              return (step + 0.25 * std::max(0.0, x - 4.0)) * std::exp(tilt * v) * gauss_kernel(eps, v);
            },
            cuts[i], cuts[i + 1], 1e-11);
      }
      const double uu[] = {u};
      CHECK(smooth_counting(n, eps, uu, tilt).values[0] == doctest::Approx(oracle).epsilon(1e-9));
    }
  }
}

TEST_CASE("approximate identity away from jumps") {
  const StepFunction n({{2.0, 1.0}, {5.0, 1.0}}, 1.0, std::nullopt, 100.0);
  const double u[] = {std::log(3.2)};
  double prev = kInfinity;
  for (double eps : {0.1, 0.05, 0.025}) {
    const double err = std::abs(smooth_counting(n, eps, u, 0.0).values[0] - n(3.2));
    CHECK(err <= prev);
    prev = err;
  }
  CHECK(prev < 1e-3);
}

TEST_CASE("Fourier side equals the tilted convolution") {
  const double u[] = {0.0, 2.0, 5.0};
  const SmoothedCounting f = fourier_counting(kZero, 1.5, 0.1, u);
  const SmoothedCounting c = smooth_counting(n0(std::exp(6.0)), 0.1, u, 1.5);
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(f.values[i] == doctest::Approx(c.values[i]).epsilon(1e-6));
  }
  // u = 0: e^((sigma-1)^2 eps^2 / 2) Phi(-(sigma-1) eps)
  const double eps = 0.1;
  CHECK(f.values[0] == doctest::Approx(std::exp(0.125 * eps * eps) * phi(-0.5 * eps)).epsilon(1e-6));
  CHECK_THROWS_AS(fourier_counting(kZero, 1.0, 0.1, u), DomainError);

  const Perturbation e{SignedMeasure({{std::numbers::e, 1.0}}), Reference::kTau, kInfinity, {}};
  const double ue[] = {2.0, 4.0, 6.0};
  const StepFunction ne = associated_counting(e, std::exp(6.0 + kKernelWidth * 0.1));
  const SmoothedCounting fe = fourier_counting(e, 1.25, 0.1, ue);
  const SmoothedCounting ce = smooth_counting(ne, 0.1, ue, 1.25);
  for (std::size_t i = 0; i < 3; ++i) CHECK(fe.values[i] == doctest::Approx(ce.values[i]).epsilon(1e-6));
}

TEST_CASE("derivative of the reference is the Gaussian") {
  const double eps = 0.1;
  const double u[] = {-0.2, 0.0, 0.05, 0.3};
  const FourierDerivative d = fourier_derivative(kZero, eps, u);
  for (std::size_t i = 0; i < 4; ++i) {
    CHECK(d.values[i] == doctest::Approx(gauss_kernel(eps, u[i])).epsilon(1e-8).scale(1.0));
  }
  CHECK(std::abs(d.mass - d.c1) < 1e-8);
}

TEST_CASE("density probes") {
  const DensityProbe ref = density_via_C1(kZero, 0.1, 10.0);
  CHECK(std::abs(ref.estimate - 1.0) < 1e-6);
  CHECK(ref.gap < 1e-6);
  const Perturbation e{SignedMeasure({{std::numbers::e, 1.0}}), Reference::kTau, kInfinity, {}};
  const DensityProbe conv = density_via_C1(e, 0.1, 10.0, DensityRoute::kConvolution);
  const DensityProbe four = density_via_C1(e, 0.1, 10.0, DensityRoute::kFourier);
  CHECK(conv.estimate == doctest::Approx(four.estimate).epsilon(1e-8));
  CHECK(conv.reference_c1 == doctest::Approx(1.0 / (1.0 - std::exp(-1.0))).epsilon(1e-12));
}

TEST_CASE("residual decays") {
  const double u0[] = {3.0, 7.0};
  for (double r : theorem2_residual(kZero, u0)) CHECK(std::abs(r) < 1e-10);
  const Perturbation e{SignedMeasure({{std::numbers::e, 1.0}}), Reference::kTau, kInfinity, {}};
  const double u[] = {5.0, 15.0};
  const auto r = theorem2_residual(e, u);
  CHECK(std::abs(r[1]) < std::abs(r[0]));
}

TEST_CASE("lemma check on explicit constructions") {
  const double eps[] = {0.05, 0.1, 0.2, 10.0};
  const LemmaReport flat = lemma_check(n0(std::exp(16.0)), eps);
  CHECK(flat.unsmoothed.trend == Trend::kConvergent);
  CHECK(flat.all_match);
  const StepFunction osc(std::vector<Atom>{}, 1.0,
                         SmoothPart::ramps({{1.0, 0.5}, {std::exp(2.0), 1.0}, {std::exp(4.0), -1.0},
                                            {std::exp(8.0), 1.0}, {std::exp(16.0), -1.0}}),
                         std::exp(20.0));
  const LemmaReport r = lemma_check(osc, eps);
  CHECK(r.unsmoothed.trend == Trend::kOscillating);
  CHECK(r.unsmoothed.liminf < r.unsmoothed.limsup);
  CHECK(r.all_match);
  CHECK_FALSE(r.entries.back().asserted);
}
