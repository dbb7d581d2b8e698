#include "beurling/verify.hpp"

#include <cmath>
#include <functional>
#include <numbers>

#include "beurling/csv.hpp"
#include "beurling/integer_lattice.hpp"
#include "beurling/rng.hpp"
#include "beurling/smoothing.hpp"

namespace beurling {

bool VerifyReport::passed() const { return first_failure().empty(); }

std::string VerifyReport::first_failure() const {
  for (const PropertyResult& r : results) {
    if (!r.passed) return r.name;
  }
  return {};
}

json VerifyReport::to_json() const {
  json props = json::array();
  for (const PropertyResult& r : results) {
    props.push_back({{"name", r.name}, {"passed", r.passed}, {"detail", r.detail}});
  }
  return {{"properties", props}, {"passed", passed()}, {"first_failure", first_failure()}};
}

namespace {

using Check = std::function<std::string()>;  // empty string means pass

Perturbation single_atom(double p) {
  return {SignedMeasure({{p, 1.0}}), Reference::kTau, kInfinity, {}};
}

std::string right_continuity() {
  const StepFunction f({{2.0, 1.0}, {3.0, 2.0}, {2.0, 0.5}}, 0.0);
  if (f.atoms().size() != 2) return "equal locations not merged";
  if (f(2.0) != 1.5 || f.eval_left(2.0) != 0.0 || f(2.999) != 1.5 || f(3.0) != 3.5) {
    return "eval is not right-continuous";
  }
  return {};
}

std::string naturals() {
  const double X = 1e5;
  const IntegerMultiset n = generate(usual_primes(X), X);
  const auto e = n.entries();
  if (e.size() != 100000) return "expected 100000 values, got " + std::to_string(e.size());
  for (std::size_t i = 0; i < e.size(); ++i) {
    if (e[i].value != static_cast<double>(i + 1) || e[i].multiplicity != 1) {
      return "value " + std::to_string(i + 1) + " differs";
    }
  }
  return {};
}

std::string recurrence() {
  const StepFunction base({{2.0, 1.0}, {3.5, 1.0}, {7.25, 1.0}});
  const double q = 5.125, X = 1e4;
  const IntegerMultiset with = generate(StepFunction({{2.0, 1.0}, {3.5, 1.0}, {q, 1.0}, {7.25, 1.0}}), X);
  const IntegerMultiset without = generate(base, X);
  for (double x : {10.0, 99.5, 1000.0, 5000.0, 1e4}) {
    double sum = 0.0;
    for (double y = x; y >= 1.0; y /= q) sum += without.count(y);
    if (sum != with.count(x)) return "N(" + format_real(x) + ") recurrence mismatch";
  }
  return {};
}

std::string merge_safety() {
  const StepFunction p({{2.0, 1.0}, {3.0, 1.0}, {4.0, 1.0}, {std::numbers::e, 1.0}});
  const double X = 1e5;
  const double a = generate(p, X).count(X);
  const double b = generate(p, X, {kMergeTol / 2, kEntryBudget}).count(X);
  return a == b ? std::string{} : "N(X) changed when merge_tol was halved";
}

std::string euler_inverse() {
  const std::vector<double> s{2.0, 3.0, 5.0, 7.5, std::numbers::e};
  const double prod = euler_density(s, {}) * euler_density({}, s);
  return std::abs(prod - 1.0) <= 1e-14 ? std::string{} : "product " + format_real(prod);
}

std::string removed_density() {
  const double X = 1e5;
  GenPrimeSystem p = usual_primes(X);
  std::vector<Atom> atoms;
  for (const Atom& a : p.counting.atoms()) {
    if (a.location != 2.0 && a.location != 5.0) atoms.push_back(a);
  }
  const StepFunction reduced(std::move(atoms), 0.0, std::nullopt, X);
  const DensityReport r = density_estimate(generate(reduced, X));
  const std::vector<double> removed{2.0, 5.0};
  const double d = euler_density(removed);
  if (std::abs(r.estimate - d) > 0.02 * d) {
    return "estimate " + format_real(r.estimate) + " vs " + format_real(d);
  }
  return {};
}

std::string b_closed_form() {
  for (double p : {1.5, 2.0, std::numbers::e, 10.0}) {
    for (cplx s : {cplx(1.0, 0.0), cplx(1.0, 7.0), cplx(2.5, -3.0)}) {
      const cplx b = B_of(single_atom(p), s, 1e-13);
      const cplx ref = -std::log(1.0 - std::pow(p, -s));
      if (std::abs(b - ref) > 1e-12) return "p = " + format_real(p);
    }
  }
  return {};
}

std::string chain_consistency() {
  const Perturbation a = random_sign_system(1.0, 20, 11);
  const TransferChain chain(a);
  const CounterRng rng(5);
  for (std::uint64_t i = 0; i < 20; ++i) {
    const cplx s(1.0 + 2.0 * rng.uniform(2 * i), 20.0 * (rng.uniform(2 * i + 1) - 0.5));
    const cplx c = chain.C(s);
    if (std::abs(std::exp(chain.B(s)) - c) > 1e-10 * std::abs(c)) return "exp(B) != C";
    if (std::abs((s - 1.0) / s * chain.Z(s) - c) > 1e-10 * std::abs(c)) return "(s-1)/s Z != C";
  }
  return {};
}

std::string conjugate_symmetry() {
  const Perturbation a = random_sign_system(1.0, 30, 2);
  for (LineWhich w : {LineWhich::kA, LineWhich::kC}) {
    const LineSamples L = sample_line(a, w, 1.0, 5.0, 0.01);
    const std::size_t n = L.values.size();
    for (std::size_t i = 0; i < n; ++i) {
      if (std::abs(L.values[i] - std::conj(L.values[n - 1 - i])) > 1e-12) {
        return to_string(w) + " at t = " + format_real(L.t[i]);
      }
    }
  }
  return {};
}

std::string diamond_monotone() {
  const Perturbation a = random_sign_system(1.0, 30, 4);
  std::vector<double> grid;
  for (int i = 1; i <= 60; ++i) grid.push_back(std::exp(0.5 * i));
  const DiamondReport r = diamond_integral(a, grid);
  for (std::size_t i = 1; i < r.points.size(); ++i) {
    if (r.points[i].value < r.points[i - 1].value) return "decrease at Y = " + format_real(r.points[i].Y);
  }
  return {};
}

std::string smoothing_monotone() {
  const StepFunction n = generate(usual_primes(1e4), 1e4).to_step_function();
  std::vector<double> u;
  for (int i = 0; i <= 80; ++i) u.push_back(0.1 * i);
  for (double tilt : {0.0, 1.0, 1.5}) {
    const SmoothedCounting s = smooth_counting(n, 0.1, u, tilt);
    for (std::size_t i = 1; i < u.size(); ++i) {
      if (s.values[i] < s.values[i - 1]) return "tilt " + format_real(tilt) + " at u = " + format_real(u[i]);
    }
  }
  return {};
}

std::string side_agreement() {
  const Perturbation a = single_atom(std::numbers::e);
  const double eps = 0.1;
  const std::vector<double> u{2.0, 5.0, 8.0};
  const StepFunction n = associated_counting(a, std::exp(8.0 + kKernelWidth * eps));
  for (double sigma : {1.25, 1.5, 2.0}) {
    const SmoothedCounting f = fourier_counting(a, sigma, eps, u);
    const SmoothedCounting c = smooth_counting(n, eps, u, sigma);
    for (std::size_t i = 0; i < u.size(); ++i) {
      if (std::abs(f.values[i] - c.values[i]) > 1e-6 * std::abs(c.values[i])) {
        return "sigma " + format_real(sigma) + " u " + format_real(u[i]);
      }
    }
  }
  return {};
}

std::string mass_identity() {
  const Perturbation zero{SignedMeasure(), Reference::kTau, kInfinity, {}};
  const double u[] = {0.0};
  const FourierDerivative d = fourier_derivative(zero, 0.1, u);
  return std::abs(d.mass - d.c1) <= 1e-8 ? std::string{} : "mass " + format_real(d.mass);
}

std::string lemma_direction() {
  const StepFunction m(std::vector<Atom>{}, 1.0, SmoothPart::ramps({{1.0, 1.0}, {std::exp(3.0), 0.5}}), std::exp(20.0));
  const double eps[] = {0.05, 0.1, 0.2};
  const LemmaReport r = lemma_check(m, eps);
  if (r.unsmoothed.trend != Trend::kConvergent) return "M itself not CONVERGENT";
  return r.all_match ? std::string{} : "smoothed classification differs";
}

}  // namespace

VerifyReport run_invariant_suite() {
  const std::vector<std::pair<std::string, Check>> suite = {
      {"counting_core.right_continuity", right_continuity},
      {"integer_lattice.naturals", naturals},
      {"integer_lattice.recurrence", recurrence},
      {"integer_lattice.merge_safety", merge_safety},
      {"integer_lattice.euler_inverse", euler_inverse},
      {"integer_lattice.removed_density", removed_density},
      {"analytic.b_closed_form", b_closed_form},
      {"analytic.chain_consistency", chain_consistency},
      {"analytic.conjugate_symmetry", conjugate_symmetry},
      {"analytic.diamond_monotone", diamond_monotone},
      {"smoothing.monotone", smoothing_monotone},
      {"smoothing.side_agreement", side_agreement},
      {"smoothing.mass_identity", mass_identity},
      {"smoothing.lemma_direction", lemma_direction},
  };
  VerifyReport report;
  for (const auto& [name, check] : suite) {
    std::string detail;
    try {
      detail = check();
    } catch (const std::exception& e) {
      detail = std::string("exception: ") + e.what();
    }
    report.results.push_back({name, detail.empty(), detail});
    if (!detail.empty()) break;
  }
  return report;
}

}  // namespace beurling
