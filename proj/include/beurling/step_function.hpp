#pragma once

#include <cmath>
#include <complex>
#include <limits>
#include <optional>
#include <span>
#include <type_traits>
#include <vector>

#include <json.hpp>

#include "beurling/errors.hpp"
#include "beurling/quadrature.hpp"

namespace beurling {

using json = nlohmann::json;

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

struct Atom {
  double location;
  double weight;

  friend bool operator==(const Atom&, const Atom&) = default;
};

struct Knot {
  double x;
  double slope;
};

// Continuous part of a counting function or density of a measure, measured
// from 1 (value(1) == 0). Two shapes are representable:
//   tau    scale * tau(y), tau(y) = integral_1^y (1 - 1/xi) / log(xi) dxi
//   ramps  sum_j slope_j * (x - x_j)_+   (piecewise linear, continuous)
class SmoothPart {
 public:
  enum class Kind { kTau, kRamps };

  static SmoothPart tau(double scale);
  static SmoothPart ramps(std::vector<Knot> knots);

  Kind kind() const noexcept { return kind_; }
  double scale() const noexcept { return scale_; }
  std::span<const Knot> knots() const noexcept { return knots_; }

  double value(double x) const;
  double density(double x) const;
  // Slope sum and slope-weighted knot sum of the knots <= x (ramps only).
  std::pair<double, double> ramp_coefficients(double x) const;
  bool nondecreasing() const;

  SmoothPart scaled(double c) const;

  json to_json() const;
  static SmoothPart from_json(const json& j);

 private:
  Kind kind_ = Kind::kTau;
  double scale_ = 0.0;
  std::vector<Knot> knots_;
  std::vector<double> slope_prefix_;  // sum of slopes of knots [0, i]
  std::vector<double> moment_prefix_;  // sum of slope*x of knots [0, i]
};

// Right-continuous nondecreasing function on [1, horizon]:
//   F(x) = base + sum_{location <= x} weight + smooth(x).
// Atoms are kept sorted with strictly increasing locations; equal locations
// are merged at construction.
class StepFunction {
 public:
  StepFunction() = default;
  explicit StepFunction(std::vector<Atom> atoms, double base = 0.0,
                        std::optional<SmoothPart> smooth = std::nullopt,
                        double horizon = kInfinity);

  double operator()(double x) const { return eval(x); }
  double eval(double x) const;
  // Value just below x (left limit).
  double eval_left(double x) const;

  std::span<const Atom> atoms() const noexcept { return atoms_; }
  double base() const noexcept { return base_; }
  const std::optional<SmoothPart>& smooth() const noexcept { return smooth_; }
  double horizon() const noexcept { return horizon_; }
  bool purely_atomic() const noexcept { return !smooth_.has_value(); }

  // Atom locations and ramp knots, sorted and deduplicated.
  std::vector<double> breakpoints() const;
  // Sum of atom weights with location <= x.
  double atomic_part(double x) const;

  json to_json() const;
  static StepFunction from_json(const json& j);

 private:
  std::vector<Atom> atoms_;
  std::vector<double> prefix_;
  double base_ = 0.0;
  std::optional<SmoothPart> smooth_;
  double horizon_ = kInfinity;
};

// Signed measure on (1, infinity): atoms with nonzero weight plus an optional
// absolutely continuous part whose density is SmoothPart::density.
class SignedMeasure {
 public:
  SignedMeasure() = default;
  explicit SignedMeasure(std::vector<Atom> atoms,
                         std::optional<SmoothPart> smooth = std::nullopt);

  std::span<const Atom> atoms() const noexcept { return atoms_; }
  const std::optional<SmoothPart>& smooth() const noexcept { return smooth_; }
  bool purely_atomic() const noexcept { return !smooth_.has_value(); }

  // m((1, x]).
  double cumulative(double x) const;
  // |m| on (y0, y1].
  double total_variation(double y0, double y1) const;
  // Index range of atoms with location in (y0, y1].
  std::pair<std::size_t, std::size_t> atom_range(double y0, double y1) const;

  json to_json() const;
  static SignedMeasure from_json(const json& j);

 private:
  std::vector<Atom> atoms_;
  std::vector<double> prefix_;
  std::vector<double> abs_prefix_;
  std::optional<SmoothPart> smooth_;
};

// integral over (y0, y1] of f dm: exact sum over atoms plus adaptive Simpson
// on the density, integrated in the variable w = log y.
template <class F>
auto stieltjes(F&& f, const SignedMeasure& m, double y0, double y1,
               double tol = kTolQuad) -> std::decay_t<decltype(f(2.0))> {
  using T = std::decay_t<decltype(f(2.0))>;
  if (!(y0 >= 1.0) || !(y1 >= y0)) {
    throw DomainError("stieltjes: need 1 <= y0 <= y1");
  }
  T sum{};
  const auto [lo, hi] = m.atom_range(y0, y1);
  const auto atoms = m.atoms();
  for (std::size_t i = lo; i < hi; ++i) {
    const T v = f(atoms[i].location);
    if constexpr (std::is_same_v<T, double>) {
      if (!std::isfinite(v)) {
        throw EvaluationError("stieltjes: integrand not finite at an atom");
      }
    } else {
      if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) {
        throw EvaluationError("stieltjes: integrand not finite at an atom");
      }
    }
    sum += atoms[i].weight * v;
  }
  if (m.smooth() && y1 > y0) {
    const SmoothPart& sp = *m.smooth();
    auto integrand = [&](double w) -> T {
      const double y = std::exp(w);
      return f(y) * (sp.density(y) * y);
    };
    // Split at ramp knots so every piece has a smooth density.
    std::vector<double> cuts{std::log(y0)};
    if (sp.kind() == SmoothPart::Kind::kRamps) {
      for (const Knot& k : sp.knots()) {
        if (k.x > y0 && k.x < y1) cuts.push_back(std::log(k.x));
      }
    }
    cuts.push_back(std::log(y1));
    const double piece_tol = tol / static_cast<double>(cuts.size() - 1);
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
      sum += integrate_or_throw(integrand, cuts[i], cuts[i + 1], piece_tol);
    }
  }
  return sum;
}

// Pointwise maximum / minimum of two purely atomic step functions sharing a
// truncation horizon. Exact: both inputs are constant between the merged
// breakpoints.
StepFunction combine_max(const StepFunction& f, const StepFunction& g);
StepFunction combine_min(const StepFunction& f, const StepFunction& g);

}  // namespace beurling
