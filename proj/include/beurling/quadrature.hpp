#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <span>
#include <type_traits>
#include <utility>
#include <vector>

#include "beurling/errors.hpp"

namespace beurling {

// Default absolute tolerance for Stieltjes / smooth-part quadrature.
inline constexpr double kTolQuad = 1e-10;

template <class T>
struct QuadResult {
  T value{};
  double error = 0.0;
  bool converged = true;
  std::size_t evaluations = 0;
};

namespace detail {

inline double magnitude(double v) { return std::abs(v); }
inline double magnitude(const std::complex<double>& v) { return std::abs(v); }

template <class F, class T>
void simpson_step(F& f, double a, double b, T fa, T fm, T fb, T whole,
                  double tol, int depth, QuadResult<T>& acc) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m);
  const double rm = 0.5 * (m + b);
  const T flm = f(lm);
  const T frm = f(rm);
  acc.evaluations += 2;
  const double h = b - a;
  const T left = (h / 12.0) * (fa + 4.0 * flm + fm);
  const T right = (h / 12.0) * (fm + 4.0 * frm + fb);
  const T diff = left + right - whole;
  const double err = magnitude(diff) / 15.0;
  if (err <= tol || depth <= 0 || !(m > a && b > m)) {
    if (err > tol) acc.converged = false;
    acc.value += left + right + diff / 15.0;
    acc.error += err;
    return;
  }
  simpson_step(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1, acc);
  simpson_step(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1, acc);
}

}  // namespace detail

// Adaptive Simpson with interval bisection and Richardson correction.
// The tolerance is absolute and split evenly between the two halves of
// every bisection, so the accumulated error estimate is bounded by tol when
// converged is true. Evaluation order is fixed (depth first, left to right).
template <class F>
auto adaptive_simpson(F&& f, double a, double b, double tol = kTolQuad,
                      int max_depth = 50)
    -> QuadResult<std::decay_t<decltype(f(a))>> {
  using T = std::decay_t<decltype(f(a))>;
  QuadResult<T> acc;
  if (a == b) return acc;
  // Start from a few panels so that narrow features near the middle are seen.
  constexpr int kPanels = 4;
  const double h = (b - a) / kPanels;
  for (int i = 0; i < kPanels; ++i) {
    const double lo = a + i * h;
    const double hi = (i + 1 == kPanels) ? b : a + (i + 1) * h;
    const double mid = 0.5 * (lo + hi);
    const T flo = f(lo);
    const T fmid = f(mid);
    const T fhi = f(hi);
    acc.evaluations += 3;
    const T whole = ((hi - lo) / 6.0) * (flo + 4.0 * fmid + fhi);
    detail::simpson_step(f, lo, hi, flo, fmid, fhi, whole, tol / kPanels,
                         max_depth, acc);
  }
  return acc;
}

// Same as adaptive_simpson but throws ToleranceError when the requested
// tolerance was not reached.
template <class F>
auto integrate_or_throw(F&& f, double a, double b, double tol = kTolQuad,
                        int max_depth = 50) {
  auto r = adaptive_simpson(std::forward<F>(f), a, b, tol, max_depth);
  if (!r.converged) {
    throw ToleranceError("adaptive quadrature did not reach tolerance",
                         r.error);
  }
  return r.value;
}

// Gauss-Legendre nodes and weights on [-1, 1].
struct GaussRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

// Computed once per order by Newton iteration on P_n.
const GaussRule& gauss_legendre(int order);

}  // namespace beurling
