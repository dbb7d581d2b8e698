#pragma once

#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "beurling/analytic.hpp"
#include "beurling/integer_lattice.hpp"

namespace beurling {

// gamma_eps(t) = exp(-eps^2 t^2 / 2).
double gamma(double eps, double t);
// Its Fourier pair, the centred Gaussian density of width eps.
double gauss_kernel(double eps, double v);

// Kernel truncation in units of eps.
inline constexpr double kKernelWidth = 8.0;
// Relative size of gamma_eps where the t-axis is cut.
inline constexpr double kGammaCut = 1e-16;

enum class Side { kFourier, kConvolution };
std::string to_string(Side s);

struct SmoothedCounting {
  double epsilon = 0.0;
  std::vector<double> u_grid;
  std::vector<double> values;  // N_eps(e^u)
  std::vector<double> error;   // quadrature error estimate per point
  Side side = Side::kConvolution;
  double tilt_sigma = 1.0;

  // Columns u,value,side,eps,tilt.
  void write_csv(std::ostream& out) const;
};

// N_eps(e^u) = integral N(e^(u-v)) e^(tilt v) g_eps(v) dv. Atoms and ramps
// are integrated in closed form with the error function; a tau-shaped smooth
// part falls back to adaptive quadrature. Atoms beyond e^(u + 8 eps) are
// dropped, so the horizon of N must reach e^(u_max + 8 eps).
SmoothedCounting smooth_counting(const StepFunction& N, double eps, std::span<const double> u_grid,
                                 double tilt_sigma = 1.0);

// Composite Gauss-Legendre rule on [0, t_max] with panels of width <= h.
struct LineRule {
  std::vector<double> t;
  std::vector<double> w;

  static LineRule build(double t_max, double h, int order = 16);
};

// t where gamma_eps falls to kGammaCut.
double gamma_cutoff(double eps);

// (1/pi) integral_0^inf Re[e^((sigma+it)u) Z(s)/s] gamma_eps(t) dt for
// sigma > 1. The error column is the change when the panels are halved.
SmoothedCounting fourier_counting(const Perturbation& a, double sigma, double eps,
                                  std::span<const double> u_grid);

struct FourierDerivative {
  std::vector<double> u;
  std::vector<double> values;  // d/du (e^-u N_eps(e^u))
  double mass = 0.0;           // integral of the derivative over all u
  double c1 = 0.0;             // C(1) gamma_eps(0)
  double error = 0.0;
};

// (1/2pi) integral e^(iut) C(1+it) gamma_eps(t) dt and its total mass, the
// latter integrated over u in [-12 eps, u_mass_hi] (the derivative is
// negligible outside for the systems in the test corpus).
FourierDerivative fourier_derivative(const Perturbation& a, double eps, std::span<const double> u_list,
                                     double u_mass_hi = 40.0);

enum class DensityRoute { kAuto, kConvolution, kFourier };

struct DensityProbe {
  double estimate = 0.0;      // e^-u N_eps(e^u)
  double reference_c1 = 0.0;  // C(1)
  double gap = 0.0;           // |estimate - C(1)|
  double error = 0.0;         // quadrature error estimate of estimate
  DensityRoute route = DensityRoute::kAuto;

  json to_json() const;
};

// The convolution route enumerates the associated integers; the Fourier
// route uses the sigma = 1 form
//   e^-u N_eps(e^u) = C(1) Phi(u/eps)
//                     + (1/pi) integral_0^inf Re[e^(iut)(C(1+it)-C(1))/(it)] gamma_eps dt.
DensityProbe density_via_C1(const Perturbation& a, double eps, double u_probe,
                            DensityRoute route = DensityRoute::kAuto);

// Gauss summation width used to evaluate the conditionally convergent
// integral of the density residual.
inline constexpr double kEpsSum = 0.01;

// (1/2pi) integral e^(iut)(C(1+it)-C(1))/(it) gamma_{eps_sum}(t) dt.
std::vector<double> theorem2_residual(const Perturbation& a, std::span<const double> u_list,
                                      double eps_sum = kEpsSum);

struct LemmaEntry {
  double eps;
  DensityReport smoothed;
  bool matches;
  bool asserted;  // eps <= threshold
};

struct LemmaReport {
  DensityReport unsmoothed;
  std::vector<LemmaEntry> entries;
  bool all_match = true;  // over asserted entries

  json to_json() const;
};

// Classifies M(x)/x and e^-u M_eps(e^u) (tilt 1) on the same log-scale
// decade logic and compares the two for every eps <= threshold.
LemmaReport lemma_check(const StepFunction& M, std::span<const double> eps_list,
                        double threshold = 0.2, const DensityOptions& opt = {});

}  // namespace beurling
