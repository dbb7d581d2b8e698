#pragma once

#include <complex>
#include <cstdint>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "beurling/prime_systems.hpp"

namespace beurling {

using cplx = std::complex<double>;

// Default absolute tolerance of the B-series truncation.
inline constexpr double kTolSeries = 1e-13;
// Smallest atom location must exceed 1 + kEpsLoc.
inline constexpr double kEpsLoc = 1e-9;

// Evaluates the chain a -> A -> B -> C -> Z for one perturbation. Atom logs
// are precomputed so repeated evaluation along a line is cheap.
//
// A tau-shaped smooth part scale * dtau enters A and B through
//   integral y^-s dtau(y) = log(s / (s - 1)),
// and only with k = 1 in the B-series, so that the reference system itself
// has C = 1 and Z = s/(s-1).
class TransferChain {
 public:
  explicit TransferChain(const Perturbation& a, double tol = kTolSeries);

  cplx A(cplx s) const;
  cplx B(cplx s) const;
  cplx C(cplx s) const { return std::exp(B(s)); }
  // s/(s-1) C(s) for reference tau; exp(B_a + B_pi) for reference pi.
  cplx Z(cplx s) const;

  // |a(Y)| Y^-Re s at the perturbation horizon (0 for an infinite horizon).
  double tail_bound(double sigma) const;

  Reference reference() const noexcept { return reference_; }
  double tau_scale() const noexcept { return tau_scale_; }
  // Largest atom (or reference prime) log: the top frequency on a vertical line.
  double max_log() const noexcept { return max_log_; }

 private:
  void check(cplx s) const;

  std::vector<double> logs_;
  std::vector<double> weights_;
  std::vector<double> ref_logs_;  // usual primes for reference pi
  double tau_scale_ = 0.0;
  double tol_;
  double horizon_;
  double a_at_horizon_ = 0.0;
  double max_log_ = 0.0;
  Reference reference_;
};

struct AValue {
  cplx value;
  double tail_bound;
};

AValue A_of(const Perturbation& a, cplx s);
cplx B_of(const Perturbation& a, cplx s, double tol = kTolSeries);
cplx C_of(const Perturbation& a, cplx s);
cplx Z_of(const Perturbation& a, cplx s);

// ----------------------------------------------------------------- Diamond

enum class DiamondTrend { kBounded, kLogDivergent, kPowerDivergent };
std::string to_string(DiamondTrend t);

struct DiamondPoint {
  double Y;
  double value;
};

struct DiamondReport {
  std::vector<DiamondPoint> points;  // I(Y) on the requested grid
  std::vector<double> blocks;        // I(e^n), n = 1..N
  double slope = 0.0;                // log-log slope of block increments vs n
  DiamondTrend trend = DiamondTrend::kBounded;

  json to_json() const;
};

// Thresholds on the block-increment slope p: p < -1.3 bounded,
// -1.3 <= p < -0.8 logarithmic, p >= -0.8 power growth.
inline constexpr double kBoundedSlope = -1.3;
inline constexpr double kPowerSlope = -0.8;

// I(Y) = integral_e^Y |a(y)| y^-2 dy, exact between breakpoints.
DiamondReport diamond_integral(const Perturbation& a, std::span<const double> Y_grid);

// ------------------------------------------------------------ line samples

enum class LineWhich { kA, kB, kC, kZ };
std::string to_string(LineWhich w);
LineWhich line_which_from_string(const std::string& s);

struct LineSamples {
  double sigma = 1.0;
  double dt = 0.0;
  LineWhich which = LineWhich::kA;
  std::vector<double> t;  // (i - m) dt, i = 0..2m
  std::vector<cplx> values;

  void write_csv(std::ostream& out) const;
};

LineSamples sample_line(const Perturbation& a, LineWhich which, double sigma, double T,
                        double dt);

struct ModulusOptions {
  std::size_t max_lags = 64;  // above this, samples are thinned by a stride
  double fit_lo = 0.0;        // beta_hat uses deltas >= fit_lo
};

struct ModulusEstimate {
  std::vector<double> deltas;  // increasing
  std::vector<double> omega;
  double beta_hat = 0.0;
  double omega_integral_partial = 0.0;
  double dt = 0.0;
  double fit_lo = 0.0;

  // Log-log interpolation, clamped to the sampled range.
  double at(double delta) const;
  json to_json() const;
};

ModulusEstimate holder_modulus(const LineSamples& L, std::span<const double> deltas,
                               const ModulusOptions& opt = {});

struct CModulusReport {
  double k_hat = 0.0;          // with n pairs
  double k_hat_doubled = 0.0;  // with 2n pairs
  double q90 = 0.0;            // 90% quantile of the ratios over 2n pairs
  bool stable = true;          // k_hat_doubled <= 1.1 k_hat
  std::size_t pairs = 0;
  std::size_t skipped = 0;

  json to_json() const;
};

// Samples t in [-T, T] and gaps log-uniform over the modulus' deltas, and
// reports max |C(sigma+it') - C(sigma+it)| / omega(|t'-t|).
CModulusReport c_modulus_bound_check(const Perturbation& a, std::span<const double> sigma_list,
                                     std::size_t n_pairs, const ModulusEstimate& omega, double T,
                                     std::uint64_t seed);

}  // namespace beurling
