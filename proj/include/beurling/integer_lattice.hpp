#pragma once

#include <cstdint>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "beurling/prime_systems.hpp"
#include "beurling/step_function.hpp"

namespace beurling {

struct LatticeEntry {
  double value;
  std::uint64_t multiplicity;
};

inline constexpr double kMergeTol = 1e-9;              // in log units
inline constexpr std::size_t kEntryBudget = 200'000'000;

// Generalized integers up to horizon X with multiplicity; the first entry is
// the empty product (1, 1).
class IntegerMultiset {
 public:
  IntegerMultiset(std::vector<LatticeEntry> entries, double horizon);

  std::span<const LatticeEntry> entries() const noexcept { return entries_; }
  double horizon() const noexcept { return horizon_; }
  std::size_t size() const noexcept { return entries_.size(); }

  // N(x): multiplicities of values <= x.
  double count(double x) const;
  StepFunction to_step_function() const;
  // Columns value,multiplicity.
  void write_csv(std::ostream& out) const;

 private:
  std::vector<LatticeEntry> entries_;
  std::vector<std::uint64_t> prefix_;
  double horizon_;
};

struct GenerateOptions {
  double merge_tol = kMergeTol;
  std::size_t budget = kEntryBudget;
};

// All products of generators <= X. An atom of integer weight m stands for m
// identical generators, giving multiplicity C(e+m-1, e) to exponent e.
IntegerMultiset generate(const StepFunction& primes, double X, const GenerateOptions& opt = {});
IntegerMultiset generate(const GenPrimeSystem& p, double X, const GenerateOptions& opt = {});

enum class Trend { kConvergent, kDivergent, kVanishing, kOscillating, kUndecided };
std::string to_string(Trend t);

struct DensityOptions {
  double x_lo = 10.0;
  int points_per_decade = 50;
  double spread_tol = 0.02;
  double slope_tol = 0.02;
  int min_decades = 3;
};

struct DensityReport {
  double estimate = 0.0;
  double x_lo = 0.0;
  double x_hi = 0.0;
  Trend trend = Trend::kUndecided;
  std::vector<double> residuals;  // per-decade means of N(x)/x, oldest first
  double liminf = 0.0;            // min / max of the decade means
  double limsup = 0.0;
  double slope = 0.0;             // d log(ratio) / d log x across decades
  std::vector<double> log_x;      // sampled points and ratios
  std::vector<double> ratio;
  std::string diagnostics;

  json to_json() const;
};

// Classifies samples of a ratio taken on a geometric grid. Decades are
// aligned to end at the last sample.
DensityReport classify_ratio(std::span<const double> log_x, std::span<const double> ratio,
                             const DensityOptions& opt = {});

DensityReport density_estimate(const IntegerMultiset& n, const DensityOptions& opt = {});
// Same for N(x)/x of a counting function on [x_lo, x_hi].
DensityReport density_estimate(const StepFunction& n, double x_hi, const DensityOptions& opt = {});

// prod_removed (1 - 1/p) * prod_added (1 - 1/p)^-1.
double euler_density(std::span<const double> removed, std::span<const double> added = {});

struct PartialDensityPoint {
  double Y;
  double value;     // prod (1 - 1/p+)^-1 prod (1 - 1/p)
  double log_value;
  double sum_plus;  // sum over p+ <= Y of 1/p+, with multiplicity
  double sum_ref;   // sum over p <= Y of 1/p
  double gap() const { return sum_plus - sum_ref; }
};

std::vector<PartialDensityPoint> partial_density_product(const GenPrimeSystem& pplus,
                                                         const GenPrimeSystem& p1,
                                                         std::span<const double> Y_grid);

// N0 * dG for N0(x) = x: atoms of G plus ramps of slope m/g at each g.
StepFunction reference_convolution(const IntegerMultiset& g);

// The counting function of integers attached to a perturbation up to X,
// when its atoms can be enumerated (nonnegative integer weights).
StepFunction associated_counting(const Perturbation& a, double X, const GenerateOptions& opt = {});

}  // namespace beurling
