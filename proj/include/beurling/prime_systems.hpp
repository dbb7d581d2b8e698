#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "beurling/step_function.hpp"

namespace beurling {

// Which reference triple a perturbation is measured against:
//   kTau  P0 = tau, N0(x) = x, Z0(s) = s/(s-1)
//   kPi   P1 = pi (usual primes up to the horizon), N1 = the naturals
enum class Reference { kTau, kPi };

std::string to_string(Reference r);
Reference reference_from_string(const std::string& s);

// tau(y) = integral_1^y (1 - 1/xi) / log(xi) dxi, y >= 1.
// Memoized on a uniform grid in log y with adaptive Simpson refinement
// inside the cell holding y.
double tau(double y);

// Largest Y accepted by usual_primes.
inline constexpr double kSieveBound = 1e9;

// Primes <= limit by a segmented odd-only sieve of Eratosthenes.
std::vector<std::uint64_t> sieve_primes(std::uint64_t limit);

struct GenPrimeSystem {
  StepFunction counting;
  double truncation_Y = kInfinity;
  bool free = false;
  Reference reference = Reference::kTau;
  json metadata = json::object();

  // Default finite-horizon surrogate for P(y) = o(y).
  static constexpr double kGrowthBound = 0.5;

  // Adds a warning to metadata when counting(Y)/Y exceeds the bound.
  void check_growth(double bound = kGrowthBound);
  json to_json() const;
};

// a(y) = P(y) - P0(y) with da as a signed measure. For reference kTau the
// smooth part of da is a multiple of dtau; for kPi it is purely atomic.
struct Perturbation {
  SignedMeasure measure;
  Reference reference = Reference::kTau;
  double horizon = kInfinity;
  json metadata = json::object();

  // a(y).
  double induced(double y) const { return measure.cumulative(y); }
  json to_json() const;
};

GenPrimeSystem usual_primes(double Y);

// Signed atoms at e^n, n = 1..n_max, with |weight| = e^n n^-alpha and sign
// from bit 0 of the n-th counter output. Reference kTau.
Perturbation random_sign_system(double alpha, int n_max, std::uint64_t seed);

enum class CoinForce { kNone, kAllHeads, kAllTails };

// For each block [e^n, e^(n+1)) within [2, Y] a seeded coin either removes
// every usual prime in the block (tails) or counts each twice (heads).
GenPrimeSystem block_coinflip_system(double Y, std::uint64_t seed,
                                     CoinForce force = CoinForce::kNone);

// Counting max(P, P1) / min(P, P1).
GenPrimeSystem plus_system(const GenPrimeSystem& p, const GenPrimeSystem& p1);
GenPrimeSystem minus_system(const GenPrimeSystem& p, const GenPrimeSystem& p1);

// A bounded step function g(y) = offset + sum of signed jumps at y >= loc.
struct BoundedStep {
  double offset = 0.0;
  std::vector<Atom> jumps;

  double sup_abs() const;
};

// New system with counting P + g; throws DomainError naming the first
// breakpoint where P + g would decrease.
GenPrimeSystem perturb_bounded(const GenPrimeSystem& p, const BoundedStep& g);

// da = dP - dP0 for the requested reference.
Perturbation perturbation_of(const GenPrimeSystem& p, Reference reference);

// Moves every atom by a deterministic relative offset below rel_offset so
// that generic positions remove accidental multiplicative relations.
GenPrimeSystem jitter_free(const GenPrimeSystem& p, std::uint64_t seed,
                           double rel_offset = 1e-6);

// True when no two distinct exponent vectors with total degree <=
// max_degree give values whose logs agree within tol. Generators must be
// distinct (a repeated generator is a relation).
bool numerically_free(std::span<const double> generators, int max_degree = 3,
                      double tol = 1e-9);

// Splice two systems on log-blocks: the increments of `first` are used on
// blocks [edges[2k], edges[2k+1]) and those of `second` on the others.
// Edges are given as y values; the first block starts at 1.
GenPrimeSystem alternate_systems(const GenPrimeSystem& first,
                                 const GenPrimeSystem& second,
                                 std::span<const double> edges);

// JSON system descriptions:
//   {"kind": "usual"|"block_coinflip"|"plus"|"minus"|"custom",
//    "params": {...}, "seed": n, "reference": "tau"|"pi"}
// "custom" carries the counting_core fields (base, atoms, smooth, horizon);
// "usual" accepts "remove" and "add" generator lists.
GenPrimeSystem system_from_json(const json& j);
// Adds kind "random_sign"; other kinds go through perturbation_of.
Perturbation perturbation_from_json(const json& j);

}  // namespace beurling
