#include <doctest.h>

#include <cmath>

#include "beurling/errors.hpp"
#include "beurling/prime_systems.hpp"

using namespace beurling;

namespace {

bool trial_prime(std::uint64_t n) {
  if (n < 2) return false;
  for (std::uint64_t d = 2; d * d <= n; ++d) {
    if (n % d == 0) return false;
  }
  return true;
}

}  // namespace

TEST_CASE("sieve agrees with trial division") {
  const auto primes = sieve_primes(300000);
  std::size_t k = 0;
  for (std::uint64_t n = 0; n <= 300000; ++n) {
    if (trial_prime(n)) {
      REQUIRE(k < primes.size());
      CHECK(primes[k++] == n);
    }
  }
  CHECK(k == primes.size());
  CHECK(sieve_primes(1000000).size() == 78498);
}

TEST_CASE("usual primes") {
  CHECK(usual_primes(10.0).counting.atoms().size() == 4);
  CHECK(usual_primes(2.0).counting.atoms().size() == 1);
  CHECK(usual_primes(100.0).counting.atoms().size() == 25);
  CHECK_THROWS_AS(usual_primes(1.5), DomainError);
  CHECK_THROWS_AS(usual_primes(2e9), CapacityError);
}

TEST_CASE("random sign system") {
  const Perturbation a = random_sign_system(1.0, 10, 42);
  const auto atoms = a.measure.atoms();
  REQUIRE(atoms.size() == 10);
  CHECK(std::abs(atoms[1].weight) == doctest::Approx(std::exp(2.0) / 2.0).epsilon(1e-14));
  const Perturbation b = random_sign_system(1.0, 10, 42);
  for (std::size_t i = 0; i < atoms.size(); ++i) CHECK(atoms[i].weight == b.measure.atoms()[i].weight);
  CHECK(random_sign_system(0.3, 5, 1).metadata.contains("warnings"));
}

TEST_CASE("block coinflip forced coins") {
  const double Y = std::exp(8.0);
  const GenPrimeSystem pi = usual_primes(Y);
  const GenPrimeSystem heads = block_coinflip_system(Y, 0, CoinForce::kAllHeads);
  const GenPrimeSystem tails = block_coinflip_system(Y, 0, CoinForce::kAllTails);
  for (double y = 2.0; y < Y; y *= 1.37) {
    CHECK(heads.counting(y) == 2.0 * pi.counting(y));
    CHECK(tails.counting(y) == 0.0);
  }
}

TEST_CASE("plus and minus systems") {
  const double Y = std::exp(6.0);
  const GenPrimeSystem pi = usual_primes(Y);
  const GenPrimeSystem p = block_coinflip_system(Y, 9);
  const GenPrimeSystem plus = plus_system(p, pi), minus = minus_system(p, pi);
  for (double y = 1.0; y <= Y; y += 0.25) {
    CHECK(plus.counting(y) == std::max(p.counting(y), pi.counting(y)));
    CHECK(minus.counting(y) == std::min(p.counting(y), pi.counting(y)));
    CHECK(plus.counting(y) - pi.counting(y) == std::max(0.0, p.counting(y) - pi.counting(y)));
  }
  const GenPrimeSystem same = plus_system(pi, pi);
  CHECK(same.counting.atoms().size() == pi.counting.atoms().size());
  const GenPrimeSystem heads = block_coinflip_system(Y, 0, CoinForce::kAllHeads);
  CHECK(plus_system(heads, pi).counting(100.0) == heads.counting(100.0));
  CHECK(minus_system(heads, pi).counting(100.0) == pi.counting(100.0));
}

TEST_CASE("bounded perturbation") {
  const GenPrimeSystem pi = usual_primes(100.0);
  CHECK(perturb_bounded(pi, {}).counting(50.0) == pi.counting(50.0));
  const GenPrimeSystem shifted = perturb_bounded(pi, {1.0, {}});
  for (double y : {1.0, 2.0, 50.0}) CHECK(shifted.counting(y) == pi.counting(y) + 1.0);
  CHECK_THROWS_AS(perturb_bounded(pi, {0.0, {{4.0, -3.0}}}), DomainError);
}

TEST_CASE("perturbation against the references") {
  const GenPrimeSystem pi = usual_primes(1000.0);
  const Perturbation zero = perturbation_of(pi, Reference::kPi);
  CHECK(zero.measure.atoms().empty());
  const Perturbation t = perturbation_of(pi, Reference::kTau);
  REQUIRE(t.measure.smooth().has_value());
  CHECK(t.measure.smooth()->scale() == -1.0);
  CHECK(t.induced(100.0) == doctest::Approx(25.0 - tau(100.0)).epsilon(1e-13));
}

TEST_CASE("multiplicative freeness") {
  const double free_gens[] = {2.0, 3.0, 5.0};
  CHECK(numerically_free(free_gens));
  const double tied[] = {2.0, 4.0};
  CHECK_FALSE(numerically_free(tied));
  const GenPrimeSystem j = jitter_free(GenPrimeSystem{StepFunction({{2.0, 1.0}, {4.0, 2.0}}), kInfinity}, 3);
  CHECK(j.counting.atoms().size() == 3);
  CHECK(j.free);
}

TEST_CASE("alternating splice") {
  const double Y = std::exp(6.0);
  const GenPrimeSystem pi = usual_primes(Y);
  const GenPrimeSystem heads = block_coinflip_system(Y, 0, CoinForce::kAllHeads);
  const double edges[] = {std::exp(3.0)};
  const GenPrimeSystem s = alternate_systems(heads, pi, edges);
  CHECK(s.counting(10.0) == heads.counting(10.0));
  const double y = std::exp(5.0);
  CHECK(s.counting(y) - s.counting(edges[0]) == pi.counting(y) - pi.counting(edges[0]));
}

TEST_CASE("json loader paths") {
  CHECK_THROWS_AS(system_from_json({{"kind", "nonsense"}}), ConfigError);
  try {
    system_from_json({{"kind", "block_coinflip"}, {"params", {{"Y", 100.0}}}});
    FAIL("expected a missing seed");
  } catch (const ConfigError& e) {
    CHECK(e.path() == "/seed");
  }
  const GenPrimeSystem s = system_from_json({{"kind", "usual"}, {"params", {{"logY", 3.0}, {"remove", {2.0}}}}});
  CHECK(s.counting(std::exp(3.0)) == 7.0);
  const Perturbation a = perturbation_from_json({{"kind", "random_sign"}, {"params", {{"n_max", 5}}}, {"seed", 1}});
  CHECK(a.measure.atoms().size() == 5);
}
