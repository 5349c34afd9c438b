#include <catch2/catch_amalgamated.hpp>

#include <set>

#include "cmc/codec.hpp"
#include "cmc/errors.hpp"
#include "cmc/orthogonality.hpp"
#include "support.hpp"

using cmc::BitOracle;
using cmc::Bitstring;
using cmc::MeasureCode;
using cmc::Rational;

namespace {

Rational R(long p, unsigned long q = 1) { return Rational(p, q); }
Bitstring B(const char* s) { return Bitstring(s); }

Rational brute_gap(const MeasureCode& mu, const MeasureCode& nu, std::size_t d) {
  Rational total;
  for (const auto& s : testing::strings_of_length(d)) {
    const Rational diff = nu(s) - mu(s);
    if (diff.sign() > 0) total += diff;
  }
  return total;
}

MeasureCode product(const Rational& a) { return MeasureCode::product(cmc::Schedule::constant(a)); }

MeasureCode random_code() {
  switch (testing::below(5)) {
    case 0: return testing::random_table(4);
    case 1: return product(testing::random_open_unit());
    case 2:
      return MeasureCode::product(cmc::Schedule::explicit_list(
          {testing::random_open_unit(), testing::random_open_unit(), testing::random_open_unit()},
          cmc::Schedule::Tail::Cycle));
    case 3:
      return MeasureCode::convex({{R(1, 3), MeasureCode::dirac(testing::random_bits(3))},
                                  {R(2, 3), testing::random_table(3)}});
    default: return cmc::encode(testing::random_table(3), testing::random_bits(8), 64);
  }
}

// Expands a cylinder family to the set of cells at depth d it covers.
std::set<Bitstring> expand(const std::vector<Bitstring>& cells, std::size_t d) {
  std::set<Bitstring> out;
  for (const auto& s : cells)
    for (const auto& tail : testing::strings_of_length(d - s.size())) out.insert(s.concat(tail));
  return out;
}

mpz_class binom(unsigned long n, unsigned long k) {
  mpz_class r;
  mpz_bin_uiui(r.get_mpz_t(), n, k);
  return r;
}

}  // namespace

TEST_CASE("gap against exhaustive cell sums") {
  const auto u = MeasureCode::uniform();
  const auto dirac = MeasureCode::dirac(Bitstring());
  CHECK(cmc::gap(dirac, u, 2) == R(3, 4));
  CHECK(cmc::gap(u, u, 9) == R(0));
  for (std::size_t d = 1; d <= 20; ++d) {
    CHECK(cmc::gap(dirac, u, d) == R(1) - Rational::dyadic(d));
    if (d <= 12) CHECK(brute_gap(dirac, u, d) == R(1) - Rational::dyadic(d));
  }
  for (int trial = 0; trial < 40; ++trial) {
    const auto mu = random_code(), nu = random_code();
    const std::size_t d = testing::below(9);
    CHECK(cmc::gap(mu, nu, d) == brute_gap(mu, nu, d));
    CHECK(cmc::gap(mu, mu, d) == R(0));
  }
}

TEST_CASE("gap is nondecreasing in depth") {
  for (int trial = 0; trial < 10; ++trial) {
    const auto mu = random_code(), nu = random_code();
    Rational prev;
    for (std::size_t d = 0; d <= 10; ++d) {
      const Rational g = cmc::gap(mu, nu, d);
      CHECK(g >= prev);
      prev = g;
    }
  }
}

TEST_CASE("gap reports unreachable depths") {
  cmc::SweepLimits tight;
  tight.max_states = 8;
  CHECK_THROWS_AS(cmc::gap(MeasureCode::uniform(), testing::random_table(6), 6, tight), cmc::BudgetExceeded);
  const auto ks0 = MeasureCode::product(cmc::ks_schedule(BitOracle::constant(0)));
  const auto ks1 = MeasureCode::product(cmc::ks_schedule(BitOracle::constant(1)));
  CHECK_THROWS_AS(cmc::gap(ks0, ks1, 12, tight), cmc::BudgetExceeded);
}

TEST_CASE("affinity bound dominates the gap") {
  CHECK_FALSE(cmc::gap_upper_bound(testing::random_table(3), MeasureCode::uniform(), 4));
  for (int trial = 0; trial < 20; ++trial) {
    const auto mu = MeasureCode::product(cmc::Schedule::explicit_list(
        {testing::random_open_unit(), testing::random_open_unit()}, cmc::Schedule::Tail::Cycle));
    const auto nu = product(testing::random_open_unit());
    const std::size_t d = testing::below(10);
    const auto bound = cmc::gap_upper_bound(mu, nu, d);
    REQUIRE(bound);
    CHECK(*bound >= brute_gap(mu, nu, d));
    CHECK(*bound <= R(1));
  }
}

TEST_CASE("uniform against the all-zero parameter follows a binomial closed form") {
  const auto u = MeasureCode::uniform();
  const auto ks0 = MeasureCode::product(cmc::ks_schedule(BitOracle::constant(0)));
  for (unsigned long d : {1UL, 7UL, 20UL, 40UL}) {
    Rational expect;
    for (unsigned long z = 0; z <= d; ++z) {
      const Rational mu = Rational::dyadic(d);
      mpz_class three = 1;
      for (unsigned long i = 0; i < d - z; ++i) three *= 3;
      const Rational nu(three, mpz_class(1) << (2 * d));
      if (nu > mu) expect += Rational(binom(d, z), 1) * (nu - mu);
    }
    CHECK(cmc::gap(u, ks0, d) == expect);
  }
}

TEST_CASE("certificates for a point mass against the uniform measure") {
  const auto u = MeasureCode::uniform();
  const auto dirac = MeasureCode::dirac(Bitstring());
  const auto r = cmc::ortho_certificate(dirac, u, R(1, 8), 8);
  const auto* cert = std::get_if<cmc::OrthoCertificate>(&r);
  REQUIRE(cert);
  CHECK(cert->depth == 4);
  CHECK(cert->mu_mass == R(0));
  CHECK(cert->nu_mass == R(15, 16));
  std::set<Bitstring> all;
  for (const auto& s : testing::strings_of_length(4))
    if (s != B("0000")) all.insert(s);
  CHECK(expand(cert->cells.strings, 4) == all);
  CHECK(cert->cells.strings == std::vector<Bitstring>{B("1"), B("01"), B("001"), B("0001")});
  CHECK(cmc::verify_certificate(*cert, dirac, u));

  auto forged = *cert;
  forged.cells.strings.push_back(B("0000"));
  CHECK_FALSE(cmc::verify_certificate(forged, dirac, u));
}

TEST_CASE("no certificate between equal measures") {
  const auto r = cmc::ortho_certificate(MeasureCode::uniform(), MeasureCode::uniform(), R(1, 10), 12);
  const auto* inc = std::get_if<cmc::OrthoInconclusive>(&r);
  REQUIRE(inc);
  CHECK(inc->best_gap == R(0));
  CHECK(inc->at_depth == 12);
  CHECK_THROWS_AS(cmc::ortho_certificate(MeasureCode::uniform(), MeasureCode::uniform(), R(1, 2), 3),
                  std::invalid_argument);
}

TEST_CASE("certificate cells lie inside the region where nu exceeds mu") {
  for (int trial = 0; trial < 25; ++trial) {
    const auto mu = random_code(), nu = random_code();
    const auto r = cmc::ortho_certificate(mu, nu, R(1, 3), 9);
    const auto* cert = std::get_if<cmc::OrthoCertificate>(&r);
    if (!cert) {
      const auto& inc = std::get<cmc::OrthoInconclusive>(r);
      CHECK(inc.best_gap == brute_gap(mu, nu, inc.at_depth));
      continue;
    }
    CHECK(cmc::verify_certificate(*cert, mu, nu));
    std::set<Bitstring> region;
    for (const auto& s : testing::strings_of_length(cert->depth))
      if (nu(s) > mu(s)) region.insert(s);
    CHECK(expand(cert->cells.strings, cert->depth) == region);
  }
  // Two product measures far apart.
  const auto a = product(R(1, 5)), b = product(R(4, 5));
  const auto r = cmc::ortho_certificate(a, b, R(1, 100), 40);
  const auto* cert = std::get_if<cmc::OrthoCertificate>(&r);
  REQUIRE(cert);
  CHECK(cmc::verify_certificate(*cert, a, b));
  std::set<Bitstring> region;
  for (const auto& s : testing::strings_of_length(cert->depth))
    if (b(s) > a(s)) region.insert(s);
  CHECK(expand(cert->cells.strings, cert->depth) == region);
}

TEST_CASE("Kakutani pair at depth 40 admits no certificate") {
  // The affinity bound caps the depth-40 gap well below 9/10, so no cylinder
  // union can separate the measures at tolerance 1/20.
  const auto x = MeasureCode::product(cmc::ks_schedule(BitOracle::constant(0)));
  const auto y = MeasureCode::product(cmc::ks_schedule(BitOracle::constant(1)));
  const auto bound = cmc::gap_upper_bound(x, y, 40);
  REQUIRE(bound);
  CHECK(*bound < R(9, 10));
  CHECK(*bound > R(1, 2));
  const auto r = cmc::ortho_certificate(x, y, R(1, 20), 40);
  const auto* inc = std::get_if<cmc::OrthoInconclusive>(&r);
  REQUIRE(inc);
  CHECK(inc->best_gap <= *bound);
  CHECK(inc->best_gap == cmc::gap(x, y, inc->at_depth));
}

TEST_CASE("continuity moduli") {
  const auto u = MeasureCode::uniform();
  auto m = cmc::continuity_modulus(u, R(1, 4), 10);
  REQUIRE(std::holds_alternative<cmc::Modulus>(m));
  CHECK(std::get<cmc::Modulus>(m).level == 3);
  for (std::size_t k = 1; k <= 10; ++k) {
    m = cmc::continuity_modulus(u, Rational::dyadic(k), 32);
    REQUIRE(std::holds_alternative<cmc::Modulus>(m));
    CHECK(std::get<cmc::Modulus>(m).level == k + 1);
  }
  m = cmc::continuity_modulus(product(R(1, 3)), R(1, 2), 10);
  REQUIRE(std::holds_alternative<cmc::Modulus>(m));
  CHECK(std::get<cmc::Modulus>(m).level == 2);

  m = cmc::continuity_modulus(MeasureCode::dirac(Bitstring()), R(1, 2), 10);
  const auto* atom = std::get_if<cmc::AtomWitness>(&m);
  REQUIRE(atom);
  CHECK(atom->prefix == Bitstring::zeros(10));
  CHECK(atom->mass == R(1));

  // Heavy nodes at exactly epsilon do not make an atom witness.
  m = cmc::continuity_modulus(u, R(1, 4), 2);
  CHECK(std::holds_alternative<cmc::Inconclusive>(m));

  cmc::SweepLimits tight;
  tight.max_states = 16;
  CHECK(std::holds_alternative<cmc::Inconclusive>(cmc::continuity_modulus(u, Rational::dyadic(12), 32, tight)));

  // Brute-force levels on random codes.
  for (int trial = 0; trial < 15; ++trial) {
    const auto f = random_code();
    const Rational eps = testing::random_open_unit(9);
    const auto r = cmc::continuity_modulus(f, eps, 8);
    if (const auto* mod = std::get_if<cmc::Modulus>(&r)) {
      for (std::size_t n = 0; n <= mod->level; ++n) {
        bool all_small = true;
        for (const auto& s : testing::strings_of_length(n)) all_small = all_small && f(s) < eps;
        CHECK(all_small == (n == mod->level));
      }
    } else if (const auto* w = std::get_if<cmc::AtomWitness>(&r)) {
      for (std::size_t n = 0; n <= w->prefix.size(); ++n) CHECK(f(w->prefix.prefix(n)) > eps);
    }
  }
}

TEST_CASE("refuting absolute continuity") {
  const auto u = MeasureCode::uniform();
  const auto dirac = MeasureCode::dirac(Bitstring());
  const auto r = cmc::refute_abs_continuity(dirac, u, R(1, 2), 5, 20);
  const auto* w = std::get_if<cmc::RefutationWitness>(&r);
  REQUIRE(w);
  REQUIRE(w->stages.size() == 5);
  for (std::size_t j = 0; j < 5; ++j) {
    const auto& st = w->stages[j];
    CHECK(st.delta == Rational::dyadic(j + 1));
    CHECK(st.family.strings == std::vector<Bitstring>{Bitstring::zeros(j + 2)});
    CHECK(st.nu_mass < st.delta);
    CHECK(st.mu_mass >= R(1, 2));
    CHECK(cmc::measure_of_family(u, st.family) == st.nu_mass);
    CHECK(cmc::measure_of_family(dirac, st.family) == st.mu_mass);
  }
  CHECK(std::holds_alternative<cmc::Inconclusive>(cmc::refute_abs_continuity(u, u, R(1, 2), 3, 10)));

  // Orthogonality evidence in one direction gives a refutation in the other.
  for (int trial = 0; trial < 10; ++trial) {
    const auto a = product(testing::random_open_unit(5)), b = product(testing::random_open_unit(5));
    const auto cert = cmc::ortho_certificate(a, b, R(1, 10), 14);
    if (!std::holds_alternative<cmc::OrthoCertificate>(cert)) continue;
    const auto ref = cmc::refute_abs_continuity(b, a, R(1, 2), 2, 14);
    CHECK(std::holds_alternative<cmc::RefutationWitness>(ref));
  }
}

TEST_CASE("extending families") {
  const auto cands = cmc::perfect_family(4);
  auto r = cmc::extend_family({}, cands, R(1, 20), 40);
  const auto* ext = std::get_if<cmc::FamilyExtension>(&r);
  REQUIRE(ext);
  CHECK(ext->candidate == 0);
  CHECK(ext->certificates.empty());

  // Tolerance loose enough for a small certificate.
  const auto u = MeasureCode::uniform();
  r = cmc::extend_family({u}, cands, R(1, 4), 24);
  ext = std::get_if<cmc::FamilyExtension>(&r);
  REQUIRE(ext);
  REQUIRE(ext->certificates.size() == 1);
  CHECK(cmc::verify_certificate(ext->certificates[0], u, ext->measure));

  CHECK_THROWS_AS(cmc::extend_family({u, u}, cands, R(1, 20), 6), std::invalid_argument);
}

TEST_CASE("uniform against KS candidates at tolerance 1/20 and depth 40") {
  // Candidate 0 is the all-zero parameter. Its exact masses on {nu > mu} are
  // binomial sums; at depth 40 they miss the 1/20 thresholds.
  const auto u = MeasureCode::uniform();
  const auto ks0 = MeasureCode::product(cmc::ks_schedule(BitOracle::constant(0)));
  Rational mu_a, nu_a;
  const unsigned long d = 40;
  for (unsigned long z = 0; z <= d; ++z) {
    const Rational mu = Rational::dyadic(d);
    mpz_class three = 1;
    for (unsigned long i = 0; i < d - z; ++i) three *= 3;
    const Rational nu(three, mpz_class(1) << (2 * d));
    if (nu > mu) {
      mu_a += Rational(binom(d, z), 1) * mu;
      nu_a += Rational(binom(d, z), 1) * nu;
    }
  }
  CHECK(mu_a < R(1, 20));
  CHECK(nu_a <= R(19, 20));

  const auto r = cmc::extend_family({u}, cmc::perfect_family(4), R(1, 20), 40);
  const auto* fail = std::get_if<cmc::FamilyFailure>(&r);
  REQUIRE(fail);
  REQUIRE(fail->candidates.size() == 4);
  CHECK(fail->candidates[0].at_depth == 40);
  CHECK(fail->candidates[0].best_gap == nu_a - mu_a);
  for (const auto& c : fail->candidates) CHECK(c.reason == cmc::RejectReason::NoCertificate);
}
