#include "cmc/product.hpp"

#include <bit>
#include <stdexcept>

namespace cmc {

std::optional<Schedule> product_schedule(const MeasureCode& code) {
  if (code.as<expr::Uniform>()) return Schedule::constant(Rational(1, 2));
  if (const auto* p = code.as<expr::Product>()) return p->schedule;
  return std::nullopt;
}

Rational ei_partial_sum(const BitOracle& x, const BitOracle& y, std::uint64_t terms) {
  Rational sum;
  for (std::uint64_t n = 0; n < terms; ++n)
    if (x(n) != y(n)) sum += Rational(1, static_cast<unsigned long>(n + 1));
  return sum;
}

std::variant<DivergenceCertificate, Inconclusive> ei_divergence_certificate(const BitOracle& x, const BitOracle& y,
                                                                             const Rational& target,
                                                                             std::uint64_t budget) {
  if (target.sign() <= 0) throw std::invalid_argument("divergence target must be positive");
  // Accumulate over a common denominator; reduce once at the end.
  mpz_class num = 0, den = 1;
  for (std::uint64_t n = 0; n < budget; ++n) {
    if (x(n) == y(n)) continue;
    const unsigned long k = static_cast<unsigned long>(n + 1);
    num = num * k + den;
    den *= k;
    const mpz_class g = gcd(num, den);
    if (g != 1) {
      num /= g;
      den /= g;
    }
    Rational sum(num, den);
    if (sum >= target) return DivergenceCertificate{n + 1, std::move(sum), target};
  }
  return Inconclusive{};
}

namespace {

// floor and ceiling of sqrt(q) * 2^bits.
std::pair<mpz_class, mpz_class> scaled_sqrt(const Rational& q, std::size_t bits) {
  mpz_class scaled = q.numerator();
  mpz_mul_2exp(scaled.get_mpz_t(), scaled.get_mpz_t(), 2 * bits);
  mpz_class remainder;
  mpz_class quotient;
  const mpz_class den = q.denominator();
  mpz_fdiv_qr(quotient.get_mpz_t(), remainder.get_mpz_t(), scaled.get_mpz_t(), den.get_mpz_t());
  mpz_class root, rem;
  mpz_sqrtrem(root.get_mpz_t(), rem.get_mpz_t(), quotient.get_mpz_t());
  const bool exact = remainder == 0 && rem == 0;
  return {root, exact ? root : root + 1};
}

}  // namespace

Interval affinity_bounds(const Rational& a, const Rational& b, std::size_t bits) {
  const Rational one(1);
  auto [lo1, hi1] = scaled_sqrt(a * b, bits);
  auto [lo2, hi2] = scaled_sqrt((one - a) * (one - b), bits);
  mpz_class den;
  mpz_ui_pow_ui(den.get_mpz_t(), 2, bits);
  Rational lo(mpz_class(lo1 + lo2), den);
  Rational hi(mpz_class(hi1 + hi2), den);
  // Cauchy-Schwarz: the affinity never exceeds 1.
  if (hi > one) hi = one;
  if (lo > hi) lo = hi;
  return {std::move(lo), std::move(hi)};
}

HellingerReport hellinger_partial(const Schedule& a, const Schedule& b, std::uint64_t terms,
                                  std::size_t precision_bits) {
  if (precision_bits < 1) throw std::invalid_argument("precision must be at least one bit");
  HellingerReport report{terms, {Rational(0), Rational(0)}, precision_bits};
  const Rational one(1);
  for (std::uint64_t n = 0; n < terms; ++n) {
    const Rational alpha = a(n), beta = b(n);
    if (alpha == beta) continue;
    // Two roots at precision+1 keep each term's width within 2^-precision.
    const Interval aff = affinity_bounds(alpha, beta, precision_bits + 1);
    report.sum.lo += one - aff.hi;
    report.sum.hi += one - aff.lo;
  }
  return report;
}

PairClass classify_pair(const BitOracle& x, const BitOracle& y, std::uint64_t budget, const Rational& target) {
  if (const auto diff = x.finite_difference(y)) {
    if (diff->empty()) return EquivalentFiniteDifference{std::nullopt};
    if (diff->back() < budget) return EquivalentFiniteDifference{diff->back()};
    // Declared E_I-equivalent: a divergence certificate would be false evidence.
    return Inconclusive{};
  }
  auto cert = ei_divergence_certificate(x, y, target, budget);
  if (auto* c = std::get_if<DivergenceCertificate>(&cert)) return OrthogonalEvidence{std::move(*c)};
  return Inconclusive{};
}

int perfect_family_block_bit(std::size_t count, std::size_t member, std::uint64_t block) {
  const unsigned width = count <= 2 ? 1U : static_cast<unsigned>(std::bit_width(count - 1));
  const std::uint64_t nonzero = (std::uint64_t{1} << width) - 1;
  const std::uint64_t v = block % nonzero + 1;
  return std::popcount(static_cast<std::uint64_t>(member) & v) & 1;
}

std::vector<BitOracle> perfect_family(std::size_t count) {
  if (count < 1) throw std::invalid_argument("perfect_family needs at least one member");
  std::vector<BitOracle> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    out.push_back(BitOracle::function(
        [count, i](std::uint64_t n) -> int {
          if (n == 0) return 0;
          const auto block = static_cast<std::uint64_t>(std::bit_width(n) - 1);
          return perfect_family_block_bit(count, i, block);
        },
        "family(" + std::to_string(count) + "):" + std::to_string(i)));
  }
  return out;
}

}  // namespace cmc
