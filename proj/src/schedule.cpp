#include "cmc/schedule.hpp"

#include <mutex>
#include <stdexcept>

namespace cmc {

namespace {

void require_open_unit(const Rational& alpha) {
  if (alpha.sign() <= 0 || alpha >= Rational(1))
    throw std::invalid_argument("schedule value " + alpha.str() + " outside (0,1)");
}

Rational compute_inverse_sqrt(std::uint64_t n) {
  const unsigned long bits = 2 * static_cast<unsigned long>(n) + 4;
  // floor(2^bits / sqrt(n+1)) = isqrt(floor(2^(2 bits) / (n+1)))
  mpz_class scaled;
  mpz_ui_pow_ui(scaled.get_mpz_t(), 2, 2 * bits);
  mpz_fdiv_q_ui(scaled.get_mpz_t(), scaled.get_mpz_t(), static_cast<unsigned long>(n + 1));
  mpz_class root;
  mpz_sqrt(root.get_mpz_t(), scaled.get_mpz_t());
  mpz_class den;
  mpz_ui_pow_ui(den.get_mpz_t(), 2, bits);
  return Rational(root, den);
}

constexpr std::uint64_t kCachedApproximants = 4096;

}  // namespace

Rational inverse_sqrt_approximant(std::uint64_t n) {
  if (n >= kCachedApproximants) return compute_inverse_sqrt(n);
  static std::mutex mutex;
  static std::vector<Rational> cache;
  std::lock_guard lock(mutex);
  while (cache.size() <= n) cache.push_back(compute_inverse_sqrt(cache.size()));
  return cache[n];
}

namespace {

// (1 + r_n) / 4
Rational ks_heavy(std::uint64_t n) {
  if (n >= kCachedApproximants) return (Rational(1) + compute_inverse_sqrt(n)) / Rational(4);
  static std::mutex mutex;
  static std::vector<Rational> cache;
  std::lock_guard lock(mutex);
  while (cache.size() <= n) cache.push_back((Rational(1) + inverse_sqrt_approximant(cache.size())) / Rational(4));
  return cache[n];
}

}  // namespace

Schedule Schedule::constant(Rational alpha) {
  require_open_unit(alpha);
  return Schedule(Constant{std::move(alpha)});
}

Schedule Schedule::explicit_list(std::vector<Rational> values, Tail tail, Rational tail_value) {
  if (values.empty()) throw std::invalid_argument("explicit schedule needs at least one value");
  for (const auto& v : values) require_open_unit(v);
  if (tail == Tail::Constant) require_open_unit(tail_value);
  return Schedule(Explicit{std::move(values), tail, std::move(tail_value)});
}

Schedule Schedule::ks(BitOracle x) { return Schedule(KS{std::move(x)}); }

Rational Schedule::operator()(std::uint64_t n) const {
  if (const auto* c = std::get_if<Constant>(rule_.get())) return c->alpha;
  if (const auto* e = std::get_if<Explicit>(rule_.get())) {
    if (n < e->values.size()) return e->values[n];
    switch (e->tail) {
      case Tail::Cycle:
        return e->values[n % e->values.size()];
      case Tail::Last:
        return e->values.back();
      case Tail::Constant:
        return e->tail_value;
    }
  }
  const auto& ks = std::get<KS>(*rule_);
  static const Rational quarter(1, 4);
  if (ks.x(n) == 0) return quarter;
  return ks_heavy(n);
}

}  // namespace cmc
