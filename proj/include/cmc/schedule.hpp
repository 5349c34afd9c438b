#pragma once

#include <cstdint>
#include <memory>
#include <variant>
#include <vector>

#include "cmc/oracle.hpp"
#include "cmc/rational.hpp"

namespace cmc {

/// Rational approximant of 1/sqrt(n+1): truncation to 2n+4 binary digits.
/// Satisfies |r_n - 1/sqrt(n+1)| <= 2^-(2n+4).
Rational inverse_sqrt_approximant(std::uint64_t n);

/// A total map n -> alpha_n in (0,1): the probability that coordinate n of a
/// product measure is 0.
class Schedule {
 public:
  struct Constant {
    Rational alpha;
  };
  enum class Tail { Cycle, Last, Constant };
  struct Explicit {
    std::vector<Rational> values;
    Tail tail = Tail::Last;
    Rational tail_value;  // used when tail == Tail::Constant
  };
  /// alpha_n = (1 + r_n)/4 where x(n) = 1, and 1/4 where x(n) = 0.
  struct KS {
    BitOracle x;
  };
  using Rule = std::variant<Constant, Explicit, KS>;

  /// Throws std::invalid_argument unless 0 < alpha < 1.
  static Schedule constant(Rational alpha);
  static Schedule explicit_list(std::vector<Rational> values, Tail tail, Rational tail_value = Rational(1, 2));
  static Schedule ks(BitOracle x);

  Rational operator()(std::uint64_t n) const;
  const Rule& rule() const { return *rule_; }

 private:
  explicit Schedule(Rule rule) : rule_(std::make_shared<const Rule>(std::move(rule))) {}
  std::shared_ptr<const Rule> rule_;
};

/// ks_schedule: the parameter sequence alpha^x with rational approximants.
inline Schedule ks_schedule(BitOracle x) { return Schedule::ks(std::move(x)); }

}  // namespace cmc
