#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <unordered_map>
#include <utility>
#include <variant>
#include <vector>

#include "cmc/bitstring.hpp"
#include "cmc/oracle.hpp"
#include "cmc/rational.hpp"
#include "cmc/schedule.hpp"

namespace cmc {

class MeasureCode;
class SpineCache;

/// Thread-safe cache of cylinder values. Bounded; lookups never change results.
class CylinderMemo {
 public:
  std::optional<Rational> find(const Bitstring& s) const;
  void store(const Bitstring& s, const Rational& value);

 private:
  static constexpr std::size_t kCapacity = std::size_t{1} << 20;
  mutable std::mutex mutex_;
  std::unordered_map<Bitstring, Rational> values_;
};

namespace expr {

struct Uniform {};

/// Point mass on one infinite branch.
struct Dirac {
  BitOracle branch;
};

/// Finitely many point masses; each leaf s carries its weight on the branch s0^inf.
struct FiniteSupport {
  std::vector<std::pair<Bitstring, Rational>> atoms;
};

struct Convex {
  std::vector<std::pair<Rational, MeasureCode>> terms;
};

struct Product {
  Schedule schedule;
};

/// Explicit values on strings of length <= depth. Missing entries are inferred
/// from the parent and sibling (or split evenly); below depth mass splits evenly.
struct Table {
  std::size_t depth = 0;
  std::map<Bitstring, Rational> entries;
  std::vector<Rational> values;  // dense, indexed by shortlex position
};

/// A payload embedded into a base measure along the base's splitting spine.
struct Coded {
  std::shared_ptr<const MeasureCode> base;
  BitOracle payload;
  std::size_t budget = 0;
  /// Declared payload length when the payload came from a finite bitstring.
  std::optional<Bitstring> finite_payload;
  std::shared_ptr<SpineCache> spine;
  std::shared_ptr<CylinderMemo> memo;
};

}  // namespace expr

/// Default bound on splitting-node searches, overridable through the
/// CMC_DEFAULT_BUDGET environment variable.
std::size_t default_budget();

/// An immutable handle to a measure code f: 2^{<omega} -> [0,1] with f(empty) = 1
/// and f(s) = f(s0) + f(s1). Cheap to copy; safe to share between threads.
class MeasureCode {
 public:
  using Expr = std::variant<expr::Uniform, expr::Dirac, expr::FiniteSupport, expr::Convex, expr::Product,
                            expr::Table, expr::Coded>;

  static MeasureCode uniform();
  static MeasureCode dirac(BitOracle branch);
  static MeasureCode dirac(const Bitstring& eventually_zero_prefix);
  /// Weights must lie in [0,1] and sum to 1 (std::invalid_argument otherwise).
  static MeasureCode finite_support(std::vector<std::pair<Bitstring, Rational>> atoms);
  static MeasureCode convex(std::vector<std::pair<Rational, MeasureCode>> terms);
  static MeasureCode product(Schedule schedule);
  /// Entries must lie in [0,1]; consistency is not enforced here (see validate_additivity).
  static MeasureCode table(std::size_t depth, std::map<Bitstring, Rational> entries);
  /// Raw constructor for coded measures; use encode() instead.
  static MeasureCode from_expr(Expr e);

  /// f(s) = mu_f(N_s), exactly.
  Rational operator()(const Bitstring& s) const;
  Rational eval(const Bitstring& s) const { return (*this)(s); }

  const Expr& expr() const { return *expr_; }
  template <class T>
  const T* as() const {
    return std::get_if<T>(expr_.get());
  }

 private:
  explicit MeasureCode(std::shared_ptr<const Expr> e) : expr_(std::move(e)) {}
  std::shared_ptr<const Expr> expr_;
};

inline Rational eval_cylinder(const MeasureCode& code, const Bitstring& s) { return code(s); }

struct AdditivityViolation {
  Bitstring at;
  Rational lhs;  // f(s), or f(empty) for the normalization check
  Rational rhs;  // f(s0) + f(s1), or 1
};

/// Checks f(empty) = 1 and additivity on every string of length < depth; returns
/// the first violation in shortlex order.
std::optional<AdditivityViolation> validate_additivity(const MeasureCode& code, std::size_t depth);

/// A finite union of cylinders.
struct CylinderFamily {
  std::vector<Bitstring> strings;

  /// Removes duplicates and cylinders nested inside another member; sorted shortlex.
  CylinderFamily disjointified() const;
};

/// mu(union of N_s over the family), exactly.
Rational measure_of_family(const MeasureCode& code, const CylinderFamily& family);

struct MetricBracket {
  Rational lo;
  Rational hi;
};

/// Encloses d(f,g) = sum_n 2^{-n-1} |f(s_n) - g(s_n)| using the first N terms.
MetricBracket metric_bracket(const MeasureCode& f, const MeasureCode& g, std::uint64_t terms);

/// The i-th member of a fixed enumeration of finitely supported rational codes
/// q-hat, each putting q(s) on the branch s0^inf for s in 2^n.
MeasureCode enumerate_dense(std::uint64_t i);

/// The underlying distribution q: 2^n -> Q of enumerate_dense(i), as (n, nonzero entries).
struct DenseDistribution {
  std::size_t level = 0;
  std::vector<std::pair<Bitstring, Rational>> entries;
};
DenseDistribution dense_distribution(std::uint64_t i);

}  // namespace cmc
