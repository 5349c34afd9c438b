#pragma once

#include <cstddef>
#include <mutex>
#include <optional>
#include <variant>
#include <vector>

#include "cmc/bitstring.hpp"
#include "cmc/measure.hpp"
#include "cmc/oracle.hpp"
#include "cmc/rational.hpp"

namespace cmc {

/// Shortlex-least t extending s whose two children both carry positive mass,
/// among extensions of length <= |s| + budget.
/// Throws ZeroMass when code(s) = 0 and BudgetExceeded when no such t exists in range.
Bitstring splitting_node(const MeasureCode& code, const Bitstring& s, std::size_t budget);

/// One node of the splitting spine, with the masses needed to read or write a bit there.
struct SpineNode {
  Bitstring node;
  Rational mass;
  Rational left;   // code(node 0)
  Rational right;  // code(node 1)
};

/// Lazily computed spine t_0, t_1, ... of a code: t_0 is the first splitting
/// node above the root and t_{k+1} is the splitting node above t_k 0.
/// Thread-safe; each node is searched for once.
class SpineCache {
 public:
  SpineCache(MeasureCode code, std::size_t budget);

  /// Node k. When max_length is given and t_k is provably longer, returns
  /// std::nullopt without searching past max_length.
  std::optional<SpineNode> node(std::size_t k, std::optional<std::size_t> max_length = std::nullopt);

  const MeasureCode& code() const { return code_; }
  std::size_t budget() const { return budget_; }

 private:
  MeasureCode code_;
  std::size_t budget_;
  std::mutex mutex_;
  std::vector<SpineNode> nodes_;
  // Search state for the next node: where the search began and where it stands.
  std::optional<Bitstring> search_start_;
  Bitstring cursor_;
};

struct SplittingSpine {
  std::vector<Bitstring> nodes;  // t_0 .. t_n
  MeasureCode base;
};

/// The first n + 1 spine nodes t_0 .. t_n.
SplittingSpine spine(const MeasureCode& code, std::size_t n, std::size_t budget);

/// A measure G(f, z) carrying payload z on the spine of f, equivalent to f.
class CodedMeasure {
 public:
  explicit CodedMeasure(MeasureCode code);  // must hold an expr::Coded

  const MeasureCode& code() const { return code_; }
  operator const MeasureCode&() const { return code_; }  // NOLINT(google-explicit-constructor)
  const MeasureCode& base() const { return *coded().base; }
  const BitOracle& payload() const { return coded().payload; }
  std::size_t budget() const { return coded().budget; }
  Rational operator()(const Bitstring& s) const { return code_(s); }

 private:
  const expr::Coded& coded() const { return *code_.as<expr::Coded>(); }
  MeasureCode code_;
};

/// G(f, z): at spine node t_k of f the children get 2/3 and 1/3 of the parent
/// (left heavy when z(k) = 1, right heavy when z(k) = 0); elsewhere g follows
/// the conditional masses of f.
CodedMeasure encode(const MeasureCode& f, BitOracle payload, std::size_t budget);
/// Payload given as a finite bitstring, extended by zeros; printable.
CodedMeasure encode(const MeasureCode& f, const Bitstring& payload, std::size_t budget);

/// First k payload bits read off the spine of g by exact 2/3 : 1/3 ratio tests.
/// Throws NotInCodingDomain at the first spine node without either pattern.
Bitstring decode(const MeasureCode& g, std::size_t k, std::size_t budget);

struct CodingDomainCheck {
  bool ok = true;
  std::size_t failed_index = 0;  // meaningful when !ok
  Bitstring failed_node;
};

/// Whether the first k spine nodes of g all carry a payload bit.
CodingDomainCheck in_coding_domain(const MeasureCode& g, std::size_t k, std::size_t budget);

/// theta(s) = g(s)/f(s), or 0 where f(s) = 0.
Rational density(const CodedMeasure& g, const Bitstring& s);

struct Stabilized {
  Rational theta;
};
struct NotYetStable {};
using DensityLimit = std::variant<Stabilized, NotYetStable>;

/// Stabilized(theta(prefix)) once prefix has left the infinite spine t_inf
/// (theta is then constant on every extension), NotYetStable while prefix lies on it.
DensityLimit density_limit(const CodedMeasure& g, const Bitstring& prefix);

/// Strings of length <= depth that leave t_inf at their last bit, ordered by length.
std::vector<Bitstring> offspine_decomposition(const MeasureCode& f, std::size_t depth, std::size_t budget);

/// t_inf restricted to the given length.
Bitstring spine_path(const MeasureCode& f, std::size_t length, std::size_t budget);

}  // namespace cmc
