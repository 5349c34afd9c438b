#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "cmc/bitstring.hpp"

namespace cmc {

/// Finite description of an eventually periodic sequence: prefix, then cycle
/// repeated forever. Canonical when the cycle is primitive and the prefix
/// cannot be shortened by rotating the cycle.
struct PeriodicForm {
  Bitstring prefix;
  Bitstring cycle;

  PeriodicForm canonical() const;
  int at(std::uint64_t n) const;
  friend bool operator==(const PeriodicForm&, const PeriodicForm&) = default;
};

/// A total infinite bit sequence x: N -> {0,1}, queried pointwise. Oracles are
/// immutable and cheap to copy. Two kinds of metadata are tracked so callers
/// can reason about infinitely many positions: an eventually periodic finite
/// description, and a declared finite set of flipped positions relative to a
/// shared root sequence.
class BitOracle {
 public:
  using Function = std::function<int(std::uint64_t)>;

  /// The all-zeros sequence.
  BitOracle();

  static BitOracle periodic(Bitstring prefix, Bitstring cycle);
  static BitOracle eventually_zero(Bitstring prefix);
  static BitOracle constant(int bit);
  /// An opaque sequence; label is informational only.
  static BitOracle function(Function fn, std::string label = {});

  /// Same sequence with the bits at the given positions inverted.
  BitOracle with_flips(std::vector<std::uint64_t> positions) const;

  int operator()(std::uint64_t n) const;
  Bitstring take(std::size_t n) const;

  /// Canonical periodic description, if one is known.
  std::optional<PeriodicForm> periodic_form() const;
  const std::string& label() const;

  /// Positions where the two sequences differ, when metadata proves the set
  /// is finite; std::nullopt when that cannot be established.
  std::optional<std::vector<std::uint64_t>> finite_difference(const BitOracle& other) const;

 private:
  struct Source;
  BitOracle(std::shared_ptr<const Source> root, std::vector<std::uint64_t> flips);

  std::shared_ptr<const Source> root_;
  std::vector<std::uint64_t> flips_;  // sorted, unique
};

}  // namespace cmc
