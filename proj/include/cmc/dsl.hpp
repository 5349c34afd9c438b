#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "cmc/errors.hpp"
#include "cmc/measure.hpp"
#include "cmc/oracle.hpp"
#include "cmc/schedule.hpp"

namespace cmc {

/// Syntax error with a 1-based position and the tokens that would have been accepted.
class ParseError : public Error {
 public:
  ParseError(std::size_t line, std::size_t column, std::vector<std::string> expected, std::string found);
  std::size_t line() const { return line_; }
  std::size_t column() const { return column_; }
  const std::vector<std::string>& expected() const { return expected_; }
  const std::string& found() const { return found_; }

 private:
  std::size_t line_, column_;
  std::vector<std::string> expected_;
  std::string found_;
};

/// measure := uniform | dirac(seq) | finite(bits: r, ...) | convex(r: measure, ...)
///          | product(schedule) | table(depth; bits=r, ...) | coded(measure; payload)
/// Throws ParseError on syntax errors and SemanticError on ill-formed measures.
/// Coded measures use `budget` for their splitting searches (default_budget() when 0).
MeasureCode parse_measure(std::string_view text, std::size_t budget = 0);

/// schedule := const(r) | ks(seq) | list(r, ...; cycle|last|r)
Schedule parse_schedule(std::string_view text);

/// seq := bits (followed by zeros) | bits c* | bits(c...)*
BitOracle parse_sequence(std::string_view text);

/// payload := 0x hex | bits
Bitstring parse_payload(std::string_view text);

/// Canonical text. Throws NotSerializable for opaque oracles.
std::string print(const MeasureCode& code);
std::string print(const Schedule& schedule);
std::string print(const BitOracle& sequence);
std::string print_payload(const Bitstring& payload);

}  // namespace cmc
