#pragma once

#include <cstdint>
#include <map>
#include <random>
#include <vector>

#include "cmc/bitstring.hpp"
#include "cmc/measure.hpp"
#include "cmc/rational.hpp"

namespace testing {

inline std::mt19937_64& rng() {
  static std::mt19937_64 gen(0x5eedcafe);
  return gen;
}

inline std::uint64_t below(std::uint64_t n) { return std::uniform_int_distribution<std::uint64_t>(0, n - 1)(rng()); }

inline cmc::Bitstring random_bits(std::size_t n) {
  cmc::Bitstring s;
  for (std::size_t i = 0; i < n; ++i) s.push_back(static_cast<int>(below(2)));
  return s;
}

// p/q with 0 < p < q <= max_den
inline cmc::Rational random_open_unit(long max_den = 12) {
  const long q = 2 + static_cast<long>(below(static_cast<std::uint64_t>(max_den - 1)));
  const long p = 1 + static_cast<long>(below(static_cast<std::uint64_t>(q - 1)));
  return cmc::Rational(p, static_cast<unsigned long>(q));
}

// Table code with every cell of the given depth positive.
inline cmc::MeasureCode random_table(std::size_t depth) {
  std::map<cmc::Bitstring, cmc::Rational> entries;
  std::vector<std::pair<cmc::Bitstring, cmc::Rational>> level{{cmc::Bitstring(), cmc::Rational(1)}};
  for (std::size_t d = 0; d < depth; ++d) {
    std::vector<std::pair<cmc::Bitstring, cmc::Rational>> next;
    for (const auto& [s, m] : level) {
      const cmc::Rational left = m * random_open_unit(7);
      next.emplace_back(s.child(0), left);
      next.emplace_back(s.child(1), m - left);
    }
    level = std::move(next);
    for (const auto& [s, m] : level) entries.emplace(s, m);
  }
  return cmc::MeasureCode::table(depth, std::move(entries));
}

// Every string of length <= depth, shortlex.
inline std::vector<cmc::Bitstring> strings_up_to(std::size_t depth) {
  std::vector<cmc::Bitstring> out;
  const std::uint64_t n = (std::uint64_t{1} << (depth + 1)) - 1;
  for (std::uint64_t i = 0; i < n; ++i) out.push_back(cmc::Bitstring::from_index(i));
  return out;
}

inline std::vector<cmc::Bitstring> strings_of_length(std::size_t n) {
  std::vector<cmc::Bitstring> out;
  for (std::uint64_t i = (std::uint64_t{1} << n) - 1; i < (std::uint64_t{1} << (n + 1)) - 1; ++i)
    out.push_back(cmc::Bitstring::from_index(i));
  return out;
}

}  // namespace testing
