#pragma once

#include <string>
#include <vector>

#include "support.hpp"

// Random DSL sources, written loosely (odd spacing, unreduced fractions, trailing commas).
namespace testing {

inline std::string pad() {
  static const char* const kPads[] = {"", "", " ", "  ", "\n", "\t "};
  return kPads[below(6)];
}

inline std::string loose(const cmc::Rational& r) {
  const std::uint64_t k = 1 + below(3);
  const std::string num = mpz_class(r.numerator() * static_cast<unsigned long>(k)).get_str();
  if (r.denominator() == 1 && k == 1 && below(2)) return num;
  return num + "/" + mpz_class(r.denominator() * static_cast<unsigned long>(k)).get_str();
}

inline std::string bits_text(std::size_t max_len) { return random_bits(below(max_len + 1)).str(); }

inline std::string sequence_text() {
  switch (below(3)) {
    case 0: return bits_text(5);
    case 1: return bits_text(4) + std::to_string(below(2)) + "*";
    default: return bits_text(4) + "(" + random_bits(1 + below(4)).str() + ")*";
  }
}

inline std::string schedule_text() {
  switch (below(3)) {
    case 0: return "const(" + pad() + loose(random_open_unit()) + pad() + ")";
    case 1: return "ks(" + sequence_text() + ")";
    default: {
      std::string out = "list(";
      const std::uint64_t n = 1 + below(4);
      for (std::uint64_t i = 0; i < n; ++i) out += (i ? "," + pad() : "") + loose(random_open_unit());
      out += pad() + ";" + pad();
      switch (below(3)) {
        case 0: out += "cycle"; break;
        case 1: out += "last"; break;
        default: out += loose(random_open_unit());
      }
      return out + ")";
    }
  }
}

// Weights summing to one, all positive.
inline std::vector<cmc::Rational> random_weights(std::size_t n) {
  std::vector<cmc::Rational> w;
  cmc::Rational rest(1);
  for (std::size_t i = 0; i + 1 < n; ++i) {
    w.push_back(rest * random_open_unit(6));
    rest -= w.back();
  }
  w.push_back(rest);
  return w;
}

inline std::string table_text() {
  const std::size_t depth = 1 + below(3);
  std::string out = "table(" + pad() + std::to_string(depth) + pad() + ";";
  std::vector<std::pair<cmc::Bitstring, cmc::Rational>> level{{cmc::Bitstring(), cmc::Rational(1)}};
  bool first = true;
  for (std::size_t d = 0; d < depth; ++d) {
    std::vector<std::pair<cmc::Bitstring, cmc::Rational>> next;
    for (const auto& [s, m] : level) {
      const cmc::Rational left = m * random_open_unit(5);
      next.emplace_back(s.child(0), left);
      next.emplace_back(s.child(1), m - left);
    }
    level = std::move(next);
    for (const auto& [s, m] : level) {
      out += (first ? "" : ",") + pad() + s.str() + "=" + loose(m);
      first = false;
    }
  }
  return out + (below(4) == 0 ? "," : "") + ")";
}

// Bases with splitting nodes everywhere, so coded(...) always encodes.
inline std::string nonatomic_text(int depth) {
  switch (below(depth > 0 ? 4 : 3)) {
    case 0: return "uniform";
    case 1: return "product(const(" + loose(random_open_unit()) + "))";
    case 2: return table_text();
    default: {
      const auto w = random_weights(2);
      return "convex(" + loose(w[0]) + ":" + pad() + nonatomic_text(depth - 1) + "," + pad() + loose(w[1]) + ":" +
             nonatomic_text(depth - 1) + ")";
    }
  }
}

inline std::string payload_text() {
  if (below(3) == 0) {
    static const char* const kHex = "0123456789abcdefABCDEF";
    std::string out = "0x";
    const std::uint64_t n = 1 + below(6);
    for (std::uint64_t i = 0; i < n; ++i) out += kHex[below(22)];
    return out;
  }
  return bits_text(20);
}

inline std::string measure_text(int depth = 2) {
  switch (below(depth > 0 ? 7 : 5)) {
    case 0: return "uniform";
    case 1: return "dirac(" + pad() + sequence_text() + pad() + ")";
    case 2: {
      const std::size_t n = 1 + below(3);
      const auto w = random_weights(n);
      std::string out = "finite(";
      for (std::size_t i = 0; i < n; ++i) {
        // distinct points: i ones then a random tail ending in 1
        const std::string point = std::string(i, '1') + "0" + bits_text(3) + "1";
        out += (i ? "," + pad() : "") + point + pad() + ":" + pad() + loose(w[i]);
      }
      return out + ")";
    }
    case 3: return "product(" + schedule_text() + ")";
    case 4: return table_text();
    case 5: {
      const std::size_t n = 2 + below(2);
      const auto w = random_weights(n);
      std::string out = "convex(";
      for (std::size_t i = 0; i < n; ++i) out += (i ? ", " : "") + loose(w[i]) + ": " + measure_text(depth - 1);
      return out + ")";
    }
    default: return "coded(" + pad() + nonatomic_text(1) + pad() + ";" + pad() + payload_text() + ")";
  }
}

inline std::vector<std::string> dsl_corpus(std::size_t n) {
  std::vector<std::string> out;
  while (out.size() < n) out.push_back(measure_text());
  return out;
}

struct Malformed {
  const char* text;
  std::size_t line, column;
};

// Syntax errors and where they are reported.
inline const std::vector<Malformed>& malformed_corpus() {
  static const std::vector<Malformed> kCases = {
      {"", 1, 1},
      {"unifrom", 1, 1},
      {"uniform x", 1, 9},
      {"dirac(", 1, 7},
      {"dirac(012)", 1, 9},
      {"dirac(01", 1, 9},
      {"dirac(0(1*)", 1, 10},
      {"finite()", 1, 8},
      {"finite(0 1/2)", 1, 10},
      {"finite(0: 1/0)", 1, 13},
      {"finite(0: 1/)", 1, 13},
      {"finite(0: a)", 1, 11},
      {"convex(1/2 uniform)", 1, 12},
      {"convex(1/2: uniform,, 1/2: uniform)", 1, 21},
      {"convex(1/2: unif)", 1, 13},
      {"product()", 1, 9},
      {"product(const 1/2)", 1, 15},
      {"product(list(1/2))", 1, 17},
      {"product(list(1/2; forever))", 1, 19},
      {"product(ks(2))", 1, 12},
      {"product(ks(01)", 1, 15},
      {"table(; 0=1/2)", 1, 7},
      {"table(1 0=1/2)", 1, 9},
      {"table(1; 0 1/2)", 1, 12},
      {"table(1; 0=1/2", 1, 15},
      {"coded(uniform 0x5)", 1, 15},
      {"coded(uniform; 0xg)", 1, 18},
      {"coded(uniform;\n  0x)", 2, 5},
      {"convex(\n  1/2: uniform,\n  1/2: dirac(2))", 3, 14},
      {"product(\n\tconst(1/3)\n\n  ]", 4, 3},
  };
  return kCases;
}

}  // namespace testing
