#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>
#include <string_view>

namespace cmc {

/// A finite binary string s, naming the cylinder N_s of all infinite
/// sequences extending s. Ordered shortlex: shorter first, then 0 < 1.
class Bitstring {
 public:
  Bitstring() = default;
  /// Accepts only '0' and '1'; throws std::invalid_argument otherwise.
  explicit Bitstring(std::string_view bits);

  static Bitstring zeros(std::size_t n) { return Bitstring(std::string(n, '0'), Trusted{}); }
  static Bitstring ones(std::size_t n) { return Bitstring(std::string(n, '1'), Trusted{}); }

  /// The n-th string in shortlex order: 0 -> empty, 1 -> "0", 2 -> "1", 3 -> "00", ...
  static Bitstring from_index(std::uint64_t n);
  /// Inverse of from_index; requires size() < 64.
  std::uint64_t index() const;

  std::size_t size() const { return bits_.size(); }
  bool empty() const { return bits_.empty(); }
  int operator[](std::size_t i) const { return bits_[i] == '1' ? 1 : 0; }
  int back() const { return (*this)[size() - 1]; }

  Bitstring child(int bit) const;
  Bitstring prefix(std::size_t n) const { return Bitstring(bits_.substr(0, n), Trusted{}); }
  Bitstring parent() const { return prefix(size() - 1); }
  Bitstring concat(const Bitstring& tail) const { return Bitstring(bits_ + tail.bits_, Trusted{}); }
  void push_back(int bit) { bits_.push_back(bit ? '1' : '0'); }

  /// True when this is an initial segment (not necessarily proper) of other.
  bool is_prefix_of(const Bitstring& other) const;
  bool all_zero_from(std::size_t pos) const;

  const std::string& str() const { return bits_; }

  friend bool operator==(const Bitstring&, const Bitstring&) = default;
  friend std::strong_ordering operator<=>(const Bitstring& a, const Bitstring& b);

 private:
  struct Trusted {};
  Bitstring(std::string bits, Trusted) : bits_(std::move(bits)) {}

  std::string bits_;
};

std::ostream& operator<<(std::ostream& os, const Bitstring& s);

/// enumerate_strings: the shortlex enumeration s_n of all finite binary strings.
inline Bitstring enumerate_strings(std::uint64_t n) { return Bitstring::from_index(n); }

}  // namespace cmc

template <>
struct std::hash<cmc::Bitstring> {
  std::size_t operator()(const cmc::Bitstring& s) const noexcept {
    return std::hash<std::string>{}(s.str());
  }
};
