#include "cmc/bitstring.hpp"

#include <bit>
#include <ostream>
#include <stdexcept>

namespace cmc {

Bitstring::Bitstring(std::string_view bits) : bits_(bits) {
  for (char c : bits_)
    if (c != '0' && c != '1') throw std::invalid_argument("bitstring may only contain '0' and '1'");
}

Bitstring Bitstring::from_index(std::uint64_t n) {
  // Strings of length L occupy indices [2^L - 1, 2^{L+1} - 1).
  if (n == UINT64_MAX) return zeros(64);
  const std::uint64_t m = n + 1;
  const int length = std::bit_width(m) - 1;
  const std::uint64_t offset = m - (std::uint64_t{1} << length);
  std::string bits(static_cast<std::size_t>(length), '0');
  for (int i = 0; i < length; ++i)
    if ((offset >> (length - 1 - i)) & 1U) bits[static_cast<std::size_t>(i)] = '1';
  return Bitstring(std::move(bits), Trusted{});
}

std::uint64_t Bitstring::index() const {
  if (size() >= 64) throw std::out_of_range("bitstring too long for a 64-bit shortlex index");
  std::uint64_t offset = 0;
  for (char c : bits_) offset = (offset << 1) | (c == '1' ? 1U : 0U);
  return (std::uint64_t{1} << size()) - 1 + offset;
}

Bitstring Bitstring::child(int bit) const {
  Bitstring out = *this;
  out.push_back(bit);
  return out;
}

bool Bitstring::is_prefix_of(const Bitstring& other) const {
  return size() <= other.size() && other.bits_.compare(0, size(), bits_) == 0;
}

bool Bitstring::all_zero_from(std::size_t pos) const {
  for (std::size_t i = pos; i < bits_.size(); ++i)
    if (bits_[i] != '0') return false;
  return true;
}

std::strong_ordering operator<=>(const Bitstring& a, const Bitstring& b) {
  if (a.size() != b.size()) return a.size() <=> b.size();
  const int c = a.bits_.compare(b.bits_);
  return c < 0 ? std::strong_ordering::less
               : (c > 0 ? std::strong_ordering::greater : std::strong_ordering::equal);
}

std::ostream& operator<<(std::ostream& os, const Bitstring& s) { return os << s.str(); }

}  // namespace cmc
