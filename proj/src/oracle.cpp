#include "cmc/oracle.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>
#include <variant>

namespace cmc {

PeriodicForm PeriodicForm::canonical() const {
  std::string prefix = this->prefix.str();
  std::string cycle = this->cycle.str();
  const std::size_t n = cycle.size();
  for (std::size_t period = 1; period < n; ++period) {
    if (n % period != 0) continue;
    bool ok = true;
    for (std::size_t i = period; i < n && ok; ++i) ok = cycle[i] == cycle[i - period];
    if (ok) {
      cycle.resize(period);
      break;
    }
  }
  while (!prefix.empty() && prefix.back() == cycle.back()) {
    cycle.insert(cycle.begin(), cycle.back());
    cycle.pop_back();
    prefix.pop_back();
  }
  return {Bitstring(prefix), Bitstring(cycle)};
}

int PeriodicForm::at(std::uint64_t n) const {
  if (n < prefix.size()) return prefix[static_cast<std::size_t>(n)];
  return cycle[static_cast<std::size_t>((n - prefix.size()) % cycle.size())];
}

struct BitOracle::Source {
  std::variant<PeriodicForm, Function> rule;
  std::string label;
};

BitOracle::BitOracle() : BitOracle(periodic(Bitstring(), Bitstring("0"))) {}

BitOracle::BitOracle(std::shared_ptr<const Source> root, std::vector<std::uint64_t> flips)
    : root_(std::move(root)), flips_(std::move(flips)) {}

BitOracle BitOracle::periodic(Bitstring prefix, Bitstring cycle) {
  if (cycle.empty()) throw std::invalid_argument("periodic oracle needs a non-empty cycle");
  PeriodicForm form = PeriodicForm{std::move(prefix), std::move(cycle)}.canonical();
  return BitOracle(std::make_shared<const Source>(Source{std::move(form), {}}), {});
}

BitOracle BitOracle::eventually_zero(Bitstring prefix) { return periodic(std::move(prefix), Bitstring("0")); }

BitOracle BitOracle::constant(int bit) { return periodic(Bitstring(), bit ? Bitstring("1") : Bitstring("0")); }

BitOracle BitOracle::function(Function fn, std::string label) {
  if (!fn) throw std::invalid_argument("empty oracle function");
  return BitOracle(std::make_shared<const Source>(Source{std::move(fn), std::move(label)}), {});
}

BitOracle BitOracle::with_flips(std::vector<std::uint64_t> positions) const {
  std::sort(positions.begin(), positions.end());
  positions.erase(std::unique(positions.begin(), positions.end()), positions.end());
  std::vector<std::uint64_t> merged;
  std::set_symmetric_difference(flips_.begin(), flips_.end(), positions.begin(), positions.end(),
                                std::back_inserter(merged));
  return BitOracle(root_, std::move(merged));
}

int BitOracle::operator()(std::uint64_t n) const {
  int bit = std::visit(
      [n](const auto& rule) -> int {
        if constexpr (std::is_same_v<std::decay_t<decltype(rule)>, PeriodicForm>) {
          return rule.at(n);
        } else {
          return rule(n) ? 1 : 0;
        }
      },
      root_->rule);
  if (std::binary_search(flips_.begin(), flips_.end(), n)) bit ^= 1;
  return bit;
}

Bitstring BitOracle::take(std::size_t n) const {
  Bitstring out;
  for (std::size_t i = 0; i < n; ++i) out.push_back((*this)(i));
  return out;
}

std::optional<PeriodicForm> BitOracle::periodic_form() const {
  const auto* base = std::get_if<PeriodicForm>(&root_->rule);
  if (base == nullptr) return std::nullopt;
  if (flips_.empty()) return *base;
  const std::size_t length = std::max<std::size_t>(base->prefix.size(), static_cast<std::size_t>(flips_.back()) + 1);
  const std::size_t cycle_start = length;
  Bitstring cycle;
  for (std::size_t i = 0; i < base->cycle.size(); ++i) cycle.push_back(base->at(cycle_start + i));
  return PeriodicForm{take(length), cycle}.canonical();
}

const std::string& BitOracle::label() const { return root_->label; }

std::optional<std::vector<std::uint64_t>> BitOracle::finite_difference(const BitOracle& other) const {
  if (root_ == other.root_) {
    std::vector<std::uint64_t> diff;
    std::set_symmetric_difference(flips_.begin(), flips_.end(), other.flips_.begin(), other.flips_.end(),
                                  std::back_inserter(diff));
    return diff;
  }
  const auto a = periodic_form();
  const auto b = other.periodic_form();
  if (!a || !b) return std::nullopt;
  const std::uint64_t start = std::max(a->prefix.size(), b->prefix.size());
  const std::uint64_t period = std::lcm(a->cycle.size(), b->cycle.size());
  for (std::uint64_t n = start; n < start + period; ++n)
    if (a->at(n) != b->at(n)) return std::nullopt;
  std::vector<std::uint64_t> diff;
  for (std::uint64_t n = 0; n < start; ++n)
    if (a->at(n) != b->at(n)) diff.push_back(n);
  return diff;
}

}  // namespace cmc
