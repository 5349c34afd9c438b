#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <variant>
#include <vector>

#include "cmc/measure.hpp"
#include "cmc/oracle.hpp"
#include "cmc/rational.hpp"
#include "cmc/schedule.hpp"

namespace cmc {

/// f(s) = prod_{k<|s|} [alpha_k if s(k) = 0, else 1 - alpha_k].
inline MeasureCode product_code(Schedule schedule) { return MeasureCode::product(std::move(schedule)); }

/// The schedule of a code that is a product measure (Uniform counts, with alpha = 1/2).
std::optional<Schedule> product_schedule(const MeasureCode& code);

/// sum_{n<N} |x(n) - x'(n)| / (n+1), exactly.
Rational ei_partial_sum(const BitOracle& x, const BitOracle& y, std::uint64_t terms);

struct DivergenceCertificate {
  std::uint64_t terms = 0;  // N
  Rational partial_sum;
  Rational target;
};

struct Inconclusive {};

/// Least N <= budget whose E_I partial sum reaches target.
std::variant<DivergenceCertificate, Inconclusive> ei_divergence_certificate(const BitOracle& x, const BitOracle& y,
                                                                             const Rational& target,
                                                                             std::uint64_t budget);

/// Outward-rounded enclosure of the Bhattacharyya affinity
/// sqrt(a b) + sqrt((1-a)(1-b)), each root rounded to `bits` binary digits.
struct Interval {
  Rational lo;
  Rational hi;
};
Interval affinity_bounds(const Rational& a, const Rational& b, std::size_t bits);

struct HellingerReport {
  std::uint64_t terms = 0;
  Interval sum;
  std::size_t precision_bits = 0;
};

/// Encloses sum_{n<N} (1 - affinity(alpha_n, beta_n)). Width is at most N 2^-precision.
HellingerReport hellinger_partial(const Schedule& a, const Schedule& b, std::uint64_t terms,
                                  std::size_t precision_bits);

struct EquivalentFiniteDifference {
  std::optional<std::uint64_t> last_diff;  // nullopt when the sequences are identical
};
struct OrthogonalEvidence {
  DivergenceCertificate certificate;
};
using PairClass = std::variant<EquivalentFiniteDifference, OrthogonalEvidence, Inconclusive>;

/// Target used by classify_pair when none is given.
inline Rational default_divergence_target() { return Rational(2); }

/// Finite-difference equivalence is only reported from oracle metadata; orthogonality
/// evidence only from a divergence certificate; never both for one pair.
PairClass classify_pair(const BitOracle& x, const BitOracle& y, std::uint64_t budget,
                        const Rational& target = default_divergence_target());

/// m parameter sequences, pairwise E_I-inequivalent. Positions [2^k, 2^{k+1}) form
/// block k; sequence i is all ones on block k iff bit k of its block code is 1.
std::vector<BitOracle> perfect_family(std::size_t count);

/// Block code used by perfect_family: parity of (i AND v_k), v_k cycling through the
/// nonzero w-bit vectors, w = max(1, ceil(log2 count)).
int perfect_family_block_bit(std::size_t count, std::size_t member, std::uint64_t block);

}  // namespace cmc
