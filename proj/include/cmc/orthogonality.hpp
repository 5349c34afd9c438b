#pragma once

#include <cstddef>
#include <optional>
#include <variant>
#include <vector>

#include "cmc/bitstring.hpp"
#include "cmc/measure.hpp"
#include "cmc/oracle.hpp"
#include "cmc/product.hpp"
#include "cmc/rational.hpp"

namespace cmc {

/// Work limits for cell sweeps. A sweep keeps one state per live cell, or per
/// distinct likelihood ratio when both measures are products.
struct SweepLimits {
  std::size_t max_states = std::size_t{1} << 16;
  std::size_t max_cells = std::size_t{1} << 20;
};

/// sum over s in 2^d of max(nu(N_s) - mu(N_s), 0): the depth-d total variation
/// distance. Throws BudgetExceeded when depth d is out of reach of the limits.
Rational gap(const MeasureCode& mu, const MeasureCode& nu, std::size_t depth, const SweepLimits& limits = {});

/// Rigorous upper bound on gap(mu, nu, d) for two product codes, from the
/// Bhattacharyya affinity: gap <= sqrt(1 - affinity^2). nullopt for non-products.
std::optional<Rational> gap_upper_bound(const MeasureCode& mu, const MeasureCode& nu, std::size_t depth,
                                        std::size_t precision_bits = 64);

/// Evidence that mu and nu are orthogonal: a cylinder union of mu-mass < epsilon
/// and nu-mass > 1 - epsilon. Each cell lies inside {nu > mu} at `depth`; cells
/// may be shorter than `depth` when a whole cylinder qualifies.
struct OrthoCertificate {
  Rational epsilon;
  std::size_t depth = 0;
  CylinderFamily cells;
  Rational mu_mass;
  Rational nu_mass;
};

/// No certificate up to at_depth; best_gap is the exact gap there. at_depth is
/// below the requested max_depth when the sweep limits stopped the search.
struct OrthoInconclusive {
  Rational best_gap;
  std::size_t at_depth = 0;
};

using OrthoResult = std::variant<OrthoCertificate, OrthoInconclusive>;

/// Scans depths 1..max_depth with cells {nu > mu}. Requires 0 < epsilon < 1/2.
/// Throws BudgetExceeded when a qualifying depth is found but its cells exceed max_cells.
OrthoResult ortho_certificate(const MeasureCode& mu, const MeasureCode& nu, const Rational& epsilon,
                              std::size_t max_depth, const SweepLimits& limits = {});

/// Re-validates a certificate with measure_of_family and exact comparisons.
bool verify_certificate(const OrthoCertificate& cert, const MeasureCode& mu, const MeasureCode& nu);

struct Modulus {
  std::size_t level = 0;
};

/// A prefix whose mass, and the mass of every ancestor, exceeds epsilon.
struct AtomWitness {
  Bitstring prefix;
  Rational epsilon;
  Rational mass;
};

using ModulusResult = std::variant<Modulus, AtomWitness, Inconclusive>;

/// Least n <= max_depth with every level-n cylinder below epsilon; otherwise a
/// heavy path reaching max_depth, if one exists.
ModulusResult continuity_modulus(const MeasureCode& mu, const Rational& epsilon, std::size_t max_depth,
                                 const SweepLimits& limits = {});

struct RefutationStage {
  Rational delta;
  std::size_t depth = 0;
  CylinderFamily family;
  Rational nu_mass;  // < delta
  Rational mu_mass;  // >= epsilon
};

/// Stage-wise evidence against mu << nu, with deltas 2^-1, 2^-2, ...
struct RefutationWitness {
  Rational epsilon;
  std::vector<RefutationStage> stages;
};

std::variant<RefutationWitness, Inconclusive> refute_abs_continuity(const MeasureCode& mu, const MeasureCode& nu,
                                                                    const Rational& epsilon, std::size_t stages,
                                                                    std::size_t max_depth,
                                                                    const SweepLimits& limits = {});

struct FamilyExtension {
  MeasureCode measure;
  std::size_t candidate = 0;
  std::vector<OrthoCertificate> certificates;  // one per family member, in order
};

enum class RejectReason {
  NoCertificate,  // thresholds not met up to at_depth
  TooManyCells,   // thresholds met at at_depth, cells over SweepLimits::max_cells
};

/// Why one candidate was rejected: the first member it could not be certified against.
struct CandidateReport {
  std::size_t candidate = 0;
  std::size_t member = 0;
  Rational best_gap;
  std::size_t at_depth = 0;
  RejectReason reason = RejectReason::NoCertificate;
};

struct FamilyFailure {
  std::vector<CandidateReport> candidates;
};

struct ExtendOptions {
  bool recheck_family = true;
  SweepLimits limits;
};

/// First product measure mu^x over the candidates that is certified orthogonal to
/// every family member. Throws std::invalid_argument when the re-check of the
/// input family fails.
std::variant<FamilyExtension, FamilyFailure> extend_family(const std::vector<MeasureCode>& family,
                                                           const std::vector<BitOracle>& candidates,
                                                           const Rational& epsilon, std::size_t max_depth,
                                                           const ExtendOptions& options = {});

}  // namespace cmc
