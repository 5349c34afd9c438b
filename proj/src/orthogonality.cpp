#include "cmc/orthogonality.hpp"

#include <algorithm>
#include <map>
#include <memory>
#include <set>
#include <stdexcept>

#include "cmc/errors.hpp"

namespace cmc {

namespace {

// Masses of A_d = {s in 2^d : nu(s) > mu(s)}; gap = nu - mu.
struct LevelMasses {
  Rational mu;
  Rational nu;
};

class Sweep {
 public:
  virtual ~Sweep() = default;
  /// Moves one level down; false (state unchanged) when the limits would be exceeded.
  virtual bool advance() = 0;
  virtual LevelMasses current() const = 0;
  std::size_t depth() const { return depth_; }

 protected:
  std::size_t depth_ = 0;
};

// Two product measures: cells with equal likelihood ratio L = nu/mu are
// interchangeable for every deeper level, so they are merged.
class ProductSweep final : public Sweep {
 public:
  ProductSweep(Schedule a, Schedule b, std::size_t max_states)
      : a_(std::move(a)), b_(std::move(b)), max_states_(max_states) {
    states_.emplace(Rational(1), Rational(1));
  }

  bool advance() override {
    const Rational alpha = a_(depth_), beta = b_(depth_);
    if (alpha == beta) {
      ++depth_;
      return true;
    }
    const Rational one(1);
    const Rational c0 = beta / alpha, c1 = (one - beta) / (one - alpha);
    std::map<Rational, Rational> next;
    for (const auto& [ratio, mass] : states_) {
      next[ratio * c0] += mass * alpha;
      next[ratio * c1] += mass * (one - alpha);
      if (next.size() > max_states_) return false;
    }
    states_ = std::move(next);
    ++depth_;
    return true;
  }

  LevelMasses current() const override {
    LevelMasses out;
    const Rational one(1);
    for (auto it = states_.upper_bound(one); it != states_.end(); ++it) {
      out.mu += it->second;
      out.nu += it->first * it->second;
    }
    return out;
  }

 private:
  Schedule a_, b_;
  std::size_t max_states_;
  std::map<Rational, Rational> states_;  // ratio -> total mu-mass
};

// Arbitrary codes: one state per cell where both masses are positive. Cells of
// mu-mass 0 go entirely into A; cells of nu-mass 0 never do.
class CellSweep final : public Sweep {
 public:
  struct Live {
    Bitstring s;
    Rational mu, nu;
  };

  CellSweep(MeasureCode mu, MeasureCode nu, std::size_t max_states)
      : mu_(std::move(mu)), nu_(std::move(nu)), max_states_(max_states) {
    const Bitstring root;
    Rational m = mu_(root), n = nu_(root);
    absorb(root, std::move(m), std::move(n), live_);
  }

  bool advance() override {
    std::vector<Live> next;
    std::vector<Bitstring> settled;
    Rational settled_nu;
    for (const auto& cell : live_) {
      for (int bit = 0; bit < 2; ++bit) {
        const Bitstring c = cell.s.child(bit);
        Rational m = mu_(c), n = nu_(c);
        if (m.is_zero()) {
          if (n.sign() > 0) {
            settled_nu += n;
            settled.push_back(c);
          }
        } else if (n.sign() > 0) {
          next.push_back(Live{c, std::move(m), std::move(n)});
          if (next.size() > max_states_) return false;
        }
      }
    }
    live_ = std::move(next);
    settled_nu_ += settled_nu;
    settled_.insert(settled_.end(), settled.begin(), settled.end());
    ++depth_;
    return true;
  }

  LevelMasses current() const override {
    LevelMasses out{Rational(0), settled_nu_};
    for (const auto& cell : live_) {
      if (cell.nu > cell.mu) {
        out.mu += cell.mu;
        out.nu += cell.nu;
      }
    }
    return out;
  }

  std::vector<Bitstring> selected_cells() const {
    std::vector<Bitstring> out = settled_;
    for (const auto& cell : live_)
      if (cell.nu > cell.mu) out.push_back(cell.s);
    return out;
  }

 private:
  void absorb(const Bitstring& s, Rational m, Rational n, std::vector<Live>& into) {
    if (m.is_zero()) {
      if (n.sign() > 0) {
        settled_nu_ += n;
        settled_.push_back(s);
      }
    } else if (n.sign() > 0) {
      into.push_back(Live{s, std::move(m), std::move(n)});
    }
  }

  MeasureCode mu_, nu_;
  std::size_t max_states_;
  std::vector<Live> live_;
  std::vector<Bitstring> settled_;
  Rational settled_nu_;
};

std::unique_ptr<Sweep> make_sweep(const MeasureCode& mu, const MeasureCode& nu, const SweepLimits& limits) {
  auto a = product_schedule(mu);
  auto b = product_schedule(nu);
  if (a && b) return std::make_unique<ProductSweep>(std::move(*a), std::move(*b), limits.max_states);
  return std::make_unique<CellSweep>(mu, nu, limits.max_states);
}

// Replaces sibling pairs by their parent until no pair remains.
std::vector<Bitstring> merge_siblings(std::vector<Bitstring> cells) {
  std::set<Bitstring> set(cells.begin(), cells.end());
  std::size_t longest = 0;
  for (const auto& s : set) longest = std::max(longest, s.size());
  for (std::size_t len = longest; len > 0; --len) {
    std::vector<Bitstring> at_len;
    for (const auto& s : set)
      if (s.size() == len && s.back() == 0) at_len.push_back(s);
    for (const auto& s : at_len) {
      const Bitstring sibling = s.parent().child(1);
      if (set.count(sibling)) {
        set.erase(s);
        set.erase(sibling);
        set.insert(s.parent());
      }
    }
  }
  return {set.begin(), set.end()};
}

// Maximal cylinders inside {L > 1} at `depth` for two product schedules.
std::vector<Bitstring> product_cells(const Schedule& a, const Schedule& b, std::size_t depth,
                                     const SweepLimits& limits) {
  const Rational one(1);
  std::vector<Rational> c0(depth), c1(depth);
  std::vector<Rational> min_rest(depth + 1, one), max_rest(depth + 1, one);
  for (std::size_t k = 0; k < depth; ++k) {
    const Rational alpha = a(k), beta = b(k);
    c0[k] = beta / alpha;
    c1[k] = (one - beta) / (one - alpha);
  }
  for (std::size_t k = depth; k-- > 0;) {
    min_rest[k] = min_rest[k + 1] * min(c0[k], c1[k]);
    max_rest[k] = max_rest[k + 1] * max(c0[k], c1[k]);
  }
  std::vector<Bitstring> out;
  std::size_t visited = 0;
  std::vector<std::pair<Bitstring, Rational>> stack{{Bitstring(), one}};
  while (!stack.empty()) {
    auto [s, ratio] = std::move(stack.back());
    stack.pop_back();
    if (++visited > 4 * limits.max_cells) throw BudgetExceeded("certificate cell search exceeded its limit");
    const std::size_t k = s.size();
    if (ratio * min_rest[k] > one) {
      out.push_back(std::move(s));
      if (out.size() > limits.max_cells) throw BudgetExceeded("certificate needs more cells than allowed");
      continue;
    }
    if (ratio * max_rest[k] <= one) continue;
    stack.emplace_back(s.child(1), ratio * c1[k]);
    stack.emplace_back(s.child(0), ratio * c0[k]);
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<Bitstring> certificate_cells(const MeasureCode& mu, const MeasureCode& nu, std::size_t depth,
                                         const SweepLimits& limits) {
  auto a = product_schedule(mu);
  auto b = product_schedule(nu);
  if (a && b) return product_cells(*a, *b, depth, limits);
  CellSweep sweep(mu, nu, limits.max_states);
  while (sweep.depth() < depth)
    if (!sweep.advance()) throw BudgetExceeded("certificate depth out of reach");
  auto cells = sweep.selected_cells();
  if (cells.size() > limits.max_cells) throw BudgetExceeded("certificate needs more cells than allowed");
  return merge_siblings(std::move(cells));
}

// floor/ceil of sqrt(q) at the given binary precision, as rationals.
Rational sqrt_upper(const Rational& q, std::size_t bits) {
  mpz_class scaled = q.numerator();
  mpz_mul_2exp(scaled.get_mpz_t(), scaled.get_mpz_t(), 2 * bits);
  mpz_class quotient, remainder;
  const mpz_class den = q.denominator();
  mpz_fdiv_qr(quotient.get_mpz_t(), remainder.get_mpz_t(), scaled.get_mpz_t(), den.get_mpz_t());
  mpz_class root, rem;
  mpz_sqrtrem(root.get_mpz_t(), rem.get_mpz_t(), quotient.get_mpz_t());
  if (remainder != 0 || rem != 0) root += 1;
  mpz_class scale;
  mpz_ui_pow_ui(scale.get_mpz_t(), 2, bits);
  return Rational(root, scale);
}

}  // namespace

Rational gap(const MeasureCode& mu, const MeasureCode& nu, std::size_t depth, const SweepLimits& limits) {
  auto sweep = make_sweep(mu, nu, limits);
  while (sweep->depth() < depth)
    if (!sweep->advance())
      throw BudgetExceeded("gap at depth " + std::to_string(depth) + " needs more than " +
                           std::to_string(limits.max_states) + " sweep states (reached depth " +
                           std::to_string(sweep->depth()) + ")");
  const LevelMasses m = sweep->current();
  return m.nu - m.mu;
}

std::optional<Rational> gap_upper_bound(const MeasureCode& mu, const MeasureCode& nu, std::size_t depth,
                                        std::size_t precision_bits) {
  auto a = product_schedule(mu);
  auto b = product_schedule(nu);
  if (!a || !b) return std::nullopt;
  Rational affinity(1);
  for (std::size_t k = 0; k < depth; ++k) {
    const Rational alpha = (*a)(k), beta = (*b)(k);
    if (alpha == beta) continue;
    affinity *= affinity_bounds(alpha, beta, precision_bits).lo;
  }
  return min(Rational(1), sqrt_upper(Rational(1) - affinity * affinity, precision_bits));
}

namespace {

struct Qualifying {
  std::size_t depth;
  LevelMasses masses;
};

std::variant<Qualifying, OrthoInconclusive> scan(const MeasureCode& mu, const MeasureCode& nu,
                                                 const Rational& epsilon, std::size_t max_depth,
                                                 const SweepLimits& limits) {
  if (epsilon.sign() <= 0 || epsilon >= Rational(1, 2))
    throw std::invalid_argument("certificate tolerance must lie in (0, 1/2)");
  const Rational high = Rational(1) - epsilon;
  auto sweep = make_sweep(mu, nu, limits);
  while (sweep->depth() < max_depth) {
    if (!sweep->advance()) break;
    LevelMasses m = sweep->current();
    if (m.mu < epsilon && m.nu > high) return Qualifying{sweep->depth(), std::move(m)};
  }
  const LevelMasses m = sweep->current();
  return OrthoInconclusive{m.nu - m.mu, sweep->depth()};
}

}  // namespace

OrthoResult ortho_certificate(const MeasureCode& mu, const MeasureCode& nu, const Rational& epsilon,
                              std::size_t max_depth, const SweepLimits& limits) {
  auto found = scan(mu, nu, epsilon, max_depth, limits);
  if (auto* inc = std::get_if<OrthoInconclusive>(&found)) return std::move(*inc);
  auto& q = std::get<Qualifying>(found);
  return OrthoCertificate{epsilon, q.depth, CylinderFamily{certificate_cells(mu, nu, q.depth, limits)},
                          std::move(q.masses.mu), std::move(q.masses.nu)};
}

bool verify_certificate(const OrthoCertificate& cert, const MeasureCode& mu, const MeasureCode& nu) {
  for (const auto& s : cert.cells.strings)
    if (s.size() > cert.depth) return false;
  const Rational m = measure_of_family(mu, cert.cells);
  const Rational n = measure_of_family(nu, cert.cells);
  return m == cert.mu_mass && n == cert.nu_mass && m < cert.epsilon && n > Rational(1) - cert.epsilon;
}

ModulusResult continuity_modulus(const MeasureCode& mu, const Rational& epsilon, std::size_t max_depth,
                                 const SweepLimits& limits) {
  if (epsilon.sign() <= 0) throw std::invalid_argument("modulus tolerance must be positive");
  struct Heavy {
    Bitstring s;
    Rational mass;
    bool strict_path;  // every prefix, including s, has mass > epsilon
  };
  std::vector<Heavy> level;
  {
    const Bitstring root;
    Rational mass = mu(root);
    if (mass >= epsilon) {
      const bool strict = mass > epsilon;
      level.push_back(Heavy{root, std::move(mass), strict});
    }
  }
  if (level.empty()) return Modulus{0};
  for (std::size_t n = 1; n <= max_depth; ++n) {
    std::vector<Heavy> next;
    for (const auto& h : level) {
      for (int bit = 0; bit < 2; ++bit) {
        Bitstring c = h.s.child(bit);
        Rational mass = mu(c);
        if (mass < epsilon) continue;
        const bool strict = h.strict_path && mass > epsilon;
        next.push_back(Heavy{std::move(c), std::move(mass), strict});
        if (next.size() > limits.max_states) return Inconclusive{};
      }
    }
    if (next.empty()) return Modulus{n};
    level = std::move(next);
  }
  for (const auto& h : level)
    if (h.strict_path) return AtomWitness{h.s, epsilon, h.mass};
  return Inconclusive{};
}

std::variant<RefutationWitness, Inconclusive> refute_abs_continuity(const MeasureCode& mu, const MeasureCode& nu,
                                                                    const Rational& epsilon, std::size_t stages,
                                                                    std::size_t max_depth,
                                                                    const SweepLimits& limits) {
  if (epsilon.sign() <= 0) throw std::invalid_argument("refutation tolerance must be positive");
  struct Cell {
    Bitstring s;
    Rational mu, nu;
  };
  // levels[d]: cells of length d with positive mu-mass, ordered by mu/nu descending.
  std::vector<std::vector<Cell>> levels;
  std::size_t reachable = max_depth;
  auto level = [&](std::size_t d) -> const std::vector<Cell>* {
    if (levels.empty()) levels.push_back({Cell{Bitstring(), mu(Bitstring()), nu(Bitstring())}});
    while (levels.size() <= d) {
      std::vector<Cell> next;
      for (const auto& c : levels.back()) {
        for (int bit = 0; bit < 2; ++bit) {
          Bitstring s = c.s.child(bit);
          Rational m = mu(s);
          if (m.is_zero()) continue;
          Rational n = nu(s);
          next.push_back(Cell{std::move(s), std::move(m), std::move(n)});
        }
      }
      if (next.size() > limits.max_states) {
        reachable = levels.size() - 1;
        return nullptr;
      }
      levels.push_back(std::move(next));
    }
    return &levels[d];
  };

  RefutationWitness witness{epsilon, {}};
  for (std::size_t j = 1; j <= stages; ++j) {
    const Rational delta = Rational::dyadic(j);
    bool found = false;
    for (std::size_t d = 1; d <= std::min(max_depth, reachable) && !found; ++d) {
      const auto* cells = level(d);
      if (cells == nullptr) break;
      std::vector<const Cell*> order;
      order.reserve(cells->size());
      for (const auto& c : *cells) order.push_back(&c);
      std::stable_sort(order.begin(), order.end(), [](const Cell* x, const Cell* y) {
        // mu/nu descending, nu = 0 first.
        return x->mu * y->nu > y->mu * x->nu;
      });
      RefutationStage stage{delta, d, {}, Rational(0), Rational(0)};
      for (const Cell* c : order) {
        if (stage.nu_mass + c->nu >= delta) continue;
        stage.nu_mass += c->nu;
        stage.mu_mass += c->mu;
        stage.family.strings.push_back(c->s);
        if (stage.mu_mass >= epsilon) break;
      }
      if (stage.mu_mass >= epsilon) {
        std::sort(stage.family.strings.begin(), stage.family.strings.end());
        witness.stages.push_back(std::move(stage));
        found = true;
      }
    }
    if (!found) return Inconclusive{};
  }
  return witness;
}

std::variant<FamilyExtension, FamilyFailure> extend_family(const std::vector<MeasureCode>& family,
                                                           const std::vector<BitOracle>& candidates,
                                                           const Rational& epsilon, std::size_t max_depth,
                                                           const ExtendOptions& options) {
  if (options.recheck_family) {
    for (std::size_t i = 0; i < family.size(); ++i)
      for (std::size_t j = i + 1; j < family.size(); ++j)
        if (!std::holds_alternative<OrthoCertificate>(
                ortho_certificate(family[i], family[j], epsilon, max_depth, options.limits)))
          throw std::invalid_argument("family members " + std::to_string(i) + " and " + std::to_string(j) +
                                      " are not certified orthogonal");
  }
  FamilyFailure failure;
  for (std::size_t c = 0; c < candidates.size(); ++c) {
    MeasureCode measure = product_code(ks_schedule(candidates[c]));
    std::vector<OrthoCertificate> certs;
    bool rejected = false;
    for (std::size_t m = 0; m < family.size() && !rejected; ++m) {
      auto found = scan(family[m], measure, epsilon, max_depth, options.limits);
      if (const auto* inc = std::get_if<OrthoInconclusive>(&found)) {
        failure.candidates.push_back(CandidateReport{c, m, inc->best_gap, inc->at_depth});
        rejected = true;
        continue;
      }
      auto& q = std::get<Qualifying>(found);
      try {
        auto cells = certificate_cells(family[m], measure, q.depth, options.limits);
        certs.push_back(OrthoCertificate{epsilon, q.depth, CylinderFamily{std::move(cells)}, q.masses.mu,
                                         q.masses.nu});
      } catch (const BudgetExceeded&) {
        failure.candidates.push_back(CandidateReport{c, m, q.masses.nu - q.masses.mu, q.depth,
                                                     RejectReason::TooManyCells});
        rejected = true;
      }
    }
    if (!rejected) return FamilyExtension{std::move(measure), c, std::move(certs)};
  }
  return failure;
}

}  // namespace cmc
