#include "cmc/measure.hpp"

#include <algorithm>
#include <cstdlib>
#include <stdexcept>
#include <string>
#include <unordered_set>

#include "detail.hpp"

namespace cmc {

namespace {

constexpr std::size_t kMaxTableDepth = 24;

void require_unit(const Rational& r, const char* what) {
  if (r.sign() < 0 || r > Rational(1)) throw std::invalid_argument(std::string(what) + " " + r.str() + " outside [0,1]");
}

Rational eval_uniform(const Bitstring& s) { return Rational::dyadic(s.size()); }

Rational eval_dirac(const expr::Dirac& d, const Bitstring& s) {
  for (std::size_t i = 0; i < s.size(); ++i)
    if (d.branch(i) != s[i]) return Rational(0);
  return Rational(1);
}

// Branch leaf.0^inf passes through N_s.
bool branch_hits(const Bitstring& leaf, const Bitstring& s) {
  if (s.size() <= leaf.size()) return s.is_prefix_of(leaf);
  return leaf.is_prefix_of(s) && s.all_zero_from(leaf.size());
}

Rational eval_finite(const expr::FiniteSupport& f, const Bitstring& s) {
  Rational total;
  for (const auto& [leaf, weight] : f.atoms)
    if (branch_hits(leaf, s)) total += weight;
  return total;
}

Rational eval_product(const expr::Product& p, const Bitstring& s) {
  // reduce once at the end
  mpz_class num(1), den(1);
  for (std::size_t k = 0; k < s.size(); ++k) {
    const Rational alpha = p.schedule(k);
    const mpq_class& a = alpha.gmp();
    if (s[k] == 0) {
      num *= a.get_num();
    } else {
      num *= a.get_den() - a.get_num();
    }
    den *= a.get_den();
  }
  return Rational(num, den);
}

Rational eval_table(const expr::Table& t, const Bitstring& s) {
  if (s.size() <= t.depth) return t.values[static_cast<std::size_t>(s.index())];
  const Rational top = t.values[static_cast<std::size_t>(s.prefix(t.depth).index())];
  return top * Rational::dyadic(s.size() - t.depth);
}

std::vector<Rational> build_table(std::size_t depth, const std::map<Bitstring, Rational>& entries) {
  const std::size_t count = (std::size_t{1} << (depth + 1)) - 1;
  std::vector<Rational> values(count);
  auto lookup = [&](const Bitstring& s) -> const Rational* {
    auto it = entries.find(s);
    return it == entries.end() ? nullptr : &it->second;
  };
  const Bitstring root;
  values[0] = lookup(root) ? *lookup(root) : Rational(1);
  const std::size_t parents = (std::size_t{1} << depth) - 1;
  for (std::size_t i = 0; i < parents; ++i) {
    const Bitstring p = Bitstring::from_index(i);
    const Bitstring c0 = p.child(0), c1 = p.child(1);
    const Rational* v0 = lookup(c0);
    const Rational* v1 = lookup(c1);
    Rational r0, r1;
    if (v0 && v1) {
      r0 = *v0;
      r1 = *v1;
    } else if (v0) {
      r0 = *v0;
      r1 = values[i] - r0;
    } else if (v1) {
      r1 = *v1;
      r0 = values[i] - r1;
    } else {
      r0 = r1 = values[i] / Rational(2);
    }
    values[static_cast<std::size_t>(c0.index())] = std::move(r0);
    values[static_cast<std::size_t>(c1.index())] = std::move(r1);
  }
  return values;
}

}  // namespace

std::optional<Rational> CylinderMemo::find(const Bitstring& s) const {
  std::lock_guard lock(mutex_);
  auto it = values_.find(s);
  if (it == values_.end()) return std::nullopt;
  return it->second;
}

void CylinderMemo::store(const Bitstring& s, const Rational& value) {
  std::lock_guard lock(mutex_);
  if (values_.size() < kCapacity) values_.emplace(s, value);
}

std::size_t default_budget() {
  if (const char* env = std::getenv("CMC_DEFAULT_BUDGET")) {
    try {
      std::size_t used = 0;
      const unsigned long long v = std::stoull(env, &used);
      if (used == std::string(env).size() && v > 0) return static_cast<std::size_t>(v);
    } catch (const std::exception&) {
    }
  }
  return 65536;
}

MeasureCode MeasureCode::uniform() { return from_expr(expr::Uniform{}); }

MeasureCode MeasureCode::dirac(BitOracle branch) { return from_expr(expr::Dirac{std::move(branch)}); }

MeasureCode MeasureCode::dirac(const Bitstring& eventually_zero_prefix) {
  return dirac(BitOracle::eventually_zero(eventually_zero_prefix));
}

MeasureCode MeasureCode::finite_support(std::vector<std::pair<Bitstring, Rational>> atoms) {
  if (atoms.empty()) throw std::invalid_argument("finite support needs at least one atom");
  Rational total;
  for (const auto& [leaf, weight] : atoms) {
    require_unit(weight, "atom weight");
    total += weight;
  }
  if (total != Rational(1)) throw std::invalid_argument("atom weights sum to " + total.str() + ", not 1");
  return from_expr(expr::FiniteSupport{std::move(atoms)});
}

MeasureCode MeasureCode::convex(std::vector<std::pair<Rational, MeasureCode>> terms) {
  if (terms.empty()) throw std::invalid_argument("convex combination needs at least one term");
  Rational total;
  for (const auto& [weight, child] : terms) {
    require_unit(weight, "mixture weight");
    total += weight;
  }
  if (total != Rational(1)) throw std::invalid_argument("mixture weights sum to " + total.str() + ", not 1");
  return from_expr(expr::Convex{std::move(terms)});
}

MeasureCode MeasureCode::product(Schedule schedule) { return from_expr(expr::Product{std::move(schedule)}); }

MeasureCode MeasureCode::table(std::size_t depth, std::map<Bitstring, Rational> entries) {
  if (depth > kMaxTableDepth) throw std::invalid_argument("table depth exceeds " + std::to_string(kMaxTableDepth));
  for (const auto& [s, v] : entries) {
    if (s.size() > depth) throw std::invalid_argument("table entry '" + s.str() + "' deeper than table depth");
    require_unit(v, "table entry");
  }
  auto values = build_table(depth, entries);
  return from_expr(expr::Table{depth, std::move(entries), std::move(values)});
}

MeasureCode MeasureCode::from_expr(Expr e) { return MeasureCode(std::make_shared<const Expr>(std::move(e))); }

Rational MeasureCode::operator()(const Bitstring& s) const {
  return std::visit(
      [&s](const auto& e) -> Rational {
        using T = std::decay_t<decltype(e)>;
        if constexpr (std::is_same_v<T, expr::Uniform>) {
          return eval_uniform(s);
        } else if constexpr (std::is_same_v<T, expr::Dirac>) {
          return eval_dirac(e, s);
        } else if constexpr (std::is_same_v<T, expr::FiniteSupport>) {
          return eval_finite(e, s);
        } else if constexpr (std::is_same_v<T, expr::Convex>) {
          Rational total;
          for (const auto& [weight, child] : e.terms)
            if (!weight.is_zero()) total += weight * child(s);
          return total;
        } else if constexpr (std::is_same_v<T, expr::Product>) {
          return eval_product(e, s);
        } else if constexpr (std::is_same_v<T, expr::Table>) {
          return eval_table(e, s);
        } else {
          return detail::eval_coded(e, s);
        }
      },
      *expr_);
}

std::optional<AdditivityViolation> validate_additivity(const MeasureCode& code, std::size_t depth) {
  const Bitstring root;
  const Rational top = code(root);
  if (top != Rational(1)) return AdditivityViolation{root, top, Rational(1)};
  if (depth == 0) return std::nullopt;
  // Shortlex walk over all strings of length < depth, reusing each child value
  // as the parent value one level down.
  std::vector<std::pair<Bitstring, Rational>> level{{root, top}};
  for (std::size_t len = 0; len < depth; ++len) {
    std::vector<std::pair<Bitstring, Rational>> next;
    next.reserve(level.size() * 2);
    for (auto& [s, value] : level) {
      Rational left = code(s.child(0));
      Rational right = code(s.child(1));
      if (left + right != value) return AdditivityViolation{s, value, left + right};
      if (len + 1 < depth) {
        next.emplace_back(s.child(0), std::move(left));
        next.emplace_back(s.child(1), std::move(right));
      }
    }
    level = std::move(next);
  }
  return std::nullopt;
}

CylinderFamily CylinderFamily::disjointified() const {
  std::vector<Bitstring> sorted = strings;
  std::sort(sorted.begin(), sorted.end());
  sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
  std::unordered_set<Bitstring> kept;
  CylinderFamily out;
  for (const auto& s : sorted) {
    bool covered = false;
    for (std::size_t len = 0; len < s.size() && !covered; ++len) covered = kept.count(s.prefix(len)) > 0;
    if (!covered) {
      kept.insert(s);
      out.strings.push_back(s);
    }
  }
  return out;
}

Rational measure_of_family(const MeasureCode& code, const CylinderFamily& family) {
  Rational total;
  for (const auto& s : family.disjointified().strings) total += code(s);
  return total;
}

MetricBracket metric_bracket(const MeasureCode& f, const MeasureCode& g, std::uint64_t terms) {
  Rational lo;
  for (std::uint64_t n = 0; n < terms; ++n) {
    const Bitstring s = Bitstring::from_index(n);
    const Rational diff = abs(f(s) - g(s));
    if (!diff.is_zero()) lo += diff * Rational::dyadic(static_cast<std::size_t>(n + 1));
  }
  Rational hi = lo + Rational::dyadic(static_cast<std::size_t>(terms));
  return {std::move(lo), std::move(hi)};
}

namespace {

// Number of ways to write total as an ordered sum of `parts` non-negative integers.
mpz_class compositions(unsigned long total, const mpz_class& parts) {
  if (parts == 0) return total == 0 ? 1 : 0;
  if (total == 0) return 1;
  mpz_class n = parts + (total - 1);
  mpz_class out;
  mpz_bin_ui(out.get_mpz_t(), n.get_mpz_t(), total);
  return out;
}

Bitstring leaf_at(const mpz_class& position, std::size_t level) {
  Bitstring out;
  for (std::size_t i = 0; i < level; ++i)
    out.push_back(mpz_tstbit(position.get_mpz_t(), static_cast<mp_bitcnt_t>(level - 1 - i)));
  return out;
}

}  // namespace

DenseDistribution dense_distribution(std::uint64_t i) {
  // Stage t lists (level n, denominator D) with n + D - 1 = t; within a pair the
  // numerator vectors (a_s) with sum D appear in ascending lexicographic order.
  mpz_class rank(std::to_string(i), 10);
  std::size_t level = 0;
  unsigned long denominator = 1;
  for (unsigned long t = 0;; ++t) {
    bool found = false;
    for (unsigned long n = 0; n <= t; ++n) {
      const unsigned long d = t - n + 1;
      mpz_class cells;
      mpz_ui_pow_ui(cells.get_mpz_t(), 2, n);
      const mpz_class count = compositions(d, cells);
      if (rank < count) {
        level = n;
        denominator = d;
        found = true;
        break;
      }
      rank -= count;
    }
    if (found) break;
  }

  mpz_class parts;
  mpz_ui_pow_ui(parts.get_mpz_t(), 2, level);
  mpz_class position = 0;
  unsigned long remaining = denominator;
  DenseDistribution out;
  out.level = level;
  while (remaining > 0) {
    const mpz_class left = parts - position;  // parts from `position` onward
    if (left == 1) {
      out.entries.emplace_back(leaf_at(position, level), Rational(static_cast<long>(remaining), denominator));
      break;
    }
    // Largest run m of leading zeros: rank < compositions(remaining, left - m).
    mpz_class lo = 0, hi = left - 1;
    while (lo < hi) {
      mpz_class mid = (lo + hi + 1) / 2;
      if (rank < compositions(remaining, left - mid))
        lo = mid;
      else
        hi = mid - 1;
    }
    position += lo;
    const mpz_class rest = left - lo - 1;
    if (rest == 0) {
      out.entries.emplace_back(leaf_at(position, level), Rational(static_cast<long>(remaining), denominator));
      break;
    }
    rank -= compositions(remaining, rest);  // vectors with a zero in this slot
    unsigned long value = 1;
    for (; value < remaining; ++value) {
      const mpz_class count = compositions(remaining - value, rest);
      if (rank < count) break;
      rank -= count;
    }
    out.entries.emplace_back(leaf_at(position, level), Rational(static_cast<long>(value), denominator));
    remaining -= value;
    position += 1;
  }
  return out;
}

MeasureCode enumerate_dense(std::uint64_t i) {
  DenseDistribution q = dense_distribution(i);
  return MeasureCode::finite_support(std::move(q.entries));
}

}  // namespace cmc
