#include "cmc/codec.hpp"

#include <stdexcept>

#include "cmc/errors.hpp"
#include "detail.hpp"

namespace cmc {

namespace {

const Rational& two_thirds() {
  static const Rational r(2, 3);
  return r;
}

const Rational& one_third() {
  static const Rational r(1, 3);
  return r;
}

// Payload bit carried by a split, or -1 when neither exact pattern holds.
int read_bit(const SpineNode& n) {
  if (n.left == two_thirds() * n.mass && n.right == one_third() * n.mass) return 1;
  if (n.left == one_third() * n.mass && n.right == two_thirds() * n.mass) return 0;
  return -1;
}

}  // namespace

Bitstring splitting_node(const MeasureCode& code, const Bitstring& s, std::size_t budget) {
  if (code(s).is_zero()) throw ZeroMass(s);
  Bitstring t = s;
  for (std::size_t step = 0; step <= budget; ++step) {
    const Rational left = code(t.child(0));
    const Rational right = code(t.child(1));
    if (left.sign() > 0 && right.sign() > 0) return t;
    // Exactly one child carries all the mass, so it is the only live candidate
    // at the next length.
    t.push_back(left.sign() > 0 ? 0 : 1);
  }
  throw BudgetExceeded("no splitting node above '" + s.str() + "' within " + std::to_string(budget) + " levels");
}

SpineCache::SpineCache(MeasureCode code, std::size_t budget) : code_(std::move(code)), budget_(budget) {}

std::optional<SpineNode> SpineCache::node(std::size_t k, std::optional<std::size_t> max_length) {
  std::lock_guard lock(mutex_);
  while (nodes_.size() <= k) {
    if (!search_start_) {
      Bitstring start = nodes_.empty() ? Bitstring() : nodes_.back().node.child(0);
      if (code_(start).is_zero()) throw ZeroMass(start);
      search_start_ = start;
      cursor_ = std::move(start);
    }
    for (;;) {
      if (max_length && cursor_.size() > *max_length) return std::nullopt;
      if (cursor_.size() - search_start_->size() > budget_)
        throw BudgetExceeded("spine node " + std::to_string(nodes_.size()) + " not found within " +
                             std::to_string(budget_) + " levels of '" + search_start_->str() + "'");
      Rational left = code_(cursor_.child(0));
      Rational right = code_(cursor_.child(1));
      if (left.sign() > 0 && right.sign() > 0) {
        Rational mass = code_(cursor_);
        nodes_.push_back(SpineNode{cursor_, std::move(mass), std::move(left), std::move(right)});
        search_start_.reset();
        break;
      }
      if (left.sign() == 0 && right.sign() == 0) throw ZeroMass(cursor_);
      cursor_.push_back(left.sign() > 0 ? 0 : 1);
    }
  }
  if (max_length && nodes_[k].node.size() > *max_length) return std::nullopt;
  return nodes_[k];
}

SplittingSpine spine(const MeasureCode& code, std::size_t n, std::size_t budget) {
  SpineCache cache(code, budget);
  SplittingSpine out{{}, code};
  for (std::size_t k = 0; k <= n; ++k) out.nodes.push_back(cache.node(k)->node);
  return out;
}

CodedMeasure::CodedMeasure(MeasureCode code) : code_(std::move(code)) {
  if (code_.as<expr::Coded>() == nullptr) throw std::invalid_argument("not a coded measure");
}

CodedMeasure encode(const MeasureCode& f, BitOracle payload, std::size_t budget) {
  expr::Coded coded{std::make_shared<const MeasureCode>(f), std::move(payload), budget, std::nullopt,
                    std::make_shared<SpineCache>(f, budget), std::make_shared<CylinderMemo>()};
  return CodedMeasure(MeasureCode::from_expr(std::move(coded)));
}

CodedMeasure encode(const MeasureCode& f, const Bitstring& payload, std::size_t budget) {
  expr::Coded coded{std::make_shared<const MeasureCode>(f), BitOracle::eventually_zero(payload), budget, payload,
                    std::make_shared<SpineCache>(f, budget), std::make_shared<CylinderMemo>()};
  return CodedMeasure(MeasureCode::from_expr(std::move(coded)));
}

namespace detail {

Rational eval_coded(const expr::Coded& coded, const Bitstring& s) {
  if (auto hit = coded.memo->find(s)) return *hit;
  const MeasureCode& base = *coded.base;
  const Rational fs = base(s);
  if (fs.is_zero() || s.empty()) return fs;
  // theta = g/f only changes at spine nodes lying strictly above s.
  Rational theta(1);
  for (std::size_t k = 0;; ++k) {
    const auto node = coded.spine->node(k, s.size() - 1);
    if (!node || node->node.size() >= s.size() || !node->node.is_prefix_of(s)) break;
    const int branch = s[node->node.size()];
    const bool heavy = (coded.payload(k) == 1) == (branch == 0);
    const Rational& child = branch == 0 ? node->left : node->right;
    theta *= (heavy ? two_thirds() : one_third()) * node->mass / child;
    if (branch == 1) break;
  }
  Rational value = theta * fs;
  coded.memo->store(s, value);
  return value;
}

}  // namespace detail

CodingDomainCheck in_coding_domain(const MeasureCode& g, std::size_t k, std::size_t budget) {
  SpineCache cache(g, budget);
  for (std::size_t n = 0; n < k; ++n) {
    const SpineNode node = *cache.node(n);
    if (read_bit(node) < 0) return {false, n, node.node};
  }
  return {};
}

Bitstring decode(const MeasureCode& g, std::size_t k, std::size_t budget) {
  SpineCache cache(g, budget);
  Bitstring out;
  for (std::size_t n = 0; n < k; ++n) {
    const SpineNode node = *cache.node(n);
    const int bit = read_bit(node);
    if (bit < 0) throw NotInCodingDomain(n, node.node);
    out.push_back(bit);
  }
  return out;
}

Rational density(const CodedMeasure& g, const Bitstring& s) {
  const Rational fs = g.base()(s);
  if (fs.is_zero()) return Rational(0);
  return g(s) / fs;
}

DensityLimit density_limit(const CodedMeasure& g, const Bitstring& prefix) {
  if (g.base()(prefix).is_zero()) return Stabilized{Rational(0)};
  SpineCache& cache = *g.code().as<expr::Coded>()->spine;
  for (std::size_t k = 0;; ++k) {
    const Bitstring t = cache.node(k)->node;
    if (t.size() >= prefix.size()) {
      if (prefix.is_prefix_of(t)) return NotYetStable{};
      return Stabilized{density(g, prefix)};
    }
    if (!t.is_prefix_of(prefix) || prefix[t.size()] == 1) return Stabilized{density(g, prefix)};
  }
}

Bitstring spine_path(const MeasureCode& f, std::size_t length, std::size_t budget) {
  if (length == 0) return {};
  SpineCache cache(f, budget);
  for (std::size_t k = 0;; ++k) {
    const Bitstring t = cache.node(k)->node;
    if (t.size() >= length) return t.prefix(length);
  }
}

std::vector<Bitstring> offspine_decomposition(const MeasureCode& f, std::size_t depth, std::size_t budget) {
  const Bitstring path = spine_path(f, depth, budget);
  std::vector<Bitstring> out;
  for (std::size_t j = 0; j < depth; ++j) out.push_back(path.prefix(j).child(1 - path[j]));
  return out;
}

}  // namespace cmc
