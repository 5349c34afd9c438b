#include "cmc/dsl.hpp"

#include <cctype>
#include <sstream>

#include "cmc/codec.hpp"

namespace cmc {

namespace {

std::string join_expected(const std::vector<std::string>& expected) {
  std::string out;
  for (std::size_t i = 0; i < expected.size(); ++i) {
    if (i > 0) out += i + 1 == expected.size() ? " or " : ", ";
    out += expected[i];
  }
  return out;
}

}  // namespace

ParseError::ParseError(std::size_t line, std::size_t column, std::vector<std::string> expected, std::string found)
    : Error("parse-error", "line " + std::to_string(line) + ", column " + std::to_string(column) + ": expected " +
                               join_expected(expected) + ", found " + found),
      line_(line),
      column_(column),
      expected_(std::move(expected)),
      found_(std::move(found)) {}

namespace {

class Parser {
 public:
  Parser(std::string_view text, std::size_t budget) : text_(text), budget_(budget ? budget : default_budget()) {}

  MeasureCode whole_measure() {
    MeasureCode m = measure();
    finish();
    return m;
  }
  Schedule whole_schedule() {
    Schedule s = schedule();
    finish();
    return s;
  }
  BitOracle whole_sequence() {
    BitOracle x = sequence();
    finish();
    return x;
  }
  Bitstring whole_payload() {
    Bitstring p = payload();
    finish();
    return p;
  }

 private:
  struct Mark {
    std::size_t line, column;
  };

  void skip_space() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) {
      if (text_[pos_] == '\n') {
        ++line_;
        column_ = 1;
      } else {
        ++column_;
      }
      ++pos_;
    }
  }

  char peek() {
    skip_space();
    return pos_ < text_.size() ? text_[pos_] : '\0';
  }

  // Unskipped lookahead, for tokens that must be contiguous.
  char raw(std::size_t ahead = 0) const { return pos_ + ahead < text_.size() ? text_[pos_ + ahead] : '\0'; }

  void bump() {
    ++pos_;
    ++column_;
  }

  Mark mark() {
    skip_space();
    return {line_, column_};
  }

  std::string found() {
    skip_space();
    if (pos_ >= text_.size()) return "end of input";
    std::size_t end = pos_;
    if (std::isalpha(static_cast<unsigned char>(text_[end]))) {
      while (end < text_.size() && std::isalnum(static_cast<unsigned char>(text_[end]))) ++end;
    } else {
      ++end;
    }
    return "'" + std::string(text_.substr(pos_, end - pos_)) + "'";
  }

  [[noreturn]] void fail(std::vector<std::string> expected) {
    const std::string what = found();
    throw ParseError(line_, column_, std::move(expected), what);
  }

  [[noreturn]] void semantic(const Mark& at, const std::string& message) {
    throw SemanticError("line " + std::to_string(at.line) + ", column " + std::to_string(at.column) + ": " +
                        message);
  }

  void expect(char c) {
    if (peek() != c) fail({std::string("'") + c + "'"});
    bump();
  }

  bool accept(char c) {
    if (peek() != c) return false;
    bump();
    return true;
  }

  void finish() {
    if (peek() != '\0') fail({"end of input"});
  }

  std::string word() {
    skip_space();
    std::string out;
    while (std::isalpha(static_cast<unsigned char>(raw()))) {
      out += raw();
      bump();
    }
    return out;
  }

  Bitstring bits() {
    skip_space();
    std::string out;
    while (raw() == '0' || raw() == '1') {
      out += raw();
      bump();
    }
    return Bitstring(out);
  }

  mpz_class digits(bool allow_sign, const char* what) {
    skip_space();
    std::string out;
    if (allow_sign && raw() == '-') {
      out += '-';
      bump();
    }
    if (!std::isdigit(static_cast<unsigned char>(raw()))) fail({what});
    while (std::isdigit(static_cast<unsigned char>(raw()))) {
      out += raw();
      bump();
    }
    return mpz_class(out);
  }

  Rational rational() {
    const mpz_class num = digits(true, "rational");
    if (!accept('/')) return Rational(num, mpz_class(1));
    const Mark at = mark();
    const mpz_class den = digits(false, "positive integer");
    if (den == 0) throw ParseError(at.line, at.column, {"positive integer"}, "'0'");
    return Rational(num, den);
  }

  std::size_t natural(const char* what) {
    const Mark at = mark();
    const mpz_class v = digits(false, what);
    if (!v.fits_ulong_p()) semantic(at, std::string(what) + " too large");
    return v.get_ui();
  }

  // Item separator: ',' then either another item or the closing token.
  bool more(char close) {
    if (accept(',')) return peek() != close;
    if (peek() == close) return false;
    fail({"','", std::string("'") + close + "'"});
  }

  void in_unit(const Mark& at, const Rational& r, const char* what) {
    if (r.sign() < 0 || r > Rational(1)) semantic(at, std::string(what) + " " + r.str() + " outside [0, 1]");
  }

  void in_open_unit(const Mark& at, const Rational& r, const char* what) {
    if (r.sign() <= 0 || r >= Rational(1)) semantic(at, std::string(what) + " " + r.str() + " outside (0, 1)");
  }

  MeasureCode measure() {
    const Mark at = mark();
    const std::string kw = word();
    if (kw == "uniform") return MeasureCode::uniform();
    if (kw == "dirac") {
      expect('(');
      BitOracle x = sequence();
      expect(')');
      return MeasureCode::dirac(std::move(x));
    }
    if (kw == "finite") {
      expect('(');
      std::vector<std::pair<Bitstring, Rational>> atoms;
      Rational total;
      do {
        Bitstring s = bits();
        expect(':');
        const Mark w = mark();
        Rational r = rational();
        in_unit(w, r, "weight");
        total += r;
        atoms.emplace_back(std::move(s), std::move(r));
      } while (more(')'));
      expect(')');
      if (total != Rational(1)) semantic(at, "finite weights sum to " + total.str() + ", not 1");
      return MeasureCode::finite_support(std::move(atoms));
    }
    if (kw == "convex") {
      expect('(');
      std::vector<std::pair<Rational, MeasureCode>> terms;
      Rational total;
      do {
        const Mark w = mark();
        Rational r = rational();
        in_unit(w, r, "weight");
        expect(':');
        MeasureCode m = measure();
        total += r;
        terms.emplace_back(std::move(r), std::move(m));
      } while (more(')'));
      expect(')');
      if (total != Rational(1)) semantic(at, "convex weights sum to " + total.str() + ", not 1");
      return MeasureCode::convex(std::move(terms));
    }
    if (kw == "product") {
      expect('(');
      Schedule s = schedule();
      expect(')');
      return MeasureCode::product(std::move(s));
    }
    if (kw == "table") {
      expect('(');
      const Mark d = mark();
      const std::size_t depth = natural("depth");
      if (depth > 24) semantic(d, "table depth " + std::to_string(depth) + " exceeds 24");
      expect(';');
      std::map<Bitstring, Rational> entries;
      do {
        const Mark e = mark();
        Bitstring s = bits();
        if (s.size() > depth) semantic(e, "entry '" + s.str() + "' deeper than table depth");
        expect('=');
        const Mark v = mark();
        Rational r = rational();
        in_unit(v, r, "value");
        if (!entries.emplace(s, std::move(r)).second) semantic(e, "duplicate entry '" + s.str() + "'");
      } while (more(')'));
      expect(')');
      MeasureCode code = MeasureCode::table(depth, std::move(entries));
      if (auto bad = validate_additivity(code, depth))
        semantic(at, "table is not a measure code at '" + bad->at.str() + "' (" + bad->lhs.str() +
                         " != " + bad->rhs.str() + ")");
      for (const auto& v : code.as<expr::Table>()->values)
        if (v.sign() < 0) semantic(at, "table infers a negative value " + v.str());
      return code;
    }
    if (kw == "coded") {
      expect('(');
      MeasureCode base = measure();
      expect(';');
      Bitstring p = payload();
      expect(')');
      return encode(base, p, budget_).code();
    }
    pos_ -= kw.size();
    column_ -= kw.size();
    fail({"'uniform'", "'dirac'", "'finite'", "'convex'", "'product'", "'table'", "'coded'"});
  }

  Schedule schedule() {
    const std::string kw = word();
    if (kw == "const") {
      expect('(');
      const Mark v = mark();
      Rational r = rational();
      in_open_unit(v, r, "parameter");
      expect(')');
      return Schedule::constant(std::move(r));
    }
    if (kw == "ks") {
      expect('(');
      BitOracle x = sequence();
      expect(')');
      return Schedule::ks(std::move(x));
    }
    if (kw == "list") {
      expect('(');
      std::vector<Rational> values;
      for (;;) {
        const Mark v = mark();
        Rational r = rational();
        in_open_unit(v, r, "parameter");
        values.push_back(std::move(r));
        if (accept(';')) break;
        if (!accept(',')) fail({"','", "';'"});
        if (accept(';')) break;
      }
      Schedule::Tail tail = Schedule::Tail::Last;
      Rational tail_value(1, 2);
      const char c = peek();
      if (std::isalpha(static_cast<unsigned char>(c))) {
        const std::string rule = word();
        if (rule == "cycle") {
          tail = Schedule::Tail::Cycle;
        } else if (rule != "last") {
          pos_ -= rule.size();
          column_ -= rule.size();
          fail({"'cycle'", "'last'", "rational"});
        }
      } else if (c == '-' || std::isdigit(static_cast<unsigned char>(c))) {
        const Mark v = mark();
        tail = Schedule::Tail::Constant;
        tail_value = rational();
        in_open_unit(v, tail_value, "parameter");
      } else {
        fail({"'cycle'", "'last'", "rational"});
      }
      expect(')');
      return Schedule::explicit_list(std::move(values), tail, std::move(tail_value));
    }
    pos_ -= kw.size();
    column_ -= kw.size();
    fail({"'const'", "'ks'", "'list'"});
  }

  BitOracle sequence() {
    Bitstring prefix = bits();
    if (raw() == '*') {
      if (prefix.empty()) fail({"bit"});
      bump();
      const int last = prefix.back();
      return BitOracle::periodic(prefix.parent(), Bitstring(last ? "1" : "0"));
    }
    if (peek() == '(') {
      bump();
      Bitstring cycle = bits();
      if (cycle.empty()) fail({"bit"});
      expect(')');
      expect('*');
      return BitOracle::periodic(std::move(prefix), std::move(cycle));
    }
    return BitOracle::eventually_zero(std::move(prefix));
  }

  Bitstring payload() {
    skip_space();
    if (raw() == '0' && (raw(1) == 'x' || raw(1) == 'X')) {
      bump();
      bump();
      std::string out;
      while (std::isxdigit(static_cast<unsigned char>(raw()))) {
        const char c = static_cast<char>(std::tolower(static_cast<unsigned char>(raw())));
        const int v = std::isdigit(static_cast<unsigned char>(c)) ? c - '0' : c - 'a' + 10;
        for (int b = 3; b >= 0; --b) out += ((v >> b) & 1) ? '1' : '0';
        bump();
      }
      if (out.empty()) fail({"hex digit"});
      return Bitstring(out);
    }
    return bits();
  }

  std::string_view text_;
  std::size_t budget_;
  std::size_t pos_ = 0;
  std::size_t line_ = 1;
  std::size_t column_ = 1;
};

}  // namespace

MeasureCode parse_measure(std::string_view text, std::size_t budget) { return Parser(text, budget).whole_measure(); }
Schedule parse_schedule(std::string_view text) { return Parser(text, 0).whole_schedule(); }
BitOracle parse_sequence(std::string_view text) { return Parser(text, 0).whole_sequence(); }
Bitstring parse_payload(std::string_view text) { return Parser(text, 0).whole_payload(); }

std::string print(const BitOracle& x) {
  const auto form = x.periodic_form();
  if (!form) {
    throw NotSerializable("sequence" + (x.label().empty() ? std::string() : " '" + x.label() + "'") +
                          " has no finite description");
  }
  const std::string& p = form->prefix.str();
  const std::string& c = form->cycle.str();
  if (c == "0") return p.empty() ? "0" : p;
  if (c.size() == 1) return p + c + "*";
  return p + "(" + c + ")*";
}

std::string print_payload(const Bitstring& payload) {
  if (payload.empty() || payload.size() % 4 != 0) return payload.str();
  static const char* hex = "0123456789abcdef";
  std::string out = "0x";
  for (std::size_t i = 0; i < payload.size(); i += 4)
    out += hex[payload[i] * 8 + payload[i + 1] * 4 + payload[i + 2] * 2 + payload[i + 3]];
  return out;
}

std::string print(const Schedule& schedule) {
  return std::visit(
      [](const auto& r) -> std::string {
        using T = std::decay_t<decltype(r)>;
        if constexpr (std::is_same_v<T, Schedule::Constant>) {
          return "const(" + r.alpha.str() + ")";
        } else if constexpr (std::is_same_v<T, Schedule::KS>) {
          return "ks(" + print(r.x) + ")";
        } else {
          std::string out = "list(";
          for (std::size_t i = 0; i < r.values.size(); ++i) out += (i ? ", " : "") + r.values[i].str();
          out += "; ";
          switch (r.tail) {
            case Schedule::Tail::Cycle: out += "cycle"; break;
            case Schedule::Tail::Last: out += "last"; break;
            case Schedule::Tail::Constant: out += r.tail_value.str(); break;
          }
          return out + ")";
        }
      },
      schedule.rule());
}

std::string print(const MeasureCode& code) {
  return std::visit(
      [](const auto& e) -> std::string {
        using T = std::decay_t<decltype(e)>;
        if constexpr (std::is_same_v<T, expr::Uniform>) {
          return "uniform";
        } else if constexpr (std::is_same_v<T, expr::Dirac>) {
          return "dirac(" + print(e.branch) + ")";
        } else if constexpr (std::is_same_v<T, expr::FiniteSupport>) {
          std::string out = "finite(";
          for (std::size_t i = 0; i < e.atoms.size(); ++i)
            out += (i ? ", " : "") + e.atoms[i].first.str() + ": " + e.atoms[i].second.str();
          return out + ")";
        } else if constexpr (std::is_same_v<T, expr::Convex>) {
          std::string out = "convex(";
          for (std::size_t i = 0; i < e.terms.size(); ++i)
            out += (i ? ", " : "") + e.terms[i].first.str() + ": " + print(e.terms[i].second);
          return out + ")";
        } else if constexpr (std::is_same_v<T, expr::Product>) {
          return "product(" + print(e.schedule) + ")";
        } else if constexpr (std::is_same_v<T, expr::Table>) {
          std::string out = "table(" + std::to_string(e.depth) + "; ";
          bool first = true;
          for (const auto& [s, v] : e.entries) {
            out += (first ? "" : ", ") + s.str() + "=" + v.str();
            first = false;
          }
          return out + ")";
        } else {
          std::string payload;
          if (e.finite_payload) {
            payload = print_payload(*e.finite_payload);
          } else {
            const auto form = e.payload.periodic_form();
            if (!form || form->cycle.str() != "0")
              throw NotSerializable("coded payload is not a finite bitstring");
            payload = form->prefix.str();
          }
          return "coded(" + print(*e.base) + "; " + payload + ")";
        }
      },
      code.expr());
}

}  // namespace cmc
