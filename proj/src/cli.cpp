#include "cmc/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <fstream>
#include <functional>
#include <sstream>

#include "cmc/codec.hpp"
#include "cmc/dsl.hpp"
#include "cmc/errors.hpp"
#include "cmc/orthogonality.hpp"
#include "cmc/product.hpp"

namespace cmc {

namespace {

class UsageError : public Error {
 public:
  explicit UsageError(const std::string& what) : Error("usage", what) {}
};

class IoError : public Error {
 public:
  explicit IoError(const std::string& what) : Error("io-error", what) {}
};

// DSL text, or the contents of a file when written as @path.
std::string source(const std::string& arg) {
  if (arg.empty() || arg[0] != '@') return arg;
  std::ifstream in(arg.substr(1));
  if (!in) throw IoError("cannot read '" + arg.substr(1) + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::uint64_t count_arg(const std::string& text, const char* what) {
  if (text.empty() || !std::all_of(text.begin(), text.end(), [](char c) { return c >= '0' && c <= '9'; }))
    throw UsageError(std::string(what) + " must be a non-negative integer, got '" + text + "'");
  try {
    return std::stoull(text);
  } catch (const std::out_of_range&) {
    throw UsageError(std::string(what) + " is too large: '" + text + "'");
  }
}

Rational rational_arg(const std::string& text, const char* what) {
  try {
    return Rational::parse(text);
  } catch (const std::invalid_argument&) {
    throw UsageError(std::string(what) + " must be a rational a/b, got '" + text + "'");
  }
}

// A schedule, or a product measure standing for its schedule.
Schedule schedule_arg(const std::string& arg) {
  const std::string text = source(arg);
  const auto first = text.find_first_not_of(" \t\r\n");
  const std::string head = first == std::string::npos ? "" : text.substr(first, 7);
  if (head.rfind("product", 0) == 0 || head.rfind("uniform", 0) == 0) {
    if (auto s = product_schedule(parse_measure(text))) return *s;
  }
  return parse_schedule(text);
}

std::string bits(const Bitstring& s) { return s.empty() ? "\"\"" : s.str(); }

// Structured text: "key: value" lines, two spaces of indentation per level,
// list items introduced by "- ".
class Doc {
 public:
  void kv(const std::string& key, const std::string& value) { line(key + ": " + value); }
  void kv(const std::string& key, const Rational& value) { kv(key, value.str()); }
  void kv(const std::string& key, std::uint64_t value) { kv(key, std::to_string(value)); }
  void open(const std::string& key) { line(key + ":"); ++depth_; }
  void close() { --depth_; }
  void item(const std::string& value) { line("- " + value); }
  // Starts a list item whose first key shares the dash line.
  void item_open() { pending_dash_ = true; ++depth_; }
  void list(const std::string& key, const std::vector<Bitstring>& items) {
    if (items.empty()) {
      kv(key, "[]");
      return;
    }
    open(key);
    for (const auto& s : items) item(bits(s));
    close();
  }
  std::string str() const { return out_; }

 private:
  void line(const std::string& text) {
    if (pending_dash_) {
      out_ += std::string(2 * (depth_ - 1), ' ') + "- " + text + "\n";
      pending_dash_ = false;
    } else {
      out_ += std::string(2 * depth_, ' ') + text + "\n";
    }
  }
  std::string out_;
  std::size_t depth_ = 0;
  bool pending_dash_ = false;
};

void certificate_body(Doc& doc, const OrthoCertificate& cert) {
  doc.kv("epsilon", cert.epsilon);
  doc.kv("depth", cert.depth);
  doc.kv("mu-mass", cert.mu_mass);
  doc.kv("nu-mass", cert.nu_mass);
  doc.list("cells", cert.cells.strings);
}

struct Outcome {
  std::string text;
  int code = 0;
};

Outcome scalar(const std::string& value) { return {value + "\n", 0}; }

SweepLimits limits_from(std::uint64_t states, std::uint64_t cells) {
  SweepLimits l;
  l.max_states = states;
  l.max_cells = cells;
  return l;
}

Outcome family_build(std::uint64_t count, const Rational& eps, std::uint64_t max_depth, std::uint64_t n_candidates,
                     const SweepLimits& limits) {
  if (n_candidates == 0) n_candidates = 2 * count;
  const std::vector<BitOracle> all = perfect_family(std::max<std::uint64_t>(n_candidates, 1));
  std::vector<std::size_t> remaining;
  for (std::size_t i = 0; i < all.size() && i < n_candidates; ++i) remaining.push_back(i);

  struct Member {
    std::size_t candidate;
    MeasureCode measure;
    std::vector<OrthoCertificate> certs;
  };
  std::vector<Member> members;
  std::optional<FamilyFailure> failure;
  std::vector<std::size_t> failure_map;
  ExtendOptions options;
  options.recheck_family = false;
  options.limits = limits;
  while (members.size() < count) {
    std::vector<MeasureCode> family;
    for (const auto& m : members) family.push_back(m.measure);
    std::vector<BitOracle> cands;
    for (std::size_t i : remaining) cands.push_back(all[i]);
    auto r = extend_family(family, cands, eps, max_depth, options);
    if (auto* ext = std::get_if<FamilyExtension>(&r)) {
      const std::size_t original = remaining[ext->candidate];
      members.push_back(Member{original, ext->measure, std::move(ext->certificates)});
      remaining.erase(remaining.begin() + static_cast<std::ptrdiff_t>(ext->candidate));
    } else {
      failure = std::get<FamilyFailure>(std::move(r));
      failure_map = remaining;
      break;
    }
  }

  Doc doc;
  doc.kv("result", failure ? "failure" : "complete");
  doc.kv("count", count);
  doc.kv("epsilon", eps);
  doc.kv("max-depth", max_depth);
  doc.kv("candidates", n_candidates);
  if (members.empty()) {
    doc.kv("members", "[]");
  } else {
    doc.open("members");
    for (std::size_t i = 0; i < members.size(); ++i) {
      doc.item_open();
      doc.kv("index", i);
      doc.kv("candidate", members[i].candidate);
      doc.kv("parameter", all[members[i].candidate].label());
      if (members[i].certs.empty()) {
        doc.kv("certificates", "[]");
      } else {
        doc.open("certificates");
        for (std::size_t j = 0; j < members[i].certs.size(); ++j) {
          doc.item_open();
          doc.kv("against", j);
          certificate_body(doc, members[i].certs[j]);
          doc.close();
        }
        doc.close();
      }
      doc.close();
    }
    doc.close();
  }
  if (failure) {
    doc.open("failure");
    doc.kv("iteration", members.size());
    doc.open("rejected");
    for (const auto& c : failure->candidates) {
      const std::size_t original = failure_map[c.candidate];
      doc.item_open();
      doc.kv("candidate", original);
      doc.kv("parameter", all[original].label());
      doc.kv("against", c.member);
      doc.kv("best-gap", c.best_gap);
      doc.kv("at-depth", c.at_depth);
      doc.kv("reason", c.reason == RejectReason::TooManyCells ? "too-many-cells" : "no-certificate");
      if (auto bound = gap_upper_bound(members[c.member].measure, product_code(ks_schedule(all[original])),
                                       max_depth))
        doc.kv("gap-upper-bound", *bound);
      doc.close();
    }
    doc.close();
    doc.close();
  }
  return {doc.str(), failure ? 1 : 0};
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Exact computations with measure codes on Cantor space", "cmc"};
  app.require_subcommand(1);
  std::function<Outcome()> action;

  std::uint64_t budget_flag = 0;
  std::string max_states = std::to_string(SweepLimits{}.max_states);
  std::string max_cells = std::to_string(SweepLimits{}.max_cells);
  auto sweep_flags = [&](CLI::App* sub) {
    sub->add_option("--max-states", max_states, "sweep state limit");
    sub->add_option("--max-cells", max_cells, "certificate cell limit");
  };
  auto limits = [&] { return limits_from(count_arg(max_states, "--max-states"), count_arg(max_cells, "--max-cells")); };
  auto budget = [&] { return budget_flag ? static_cast<std::size_t>(budget_flag) : default_budget(); };

  std::string a1, a2, a3, a4, a5;

  auto* eval = app.add_subcommand("eval", "cylinder mass f(s)");
  eval->add_option("measure", a1)->required();
  eval->add_option("bits", a2)->required();
  eval->callback([&] {
    action = [&] {
      const MeasureCode m = parse_measure(source(a1));
      return scalar(m(Bitstring(a2 == "\"\"" ? "" : a2)).str());
    };
  });

  auto* enc = app.add_subcommand("encode", "embed a payload along the splitting spine");
  enc->add_option("measure", a1)->required();
  enc->add_option("payload", a2)->required();
  enc->add_option("--budget", budget_flag, "splitting search budget");
  enc->callback([&] {
    action = [&] {
      const MeasureCode f = parse_measure(source(a1), budget());
      const Bitstring p = parse_payload(a2);
      if (!p.empty()) spine(f, p.size() - 1, budget());
      return scalar(print(encode(f, p, budget()).code()));
    };
  });

  auto* dec = app.add_subcommand("decode", "read k payload bits");
  dec->add_option("measure", a1)->required();
  dec->add_option("k", a2)->required();
  dec->add_option("--budget", budget_flag, "splitting search budget");
  dec->callback([&] {
    action = [&]() -> Outcome {
      const MeasureCode g = parse_measure(source(a1), budget());
      try {
        return scalar(bits(decode(g, count_arg(a2, "k"), budget())));
      } catch (const NotInCodingDomain& e) {
        Doc doc;
        doc.kv("result", "not-in-coding-domain");
        doc.kv("index", e.index());
        doc.kv("node", bits(e.node()));
        return {doc.str(), 1};
      }
    };
  });

  auto* gap_cmd = app.add_subcommand("gap", "depth-d total variation");
  gap_cmd->add_option("mu", a1)->required();
  gap_cmd->add_option("nu", a2)->required();
  gap_cmd->add_option("depth", a3)->required();
  sweep_flags(gap_cmd);
  gap_cmd->callback([&] {
    action = [&] {
      return scalar(
          gap(parse_measure(source(a1)), parse_measure(source(a2)), count_arg(a3, "depth"), limits()).str());
    };
  });

  auto* cert = app.add_subcommand("certify", "orthogonality certificate");
  cert->add_option("mu", a1)->required();
  cert->add_option("nu", a2)->required();
  cert->add_option("epsilon", a3)->required();
  cert->add_option("max-depth", a4)->required();
  sweep_flags(cert);
  cert->callback([&] {
    action = [&]() -> Outcome {
      const MeasureCode mu = parse_measure(source(a1)), nu = parse_measure(source(a2));
      const auto r = ortho_certificate(mu, nu, rational_arg(a3, "epsilon"), count_arg(a4, "max-depth"), limits());
      Doc doc;
      if (const auto* c = std::get_if<OrthoCertificate>(&r)) {
        doc.kv("result", "certificate");
        certificate_body(doc, *c);
        return {doc.str(), 0};
      }
      const auto& inc = std::get<OrthoInconclusive>(r);
      doc.kv("result", "inconclusive");
      doc.kv("best-gap", inc.best_gap);
      doc.kv("at-depth", inc.at_depth);
      return {doc.str(), 1};
    };
  });

  auto* mod = app.add_subcommand("modulus", "uniform continuity modulus");
  mod->add_option("mu", a1)->required();
  mod->add_option("epsilon", a2)->required();
  mod->add_option("max-depth", a3)->required();
  sweep_flags(mod);
  mod->callback([&] {
    action = [&]() -> Outcome {
      const auto r = continuity_modulus(parse_measure(source(a1)), rational_arg(a2, "epsilon"),
                                        count_arg(a3, "max-depth"), limits());
      Doc doc;
      if (const auto* m = std::get_if<Modulus>(&r)) {
        doc.kv("result", "modulus");
        doc.kv("level", m->level);
        return {doc.str(), 0};
      }
      if (const auto* a = std::get_if<AtomWitness>(&r)) {
        doc.kv("result", "atom");
        doc.kv("prefix", bits(a->prefix));
        doc.kv("epsilon", a->epsilon);
        doc.kv("mass", a->mass);
        return {doc.str(), 0};
      }
      doc.kv("result", "inconclusive");
      return {doc.str(), 1};
    };
  });

  auto* ref = app.add_subcommand("refute-ac", "evidence against absolute continuity mu << nu");
  ref->add_option("mu", a1)->required();
  ref->add_option("nu", a2)->required();
  ref->add_option("epsilon", a3)->required();
  ref->add_option("stages", a4)->required();
  ref->add_option("max-depth", a5)->required();
  sweep_flags(ref);
  ref->callback([&] {
    action = [&]() -> Outcome {
      const auto r = refute_abs_continuity(parse_measure(source(a1)), parse_measure(source(a2)),
                                           rational_arg(a3, "epsilon"), count_arg(a4, "stages"),
                                           count_arg(a5, "max-depth"), limits());
      Doc doc;
      const auto* w = std::get_if<RefutationWitness>(&r);
      if (w == nullptr) {
        doc.kv("result", "inconclusive");
        return {doc.str(), 1};
      }
      doc.kv("result", "witness");
      doc.kv("epsilon", w->epsilon);
      if (w->stages.empty()) {
        doc.kv("stages", "[]");
      } else {
        doc.open("stages");
        for (const auto& st : w->stages) {
          doc.item_open();
          doc.kv("delta", st.delta);
          doc.kv("depth", st.depth);
          doc.kv("nu-mass", st.nu_mass);
          doc.kv("mu-mass", st.mu_mass);
          doc.list("family", st.family.strings);
          doc.close();
        }
        doc.close();
      }
      return {doc.str(), 0};
    };
  });

  auto* ei = app.add_subcommand("ei-sum", "partial sum of |x(n) - x'(n)|/(n+1)");
  ei->add_option("x", a1)->required();
  ei->add_option("y", a2)->required();
  ei->add_option("N", a3)->required();
  ei->callback([&] {
    action = [&] {
      return scalar(
          ei_partial_sum(parse_sequence(source(a1)), parse_sequence(source(a2)), count_arg(a3, "N")).str());
    };
  });

  std::string target = default_divergence_target().str();
  auto* cls = app.add_subcommand("classify", "E_I evidence for two parameter sequences");
  cls->add_option("x", a1)->required();
  cls->add_option("y", a2)->required();
  cls->add_option("budget", a3)->required();
  cls->add_option("--target", target, "divergence target");
  cls->callback([&] {
    action = [&]() -> Outcome {
      const auto r = classify_pair(parse_sequence(source(a1)), parse_sequence(source(a2)),
                                   count_arg(a3, "budget"), rational_arg(target, "--target"));
      Doc doc;
      if (const auto* e = std::get_if<EquivalentFiniteDifference>(&r)) {
        doc.kv("result", "equivalent");
        doc.kv("last-diff", e->last_diff ? std::to_string(*e->last_diff) : "none");
        return {doc.str(), 0};
      }
      if (const auto* o = std::get_if<OrthogonalEvidence>(&r)) {
        doc.kv("result", "orthogonal");
        doc.kv("terms", o->certificate.terms);
        doc.kv("partial-sum", o->certificate.partial_sum);
        doc.kv("target", o->certificate.target);
        return {doc.str(), 0};
      }
      doc.kv("result", "inconclusive");
      return {doc.str(), 1};
    };
  });

  auto* hel = app.add_subcommand("hellinger", "enclosure of the Hellinger partial sum");
  hel->add_option("a", a1)->required();
  hel->add_option("b", a2)->required();
  hel->add_option("N", a3)->required();
  hel->add_option("precision", a4)->required();
  hel->callback([&] {
    action = [&] {
      const auto r =
          hellinger_partial(schedule_arg(a1), schedule_arg(a2), count_arg(a3, "N"), count_arg(a4, "precision"));
      Doc doc;
      doc.kv("terms", r.terms);
      doc.kv("precision", static_cast<std::uint64_t>(r.precision_bits));
      doc.kv("lo", r.sum.lo);
      doc.kv("hi", r.sum.hi);
      return Outcome{doc.str(), 0};
    };
  });

  std::string n_candidates = "0";
  auto* fam = app.add_subcommand("family", "families of orthogonal measures");
  fam->require_subcommand(1);
  auto* build = fam->add_subcommand("build", "iterate extend_family over perfect_family candidates");
  build->add_option("count", a1)->required();
  build->add_option("epsilon", a2)->required();
  build->add_option("max-depth", a3)->required();
  build->add_option("--candidates", n_candidates, "number of candidates (default 2 * count)");
  sweep_flags(build);
  build->callback([&] {
    action = [&] {
      return family_build(count_arg(a1, "count"), rational_arg(a2, "epsilon"), count_arg(a3, "max-depth"),
                          count_arg(n_candidates, "--candidates"), limits());
    };
  });

  auto* met = app.add_subcommand("metric", "bracket on the distance between two codes");
  met->add_option("f", a1)->required();
  met->add_option("g", a2)->required();
  met->add_option("N", a3)->required();
  met->callback([&] {
    action = [&] {
      const std::uint64_t n = count_arg(a3, "N");
      const auto b = metric_bracket(parse_measure(source(a1)), parse_measure(source(a2)), n);
      Doc doc;
      doc.kv("terms", n);
      doc.kv("lo", b.lo);
      doc.kv("hi", b.hi);
      return Outcome{doc.str(), 0};
    };
  });

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: usage: " << e.what() << "\n";
    return 2;
  }

  try {
    if (!action) throw UsageError("no command given");
    const Outcome o = action();
    out << o.text;
    return o.code;
  } catch (const Error& e) {
    err << "error: " << e.code() << ": " << e.what() << "\n";
  } catch (const std::invalid_argument& e) {
    err << "error: invalid-argument: " << e.what() << "\n";
  } catch (const std::exception& e) {
    err << "error: internal: " << e.what() << "\n";
  }
  return 2;
}

}  // namespace cmc
