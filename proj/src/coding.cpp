#include "mkernel/coding.hpp"

#include <fstream>
#include <functional>
#include <map>
#include <sstream>

namespace mk {

const char* standard_rules_text() {
  return R"(# Coding equalities as left-linear rewrite rules: lhs => rhs
# ?X matches any syntax, ?X:fml a formula, ?X:var a variable, ?X:num a numeral.
(dneg (quote ?A:fml)) => (quote (not ?A:fml))
(dand (quote ?A:fml) (quote ?B:fml)) => (quote (and ?A:fml ?B:fml))
(dor (quote ?A:fml) (quote ?B:fml)) => (quote (or ?A:fml ?B:fml))
(dimp (quote ?A:fml) (quote ?B:fml)) => (quote (imp ?A:fml ?B:fml))
(diff (quote ?A:fml) (quote ?B:fml)) => (quote (iff ?A:fml ?B:fml))
(dall (quote ?V:var) (quote ?A:fml)) => (quote (all ?V:var ?A:fml))
(dex (quote ?V:var) (quote ?A:fml)) => (quote (ex ?V:var ?A:fml))
(dsub (quote ?A) (quote ?V:var) (quote ?T:term)) => (quote (@subst ?A ?V:var ?T:term))
(dnum (quote ?A)) => (quote (quote ?A))
(dnumeral ?N:num) => (quote ?N:num)
(pred (S ?N)) => ?N
(pred 0) => 0
(dpr.* (quote ?A:fml)) => (quote (Pr.* (quote ?A:fml)))
)";
}

namespace {

using Bindings = std::map<std::string, Expr>;

bool is_family_head(const std::string& s) { return s.size() > 2 && s.compare(s.size() - 2, 2, ".*") == 0; }

bool meta_ok(const std::string& name, const Expr& t) {
  auto colon = name.find(':');
  if (colon == std::string::npos) return true;
  std::string ty = name.substr(colon + 1);
  unsigned n;
  if (ty == "fml") return is_formula(t) && t->kind != Kind::Meta;
  if (ty == "term") return is_term(t);
  if (ty == "var") return t->kind == Kind::Var;
  if (ty == "num") return numeral_value(t, n);
  return false;
}

bool match(const Expr& pat, const Expr& t, Bindings& b, std::string& suffix) {
  if (pat->kind == Kind::Meta) {
    if (!meta_ok(pat->name, t)) return false;
    auto it = b.find(pat->name);
    if (it != b.end()) return alpha_eq(it->second, t);
    b.emplace(pat->name, t);
    return true;
  }
  if (pat->kind != t->kind || pat->kids.size() != t->kids.size()) return false;
  if (is_family_head(pat->name)) {
    std::string prefix = pat->name.substr(0, pat->name.size() - 1);
    if (t->name.size() <= prefix.size() || t->name.compare(0, prefix.size(), prefix) != 0) return false;
    suffix = t->name.substr(prefix.size());
  } else if (pat->name != t->name) {
    return false;
  }
  for (std::size_t i = 0; i < pat->kids.size(); ++i)
    if (!match(pat->kids[i], t->kids[i], b, suffix)) return false;
  return true;
}

Expr instantiate(const Expr& pat, const Bindings& b, const std::string& suffix) {
  if (pat->kind == Kind::Meta) {
    auto it = b.find(pat->name);
    if (it == b.end()) throw CodingError("unbound metavariable " + pat->name);
    return it->second;
  }
  std::vector<Expr> kids;
  for (auto& k : pat->kids) kids.push_back(instantiate(k, b, suffix));
  if (pat->kind == Kind::MetaOp) {
    if (pat->name == "@subst" && kids.size() == 3 && kids[1]->kind == Kind::Var)
      return substitute(kids[0], kids[1]->name, kids[2]);
    throw CodingError("unknown meta operation " + pat->name);
  }
  std::string name = pat->name;
  if (!name.empty() && name[0] == '?') {
    auto it = b.find(name);
    if (it == b.end() || it->second->kind != Kind::Var) throw CodingError("binder metavariable " + name);
    name = it->second->name;
  } else if (is_family_head(name)) {
    name = name.substr(0, name.size() - 1) + suffix;
  }
  return make(pat->kind, name, std::move(kids));
}

std::string rule_name(const Expr& lhs) {
  std::string n = lhs->name;
  if (is_family_head(n)) n = n.substr(0, n.size() - 2);
  return n;
}

}  // namespace

CodingRules CodingRules::parse(std::string_view text) {
  CodingRules r;
  std::istringstream in{std::string(text)};
  std::string line;
  std::map<std::string, int> seen;
  while (std::getline(in, line)) {
    auto first = line.find_first_not_of(" \t");
    if (first == std::string::npos || line[first] == '#') continue;
    auto arrow = line.find("=>");
    if (arrow == std::string::npos) throw CodingError("rule without '=>': " + line);
    CodingRule rule;
    rule.lhs = parse_pattern(line.substr(0, arrow));
    rule.rhs = parse_pattern(line.substr(arrow + 2));
    if (rule.lhs->kind != Kind::App) throw CodingError("rule lhs must be an application: " + line);
    rule.name = rule_name(rule.lhs);
    if (seen[rule.name]++) rule.name += "#" + std::to_string(seen[rule.name]);
    r.rules_.push_back(std::move(rule));
  }
  return r;
}

const CodingRules& CodingRules::standard() {
  static const CodingRules r = parse(standard_rules_text());
  return r;
}

CodingRules CodingRules::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw CodingError("cannot open rules file " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse(ss.str());
}

CodingRules CodingRules::without(const std::string& name) const {
  CodingRules r;
  for (auto& rule : rules_)
    if (rule.name != name) r.rules_.push_back(rule);
  return r;
}

std::optional<Expr> CodingRules::rewrite_root(const Expr& t) const {
  if (t->kind != Kind::App) return std::nullopt;
  for (auto& rule : rules_) {
    Bindings b;
    std::string suffix;
    if (match(rule.lhs, t, b, suffix)) return instantiate(rule.rhs, b, suffix);
  }
  return std::nullopt;
}

Expr quote_of(const Expr& s) { return quote(s); }

Expr decode(const Expr& t) {
  if (t->kind != Kind::Quote) throw CodingError("not a code: " + print(t));
  return t->kids[0];
}

namespace {

Expr norm_inner(const Expr& t, const CodingRules& rules) {
  if (t->kind == Kind::Quote || t->kids.empty()) return t;
  std::vector<Expr> kids;
  bool changed = false;
  for (auto& k : t->kids) {
    kids.push_back(norm_inner(k, rules));
    changed |= kids.back() != k;
  }
  Expr cur = changed ? make(t->kind, t->name, std::move(kids)) : t;
  for (int guard = 0; guard < 1000000; ++guard) {
    auto r = rules.rewrite_root(cur);
    if (!r) return cur;
    cur = norm_inner(*r, rules);
  }
  throw CodingError("rewriting did not terminate");
}

void redexes(const Expr& t, std::vector<int>& path, std::vector<std::vector<int>>& out, const CodingRules& rules) {
  if (t->kind == Kind::Quote) return;
  if (rules.rewrite_root(t)) out.push_back(path);
  for (std::size_t i = 0; i < t->kids.size(); ++i) {
    path.push_back(static_cast<int>(i));
    redexes(t->kids[i], path, out, rules);
    path.pop_back();
  }
}

Expr replace_at(const Expr& t, const std::vector<int>& path, std::size_t i, const CodingRules& rules) {
  if (i == path.size()) return *rules.rewrite_root(t);
  std::vector<Expr> kids = t->kids;
  kids[static_cast<std::size_t>(path[i])] = replace_at(kids[static_cast<std::size_t>(path[i])], path, i + 1, rules);
  return make(t->kind, t->name, std::move(kids));
}

void require_ground(const Expr& t) {
  auto fv = free_vars(t);
  if (!fv.empty()) throw CodingError("non-ground coding term (free " + *fv.begin() + "): " + print(t));
  if (!is_term(t)) throw CodingError("not a term: " + print(t));
}

}  // namespace

Expr coding_normalize(const Expr& t, const CodingRules& rules) {
  require_ground(t);
  return norm_inner(t, rules);
}

Expr coding_normalize_random(const Expr& t, std::mt19937& rng, const CodingRules& rules) {
  require_ground(t);
  Expr cur = t;
  for (;;) {
    std::vector<std::vector<int>> rs;
    std::vector<int> path;
    redexes(cur, path, rs, rules);
    if (rs.empty()) return cur;
    cur = replace_at(cur, rs[rng() % rs.size()], 0, rules);
  }
}

Expr normalize_formula(const Expr& e, const CodingRules& rules) {
  switch (e->kind) {
    case Kind::Quote: case Kind::Var: case Kind::Const: case Kind::Bot: case Kind::Top: case Kind::Meta:
      return e;
    case Kind::App:
      if (is_closed(e)) return norm_inner(e, rules);
      [[fallthrough]];
    default: {
      std::vector<Expr> kids;
      bool changed = false;
      for (auto& k : e->kids) {
        kids.push_back(normalize_formula(k, rules));
        changed |= kids.back() != k;
      }
      return changed ? make(e->kind, e->name, std::move(kids)) : e;
    }
  }
}

bool has_redex(const Expr& e, const CodingRules& rules) {
  if (e->kind == Kind::Quote) return false;
  if (e->kind == Kind::App && is_closed(e) && rules.rewrite_root(e)) return true;
  for (auto& k : e->kids)
    if (has_redex(k, rules)) return true;
  return false;
}

// --- diagonalization ----------------------------------------------------------

Diagonal diagonalize(const Expr& psi_in) {
  Expr psi = expand(psi_in);
  auto fv = free_vars(psi);
  if (fv.size() != 1) throw CodingError("diagonalize needs exactly one free variable, got " + std::to_string(fv.size()));
  if (!is_formula(psi)) throw CodingError("diagonalize needs a formula");
  Diagonal d;
  d.var = *fv.begin();
  Expr x = var(d.var);
  d.delta = substitute(psi, d.var, app("dsub", {x, quote(x), app("dnum", {x})}));
  Expr qd = quote(d.delta);
  Expr s = app("dsub", {qd, quote(x), app("dnum", {qd})});
  d.lambda = substitute(psi, d.var, s);
  Expr ql = quote(d.lambda);
  Expr fixed = substitute(psi, d.var, ql);

  ProofBuilder b;
  int c = b.coding(eq(s, ql));
  int fw = b.logic("eqsub", imp(eq(s, ql), imp(d.lambda, fixed)));
  int bw = b.logic("eqsub", imp(eq(s, ql), imp(fixed, d.lambda)));
  int f1 = b.mp(fw, c);
  int b1 = b.mp(bw, c);
  b.taut_chain({f1, b1}, iff(d.lambda, fixed));
  d.proof = b.take();
  return d;
}

// --- revision families ----------------------------------------------------------

namespace {

void require_fv(const Expr& e, const std::set<std::string>& allowed, const char* what) {
  for (auto& v : free_vars(e))
    if (!allowed.count(v)) throw CodingError(std::string(what) + " has unexpected free variable " + v);
}

Expr slot_term() {
  Expr z = var("z");
  return app("dsub", {z, quote(z), app("dnum", {z})});
}

Expr prev_code(const Expr& code_of_family) {
  Expr n = var("n");
  return app("dsub", {code_of_family, quote(n), app("dnumeral", {app("pred", {n})})});
}

void close_family(ModFamily& fam) {
  fam.delta = substitute(fam.body, "z", slot_term());
  fam.formula = substitute(fam.delta, "z", quote(fam.delta));
}

Expr fml_guard(const ModFamily& fam) { return atom("Fml." + fam.rev_lang, {var("p")}); }
Expr va_guard() { return atom("VAU", {var("f"), var("U")}); }

}  // namespace

ModFamily build_mod_family(const Expr& uni_formula, const Expr& mod0_formula, const std::string& rev_lang) {
  require_fv(uni_formula, {"n", "U"}, "uni formula");
  require_fv(mod0_formula, {"U", "p", "f"}, "mod0 formula");
  ModFamily fam;
  fam.rev_lang = rev_lang;
  fam.uni = uni_formula;
  fam.mod0 = mod0_formula;
  Expr n = var("n"), U = var("U"), p = var("p"), f = var("f");
  Expr sat = atom("SatX", {U, prev_code(quote(uni_formula)), prev_code(slot_term()), p, f});
  fam.body = conjs({atom("Nat", {n}), uni_formula, fml_guard(fam), va_guard(),
                    imp(eq(n, cnst("0")), mod0_formula), imp(atom("Lt", {cnst("0"), n}), sat)});
  close_family(fam);
  return fam;
}

ModFamily build_mod_circ(const Expr& uni_formula, const std::string& rev_lang) {
  require_fv(uni_formula, {"n", "U"}, "uni formula");
  ModFamily fam;
  fam.circ = true;
  fam.rev_lang = rev_lang;
  fam.uni = uni_formula;
  Expr uni0 = substitute(uni_formula, "n", numeral(0));
  Expr sat = atom("SatX", {var("U"), quote(uni0), slot_term(), var("p"), var("f")});
  fam.body = conjs({uni0, fml_guard(fam), va_guard(), sat});
  close_family(fam);
  return fam;
}

Expr uni_stage(const ModFamily& fam, unsigned k) {
  return substitute(fam.uni, "n", numeral(fam.circ ? 0 : k));
}

Expr mod_stage(const ModFamily& fam, unsigned k) {
  return fam.circ ? fam.formula : substitute(fam.formula, "n", numeral(k));
}

Expr dagger_rhs(const ModFamily& fam, unsigned k) {
  Expr raw = normalize_formula(mod_stage(fam, k));
  if (fam.circ) return raw;
  // raw = Nat(k) & uni & fml & va & (k=0 -> mod0) & (0<k -> sat), right-nested
  const Expr& c1 = raw->kids[1];
  const Expr& c2 = c1->kids[1];
  const Expr& c3 = c2->kids[1];
  const Expr& branches = c3->kids[1];
  Expr chosen = k == 0 ? branches->kids[0]->kids[1] : branches->kids[1]->kids[1];
  return conjs({c1->kids[0], c2->kids[0], c3->kids[0], chosen});
}

ProofScript verify_dagger(const ModFamily& fam, unsigned k) {
  Prefix pi = {{"U", nullptr}, {"p", nullptr}, {"f", nullptr}};
  Expr lhs = mod_stage(fam, k);
  Expr raw = normalize_formula(lhs);
  ProofBuilder b;
  int unfold = b.coding(wrap(pi, iff(lhs, raw)));
  if (fam.circ) return b.take();
  Expr kk = numeral(k);
  Expr is0 = eq(kk, cnst("0"));
  Expr pos = atom("Lt", {cnst("0"), kk});
  int nat = b.lift(pi, b.base("arith", atom("Nat", {kk})));
  int z = b.lift(pi, b.base("arith", k == 0 ? is0 : neg(is0)));
  int l = b.lift(pi, b.base("arith", k == 0 ? neg(pos) : pos));
  b.ctx_taut(pi, {unfold, nat, z, l}, iff(lhs, dagger_rhs(fam, k)));
  return b.take();
}

std::optional<unsigned long long> arith_value(const Expr& t) {
  if (t->kind == Kind::Const && t->name == "0") return 0;
  if (t->kind != Kind::App) return std::nullopt;
  std::vector<unsigned long long> v;
  for (auto& k : t->kids) {
    auto x = arith_value(k);
    if (!x) return std::nullopt;
    v.push_back(*x);
  }
  if (t->name == "S" && v.size() == 1) return v[0] + 1;
  if (t->name == "pred" && v.size() == 1) return v[0] ? v[0] - 1 : 0;
  if (t->name == "+" && v.size() == 2) return v[0] + v[1];
  if (t->name == "*" && v.size() == 2) return v[0] * v[1];
  return std::nullopt;
}

}  // namespace mk
