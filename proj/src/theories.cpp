#include "mkernel/theories.hpp"

#include <algorithm>
#include <fstream>
#include <mutex>
#include <regex>
#include <sstream>

#include "mkernel/coding.hpp"

namespace mk {

namespace {

Expr P(const char* text) { return expand(parse_formula(text)); }

// --- templates ---------------------------------------------------------------
// A template is an expanded formula with slot variables _p, _q, ... standing
// for closed code terms. Matching binds slots structurally and then compares
// coding normal forms, so (dneg _p) accepts both dneg(quote a) and quote(not a).

struct Slot {
  std::string name;  // without the leading underscore
  char ty;           // 'f' formula code, 's' sentence code, 'v' variable code
  std::string tag;
};

struct Tmpl {
  Expr pat;
  std::vector<Slot> slots;
};

Tmpl tmpl(const char* text, std::vector<Slot> slots) {
  Expr e = expand(parse_formula(text));
  std::map<std::string, Expr> s;
  for (auto& sl : slots) s[sl.name] = var("_" + sl.name);
  return {substitute(e, s), std::move(slots)};
}

bool mentions_slot(const Expr& t) {
  if (t->kind == Kind::Var) return t->name[0] == '_';
  if (t->kind == Kind::Quote) return false;
  for (auto& k : t->kids)
    if (mentions_slot(k)) return true;
  return false;
}

using Env = std::vector<std::pair<std::string, std::string>>;

bool walk(const Expr& t, const Expr& s, Env& env, std::map<std::string, Expr>& b) {
  if (t->kind == Kind::Var) {
    for (auto it = env.rbegin(); it != env.rend(); ++it)
      if (it->first == t->name) return s->kind == Kind::Var && s->name == it->second;
    if (t->name[0] == '_') {
      if (!is_term(s) || !is_closed(s)) return false;
      auto [pos, fresh_slot] = b.emplace(t->name, s);
      return fresh_slot || alpha_eq(pos->second, s);
    }
    if (s->kind != Kind::Var || s->name != t->name) return false;
    for (auto& [tb, sb] : env)
      if (sb == s->name) return false;
    return true;
  }
  // A slot buried in a dotted term is settled by the final normal-form comparison.
  if (t->kind == Kind::App && is_term(s) && mentions_slot(t)) return true;
  if (t->kind != s->kind || t->name != s->name || t->kids.size() != s->kids.size()) return false;
  if (t->kind == Kind::Quote) return alpha_eq(t, s);
  if (is_binder(t->kind)) {
    env.emplace_back(t->name, s->name);
    bool ok = walk(t->kids[0], s->kids[0], env, b);
    env.pop_back();
    return ok;
  }
  for (std::size_t i = 0; i < t->kids.size(); ++i)
    if (!walk(t->kids[i], s->kids[i], env, b)) return false;
  return true;
}

bool slot_ok(const Slot& sl, const Expr& code) {
  if (code->kind != Kind::Quote) return false;
  const Expr& c = code->kids[0];
  if (sl.ty == 'v') return c->kind == Kind::Var;
  if (!is_formula(c)) return false;
  if (sl.ty == 's' && !is_sentence(c)) return false;
  const Language* lang = Language::by_tag(sl.tag);
  return lang && in_language(c, *lang);
}

bool match_tmpl(const Tmpl& t, const Expr& s, std::map<std::string, Expr>* out = nullptr) {
  Env env;
  std::map<std::string, Expr> b;
  if (!walk(t.pat, s, env, b)) return false;
  std::map<std::string, Expr> norm;
  for (auto& sl : t.slots) {
    auto it = b.find("_" + sl.name);
    if (it == b.end()) return false;
    Expr code;
    try {
      code = coding_normalize(it->second);
    } catch (const CodingError&) {
      return false;
    }
    if (!slot_ok(sl, code)) return false;
    norm["_" + sl.name] = code;
  }
  Expr inst = substitute(t.pat, norm);
  if (!alpha_eq(normalize_formula(inst), normalize_formula(s))) return false;
  if (out) *out = norm;
  return true;
}

Expr sample_code(const Slot& sl) {
  if (sl.ty == 'v') return quote(var("x"));
  if (sl.ty == 's') return quote(parse_formula("(= 0 0)"));
  return quote(parse_formula("(= x y)"));
}

Expr tmpl_example(const Tmpl& t) {
  std::map<std::string, Expr> s;
  for (auto& sl : t.slots) s["_" + sl.name] = sample_code(sl);
  return normalize_formula(substitute(t.pat, s));
}

Expr tmpl_instance(const Tmpl& t, const std::vector<Expr>& codes) {
  if (codes.size() != t.slots.size()) throw std::invalid_argument("wrong number of codes for schema instance");
  std::map<std::string, Expr> s;
  for (std::size_t i = 0; i < codes.size(); ++i) s["_" + t.slots[i].name] = codes[i];
  return normalize_formula(substitute(t.pat, s));
}

// --- recognizer factories --------------------------------------------------------

Recognizer exact(std::string label, Expr sentence, bool derived = false) {
  Recognizer r;
  r.label = std::move(label);
  r.derived = derived;
  r.example = sentence;
  r.match = [sentence](const Expr& s) { return alpha_eq(s, sentence); };
  return r;
}

Recognizer from_tmpl(std::string label, Tmpl t, bool derived) {
  Recognizer r;
  r.label = std::move(label);
  r.derived = derived;
  r.example = tmpl_example(t);
  r.match = [t = std::move(t)](const Expr& s) { return match_tmpl(t, s); };
  return r;
}

Recognizer custom(std::string label, std::function<bool(const Expr&)> fn, Expr example, bool derived = false) {
  Recognizer r;
  r.label = std::move(label);
  r.derived = derived;
  r.match = std::move(fn);
  r.example = std::move(example);
  return r;
}

// --- schema texts --------------------------------------------------------------
// Universal forms quantify over codes with Fml./Sent./VarC guards; instance
// forms drop the code quantifiers and keep the U / f prefix.

struct CompSchema {
  const char* label;
  const char* universal;
  const char* instance;
  std::vector<Slot> slots;
  bool derived;
};

std::vector<CompSchema> cm_schemas() {
  const std::string L = "L_UM";
  return {
      {"CM_not",
       "(all U (imp (Uni U) (all p (imp (Fml.L_UM p) (all f (imp (VAU f U) (iff (Mod U (dneg p) f) (not (Mod U p f)))))))))",
       "(all U (imp (Uni U) (all f (imp (VAU f U) (iff (Mod U (dneg p) f) (not (Mod U p f)))))))",
       {{"p", 'f', L}}, false},
      {"CM_and",
       "(all U (imp (Uni U) (all p (imp (Fml.L_UM p) (all q (imp (Fml.L_UM q) (all f (imp (VAU f U) "
       "(iff (Mod U (dand p q) f) (and (Mod U p f) (Mod U q f)))))))))))",
       "(all U (imp (Uni U) (all f (imp (VAU f U) (iff (Mod U (dand p q) f) (and (Mod U p f) (Mod U q f)))))))",
       {{"p", 'f', L}, {"q", 'f', L}}, false},
      {"CM_all",
       "(all U (imp (Uni U) (all u (imp (VarC u) (all p (imp (Fml.L_UM p) (all f (imp (VAU f U) "
       "(iff (Mod U (dall u p) f) (all g (imp (VAUfv g U f u) (Mod U p g))))))))))))",
       "(all U (imp (Uni U) (all f (imp (VAU f U) (iff (Mod U (dall u p) f) (all g (imp (VAUfv g U f u) (Mod U p g))))))))",
       {{"u", 'v', L}, {"p", 'f', L}}, false},
      {"CM_or",
       "(all U (imp (Uni U) (all p (imp (Fml.L_UM p) (all q (imp (Fml.L_UM q) (all f (imp (VAU f U) "
       "(iff (Mod U (dor p q) f) (or (Mod U p f) (Mod U q f)))))))))))",
       "(all U (imp (Uni U) (all f (imp (VAU f U) (iff (Mod U (dor p q) f) (or (Mod U p f) (Mod U q f)))))))",
       {{"p", 'f', L}, {"q", 'f', L}}, true},
      {"CM_imp",
       "(all U (imp (Uni U) (all p (imp (Fml.L_UM p) (all q (imp (Fml.L_UM q) (all f (imp (VAU f U) "
       "(iff (Mod U (dimp p q) f) (imp (Mod U p f) (Mod U q f)))))))))))",
       "(all U (imp (Uni U) (all f (imp (VAU f U) (iff (Mod U (dimp p q) f) (imp (Mod U p f) (Mod U q f)))))))",
       {{"p", 'f', L}, {"q", 'f', L}}, true},
      {"CM_iff",
       "(all U (imp (Uni U) (all p (imp (Fml.L_UM p) (all q (imp (Fml.L_UM q) (all f (imp (VAU f U) "
       "(iff (Mod U (diff p q) f) (iff (Mod U p f) (Mod U q f)))))))))))",
       "(all U (imp (Uni U) (all f (imp (VAU f U) (iff (Mod U (diff p q) f) (iff (Mod U p f) (Mod U q f)))))))",
       {{"p", 'f', L}, {"q", 'f', L}}, true},
      {"CM_ex",
       "(all U (imp (Uni U) (all u (imp (VarC u) (all p (imp (Fml.L_UM p) (all f (imp (VAU f U) "
       "(iff (Mod U (dex u p) f) (ex g (and (VAUfv g U f u) (Mod U p g))))))))))))",
       "(all U (imp (Uni U) (all f (imp (VAU f U) (iff (Mod U (dex u p) f) (ex g (and (VAUfv g U f u) (Mod U p g))))))))",
       {{"u", 'v', L}, {"p", 'f', L}}, true},
  };
}

std::vector<CompSchema> ct_schemas() {
  const std::string L = "L_Sat+";
  return {
      {"CT_not", "(all p (imp (Fml.L_Sat+ p) (all f (imp (VA f) (iff (Sat (dneg p) f) (not (Sat p f)))))))",
       "(all f (imp (VA f) (iff (Sat (dneg p) f) (not (Sat p f)))))", {{"p", 'f', L}}, false},
      {"CT_and",
       "(all p (imp (Fml.L_Sat+ p) (all q (imp (Fml.L_Sat+ q) (all f (imp (VA f) "
       "(iff (Sat (dand p q) f) (and (Sat p f) (Sat q f)))))))))",
       "(all f (imp (VA f) (iff (Sat (dand p q) f) (and (Sat p f) (Sat q f)))))", {{"p", 'f', L}, {"q", 'f', L}}, false},
      {"CT_all",
       "(all u (imp (VarC u) (all p (imp (Fml.L_Sat+ p) (all f (imp (VA f) "
       "(iff (Sat (dall u p) f) (all g (imp (VAfv g f u) (Sat p g))))))))))",
       "(all f (imp (VA f) (iff (Sat (dall u p) f) (all g (imp (VAfv g f u) (Sat p g))))))",
       {{"u", 'v', L}, {"p", 'f', L}}, false},
      {"CT_or",
       "(all p (imp (Fml.L_Sat+ p) (all q (imp (Fml.L_Sat+ q) (all f (imp (VA f) "
       "(iff (Sat (dor p q) f) (or (Sat p f) (Sat q f)))))))))",
       "(all f (imp (VA f) (iff (Sat (dor p q) f) (or (Sat p f) (Sat q f)))))", {{"p", 'f', L}, {"q", 'f', L}}, true},
      {"CT_imp",
       "(all p (imp (Fml.L_Sat+ p) (all q (imp (Fml.L_Sat+ q) (all f (imp (VA f) "
       "(iff (Sat (dimp p q) f) (imp (Sat p f) (Sat q f)))))))))",
       "(all f (imp (VA f) (iff (Sat (dimp p q) f) (imp (Sat p f) (Sat q f)))))", {{"p", 'f', L}, {"q", 'f', L}}, true},
      {"CT_iff",
       "(all p (imp (Fml.L_Sat+ p) (all q (imp (Fml.L_Sat+ q) (all f (imp (VA f) "
       "(iff (Sat (diff p q) f) (iff (Sat p f) (Sat q f)))))))))",
       "(all f (imp (VA f) (iff (Sat (diff p q) f) (iff (Sat p f) (Sat q f)))))", {{"p", 'f', L}, {"q", 'f', L}}, true},
      {"CT_ex",
       "(all u (imp (VarC u) (all p (imp (Fml.L_Sat+ p) (all f (imp (VA f) "
       "(iff (Sat (dex u p) f) (ex g (and (VAfv g f u) (Sat p g))))))))))",
       "(all f (imp (VA f) (iff (Sat (dex u p) f) (ex g (and (VAfv g f u) (Sat p g))))))",
       {{"u", 'v', L}, {"p", 'f', L}}, true},
  };
}

const CompSchema* find_schema(const std::vector<CompSchema>& v, const std::string& label) {
  for (auto& s : v)
    if (label == s.label) return &s;
  return nullptr;
}

// --- atomic clauses ------------------------------------------------------------

bool atomic_code(const Expr& c, std::string& rel, std::string& u, std::string& v) {
  if (c->kind != Kind::Quote) return false;
  const Expr& a = c->kids[0];
  if (a->kind != Kind::Atom || (a->name != "=" && a->name != "in")) return false;
  if (a->kids[0]->kind != Kind::Var || a->kids[1]->kind != Kind::Var) return false;
  rel = a->name;
  u = a->kids[0]->name;
  v = a->kids[1]->name;
  return true;
}

// Finds the first Sat/Mod atom whose code argument is a quote.
Expr first_code(const Expr& e, const std::string& rel, std::size_t arg) {
  if (e->kind == Kind::Atom && e->name == rel && e->kids.size() > arg && e->kids[arg]->kind == Kind::Quote)
    return e->kids[arg];
  if (e->kind == Kind::Quote || is_term(e)) return nullptr;
  for (auto& k : e->kids)
    if (Expr c = first_code(k, rel, arg)) return c;
  return nullptr;
}

Expr put_assignment(const std::string& u, const std::string& v) {
  if (u == v) return app("put", {cnst("emp"), quote(var(u)), var("y0")});
  return app("put", {app("put", {cnst("emp"), quote(var(u)), var("y0")}), quote(var(v)), var("y1")});
}

Expr ct_atomic_displayed(const Expr& code) {
  std::string rel, u, v;
  if (!atomic_code(code, rel, u, v)) return nullptr;
  Expr rhs = atom(rel, {var("y0"), var(u == v ? "y0" : "y1")});
  Expr body = iff(atom("Sat", {code, put_assignment(u, v)}), rhs);
  return u == v ? all("y0", body) : all("y0", all("y1", body));
}

Expr ct_atomic_general(const Expr& code) {
  std::string rel, u, v;
  if (!atomic_code(code, rel, u, v)) return nullptr;
  Expr f = var("f");
  Expr rhs = atom(rel, {app("at", {f, quote(var(u))}), app("at", {f, quote(var(v))})});
  return all("f", imp(atom("VA", {f}), iff(atom("Sat", {code, f}), rhs)));
}

Expr cm_atomic(const Expr& code) {
  std::string rel, u, v;
  if (!atomic_code(code, rel, u, v) || rel != "=") return nullptr;
  Expr f = var("f"), U = var("U");
  Expr rhs = eq(app("at", {f, quote(var(u))}), app("at", {f, quote(var(v))}));
  return wrap(universe_prefix(), iff(atom("Mod", {U, code, f}), rhs));
}

Recognizer atomic_rec(std::string label, const std::string& rel, std::size_t arg, Expr (*build)(const Expr&),
                      Expr example_code, bool derived, bool xy_vars_only = false, bool any_rel = false) {
  std::string want_rel, eu, ev;
  atomic_code(example_code, want_rel, eu, ev);
  Recognizer r;
  r.label = std::move(label);
  r.derived = derived;
  r.example = build(example_code);
  r.match = [rel, arg, build, xy_vars_only, any_rel, want_rel](const Expr& s) {
    Expr c = first_code(s, rel, arg);
    if (!c) return false;
    std::string r2, u, v;
    if (!atomic_code(c, r2, u, v) || (!any_rel && r2 != want_rel)) return false;
    if (xy_vars_only && (u != "x" || v != "y")) return false;
    Expr want = build(c);
    return want && alpha_eq(want, s);
  };
  return r;
}

// --- helpers on sentence shapes ---------------------------------------------------

std::optional<Expr> normal_code(const Expr& t) {
  if (!is_closed(t)) return std::nullopt;
  try {
    return coding_normalize(t);
  } catch (const CodingError&) {
    return std::nullopt;
  }
}

// Box of a closed code: returns the normalized code.
std::optional<Expr> boxed_code(const Expr& e) {
  Expr c;
  if (!match_trbox(e, c)) return std::nullopt;
  return normal_code(c);
}

const Language& lang_um() { return Language::uni_mod(); }

// Pr.X atom over a closed code; returns X and the normalized code.
bool pr_atom(const Expr& e, std::string& theory, Expr& code) {
  if (e->kind != Kind::Atom || e->name.rfind("Pr.", 0) != 0) return false;
  auto c = normal_code(e->kids[0]);
  if (!c || (*c)->kind != Kind::Quote) return false;
  theory = e->name.substr(3);
  code = *c;
  return true;
}

// --- arithmetic sentences ---------------------------------------------------------

bool arith_term(const Expr& t) {
  switch (t->kind) {
    case Kind::Var: return true;
    case Kind::Const: return t->name == "0";
    case Kind::App:
      if (t->name != "S" && t->name != "+" && t->name != "*") return false;
      for (auto& k : t->kids)
        if (!arith_term(k)) return false;
      return true;
    default: return false;
  }
}

bool arith_atom(const Expr& e) {
  if (e->kind != Kind::Atom) return false;
  if (e->name != "=" && e->name != "Lt" && e->name != "Nat") return false;
  for (auto& k : e->kids)
    if (!arith_term(k)) return false;
  return true;
}

// Quantifiers must be relativized to Nat: forall x (Nat x -> .), exists x (Nat x & .).
bool arith_formula(const Expr& e, bool allow_forall, bool allow_exists, bool qf_only) {
  switch (e->kind) {
    case Kind::Bot: case Kind::Top: return true;
    case Kind::Atom: return arith_atom(e);
    case Kind::Not:
      if (!qf_only && (allow_forall != allow_exists)) return false;
      return arith_formula(e->kids[0], allow_forall, allow_exists, qf_only);
    case Kind::And: case Kind::Or: case Kind::Imp: case Kind::Iff:
      if (!qf_only || e->kind == Kind::And || e->kind == Kind::Or)
        return arith_formula(e->kids[0], allow_forall, allow_exists, qf_only) &&
               arith_formula(e->kids[1], allow_forall, allow_exists, qf_only);
      return arith_formula(e->kids[0], allow_forall, allow_exists, qf_only) &&
             arith_formula(e->kids[1], allow_forall, allow_exists, qf_only);
    case Kind::All: {
      if (!allow_forall) return false;
      const Expr& b = e->kids[0];
      return b->kind == Kind::Imp && b->kids[0]->kind == Kind::Atom && b->kids[0]->name == "Nat" &&
             b->kids[0]->kids[0]->kind == Kind::Var && b->kids[0]->kids[0]->name == e->name &&
             arith_formula(b->kids[1], allow_forall, allow_exists, qf_only);
    }
    case Kind::Ex: {
      if (!allow_exists) return false;
      const Expr& b = e->kids[0];
      return b->kind == Kind::And && b->kids[0]->kind == Kind::Atom && b->kids[0]->name == "Nat" &&
             b->kids[0]->kids[0]->kind == Kind::Var && b->kids[0]->kids[0]->name == e->name &&
             arith_formula(b->kids[1], allow_forall, allow_exists, qf_only);
    }
    default: return false;
  }
}

bool quantifier_free(const Expr& e) {
  if (e->kind == Kind::All || e->kind == Kind::Ex) return false;
  if (is_term(e) || e->kind == Kind::Atom) return true;
  for (auto& k : e->kids)
    if (!quantifier_free(k)) return false;
  return true;
}

bool arithmetic_sentence(const Expr& s) { return is_sentence(s) && arith_formula(s, true, true, false); }

// Sigma_1: a block of Nat-bounded existentials over a quantifier-free matrix, or
// a provability atom (provability predicates are Sigma_1).
bool sigma1_sentence(const Expr& s) {
  if (!is_sentence(s)) return false;
  std::string th;
  Expr code;
  if (pr_atom(s, th, code)) return true;
  Expr cur = s;
  while (cur->kind == Kind::Ex) {
    const Expr& b = cur->kids[0];
    if (b->kind != Kind::And || b->kids[0]->kind != Kind::Atom || b->kids[0]->name != "Nat") return false;
    cur = b->kids[1];
  }
  return quantifier_free(cur) && arith_formula(cur, false, false, true);
}

// forall U (Uni U -> (mod2(U, quote s) <-> s)) or the assignment form
// forall U (Uni U -> forall f (VAU f U -> (Mod(U, quote s, f) <-> s))).
Expr absoluteness_mod2(const Expr& s) {
  return expand(all("U", imp(atom("Uni", {var("U")}), iff(mod2(var("U"), quote(s)), s))));
}
Expr absoluteness_f(const Expr& s) {
  return wrap(universe_prefix(), iff(atom("Mod", {var("U"), quote(s), var("f")}), s));
}

Recognizer absoluteness_rec(std::string label, bool (*cls)(const Expr&), Expr example) {
  return custom(
      std::move(label),
      [cls](const Expr& s) {
        Expr cur = s;
        while (cur->kind == Kind::All || cur->kind == Kind::Imp) cur = cur->kind == Kind::All ? cur->kids[0] : cur->kids[1];
        if (cur->kind != Kind::Iff) return false;
        const Expr& sigma = cur->kids[1];
        if (!cls(sigma)) return false;
        return alpha_eq(s, absoluteness_mod2(sigma)) || alpha_eq(s, absoluteness_f(sigma));
      },
      absoluteness_f(std::move(example)));
}

bool arith_atom_sentence(const Expr& s) { return is_sentence(s) && arith_atom(s); }

// Body of forall U (Uni U -> forall f (VAU f U -> body)), or nullptr.
Expr universe_body(const Expr& s) {
  if (s->kind != Kind::All || s->kids[0]->kind != Kind::Imp) return nullptr;
  const Expr& inner = s->kids[0]->kids[1];
  if (inner->kind != Kind::All || inner->kids[0]->kind != Kind::Imp) return nullptr;
  return inner->kids[0]->kids[1];
}

std::optional<Expr> decoded(const Expr& c) {
  try {
    Expr q = coding_normalize(c);
    if (q->kind == Kind::Quote && is_formula(q->kids[0])) return q->kids[0];
  } catch (const CodingError&) {
  }
  return std::nullopt;
}

// Instances of Arithmetic Compositionality for any bound variable x and formula phi.
bool arith_comp_instance_ok(const Expr& s) {
  Expr b = universe_body(s);
  if (!b || b->kind != Kind::Iff || b->kids[0]->kind != Kind::Atom || b->kids[0]->name != "Mod" ||
      b->kids[1]->kind != Kind::All)
    return false;
  auto code = decoded(b->kids[0]->kids[1]);
  if (!code) return false;
  const Expr& q = *code;
  if (q->kind != Kind::All || q->kids[0]->kind != Kind::Imp) return false;
  const Expr& phi = q->kids[0]->kids[1];
  if (!in_language(phi, Language::uni_mod())) return false;
  return alpha_eq(s, ax::arith_comp_instance(q->name, phi, b->kids[1]->name));
}

// Mod(U, quote a, env) <-> a[n/x] for arithmetic atoms a under numeral assignments.
bool arith_atom_env_ok(const Expr& s) {
  Expr b = universe_body(s);
  if (!b) return false;
  while (b->kind == Kind::All && b->kids[0]->kind == Kind::Imp) b = b->kids[0]->kids[1];
  if (b->kind != Kind::Iff || b->kids[0]->kind != Kind::Atom || b->kids[0]->name != "Mod") return false;
  auto code = decoded(b->kids[0]->kids[1]);
  if (!code || !arith_atom(*code)) return false;
  std::vector<std::string> xs, ns;
  Expr e = b->kids[0]->kids[2];
  while (e->kind == Kind::App && e->name == "put" && e->kids.size() == 3) {
    const Expr &c = e->kids[1], &v = e->kids[2];
    if (c->kind != Kind::Quote || c->kids[0]->kind != Kind::Var || v->kind != Kind::App || v->name != "numin" ||
        v->kids[0]->kind != Kind::Var)
      return false;
    xs.insert(xs.begin(), c->kids[0]->name);
    ns.insert(ns.begin(), v->kids[0]->name);
    e = e->kids[0];
  }
  for (auto& v : free_vars(*code))
    if (std::find(xs.begin(), xs.end(), v) == xs.end()) return false;
  return alpha_eq(s, ax::arith_atom_env(*code, xs, ns));
}

// --- ZF -----------------------------------------------------------------------

// Strips leading universal quantifiers.
Expr strip_alls(const Expr& e, std::vector<std::string>& vars) {
  Expr cur = e;
  while (cur->kind == Kind::All) {
    vars.push_back(cur->name);
    cur = cur->kids[0];
  }
  return cur;
}

// forall w.. forall a exists b forall x (x in b <-> (x in a & phi)), b not free in phi
bool match_sep(const Expr& s, const Language& lang) {
  if (!is_sentence(s)) return false;
  std::vector<std::string> vs;
  Expr cur = strip_alls(s, vs);
  if (vs.empty() || cur->kind != Kind::Ex) return false;
  const std::string a = vs.back(), b = cur->name;
  Expr body = cur->kids[0];
  if (body->kind != Kind::All) return false;
  const std::string x = body->name;
  const Expr& ifb = body->kids[0];
  if (ifb->kind != Kind::Iff) return false;
  if (!alpha_eq(ifb->kids[0], mem(var(x), var(b)))) return false;
  const Expr& rhs = ifb->kids[1];
  if (rhs->kind != Kind::And || !alpha_eq(rhs->kids[0], mem(var(x), var(a)))) return false;
  const Expr& phi = rhs->kids[1];
  if (free_vars(phi).count(b) || b == a || b == x || x == a) return false;
  return in_language(phi, lang);
}

// forall w.. forall a (forall x (x in a -> exu y phi) -> exists b forall x (x in a -> exists y (y in b & phi)))
bool match_rep(const Expr& s, const Language& lang) {
  if (!is_sentence(s)) return false;
  std::vector<std::string> vs;
  Expr cur = strip_alls(s, vs);
  if (vs.empty() || cur->kind != Kind::Imp) return false;
  const std::string a = vs.back();
  const Expr& rhs = cur->kids[1];
  if (rhs->kind != Kind::Ex) return false;
  const std::string b = rhs->name;
  const Expr& fa = rhs->kids[0];
  if (fa->kind != Kind::All || fa->kids[0]->kind != Kind::Imp) return false;
  const std::string x = fa->name;
  if (!alpha_eq(fa->kids[0]->kids[0], mem(var(x), var(a)))) return false;
  const Expr& ey = fa->kids[0]->kids[1];
  if (ey->kind != Kind::Ex || ey->kids[0]->kind != Kind::And) return false;
  const std::string y = ey->name;
  if (!alpha_eq(ey->kids[0]->kids[0], mem(var(y), var(b)))) return false;
  const Expr& phi = ey->kids[0]->kids[1];
  if (free_vars(phi).count(b) || b == a || b == x || b == y || x == y || a == x || a == y) return false;
  Expr want = expand(all(x, imp(mem(var(x), var(a)), exu(y, phi))));
  if (!alpha_eq(cur->kids[0], want)) return false;
  return in_language(phi, lang);
}

Expr sep_example(const std::string& tag) {
  (void)tag;
  return P("(all w (all a (ex b (all x (iff (in x b) (and (in x a) (in w x)))))))");
}

Expr rep_example() {
  return P("(all a (imp (all x (imp (in x a) (exu y (= y x)))) (ex b (all x (imp (in x a) (ex y (and (in y b) (= y x))))))))");
}

std::vector<Recognizer> zf_recognizers() {
  std::vector<Recognizer> r;
  r.push_back(exact("Extensionality", P("(all x (all y (imp (all z (iff (in z x) (in z y))) (= x y))))")));
  r.push_back(exact("Pairing", P("(all x (all y (ex z (all w (iff (in w z) (or (= w x) (= w y)))))))")));
  r.push_back(exact("Union", P("(all x (ex y (all z (iff (in z y) (ex w (and (in w x) (in z w)))))))")));
  r.push_back(exact("Powerset", P("(all x (ex y (all z (iff (in z y) (all w (imp (in w z) (in w x)))))))")));
  r.push_back(exact("Infinity", P("(ex x (and (ex y (and (in y x) (all z (not (in z y))))) (all y (imp (in y x) "
                                  "(ex z (and (in z x) (all w (iff (in w z) (or (in w y) (= w y))))))))))")));
  r.push_back(exact("Foundation", P("(all x (imp (ex y (in y x)) (ex y (and (in y x) (not (ex z (and (in z y) (in z x))))))))")));
  return r;
}

// --- family construction ----------------------------------------------------------

bool parse_bracket(const std::string& name, const std::string& head, std::string& arg) {
  if (name.size() < head.size() + 2 || name.compare(0, head.size() + 1, head + "[") != 0 || name.back() != ']')
    return false;
  arg = name.substr(head.size() + 1, name.size() - head.size() - 2);
  return !arg.empty();
}

bool parse_stage(const std::string& name, const std::string& head, unsigned& n) {
  if (name.size() <= head.size() || name.compare(0, head.size(), head) != 0) return false;
  std::string rest = name.substr(head.size());
  if (rest.size() > 4 || !std::all_of(rest.begin(), rest.end(), [](char c) { return std::isdigit(static_cast<unsigned char>(c)); }))
    return false;
  n = static_cast<unsigned>(std::stoul(rest));
  return true;
}

std::optional<unsigned> refl_stage(const std::string& theory) {
  if (theory == "ZF") return 0u;
  unsigned n;
  if (parse_stage(theory, "R", n) && n > 0) return n;
  return std::nullopt;
}

Recognizer refl_gen_rec() {
  Recognizer r = custom(
      "ReflGen",
      [](const Expr& s) {
        if (s->kind != Kind::Imp || s->kids[0]->kind != Kind::All) return false;
        const Expr& b = s->kids[0]->kids[0];
        if (b->kind != Kind::Imp || b->kids[0]->kind != Kind::Atom || b->kids[0]->name.rfind("Ax.", 0) != 0) return false;
        auto k = refl_stage(b->kids[0]->name.substr(3));
        return k && alpha_eq(s, ax::refl_step(*k));
      },
      ax::refl_step(0), true);
  r.flagged = true;
  return r;
}

AxiomFamily make_family(const std::string& name) {
  AxiomFamily fam;
  fam.name = name;
  std::string arg;
  unsigned n = 0;

  if (name == "ZF") {
    fam.lang = "L";
    fam.recognizers = zf_recognizers();
    fam.recognizers.push_back(custom("Sep(L)", [](const Expr& s) { return match_sep(s, Language::base()); }, sep_example("L")));
    fam.recognizers.push_back(custom("Rep(L)", [](const Expr& s) { return match_rep(s, Language::base()); }, rep_example()));
    return fam;
  }
  if (parse_bracket(name, "Sep", arg) || parse_bracket(name, "Rep", arg)) {
    const Language* lang = Language::by_tag(arg);
    if (!lang) throw RegistryError("unknown language tag in family " + name);
    fam.lang = arg;
    bool sep = name[0] == 'S';
    std::string label = (sep ? "Sep(" : "Rep(") + arg + ")";
    if (sep)
      fam.recognizers.push_back(custom(label, [lang](const Expr& s) { return match_sep(s, *lang); }, sep_example(arg)));
    else
      fam.recognizers.push_back(custom(label, [lang](const Expr& s) { return match_rep(s, *lang); }, rep_example()));
    return fam;
  }
  if (name == "HB") {
    fam.lang = "L";
    fam.recognizers.push_back(custom(
        "HB_D2",
        [](const Expr& s) {
          if (s->kind != Kind::Imp || s->kids[1]->kind != Kind::Imp) return false;
          std::string t1, t2, t3;
          Expr c1, c2, c3;
          if (!pr_atom(s->kids[0], t1, c1) || !pr_atom(s->kids[1]->kids[0], t2, c2) ||
              !pr_atom(s->kids[1]->kids[1], t3, c3))
            return false;
          if (t1 != t2 || t2 != t3) return false;
          if (!is_formula(c2->kids[0]) || !is_formula(c3->kids[0])) return false;
          return alpha_eq(c1->kids[0], imp(c2->kids[0], c3->kids[0]));
        },
        P("(imp (Pr.ZF (quote (imp (= 0 0) (= 0 0)))) (imp (Pr.ZF (quote (= 0 0))) (Pr.ZF (quote (= 0 0)))))")));
    fam.recognizers.push_back(custom(
        "HB_D3",
        [](const Expr& s) {
          if (s->kind != Kind::Imp) return false;
          std::string t1, t2;
          Expr c1, c2;
          if (!pr_atom(s->kids[0], t1, c1) || !pr_atom(s->kids[1], t2, c2) || t1 != t2) return false;
          return alpha_eq(c2->kids[0], atom("Pr." + t1, {c1}));
        },
        P("(imp (Pr.ZF (quote (= 0 0))) (Pr.ZF (quote (Pr.ZF (quote (= 0 0))))))")));
    return fam;
  }
  if (name == "CTcomp") {
    fam.lang = "L_Sat+";
    Expr eq_code = quote(parse_formula("(= x y)"));
    Expr in_code = quote(parse_formula("(in x y)"));
    fam.recognizers.push_back(atomic_rec("CT_eq", "Sat", 0, ct_atomic_displayed, eq_code, false));
    fam.recognizers.push_back(atomic_rec("CT_in", "Sat", 0, ct_atomic_displayed, in_code, false));
    fam.recognizers.push_back(atomic_rec("CT_atomic", "Sat", 0, ct_atomic_general, in_code, true, false, true));
    for (auto& sc : ct_schemas()) {
      fam.recognizers.push_back(exact(sc.label, P(sc.universal), sc.derived));
      fam.recognizers.push_back(from_tmpl(sc.label, tmpl(sc.instance, sc.slots), true));
    }
    return fam;
  }
  if (name == "CMcomp") {
    fam.lang = "L_UM";
    Expr eq_code = quote(parse_formula("(= x y)"));
    fam.recognizers.push_back(atomic_rec("CM_eq", "Mod", 1, cm_atomic, eq_code, false, true));
    fam.recognizers.push_back(atomic_rec("CM_eq", "Mod", 1, cm_atomic, quote(parse_formula("(= y x)")), true));
    for (auto& sc : cm_schemas()) {
      fam.recognizers.push_back(exact(sc.label, P(sc.universal), sc.derived));
      fam.recognizers.push_back(from_tmpl(sc.label, tmpl(sc.instance, sc.slots), true));
    }
    fam.recognizers.push_back(exact("CM_bot", wrap(universe_prefix(), iff(atom("Mod", {var("U"), quote(bot()), var("f")}), bot())), true));
    fam.recognizers.push_back(exact("CM_top", wrap(universe_prefix(), iff(atom("Mod", {var("U"), quote(top()), var("f")}), top())), true));
    const std::vector<std::string> box = {"CMbox_imp", "CMbox_iff", "CMbox_and", "CMdia"};
    for (auto& l : box) {
      bool binary = l != "CMdia";
      Tmpl t = tmpl(l == "CMbox_imp"   ? "(imp (trbox (dimp p q)) (imp (trbox p) (trbox q)))"
                    : l == "CMbox_iff" ? "(imp (trbox (diff p q)) (iff (trbox p) (trbox q)))"
                    : l == "CMbox_and" ? "(iff (trbox (dand p q)) (and (trbox p) (trbox q)))"
                                       : "(iff (trdia p) (ex U (and (Uni U) (mod2 U p))))",
                    binary ? std::vector<Slot>{{"p", 's', "L_UM"}, {"q", 's', "L_UM"}} : std::vector<Slot>{{"p", 's', "L_UM"}});
      fam.recognizers.push_back(from_tmpl(l, t, true));
      std::string uni = binary ? "(all p (imp (Sent.L_UM p) (all q (imp (Sent.L_UM q) " : "(all p (imp (Sent.L_UM p) ";
      std::string body = l == "CMbox_imp"   ? "(imp (trbox (dimp p q)) (imp (trbox p) (trbox q)))"
                         : l == "CMbox_iff" ? "(imp (trbox (diff p q)) (iff (trbox p) (trbox q)))"
                         : l == "CMbox_and" ? "(iff (trbox (dand p q)) (and (trbox p) (trbox q)))"
                                            : "(iff (trdia p) (ex U (and (Uni U) (mod2 U p))))";
      std::string text = uni + body + (binary ? "))))" : "))");
      fam.recognizers.push_back(exact(l, P(text.c_str()), true));
    }
    fam.recognizers.push_back(custom(
        "SoundBox",
        [](const Expr& s) {
          if (s->kind != Kind::Imp || s->kids[0]->kind != Kind::All) return false;
          const Expr& b = s->kids[0]->kids[0];
          if (b->kind != Kind::Imp || b->kids[0]->kind != Kind::Atom || b->kids[0]->name.rfind("Ax.", 0) != 0) return false;
          return alpha_eq(s, ax::sound_box(b->kids[0]->name.substr(3)));
        },
        ax::sound_box("ZF"), true));
    return fam;
  }
  if (name == "Multiverse_ZF") {
    fam.lang = "L_UM";
    fam.recognizers.push_back(exact("Multiverse_ZF", ax::multiverse_zf()));
    fam.recognizers.push_back(exact("Multiverse_ZF", P("(all U (imp (Uni U) (all p (imp (Ax.ZF_UM p) (mod2 U p)))))")));
    return fam;
  }
  if (name == "NonTriviality") {
    fam.lang = "L_UM";
    fam.recognizers.push_back(custom(
        "NonTriviality",
        [](const Expr& s) { return s->kind == Kind::Ex && alpha_eq(s, ax::non_triviality()); }, ax::non_triviality()));
    fam.recognizers.push_back(exact("CMbox_bot", iff(ax::box(quote(bot())), bot()), true));
    fam.recognizers.push_back(from_tmpl("CMbox_not", tmpl("(imp (trbox (dneg p)) (not (trbox p)))", {{"p", 's', "L_UM"}}), true));
    fam.recognizers.push_back(from_tmpl("D_CM", tmpl("(imp (trbox p) (trdia p))", {{"p", 's', "L_UM"}}), true));
    return fam;
  }
  if (name == "T_CM" || name == "4_CM" || name == "D_CM" || name == "Lob_CM" || name == "K_CM") {
    fam.lang = "L_UM";
    std::string label = name;
    if (name == "K_CM") {
      fam.recognizers.push_back(
          from_tmpl(label, tmpl("(imp (trbox (dimp p q)) (imp (trbox p) (trbox q)))", {{"p", 's', "L_UM"}, {"q", 's', "L_UM"}}), false));
      return fam;
    }
    if (name == "D_CM") {
      fam.recognizers.push_back(from_tmpl(label, tmpl("(imp (trbox p) (trdia p))", {{"p", 's', "L_UM"}}), false));
      return fam;
    }
    fam.recognizers.push_back(custom(
        label,
        [label](const Expr& s) {
          if (s->kind != Kind::Imp) return false;
          Expr sigma;
          if (label == "T_CM") {
            sigma = s->kids[1];
          } else if (label == "4_CM") {
            auto c = boxed_code(s->kids[0]);
            if (!c || (*c)->kind != Kind::Quote) return false;
            sigma = (*c)->kids[0];
          } else {
            auto c = boxed_code(s->kids[1]);
            if (!c || (*c)->kind != Kind::Quote) return false;
            sigma = (*c)->kids[0];
          }
          if (!is_formula(sigma) || !is_sentence(sigma) || !in_language(sigma, lang_um())) return false;
          return alpha_eq(normalize_formula(s), normalize_formula(ax::modal_axiom(label, sigma)));
        },
        ax::modal_axiom(label, parse_formula("(= 0 0)"))));
    return fam;
  }
  if (name == "MR") {
    fam.lang = "L_UM";
    fam.recognizers.push_back(custom(
        "MultiverseReflection",
        [](const Expr& s) {
          if (s->kind != Kind::Imp) return false;
          const Expr& sigma = s->kids[1];
          if (!is_formula(sigma) || !is_sentence(sigma) || !in_language(sigma, Language::base())) return false;
          return alpha_eq(normalize_formula(s), normalize_formula(ax::multiverse_reflection(sigma)));
        },
        ax::multiverse_reflection(parse_formula("(= 0 0)"))));
    fam.recognizers.push_back(refl_gen_rec());
    return fam;
  }
  if (name == "SelfPerception") {
    fam.lang = "L_UM+";
    fam.recognizers.push_back(exact("Iso_self", P("(Iso self)")));
    fam.recognizers.push_back(exact("Uni_self", P("(Uni self)")));
    return fam;
  }
  if (name == "Comp") {
    fam.lang = "L_UM+";
    Expr psi = P("(and (all p (imp (Fml.L_UM+ p) (imp (or (Ax.CMminus p) (= p x)) (trbox p)))) "
                 "(all p (imp (Fml.L_UM+ p) (imp (trbox p) (Pr.Comp_CM p)))))");
    Diagonal d = diagonalize(psi);
    Expr unfolded = substitute(psi, d.var, quote(d.lambda));
    fam.recognizers.push_back(exact("Comp_CM", d.lambda));
    fam.recognizers.push_back(exact("Multiverse_Comp", unfolded->kids[0], true));
    fam.recognizers.push_back(exact("Completeness_Comp", unfolded->kids[1], true));
    return fam;
  }
  if (parse_bracket(name, "Con", arg)) {
    fam.lang = "L";
    fam.recognizers.push_back(exact("Con_" + arg, ax::con(arg)));
    return fam;
  }
  if (parse_bracket(name, "R", arg)) {
    fam.lang = "L";
    ProvabilitySymbol sym = ProvabilitySymbol::of(arg);
    fam.recognizers.push_back(custom(
        "R_" + arg,
        [sym](const Expr& s) {
          if (s->kind != Kind::Imp) return false;
          const Expr& phi = s->kids[1];
          if (!is_formula(phi) || !is_sentence(phi) || !in_language(phi, Language::base())) return false;
          return alpha_eq(normalize_formula(s), normalize_formula(reflection_instance(sym, phi)));
        },
        reflection_instance(sym, parse_formula("(= 0 0)"))));
    return fam;
  }
  if (parse_bracket(name, "GR", arg)) {
    fam.lang = "L_Sat+";
    fam.recognizers.push_back(exact("GR_" + arg, global_reflection_axiom(ProvabilitySymbol::of(arg))));
    return fam;
  }
  if (parse_bracket(name, "SP", arg)) {
    if (!parse_stage("n" + arg, "n", n)) throw RegistryError("bad family " + name);
    fam.lang = "full";
    fam.recognizers.push_back(exact("Crsm_self", P("(Crsm self)")));
    fam.recognizers.push_back(exact("Iso_self", P("(Iso self)")));
    fam.recognizers.push_back(exact("Models_TrSP", atom("ModelsSelf", {cnst("self"), numeral(n)})));
    return fam;
  }
  if (name == "WM") {
    fam.lang = "L_UM";
    auto wm = [](const char* code) {
      std::string t = std::string("(all U (imp (Uni U) (ex V (and (Uni V) (ex u (and (Elem u V) (and (Ext u V U) "
                                  "(all f (imp (VAU f V) (Mod V (quote ") +
                      code + ") (put f (quote x) u)))))))))))";
      return P(t.c_str());
    };
    fam.recognizers.push_back(exact("WM_weak", wm("(NonStd x)")));
    fam.recognizers.push_back(exact("WM_strong", wm("(and (NonStd x) (Models.ZFC x emp))")));
    fam.recognizers.push_back(exact("WM", wm("(and (NonStd x) (Uni x))")));
    return fam;
  }
  if (name == "Sigma1Abs") {
    fam.lang = "L_UM";
    fam.recognizers.push_back(absoluteness_rec("Sigma1Abs", sigma1_sentence, parse_formula("(ex n (and (Nat n) (= n 0)))")));
    fam.recognizers.push_back(refl_gen_rec());
    return fam;
  }
  if (name == "ArithAbs") {
    fam.lang = "L_UM";
    fam.recognizers.push_back(absoluteness_rec("ArithAbs", arithmetic_sentence, parse_formula("(all n (imp (Nat n) (= n n)))")));
    return fam;
  }
  if (name == "ArithComp") {
    fam.lang = "L_UM";
    fam.recognizers.push_back(exact(
        "ArithComp",
        P("(all U (imp (Uni U) (all p (imp (Fml.L_UM p) (all f (imp (VAU f U) (iff (Mod U (dall (quote x) (dimp (quote (Nat x)) p)) f) "
          "(all n (imp (Nat n) (Mod U p (put f (quote x) (numin n U))))))))))))")));
    fam.recognizers.push_back(absoluteness_rec("ArithAtom", arith_atom_sentence, parse_formula("(= (S 0) (S 0))")));
    fam.recognizers.back().derived = true;
    fam.recognizers.push_back(custom("ArithComp", arith_comp_instance_ok,
                                     ax::arith_comp_instance("y", parse_formula("(= y y)"), "n"), true));
    fam.recognizers.push_back(custom("ArithAtomEnv", arith_atom_env_ok,
                                     ax::arith_atom_env(parse_formula("(= (S x) y)"), {"x", "y"}, {"n", "m"}), true));
    return fam;
  }
  throw RegistryError("unknown axiom family " + name);
}

}  // namespace

bool is_arithmetic_sentence(const Expr& s) { return arithmetic_sentence(s); }
bool is_sigma1_sentence(const Expr& s) { return sigma1_sentence(s); }

FamilyPtr axiom_family(const std::string& name) {
  static std::mutex mu;
  static std::map<std::string, FamilyPtr> cache;
  {
    std::lock_guard<std::mutex> lock(mu);
    auto it = cache.find(name);
    if (it != cache.end()) return it->second;
  }
  auto fam = std::make_shared<const AxiomFamily>(make_family(name));
  std::lock_guard<std::mutex> lock(mu);
  return cache.emplace(name, fam).first->second;
}

// --- descriptors -------------------------------------------------------------------

bool TheoryDescriptor::has_family(const std::string& fam) const {
  for (auto& f : families)
    if (f->name == fam) return true;
  return false;
}

std::set<std::string> TheoryDescriptor::family_names() const {
  std::set<std::string> out;
  for (auto& f : families) out.insert(f->name);
  return out;
}

namespace {

void check_language(const TheoryDescriptor& t, const Expr& sigma) {
  if (!is_formula(sigma)) throw LanguageError("not a formula");
  if (!is_sentence(sigma)) throw LanguageError("not a sentence: free variables present");
  std::string bad;
  if (!in_language(sigma, t.language, &bad))
    throw LanguageError("symbol '" + bad + "' is not in the language of " + t.name);
}

}  // namespace

std::optional<AxiomMatch> is_axiom(const TheoryDescriptor& t, const Expr& sigma) {
  check_language(t, sigma);
  for (auto& fam : t.families)
    for (auto& r : fam->recognizers)
      if (r.match(sigma)) return AxiomMatch{fam->name, r.label, r.derived, r.flagged};
  return std::nullopt;
}

std::optional<AxiomMatch> is_axiom_as(const TheoryDescriptor& t, const Expr& sigma, const std::string& family,
                                      const std::string& label) {
  check_language(t, sigma);
  for (auto& fam : t.families) {
    if (fam->name != family) continue;
    for (auto& r : fam->recognizers)
      if (r.label == label && r.match(sigma)) return AxiomMatch{fam->name, r.label, r.derived, r.flagged};
  }
  return std::nullopt;
}

bool is_primitive_axiom(const TheoryDescriptor& t, const Expr& sigma) {
  if (!is_formula(sigma) || !is_sentence(sigma) || !in_language(sigma, t.language)) return false;
  for (auto& fam : t.families)
    for (auto& r : fam->recognizers)
      if (!r.derived && r.match(sigma)) return true;
  return false;
}

ProvabilitySymbol ProvabilitySymbol::of(const std::string& theory) {
  ProvabilitySymbol s;
  s.theory_ref = theory;
  s.symbol = "Pr." + theory;
  s.con_sentence = neg(atom(s.symbol, {quote(bot())}));
  return s;
}

Expr reflection_instance(const ProvabilitySymbol& sym, const Expr& phi) { return imp(sym.pr(quote(phi)), phi); }

Expr global_reflection_axiom(const ProvabilitySymbol& sym, const Language& target) {
  if (!target.has("Sat")) throw LanguageError("global reflection needs a language with Sat");
  Expr p = var("p");
  return expand(all("p", imp(atom("Fml.L_Sat+", {p}), imp(sym.pr(p), tr(p)))));
}

// --- registry -------------------------------------------------------------------------

const char* standard_manifest_text() {
  return R"(# theory <name> lang=<tag> parents=<a,b> families=<f,g> rules=<r,s>
theory ZF lang=L families=ZF,HB rules=MP,Gen,PrIntro
theory ZF_UM lang=L_UM parents=ZF families=Sep[L_UM],Rep[L_UM]
theory CTrestr lang=L_Sat+ parents=ZF families=CTcomp
theory CT parents=CTrestr families=Sep[L_Sat],Rep[L_Sat]
theory GR0 parents=CTrestr families=Sep[L_Sat+]
theory FSrestr parents=CTrestr rules=NEC_Tr,CONEC_Tr
theory FS parents=CT rules=NEC_Tr,CONEC_Tr
theory CMminus lang=L_UM parents=ZF_UM families=CMcomp
theory CM parents=CMminus families=Multiverse_ZF
theory MSminus parents=CMminus rules=NEC,CONEC
theory MS parents=CM rules=NEC,CONEC
theory Comp_CM lang=L_UM+ parents=CMminus families=Comp
theory GL_CM parents=Comp_CM
theory CM+NonTriviality parents=CM families=NonTriviality
theory Hamkins parents=CM families=WM
)";
}

Registry Registry::parse(std::string_view manifest) {
  Registry r;
  std::istringstream in{std::string(manifest)};
  std::string line;
  int lineno = 0;
  auto split = [](const std::string& s) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : s) {
      if (c == ',') {
        if (!cur.empty()) out.push_back(cur);
        cur.clear();
      } else {
        cur += c;
      }
    }
    if (!cur.empty()) out.push_back(cur);
    return out;
  };
  while (std::getline(in, line)) {
    ++lineno;
    auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    std::istringstream ls(line);
    std::string word, name;
    if (!(ls >> word)) continue;
    if (word != "theory" || !(ls >> name)) throw RegistryError("manifest line " + std::to_string(lineno) + ": expected 'theory <name>'");
    Entry e;
    while (ls >> word) {
      auto eqp = word.find('=');
      if (eqp == std::string::npos) throw RegistryError("manifest line " + std::to_string(lineno) + ": bad field " + word);
      std::string k = word.substr(0, eqp), v = word.substr(eqp + 1);
      if (k == "lang") e.lang = v;
      else if (k == "parents") e.parents = split(v);
      else if (k == "families") e.families = split(v);
      else if (k == "rules") e.rules = split(v);
      else throw RegistryError("manifest line " + std::to_string(lineno) + ": unknown field " + k);
    }
    if (!e.lang.empty() && !Language::by_tag(e.lang)) throw RegistryError("unknown language tag " + e.lang);
    for (auto& p : e.parents)
      if (!r.entries_.count(p)) throw RegistryError("theory " + name + " names unknown parent " + p);
    for (auto& f : e.families) axiom_family(f);
    if (r.entries_.count(name)) throw RegistryError("duplicate theory " + name);
    r.entries_[name] = e;
    r.order_.push_back(name);
  }
  return r;
}

const Registry& Registry::standard() {
  static const Registry r = parse(standard_manifest_text());
  return r;
}

Registry Registry::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw RegistryError("cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse(ss.str());
}

std::string con_name(unsigned n) { return n == 0 ? "ZF" : "Con" + std::to_string(n); }
std::string refl_name(unsigned n) { return n == 0 ? "ZF" : "R" + std::to_string(n); }

namespace {

const std::set<std::string>& rule_names() {
  static const std::set<std::string> r = {"MP", "Gen", "NEC", "CONEC", "NEC_Tr", "CONEC_Tr", "ReflectionRule", "PrIntro"};
  return r;
}

void add_family(TheoryDescriptor& t, const std::string& name) {
  if (t.has_family(name)) return;
  FamilyPtr f = axiom_family(name);
  t.families.push_back(f);
  t.language = t.language.join(*Language::by_tag(f->lang), t.language.tag());
}

void merge(TheoryDescriptor& into, const TheoryDescriptor& other) {
  for (auto& f : other.families) add_family(into, f->name);
  into.rules.insert(other.rules.begin(), other.rules.end());
  into.language = into.language.join(other.language, into.language.tag());
}

TheoryDescriptor extend(TheoryDescriptor base, const std::string& name, const std::string& family) {
  std::string parent = base.name;
  base.name = name;
  base.parents = {parent};
  add_family(base, family);
  return base;
}

}  // namespace

TheoryDescriptor Registry::resolve(const std::string& name, int depth) const {
  if (depth > 64) throw RegistryError("theory nesting too deep at " + name);
  auto it = entries_.find(name);
  if (it != entries_.end()) {
    const Entry& e = it->second;
    TheoryDescriptor t;
    t.name = name;
    t.parents = e.parents;
    std::string lang = e.lang;
    for (auto& p : e.parents) {
      TheoryDescriptor pt = resolve(p, depth + 1);
      if (lang.empty()) lang = pt.base_language;
      merge(t, pt);
    }
    if (lang.empty()) lang = "L";
    t.base_language = lang;
    t.language = t.language.join(*Language::by_tag(lang), lang);
    for (auto& f : e.families) add_family(t, f);
    t.rules.insert(e.rules.begin(), e.rules.end());
    return t;
  }
  if (name.find('+') != std::string::npos && name.front() != '+' && name.back() != '+') {
    std::vector<std::string> parts;
    std::string cur;
    for (char c : name) {
      if (c == '+') {
        parts.push_back(cur);
        cur.clear();
      } else {
        cur += c;
      }
    }
    parts.push_back(cur);
    // Longest registered prefix first, so names containing '+' still resolve.
    std::size_t used = 0;
    TheoryDescriptor t;
    for (std::size_t k = parts.size(); k >= 1; --k) {
      std::string head = parts[0];
      for (std::size_t i = 1; i < k; ++i) head += "+" + parts[i];
      if (entries_.count(head) || k == 1) {
        t = resolve(head, depth + 1);
        used = k;
        break;
      }
    }
    std::vector<std::string> parents = {t.name};
    for (std::size_t i = used; i < parts.size(); ++i) {
      const std::string& p = parts[i];
      if (p.empty()) throw RegistryError("empty component in " + name);
      if (rule_names().count(p)) {
        t.rules.insert(p);
      } else if (known(p)) {
        merge(t, resolve(p, depth + 1));
        parents.push_back(p);
      } else {
        try {
          add_family(t, p);
        } catch (const RegistryError&) {
          throw RegistryError("unknown theory component '" + p + "' in " + name);
        }
      }
    }
    t.name = name;
    t.parents = parents;
    return t;
  }
  unsigned n;
  if (parse_stage(name, "Con", n)) {
    if (n == 0) return resolve("ZF", depth + 1);
    return extend(resolve(con_name(n - 1), depth + 1), name, "Con[" + con_name(n - 1) + "]");
  }
  if (parse_stage(name, "R", n)) {
    if (n == 0) return resolve("ZF", depth + 1);
    return extend(resolve(refl_name(n - 1), depth + 1), name, "R[" + refl_name(n - 1) + "]");
  }
  if (parse_stage(name, "GR", n) && n > 0) {
    std::string prev = "GR" + std::to_string(n - 1);
    return extend(resolve(prev, depth + 1), name, "GR[" + prev + "]");
  }
  if (parse_stage(name, "SP", n)) {
    if (n == 0) {
      TheoryDescriptor t = resolve("GR0", depth + 1);
      t.name = "SP0";
      t.parents = {"GR0"};
      return t;
    }
    TheoryDescriptor t = resolve("GR" + std::to_string(n), depth + 1);
    t = extend(t, name, "SP[" + std::to_string(n - 1) + "]");
    return t;
  }
  throw RegistryError("unknown theory " + name);
}

TheoryDescriptor Registry::get(const std::string& name) const { return resolve(name, 0); }

bool Registry::known(const std::string& name) const {
  try {
    resolve(name, 0);
    return true;
  } catch (const RegistryError&) {
    return false;
  }
}

std::vector<std::string> Registry::names() const { return order_; }

bool Registry::subtheory(const std::string& a, const std::string& b) const {
  TheoryDescriptor ta = get(a), tb = get(b);
  auto fb = tb.family_names();
  for (auto& f : ta.family_names())
    if (!fb.count(f)) return false;
  for (auto& r : ta.rules)
    if (!tb.rules.count(r)) return false;
  return true;
}

std::vector<CoverageRow> Registry::coverage() const {
  return {
      {"ZF axioms", "ZF", "Extensionality", "ZF"},
      {"Separation over L", "ZF", "Sep(L)", "ZF"},
      {"Replacement over L", "ZF", "Rep(L)", "ZF"},
      {"ZF_{Uni,Mod}", "Sep[L_UM]", "Sep(L_UM)", "ZF_UM"},
      {"ZF_{Uni,Mod} replacement", "Rep[L_UM]", "Rep(L_UM)", "ZF_UM"},
      {"System CT: CT_=", "CTcomp", "CT_eq", "CTrestr"},
      {"System CT: CT_in", "CTcomp", "CT_in", "CTrestr"},
      {"System CT: CT_not", "CTcomp", "CT_not", "CTrestr"},
      {"System CT: CT_and", "CTcomp", "CT_and", "CTrestr"},
      {"System CT: CT_all", "CTcomp", "CT_all", "CTrestr"},
      {"System CT: Sep(L_Sat)", "Sep[L_Sat]", "Sep(L_Sat)", "CT"},
      {"System CT: Rep(L_Sat)", "Rep[L_Sat]", "Rep(L_Sat)", "CT"},
      {"System GR: GR0 separation", "Sep[L_Sat+]", "Sep(L_Sat+)", "GR0"},
      {"System GR: GR_{GR0}", "GR[GR0]", "GR_GR0", "GR1"},
      {"System FS: NEC/CONEC for Tr", "CTcomp", "CT_not", "FSrestr"},
      {"System CM: CM_=", "CMcomp", "CM_eq", "CMminus"},
      {"System CM: CM_not", "CMcomp", "CM_not", "CMminus"},
      {"System CM: CM_and", "CMcomp", "CM_and", "CMminus"},
      {"System CM: CM_all", "CMcomp", "CM_all", "CMminus"},
      {"System CM: Multiverse_ZF", "Multiverse_ZF", "Multiverse_ZF", "CM"},
      {"System MS", "Multiverse_ZF", "Multiverse_ZF", "MS"},
      {"Prop CM box comp: CMbox_imp", "CMcomp", "CMbox_imp", "CMminus"},
      {"Prop CM box comp: CMbox_iff", "CMcomp", "CMbox_iff", "CMminus"},
      {"Prop CM box comp: CMbox_and", "CMcomp", "CMbox_and", "CMminus"},
      {"Prop CM box comp: CMdia", "CMcomp", "CMdia", "CMminus"},
      {"Prop CM + Non-triv box comp: CMbox_bot", "NonTriviality", "CMbox_bot", "CM+NonTriviality"},
      {"Prop CM + Non-triv box comp: CMbox_not", "NonTriviality", "CMbox_not", "CM+NonTriviality"},
      {"Prop CM + Non-triv box comp: D_CM", "NonTriviality", "D_CM", "CM+NonTriviality"},
      {"Soundness Lemma (boxed form)", "CMcomp", "SoundBox", "CMminus"},
      {"Non-Triviality", "NonTriviality", "NonTriviality", "CMminus+NonTriviality"},
      {"Multiverse Reflection", "MR", "MultiverseReflection", "CM+MR"},
      {"Self-Perception", "SelfPerception", "Iso_self", "CM+SelfPerception"},
      {"K_CM", "K_CM", "K_CM", "CMminus+K_CM"},
      {"D_CM", "D_CM", "D_CM", "CMminus+D_CM"},
      {"T_CM", "T_CM", "T_CM", "CMminus+T_CM"},
      {"4_CM", "4_CM", "4_CM", "CMminus+4_CM"},
      {"Lob_CM", "Lob_CM", "Lob_CM", "CMminus+Lob_CM"},
      {"Comp_CM", "Comp", "Comp_CM", "Comp_CM"},
      {"Multiverse_S", "Comp", "Multiverse_Comp", "Comp_CM"},
      {"Completeness_S", "Comp", "Completeness_Comp", "Comp_CM"},
      {"System Reflection: Con_{ZF}", "Con[ZF]", "Con_ZF", "Con1"},
      {"System Reflection: Con_{Con1}", "Con[Con1]", "Con_Con1", "Con2"},
      {"System Reflection: R_{ZF}", "R[ZF]", "R_ZF", "R1"},
      {"System Reflection: R_{R1}", "R[R1]", "R_R1", "R2"},
      {"System SR: self in crsm", "SP[0]", "Crsm_self", "SP1"},
      {"System SR: Iso(self)", "SP[0]", "Iso_self", "SP1"},
      {"System SR: self models Tr + SP0", "SP[0]", "Models_TrSP", "SP1"},
      {"Hilbert-Bernays D2", "HB", "HB_D2", "ZF"},
      {"Hilbert-Bernays D3", "HB", "HB_D3", "ZF"},
      {"Sigma1-PA absoluteness", "Sigma1Abs", "Sigma1Abs", "CM+Sigma1Abs"},
      {"Arithmetic absoluteness", "ArithAbs", "ArithAbs", "CM+ArithAbs"},
      {"Arithmetic compositionality", "ArithComp", "ArithComp", "CMminus+ArithComp"},
      {"WM_weak", "WM", "WM_weak", "Hamkins"},
      {"WM_strong", "WM", "WM_strong", "Hamkins"},
      {"WM", "WM", "WM", "Hamkins"},
  };
}

TheoryDescriptor build_con_hierarchy(unsigned n) { return Registry::standard().get(n == 0 ? "ZF" : con_name(n)); }
TheoryDescriptor build_r_hierarchy(unsigned n) { return Registry::standard().get(n == 0 ? "ZF" : refl_name(n)); }
TheoryDescriptor build_gr_hierarchy(unsigned n) { return Registry::standard().get("GR" + std::to_string(n)); }
TheoryDescriptor build_sp_hierarchy(unsigned n) { return Registry::standard().get("SP" + std::to_string(n)); }

// --- shared shapes --------------------------------------------------------------------

namespace ax {

Expr box(const Expr& code) { return expand(trbox(code)); }
Expr dia(const Expr& code) { return expand(trdia(code)); }
Expr truth(const Expr& code) { return expand(tr(code)); }

Expr box_set(const std::string& theory) {
  Expr p = var("p");
  return all("p", imp(atom("Ax." + theory, {p}), box(p)));
}

Expr sound_box(const std::string& theory) {
  Expr q = var("q");
  return imp(box_set(theory), all("q", imp(atom("Pr." + theory, {q}), box(q))));
}

Expr con(const std::string& theory) { return ProvabilitySymbol::of(theory).con_sentence; }

Expr non_triviality() { return ex("U", atom("Uni", {var("U")})); }

Expr multiverse_zf() { return box_set("ZF_UM"); }

Expr cm_instance(const std::string& label, const std::vector<Expr>& codes) {
  if (label == "CM_bot") return wrap(universe_prefix(), iff(atom("Mod", {var("U"), quote(bot()), var("f")}), bot()));
  if (label == "CM_top") return wrap(universe_prefix(), iff(atom("Mod", {var("U"), quote(top()), var("f")}), top()));
  static const auto schemas = cm_schemas();
  const CompSchema* s = find_schema(schemas, label);
  if (!s) throw std::invalid_argument("unknown CM schema " + label);
  return tmpl_instance(tmpl(s->instance, s->slots), codes);
}

Expr ct_instance(const std::string& label, const std::vector<Expr>& codes) {
  static const auto schemas = ct_schemas();
  const CompSchema* s = find_schema(schemas, label);
  if (!s) throw std::invalid_argument("unknown CT schema " + label);
  return tmpl_instance(tmpl(s->instance, s->slots), codes);
}

Expr box_lemma(const std::string& label, const std::vector<Expr>& s) {
  auto need = [&](std::size_t n) {
    if (s.size() != n) throw std::invalid_argument(label + " takes " + std::to_string(n) + " sentences");
  };
  if (label == "CMbox_imp") { need(2); return imp(box(quote(imp(s[0], s[1]))), imp(box(quote(s[0])), box(quote(s[1])))); }
  if (label == "CMbox_iff") { need(2); return imp(box(quote(iff(s[0], s[1]))), iff(box(quote(s[0])), box(quote(s[1])))); }
  if (label == "CMbox_and") { need(2); return iff(box(quote(conj(s[0], s[1]))), conj(box(quote(s[0])), box(quote(s[1])))); }
  if (label == "CMbox_not") { need(1); return imp(box(quote(neg(s[0]))), neg(box(quote(s[0])))); }
  if (label == "CMbox_bot") { need(0); return iff(box(quote(bot())), bot()); }
  if (label == "CMdia") {
    need(1);
    return normalize_formula(expand(iff(trdia(quote(s[0])), ex("U", conj(atom("Uni", {var("U")}), mod2(var("U"), quote(s[0])))))));
  }
  if (label == "D_CM") { need(1); return normalize_formula(imp(box(quote(s[0])), dia(quote(s[0])))); }
  throw std::invalid_argument("unknown box lemma " + label);
}

Expr modal_axiom(const std::string& label, const Expr& sigma) {
  if (label == "T_CM") return imp(box(quote(sigma)), sigma);
  if (label == "4_CM") return imp(box(quote(sigma)), box(quote(box(quote(sigma)))));
  if (label == "D_CM") return normalize_formula(imp(box(quote(sigma)), dia(quote(sigma))));
  if (label == "Lob_CM") return imp(box(quote(imp(box(quote(sigma)), sigma))), box(quote(sigma)));
  if (label == "K_CM") {
    if (sigma->kind != Kind::Imp) throw std::invalid_argument("K_CM instance needs an implication");
    return box_lemma("CMbox_imp", {sigma->kids[0], sigma->kids[1]});
  }
  throw std::invalid_argument("unknown modal axiom " + label);
}

Expr multiverse_reflection(const Expr& sigma) { return imp(box(quote(sigma)), sigma); }

Expr con_axset_def(unsigned n) {
  if (n == 0) throw std::invalid_argument("Con_0 is ZF");
  Expr p = var("p");
  return all("p", iff(atom("Ax." + con_name(n), {p}),
                      disj(atom("Ax." + con_name(n - 1), {p}), eq(p, quote(ax::con(con_name(n - 1)))))));
}

Expr refl_axset_def(unsigned n) {
  if (n == 0) throw std::invalid_argument("R_0 is ZF");
  Expr p = var("p"), q = var("q");
  std::string prev = refl_name(n - 1);
  return all("p", iff(atom("Ax." + refl_name(n), {p}),
                      disj(atom("Ax." + prev, {p}),
                           ex("q", conj(atom("Sent.L", {q}), eq(p, app("dimp", {app("dpr." + prev, {q}), q})))))));
}

std::vector<Expr> axset_definitions() {
  Expr p = var("p");
  return {all("p", imp(atom("Ax.ZF", {p}), atom("Ax.ZF_UM", {p}))),
          all("p", imp(atom("Ax.ZF", {p}), atom("Ax.CMminus", {p}))),
          all("p", imp(atom("Ax.ZF_UM", {p}), atom("Ax.CMminus", {p})))};
}

Expr refl_step(unsigned k) { return imp(box_set(refl_name(k)), box_set(refl_name(k + 1))); }

Expr absoluteness(const Expr& sigma) { return absoluteness_f(sigma); }

Expr arith_env(const std::vector<std::string>& xs, const std::vector<std::string>& ns) {
  Expr e = var("f");
  for (std::size_t i = 0; i < xs.size(); ++i) e = app("put", {e, quote(var(xs[i])), app("numin", {var(ns[i]), var("U")})});
  return e;
}

Expr arith_comp_instance(const std::string& x, const Expr& phi, const std::string& n) {
  Expr U = var("U");
  Expr lhs = atom("Mod", {U, quote(all(x, imp(atom("Nat", {var(x)}), phi))), var("f")});
  Expr rhs = all(n, imp(atom("Nat", {var(n)}), atom("Mod", {U, quote(phi), arith_env({x}, {n})})));
  return wrap(universe_prefix(), iff(lhs, rhs));
}

Expr arith_atom_env(const Expr& a, const std::vector<std::string>& xs, const std::vector<std::string>& ns) {
  std::map<std::string, Expr> sub;
  Prefix pi = universe_prefix();
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sub[xs[i]] = var(ns[i]);
    pi.push_back({ns[i], atom("Nat", {var(ns[i])})});
  }
  return wrap(pi, iff(atom("Mod", {var("U"), quote(a), arith_env(xs, ns)}), substitute(a, sub)));
}

}  // namespace ax

}  // namespace mk
