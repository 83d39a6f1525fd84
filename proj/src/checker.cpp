#include "mkernel/checker.hpp"

#include <sstream>
#include <unordered_map>

#include "mkernel/coding.hpp"
#include "mkernel/soundness.hpp"

namespace mk {

std::string CheckReport::summary() const {
  std::ostringstream o;
  o << (ok ? "ok" : "FAILED") << " nec=" << nec << " conec=" << conec;
  if (!flagged.empty()) o << " flagged=" << flagged.size();
  for (auto& f : failures) o << "\n  step " << f.step << ": " << f.reason;
  return o.str();
}

// --- tautologies -----------------------------------------------------------------

namespace {

bool propositional(Kind k) {
  return k == Kind::Not || k == Kind::And || k == Kind::Or || k == Kind::Imp || k == Kind::Iff || k == Kind::Bot ||
         k == Kind::Top;
}

struct TautSolver {
  std::unordered_map<const Node*, int> atom_of;
  std::unordered_map<std::string, int> by_key;
  std::vector<int> order;

  void collect(const Expr& e) {
    if (propositional(e->kind)) {
      for (auto& k : e->kids) collect(k);
      return;
    }
    if (atom_of.count(e.get())) return;
    auto [it, fresh_atom] = by_key.emplace(key(e), static_cast<int>(by_key.size()));
    atom_of[e.get()] = it->second;
    if (fresh_atom) order.push_back(it->second);
  }

  // 0 false, 1 true, 2 unknown
  int eval(const Expr& e, const std::vector<int>& val) const {
    switch (e->kind) {
      case Kind::Bot: return 0;
      case Kind::Top: return 1;
      case Kind::Not: {
        int a = eval(e->kids[0], val);
        return a == 2 ? 2 : 1 - a;
      }
      case Kind::And: {
        int a = eval(e->kids[0], val);
        if (a == 0) return 0;
        int b = eval(e->kids[1], val);
        if (b == 0) return 0;
        return a == 1 && b == 1 ? 1 : 2;
      }
      case Kind::Or: {
        int a = eval(e->kids[0], val);
        if (a == 1) return 1;
        int b = eval(e->kids[1], val);
        if (b == 1) return 1;
        return a == 0 && b == 0 ? 0 : 2;
      }
      case Kind::Imp: {
        int a = eval(e->kids[0], val);
        if (a == 0) return 1;
        int b = eval(e->kids[1], val);
        if (b == 1) return 1;
        return a == 1 && b == 0 ? 0 : 2;
      }
      case Kind::Iff: {
        int a = eval(e->kids[0], val);
        if (a == 2) return 2;
        int b = eval(e->kids[1], val);
        if (b == 2) return 2;
        return a == b ? 1 : 0;
      }
      default: return val[atom_of.at(e.get())];
    }
  }

  bool valid(const Expr& e, std::vector<int>& val, std::size_t next) const {
    int v = eval(e, val);
    if (v != 2) return v == 1;
    while (next < order.size() && val[order[next]] != 2) ++next;
    if (next == order.size()) return false;
    int a = order[next];
    for (int b : {0, 1}) {
      val[a] = b;
      bool ok = valid(e, val, next + 1);
      val[a] = 2;
      if (!ok) return false;
    }
    return true;
  }
};

}  // namespace

bool is_tautology(const Expr& f) {
  TautSolver s;
  s.collect(f);
  std::vector<int> val(s.by_key.size(), 2);
  return s.valid(f, val, 0);
}

namespace {

// Guards of the stripped prefix stay available as antecedents.
bool closed_taut(const Expr& f, std::vector<Expr>& guards) {
  if (is_tautology(imps(guards, f))) return true;
  if (f->kind != Kind::All) return false;
  const Expr& b = f->kids[0];
  if (closed_taut(b, guards)) return true;
  if (b->kind != Kind::Imp) return false;
  guards.push_back(b->kids[0]);
  bool ok = closed_taut(b->kids[1], guards);
  guards.pop_back();
  return ok;
}

}  // namespace

bool is_closed_tautology(const Expr& f) {
  std::vector<Expr> guards;
  return closed_taut(f, guards);
}

// --- logical axioms ------------------------------------------------------------------

namespace {

// Bodies obtained by stripping a closure prefix of forall x / forall x (g -> .).
void closure_bodies(const Expr& f, std::vector<Expr>& out) {
  out.push_back(f);
  if (f->kind != Kind::All) return;
  const Expr& b = f->kids[0];
  closure_bodies(b, out);
  if (b->kind == Kind::Imp) closure_bodies(b->kids[1], out);
}

// Finds t with X[t/x] = Y by walking both in parallel; nullptr when x does not occur.
Expr find_instance(const Expr& X, const Expr& Y, const std::string& x) {
  if (X->kind == Kind::Var) return X->name == x && is_term(Y) ? Y : nullptr;
  if (X->kind == Kind::Quote || X->kind != Y->kind || X->kids.size() != Y->kids.size()) return nullptr;
  if (is_binder(X->kind) && X->name == x) return nullptr;
  for (std::size_t i = 0; i < X->kids.size(); ++i)
    if (Expr t = find_instance(X->kids[i], Y->kids[i], x)) return t;
  return nullptr;
}

bool inst_ok(const Expr& body) {
  if (body->kind != Kind::Imp || body->kids[0]->kind != Kind::All) return false;
  const Expr& A = body->kids[0];
  const Expr& X = A->kids[0];
  const Expr& Y = body->kids[1];
  if (!free_vars(X).count(A->name)) return alpha_eq(X, Y);
  Expr t = find_instance(X, Y, A->name);
  return t && alpha_eq(substitute(X, A->name, t), Y);
}

bool vac_ok(const Expr& F, const Expr& W) {
  if (alpha_eq(F, W)) return true;
  if (W->kind == Kind::All) return !free_vars(F).count(W->name) && vac_ok(F, W->kids[0]);
  if (W->kind == Kind::Imp) return vac_ok(F, W->kids[1]);
  return false;
}

Expr rename_bound(const Expr& binder, const std::string& to) {
  if (binder->name == to) return binder->kids[0];
  return substitute(binder->kids[0], binder->name, var(to));
}

bool dist_ok(const Expr& L, const Expr& M, const Expr& R) {
  if (is_tautology(imp(L, imp(M, R)))) return true;
  if (L->kind == Kind::Imp && M->kind == Kind::Imp && R->kind == Kind::Imp && alpha_eq(L->kids[0], M->kids[0]) &&
      alpha_eq(L->kids[0], R->kids[0]))
    return dist_ok(L->kids[1], M->kids[1], R->kids[1]);
  if (L->kind == Kind::All && M->kind == Kind::All && R->kind == Kind::All) {
    std::set<std::string> avoid = free_vars(L);
    for (auto& v : free_vars(M)) avoid.insert(v);
    for (auto& v : free_vars(R)) avoid.insert(v);
    std::string z = L->name;
    if (avoid.count(z) || (M->name != z && free_vars(M->kids[0]).count(z)) ||
        (R->name != z && free_vars(R->kids[0]).count(z)))
      z = fresh("z", [&] {
        auto a = avoid;
        for (auto& v : free_vars(L->kids[0])) a.insert(v);
        for (auto& v : free_vars(M->kids[0])) a.insert(v);
        for (auto& v : free_vars(R->kids[0])) a.insert(v);
        return a;
      }());
    return dist_ok(rename_bound(L, z), rename_bound(M, z), rename_bound(R, z));
  }
  return false;
}

bool disjoint(const std::set<std::string>& a, const std::set<std::string>& b) {
  for (auto& x : a)
    if (b.count(x)) return false;
  return true;
}

// psi arises from phi by replacing some free occurrences of s by t (or t by s).
bool eqsub_walk(const Expr& phi, const Expr& psi, const Expr& s, const Expr& t, const std::set<std::string>& st_vars,
                std::set<std::string>& bound) {
  if (alpha_eq(phi, psi)) return true;
  if (is_term(phi) && is_term(psi) && disjoint(st_vars, bound) &&
      ((alpha_eq(phi, s) && alpha_eq(psi, t)) || (alpha_eq(phi, t) && alpha_eq(psi, s))))
    return true;
  if (phi->kind != psi->kind || phi->name != psi->name || phi->kids.size() != psi->kids.size()) {
    if (!is_binder(phi->kind) || phi->kind != psi->kind) return false;
  }
  if (phi->kind == Kind::Quote || phi->kind == Kind::Var) return false;
  if (is_binder(phi->kind)) {
    Expr pb = psi->kids[0];
    if (psi->name != phi->name) {
      if (free_vars(pb).count(phi->name)) return false;
      pb = substitute(pb, psi->name, var(phi->name));
    }
    bool added = bound.insert(phi->name).second;
    bool ok = eqsub_walk(phi->kids[0], pb, s, t, st_vars, bound);
    if (added) bound.erase(phi->name);
    return ok;
  }
  for (std::size_t i = 0; i < phi->kids.size(); ++i)
    if (!eqsub_walk(phi->kids[i], psi->kids[i], s, t, st_vars, bound)) return false;
  return true;
}

bool eqsub_ok(const Expr& body) {
  if (body->kind != Kind::Imp || body->kids[1]->kind != Kind::Imp) return false;
  const Expr& e = body->kids[0];
  if (e->kind != Kind::Atom || e->name != "=") return false;
  const Expr &s = e->kids[0], &t = e->kids[1];
  std::set<std::string> st = free_vars(s);
  for (auto& v : free_vars(t)) st.insert(v);
  std::set<std::string> bound;
  return eqsub_walk(body->kids[1]->kids[0], body->kids[1]->kids[1], s, t, st, bound);
}

bool ex_ok(const Expr& body) {
  if (body->kind != Kind::Iff || body->kids[0]->kind != Kind::Ex) return false;
  const Expr& E = body->kids[0];
  return alpha_eq(body->kids[1], neg(all(E->name, neg(E->kids[0]))));
}

bool exdist_ok(const Expr& body) {
  if (body->kind != Kind::Imp || body->kids[0]->kind != Kind::All) return false;
  const Expr& L = body->kids[0];
  if (L->kids[0]->kind != Kind::Imp) return false;
  const std::string& x = L->name;
  return alpha_eq(body, imp(L, imp(ex(x, L->kids[0]->kids[0]), ex(x, L->kids[0]->kids[1]))));
}

// forall x (g -> forall y (h -> A)) -> forall y (h -> forall x (g -> A)), guards optional.
bool swap_ok(const Expr& body) {
  if (body->kind != Kind::Imp || body->kids[0]->kind != Kind::All) return false;
  const Expr& L = body->kids[0];
  const std::string x = L->name;
  Expr cur = L->kids[0];
  Expr g, h;
  if (cur->kind == Kind::Imp) {
    g = cur->kids[0];
    cur = cur->kids[1];
  }
  if (cur->kind != Kind::All) return false;
  const std::string y = cur->name;
  cur = cur->kids[0];
  if (cur->kind == Kind::Imp) {
    h = cur->kids[0];
    cur = cur->kids[1];
  }
  if (x == y || (h && free_vars(h).count(x)) || (g && free_vars(g).count(y))) return false;
  auto guard = [](const Expr& gd, Expr b) { return gd ? imp(gd, b) : b; };
  Expr want = all(y, guard(h, all(x, guard(g, cur))));
  if (alpha_eq(body->kids[1], want)) return true;
  // Guarded forms may also be read with one of the guards as part of the body.
  if (h) {
    Expr want2 = all(y, all(x, guard(g, imp(h, cur))));
    if (alpha_eq(body->kids[1], want2)) return true;
  }
  return false;
}

bool eqrefl_ok(const Expr& body) {
  return body->kind == Kind::Atom && body->name == "=" && alpha_eq(body->kids[0], body->kids[1]);
}

}  // namespace

bool logic_axiom_ok(const std::string& schema, const Expr& f) {
  bool (*test)(const Expr&) = nullptr;
  if (schema == "inst") test = inst_ok;
  else if (schema == "eqsub") test = eqsub_ok;
  else if (schema == "ex") test = ex_ok;
  else if (schema == "exdist") test = exdist_ok;
  else if (schema == "swap") test = swap_ok;
  else if (schema == "eqrefl") test = eqrefl_ok;
  std::vector<Expr> bodies;
  closure_bodies(f, bodies);
  for (auto& b : bodies) {
    if (schema == "vac") {
      if (b->kind == Kind::Imp && vac_ok(b->kids[0], b->kids[1])) return true;
    } else if (schema == "dist") {
      if (b->kind == Kind::Imp && b->kids[1]->kind == Kind::Imp &&
          dist_ok(b->kids[0], b->kids[1]->kids[0], b->kids[1]->kids[1]))
        return true;
    } else if (test) {
      if (test(b)) return true;
    } else {
      return false;
    }
  }
  return false;
}

// --- base facts ------------------------------------------------------------------------

namespace {

std::optional<Expr> norm_code(const Expr& t) {
  if (!is_closed(t)) return std::nullopt;
  try {
    Expr c = coding_normalize(t);
    if (c->kind != Kind::Quote) return std::nullopt;
    return c;
  } catch (const CodingError&) {
    return std::nullopt;
  }
}

std::optional<bool> syntax_fact(const Expr& a) {
  if (a->kind != Kind::Atom || a->kids.size() != 1) return std::nullopt;
  auto c = norm_code(a->kids[0]);
  if (!c) return std::nullopt;
  const Expr& s = (*c)->kids[0];
  if (a->name == "VarC") return s->kind == Kind::Var;
  auto dot = a->name.find('.');
  if (dot == std::string::npos) return std::nullopt;
  std::string head = a->name.substr(0, dot), tag = a->name.substr(dot + 1);
  const Language* lang = Language::by_tag(tag);
  if (!lang || (head != "Fml" && head != "Sent")) return std::nullopt;
  if (!is_formula(s) || !in_language(s, *lang)) return false;
  return head == "Fml" || is_sentence(s);
}

std::optional<bool> arith_fact(const Expr& a) {
  if (a->kind != Kind::Atom) return std::nullopt;
  if (a->name == "Nat") {
    if (!is_closed(a->kids[0])) return std::nullopt;
    return arith_value(a->kids[0]).has_value() ? std::optional<bool>(true) : std::nullopt;
  }
  if (a->name != "=" && a->name != "Lt") return std::nullopt;
  auto x = arith_value(a->kids[0]), y = arith_value(a->kids[1]);
  if (!x || !y) return std::nullopt;
  return a->name == "=" ? *x == *y : *x < *y;
}

bool literal(const Expr& f, std::optional<bool> (*fact)(const Expr&)) {
  bool positive = f->kind != Kind::Not;
  const Expr& a = positive ? f : f->kids[0];
  auto v = fact(a);
  return v && *v == positive;
}

const Expr& comp_fixed_point() {
  static const Expr lambda = [] {
    for (auto& r : axiom_family("Comp")->recognizers)
      if (r.label == "Comp_CM") return r.example;
    throw std::logic_error("Comp family lacks its fixed point");
  }();
  return lambda;
}

bool axset_fact(const Expr& f, const Registry& reg, std::string* why) {
  for (auto& d : ax::axset_definitions())
    if (alpha_eq(f, d)) return true;
  Expr p = var("p");
  if (alpha_eq(f, all("p", iff(atom("Ax.Comp_CM", {p}), disj(atom("Ax.CMminus", {p}), eq(p, quote(comp_fixed_point())))))))
    return true;
  // Definitions of Ax.Con<n> and Ax.R<n>.
  if (f->kind == Kind::All && f->kids[0]->kind == Kind::Iff && f->kids[0]->kids[0]->kind == Kind::Atom) {
    const std::string& name = f->kids[0]->kids[0]->name;
    for (const char* head : {"Ax.Con", "Ax.R"}) {
      std::string h = head;
      if (name.rfind(h, 0) != 0) continue;
      std::string digits = name.substr(h.size());
      if (digits.empty() || digits.size() > 4 || digits.find_first_not_of("0123456789") != std::string::npos) continue;
      unsigned n = static_cast<unsigned>(std::stoul(digits));
      if (n == 0) continue;
      Expr want = h == "Ax.Con" ? ax::con_axset_def(n) : ax::refl_axset_def(n);
      if (alpha_eq(f, want)) return true;
    }
  }
  // Closed membership facts Ax.T(quote sigma) for primitive axioms sigma of T.
  bool positive = f->kind != Kind::Not;
  const Expr& a = positive ? f : f->kids[0];
  if (a->kind == Kind::Atom && a->name.rfind("Ax.", 0) == 0 && a->kids.size() == 1) {
    auto c = norm_code(a->kids[0]);
    std::string th = a->name.substr(3);
    if (!c || !reg.known(th)) {
      if (why) *why = "Ax." + th + " membership needs a known theory and a closed code";
      return false;
    }
    const Expr& s = (*c)->kids[0];
    bool member = is_formula(s) && is_primitive_axiom(reg.get(th), expand(s));
    return member == positive;
  }
  return false;
}

bool is_var_code(const Expr& c) { return c->kind == Kind::Quote && c->kids[0]->kind == Kind::Var; }
bool is_at(const Expr& t) { return t->kind == Kind::App && t->name == "at" && t->kids.size() == 2 && is_var_code(t->kids[1]); }
bool is_put(const Expr& t) { return t->kind == Kind::App && t->name == "put" && t->kids.size() == 3 && is_var_code(t->kids[1]); }

bool put_chain(const Expr& t) {
  if (t->kind == Kind::Const && t->name == "emp") return true;
  return is_put(t) && put_chain(t->kids[0]);
}

// Evaluates at(put(g, c, s), d) redexes.
Expr eval_at(const Expr& t) {
  if (t->kind == Kind::Quote || t->kids.empty()) return t;
  std::vector<Expr> kids;
  for (auto& k : t->kids) kids.push_back(eval_at(k));
  Expr r = make(t->kind, t->name, std::move(kids));
  while (is_at(r) && is_put(r->kids[0])) {
    const Expr& p = r->kids[0];
    if (alpha_eq(p->kids[1], r->kids[1])) return p->kids[2];
    r = app("at", {p->kids[0], r->kids[1]});
  }
  return r;
}

bool assign_body(const Expr& b) {
  auto is = [](const Expr& e, const char* name, std::size_t n) {
    return e->kind == Kind::Atom && e->name == name && e->kids.size() == n;
  };
  if (is(b, "VA", 1)) return put_chain(b->kids[0]);
  if (is(b, "=", 2)) {
    Expr l = eval_at(b->kids[0]), r = eval_at(b->kids[1]);
    return (!alpha_eq(l, b->kids[0]) || !alpha_eq(r, b->kids[1])) && alpha_eq(l, r);
  }
  if (b->kind != Kind::Imp) return false;
  const Expr &g = b->kids[0], &c = b->kids[1];
  if (is(g, "VA", 1) && g->kids[0]->kind == Kind::Var && is(c, "VA", 1) && is_put(c->kids[0]))
    return alpha_eq(c->kids[0]->kids[0], g->kids[0]);
  // U-assignments: extending by an internal numeral, and variants.
  if (is(g, "VAU", 2) && c->kind == Kind::Imp && is(c->kids[0], "Nat", 1) && is(c->kids[1], "VAU", 2)) {
    const Expr& n = c->kids[0]->kids[0];
    const Expr& t = c->kids[1]->kids[0];
    return n->kind == Kind::Var && alpha_eq(c->kids[1]->kids[1], g->kids[1]) && is_put(t) &&
           alpha_eq(t->kids[0], g->kids[0]) && alpha_eq(t->kids[2], app("numin", {n, g->kids[1]}));
  }
  if (is(g, "VAUfv", 4) && is(c, "VAU", 2))
    return alpha_eq(c->kids[0], g->kids[0]) && alpha_eq(c->kids[1], g->kids[1]);
  if (!is(g, "VAfv", 3) || g->kids[0]->kind != Kind::Var || g->kids[1]->kind != Kind::Var || !is_var_code(g->kids[2]))
    return false;
  const Expr &h = g->kids[0], &f = g->kids[1];
  if (is(c, "VA", 1)) return alpha_eq(c->kids[0], h);
  if (is(c, "=", 2) && is_at(c->kids[0]) && is_at(c->kids[1])) {
    const Expr &l = c->kids[0], &r = c->kids[1];
    return alpha_eq(l->kids[0], h) && alpha_eq(r->kids[0], f) && alpha_eq(l->kids[1], r->kids[1]) &&
           !alpha_eq(l->kids[1], g->kids[2]);
  }
  return false;
}

// Replaces at(G, quote u) by w and at(G, quote v) by at(F, quote v); fails on any
// other occurrence of G or on capture.
bool variant_rewrite(const Expr& e, const std::string& G, const std::string& F, const std::string& u,
                     const std::string& w, std::set<std::string>& bound, Expr& out) {
  if (is_at(e) && e->kids[0]->kind == Kind::Var && e->kids[0]->name == G) {
    if (e->kids[1]->kids[0]->name == u) {
      if (bound.count(w)) return false;
      out = var(w);
    } else {
      if (bound.count(F)) return false;
      out = app("at", {var(F), e->kids[1]});
    }
    return true;
  }
  if (e->kind == Kind::Var) {
    out = e;
    return e->name != G;
  }
  if (e->kind == Kind::Quote || e->kids.empty()) {
    out = e;
    return true;
  }
  bool binder = is_binder(e->kind);
  bool inserted = binder && bound.insert(e->name).second;
  std::vector<Expr> kids;
  bool ok = true;
  for (auto& k : e->kids) {
    Expr r;
    if (!variant_rewrite(k, G, F, u, w, bound, r)) {
      ok = false;
      break;
    }
    kids.push_back(r);
  }
  if (inserted) bound.erase(e->name);
  if (ok) out = make(e->kind, e->name, std::move(kids));
  return ok;
}

bool variant_body(const Expr& b) {
  if (b->kind != Kind::Iff) return false;
  const Expr &L = b->kids[0], &R = b->kids[1];
  bool universal = L->kind == Kind::All;
  if ((!universal && L->kind != Kind::Ex) || R->kind != L->kind) return false;
  const Expr& lb = L->kids[0];
  if (lb->kind != (universal ? Kind::Imp : Kind::And)) return false;
  const Expr &g = lb->kids[0], &X = lb->kids[1];
  if (g->kind != Kind::Atom || g->name != "VAfv" || g->kids.size() != 3 || !is_var_code(g->kids[2])) return false;
  const std::string& G = L->name;
  if (!alpha_eq(g->kids[0], var(G)) || g->kids[1]->kind != Kind::Var || g->kids[1]->name == G) return false;
  const std::string& F = g->kids[1]->name;
  const std::string& w = R->name;
  if (w == F || free_vars(X).count(w)) return false;
  std::set<std::string> bound;
  Expr Y;
  if (!variant_rewrite(X, G, F, g->kids[2]->kids[0]->name, w, bound, Y)) return false;
  return alpha_eq(make(R->kind, w, {Y}), R);
}

bool bodies_any(const Expr& f, bool (*ok)(const Expr&)) {
  std::vector<Expr> bodies;
  closure_bodies(f, bodies);
  for (auto& b : bodies)
    if (ok(b)) return true;
  return false;
}

}  // namespace

bool base_fact_ok(const std::string& schema, const Expr& f, const Registry& reg, std::string* why) {
  if (schema == "syntax") return literal(f, syntax_fact);
  if (schema == "arith") return literal(f, arith_fact);
  if (schema == "axset") return axset_fact(f, reg, why);
  if (schema == "va") {
    return alpha_eq(f, all("U", imp(atom("Uni", {var("U")}), ex("f", atom("VAU", {var("f"), var("U")})))));
  }
  if (schema == "assign") return bodies_any(f, assign_body);
  if (schema == "variant") return bodies_any(f, variant_body);
  if (why) *why = "unknown base schema " + schema;
  return false;
}

// --- the checker ---------------------------------------------------------------------------

namespace {

struct Ctx {
  const TheoryDescriptor& theory;
  const CheckOptions& opts;
  int depth;
};

CheckReport check_rec(const ProofScript& p, const TheoryDescriptor& theory, const CheckOptions& opts, int depth);

bool matches_box(const Expr& f, const Expr& prem) { return alpha_eq(f, ax::box(quote(prem))); }
bool matches_truth(const Expr& f, const Expr& prem) { return alpha_eq(f, ax::truth(quote(prem))); }

// The code of an expanded Tr sentence forall f (VA f -> Sat(c, f)).
bool match_truth(const Expr& e, Expr& code) {
  if (e->kind != Kind::All || e->kids[0]->kind != Kind::Imp) return false;
  const Expr& g = e->kids[0]->kids[0];
  const Expr& s = e->kids[0]->kids[1];
  if (g->kind != Kind::Atom || g->name != "VA" || s->kind != Kind::Atom || s->name != "Sat") return false;
  if (!alpha_eq(g->kids[0], var(e->name)) || !alpha_eq(s->kids[1], var(e->name))) return false;
  code = s->kids[0];
  return !free_vars(code).count(e->name);
}

std::string check_axiom(const Justification& j, const Expr& f, const Ctx& c, bool& flagged) {
  if (j.theory == "logic") return logic_axiom_ok(j.schema, f) ? "" : "not an instance of logic." + j.schema;
  if (j.theory == "Base") {
    std::string why;
    if (base_fact_ok(j.schema, f, *c.opts.registry, &why)) return "";
    return why.empty() ? "not a Base." + j.schema + " fact" : why;
  }
  if (j.theory == "hyp") {
    std::size_t k = 0;
    try {
      k = std::stoul(j.schema);
    } catch (const std::exception&) {
      return "bad hypothesis index " + j.schema;
    }
    if (k >= c.opts.hypotheses.size()) return "no hypothesis " + j.schema;
    return alpha_eq(f, c.opts.hypotheses[k]) ? "" : "formula differs from hypothesis " + j.schema;
  }
  try {
    std::optional<AxiomMatch> m;
    if (c.theory.has_family(j.theory)) {
      m = is_axiom_as(c.theory, f, j.theory, j.schema);
    } else if (c.opts.registry->known(j.theory) && c.opts.registry->subtheory(j.theory, c.theory.name)) {
      auto sub = c.opts.registry->get(j.theory);
      m = is_axiom(sub, f);
      if (m && m->label != j.schema) m.reset();
    } else {
      return "'" + j.theory + "' is neither a family nor a subtheory of " + c.theory.name;
    }
    if (!m) return "not an axiom " + j.theory + "." + j.schema + " of " + c.theory.name;
    flagged = m->flagged;
    return "";
  } catch (const LanguageError& e) {
    return std::string("language error: ") + e.what();
  } catch (const RegistryError& e) {
    return std::string("registry error: ") + e.what();
  }
}

std::string check_coding(const Expr& f) {
  std::vector<Expr> bodies;
  closure_bodies(f, bodies);
  for (auto& b : bodies) {
    try {
      if (b->kind == Kind::Atom && b->name == "=" && is_closed(b->kids[0]) && is_closed(b->kids[1])) {
        if (alpha_eq(coding_normalize(b->kids[0]), coding_normalize(b->kids[1]))) return "";
      } else if (b->kind == Kind::Iff) {
        if (alpha_eq(normalize_formula(b->kids[0]), normalize_formula(b->kids[1]))) return "";
      }
    } catch (const CodingError&) {
    }
  }
  return "not a coding equation";
}

std::string check_printro(const Step& s, const Expr& f, const Ctx& c, CheckReport& rep) {
  if (!c.theory.admits("PrIntro")) return "PrIntro not admitted by " + c.theory.name;
  if (f->kind != Kind::Atom || f->name.rfind("Pr.", 0) != 0 || f->kids.size() != 1) return "PrIntro needs Pr.T(code)";
  auto code = norm_code(f->kids[0]);
  if (!code) return "PrIntro argument is not a closed code";
  if (!s.just.sub || s.just.sub->empty()) return "PrIntro without a subproof";
  if (c.depth >= c.opts.max_depth) return "subproof nesting too deep";
  std::string th = f->name.substr(3);
  TheoryDescriptor sub_theory;
  try {
    sub_theory = c.opts.registry->get(th);
  } catch (const RegistryError& e) {
    return e.what();
  }
  CheckOptions o = c.opts;
  o.hypotheses.clear();
  CheckReport sub = check_rec(*s.just.sub, sub_theory, o, c.depth + 1);
  if (!sub.ok) {
    std::string msg = "subproof fails under " + th;
    for (auto& x : sub.failures) msg += "; [" + std::to_string(x.step) + "] " + x.reason;
    return msg;
  }
  for (int id : sub.flagged) rep.flagged.push_back(-id);
  if (!alpha_eq(expand(s.just.sub->last().formula), expand((*code)->kids[0])))
    return "subproof does not end in the quoted sentence";
  return "";
}

std::string check_macro(const Step& s, const Expr& f, const std::vector<Expr>& premises, const Ctx& c) {
  if (s.just.macro != "soundness") return "unknown macro " + s.just.macro;
  if (!s.just.sub) return "macro without a subproof";
  if (!c.theory.has_family("CMcomp")) return "soundness macro needs the CM compositional axioms";
  if (c.depth >= c.opts.max_depth) return "subproof nesting too deep";
  ProofScript expansion;
  try {
    expansion = soundness_macro(premises, *s.just.sub);
  } catch (const MacroError& e) {
    return std::string("macro: ") + e.what();
  }
  CheckOptions o = c.opts;
  o.hypotheses = premises;
  CheckReport sub = check_rec(expansion, c.opts.registry->get("CMminus"), o, c.depth + 1);
  if (!sub.ok) {
    std::string msg = "macro expansion fails";
    for (auto& x : sub.failures) msg += "; [" + std::to_string(x.step) + "] " + x.reason;
    return msg;
  }
  if (!alpha_eq(expansion.last().formula, f)) return "macro expansion ends in a different sentence";
  return "";
}

CheckReport check_rec(const ProofScript& p, const TheoryDescriptor& theory, const CheckOptions& opts, int depth) {
  CheckReport rep;
  Ctx c{theory, opts, depth};
  std::map<int, Expr> done;  // id -> expanded formula
  std::set<int> seen;
  for (const Step& s : p.steps) {
    auto fail = [&](std::string why) { rep.failures.push_back({s.id, std::move(why)}); };
    if (!seen.insert(s.id).second) {
      fail("duplicate step id");
      continue;
    }
    if (!s.formula) {
      fail("missing formula");
      continue;
    }
    Expr f = expand(s.formula);
    if (!is_formula(f) || !is_sentence(f)) {
      fail("not a sentence");
      continue;
    }
    const Justification& j = s.just;
    std::vector<Expr> refs;
    bool refs_ok = true;
    for (int r : j.refs) {
      auto it = done.find(r);
      if (it == done.end()) {
        fail("reference " + std::to_string(r) + " does not precede this step");
        refs_ok = false;
        break;
      }
      refs.push_back(it->second);
    }
    if (!refs_ok) continue;
    std::string err;
    bool flagged = false;
    switch (j.rule) {
      case Rule::Axiom: err = check_axiom(j, f, c, flagged); break;
      case Rule::Taut: err = is_closed_tautology(f) ? "" : "not a tautology"; break;
      case Rule::MP:
        if (refs.size() != 2) err = "mp needs two references";
        else if (!alpha_eq(refs[0], imp(refs[1], f))) err = "mp: first premise is not the implication";
        else if (!theory.admits("MP")) err = "MP not admitted";
        break;
      case Rule::Gen:
        if (refs.size() != 1 || !alpha_eq(f, all(j.var, refs[0]))) err = "gen: formula is not the generalization";
        else if (!theory.admits("Gen")) err = "Gen not admitted";
        break;
      case Rule::Inst:
        if (refs.size() != 1 || refs[0]->kind != Kind::All) err = "inst: premise is not universal";
        else if (!j.term || !is_term(j.term) || !is_closed(j.term)) err = "inst: term is not closed";
        else if (!alpha_eq(f, substitute(refs[0]->kids[0], refs[0]->name, expand(j.term)))) err = "inst: wrong instance";
        break;
      case Rule::NEC:
        ++rep.nec;
        if (refs.size() != 1) err = "nec needs one reference";
        else if (matches_box(f, refs[0])) err = theory.admits("NEC") ? "" : "NEC not admitted by " + theory.name;
        else if (matches_truth(f, refs[0])) err = theory.admits("NEC_Tr") ? "" : "NEC_Tr not admitted by " + theory.name;
        else err = "nec: formula is not the boxed premise";
        break;
      case Rule::CONEC: {
        ++rep.conec;
        Expr code;
        if (refs.size() != 1) {
          err = "conec needs one reference";
        } else if (match_trbox(refs[0], code)) {
          auto cc = norm_code(code);
          if (!cc || !alpha_eq(expand((*cc)->kids[0]), f)) err = "conec: formula is not the boxed sentence";
          else if (!theory.admits("CONEC")) err = "CONEC not admitted by " + theory.name;
        } else if (match_truth(refs[0], code)) {
          auto cc = norm_code(code);
          if (!cc || !alpha_eq(expand((*cc)->kids[0]), f)) err = "conec: formula is not the sentence under Tr";
          else if (!theory.admits("CONEC_Tr")) err = "CONEC_Tr not admitted by " + theory.name;
        } else {
          err = "conec: premise is not boxed";
        }
        break;
      }
      case Rule::Refl: {
        if (refs.size() != 1 || refs[0]->kind != Kind::Atom || refs[0]->name.rfind("Pr.", 0) != 0) {
          err = "reflrule: premise is not a provability atom";
          break;
        }
        auto cc = norm_code(refs[0]->kids[0]);
        std::string th = refs[0]->name.substr(3);
        if (!cc || !alpha_eq(expand((*cc)->kids[0]), f)) err = "reflrule: formula is not the quoted sentence";
        else if (!theory.admits("ReflectionRule")) err = "ReflectionRule not admitted by " + theory.name;
        else if (!opts.registry->known(th) || !opts.registry->subtheory(th, theory.name))
          err = "reflrule: " + th + " is not contained in " + theory.name;
        break;
      }
      case Rule::Coding: err = check_coding(f); break;
      case Rule::PrIntro: err = check_printro(s, f, c, rep); break;
      case Rule::Macro: err = check_macro(s, f, refs, c); break;
    }
    done[s.id] = f;
    if (!err.empty()) {
      fail(err);
      continue;
    }
    if (flagged) rep.flagged.push_back(s.id);
  }
  rep.ok = rep.failures.empty();
  return rep;
}

}  // namespace

CheckReport check(const ProofScript& p, const TheoryDescriptor& theory, const CheckOptions& opts) {
  CheckReport rep = check_rec(p, theory, opts, 0);
  if (p.empty()) {
    rep.ok = false;
    rep.failures.push_back({0, "empty proof"});
  }
  return rep;
}

}  // namespace mk
