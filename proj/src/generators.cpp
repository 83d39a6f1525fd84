#include "mkernel/generators.hpp"

#include <algorithm>
#include <cstdlib>
#include <functional>
#include <map>
#include <random>
#include <set>

#include "mkernel/coding.hpp"
#include "mkernel/soundness.hpp"
#include "mkernel/theories.hpp"

namespace mk {

namespace {

Expr pv() { return var("p"); }
Expr uni(const Expr& u) { return atom("Uni", {u}); }

Prefix p_prefix() { return {{"p", nullptr}}; }

// wrap(pi, A1 -> .. -> An -> C) at id  ==>  wrap(pi, A1) -> .. -> wrap(pi, An) -> wrap(pi, C)
int dist_chain(ProofBuilder& b, const Prefix& pi, int id, int n) {
  Expr body;
  if (!ProofBuilder::unwrap(pi, b.formula(id), body) || body->kind != Kind::Imp)
    throw std::logic_error("dist_chain: expected a prefixed implication");
  const Expr& a = body->kids[0];
  const Expr& r = body->kids[1];
  int d = b.logic("dist", imp(wrap(pi, body), imp(wrap(pi, a), wrap(pi, r))));
  int m = b.mp(d, id);
  if (n <= 1) return m;
  if (n > 2 || r->kind != Kind::Imp) throw std::logic_error("dist_chain supports at most two antecedents");
  const Expr &a2 = r->kids[0], &rest = r->kids[1];
  int d2 = b.logic("dist", imp(wrap(pi, r), imp(wrap(pi, a2), wrap(pi, rest))));
  return b.taut_chain({m, d2}, imp(wrap(pi, a), imp(wrap(pi, a2), wrap(pi, rest))));
}

// box_set(ZF) from Multiverse_ZF and Ax.ZF being contained in Ax.ZF_UM.
int box_set_zf(ProofBuilder& b) {
  int mzf = b.axiom("Multiverse_ZF", "Multiverse_ZF", ax::multiverse_zf());
  int inc = b.base("axset", all("p", imp(atom("Ax.ZF", {pv()}), atom("Ax.ZF_UM", {pv()}))));
  return b.ctx_taut(p_prefix(), {mzf, inc}, imp(atom("Ax.ZF", {pv()}), ax::box(pv())));
}

// box_set(name) from box_set(prev), the axiom-set definition name = prev + {c}
// and the boxed code c.
int extend_box_set(ProofBuilder& b, int prev_bs, int def, int boxed_c, const std::string& name, const Expr& c) {
  Prefix pp = p_prefix();
  int es = b.logic("eqsub", wrap(pp, imp(eq(pv(), c), imp(ax::box(c), ax::box(pv())))));
  int lifted = b.lift(pp, boxed_c);
  return b.ctx_taut(pp, {def, prev_bs, es, lifted}, imp(atom("Ax." + name, {pv()}), ax::box(pv())));
}

// Pr.T(quote s) -> trbox(quote s) from box_set(T) via the boxed soundness lemma.
int sound_instance(ProofBuilder& b, int bs, const std::string& T, const Expr& s) {
  int sb = b.axiom("CMcomp", "SoundBox", ax::sound_box(T));
  int m = b.mp(sb, bs);
  return b.inst(m, quote(s));
}

// wrap(pi, bot) -> bot, from Non-Triviality and the existence of assignments.
int box_bot_elim(ProofBuilder& b) {
  Expr U = var("U"), f = var("f");
  Prefix pu = {{"U", uni(U)}};
  Expr va = atom("VAU", {f, U});
  Expr W = all("f", imp(va, bot()));
  int x1 = b.taut(wrap(pu, all("f", imp(imp(va, bot()), neg(va)))));
  int x2 = b.logic("dist", wrap(pu, imp(all("f", imp(imp(va, bot()), neg(va))), imp(W, all("f", neg(va))))));
  int x3 = b.logic("ex", wrap(pu, iff(ex("f", va), neg(all("f", neg(va))))));
  int vf = b.base("va", wrap(pu, ex("f", va)));
  int y = b.ctx_taut(pu, {x1, x2, x3, vf}, imp(W, bot()));
  int z = dist_chain(b, pu, y, 1);  // wrap(pi, bot) -> forall U (Uni U -> bot)
  int u1 = b.taut(all("U", imp(imp(uni(U), bot()), neg(uni(U)))));
  int u2 = b.logic("dist", imp(all("U", imp(imp(uni(U), bot()), neg(uni(U)))),
                               imp(all("U", imp(uni(U), bot())), all("U", neg(uni(U))))));
  int u3 = b.logic("ex", iff(ex("U", uni(U)), neg(all("U", neg(uni(U))))));
  int nt = b.axiom("NonTriviality", "NonTriviality", ax::non_triviality());
  return b.taut_chain({z, u1, u2, u3, nt}, imp(wrap(universe_prefix(), bot()), bot()));
}

Expr mod_of(const Expr& s) { return atom("Mod", {var("U"), quote(s), var("f")}); }

unsigned iteration_limit() {
  if (const char* e = std::getenv("MULTIKERNEL_BUDGET")) {
    long v = std::strtol(e, nullptr, 10);
    if (v > 0) return static_cast<unsigned>(std::min<long>(v, 1000));
  }
  return 32;
}

}  // namespace

// --- liar ---------------------------------------------------------------------------

Generated generate_liar(LiarVariant v) {
  Expr psi = expand(neg(trbox(var("x"))));
  Diagonal d = diagonalize(psi);
  ProofBuilder b(d.proof);
  int D = d.proof.last().id;
  const Expr& lam = d.lambda;
  Expr fixed = b.formula(D);  // lambda <-> not trbox(quote lambda)
  Expr negB = fixed->kids[1];
  Expr B = negB->kids[0];
  Generated g;
  if (v == LiarVariant::A) {
    g.theory = "CMminus+NEC+T_CM";
    int t = b.axiom("T_CM", "T_CM", ax::modal_axiom("T_CM", lam));
    int l = b.taut_chain({D, t}, lam);
    int n = b.nec(l);
    b.taut_chain({D, l, n}, bot());
  } else {
    g.theory = "CMminus+NEC+NonTriviality+4_CM";
    int n1 = b.nec(D);
    int i1 = b.axiom("CMcomp", "CMbox_iff", ax::box_lemma("CMbox_iff", {lam, negB}));
    int m1 = b.mp(i1, n1);  // B <-> box(not B)
    int i2 = b.axiom("NonTriviality", "CMbox_not", ax::box_lemma("CMbox_not", {B}));
    int i3 = b.axiom("4_CM", "4_CM", ax::modal_axiom("4_CM", lam));
    int l = b.taut_chain({D, m1, i2, i3}, lam);
    int n = b.nec(l);
    b.taut_chain({D, l, n}, bot());
  }
  g.proof = b.take();
  return g;
}

int liar_named_step(const Generated& g) {
  for (auto& s : g.proof.steps) {
    if (s.just.rule != Rule::Axiom) continue;
    if (s.just.theory == "T_CM" || (s.just.theory == "NonTriviality" && s.just.schema == "CMbox_not")) return s.id;
  }
  return -1;
}

// --- Tarski biconditionals ---------------------------------------------------------

namespace {

void all_vars(const Expr& e, std::set<std::string>& out) {
  if (e->kind == Kind::Var) out.insert(e->name);
  if (is_binder(e->kind)) out.insert(e->name);
  if (e->kind == Kind::Quote) return;
  for (auto& k : e->kids) all_vars(k, out);
}

struct Tarski {
  ProofBuilder b;
  std::string F, G;

  Expr at(const std::string& h, const std::string& v) const { return app("at", {var(h), quote(var(v))}); }

  Expr star(const Expr& psi, const std::string& h) const {
    std::map<std::string, Expr> s;
    for (auto& v : free_vars(psi)) s[v] = at(h, v);
    return substitute(psi, s);
  }

  Expr claim_body(const Expr& psi) const { return iff(atom("Sat", {quote(psi), var(F)}), star(psi, F)); }
  Prefix pf() const { return {{F, atom("VA", {var(F)})}}; }

  int prove(const Expr& psi) {
    Prefix pi = pf();
    switch (psi->kind) {
      case Kind::Atom: {
        if ((psi->name != "=" && psi->name != "in") || psi->kids[0]->kind != Kind::Var || psi->kids[1]->kind != Kind::Var)
          throw LanguageError("atomic formula outside the set-theoretic language: " + print(psi));
        return b.axiom("CTcomp", "CT_atomic", wrap(pi, claim_body(psi)));
      }
      case Kind::Not: {
        int ih = prove(psi->kids[0]);
        int ct = b.axiom("CTcomp", "CT_not", ax::ct_instance("CT_not", {quote(psi->kids[0])}));
        return b.ctx_taut(pi, {ct, ih}, claim_body(psi));
      }
      case Kind::And: case Kind::Or: case Kind::Imp: case Kind::Iff: {
        const char* label = psi->kind == Kind::And  ? "CT_and"
                            : psi->kind == Kind::Or ? "CT_or"
                            : psi->kind == Kind::Imp ? "CT_imp"
                                                     : "CT_iff";
        int a = prove(psi->kids[0]);
        int c = prove(psi->kids[1]);
        int ct = b.axiom("CTcomp", label, ax::ct_instance(label, {quote(psi->kids[0]), quote(psi->kids[1])}));
        return b.ctx_taut(pi, {ct, a, c}, claim_body(psi));
      }
      case Kind::All: case Kind::Ex: return quantifier(psi);
      default: throw LanguageError("unsupported formula in Tarski induction: " + print(psi));
    }
  }

  int quantifier(const Expr& psi) {
    bool universal = psi->kind == Kind::All;
    const std::string u = psi->name;
    const Expr& body = psi->kids[0];
    Prefix pi = pf();
    Expr A = atom("VAfv", {var(G), var(F), quote(var(u))});
    Prefix pfg = {{F, atom("VA", {var(F)})}, {G, A}};
    int ih = prove(body);
    int lifted = b.lift(pfg, ih);
    int inst = b.ctx_inst(pfg, lifted, var(G));
    int vag = b.base("assign", wrap(pfg, atom("VA", {var(G)})));
    Expr S = atom("Sat", {quote(body), var(G)});
    Expr Q = star(body, G);
    int h1 = b.ctx_taut(pfg, {inst, vag}, iff(S, Q));
    int e;
    if (universal) {
      int sq = b.ctx_taut(pfg, {h1}, imp(S, Q));
      int qs = b.ctx_taut(pfg, {h1}, imp(Q, S));
      int d1 = b.logic("dist", wrap(pi, imp(all(G, imp(A, imp(S, Q))), imp(all(G, imp(A, S)), all(G, imp(A, Q))))));
      int d2 = b.logic("dist", wrap(pi, imp(all(G, imp(A, imp(Q, S))), imp(all(G, imp(A, Q)), all(G, imp(A, S))))));
      e = b.ctx_taut(pi, {d1, sq, d2, qs}, iff(all(G, imp(A, S)), all(G, imp(A, Q))));
    } else {
      Prefix pfg2 = {{F, atom("VA", {var(F)})}, {G, nullptr}};
      int sq = b.ctx_taut(pfg2, {h1}, imp(conj(A, S), conj(A, Q)));
      int qs = b.ctx_taut(pfg2, {h1}, imp(conj(A, Q), conj(A, S)));
      int d1 = b.logic("exdist", wrap(pi, imp(all(G, imp(conj(A, S), conj(A, Q))), imp(ex(G, conj(A, S)), ex(G, conj(A, Q))))));
      int d2 = b.logic("exdist", wrap(pi, imp(all(G, imp(conj(A, Q), conj(A, S))), imp(ex(G, conj(A, Q)), ex(G, conj(A, S))))));
      e = b.ctx_taut(pi, {d1, sq, d2, qs}, iff(ex(G, conj(A, S)), ex(G, conj(A, Q))));
    }
    Expr left = universal ? all(G, imp(A, Q)) : ex(G, conj(A, Q));
    int vr = b.base("variant", wrap(pi, iff(left, star(psi, F))));
    const char* label = universal ? "CT_all" : "CT_ex";
    int ct = b.axiom("CTcomp", label, ax::ct_instance(label, {quote(var(u)), quote(body)}));
    return b.ctx_taut(pi, {ct, e, vr}, claim_body(psi));
  }
};

Expr replace_term(const Expr& e, const Expr& from, const Expr& to) {
  if (alpha_eq(e, from)) return to;
  if (e->kind == Kind::Quote || e->kids.empty()) return e;
  std::vector<Expr> kids;
  for (auto& k : e->kids) kids.push_back(replace_term(k, from, to));
  return make(e->kind, e->name, std::move(kids));
}

struct TarskiNames {
  std::vector<std::string> vars, ys;
  std::string F, G;
  Expr assignment;
};

TarskiNames tarski_names(const Expr& phi) {
  TarskiNames n;
  std::set<std::string> used;
  all_vars(phi, used);
  n.F = fresh("f", used);
  used.insert(n.F);
  n.G = fresh("g", used);
  used.insert(n.G);
  // Free variables in order of first occurrence, matching the atomic axioms.
  std::vector<std::string> order;
  std::set<std::string> fv = free_vars(phi);
  std::function<void(const Expr&)> visit = [&](const Expr& e) {
    if (e->kind == Kind::Var && fv.count(e->name) && std::find(order.begin(), order.end(), e->name) == order.end())
      order.push_back(e->name);
    for (auto& k : e->kids) visit(k);
  };
  visit(phi);
  Expr a = cnst("emp");
  for (auto& v : order) {
    n.vars.push_back(v);
    std::string y = fresh("y" + std::to_string(n.ys.size()), used);
    used.insert(y);
    n.ys.push_back(y);
    a = app("put", {a, quote(var(v)), var(y)});
  }
  n.assignment = a;
  return n;
}

}  // namespace

Expr tarski_biconditional(const Expr& phi_in) {
  Expr phi = expand(phi_in);
  TarskiNames n = tarski_names(phi);
  std::map<std::string, Expr> s;
  Prefix py;
  for (std::size_t i = 0; i < n.vars.size(); ++i) {
    s[n.vars[i]] = var(n.ys[i]);
    py.push_back({n.ys[i], nullptr});
  }
  return wrap(py, iff(atom("Sat", {quote(phi), n.assignment}), substitute(phi, s)));
}

Generated generate_tarski(const Expr& phi_in) {
  Expr phi = expand(phi_in);
  if (!is_formula(phi) || !in_language(phi, Language::base())) throw LanguageError("not an L-formula: " + print(phi));
  TarskiNames n = tarski_names(phi);
  Generated g;
  g.theory = "CTrestr";
  Expr goal = tarski_biconditional(phi);
  // Atomic formulas over two distinct variables are the atomic axioms themselves.
  if (phi->kind == Kind::Atom && n.vars.size() == 2) {
    ProofBuilder b;
    b.axiom("CTcomp", phi->name == "=" ? "CT_eq" : "CT_in", goal);
    g.proof = b.take();
    return g;
  }
  Tarski t;
  t.F = n.F;
  t.G = n.G;
  int ih = t.prove(phi);
  ProofBuilder& b = t.b;
  Prefix py;
  for (auto& y : n.ys) py.push_back({y, nullptr});
  const Expr& A = n.assignment;
  int lifted = b.lift(py, ih);
  int inst = b.ctx_inst(py, lifted, A);
  std::vector<int> prem = {inst, b.base("assign", wrap(py, atom("VA", {A})))};
  Expr P = substitute(t.star(phi, n.F), n.F, A);
  for (std::size_t i = 0; i < n.vars.size(); ++i) {
    Expr at = app("at", {A, quote(var(n.vars[i]))});
    Expr e = eq(at, var(n.ys[i]));
    prem.push_back(b.base("assign", wrap(py, e)));
    Expr next = replace_term(P, at, var(n.ys[i]));
    prem.push_back(b.logic("eqsub", wrap(py, imp(e, imp(P, next)))));
    prem.push_back(b.logic("eqsub", wrap(py, imp(e, imp(next, P)))));
    P = next;
  }
  Expr body;
  ProofBuilder::unwrap(py, goal, body);
  b.ctx_taut(py, prem, body);
  g.proof = b.take();
  return g;
}

// --- iterated theorems ------------------------------------------------------------------

Expr iterated_goal(IterKind kind, unsigned n, const std::optional<Expr>& sigma) {
  if (n == 0) return ax::multiverse_zf();
  if (kind == IterKind::Con) return ax::con(con_name(n - 1));
  if (!sigma) throw std::invalid_argument("reflection goals need a sentence");
  return reflection_instance(ProvabilitySymbol::of(refl_name(n - 1)), expand(*sigma));
}

Generated generate_iterated(IterKind kind, unsigned n, const std::optional<Expr>& sigma_in) {
  if (n > iteration_limit()) throw ResourceError("iteration index " + std::to_string(n) + " exceeds the budget");
  Generated g;
  g.theory = kind == IterKind::Con ? "CM+NEC+NonTriviality" : kind == IterKind::Reflection ? "CM+NEC+MR" : "CM+Sigma1Abs+CONEC";
  ProofBuilder b;
  if (n == 0) {
    b.axiom("Multiverse_ZF", "Multiverse_ZF", ax::multiverse_zf());
    g.proof = b.take();
    return g;
  }
  int bs = box_set_zf(b);
  if (kind == IterKind::Con) {
    for (unsigned k = 1; k <= n; ++k) {
      std::string T = con_name(k - 1);
      int i = sound_instance(b, bs, T, bot());
      int cb = b.axiom("NonTriviality", "CMbox_bot", ax::box_lemma("CMbox_bot", {}));
      int c = b.taut_chain({i, cb}, ax::con(T));
      if (k == n) break;
      int nc = b.nec(c);
      int def = b.base("axset", ax::con_axset_def(k));
      bs = extend_box_set(b, bs, def, nc, con_name(k), quote(ax::con(T)));
    }
    g.proof = b.take();
    return g;
  }
  if (!sigma_in) throw std::invalid_argument("reflection generators need a sentence");
  Expr sigma = expand(*sigma_in);
  if (!is_sentence(sigma) || !in_language(sigma, Language::base())) throw LanguageError("sigma must be a sentence of L");
  std::string fam = kind == IterKind::Reflection ? "MR" : "Sigma1Abs";
  for (unsigned k = 1; k < n; ++k) bs = b.mp(b.axiom(fam, "ReflGen", ax::refl_step(k - 1)), bs);
  std::string T = refl_name(n - 1);
  int sound = sound_instance(b, bs, T, sigma);  // Pr.T(s) -> box(s)
  Expr pr = atom("Pr." + T, {quote(sigma)});
  Expr goal = imp(pr, sigma);
  if (kind == IterKind::Reflection) {
    int mr = b.axiom("MR", "MultiverseReflection", ax::multiverse_reflection(sigma));
    b.taut_chain({sound, mr}, goal);
  } else {
    Prefix pi = universe_prefix();
    Expr U = var("U"), f = var("f");
    int abs = b.axiom("Sigma1Abs", "Sigma1Abs", wrap(pi, iff(mod_of(pr), pr)));
    int cmimp = b.axiom("CMcomp", "CM_imp", ax::cm_instance("CM_imp", {quote(pr), quote(sigma)}));
    int lifted = b.lift(pi, sound);
    // Under the prefix, box(s) yields Mod(U, s, f) for the prefix variables.
    Expr boxed = ax::box(quote(sigma));
    Expr after_u = substitute(boxed->kids[0], boxed->name, U);  // Uni U -> forall f' (..)
    int i1 = b.logic("inst", wrap(pi, imp(boxed, after_u)));
    const Expr& fall = after_u->kids[1];
    int i2 = b.logic("inst", wrap(pi, imp(fall, substitute(fall->kids[0], fall->name, f))));
    int unbox = b.ctx_taut(pi, {i1, i2}, imp(boxed, mod_of(sigma)));
    int bx = b.ctx_taut(pi, {lifted, unbox, abs, cmimp}, mod_of(goal));
    b.conec(bx);
  }
  g.proof = b.take();
  return g;
}

// --- box lemmas -------------------------------------------------------------------------------

Generated generate_box_lemma(const std::string& label, const std::vector<Expr>& s_in) {
  std::vector<Expr> s;
  for (auto& x : s_in) s.push_back(expand(x));
  Generated g;
  g.theory = "CMminus";
  ProofBuilder b;
  Prefix pi = universe_prefix();
  Expr goal = ax::box_lemma(label, s);
  auto box = [](const Expr& x) { return ax::box(quote(x)); };
  if (label == "CMbox_imp") {
    const Expr &a = s[0], &c = s[1];
    int inst = b.axiom("CMcomp", "CM_imp", ax::cm_instance("CM_imp", {quote(a), quote(c)}));
    int t = b.ctx_taut(pi, {inst}, imp(mod_of(imp(a, c)), imp(mod_of(a), mod_of(c))));
    dist_chain(b, pi, t, 2);
  } else if (label == "CMbox_and") {
    const Expr &a = s[0], &c = s[1];
    int inst = b.axiom("CMcomp", "CM_and", ax::cm_instance("CM_and", {quote(a), quote(c)}));
    int l = dist_chain(b, pi, b.ctx_taut(pi, {inst}, imp(mod_of(conj(a, c)), mod_of(a))), 1);
    int r = dist_chain(b, pi, b.ctx_taut(pi, {inst}, imp(mod_of(conj(a, c)), mod_of(c))), 1);
    int back = dist_chain(b, pi, b.ctx_taut(pi, {inst}, imp(mod_of(a), imp(mod_of(c), mod_of(conj(a, c))))), 2);
    b.taut_chain({l, r, back}, goal);
  } else if (label == "CMbox_iff") {
    const Expr &a = s[0], &c = s[1];
    int inst = b.axiom("CMcomp", "CM_iff", ax::cm_instance("CM_iff", {quote(a), quote(c)}));
    int fw = dist_chain(b, pi, b.ctx_taut(pi, {inst}, imp(mod_of(iff(a, c)), imp(mod_of(a), mod_of(c)))), 2);
    int bw = dist_chain(b, pi, b.ctx_taut(pi, {inst}, imp(mod_of(iff(a, c)), imp(mod_of(c), mod_of(a)))), 2);
    b.taut_chain({fw, bw}, goal);
  } else if (label == "CMbox_bot") {
    g.theory = "CMminus+NonTriviality";
    int inst = b.axiom("CMcomp", "CM_bot", ax::cm_instance("CM_bot", {}));
    int t = b.ctx_taut(pi, {inst}, imp(mod_of(bot()), bot()));
    int d = dist_chain(b, pi, t, 1);
    int e = box_bot_elim(b);
    b.taut_chain({d, e}, goal);
  } else if (label == "CMbox_not" || label == "D_CM") {
    g.theory = "CMminus+NonTriviality";
    const Expr& a = s[0];
    int inst = b.axiom("CMcomp", "CM_not", ax::cm_instance("CM_not", {quote(a)}));
    int t = b.ctx_taut(pi, {inst}, imp(mod_of(neg(a)), imp(mod_of(a), bot())));
    int dc = dist_chain(b, pi, t, 2);
    int e = box_bot_elim(b);
    int nb = b.taut_chain({dc, e}, imp(box(neg(a)), neg(box(a))));
    if (label == "D_CM") {
      b.taut_chain({nb}, goal);
    }
  } else {
    throw std::invalid_argument("no generator for box lemma " + label);
  }
  g.proof = b.take();
  if (!alpha_eq(g.proof.last().formula, goal)) throw std::logic_error("box lemma generator missed its goal " + label);
  return g;
}

// --- arithmetic absoluteness ------------------------------------------------------

namespace {

struct ArithAbs {
  ProofBuilder b;
  std::set<std::string> used;

  std::string fresh_n() {
    std::string n = fresh("n", used);
    used.insert(n);
    return n;
  }

  static Prefix prefix(const std::vector<std::string>& ns) {
    Prefix pi = universe_prefix();
    for (auto& n : ns) pi.push_back({n, atom("Nat", {var(n)})});
    return pi;
  }

  static Expr mod(const Expr& phi, const Expr& env) { return atom("Mod", {var("U"), quote(phi), env}); }

  // wrap(pi, VAU(env, U)); -1 when env is f itself.
  int vau(const Prefix& pi, const std::vector<std::string>& xs, const std::vector<std::string>& ns) {
    if (xs.empty()) return -1;
    std::vector<int> facts;
    for (std::size_t j = 1; j <= xs.size(); ++j) {
      std::vector<std::string> px(xs.begin(), xs.begin() + j - 1), pn(ns.begin(), ns.begin() + j - 1);
      Expr prev = ax::arith_env(px, pn);
      Expr next = app("put", {prev, quote(var(xs[j - 1])), app("numin", {var(ns[j - 1]), var("U")})});
      facts.push_back(b.base("assign", wrap(pi, imp(atom("VAU", {prev, var("U")}),
                                                     imp(atom("Nat", {var(ns[j - 1])}), atom("VAU", {next, var("U")}))))));
    }
    return b.ctx_taut(pi, facts, atom("VAU", {ax::arith_env(xs, ns), var("U")}));
  }

  // From a universe-prefixed axiom wrap((U, f), X) derive wrap(pi, X[env/f]).
  int at_env(const Prefix& pi, int ax_id, const Expr& env, int vau_id) {
    Expr A = b.formula(ax_id);
    Expr a1 = substitute(A->kids[0], A->name, var("U"));
    const Expr& F = a1->kids[1];
    Expr a2 = substitute(F->kids[0], F->name, env);
    int l = b.lift(pi, ax_id);
    int i1 = b.logic("inst", wrap(pi, imp(A, a1)));
    int i2 = b.logic("inst", wrap(pi, imp(F, a2)));
    std::vector<int> prem = {l, i1, i2};
    if (vau_id >= 0) prem.push_back(vau_id);
    return b.ctx_taut(pi, prem, a2->kids[1]);
  }

  int cm(const std::string& label, const std::vector<Expr>& parts) {
    std::vector<Expr> codes;
    for (auto& x : parts) codes.push_back(quote(x));
    return b.axiom("CMcomp", label, ax::cm_instance(label, codes));
  }

  // Given an equivalence under pi + [m: g], derive under pi the equivalence of the bounded quantifications.
  int bounded_all(const Prefix& pi, int eq_id, const std::string& m, const Expr& g, const Expr& L, const Expr& R) {
    Prefix pm = pi;
    pm.push_back({m, g});
    int lr = b.ctx_taut(pm, {eq_id}, imp(L, R));
    int rl = b.ctx_taut(pm, {eq_id}, imp(R, L));
    int d1 = b.logic("dist", wrap(pi, imp(all(m, imp(g, imp(L, R))), imp(all(m, imp(g, L)), all(m, imp(g, R))))));
    int d2 = b.logic("dist", wrap(pi, imp(all(m, imp(g, imp(R, L))), imp(all(m, imp(g, R)), all(m, imp(g, L))))));
    return b.ctx_taut(pi, {lr, rl, d1, d2}, iff(all(m, imp(g, L)), all(m, imp(g, R))));
  }

  // Given an equivalence L <-> not R under pi + [m: g], derive
  // exists m (g & L) <-> not forall m (g -> R) under pi.
  int bounded_ex(const Prefix& pi, int eq_id, const std::string& m, const Expr& g, const Expr& L, const Expr& R) {
    Prefix p0 = pi;
    p0.push_back({m, nullptr});
    Expr nl = neg(conj(g, L)), gr = imp(g, R);
    int c1 = b.ctx_taut(p0, {eq_id}, imp(nl, gr));
    int c2 = b.ctx_taut(p0, {eq_id}, imp(gr, nl));
    int d1 = b.logic("dist", wrap(pi, imp(all(m, imp(nl, gr)), imp(all(m, nl), all(m, gr)))));
    int d2 = b.logic("dist", wrap(pi, imp(all(m, imp(gr, nl)), imp(all(m, gr), all(m, nl)))));
    int e = b.logic("ex", wrap(pi, iff(ex(m, conj(g, L)), neg(all(m, nl)))));
    return b.ctx_taut(pi, {c1, c2, d1, d2, e}, iff(ex(m, conj(g, L)), neg(all(m, gr))));
  }

  // wrap(prefix(ns), Mod(U, quote psi, env) <-> psi[n/x]).
  int prove(const Expr& psi, const std::vector<std::string>& xs, const std::vector<std::string>& ns) {
    Prefix pi = prefix(ns);
    Expr env = ax::arith_env(xs, ns);
    std::map<std::string, Expr> sub;
    for (std::size_t i = 0; i < xs.size(); ++i) sub[xs[i]] = var(ns[i]);
    auto inst = [&](const Expr& e) { return substitute(e, sub); };
    Expr goal = iff(mod(psi, env), inst(psi));
    switch (psi->kind) {
      case Kind::Atom:
        return b.axiom("ArithComp", "ArithAtomEnv", ax::arith_atom_env(psi, xs, ns));
      case Kind::Bot: case Kind::Top:
        return at_env(pi, cm(psi->kind == Kind::Bot ? "CM_bot" : "CM_top", {}), env, vau(pi, xs, ns));
      case Kind::Not: {
        int c = at_env(pi, cm("CM_not", {psi->kids[0]}), env, vau(pi, xs, ns));
        return b.ctx_taut(pi, {c, prove(psi->kids[0], xs, ns)}, goal);
      }
      case Kind::And: case Kind::Or: case Kind::Imp: case Kind::Iff: {
        const char* label = psi->kind == Kind::And ? "CM_and" : psi->kind == Kind::Or ? "CM_or" : psi->kind == Kind::Imp ? "CM_imp" : "CM_iff";
        int c = at_env(pi, cm(label, {psi->kids[0], psi->kids[1]}), env, vau(pi, xs, ns));
        return b.ctx_taut(pi, {c, prove(psi->kids[0], xs, ns), prove(psi->kids[1], xs, ns)}, goal);
      }
      case Kind::All: {
        const std::string& x = psi->name;
        const Expr& phi = psi->kids[0]->kids[1];
        std::string m = fresh_n();
        auto xs1 = xs, ns1 = ns;
        xs1.push_back(x);
        ns1.push_back(m);
        int ac = at_env(pi, b.axiom("ArithComp", "ArithComp", ax::arith_comp_instance(x, phi, m)), env, vau(pi, xs, ns));
        int ih = prove(phi, xs1, ns1);
        Expr env1 = ax::arith_env(xs1, ns1);
        Expr phi1 = substitute(phi, [&] { auto s2 = sub; s2[x] = var(m); return s2; }());
        int e = bounded_all(pi, ih, m, atom("Nat", {var(m)}), mod(phi, env1), phi1);
        return b.ctx_taut(pi, {ac, e}, goal);
      }
      case Kind::Ex: {
        const std::string& x = psi->name;
        const Expr& phi = psi->kids[0]->kids[1];
        Expr natx = psi->kids[0]->kids[0];
        Expr dual = all(x, imp(natx, neg(phi)));
        int vu = vau(pi, xs, ns);
        // Mod of the existential against Mod of its universal dual, pointwise over variants g.
        std::string gname = fresh("g", used);
        used.insert(gname);
        Expr g = var(gname);
        Expr A = atom("VAUfv", {g, var("U"), env, quote(var(x))});
        Prefix pg = pi;
        pg.push_back({gname, A});
        int vg = b.base("assign", wrap(pg, atom("VAU", {g, var("U")})));
        int c_and = at_env(pg, cm("CM_and", {natx, phi}), g, vg);
        int c_imp = at_env(pg, cm("CM_imp", {natx, neg(phi)}), g, vg);
        int c_not = at_env(pg, cm("CM_not", {phi}), g, vg);
        Expr P = mod(conj(natx, phi), g), Q = mod(imp(natx, neg(phi)), g);
        int pw = b.ctx_taut(pg, {c_and, c_imp, c_not}, iff(P, neg(Q)));
        int ex_e = at_env(pi, cm("CM_ex", {var(x), conj(natx, phi)}), env, vu);
        int all_e = at_env(pi, cm("CM_all", {var(x), imp(natx, neg(phi))}), env, vu);
        int q = bounded_ex(pi, pw, gname, A, P, Q);
        int dual_e = b.ctx_taut(pi, {ex_e, all_e, q}, iff(mod(psi, env), neg(mod(dual, env))));
        // The dual by Arithmetic Compositionality and the induction hypothesis.
        std::string m = fresh_n();
        auto xs1 = xs, ns1 = ns;
        xs1.push_back(x);
        ns1.push_back(m);
        Prefix pm = prefix(ns1);
        Expr env1 = ax::arith_env(xs1, ns1);
        int ac = at_env(pi, b.axiom("ArithComp", "ArithComp", ax::arith_comp_instance(x, neg(phi), m)), env, vu);
        int ih = prove(phi, xs1, ns1);
        int n1 = at_env(pm, cm("CM_not", {phi}), env1, vau(pm, xs1, ns1));
        Expr phi1 = substitute(phi, [&] { auto s2 = sub; s2[x] = var(m); return s2; }());
        int r1 = b.ctx_taut(pm, {n1, ih}, iff(phi1, neg(mod(neg(phi), env1))));
        int qm = bounded_ex(pi, r1, m, atom("Nat", {var(m)}), phi1, mod(neg(phi), env1));
        return b.ctx_taut(pi, {dual_e, ac, qm}, goal);
      }
      default: throw LanguageError("not an arithmetic formula: " + print(psi));
    }
  }
};

void all_names(const Expr& e, std::set<std::string>& out) {
  if (e->kind == Kind::Var || is_binder(e->kind)) out.insert(e->name);
  for (auto& k : e->kids) all_names(k, out);
}

}  // namespace

Generated generate_arith_abs(const Expr& sigma_in) {
  Expr sigma = expand(sigma_in);
  if (!is_sentence(sigma)) throw LanguageError("not a sentence: " + print(sigma));
  if (!is_arithmetic_sentence(sigma))
    throw LanguageError("not an arithmetic sentence: " + print(sigma));
  ArithAbs a;
  all_names(sigma, a.used);
  a.used.insert({"U", "f"});
  a.prove(sigma, {}, {});
  Generated g;
  g.theory = "CMminus+ArithComp";
  g.proof = a.b.take();
  return g;
}

// --- random MS-minus proofs ---------------------------------------------------------------

ProofScript random_ms_proof(unsigned seed, const RandomProofLimits& lim) {
  std::mt19937 rng(seed);
  auto pick = [&](std::size_t n) { return static_cast<std::size_t>(std::uniform_int_distribution<std::size_t>(0, n - 1)(rng)); };
  static const std::vector<Expr> samples = [] {
    std::vector<Expr> v;
    for (const char* s : {"(ex x (all y (not (in y x))))", "(all x (= x x))", "(ex U (Uni U))", "(all x (not (in x x)))"})
      v.push_back(parse_formula(s));
    return v;
  }();
  // Steps are appended directly: repeated formulas are part of the point (NEC after CONEC).
  ProofScript p;
  auto add = [&](Expr f, Justification j) {
    Step s;
    s.id = static_cast<int>(p.steps.size()) + 1;
    s.formula = std::move(f);
    s.just = std::move(j);
    p.steps.push_back(std::move(s));
    return p.steps.back().id;
  };
  auto rule = [](Rule r, std::vector<int> refs) {
    Justification j;
    j.rule = r;
    j.refs = std::move(refs);
    return j;
  };
  auto axiom = [&]() {
    Justification j;
    j.rule = Rule::Axiom;
    switch (pick(3)) {
      case 0:
        j.theory = "logic";
        j.schema = "eqrefl";
        return add(parse_formula("(all x (= x x))"), j);
      case 1:
        j.theory = "CMcomp";
        j.schema = "CM_not";
        return add(ax::cm_instance("CM_not", {quote(samples[pick(samples.size())])}), j);
      default:
        j.theory = "CMcomp";
        j.schema = "CM_and";
        return add(ax::cm_instance("CM_and", {quote(samples[pick(samples.size())]), quote(samples[pick(samples.size())])}), j);
    }
  };
  // Lines small enough to combine further.
  auto small_line = [&]() {
    std::vector<int> ok;
    for (auto& s : p.steps)
      if (print(s.formula).size() < 600) ok.push_back(s.id);
    return ok.empty() ? axiom() : ok[pick(ok.size())];
  };
  auto f = [&](int id) { return p.steps[static_cast<std::size_t>(id - 1)].formula; };
  int necs = 0, conecs = 0;
  axiom();
  while (static_cast<int>(p.steps.size()) < lim.max_steps) {
    int room = lim.max_steps - static_cast<int>(p.steps.size());
    switch (pick(7)) {
      case 0: axiom(); break;
      case 1: {
        Expr s = samples[pick(samples.size())];
        add(disj(s, neg(s)), rule(Rule::Taut, {}));
        break;
      }
      case 2: {  // x, y |- x & y
        if (room < 3) {
          axiom();
          break;
        }
        int x = small_line(), y = small_line();
        int t = add(imp(f(x), imp(f(y), conj(f(x), f(y)))), rule(Rule::Taut, {}));
        int m = add(imp(f(y), conj(f(x), f(y))), rule(Rule::MP, {t, x}));
        add(conj(f(x), f(y)), rule(Rule::MP, {m, y}));
        break;
      }
      case 3: {  // x & y |- x, or x |- y -> x
        if (room < 2) {
          axiom();
          break;
        }
        int x = small_line();
        if (f(x)->kind == Kind::And) {
          int t = add(imp(f(x), f(x)->kids[pick(2)]), rule(Rule::Taut, {}));
          add(f(t)->kids[1], rule(Rule::MP, {t, x}));
        } else {
          Expr y = samples[pick(samples.size())];
          int t = add(imp(f(x), imp(y, f(x))), rule(Rule::Taut, {}));
          add(imp(y, f(x)), rule(Rule::MP, {t, x}));
        }
        break;
      }
      case 4: case 5:
        if (necs < lim.max_nec) {
          int x = small_line();
          add(ax::box(quote(f(x))), rule(Rule::NEC, {x}));
          ++necs;
        }
        break;
      default: {
        if (conecs >= lim.max_conec) break;
        std::vector<int> boxes;
        for (auto& s : p.steps) {
          Expr code;
          if (match_trbox(s.formula, code) && code->kind == Kind::Quote && is_sentence(code->kids[0])) boxes.push_back(s.id);
        }
        if (boxes.empty()) break;
        int bx = boxes[pick(boxes.size())];
        Expr code;
        match_trbox(f(bx), code);
        add(code->kids[0], rule(Rule::CONEC, {bx}));
        ++conecs;
      }
    }
  }
  return p;
}

// --- demo corpus ----------------------------------------------------------------------------

std::vector<std::pair<std::string, Generated>> demo_corpus() {
  std::vector<std::pair<std::string, Generated>> out;
  out.emplace_back("liar-a", generate_liar(LiarVariant::A));
  out.emplace_back("liar-b", generate_liar(LiarVariant::B));
  Expr a = parse_formula("(ex x (all y (not (in y x))))"), c = parse_formula("(all x (= x x))");
  for (const char* l : {"CMbox_imp", "CMbox_and", "CMbox_iff"}) out.emplace_back(std::string("box-") + l, generate_box_lemma(l, {a, c}));
  out.emplace_back("box-CMbox_bot", generate_box_lemma("CMbox_bot", {}));
  out.emplace_back("box-CMbox_not", generate_box_lemma("CMbox_not", {a}));
  out.emplace_back("box-D_CM", generate_box_lemma("D_CM", {a}));
  out.emplace_back("tarski-all", generate_tarski(parse_formula("(all z (imp (in z x) (in z y)))")));
  for (unsigned n = 1; n <= 3; ++n) out.emplace_back("con-" + std::to_string(n), generate_iterated(IterKind::Con, n));
  for (unsigned n = 1; n <= 3; ++n)
    out.emplace_back("refl-" + std::to_string(n), generate_iterated(IterKind::Reflection, n, parse_formula("(ex x (= x x))")));
  out.emplace_back("arith-abs", generate_arith_abs(parse_formula("(all x (imp (Nat x) (ex y (and (Nat y) (Lt x y)))))")));
  for (unsigned n = 1; n <= 2; ++n)
    out.emplace_back("arith-" + std::to_string(n), generate_iterated(IterKind::Arith, n, parse_formula("(ex x (= x x))")));
  return out;
}

}  // namespace mk
