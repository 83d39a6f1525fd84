// Acceptance gate: one PASS/FAIL line per criterion. Exit status is nonzero if
// any criterion fails.
#include <chrono>
#include <cstdio>
#include <functional>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "mkernel/checker.hpp"
#include "mkernel/coding.hpp"
#include "mkernel/generators.hpp"
#include "mkernel/interpret.hpp"
#include "mkernel/modal.hpp"
#include "mkernel/normalize.hpp"
#include "mkernel/revision.hpp"
#include "mkernel/theories.hpp"

using namespace mk;

namespace {

TheoryDescriptor th(const std::string& n) { return Registry::standard().get(n); }

struct Outcome {
  bool pass = true;
  std::ostringstream detail;
  std::vector<std::string> problems;

  void fail(const std::string& why) {
    pass = false;
    if (problems.size() < 5) problems.push_back(why);
  }
  void require(bool cond, const std::string& why) {
    if (!cond) fail(why);
  }
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// --- 1: liar derivations ---------------------------------------------------------

void liar(Outcome& o, double& worst) {
  const std::map<LiarVariant, std::string> expected = {{LiarVariant::A, "CMminus+NEC+T_CM"},
                                                       {LiarVariant::B, "CMminus+NEC+NonTriviality+4_CM"}};
  for (auto& [v, theory] : expected) {
    auto t0 = std::chrono::steady_clock::now();
    Generated g = generate_liar(v);
    std::string tag = v == LiarVariant::A ? "liar-a" : "liar-b";
    o.require(g.theory == theory, tag + " theory is " + g.theory);
    CheckReport r = check(g.proof, th(theory));
    o.require(r.ok, tag + " rejected: " + r.summary());
    o.require(alpha_eq(g.proof.last().formula, bot()), tag + " does not end in bot");
    int named = liar_named_step(g);
    const Step* s = g.proof.find(named);
    o.require(s && s->just.rule == Rule::Axiom, tag + " named step is not an axiom");
    ProofScript cut;
    for (auto& st : g.proof.steps)
      if (st.id != named) cut.steps.push_back(st);
    o.require(!check(cut, th(theory)).ok, tag + " accepted without its named axiom");
    double t = seconds_since(t0);
    worst = std::max(worst, t);
    o.detail << tag << " ok, ablation of step " << named << " rejected; ";
  }
  o.require(worst < 1.0, "runtime above 1 s");
}

// --- 2: normalizer ---------------------------------------------------------------

void normalizer(Outcome& o) {
  const RandomProofLimits lim;
  int reordered = 0;
  for (unsigned seed = 1; seed <= 500; ++seed) {
    std::string tag = "seed " + std::to_string(seed);
    ProofScript p = random_ms_proof(seed, lim);
    CheckReport pre = check(p, th("MSminus"));
    if (!pre.ok || pre.nec > 3 || pre.conec > 3 || p.steps.size() > 20) {
      o.fail(tag + " input outside the generator contract");
      continue;
    }
    reordered += !nec_before_conec(p);
    ProofScript q;
    try {
      q = normalize(p, th("MSminus"));
    } catch (const std::exception& e) {
      o.fail(tag + " normalize threw: " + e.what());
      continue;
    }
    o.require(check(q, th("MSminus")).ok, tag + " output rejected");
    o.require(alpha_eq(q.last().formula, p.last().formula), tag + " conclusion changed");
    o.require(nec_before_conec(q), tag + " output not ordered");
  }
  o.detail << "500 proofs, " << reordered << " needed reordering";
}

// --- 3: translation ledgers --------------------------------------------------------

struct Counts {
  int nec = 0, conec = 0;
};

Counts count_rules(const ProofScript& p) {
  Counts c;
  for (auto& s : expand_macros(p).steps) {
    c.nec += s.just.rule == Rule::NEC;
    c.conec += s.just.rule == Rule::CONEC;
  }
  return c;
}

void ledgers(Outcome& o) {
  RevisionParams con = load_params(std::string(MKERNEL_DATA_DIR) + "/params/con.params");
  RevisionParams r = load_params(std::string(MKERNEL_DATA_DIR) + "/params/r.params");
  const std::set<std::string> must_translate = {"box-CMbox_imp", "box-CMbox_and", "box-CMbox_iff", "box-CMbox_bot",
                                                "box-CMbox_not", "box-D_CM",      "con-1",         "con-2",
                                                "con-3",         "refl-1",        "refl-2",        "refl-3"};
  std::set<std::string> translated, refused;
  int verified = 0;
  auto run = [&](const std::string& name, const ProofScript& proof, const std::string& theory, const RevisionParams& P,
                 unsigned a) -> bool {
    TranslationLedger L;
    try {
      L = main_lemma_transform(proof, P, a, th(theory));
    } catch (const LedgerError&) {
      return false;
    }
    std::string tag = name + " under " + P.name + " A'=" + std::to_string(a);
    CheckReport rep = verify_ledger(L, P);
    o.require(rep.ok, tag + " ledger rejected: " + rep.summary());
    Counts c = count_rules(proof);
    o.require(L.final.theory_abs == static_cast<unsigned>(2 * c.conec + c.nec + 1) + a, tag + " theory index");
    o.require(L.final.stage_abs == static_cast<unsigned>(c.nec + 1) + a, tag + " stage index");
    TranslationLedger back = parse_ledger(ledger_tsv(L), proof);
    o.require(back.final.theory_abs == L.final.theory_abs && back.rows.size() == L.rows.size(), tag + " tsv roundtrip");
    ++verified;
    return true;
  };
  for (auto& [name, g] : demo_corpus()) {
    bool any = false;
    for (const RevisionParams* P : {&con, &r})
      for (unsigned a : {1u, 2u}) any |= run(name, g.proof, g.theory, *P, a);
    (any ? translated : refused).insert(name);
  }
  for (auto& n : must_translate) o.require(translated.count(n), n + " not translated under any shipped parameters");
  for (auto& n : refused) o.require(!must_translate.count(n), n + " refused");
  int random_ok = 0;
  for (unsigned seed = 0; seed < 40; ++seed) {
    ProofScript p = normalize(random_ms_proof(seed), th("MSminus"));
    random_ok += run("random " + std::to_string(seed), p, "MSminus", r, 1 + seed % 2);
  }
  o.require(random_ok == 40, "normalized random proofs refused");
  o.detail << verified << " ledgers verified (" << translated.size() << " demo proofs, 40 normalized random proofs); "
           << refused.size() << " demo proofs outside the certified fragment refused:";
  for (auto& n : refused) o.detail << " " << n;
}

// --- 4: Tarski biconditionals ------------------------------------------------------

// Formulas over {x, y} built from in, = with not, and, all; atoms have depth 1.
std::vector<Expr> enumerate_l(unsigned depth) {
  std::vector<std::vector<Expr>> by(depth + 1);
  for (const char* p : {"in", "="})
    for (const char* a : {"x", "y"})
      for (const char* b : {"x", "y"}) by[1].push_back(parse_formula(std::string("(") + p + " " + a + " " + b + ")"));
  for (unsigned d = 2; d <= depth; ++d) {
    std::vector<Expr> lower;
    for (unsigned e = 1; e < d; ++e) lower.insert(lower.end(), by[e].begin(), by[e].end());
    std::size_t fresh_from = lower.size() - by[d - 1].size();
    for (auto& a : by[d - 1]) {
      by[d].push_back(neg(a));
      by[d].push_back(parse_formula("(all x " + print(a) + ")"));
      by[d].push_back(parse_formula("(all y " + print(a) + ")"));
    }
    for (std::size_t i = 0; i < lower.size(); ++i)
      for (std::size_t j = 0; j < lower.size(); ++j)
        if (i >= fresh_from || j >= fresh_from) by[d].push_back(conj(lower[i], lower[j]));
  }
  std::vector<Expr> out;
  for (auto& v : by) out.insert(out.end(), v.begin(), v.end());
  return out;
}

void tarski(Outcome& o) {
  std::vector<Expr> all = enumerate_l(3);
  for (auto& phi : all) {
    Generated g = generate_tarski(phi);
    CheckReport r = check(g.proof, th(g.theory));
    o.require(r.ok, print(phi) + " rejected: " + r.summary());
    o.require(alpha_eq(g.proof.last().formula, tarski_biconditional(phi)), print(phi) + " wrong conclusion");
  }
  o.detail << all.size() << " formulas";
}

// --- 5: revision simulator ---------------------------------------------------------

void revision(Outcome& o) {
  std::map<std::string, std::size_t> totals;
  for (std::uint32_t seed = 0; seed < 100; ++seed) {
    MultiverseState s = random_scenario(seed);
    bool shape = s.pool.size() <= 4;
    for (auto& M : s.pool) shape &= M.ordinary().size() <= 5 && M.quote_map.size() <= 30;
    o.require(shape, "seed " + std::to_string(seed) + " scenario too large");
    for (unsigned n = 1; n <= 10; ++n) {
      s = revise(s);
      StageReport r = check_stage_axioms(s);
      o.require(r.ok(), "seed " + std::to_string(seed) + ": " + r.summary());
      for (auto& [k, v] : r.checked) totals[k] += v;
    }
  }
  for (const char* schema : {"CM_eq", "CM_not", "CM_and", "CM_all", "CMbox_imp", "CMbox_and", "CMbox_iff", "CMbox_not",
                             "CMbox_bot", "CMdia", "D_CM"})
    o.require(totals[schema] > 0, std::string(schema) + " never exercised");
  MultiverseState liar = load_scenario(std::string(MKERNEL_DATA_DIR) + "/scenarios/liar.scn");
  const FiniteStructure& W = liar.pool[liar.designated];
  Expr lambda = W.quote_map.at(W.element("l"));
  std::vector<bool> v;
  for (unsigned n = 1; n <= 10; ++n) {
    liar = revise(liar);
    v.push_back(evaluate(liar, liar.designated, lambda));
  }
  for (std::size_t i = 1; i < v.size(); ++i) o.require(v[i] != v[i - 1], "liar value repeats at stage " + std::to_string(i + 1));
  CycleInfo c = find_cycle(load_scenario(std::string(MKERNEL_DATA_DIR) + "/scenarios/liar.scn"), 10);
  o.require(c.period == 2, "liar period " + std::to_string(c.period));
  o.detail << "100 scenarios x 10 stages;";
  for (auto& [k, n] : totals) o.detail << " " << k << "=" << n;
  o.detail << "; liar period " << c.period;
}

// --- 6: GL ---------------------------------------------------------------------------

void gl(Outcome& o) {
  auto all = enumerate_modal(2, {"p"});
  std::size_t valid = 0;
  for (auto& f : all) {
    bool v = gl_valid(f);
    valid += v;
    o.require(v == !brute_countermodel(f, 4).has_value(), "disagreement on " + print_modal(f));
  }
  for (const char* s : {"(imp (box (imp (box p) p)) (box p))", "(imp (box (imp (box q) q)) (box q))",
                        "(imp (box (imp p q)) (imp (box p) (box q)))", "(imp (box (imp (box p) (not p))) (imp (box (box p)) (box (not p))))"})
    o.require(gl_valid(parse_modal(s)), std::string(s) + " not valid");
  ModalFormula t = parse_modal("(imp (box p) p)");
  o.require(!gl_valid(t), "box p -> p valid");
  auto m = gl_countermodel(t);
  o.require(m && m->worlds <= 2 && m->transitive() && m->irreflexive() && !m->holds(t, m->root),
            "no small countermodel for box p -> p");
  o.detail << all.size() << " formulas, " << valid << " valid";
  if (m) o.detail << "; countermodel with " << m->worlds << " worlds";
}

// --- 7: iterated generators ------------------------------------------------------------

void iterated(Outcome& o, double& worst) {
  std::vector<std::optional<Expr>> sigmas = {parse_formula("(ex x (= x x))"), parse_formula("(all x (not (in x x)))"),
                                             parse_formula("(ex x (all y (not (in y x))))")};
  int n_proofs = 0;
  auto one = [&](IterKind k, unsigned n, const std::optional<Expr>& sigma, const std::string& tag) {
    auto t0 = std::chrono::steady_clock::now();
    Generated g = generate_iterated(k, n, sigma);
    CheckReport r = check(g.proof, th(g.theory));
    worst = std::max(worst, seconds_since(t0));
    o.require(r.ok, tag + " rejected: " + r.summary());
    o.require(alpha_eq(g.proof.last().formula, iterated_goal(k, n, sigma)), tag + " wrong conclusion");
    ++n_proofs;
  };
  for (unsigned n = 0; n <= 3; ++n) {
    one(IterKind::Con, n, std::nullopt, "con-" + std::to_string(n));
    for (std::size_t i = 0; i < sigmas.size(); ++i)
      one(IterKind::Reflection, n, sigmas[i], "refl-" + std::to_string(n) + " sigma " + std::to_string(i));
  }
  o.require(worst < 10.0, "a generator took 10 s or more");
  o.detail << n_proofs << " proofs";
}

// --- 8: diagonalization and the Mod families --------------------------------------------

std::vector<std::string> diagonal_corpus() {
  std::vector<std::string> base = {
      "(not (trbox x))",
      "(trbox x)",
      "(tr x)",
      "(not (tr x))",
      "(in x x)",
      "(= x x)",
      "(not (= x (quote bot)))",
      "(ex y (in y x))",
      "(all y (imp (in y x) (in x y)))",
      "(= x (quote (= (quote bot) (quote bot))))",
      "(and (trbox x) (trbox (quote (trbox (quote (not (trbox (quote bot))))))))",
      "(and (trbox x) (trbox (quote (trbox (quote bot)))))",
      "(imp (trbox x) (trbox (quote (not (trbox (quote (= (quote bot) (quote bot))))))))",
      "(or (tr x) (not (trbox x)))",
      "(iff (trbox x) (trdia x))",
      "(trdia x)",
      "(not (trdia x))",
      "(all U (imp (Uni U) (all f (imp (VAU f U) (Mod U x f)))))",
      "(ex U (and (Uni U) (ex f (and (VAU f U) (not (Mod U x f))))))",
      "(Uni x)",
      "(not (Uni x))",
      "(ex y (and (in y x) (trbox (quote (in y y)))))",
      "(= (quote (quote (in x x))) x)",
      "(and (not (trbox x)) (not (trbox (quote (not (trbox x))))))",
      "(imp (trbox (quote (imp (trbox (quote bot)) bot))) (tr x))",
  };
  std::vector<std::string> out;
  std::set<std::string> seen;
  auto add = [&](const std::string& text) {
    if (seen.insert(key(expand(parse_formula(text)))).second) out.push_back(text);
  };
  for (auto& b : base) add(b);
  for (std::size_t i = 0; out.size() < 50; ++i) {
    const std::string& a = base[i % base.size()];
    const std::string& b = base[(i * 7 + 3) % base.size()];
    std::string c = i % 2 ? "(imp " + a + " " + b + ")" : "(and " + a + " (not " + b + "))";
    add(c);
  }
  return out;
}

void diagonal(Outcome& o) {
  auto corpus = diagonal_corpus();
  std::set<std::string> distinct;
  for (auto& text : corpus) {
    Expr psi = expand(parse_formula(text));
    distinct.insert(key(psi));
    Diagonal d;
    try {
      d = diagonalize(psi);
    } catch (const std::exception& e) {
      o.fail(text + ": " + e.what());
      continue;
    }
    CheckReport r = check(d.proof, th("CMminus"));
    o.require(r.ok, text + " rejected: " + r.summary());
    o.require(alpha_eq(d.proof.last().formula, iff(d.lambda, substitute(psi, d.var, quote(d.lambda)))),
              text + " wrong conclusion");
  }
  o.require(distinct.size() == 50, "corpus has " + std::to_string(distinct.size()) + " distinct formulas");
  Expr uni = parse_formula("(and (Struct U) (imp (Lt 0 n) (Models.Con U (pred n))))");
  Expr mod0 = parse_formula("(and (Struct U) (SatL U p f))");
  int families = 0;
  for (const ModFamily& fam : {build_mod_family(uni, mod0, "UM"), build_mod_circ(uni, "UM")}) {
    for (unsigned k = 0; k <= 5; ++k) {
      std::string tag = std::string(fam.circ ? "circular" : "generic") + " k=" + std::to_string(k);
      ProofScript p = verify_dagger(fam, k);
      o.require(check(p, th("CMminus")).ok, tag + " rejected");
      Expr want = parse_formula("(all U (all p (all f " + print(iff(mod_stage(fam, k), dagger_rhs(fam, k))) + ")))");
      o.require(alpha_eq(p.last().formula, want), tag + " wrong conclusion");
    }
    ++families;
  }
  o.detail << corpus.size() << " fixed points; " << families << " Mod families, k = 0..5";
}

}  // namespace

int main() {
  struct Criterion {
    int id;
    const char* name;
    double limit;  // seconds, whole criterion
    std::function<void(Outcome&, double&)> run;
  };
  std::vector<Criterion> all = {
      {1, "liar derivations", 2.0, liar},
      {2, "normalizer soundness", 60.0, [](Outcome& o, double&) { normalizer(o); }},
      {3, "translation ledgers", 300.0, [](Outcome& o, double&) { ledgers(o); }},
      {4, "Tarski biconditionals", 120.0, [](Outcome& o, double&) { tarski(o); }},
      {5, "revision simulator", 60.0, [](Outcome& o, double&) { revision(o); }},
      {6, "GL decision", 30.0, [](Outcome& o, double&) { gl(o); }},
      {7, "iterated generators", 80.0, iterated},
      {8, "diagonalization", 30.0, [](Outcome& o, double&) { diagonal(o); }},
  };
  int failed = 0;
  for (auto& c : all) {
    Outcome o;
    double worst = 0;
    auto t0 = std::chrono::steady_clock::now();
    try {
      c.run(o, worst);
    } catch (const std::exception& e) {
      o.fail(std::string("exception: ") + e.what());
    }
    double t = seconds_since(t0);
    o.require(t < c.limit, "time limit exceeded");
    std::printf("CRITERION %d %s: %s (%.2f s) %s\n", c.id, o.pass ? "PASS" : "FAIL", c.name, t, o.detail.str().c_str());
    for (auto& p : o.problems) std::printf("    %s\n", p.c_str());
    if (worst > 0) std::printf("    slowest single item %.3f s\n", worst);
    std::fflush(stdout);
    failed += !o.pass;
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(all.size()) - failed, all.size());
  return failed ? 1 : 0;
}
