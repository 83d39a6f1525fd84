#include <gtest/gtest.h>

#include "mkernel/checker.hpp"
#include "mkernel/coding.hpp"
#include "mkernel/generators.hpp"
#include "mkernel/soundness.hpp"
#include "mkernel/theories.hpp"

using namespace mk;

namespace {

CheckReport run(const Generated& g) { return check(g.proof, Registry::standard().get(g.theory)); }
CheckReport run(const ProofScript& p, const std::string& th) { return check(p, Registry::standard().get(th)); }

ProofScript script(const std::string& text) { return parse_proof(text); }

Expr sentence_a() { return parse_formula("(ex x (all y (not (in y x))))"); }
Expr sentence_b() { return parse_formula("(all x (= x x))"); }

}  // namespace

TEST(checker, accepts_small_proofs) {
  auto p = script(
      "step 1: (all z (= z z)) ; axiom logic.eqrefl\n"
      "step 2: (imp (all z (= z z)) (not (not (all z (= z z))))) ; taut\n"
      "step 3: (not (not (all z (= z z)))) ; mp 2 1\n");
  EXPECT_TRUE(run(p, "ZF").ok) << run(p, "ZF").summary();
}

TEST(checker, empty_proof_fails) { EXPECT_FALSE(run(ProofScript{}, "ZF").ok); }

TEST(checker, nec_relabeled_as_mp_fails) {
  ProofBuilder b;
  int t = b.taut(parse_formula("(all x (imp (in x x) (in x x)))"));
  b.nec(t);
  ProofScript p = b.take();
  ASSERT_TRUE(run(p, "CMminus+NEC").ok) << run(p, "CMminus+NEC").summary();
  p.steps.back().just.rule = Rule::MP;
  p.steps.back().just.refs = {t, t};
  EXPECT_FALSE(run(p, "CMminus+NEC").ok);
  EXPECT_FALSE(run(b.script(), "CMminus").ok);
}

TEST(checker, diagonal_proofs_check) {
  for (const char* psi : {"(not (trbox x))", "(in x x)", "(tr x)"}) {
    Diagonal d = diagonalize(expand(parse_formula(psi)));
    CheckReport r = run(d.proof, "CMminus");
    EXPECT_TRUE(r.ok) << psi << "\n" << r.summary();
  }
}

TEST(checker, box_is_universe_closure) {
  Expr c = quote(sentence_a());
  Expr direct = wrap(universe_prefix(), atom("Mod", {var("U"), c, var("f")}));
  EXPECT_TRUE(alpha_eq(direct, ax::box(c)));
}

TEST(generators, liar_variants_derive_bottom) {
  for (auto v : {LiarVariant::A, LiarVariant::B}) {
    Generated g = generate_liar(v);
    CheckReport r = run(g);
    EXPECT_TRUE(r.ok) << r.summary();
    EXPECT_TRUE(alpha_eq(g.proof.last().formula, bot()));
  }
}

TEST(generators, liar_ablation_fails) {
  for (auto v : {LiarVariant::A, LiarVariant::B}) {
    Generated g = generate_liar(v);
    int named = liar_named_step(g);
    ASSERT_GT(named, 0);
    ProofScript cut;
    for (auto& s : g.proof.steps)
      if (s.id != named) cut.steps.push_back(s);
    EXPECT_FALSE(run(cut, g.theory).ok);
    std::string weaker = v == LiarVariant::A ? "CMminus+NEC" : "CMminus+NEC+NonTriviality";
    EXPECT_FALSE(run(g.proof, weaker).ok);
  }
}

TEST(generators, box_lemmas_check) {
  std::vector<std::pair<std::string, std::vector<Expr>>> cases = {
      {"CMbox_imp", {sentence_a(), sentence_b()}}, {"CMbox_and", {sentence_a(), sentence_b()}},
      {"CMbox_iff", {sentence_a(), sentence_b()}}, {"CMbox_bot", {}},
      {"CMbox_not", {sentence_a()}},               {"D_CM", {sentence_b()}}};
  for (auto& [label, ss] : cases) {
    Generated g = generate_box_lemma(label, ss);
    CheckReport r = run(g);
    EXPECT_TRUE(r.ok) << label << "\n" << r.summary();
    EXPECT_TRUE(alpha_eq(g.proof.last().formula, ax::box_lemma(label, ss))) << label;
  }
}

TEST(generators, tarski_examples) {
  for (const char* f : {"(in x y)", "(in y x)", "(= y x)", "(= x x)", "(not (in x y))", "(and (in x y) (= y x))", "(all z (imp (in z x) (in z y)))",
                        "(ex z (in z x))", "(all x (in x x))", "(all x (ex y (in x y)))"}) {
    Expr phi = parse_formula(f);
    Generated g = generate_tarski(phi);
    CheckReport r = run(g);
    EXPECT_TRUE(r.ok) << f << "\n" << r.summary();
    EXPECT_TRUE(alpha_eq(g.proof.last().formula, tarski_biconditional(phi))) << f;
  }
}

TEST(generators, iterated) {
  Expr sigma = parse_formula("(ex x (= x x))");
  for (unsigned n = 0; n <= 3; ++n) {
    for (auto k : {IterKind::Con, IterKind::Reflection, IterKind::Arith}) {
      Generated g = generate_iterated(k, n, sigma);
      CheckReport r = run(g);
      EXPECT_TRUE(r.ok) << n << " " << static_cast<int>(k) << "\n" << r.summary();
      EXPECT_TRUE(alpha_eq(g.proof.last().formula, iterated_goal(k, n, sigma)));
    }
  }
}

TEST(soundness, macro_examples) {
  Expr a = sentence_a(), c = sentence_b();
  std::vector<Expr> prem = {ax::box(quote(a)), ax::box(quote(imp(a, c)))};
  ProofScript sub = propositional_subproof({a, imp(a, c)}, c);
  ProofScript out = soundness_macro(prem, sub);
  CheckOptions o;
  o.hypotheses = prem;
  CheckReport r = check(out, Registry::standard().get("CMminus"), o);
  EXPECT_TRUE(r.ok) << r.summary();
  EXPECT_TRUE(alpha_eq(out.last().formula, ax::box(quote(c))));
}

TEST(generators, arithmetic_absoluteness) {
  for (const char* f : {"(= (S 0) (S 0))", "(not (= 0 (S 0)))", "(all x (imp (Nat x) (= x x)))",
                        "(ex x (and (Nat x) (= (S x) (S (S 0)))))",
                        "(all x (imp (Nat x) (ex y (and (Nat y) (Lt x y)))))", "(and (all x (imp (Nat x) (Nat x))) (not (= 0 0)))"}) {
    Expr sigma = parse_formula(f);
    Generated g = generate_arith_abs(sigma);
    CheckReport r = run(g);
    EXPECT_TRUE(r.ok) << f << "\n" << r.summary();
    EXPECT_TRUE(alpha_eq(g.proof.last().formula, ax::absoluteness(sigma))) << f;
    EXPECT_TRUE(r.flagged.empty());
  }
  EXPECT_THROW(generate_arith_abs(parse_formula("(all x (= x x))")), LanguageError);
}

TEST(checker, base_fact_negatives) {
  auto ok = [](const char* schema, const char* f) { return base_fact_ok(schema, expand(parse_formula(f)), Registry::standard(), nullptr); };
  EXPECT_TRUE(ok("assign", "(VA (put emp (quote x) 0))"));
  EXPECT_FALSE(ok("assign", "(all g (VA g))"));
  EXPECT_TRUE(ok("assign", "(= (at (put (put emp (quote x) 0) (quote y) (S 0)) (quote x)) 0)"));
  EXPECT_FALSE(ok("assign", "(= (at (put (put emp (quote x) 0) (quote y) (S 0)) (quote y)) 0)"));
  EXPECT_TRUE(ok("assign", "(all g (all h (imp (VAfv h g (quote x)) (= (at h (quote y)) (at g (quote y))))))"));
  EXPECT_FALSE(ok("assign", "(all g (all h (imp (VAfv h g (quote x)) (= (at h (quote x)) (at g (quote x))))))"));
  EXPECT_TRUE(ok("variant", "(all F (iff (all G (imp (VAfv G F (quote x)) (in (at G (quote x)) (at G (quote y))))) "
                            "(all x (in x (at F (quote y))))))"));
  // The rewritten variable may not be captured or already free.
  EXPECT_FALSE(ok("variant", "(all F (iff (all G (imp (VAfv G F (quote x)) (in (at G (quote x)) x))) (all x (in x x))))"));
  EXPECT_FALSE(ok("variant", "(all F (iff (all G (imp (VAfv G F (quote x)) (in G (at G (quote y))))) (all x (in G (at F (quote y))))))"));
  EXPECT_FALSE(ok("nonsense", "(= 0 0)"));
}

TEST(checker, mutated_steps_fail) {
  for (auto& [name, g] : demo_corpus()) {
    ASSERT_TRUE(run(g).ok) << name << "\n" << run(g).summary();
    std::size_t stride = std::max<std::size_t>(1, g.proof.steps.size() / 7);
    for (std::size_t i = 0; i < g.proof.steps.size(); i += stride) {
      ProofScript m = g.proof;
      m.steps[i].formula = neg(m.steps[i].formula);
      EXPECT_FALSE(run(m, g.theory).ok) << name << " step " << m.steps[i].id;
    }
  }
}
