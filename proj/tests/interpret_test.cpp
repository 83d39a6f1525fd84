#include <gtest/gtest.h>

#include <random>

#include "gen.hpp"
#include "mkernel/generators.hpp"
#include "mkernel/interpret.hpp"
#include "mkernel/normalize.hpp"

using namespace mk;

namespace {

const RevisionParams& con_params() {
  static const RevisionParams p = load_params(std::string(MKERNEL_DATA_DIR) + "/params/con.params");
  return p;
}

const RevisionParams& r_params() {
  static const RevisionParams p = load_params(std::string(MKERNEL_DATA_DIR) + "/params/r.params");
  return p;
}

TheoryDescriptor th(const std::string& n) { return Registry::standard().get(n); }

Expr sigma() { return parse_formula("(all x (= x x))"); }

// sigma; NEC; optionally CONEC.
ProofScript nec_proof(bool with_conec) {
  ProofBuilder b;
  int a = b.logic("eqrefl", sigma());
  int n = b.nec(a);
  ProofScript p = b.take();
  if (with_conec) {
    Step s;
    s.id = 3;
    s.formula = sigma();
    s.just.rule = Rule::CONEC;
    s.just.refs = {n};
    p.steps.push_back(s);
  }
  return p;
}

bool mentions_uni_mod(const Expr& e) {
  auto s = symbols_of(e);
  return s.count("Uni") || s.count("Mod");
}

}  // namespace

TEST(interpret, apply_fixes_base_language) {
  Interpretation I = con_params().at(3);
  for (const char* f : {"(all x (in x x))", "(ex y (and (Nat y) (= y 0)))", "(Pr.ZF (quote (= 0 0)))"}) {
    Expr s = parse_formula(f);
    EXPECT_TRUE(alpha_eq(mk::apply(I, s), expand(s))) << f;
  }
  EXPECT_THROW(mk::apply(I, parse_formula("(Sat (quote (= 0 0)) emp)")), LanguageError);
}

TEST(interpret, apply_is_homomorphism) {
  std::mt19937 rng(7);
  Interpretation I = r_params().at(2);
  for (int i = 0; i < 300; ++i) {
    Expr a = expand(testgen::rand_formula(rng, 3)), b = expand(testgen::rand_formula(rng, 3));
    Expr ia = mk::apply(I, a), ib = mk::apply(I, b);
    EXPECT_FALSE(mentions_uni_mod(ia));
    EXPECT_TRUE(alpha_eq(mk::apply(I, conj(a, b)), conj(ia, ib)));
    EXPECT_TRUE(alpha_eq(mk::apply(I, imp(a, b)), imp(ia, ib)));
    EXPECT_TRUE(alpha_eq(mk::apply(I, neg(a)), neg(ia)));
    EXPECT_TRUE(alpha_eq(mk::apply(I, all("w", a)), all("w", ia)));
    EXPECT_TRUE(alpha_eq(mk::apply(I, ex("w", b)), ex("w", ib)));
  }
}

TEST(interpret, non_triviality_image) {
  for (unsigned k : {0u, 1u, 4u}) {
    const RevisionParams& P = con_params();
    Expr img = mk::apply(P.at(k), ax::non_triviality());
    EXPECT_TRUE(alpha_eq(img, ex("U", P.uni_at(k)))) << k;
  }
}

TEST(interpret, shift) {
  const RevisionParams& P = con_params();
  RevisionParams s = shift(P, 2);
  EXPECT_EQ(s.theory_name(0), P.theory_name(2));
  EXPECT_EQ(shift(shift(P, 1), 2).theory_name(1), shift(P, 3).theory_name(1));
  EXPECT_EQ(s.admitted, P.admitted);
  EXPECT_THROW(shift(P, 0), std::invalid_argument);
  Expr box = expand(trbox(quote(sigma())));
  for (unsigned k = 0; k < 4; ++k) {
    EXPECT_TRUE(alpha_eq(mk::apply(s.at(k), box), mk::apply(P.at(k + 2), box)));
    EXPECT_TRUE(alpha_eq(mk::apply(shift(s, 1).at(k), box), mk::apply(shift(P, 3).at(k), box)));
  }
}

TEST(interpret, admissibility) {
  EXPECT_EQ(con_params().admitted, (std::set<std::string>{kNecStar}));
  EXPECT_EQ(r_params().admitted, (std::set<std::string>{kNecStar, kConecStar, kReflStar}));
  RevisionParams bare = make_params("bare", "Con", con_params().uni, con_params().mod0, "UM", {}, {});
  EXPECT_TRUE(admissibility_check(bare).admitted.empty());
  RevisionParams half = make_params("half", "Con", con_params().uni, con_params().mod0, "UM", {kCompleteStar}, {});
  EXPECT_TRUE(admissibility_check(half).admitted.empty());
}

TEST(interpret, shipped_params_are_appropriate) {
  EXPECT_TRUE(appropriate_check(con_params()).empty());
  EXPECT_TRUE(appropriate_check(r_params()).empty());
  EXPECT_TRUE(appropriate_check(shift(r_params(), 2)).empty());
  RevisionParams odd = make_params("odd", "Con", parse_formula("(Struct U)"), parse_formula("(SatL U p f)"), "UM", {}, {});
  EXPECT_EQ(appropriate_check(odd).size(), 4u);  // item 6 and three guards of item 7
}

// Hand trace: axiom row at N=0 sits at stage 1, theory 1; the NEC row at
// N=1 needs stage 2 and, with C=0, theory 2.
TEST(interpret, axiom_then_nec) {
  TranslationLedger L = main_lemma_transform(nec_proof(false), r_params(), 0, th("MSminus"));
  ASSERT_EQ(L.rows.size(), 2u);
  EXPECT_EQ(L.rows[0].stage, 1u);
  EXPECT_EQ(L.rows[0].theory, 1u);
  EXPECT_EQ(L.rows[1].kind, LedgerCase::Nec);
  EXPECT_EQ(L.final.stage, 2u);
  EXPECT_EQ(L.final.theory, 2u);
  EXPECT_EQ(L.final.stage_abs, 2u);
  CheckReport r = verify_ledger(L, r_params());
  EXPECT_TRUE(r.ok) << r.summary();
}

TEST(interpret, nec_and_conec_indices) {
  for (unsigned a : {0u, 1u, 2u}) {
    TranslationLedger L = main_lemma_transform(nec_proof(true), r_params(), a, th("MSminus"));
    EXPECT_EQ(L.final.theory_abs, 2 * 1 + 1 + 1 + a);
    EXPECT_EQ(L.final.stage_abs, 1 + 1 + a);
    EXPECT_EQ(L.rows.back().kind, LedgerCase::Conec);
    EXPECT_EQ(L.rows.back().theory, 2u * 1 + 2);
    CheckReport r = verify_ledger(L, r_params());
    EXPECT_TRUE(r.ok) << r.summary();
  }
}

TEST(interpret, precondition_errors) {
  EXPECT_THROW(main_lemma_transform(nec_proof(true), con_params(), 1, th("MSminus")), LedgerError);
  ProofBuilder b;
  int a = b.logic("eqrefl", sigma());
  int n = b.nec(a);
  ProofScript p = b.take();
  Step c;
  c.id = 3;
  c.formula = sigma();
  c.just.rule = Rule::CONEC;
  c.just.refs = {n};
  p.steps.push_back(c);
  Step again = p.steps[1];
  again.id = 4;
  again.just.refs = {3};
  p.steps.push_back(again);
  ASSERT_TRUE(check(p, th("MSminus")).ok);
  EXPECT_THROW(main_lemma_transform(p, r_params(), 1, th("MSminus")), LedgerError);
  TranslationLedger L = main_lemma_transform(normalize(p, th("MSminus")), r_params(), 1, th("MSminus"));
  EXPECT_TRUE(verify_ledger(L, r_params()).ok);
}

TEST(interpret, pure_first_order_ledger) {
  Generated g = generate_box_lemma("CMbox_imp", {sigma(), parse_formula("(ex x (= x x))")});
  TranslationLedger L = main_lemma_transform(g.proof, con_params(), 1, th(g.theory));
  for (auto& r : L.rows) EXPECT_EQ(r.stage, 1u);
  EXPECT_EQ(L.final.stage, 1u);
  EXPECT_TRUE(verify_ledger(L, con_params()).ok);
}

TEST(interpret, demo_ledgers_verify) {
  std::map<std::string, const RevisionParams*> use = {
      {"con-1", &con_params()}, {"con-2", &con_params()}, {"refl-1", &r_params()}, {"refl-2", &r_params()},
      {"box-CMbox_not", &con_params()}};
  for (auto& [name, g] : demo_corpus()) {
    auto it = use.find(name);
    if (it == use.end()) continue;
    for (unsigned a : {1u, 2u}) {
      TranslationLedger L = main_lemma_transform(g.proof, *it->second, a, th(g.theory));
      CheckReport r = verify_ledger(L, *it->second);
      EXPECT_TRUE(r.ok) << name << " A'=" << a << "\n" << r.summary();
    }
  }
}

TEST(interpret, liar_is_not_translated) {
  for (auto v : {LiarVariant::A, LiarVariant::B}) {
    Generated g = generate_liar(v);
    EXPECT_THROW(main_lemma_transform(g.proof, con_params(), 1, th(g.theory)), LedgerError);
    EXPECT_THROW(main_lemma_transform(g.proof, r_params(), 1, th(g.theory)), LedgerError);
  }
}

TEST(interpret, tampering_fails) {
  Generated g = generate_iterated(IterKind::Con, 1);
  TranslationLedger L = main_lemma_transform(g.proof, con_params(), 1, th(g.theory));
  ASSERT_TRUE(verify_ledger(L, con_params()).ok);
  for (std::size_t i = 0; i < L.rows.size(); i += std::max<std::size_t>(1, L.rows.size() / 9)) {
    TranslationLedger m = L;
    m.rows[i].stage += 1;
    EXPECT_FALSE(verify_ledger(m, con_params()).ok) << i;
    m = L;
    m.rows[i].formula = neg(m.rows[i].formula);
    EXPECT_FALSE(verify_ledger(m, con_params()).ok) << i;
  }
  TranslationLedger m = L;
  m.final.theory_abs += 1;
  EXPECT_FALSE(verify_ledger(m, con_params()).ok);
  EXPECT_FALSE(verify_ledger(L, r_params()).ok);
}

TEST(interpret, random_normalized_proofs) {
  int conec_seen = 0;
  for (unsigned seed = 0; seed < 60; ++seed) {
    ProofScript p = normalize(random_ms_proof(seed), th("MSminus"));
    TranslationLedger L = main_lemma_transform(p, r_params(), 1 + seed % 2, th("MSminus"));
    conec_seen += L.final.conec > 0;
    CheckReport r = verify_ledger(L, r_params());
    EXPECT_TRUE(r.ok) << seed << "\n" << r.summary();
  }
  EXPECT_GT(conec_seen, 5);
}

// Logic and tautology rows are certified on the source because the image of a
// substitution instance is the same instance of the image.
TEST(interpret, apply_commutes_with_substitution) {
  std::mt19937 rng(11);
  Interpretation I = con_params().at(2);
  for (int i = 0; i < 300; ++i) {
    Expr a = expand(testgen::rand_formula(rng, 3));
    Expr t = testgen::rand_term(rng, 2);
    for (const char* x : {"x", "U", "f"}) {
      EXPECT_TRUE(alpha_eq(mk::apply(I, substitute(a, x, t)), substitute(mk::apply(I, a), x, t))) << print(a);
    }
  }
}

TEST(interpret, ledger_tsv_roundtrip) {
  Generated g = generate_iterated(IterKind::Reflection, 2, parse_formula("(ex x (= x x))"));
  TranslationLedger L = main_lemma_transform(g.proof, r_params(), 2, th(g.theory));
  std::string text = ledger_tsv(L);
  TranslationLedger back = parse_ledger(text, g.proof);
  EXPECT_EQ(ledger_tsv(back), text);
  EXPECT_TRUE(verify_ledger(back, r_params()).ok);
  std::string bad = text;
  bad.replace(bad.find("\tA'=2\t"), 6, "\tA'=3\t");
  EXPECT_THROW(parse_ledger(bad, g.proof), LedgerError);
  EXPECT_THROW(parse_ledger("step\tcase\n", g.proof), LedgerError);
}
