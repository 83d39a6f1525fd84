#include <gtest/gtest.h>

#include <cstdio>

#include "mkernel/generators.hpp"
#include "mkernel/normalize.hpp"
#include "mkernel/theories.hpp"

using namespace mk;

namespace {

const TheoryDescriptor& ms() {
  static const TheoryDescriptor t = Registry::standard().get("MSminus");
  return t;
}

// Independent order predicate over the rule sequence.
bool ordered(const ProofScript& p) {
  bool seen_conec = false;
  for (auto& s : p.steps) {
    if (s.just.rule == Rule::CONEC) seen_conec = true;
    if (s.just.rule == Rule::NEC && seen_conec) return false;
  }
  return true;
}

bool has_macro(const ProofScript& p) {
  for (auto& s : p.steps)
    if (s.just.rule == Rule::Macro) return true;
  return false;
}

Expr sigma() { return parse_formula("(all x (= x x))"); }

}  // namespace

TEST(normalize, nec_conec_nec) {
  ProofBuilder b;
  int a = b.logic("eqrefl", sigma());
  int n = b.nec(a);
  int c = b.conec(n);
  (void)c;
  ProofScript p = b.take();
  // conec returns the axiom line by deduplication; force the shape by hand.
  Step s3{3, sigma(), {}};
  s3.just.rule = Rule::CONEC;
  s3.just.refs = {2};
  Step s4{4, ax::box(quote(sigma())), {}};
  s4.just.rule = Rule::NEC;
  s4.just.refs = {3};
  p.steps.push_back(s3);
  p.steps.push_back(s4);
  ASSERT_TRUE(check(p, ms()).ok) << check(p, ms()).summary();
  ASSERT_FALSE(ordered(p));
  ProofScript q = normalize(p, ms());
  EXPECT_TRUE(check(q, ms()).ok) << check(q, ms()).summary();
  EXPECT_TRUE(ordered(q));
  EXPECT_TRUE(nec_before_conec(q));
  EXPECT_TRUE(alpha_eq(q.last().formula, p.last().formula));
}

TEST(normalize, identity_on_normal_proofs) {
  Generated g = generate_liar(LiarVariant::A);
  auto th = Registry::standard().get(g.theory);
  ProofScript q = normalize(g.proof, th);
  ProofScript r = renumber(g.proof);
  ASSERT_EQ(q.steps.size(), r.steps.size());
  for (std::size_t i = 0; i < q.steps.size(); ++i) {
    EXPECT_EQ(q.steps[i].id, static_cast<int>(i + 1));
    EXPECT_TRUE(alpha_eq(q.steps[i].formula, r.steps[i].formula));
    EXPECT_EQ(q.steps[i].just.refs, r.steps[i].just.refs);
  }
}

TEST(normalize, propositional_mp_under_box_uses_macro) {
  // a and b come back from boxes by CONEC; their conjunction is then boxed again.
  Expr a = parse_formula("(ex U (Uni U))"), c = sigma();
  ProofBuilder b;
  int ia = b.axiom("CMcomp", "CM_not", ax::cm_instance("CM_not", {quote(a)}));
  int ic = b.logic("eqrefl", c);
  int na = b.nec(ia), nc = b.nec(ic);
  ProofScript p = b.take();
  auto add = [&](Expr f, Rule r, std::vector<int> refs) {
    Step s{p.last().id + 1, std::move(f), {}};
    s.just.rule = r;
    s.just.refs = std::move(refs);
    p.steps.push_back(s);
    return s.id;
  };
  Expr fa = p.find(ia)->formula, fc = c;
  int ca = add(fa, Rule::CONEC, {na});
  int cc = add(fc, Rule::CONEC, {nc});
  int t = add(imp(fa, imp(fc, conj(fa, fc))), Rule::Taut, {});
  int m1 = add(imp(fc, conj(fa, fc)), Rule::MP, {t, ca});
  int m2 = add(conj(fa, fc), Rule::MP, {m1, cc});
  add(ax::box(quote(conj(fa, fc))), Rule::NEC, {m2});
  ASSERT_TRUE(check(p, ms()).ok) << check(p, ms()).summary();
  ProofScript q = normalize(p, ms());
  CheckReport r = check(q, ms());
  EXPECT_TRUE(r.ok) << r.summary();
  EXPECT_TRUE(ordered(q));
  EXPECT_TRUE(has_macro(q));
  EXPECT_TRUE(alpha_eq(q.last().formula, p.last().formula));
}

TEST(normalize, rejects_uncheckable_input) {
  ProofScript p;
  Step s{1, parse_formula("(in x x)"), {}};
  s.just.rule = Rule::Taut;
  p.steps.push_back(s);
  EXPECT_THROW(normalize(p, ms()), NormalizeError);
}

TEST(normalize, random_proofs) {
  int non_normal = 0, routed = 0;
  for (unsigned seed = 1; seed <= 500; ++seed) {
    ProofScript p = random_ms_proof(seed);
    CheckReport pre = check(p, ms());
    ASSERT_TRUE(pre.ok) << seed << "\n" << to_text(p) << pre.summary();
    ASSERT_LE(pre.nec, 3);
    ASSERT_LE(pre.conec, 3);
    ASSERT_LE(p.steps.size(), 20u);
    if (!ordered(p)) ++non_normal;
    ProofScript q = normalize(p, ms());
    CheckReport post = check(q, ms());
    EXPECT_TRUE(post.ok) << seed << "\n" << to_text(p) << "---\n" << to_text(q) << post.summary();
    EXPECT_TRUE(ordered(q)) << seed;
    if (has_macro(q)) ++routed;
    EXPECT_TRUE(alpha_eq(q.last().formula, p.last().formula)) << seed;
  }
  EXPECT_GT(non_normal, 50);
  EXPECT_GT(routed, 20);
  std::printf("non-normal inputs: %d, outputs with soundness macros: %d\n", non_normal, routed);
}

TEST(normalize, nested_box_over_conec_inlines_macro) {
  Expr s = sigma();
  ProofScript p;
  auto add = [&](Expr f, Rule r, std::vector<int> refs, const char* th = "", const char* sc = "") {
    Step st{static_cast<int>(p.steps.size()) + 1, std::move(f), {}};
    st.just.rule = r;
    st.just.refs = std::move(refs);
    st.just.theory = th;
    st.just.schema = sc;
    p.steps.push_back(st);
    return st.id;
  };
  int a = add(s, Rule::Axiom, {}, "logic", "eqrefl");
  int n1 = add(ax::box(quote(s)), Rule::NEC, {a});
  int n2 = add(ax::box(quote(ax::box(quote(s)))), Rule::NEC, {n1});
  int c1 = add(ax::box(quote(s)), Rule::CONEC, {n2});
  int c2 = add(s, Rule::CONEC, {c1});
  Expr e = parse_formula("(ex U (Uni U))");
  int t = add(imp(s, disj(s, e)), Rule::Taut, {});
  int m = add(disj(s, e), Rule::MP, {t, c2});
  int n3 = add(ax::box(quote(disj(s, e))), Rule::NEC, {m});
  add(ax::box(quote(ax::box(quote(disj(s, e))))), Rule::NEC, {n3});
  ASSERT_TRUE(check(p, ms()).ok) << check(p, ms()).summary();
  ProofScript q = normalize(p, ms());
  CheckReport r = check(q, ms());
  EXPECT_TRUE(r.ok) << r.summary() << to_text(q);
  EXPECT_TRUE(ordered(q));
  EXPECT_TRUE(alpha_eq(q.last().formula, p.last().formula));
}
