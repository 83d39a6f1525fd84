#include <gtest/gtest.h>

#include "mkernel/checker.hpp"
#include "mkernel/modal.hpp"
#include "mkernel/theories.hpp"

using namespace mk;

namespace {

TheoryDescriptor th(const std::string& n) { return Registry::standard().get(n); }

std::map<std::string, Expr> val() {
  return {{"p", parse_formula("(all x (= x x))")}, {"q", parse_formula("(ex x (in x x))")}};
}

}  // namespace

TEST(modal, parse_print_roundtrip) {
  for (const char* s : {"(imp (box (imp (box p) p)) (box p))", "(dia top)", "bot", "(iff p1 (not p2))"}) {
    EXPECT_EQ(print_modal(parse_modal(s)), s);
  }
  EXPECT_THROW(parse_modal("(box p q)"), ModalError);
  EXPECT_THROW(parse_modal("(nec p)"), ModalError);
  EXPECT_THROW(parse_modal("P"), ModalError);
  EXPECT_EQ(modal_depth(parse_modal("(box (and p (dia q)))")), 2);
}

TEST(modal, named_schemas) {
  EXPECT_TRUE(gl_valid(parse_modal("(imp (box (imp (box p) p)) (box p))")));
  EXPECT_TRUE(gl_valid(parse_modal("(imp (box (imp p q)) (imp (box p) (box q)))")));
  EXPECT_TRUE(gl_valid(parse_modal("(imp (box p) (box (box p)))")));
  EXPECT_FALSE(gl_valid(parse_modal("(imp (box p) p)")));
  EXPECT_FALSE(gl_valid(parse_modal("(dia top)")));
  EXPECT_FALSE(gl_valid(mbot()));
  // Second incompleteness in modal form: consistency is not provable.
  EXPECT_FALSE(gl_valid(parse_modal("(not (box bot))")));
  EXPECT_TRUE(gl_valid(parse_modal("(imp (not (box bot)) (not (box (not (box bot)))))")));
}

TEST(modal, countermodels) {
  auto t = gl_countermodel(parse_modal("(imp (box p) p)"));
  ASSERT_TRUE(t);
  EXPECT_LE(t->worlds, 2u);
  EXPECT_FALSE(t->holds(parse_modal("(imp (box p) p)"), t->root));
  auto d = gl_countermodel(parse_modal("(dia top)"));
  ASSERT_TRUE(d);
  EXPECT_EQ(d->worlds, 1u);
  EXPECT_TRUE(d->access.empty());
  EXPECT_TRUE(gl_countermodel(mbot()));
  EXPECT_FALSE(gl_countermodel(parse_modal("(imp (box (imp (box p) p)) (box p))")));
}

TEST(modal, deep_countermodel_from_tableau) {
  // Refuting box^5 bot needs a chain of six worlds.
  ModalFormula f = mbot();
  for (int i = 0; i < 5; ++i) f = mbox(f);
  EXPECT_FALSE(gl_valid(f));
  EXPECT_FALSE(brute_countermodel(f, 4));
  auto m = gl_countermodel(f);
  ASSERT_TRUE(m);
  EXPECT_TRUE(m->transitive());
  EXPECT_TRUE(m->irreflexive());
  EXPECT_FALSE(m->holds(f, m->root));
  EXPECT_EQ(m->worlds, 6u);
}

TEST(modal, tableau_agrees_with_exhaustive_search) {
  auto all = enumerate_modal(2, {"p"});
  EXPECT_GT(all.size(), 1000u);
  for (auto& f : all) {
    bool brute = !brute_countermodel(f, 4).has_value();
    ASSERT_EQ(gl_valid(f), brute) << print_modal(f);
  }
}

TEST(modal, dia_elimination_preserves_validity) {
  for (auto& f : enumerate_modal(2, {"p"})) {
    if (modal_depth(f) == 0) continue;
    ASSERT_EQ(gl_valid(f), gl_valid(eliminate_dia(f))) << print_modal(f);
  }
}

TEST(modal, embed_is_structural) {
  auto v = val();
  EXPECT_TRUE(alpha_eq(embed(parse_modal("(box p)"), v), ax::box(quote(v["p"]))));
  EXPECT_TRUE(alpha_eq(embed(parse_modal("(and p q)"), v), conj(v["p"], v["q"])));
  EXPECT_TRUE(alpha_eq(embed(parse_modal("(dia p)"), v), neg(ax::box(quote(neg(v["p"]))))));
  EXPECT_TRUE(alpha_eq(embed(parse_modal("(box (box q))"), v), ax::box(quote(ax::box(quote(v["q"]))))));
  EXPECT_THROW(embed(parse_modal("r"), v), ModalError);
  EXPECT_THROW(embed(parse_modal("p"), {{"p", parse_formula("(in x y)")}}), ModalError);
}

TEST(modal, k_instances_check) {
  auto v = val();
  for (auto [s, t] : std::vector<std::pair<const char*, const char*>>{
           {"p", "q"}, {"p", "p"}, {"(box p)", "(not q)"}, {"(imp p q)", "(dia p)"}}) {
    ModalFormula a = parse_modal(s), b = parse_modal(t);
    ProofScript pr = k_axiom_proof(a, b, v);
    CheckReport r = check(pr, th("CMminus"));
    EXPECT_TRUE(r.ok) << s << " " << t << "\n" << r.summary();
    EXPECT_TRUE(alpha_eq(pr.last().formula, embed(mimp(mbox(mimp(a, b)), mimp(mbox(a), mbox(b))), v)));
  }
}

TEST(modal, necessitation_side) {
  auto v = val();
  ModalFormula s = parse_modal("(imp p p)");
  ProofScript pr = necessitation_proof(s, v);
  EXPECT_TRUE(check(pr, th("MSminus")).ok);
  EXPECT_FALSE(check(pr, th("CMminus")).ok);
  EXPECT_TRUE(alpha_eq(pr.last().formula, embed(mbox(s), v)));
  EXPECT_THROW(necessitation_proof(parse_modal("p"), v), ModalError);
}
