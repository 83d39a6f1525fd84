#include <gtest/gtest.h>

#include "mkernel/coding.hpp"
#include "mkernel/theories.hpp"

using namespace mk;

namespace {

Expr F(const char* s) { return expand(parse_formula(s)); }

std::string label_of(const std::string& theory, const Expr& s) {
  auto m = is_axiom(Registry::standard().get(theory), s);
  return m ? m->label : "";
}

}  // namespace

TEST(Theories, CmAndExpanded) {
  Expr s = F("(all U (imp (Uni U) (all p (imp (Fml.L_UM p) (all q (imp (Fml.L_UM q) (all f (imp (VAU f U) "
             "(iff (Mod U (dand p q) f) (and (Mod U p f) (Mod U q f)))))))))))");
  EXPECT_EQ(label_of("CM", s), "CM_and");
}

TEST(Theories, NonTriviality) {
  EXPECT_EQ(label_of("CM+NonTriviality", F("(ex U (Uni U))")), "NonTriviality");
  EXPECT_EQ(label_of("CM", F("(ex U (Uni U))")), "");
}

TEST(Theories, LogicalAxiomIsNotNonlogical) { EXPECT_EQ(label_of("CM", F("(all x (= x x))")), ""); }

TEST(Theories, LanguageMismatchIsDistinctError) {
  const auto zf = Registry::standard().get("ZF");
  EXPECT_THROW(is_axiom(zf, F("(ex U (Uni U))")), LanguageError);
  EXPECT_THROW(is_axiom(zf, F("(= x 0)")), LanguageError);
}

TEST(Theories, ConHierarchy) {
  auto c0 = build_con_hierarchy(0);
  EXPECT_EQ(c0.family_names(), Registry::standard().get("ZF").family_names());
  auto c2 = build_con_hierarchy(2);
  EXPECT_EQ(is_axiom(c2, ax::con("ZF"))->label, "Con_ZF");
  EXPECT_EQ(is_axiom(c2, ax::con("Con1"))->label, "Con_Con1");
  EXPECT_FALSE(is_axiom(c2, ax::con("Con2")));
  EXPECT_TRUE(is_axiom(build_con_hierarchy(3), ax::con("Con2")));
}

TEST(Theories, HierarchiesAgreeAtZero) {
  auto zf = Registry::standard().get("ZF").family_names();
  EXPECT_EQ(build_r_hierarchy(0).family_names(), zf);
  EXPECT_EQ(build_gr_hierarchy(0).family_names(), Registry::standard().get("GR0").family_names());
  EXPECT_EQ(build_sp_hierarchy(0).family_names(), Registry::standard().get("GR0").family_names());
}

TEST(Theories, ReflectionInstances) {
  auto sym = ProvabilitySymbol::of("ZF");
  EXPECT_TRUE(alpha_eq(sym.con_sentence, neg(atom("Pr.ZF", {quote(bot())}))));
  Expr r = reflection_instance(sym, bot());
  EXPECT_TRUE(alpha_eq(r, imp(atom("Pr.ZF", {quote(bot())}), bot())));
  auto r2 = build_r_hierarchy(2);
  EXPECT_EQ(is_axiom(r2, r)->label, "R_ZF");
  Expr r1inst = reflection_instance(ProvabilitySymbol::of("R1"), F("(= 0 (S 0))"));
  EXPECT_EQ(is_axiom(r2, r1inst)->label, "R_R1");
  EXPECT_FALSE(is_axiom(build_r_hierarchy(1), r1inst));
  // Instances over L only.
  EXPECT_FALSE(is_axiom(r2, reflection_instance(sym, F("(ex x (Nat x))")))->label.empty());
}

TEST(Theories, GlobalReflection) {
  Expr g = global_reflection_axiom(ProvabilitySymbol::of("GR0"));
  EXPECT_EQ(label_of("GR1", g), "GR_GR0");
  EXPECT_EQ(label_of("GR0", g), "");
  // The quantifier is internal: no schematic metavariable remains.
  EXPECT_TRUE(is_sentence(g));
  EXPECT_THROW(global_reflection_axiom(ProvabilitySymbol::of("ZF"), Language::uni_mod()), LanguageError);
}

TEST(Theories, SeparationByLanguage) {
  Expr sat_sep = F("(all f (all a (ex b (all x (iff (in x b) (and (in x a) (Sat x f)))))))");
  EXPECT_EQ(label_of("CT", sat_sep), "Sep(L_Sat)");
  EXPECT_EQ(label_of("GR0", sat_sep), "Sep(L_Sat+)");
  EXPECT_THROW(label_of("ZF", sat_sep), LanguageError);
  Expr bad = F("(all a (ex b (all x (iff (in x b) (and (in x a) (in b x))))))");
  EXPECT_EQ(label_of("ZF", bad), "");
  Expr sat_rep = F("(all a (imp (all x (imp (in x a) (exu y (Sat x y)))) (ex b (all x (imp (in x a) (ex y (and (in y b) (Sat x y))))))))");
  EXPECT_EQ(label_of("CT", sat_rep), "Rep(L_Sat)");
  EXPECT_EQ(label_of("GR0", sat_rep), "");
}

TEST(Theories, CompositionalInstancesUseCodingNormalForm) {
  Expr a = parse_formula("(= 0 0)"), b = parse_formula("(in 0 0)");
  Expr inst = ax::cm_instance("CM_and", {quote(a), quote(b)});
  auto m = is_axiom(Registry::standard().get("CMminus"), inst);
  ASSERT_TRUE(m);
  EXPECT_EQ(m->label, "CM_and");
  EXPECT_TRUE(m->derived);
  // dand written out: same normal form, same match.
  Expr dotted = F("(all U (imp (Uni U) (all f (imp (VAU f U) (iff (Mod U (dand (quote (= 0 0)) (quote (in 0 0))) f) "
                  "(and (Mod U (quote (= 0 0)) f) (Mod U (quote (in 0 0)) f)))))))");
  EXPECT_EQ(label_of("CMminus", dotted), "CM_and");
  // Mismatched right side.
  Expr wrong = F("(all U (imp (Uni U) (all f (imp (VAU f U) (iff (Mod U (dand (quote (= 0 0)) (quote (in 0 0))) f) "
                 "(and (Mod U (quote (in 0 0)) f) (Mod U (quote (= 0 0)) f)))))))");
  EXPECT_EQ(label_of("CMminus", wrong), "");
}

TEST(Theories, CtAtomicAnyVariables) {
  Expr displayed = F("(all y0 (all y1 (iff (Sat (quote (in x y)) (put (put emp (quote x) y0) (quote y) y1)) (in y0 y1))))");
  EXPECT_EQ(label_of("CTrestr", displayed), "CT_in");
  Expr other = F("(all a (all b (iff (Sat (quote (= z w)) (put (put emp (quote z) a) (quote w) b)) (= a b))))");
  EXPECT_EQ(label_of("CTrestr", other), "CT_eq");
  Expr swapped = F("(all a (all b (iff (Sat (quote (= z w)) (put (put emp (quote z) a) (quote w) b)) (= b a))))");
  EXPECT_EQ(label_of("CTrestr", swapped), "");
}

TEST(Theories, BoxLemmasAndModalAxioms) {
  Expr a = parse_formula("(= 0 0)"), b = parse_formula("(in 0 0)");
  const auto& reg = Registry::standard();
  EXPECT_EQ(is_axiom(reg.get("CMminus"), ax::box_lemma("CMbox_iff", {a, b}))->label, "CMbox_iff");
  EXPECT_EQ(is_axiom(reg.get("CMminus+NonTriviality"), ax::box_lemma("CMbox_not", {a}))->label, "CMbox_not");
  EXPECT_FALSE(is_axiom(reg.get("CMminus"), ax::box_lemma("CMbox_not", {a})));
  for (const char* l : {"T_CM", "4_CM", "Lob_CM", "D_CM"}) {
    auto t = reg.get(std::string("CMminus+") + l);
    EXPECT_EQ(is_axiom_as(t, ax::modal_axiom(l, b), l, l)->label, l) << l;
  }
  EXPECT_FALSE(is_axiom(reg.get("CMminus+T_CM"), ax::modal_axiom("4_CM", a)));
}

TEST(Theories, CompFixedPointLoads) {
  auto t = Registry::standard().get("Comp_CM");
  auto fam = axiom_family("Comp");
  ASSERT_EQ(fam->recognizers.size(), 3u);
  for (auto& r : fam->recognizers) EXPECT_EQ(is_axiom(t, r.example)->label, r.label);
}

TEST(Theories, HilbertBernays) {
  Expr d2 = F("(imp (Pr.Con1 (dimp (quote (= 0 0)) (quote (in 0 0)))) (imp (Pr.Con1 (quote (= 0 0))) (Pr.Con1 (quote (in 0 0)))))");
  EXPECT_EQ(label_of("Con1", d2), "HB_D2");
  Expr d3 = F("(imp (Pr.ZF (quote (= 0 0))) (Pr.ZF (dpr.ZF (quote (= 0 0)))))");
  EXPECT_EQ(label_of("ZF", d3), "HB_D3");
}

TEST(Theories, AbsolutenessClasses) {
  const auto t = Registry::standard().get("CM+Sigma1Abs");
  Expr s1 = F("(ex n (and (Nat n) (= (S n) (S 0))))");
  Expr pi1 = F("(all n (imp (Nat n) (= n n)))");
  auto abs = [](const Expr& s) {
    return wrap(universe_prefix(), iff(atom("Mod", {var("U"), quote(s), var("f")}), s));
  };
  EXPECT_EQ(is_axiom(t, abs(s1))->label, "Sigma1Abs");
  EXPECT_FALSE(is_axiom(t, abs(pi1)));
  EXPECT_EQ(is_axiom(Registry::standard().get("CM+ArithAbs"), abs(pi1))->label, "ArithAbs");
  EXPECT_EQ(is_axiom(t, abs(F("(Pr.R1 (quote (= 0 0)))")))->label, "Sigma1Abs");
}

TEST(Theories, CoverageIsTotal) {
  const auto& reg = Registry::standard();
  auto rows = reg.coverage();
  EXPECT_GE(rows.size(), 50u);
  for (auto& row : rows) {
    SCOPED_TRACE(row.item);
    ASSERT_TRUE(reg.known(row.theory)) << row.theory;
    auto t = reg.get(row.theory);
    ASSERT_TRUE(t.has_family(row.family)) << row.family;
    auto fam = axiom_family(row.family);
    bool found = false;
    for (auto& r : fam->recognizers) {
      if (r.label != row.label) continue;
      found = true;
      ASSERT_TRUE(r.example);
      EXPECT_TRUE(is_axiom_as(t, r.example, row.family, row.label)) << print(r.example);
    }
    EXPECT_TRUE(found);
  }
}

TEST(Theories, EveryRecognizerAcceptsItsExample) {
  const auto& reg = Registry::standard();
  for (auto& name : reg.names()) {
    auto t = reg.get(name);
    for (auto& fam : t.families)
      for (auto& r : fam->recognizers) {
        if (!in_language(r.example, t.language)) continue;
        EXPECT_TRUE(r.match(r.example)) << name << " " << fam->name << "." << r.label;
      }
  }
}

TEST(Theories, Monotonicity) {
  const auto& reg = Registry::standard();
  std::vector<std::string> names = reg.names();
  for (auto n : {"Con1", "Con2", "R1", "R2", "GR1", "GR2", "SP1", "CMminus+NEC+T_CM"}) names.push_back(n);
  std::vector<Expr> samples;
  for (auto& n : names)
    for (auto& f : reg.get(n).families)
      for (auto& r : f->recognizers) samples.push_back(r.example);
  for (auto& a : names)
    for (auto& b : names) {
      if (!reg.subtheory(a, b)) continue;
      auto ta = reg.get(a), tb = reg.get(b);
      for (auto& s : samples) {
        if (!in_language(s, ta.language)) continue;
        if (is_axiom(ta, s)) EXPECT_TRUE(is_axiom(tb, s)) << a << " <= " << b << ": " << print(s);
      }
    }
}

TEST(Theories, ManifestParsing) {
  auto reg = Registry::parse("theory A lang=L families=ZF rules=MP\ntheory B parents=A families=HB rules=NEC\n");
  auto b = reg.get("B");
  EXPECT_TRUE(b.has_family("ZF"));
  EXPECT_TRUE(b.admits("MP") && b.admits("NEC"));
  EXPECT_TRUE(reg.subtheory("A", "B"));
  EXPECT_FALSE(reg.subtheory("B", "A"));
  EXPECT_THROW(Registry::parse("theory C parents=Nope\n"), RegistryError);
  EXPECT_THROW(Registry::parse("theory C families=Nope\n"), RegistryError);
  EXPECT_THROW(Registry::standard().get("Nope"), RegistryError);
  auto shipped = Registry::load(std::string(MKERNEL_DATA_DIR) + "/theories.manifest");
  EXPECT_EQ(shipped.names(), Registry::standard().names());
}

TEST(Theories, Composites) {
  auto t = Registry::standard().get("CMminus+NEC+T_CM");
  EXPECT_TRUE(t.admits("NEC"));
  EXPECT_FALSE(t.admits("CONEC"));
  EXPECT_TRUE(t.has_family("T_CM"));
  EXPECT_TRUE(t.has_family("CMcomp"));
  EXPECT_FALSE(Registry::standard().get("CM").admits("NEC"));
}
