#include <gtest/gtest.h>

#include "mkernel/revision.hpp"
#include "mkernel/theories.hpp"

using namespace mk;

namespace {

MultiverseState scenario(const std::string& name) {
  return load_scenario(std::string(MKERNEL_DATA_DIR) + "/scenarios/" + name);
}

bool liar_value(const MultiverseState& s) {
  const FiniteStructure& W = s.pool[s.designated];
  return evaluate(s, s.designated, W.quote_map.at(W.element("l")));
}

// Single structure {a, b} with a in b, coding the given sentences.
MultiverseState small(const std::vector<std::string>& sentences, bool universe = true) {
  std::string text = "structure M\nelements a b u";
  for (std::size_t i = 0; i < sentences.size(); ++i) text += " c" + std::to_string(i);
  text += "\nmember a b\n";
  text += universe ? "universe u M\n" : "denote u M\n";
  for (std::size_t i = 0; i < sentences.size(); ++i) text += "code c" + std::to_string(i) + " " + sentences[i] + "\n";
  return parse_scenario(text);
}

}  // namespace

TEST(revision, evaluate_basics) {
  MultiverseState s = small({"bot"}, false);
  EXPECT_FALSE(evaluate(s, 0, bot()));
  EXPECT_TRUE(evaluate(s, 0, parse_formula("(all x (= x x))")));
  EXPECT_TRUE(evaluate(s, 0, parse_formula("(ex x (ex y (in x y)))")));
  EXPECT_FALSE(evaluate(s, 0, parse_formula("(ex x (in x x))")));
  // Vacuous: no universes.
  EXPECT_TRUE(evaluate(s, 0, trbox(quote(bot()))));
  EXPECT_TRUE(evaluate(s, 0, expand(trbox(quote(bot())))));
  EXPECT_THROW(evaluate(s, 0, parse_formula("(in x y)")), RevisionError);
  EXPECT_TRUE(evaluate(s, 0, parse_formula("(in x y)"), {{"x", 0}, {"y", 1}}));
  EXPECT_THROW(evaluate(s, 0, parse_formula("(Nat x)"), {{"x", 0}}), RevisionError);
  // Uncoded quotes give false atoms.
  EXPECT_FALSE(evaluate(s, 0, parse_formula("(= (quote (= 0 0)) (quote (= 0 0)))")));
}

TEST(revision, stable_sentence) {
  MultiverseState s = small({"(ex x (ex y (in x y)))"});
  const FiniteStructure& M0 = s.pool[0];
  int u = M0.element("u"), c = M0.element("c0");
  EXPECT_FALSE(M0.mod(u, c, {}));
  for (int n = 1; n <= 5; ++n) {
    s = revise(s);
    EXPECT_EQ(s.stage, static_cast<unsigned>(n));
    EXPECT_TRUE(s.pool[0].mod(u, c, {})) << n;
    EXPECT_TRUE(evaluate(s, 0, trbox(quote(parse_formula("(ex x (ex y (in x y)))")))));
  }
}

TEST(revision, liar_alternates) {
  MultiverseState s = scenario("liar.scn");
  std::vector<bool> v;
  for (int n = 0; n <= 10; ++n) {
    v.push_back(liar_value(s));
    s = revise(s);
  }
  for (int n = 1; n + 2 <= 10; ++n) {
    EXPECT_EQ(v[n + 2], v[n]) << n;
    EXPECT_NE(v[n + 1], v[n]) << n;
  }
  CycleInfo c = find_cycle(scenario("liar.scn"), 10);
  EXPECT_EQ(c.period, 2u);
}

TEST(revision, positive_scenario_reaches_fixpoint) {
  MultiverseState s = scenario("truthteller.scn");
  CycleInfo c = find_cycle(s, 12);
  EXPECT_EQ(c.period, 1u);
  for (unsigned k = 0; k < c.preperiod; ++k) s = revise(s);
  EXPECT_EQ(table_signature(revise(s)), table_signature(s));
}

TEST(revision, dangling_universe_is_an_error) {
  EXPECT_THROW(parse_scenario("structure M\nelements u\nuniverse u N\n"), RevisionError);
  MultiverseState s = small({"bot"});
  s.pool[0].denotes[s.pool[0].element("u")] = 7;
  EXPECT_THROW(revise(s), RevisionError);
  EXPECT_THROW(parse_scenario("structure M\nelements u v\nuniverse u M\nuniverse v M\nschedule 2 M\nschedule 1 -\n"),
               RevisionError);
}

TEST(revision, externalize) {
  MultiverseState s = small({"bot"});
  const FiniteStructure& M = s.pool[0];
  FiniteStructure E = externalize(M, M.element("a"));
  EXPECT_TRUE(E.elements.empty());
  E = externalize(M, M.element("b"));
  EXPECT_EQ(E.elements, (std::vector<std::string>{"a"}));
  EXPECT_THROW(externalize(M, 99), RevisionError);
}

TEST(revision, externalize_tuples) {
  // r = {<x, y>} with <x, y> = {{x}, {x, y}}; also <x, x> = {{x}}.
  MultiverseState s = parse_scenario(
      "structure M\nelements x y sx sxy p sxx q r\n"
      "member x sx\nmember x sxy\nmember y sxy\nmember sx p\nmember sxy p\n"
      "member sx q\nmember p r\nmember q r\nmember y r\n");
  const FiniteStructure& M = s.pool[0];
  auto rel = externalize_tuples(M, M.element("r"), 2);
  int x = M.element("x"), y = M.element("y");
  std::set<std::vector<int>> got(rel.begin(), rel.end());
  EXPECT_EQ(got, (std::set<std::vector<int>>{{x, y}, {x, x}}));
}

TEST(revision, stage_zero_may_fail_and_later_stages_pass) {
  MultiverseState s = small({"(in a b)", "(not (in a b))", "bot"});
  FiniteStructure& M = s.pool[0];
  int u = M.element("u");
  M.internal_mod[{u, M.element("c0")}].insert(std::vector<int>{});
  M.internal_mod[{u, M.element("c1")}].insert(std::vector<int>{});
  StageReport r0 = check_stage_axioms(s);
  EXPECT_FALSE(r0.ok());
  for (int n = 1; n <= 4; ++n) {
    s = revise(s);
    StageReport r = check_stage_axioms(s);
    EXPECT_TRUE(r.ok()) << r.summary();
    EXPECT_GT(r.checked["CM_not"], 0u);
    EXPECT_GT(r.checked["CMbox_bot"], 0u);
  }
}

TEST(revision, empty_uni_skips_nontriviality_checks) {
  MultiverseState s = scenario("shrinking.scn");
  for (int n = 1; n <= 6; ++n) {
    s = revise(s);
    StageReport r = check_stage_axioms(s);
    EXPECT_TRUE(r.ok()) << r.summary();
    if (n >= 5) {
      EXPECT_TRUE(s.uni_pool.empty());
      EXPECT_FALSE(r.skipped.empty());
      EXPECT_EQ(r.checked.count("D_CM"), 0u);
      EXPECT_TRUE(evaluate(s, 0, trbox(quote(bot()))));
    }
  }
}

TEST(revision, soundness_closure) {
  Expr a = parse_formula("(ex x (ex y (in x y)))"), b = parse_formula("(ex x (= x x))");
  MultiverseState s = small({print(a), print(b), print(imp(a, b))});
  s = revise(s);
  StageReport r = soundness_closure_check(s, {a, b, imp(a, b)});
  EXPECT_TRUE(r.ok());
  EXPECT_EQ(r.checked["MP"], 1u);
  EXPECT_THROW(soundness_closure_check(s, {imp(a, b)}), RevisionError);
  // A false antecedent passes vacuously, even against a tampered table.
  Expr f = parse_formula("(ex x (in x x))");
  MultiverseState t = small({print(f), print(b), print(imp(f, b))});
  t = revise(t);
  FiniteStructure& M = t.pool[0];
  M.internal_mod.erase({M.element("u"), M.element("c1")});
  EXPECT_TRUE(soundness_closure_check(t, {f, b, imp(f, b)}).ok());
}

TEST(revision, tampering_is_reported) {
  MultiverseState s = small({"(in a b)", "(not (in a b))"});
  s = revise(s);
  FiniteStructure& M = s.pool[0];
  M.internal_mod[{M.element("u"), M.element("c1")}].insert(std::vector<int>{});
  StageReport r = check_stage_axioms(s);
  EXPECT_FALSE(r.ok()) << r.summary();
}

TEST(revision, random_scenarios) {
  for (std::uint32_t seed = 0; seed < 40; ++seed) {
    MultiverseState s = random_scenario(seed);
    ASSERT_LE(s.pool.size(), 4u);
    for (auto& M : s.pool) {
      EXPECT_LE(M.ordinary().size(), 5u);
      EXPECT_LE(M.quote_map.size(), 30u);
    }
    std::set<int> prev = s.uni_pool;
    for (int n = 1; n <= 10; ++n) {
      s = revise(s);
      EXPECT_TRUE(std::includes(prev.begin(), prev.end(), s.uni_pool.begin(), s.uni_pool.end()));
      prev = s.uni_pool;
      StageReport r = check_stage_axioms(s);
      ASSERT_TRUE(r.ok()) << "seed " << seed << " " << r.summary();
      if (s.uni_pool.empty())
        for (int i = 0; i < static_cast<int>(s.pool.size()); ++i)
          for (auto& [c, phi] : s.pool[i].quote_map)
            if (is_sentence(phi)) EXPECT_TRUE(evaluate(s, i, ax::box(quote(phi))));
    }
  }
}

TEST(revision, truth_table_is_deterministic) {
  MultiverseState s = revise(scenario("liar.scn"));
  EXPECT_EQ(truth_table_tsv(s, false), "1\tW\tw\tl\t-\ttrue\n");
  EXPECT_EQ(truth_table_tsv(revise(scenario("liar.scn")), true), truth_table_tsv(s, true));
  EXPECT_EQ(truth_table_tsv(revise(s), false), "2\tW\tw\tl\t-\tfalse\n");
}
