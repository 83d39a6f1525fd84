#include <gtest/gtest.h>

#include <random>

#include "gen.hpp"
#include "mkernel/coding.hpp"

using namespace mk;

namespace {

Expr phi() { return parse("(in x y)"); }
Expr psi() { return parse("(Uni z)"); }

// Independent evaluator for dotted terms: computes the coded syntax directly.
Expr oracle(const Expr& t) {
  if (t->kind == Kind::Quote) return t;
  auto q = [&](std::size_t i) { return decode(oracle(t->kids[i])); };
  if (t->name == "dneg") return quote(neg(q(0)));
  if (t->name == "dand") return quote(conj(q(0), q(1)));
  if (t->name == "dor") return quote(disj(q(0), q(1)));
  if (t->name == "dimp") return quote(imp(q(0), q(1)));
  if (t->name == "dall") return quote(all(q(0)->name, q(1)));
  if (t->name == "dsub") return quote(substitute(q(0), q(1)->name, q(2)));
  if (t->name == "dnum") return quote(oracle(t->kids[0]));
  throw std::logic_error("oracle: " + t->name);
}

Expr rand_code(std::mt19937& rng, int d) {
  std::uniform_int_distribution<int> pick(0, d <= 0 ? 0 : 5);
  switch (pick(rng)) {
    case 0: return quote(testgen::rand_formula(rng, 2));
    case 1: return app("dneg", {rand_code(rng, d - 1)});
    case 2: return app("dand", {rand_code(rng, d - 1), rand_code(rng, d - 1)});
    case 3: return app("dimp", {rand_code(rng, d - 1), rand_code(rng, d - 1)});
    case 4: return app("dall", {quote(var("x")), rand_code(rng, d - 1)});
    default: return app("dsub", {rand_code(rng, d - 1), quote(var("x")), quote(var("y"))});
  }
}

}  // namespace

TEST(coding, normalize_examples) {
  EXPECT_TRUE(alpha_eq(coding_normalize(app("dneg", {quote(phi())})), quote(neg(phi()))));
  EXPECT_TRUE(alpha_eq(coding_normalize(app("dand", {quote(phi()), quote(psi())})), quote(conj(phi(), psi()))));
  Expr s = app("dsub", {quote(phi()), quote(var("x")), quote(var("w"))});
  EXPECT_TRUE(alpha_eq(coding_normalize(s), quote(parse("(in w y)"))));
  EXPECT_TRUE(alpha_eq(coding_normalize(quote(phi())), quote(phi())));
  Expr nested = app("dnum", {quote(phi())});
  EXPECT_TRUE(alpha_eq(coding_normalize(nested), quote(quote(phi()))));
  EXPECT_FALSE(alpha_eq(quote(quote(phi())), quote(phi())));
}

TEST(coding, quote_connective_coding_equal) {
  EXPECT_TRUE(alpha_eq(coding_normalize(quote(neg(phi()))), coding_normalize(app("dneg", {quote(phi())}))));
  EXPECT_TRUE(alpha_eq(coding_normalize(quote(conj(phi(), psi()))),
                       coding_normalize(app("dand", {quote(phi()), quote(psi())}))));
}

TEST(coding, non_ground_rejected) {
  EXPECT_THROW(coding_normalize(app("dneg", {var("p")})), CodingError);
  Expr f = atom("Mod", {var("U"), app("dneg", {var("p")}), var("f")});
  EXPECT_TRUE(alpha_eq(normalize_formula(f), f));
}

TEST(coding, arithmetic_helpers) {
  EXPECT_TRUE(alpha_eq(coding_normalize(app("pred", {numeral(3)})), numeral(2)));
  EXPECT_TRUE(alpha_eq(coding_normalize(app("dnumeral", {numeral(2)})), quote(numeral(2))));
  EXPECT_EQ(*arith_value(app("+", {numeral(2), app("*", {numeral(3), numeral(4)})})), 14u);
}

TEST(coding, rules_file_matches_builtin) {
  auto f = CodingRules::load(std::string(MKERNEL_DATA_DIR) + "/coding.rules");
  const auto& s = CodingRules::standard();
  ASSERT_EQ(f.rules().size(), s.rules().size());
  for (std::size_t i = 0; i < f.rules().size(); ++i) {
    EXPECT_EQ(f.rules()[i].name, s.rules()[i].name);
    EXPECT_TRUE(alpha_eq(f.rules()[i].lhs, s.rules()[i].lhs));
    EXPECT_TRUE(alpha_eq(f.rules()[i].rhs, s.rules()[i].rhs));
  }
}

TEST(coding, ablated_rule_stops_rewriting) {
  auto r = CodingRules::standard().without("dneg");
  Expr t = app("dneg", {quote(phi())});
  EXPECT_TRUE(alpha_eq(coding_normalize(t, r), t));
}

TEST(coding, family_prefix_rule) {
  Expr t = app("dpr.ZF", {quote(phi())});
  EXPECT_TRUE(alpha_eq(coding_normalize(t), quote(atom("Pr.ZF", {quote(phi())}))));
}

TEST(coding_property, agrees_with_oracle_and_confluent) {
  std::mt19937 rng(5);
  for (int i = 0; i < 500; ++i) {
    Expr t = rand_code(rng, 5);
    if (size(t) > 200) continue;
    Expr a = coding_normalize(t);
    ASSERT_TRUE(alpha_eq(a, oracle(t))) << print(t);
    for (int j = 0; j < 3; ++j) ASSERT_TRUE(alpha_eq(coding_normalize_random(t, rng), a)) << print(t);
    ASSERT_FALSE(has_redex(a));
  }
}

TEST(coding_property, decode_quote_roundtrip) {
  std::mt19937 rng(9);
  for (int i = 0; i < 1000; ++i) {
    Expr s = testgen::rand_formula(rng, 1 + i % 6);
    ASSERT_EQ(decode(quote_of(s)), s);
  }
}

TEST(coding, diagonal_shape) {
  Expr p = parse("(not (trbox x))");
  Diagonal d = diagonalize(p);
  EXPECT_TRUE(is_sentence(d.lambda));
  Expr last = d.proof.last().formula;
  EXPECT_TRUE(alpha_eq(last, iff(d.lambda, substitute(expand(p), "x", quote(d.lambda)))));
  Expr s = app("dsub", {quote(d.delta), quote(var("x")), app("dnum", {quote(d.delta)})});
  EXPECT_TRUE(alpha_eq(coding_normalize(s), quote(d.lambda)));
  EXPECT_THROW(diagonalize(parse("(in x y)")), CodingError);
  EXPECT_THROW(diagonalize(parse("(in 0 0)")), CodingError);
}

TEST(coding, mod_family_unfolding) {
  Expr uni = parse("(and (Struct U) (imp (Lt 0 n) (Models.Con U (pred n))))");
  Expr mod0 = parse("(and (Struct U) (SatL U p f))");
  ModFamily fam = build_mod_family(uni, mod0, "UM");
  EXPECT_EQ(free_vars(fam.formula), (std::set<std::string>{"n", "U", "p", "f"}));
  Expr r0 = dagger_rhs(fam, 0);
  EXPECT_TRUE(alpha_eq(r0->kids[1]->kids[1]->kids[1], mod0));
  Expr r2 = dagger_rhs(fam, 2);
  Expr sat = r2->kids[1]->kids[1]->kids[1];
  ASSERT_EQ(sat->name, "SatX");
  EXPECT_TRUE(alpha_eq(sat->kids[1], quote(uni_stage(fam, 1))));
  EXPECT_TRUE(alpha_eq(sat->kids[2], quote(mod_stage(fam, 1))));
  ModFamily circ = build_mod_circ(uni, "UM");
  Expr rc = dagger_rhs(circ, 7);
  Expr csat = rc->kids[1]->kids[1]->kids[1];
  EXPECT_TRUE(alpha_eq(csat->kids[2], quote(circ.formula)));
  EXPECT_THROW(build_mod_family(parse("(Struct W)"), mod0, "UM"), CodingError);
}
