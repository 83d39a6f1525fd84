#include <gtest/gtest.h>

#include <random>

#include "gen.hpp"
#include "mkernel/syntax.hpp"

using namespace mk;

TEST(syntax, parse_examples) {
  Expr a = parse("(in x1 x2)");
  EXPECT_EQ(a->kind, Kind::Atom);
  EXPECT_EQ(a->name, "in");
  ASSERT_EQ(a->kids.size(), 2u);
  EXPECT_EQ(a->kids[0]->name, "x1");

  Expr b = parse("(all x1 (imp (Uni x1) (Mod x1 p f)))");
  EXPECT_EQ(b->kind, Kind::All);
  EXPECT_EQ(b->kids[0]->kind, Kind::Imp);
  EXPECT_EQ(b->kids[0]->kids[1]->name, "Mod");

  Expr c = parse("(not (= 0 (S 0)))");
  EXPECT_TRUE(alpha_eq(c, neg(eq(numeral(0), numeral(1)))));
}

TEST(syntax, parse_errors) {
  EXPECT_THROW(parse("(in x1"), ParseError);
  EXPECT_THROW(parse("(in x1 x2 x3)"), ParseError);
  EXPECT_THROW(parse("(frob x)"), ParseError);
  EXPECT_THROW(parse("(and (in x y))"), ParseError);
  EXPECT_THROW(parse("(not x)"), ParseError);
  try {
    parse("(Mod x y z)", Language::base());
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_NE(std::string(e.what()).find("not in language"), std::string::npos);
  }
  try {
    parse("(in x1 x2))");
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.pos, 10u);
  }
}

TEST(syntax, quote_contents_use_full_language) {
  Expr q = parse("(= x (quote (Uni y)))", Language::base());
  EXPECT_EQ(q->kids[1]->kind, Kind::Quote);
  EXPECT_TRUE(in_language(q, Language::base()));
}

TEST(syntax, substitute_examples) {
  Expr x = var("x"), y = var("y");
  EXPECT_TRUE(alpha_eq(substitute(mem(x, y), "x", numeral(0)), mem(numeral(0), y)));
  Expr bound = all("x", mem(x, y));
  EXPECT_EQ(print(substitute(bound, "x", numeral(0))), print(bound));
  Expr r = substitute(all("y", mem(x, y)), "x", y);
  ASSERT_EQ(r->kind, Kind::All);
  EXPECT_NE(r->name, "y");
  EXPECT_TRUE(alpha_eq(r, all("w", mem(y, var("w")))));
  EXPECT_EQ(free_vars(r), std::set<std::string>{"y"});
}

TEST(syntax, substitute_skips_quotes) {
  Expr q = eq(var("x"), quote(eq(var("x"), cnst("0"))));
  Expr r = substitute(q, "x", numeral(2));
  EXPECT_TRUE(alpha_eq(r->kids[1], q->kids[1]));
  EXPECT_TRUE(alpha_eq(r->kids[0], numeral(2)));
}

TEST(syntax, expand_examples) {
  Expr t = var("t");
  Expr e = expand(trbox(t));
  Expr want = all("U", imp(atom("Uni", {var("U")}),
                           all("f", imp(atom("VAU", {var("f"), var("U")}),
                                        atom("Mod", {var("U"), t, var("f")})))));
  EXPECT_TRUE(alpha_eq(e, want));
  EXPECT_TRUE(alpha_eq(expand(trdia(t)), neg(expand(trbox(app("dneg", {t}))))));
  Expr phi = mem(var("x"), var("a"));
  Expr u = expand(exu("x", phi));
  Expr want_u = ex("x", conj(phi, all("y", imp(mem(var("y"), var("a")), eq(var("x"), var("y"))))));
  EXPECT_TRUE(alpha_eq(u, want_u));
  Expr c;
  EXPECT_TRUE(match_trbox(e, c));
  EXPECT_TRUE(alpha_eq(c, t));
}

TEST(syntax, expand_avoids_capture) {
  Expr e = expand(trbox(var("U")));
  Expr c;
  ASSERT_TRUE(match_trbox(e, c));
  EXPECT_EQ(c->name, "U");
  EXPECT_EQ(free_vars(e), std::set<std::string>{"U"});
}

TEST(syntax, numerals) {
  unsigned n = 0;
  EXPECT_TRUE(numeral_value(numeral(5), n));
  EXPECT_EQ(n, 5u);
  EXPECT_TRUE(alpha_eq(parse("3"), numeral(3)));
  EXPECT_FALSE(numeral_value(var("x"), n));
}

TEST(syntax_property, print_parse_roundtrip) {
  std::mt19937 rng(7);
  for (int i = 0; i < 3000; ++i) {
    Expr f = testgen::rand_formula(rng, 1 + i % 6);
    Expr g = parse(print(f));
    ASSERT_TRUE(alpha_eq(f, g)) << print(f);
    ASSERT_EQ(key(f), key(g));
  }
}

TEST(syntax_property, substitute_free_variables) {
  std::mt19937 rng(11);
  for (int i = 0; i < 2000; ++i) {
    Expr f = testgen::rand_formula(rng, 1 + i % 6);
    Expr t = testgen::rand_term(rng, 2);
    auto before = free_vars(f);
    Expr g = substitute(f, "x", t);
    auto after = free_vars(g);
    std::set<std::string> want = before;
    if (before.count("x")) {
      want.erase("x");
      auto ft = free_vars(t);
      want.insert(ft.begin(), ft.end());
    }
    ASSERT_EQ(after, want) << print(f) << " / " << print(t);
  }
}

TEST(syntax_property, expand_idempotent_and_closed) {
  std::mt19937 rng(13);
  for (int i = 0; i < 2000; ++i) {
    Expr f = testgen::rand_formula(rng, 1 + i % 6);
    Expr e = expand(f);
    ASSERT_TRUE(alpha_eq(expand(e), e));
    ASSERT_EQ(free_vars(e), free_vars(f)) << print(f);
  }
}

TEST(syntax_property, alpha_key_agrees_with_renaming) {
  std::mt19937 rng(17);
  for (int i = 0; i < 1000; ++i) {
    Expr body = testgen::rand_formula(rng, 4);
    Expr a = all("x", body);
    Expr b = all("q", substitute(body, "x", var("q")));
    if (free_vars(body).count("q")) continue;
    ASSERT_TRUE(alpha_eq(a, b));
    ASSERT_EQ(key(a), key(b));
  }
}
