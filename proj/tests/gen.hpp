// Random syntax generators shared by the property tests.
#pragma once

#include <random>
#include <string>
#include <vector>

#include "mkernel/syntax.hpp"

namespace mk::testgen {

inline const std::vector<std::string>& var_pool() {
  static const std::vector<std::string> v = {"x", "y", "z", "U", "f"};
  return v;
}

inline Expr rand_term(std::mt19937& rng, int d) {
  std::uniform_int_distribution<int> pick(0, d <= 1 ? 2 : 6);
  auto& vs = var_pool();
  switch (pick(rng)) {
    case 0: case 1: return var(vs[rng() % vs.size()]);
    case 2: return cnst("0");
    case 3: return app("S", {rand_term(rng, d - 1)});
    case 4: return app("+", {rand_term(rng, d - 1), rand_term(rng, d - 1)});
    case 5: return app("dneg", {rand_term(rng, d - 1)});
    default: return quote(eq(var(vs[rng() % vs.size()]), cnst("0")));
  }
}

inline Expr rand_formula(std::mt19937& rng, int d) {
  auto& vs = var_pool();
  std::uniform_int_distribution<int> pick(0, d <= 1 ? 3 : 13);
  switch (pick(rng)) {
    case 0: return mem(rand_term(rng, 2), rand_term(rng, 2));
    case 1: return eq(rand_term(rng, 2), rand_term(rng, 2));
    case 2: return atom("Uni", {rand_term(rng, 2)});
    case 3: return rng() % 2 ? bot() : top();
    case 4: return neg(rand_formula(rng, d - 1));
    case 5: return conj(rand_formula(rng, d - 1), rand_formula(rng, d - 1));
    case 6: return disj(rand_formula(rng, d - 1), rand_formula(rng, d - 1));
    case 7: return imp(rand_formula(rng, d - 1), rand_formula(rng, d - 1));
    case 8: return iff(rand_formula(rng, d - 1), rand_formula(rng, d - 1));
    case 9: return all(vs[rng() % vs.size()], rand_formula(rng, d - 1));
    case 10: return ex(vs[rng() % vs.size()], rand_formula(rng, d - 1));
    case 11: return atom("Mod", {rand_term(rng, 1), rand_term(rng, 2), rand_term(rng, 1)});
    case 12: return trbox(rand_term(rng, 2));
    default: return exu(vs[rng() % vs.size()], rand_formula(rng, d - 1));
  }
}

}  // namespace mk::testgen
