// Goedel quotation, the dotted syntactic functions as a rewrite system,
// diagonal fixed points and the revision families Mod_n / Mod-circ.
#pragma once

#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "mkernel/proof_script.hpp"
#include "mkernel/syntax.hpp"

namespace mk {

struct CodingError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct CodingRule {
  std::string name;  // head symbol of lhs
  Expr lhs;
  Expr rhs;
};

class CodingRules {
 public:
  static const CodingRules& standard();
  static CodingRules parse(std::string_view text);
  static CodingRules load(const std::string& path);

  CodingRules without(const std::string& name) const;
  const std::vector<CodingRule>& rules() const { return rules_; }
  // One rewrite at the root of t, if some rule matches.
  std::optional<Expr> rewrite_root(const Expr& t) const;

 private:
  std::vector<CodingRule> rules_;
};

// Text of the shipped rules file.
const char* standard_rules_text();

Expr quote_of(const Expr& s);
// Inverse of quote_of; throws CodingError if t is not a quote.
Expr decode(const Expr& t);

// Normal form of a ground coding term (innermost strategy).
Expr coding_normalize(const Expr& t, const CodingRules& rules = CodingRules::standard());
// Same normal form, reached by rewriting randomly chosen redexes.
Expr coding_normalize_random(const Expr& t, std::mt19937& rng,
                             const CodingRules& rules = CodingRules::standard());
// Normalize every ground dotted subterm outside quotes.
Expr normalize_formula(const Expr& e, const CodingRules& rules = CodingRules::standard());
// True when e has a ground subterm outside quotes that some rule rewrites.
bool has_redex(const Expr& e, const CodingRules& rules = CodingRules::standard());

struct Diagonal {
  std::string var;
  Expr delta;
  Expr lambda;
  ProofScript proof;  // ends with lambda <-> psi(quote lambda)
};

Diagonal diagonalize(const Expr& psi);

// Mod_n family of the revision construction. Free variables: n (stage),
// U (universe), p (formula code), f (assignment).
struct ModFamily {
  bool circ = false;
  std::string rev_lang;  // tag for the Fml.<tag> membership predicate
  Expr uni;              // Uni_n(U)
  Expr mod0;             // Mod_0(U, p, f); null for the circular family
  Expr body;             // right-hand side with self-reference slot variable z
  Expr delta;            // body with slot := dsub(z, quote z, dnum z)
  Expr formula;          // delta[quote delta / z]: the fixed point
};

ModFamily build_mod_family(const Expr& uni_formula, const Expr& mod0_formula, const std::string& rev_lang);
ModFamily build_mod_circ(const Expr& uni_formula, const std::string& rev_lang);

Expr uni_stage(const ModFamily& fam, unsigned k);
Expr mod_stage(const ModFamily& fam, unsigned k);
// Unfolded right-hand side at stage k, codes normalized and arithmetic resolved.
Expr dagger_rhs(const ModFamily& fam, unsigned k);
// forall U p f (Mod_k <-> dagger_rhs), by coding normalization and arithmetic facts.
ProofScript verify_dagger(const ModFamily& fam, unsigned k);

// Evaluates closed arithmetic terms built from 0, S, +, *, pred.
std::optional<unsigned long long> arith_value(const Expr& t);

}  // namespace mk
