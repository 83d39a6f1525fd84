// Proof checking over sentences: logical axiom schemas, tautologies, theory
// axioms through the registry, the rules MP / Gen / Inst / NEC / CONEC /
// reflection, coding equations, PrIntro subproofs and the soundness macro.
#pragma once

#include <string>
#include <vector>

#include "mkernel/proof_script.hpp"
#include "mkernel/theories.hpp"

namespace mk {

struct CheckFailure {
  int step = 0;
  std::string reason;
};

struct CheckReport {
  bool ok = true;
  std::vector<CheckFailure> failures;
  int nec = 0;    // applications of NEC (either variant)
  int conec = 0;  // applications of CONEC (either variant)
  // Steps accepted through flagged recognizers (uniform reflection steps);
  // these are sound only relative to the recorded assumption.
  std::vector<int> flagged;

  std::string summary() const;
};

struct CheckOptions {
  const Registry* registry = &Registry::standard();
  // Sentences citable as `axiom hyp.<k>` (k is 0-based). Used by the soundness
  // macro expansion and by subproofs with hypotheses.
  std::vector<Expr> hypotheses;
  int max_depth = 8;  // nesting of PrIntro / macro subproofs
};

CheckReport check(const ProofScript& p, const TheoryDescriptor& theory, const CheckOptions& opts = {});

// Propositional validity with maximal non-propositional subformulas as atoms.
bool is_tautology(const Expr& f);
// A tautology under a block of universal quantifiers.
bool is_closed_tautology(const Expr& f);
// Logical axiom schemas: inst, vac, dist, eqrefl, eqsub, ex, exdist, swap.
// Accepted under any universal closure prefix. f must be expanded.
bool logic_axiom_ok(const std::string& schema, const Expr& f);
// Base facts: syntax, arith, axset, va.
bool base_fact_ok(const std::string& schema, const Expr& f, const Registry& reg, std::string* why = nullptr);

}  // namespace mk
