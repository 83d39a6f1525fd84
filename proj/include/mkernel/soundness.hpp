// Internalizing propositional reasoning under the multiverse box: from
// Tr-box premises and a propositional derivation build a CM-minus proof of the
// boxed conclusion.
#pragma once

#include <stdexcept>
#include <vector>

#include "mkernel/proof_script.hpp"

namespace mk {

struct MacroError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// premises[k] must be the expanded trbox of the k-th hypothesis cited by
// fo_subproof as `axiom hyp.<k>`. fo_subproof may use hyp, taut and mp only.
// The result cites the premises as `axiom hyp.<k>` and ends in trbox(quote theta),
// theta the last formula of fo_subproof. Throws MacroError otherwise.
ProofScript soundness_macro(const std::vector<Expr>& premises, const ProofScript& fo_subproof);

// Emits a `macro soundness` step into b whose subproof is sub; premise_ids
// are the steps holding the boxed hypotheses in hyp order.
int soundness_step(ProofBuilder& b, const std::vector<int>& premise_ids, ProofScript sub);

// A propositional derivation of concl from hyps: hyp steps, one tautology, MPs.
ProofScript propositional_subproof(const std::vector<Expr>& hyps, const Expr& concl);

}  // namespace mk
