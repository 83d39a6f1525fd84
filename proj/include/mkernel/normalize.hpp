// Reordering proofs so that every NEC application precedes every CONEC
// application. Boxed first-order steps are rebuilt with the soundness macro.
#pragma once

#include <stdexcept>

#include "mkernel/checker.hpp"
#include "mkernel/proof_script.hpp"

namespace mk {

struct NormalizeError : std::runtime_error {
  NormalizeError(int step_id, const std::string& what)
      : std::runtime_error("step " + std::to_string(step_id) + ": " + what), step(step_id) {}
  int step;  // offending input step, 0 when not tied to a step
};

// True when the largest index of a NEC step is below the smallest index of a
// CONEC step (vacuously when either is absent). Both rule variants count.
bool nec_before_conec(const ProofScript& p);

// Requires check(p, theory).ok. The result checks under the same theory, ends in
// the same formula and satisfies nec_before_conec. Inputs that already satisfy
// it come back renumbered only. Throws NormalizeError for a step whose box
// cannot be rebuilt, ResourceError (generators.hpp) past MULTIKERNEL_BUDGET
// output steps.
ProofScript normalize(const ProofScript& p, const TheoryDescriptor& theory, const CheckOptions& opts = {});

// Renumbers steps 1..n in order, remapping references.
ProofScript renumber(const ProofScript& p);

}  // namespace mk
