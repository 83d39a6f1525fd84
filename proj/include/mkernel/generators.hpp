// Proof generators for the derivations reproduced by the kernel. Each returns
// a proof script together with the theory it checks under.
#pragma once

#include <optional>
#include <utility>
#include <stdexcept>
#include <string>
#include <vector>

#include "mkernel/proof_script.hpp"

namespace mk {

struct ResourceError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Generated {
  std::string theory;  // registry name to check under
  ProofScript proof;
};

enum class LiarVariant { A, B };
// A: CM-minus + NEC + T_CM. B: CM-minus + NEC + Non-Triviality + 4_CM.
Generated generate_liar(LiarVariant v);
// The id of the step citing the variant's named axiom (T_CM resp. CMbox_not).
int liar_named_step(const Generated& g);

// CT-restricted proof of
//   forall y0..yk (Sat(quote phi, put(..put(emp, quote v0, y0).., quote vk, yk)) <-> phi[y/v])
// for an L-formula phi with free variables v0 < .. < vk. Throws LanguageError
// if phi is not in L.
Generated generate_tarski(const Expr& phi);
Expr tarski_biconditional(const Expr& phi);

enum class IterKind { Con, Reflection, Arith };
// Con: CM + NEC + Non-Triviality proves Con_n (the consistency of Con_{n-1}).
// Reflection: CM + NEC + MR proves the R_n instance Pr.R_{n-1}(quote s) -> s.
// Arith: CM + Sigma1Abs + CONEC proves the same R_n instance.
// n above the step budget throws ResourceError.
Generated generate_iterated(IterKind kind, unsigned n, const std::optional<Expr>& sigma = std::nullopt);
Expr iterated_goal(IterKind kind, unsigned n, const std::optional<Expr>& sigma = std::nullopt);

// CM-minus (+ Non-Triviality) proofs of the box lemmas for sentences a, b,
// through the soundness macro and CM instances.
Generated generate_box_lemma(const std::string& label, const std::vector<Expr>& sentences);

// CM-minus + ArithComp proof of arithmetic absoluteness for an arithmetic
// sentence sigma (quantifiers relativized to Nat).
Generated generate_arith_abs(const Expr& sigma);

// Random checkable MS-minus proofs built from axiom samples, tautologies, MP,
// NEC and CONEC. Deterministic in the seed.
struct RandomProofLimits {
  int max_steps = 20;
  int max_nec = 3;
  int max_conec = 3;
};
ProofScript random_ms_proof(unsigned seed, const RandomProofLimits& lim = {});

// All scripts the demo verb can print, with names.
std::vector<std::pair<std::string, Generated>> demo_corpus();

}  // namespace mk
