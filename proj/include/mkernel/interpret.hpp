// Interpretations of L_{Uni,Mod} into L, revision parameters and the stage
// ledger that carries a normalized multiverse proof into the hierarchy T_n.
#pragma once

#include <map>
#include <memory>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "mkernel/checker.hpp"
#include "mkernel/coding.hpp"
#include "mkernel/proof_script.hpp"
#include "mkernel/theories.hpp"

namespace mk {

struct LedgerError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Uni(t) goes to uni_image[t/U]; Mod(t1,t2,t3) to mod_image[t1,t2,t3/U,p,f].
// Everything else is fixed.
struct Interpretation {
  Expr uni_image;  // free variable U
  Expr mod_image;  // free variables U, p, f
  std::string source_lang = "L_UM";
  std::string target_lang = "L";
};

// Throws LanguageError when phi uses a symbol outside the source language.
Expr apply(const Interpretation& I, const Expr& phi);

// Revision conditions and rules that a parameter set can declare or admit.
inline constexpr const char* kNecStar = "NEC*";
inline constexpr const char* kConecStar = "CONEC*";
inline constexpr const char* kReflStar = "ReflectionRule*";
inline constexpr const char* kSoundStar = "Soundness*";
inline constexpr const char* kCompleteStar = "Completeness*";

struct RevisionParams {
  std::string name;
  std::string hierarchy;  // "Con" or "R": T_n is con_name(n) / refl_name(n)
  Expr uni;               // Uni_n(U), free n and U
  Expr mod0;              // Mod_0(U, p, f)
  std::string rev_lang = "UM";
  bool circ = false;
  unsigned offset = 0;    // accumulated shift
  std::set<std::string> declared;
  std::set<std::string> admitted;
  // Axiom families of S with the least stage A from which T_k proves I_k of them.
  std::map<std::string, unsigned> certificates;
  std::shared_ptr<const ModFamily> family;

  // Indices below are relative to the shift.
  std::string theory_name(unsigned n) const;
  TheoryDescriptor theory(unsigned n) const;
  Expr uni_at(unsigned n) const;
  Expr mod_at(unsigned n) const;
  Interpretation at(unsigned k) const;
  unsigned absolute(unsigned k) const { return k + offset; }
};

// Builds the family and fills `admitted` from the declarations.
RevisionParams make_params(std::string name, std::string hierarchy, Expr uni, Expr mod0, std::string rev_lang,
                           std::set<std::string> declared, std::map<std::string, unsigned> certificates,
                           bool circ = false);
// Manifest lines: name, hierarchy, uni, mod0, rev_lang, circ, declare <cond>,
// certificate <family> <A>. '#' starts a comment. Throws LedgerError.
RevisionParams parse_params(std::string_view text);
RevisionParams load_params(const std::string& path);

// Requires a_prime >= 1 (std::invalid_argument otherwise).
RevisionParams shift(const RevisionParams& params, unsigned a_prime);

struct AdmissibilityReport {
  std::set<std::string> admitted;
  std::vector<std::string> derivations;
};

// Soundness* gives NEC*; Completeness* with ReflectionRule* gives CONEC*.
AdmissibilityReport admissibility_check(const RevisionParams& params);

// Items of the parameter conditions checked on the shipped formula templates
// for stages below `stages`. Returns the failed items.
std::vector<std::string> appropriate_check(const RevisionParams& params, unsigned stages = 6);

enum class LedgerCase { Axiom, FirstOrder, Nec, Conec };
const char* to_string(LedgerCase c);

struct LedgerRow {
  int source = 0;       // step id in the flattened source
  LedgerCase kind = LedgerCase::Axiom;
  int nec = 0;          // N_r
  int conec = 0;        // C_r
  unsigned stage = 0;   // k_r, relative to the shifted parameters
  unsigned theory = 0;  // 2 C_r + k_r, relative to the shifted parameters
  Expr formula;         // I'_{k_r}(psi_r)
  Expr witness;         // NEC: the internal-model line; CONEC: premise at k_r + 1
  std::string certificate;
};

struct LedgerFinal {
  int nec = 0;               // N
  int conec = 0;             // C
  unsigned stage = 0;        // N + 1, shifted convention
  unsigned theory = 0;       // 2C + N + 1, shifted convention
  unsigned stage_abs = 0;    // N + 1 + A'
  unsigned theory_abs = 0;   // 2C + N + 1 + A'
  Expr formula;              // I'_{N+1}(psi) = I_{N+1+A'}(psi)
};

struct TranslationLedger {
  std::string source_theory;
  std::string params;
  unsigned a_prime = 0;
  ProofScript source;  // macros expanded, renumbered
  std::vector<LedgerRow> rows;
  LedgerFinal final;
};

// Inlines soundness-macro steps and renumbers.
ProofScript expand_macros(const ProofScript& p);

// p must check under `source`, satisfy nec_before_conec, use only NEC/CONEC
// rules the parameters admit and only axiom families they certify. a_prime = 0
// leaves the parameters unshifted. Throws LedgerError.
TranslationLedger main_lemma_transform(const ProofScript& p, const RevisionParams& params, unsigned a_prime,
                                       const TheoryDescriptor& source);

// `params` are the unshifted parameters the ledger was built from.
CheckReport verify_ledger(const TranslationLedger& ledger, const RevisionParams& params);

// A header comment, one line per row and a final line, tab separated.
std::string ledger_tsv(const TranslationLedger& ledger);
// Reads ledger_tsv output back; `source` is the proof the ledger was built
// from. Throws LedgerError.
TranslationLedger parse_ledger(std::string_view text, const ProofScript& source);

}  // namespace mk
