// Proof objects: Hilbert-style step lists over sentences, their text format,
// and a builder that emits common derived patterns as primitive steps.
#pragma once

#include <map>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "mkernel/syntax.hpp"

namespace mk {

// Refl: the reflection rule, from Pr.S(quote phi) infer phi.
enum class Rule { Axiom, Taut, MP, Gen, Inst, NEC, CONEC, Coding, PrIntro, Macro, Refl };

struct ProofScript;

struct Justification {
  Rule rule = Rule::Axiom;
  std::string theory;  // Axiom: owning theory or family ("logic", "Base", "CMminus", ...)
  std::string schema;  // Axiom: schema label; Coding: rule name
  std::vector<int> refs;
  std::string var;     // Gen
  Expr term;           // Inst
  std::string file;    // PrIntro / Macro: subproof file as written in the source
  std::shared_ptr<const ProofScript> sub;
  std::string macro;   // Macro: macro name
};

struct Step {
  int id = 0;
  Expr formula;
  Justification just;
};

struct ProofScript {
  std::vector<Step> steps;

  const Step* find(int id) const;
  const Step& last() const { return steps.back(); }
  bool empty() const { return steps.empty(); }
};

std::string to_string(const Justification& j);
std::string to_text(const ProofScript& p);
// Throws ParseError on malformed lines. Subproof files are resolved against base_dir.
ProofScript parse_proof(std::string_view text, const std::string& base_dir = ".");
ProofScript load_proof(const std::string& path);
// Writes p, and any inline subproofs as sibling files <path>.sub<k>.
void save_proof(const ProofScript& p, const std::string& path);

// Builds proofs bottom-up. Steps with an alpha-equal formula are reused.
class ProofBuilder {
 public:
  ProofBuilder() = default;
  explicit ProofBuilder(ProofScript seed);

  int add(Expr f, Justification j);
  int axiom(const std::string& theory, const std::string& schema, Expr f);
  int logic(const std::string& schema, Expr f) { return axiom("logic", schema, std::move(f)); }
  int base(const std::string& schema, Expr f) { return axiom("Base", schema, std::move(f)); }
  int taut(Expr f);
  int mp(int imp_id, int ant_id);
  int gen(int id, const std::string& x);
  int inst(int id, Expr t);
  int nec(int id);
  int conec(int id);
  int refl(int id);
  // NEC_Tr / CONEC_Tr: the truth-predicate variants.
  int nec_tr(int id);
  int conec_tr(int id);
  int coding(Expr f);

  const Expr& formula(int id) const;
  int find(const Expr& f) const;  // -1 when absent
  const ProofScript& script() const { return p_; }
  ProofScript take() { return std::move(p_); }
  int size() const { return static_cast<int>(p_.steps.size()); }

  // From steps A1..An derive C where (A1 -> ... -> An -> C) is a tautology.
  int taut_chain(const std::vector<int>& premises, Expr concl);
  // From Pi(B1)..Pi(Bn) derive Pi(C) where B1 -> ... -> Bn -> C is a tautology.
  int ctx_taut(const Prefix& pi, const std::vector<int>& premises, Expr concl);
  // From a sentence F derive Pi(F).
  int lift(const Prefix& pi, int id);
  // From Pi(forall x X) derive Pi(X[t/x]).
  int ctx_inst(const Prefix& pi, int id, Expr t);
  // From Pi(g -> X) with g a closed fact provable as `fact_id`, derive Pi(X).
  int ctx_discharge(const Prefix& pi, int id, int fact_id);
  // From Pi(X) derive Pi(X') where X' is the coding normal form of X.
  int ctx_normalize(const Prefix& pi, int id, Expr normalized_body);

  // Strip the prefix from f, renaming bound variables to the prefix names.
  static bool unwrap(const Prefix& pi, const Expr& f, Expr& body);

 private:
  ProofScript p_;
  std::map<std::string, int> by_key_;
  int next_id_ = 1;
};

}  // namespace mk
