// Theory registry. Axiom families are sets of schema recognizers; a theory is
// a union of families, a base language and a set of admitted rules.
#pragma once

#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "mkernel/syntax.hpp"

namespace mk {

struct LanguageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct RegistryError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Recognizer {
  std::string label;
  bool derived = false;  // a theorem of the family's theory, accepted as a lemma
  bool flagged = false;  // accepted without a derivation; surfaced by the checker
  std::function<bool(const Expr&)> match;  // called on expanded sentences
  Expr example;
};

struct AxiomFamily {
  std::string name;
  std::string lang;  // language tag
  std::vector<Recognizer> recognizers;
};

using FamilyPtr = std::shared_ptr<const AxiomFamily>;

struct TheoryDescriptor {
  std::string name;
  std::string base_language;
  Language language;
  std::vector<std::string> parents;
  std::vector<FamilyPtr> families;  // parents' families included
  std::set<std::string> rules;      // MP, Gen, NEC, CONEC, NEC_Tr, CONEC_Tr, ReflectionRule, PrIntro

  bool admits(const std::string& rule) const { return rules.count(rule) > 0; }
  bool has_family(const std::string& fam) const;
  std::set<std::string> family_names() const;
};

struct AxiomMatch {
  std::string family;
  std::string label;
  bool derived = false;
  bool flagged = false;
  std::string str() const { return family + "." + label; }
};

// Throws LanguageError when sigma is not a sentence of the theory's language.
std::optional<AxiomMatch> is_axiom(const TheoryDescriptor& t, const Expr& sigma);
// Same, restricted to one family and label.
std::optional<AxiomMatch> is_axiom_as(const TheoryDescriptor& t, const Expr& sigma, const std::string& family,
                                      const std::string& label);
// Primitive (non-derived) axioms only: the extension of Ax.<theory>.
bool is_primitive_axiom(const TheoryDescriptor& t, const Expr& sigma);

struct ProvabilitySymbol {
  std::string theory_ref;
  std::string symbol;  // Pr.<theory>
  Expr con_sentence;   // not Pr.<theory>(quote bot)

  static ProvabilitySymbol of(const std::string& theory);
  Expr pr(const Expr& code) const { return atom(symbol, {code}); }
};

// Pr_T(quote phi) -> phi
Expr reflection_instance(const ProvabilitySymbol& sym, const Expr& phi);
// forall p (Fml.L_Sat+ p -> (Pr_T p -> Tr p)), expanded. Throws LanguageError if
// the target language has no Sat.
Expr global_reflection_axiom(const ProvabilitySymbol& sym, const Language& target = *Language::by_tag("L_Sat+"));

struct CoverageRow {
  std::string item;     // name of the axiom or system
  std::string family;
  std::string label;
  std::string theory;   // a registered theory that contains it
};

class Registry {
 public:
  static const Registry& standard();
  static Registry parse(std::string_view manifest);
  static Registry load(const std::string& path);

  // Registered names, hierarchy names (Con3, R2, GR1, SP2) and '+' composites.
  TheoryDescriptor get(const std::string& name) const;
  bool known(const std::string& name) const;
  std::vector<std::string> names() const;
  // a is contained in b: every family and rule of a is in b.
  bool subtheory(const std::string& a, const std::string& b) const;
  std::vector<CoverageRow> coverage() const;

 private:
  struct Entry {
    std::string lang;
    std::vector<std::string> parents;
    std::vector<std::string> families;
    std::vector<std::string> rules;
  };
  std::map<std::string, Entry> entries_;
  std::vector<std::string> order_;

  TheoryDescriptor resolve(const std::string& name, int depth) const;
};

const char* standard_manifest_text();

// Theory name of the n-th stage of a hierarchy; stage 0 is ZF (GR0 for GR/SP).
std::string con_name(unsigned n);
std::string refl_name(unsigned n);

TheoryDescriptor build_con_hierarchy(unsigned n);
TheoryDescriptor build_r_hierarchy(unsigned n);
TheoryDescriptor build_gr_hierarchy(unsigned n);
TheoryDescriptor build_sp_hierarchy(unsigned n);

// Axiom families by name, including parameterized ones such as Sep[L_UM],
// Con[ZF], R[Con1], GR[GR0], SP[2]. Throws RegistryError for unknown names.
FamilyPtr axiom_family(const std::string& name);

// Sentences whose quantifiers are all bounded to Nat over arithmetic atoms;
// Sigma_1: an existential block over a quantifier-free matrix, or a Pr atom.
bool is_arithmetic_sentence(const Expr& s);
bool is_sigma1_sentence(const Expr& s);

// Sentence shapes shared by the registry, the checker and the generators.
namespace ax {

Expr box(const Expr& code);                        // expanded trbox
Expr dia(const Expr& code);                        // expanded trdia
Expr truth(const Expr& code);                      // expanded tr
Expr box_set(const std::string& theory);           // forall p (Ax.T p -> trbox p)
Expr sound_box(const std::string& theory);         // box_set(T) -> forall q (Pr.T q -> trbox q)
Expr con(const std::string& theory);               // not Pr.T(quote bot)
Expr non_triviality();
Expr multiverse_zf();

// Instances of compositional schemas for concrete codes, under the
// forall U (Uni U -> forall f (VAU f U -> .)) prefix. Codes are normalized.
Expr cm_instance(const std::string& label, const std::vector<Expr>& codes);
// Instances of CT schemas under forall f (VA f -> .).
Expr ct_instance(const std::string& label, const std::vector<Expr>& codes);
// Box lemmas of CM-minus (+ Non-Triviality) for sentences a, b.
Expr box_lemma(const std::string& label, const std::vector<Expr>& sentences);
Expr modal_axiom(const std::string& label, const Expr& sigma);  // T_CM, 4_CM, D_CM, Lob_CM, K_CM (K takes a -> b)
Expr multiverse_reflection(const Expr& sigma);

// Axiom-set definitions, accepted as Base.axset facts.
std::vector<Expr> axset_definitions();
Expr con_axset_def(unsigned n);   // Ax.Con_n in terms of Ax.Con_{n-1}
Expr refl_axset_def(unsigned n);  // Ax.R_n in terms of Ax.R_{n-1}

// Uniform reflection step box_set(R_k) -> box_set(R_{k+1}).
Expr refl_step(unsigned k);

// forall U (Uni U -> forall f (VAU f U -> (Mod(U, quote sigma, f) <-> sigma)))
Expr absoluteness(const Expr& sigma);
// put(..put(f, quote x1, numin(n1, U)).., quote xk, numin(nk, U))
Expr arith_env(const std::vector<std::string>& xs, const std::vector<std::string>& ns);
// Mod(U, quote forall x (Nat x -> phi), f) <-> forall n (Nat n -> Mod(U, quote phi, put(f, quote x, numin(n, U))))
// under the universe prefix.
Expr arith_comp_instance(const std::string& x, const Expr& phi, const std::string& n);
// forall n1 (Nat n1 -> ..) under the universe prefix: Mod(U, quote a, env) <-> a[n/x].
Expr arith_atom_env(const Expr& a, const std::vector<std::string>& xs, const std::vector<std::string>& ns);

}  // namespace ax

}  // namespace mk
