// Propositional modal logic: GL decision with Kripke countermodels, and the
// embedding of modal formulas into L_{Uni,Mod} with box read as trbox.
#pragma once

#include <map>
#include <memory>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "mkernel/proof_script.hpp"
#include "mkernel/syntax.hpp"

namespace mk {

struct ModalError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class MKind { Var, Not, And, Or, Imp, Iff, Box, Dia, Bot, Top };

struct MNode;
using ModalFormula = std::shared_ptr<const MNode>;
struct MNode {
  MKind kind;
  std::string var;
  std::vector<ModalFormula> kids;
};

ModalFormula mvar(std::string p);
ModalFormula mnot(ModalFormula a);
ModalFormula mand(ModalFormula a, ModalFormula b);
ModalFormula mor(ModalFormula a, ModalFormula b);
ModalFormula mimp(ModalFormula a, ModalFormula b);
ModalFormula miff(ModalFormula a, ModalFormula b);
ModalFormula mbox(ModalFormula a);
ModalFormula mdia(ModalFormula a);
ModalFormula mbot();
ModalFormula mtop();

// (box f), (dia f), (not f), (and f g), (or f g), (imp f g), (iff f g), bot,
// top, and lower-case identifiers as variables. Throws ModalError.
ModalFormula parse_modal(std::string_view text);
std::string print_modal(const ModalFormula& f);
std::set<std::string> modal_vars(const ModalFormula& f);
int modal_depth(const ModalFormula& f);
// dia f becomes (not (box (not f))) everywhere.
ModalFormula eliminate_dia(const ModalFormula& f);

struct KripkeModel {
  unsigned worlds = 0;
  std::set<std::pair<unsigned, unsigned>> access;
  std::vector<std::set<std::string>> valuation;  // per world, the true variables
  unsigned root = 0;                             // a world refuting the formula

  bool holds(const ModalFormula& f, unsigned w) const;
  bool transitive() const;
  bool irreflexive() const;
  std::string describe() const;
};

// Tableau decision for GL.
bool gl_valid(const ModalFormula& f);
// None iff gl_valid. Prefers the smallest model found by exhaustive search up
// to four worlds; otherwise the model read off the open tableau.
std::optional<KripkeModel> gl_countermodel(const ModalFormula& f);

// Exhaustive search over all transitive irreflexive frames with at most
// max_worlds worlds and all valuations of the formula's variables.
std::optional<KripkeModel> brute_countermodel(const ModalFormula& f, unsigned max_worlds);

// All formulas over `vars`, bot and top of syntactic depth at most `depth`.
std::vector<ModalFormula> enumerate_modal(unsigned depth, const std::vector<std::string>& vars);

// box s goes to trbox(quote(embed s)); dia s to not trbox(quote(not embed s)).
// Valuations must be sentences. Throws ModalError on a missing entry.
Expr embed(const ModalFormula& f, const std::map<std::string, Expr>& valuation);

// CMminus proof of embed(box(s -> t) -> (box s -> box t)).
ProofScript k_axiom_proof(const ModalFormula& s, const ModalFormula& t, const std::map<std::string, Expr>& valuation);
// MSminus proof of embed(box s) by NEC from a tautology step; s must embed to
// a propositional tautology.
ProofScript necessitation_proof(const ModalFormula& s, const std::map<std::string, Expr>& valuation);

}  // namespace mk
