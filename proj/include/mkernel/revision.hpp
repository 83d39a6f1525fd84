// Finite multiverse simulator: model checking of L_{Uni,Mod} formulas over
// finite structures with tabulated internal Uni and Mod, and the stage map.
#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "mkernel/syntax.hpp"

namespace mk {

struct RevisionError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Variable name -> element index.
using Assignment = std::map<std::string, int>;

// Elements are indices into `elements`. Elements in quote_map are codes; the
// rest are ordinary and form the range of element quantifiers. Formula
// parameters naming elements are stored as constants.
struct FiniteStructure {
  std::string name;
  std::vector<std::string> elements;
  std::set<std::pair<int, int>> membership;  // (x, a) means x in a
  std::set<int> internal_uni;                // universe-denoting elements read as Uni
  std::map<int, int> denotes;                // universe-denoting element -> pool index
  std::map<int, Expr> quote_map;             // code element -> expanded formula
  // (u, c) -> the assignments, listed on the sorted free variables of the
  // decoded formula, at which Mod(u, c, .) holds.
  std::map<std::pair<int, int>, std::set<std::vector<int>>> internal_mod;

  int element(const std::string& n) const;  // -1 when absent
  bool is_code(int e) const { return quote_map.count(e) > 0; }
  std::vector<int> ordinary() const;
  int code_of(const Expr& phi) const;  // -1 when phi is not coded here
  bool mod(int u, int c, const std::vector<int>& args) const;
};

struct MultiverseState {
  unsigned stage = 0;
  std::vector<FiniteStructure> pool;
  std::set<int> uni_pool;                         // pool indices
  std::map<unsigned, std::set<int>> schedule;     // uni_pool from the given stage on
  std::vector<std::string> stock;                 // sorted variable stock
  int designated = 0;

  std::set<int> uni_pool_at(unsigned n) const;
  int index_of(const std::string& structure) const;  // -1 when absent
};

// Tarskian evaluation in M read with its current tables. Element quantifiers
// range over M's ordinary elements. A quantifier of the shape
// all f (VAU f t -> .) or ex f (VAU f t & .) ranges over the assignments of
// the stock into the ordinary elements of the structure t denotes. Quote
// terms denote the element coding them; an uncoded quote makes its atom
// false. Throws RevisionError on an unassigned free variable or a symbol
// outside =, in, Uni, Mod, VAU.
bool evaluate(const MultiverseState& s, int structure, const Expr& phi, const Assignment& f = {});

// One application of the stage map. Pure.
MultiverseState revise(const MultiverseState& s);

// The structure on {x | x in a} with the induced relations.
FiniteStructure externalize(const FiniteStructure& M, int a);
// Members of a read as Kuratowski n-tuples <x1, <x2, ... xn>>; members that
// are not tuples of that arity are skipped.
std::vector<std::vector<int>> externalize_tuples(const FiniteStructure& M, int a, unsigned arity);

struct StageReport {
  unsigned stage = 0;
  std::map<std::string, std::size_t> checked;  // schema -> instances
  std::set<std::string> skipped;
  std::vector<std::string> violations;
  bool ok() const { return violations.empty(); }
  std::string summary() const;
};

// CM_eq, CM_not, CM_and, CM_all on the tables and the box propositions by
// evaluation in every structure. CMbox_bot, CMbox_not and D_CM only where the
// structure's internal Uni is nonempty.
StageReport check_stage_axioms(const MultiverseState& s);

// For sentences alpha, alpha -> beta of `sentences` true in a universe, beta
// is true there. Throws RevisionError unless the set is closed under
// propositional subformulas.
StageReport soundness_closure_check(const MultiverseState& s, const std::vector<Expr>& sentences);

// Scenario files; see data/scenarios/liar.scn. Throws RevisionError.
MultiverseState parse_scenario(std::string_view text);
MultiverseState load_scenario(const std::string& path);

// One line per table slot: stage, structure, universe, code, assignment, value.
std::string truth_table_tsv(const MultiverseState& s, bool header);

struct CycleInfo {
  unsigned preperiod = 0;  // first stage of the cycle
  unsigned period = 0;     // 0 when no repetition within the horizon
};
CycleInfo find_cycle(const MultiverseState& s, unsigned horizon);
std::string table_signature(const MultiverseState& s);

// Randomized scenario: at most 4 structures, 5 ordinary elements each and 30
// pooled codes shared by all structures, closed under subformulas.
MultiverseState random_scenario(std::uint32_t seed);

}  // namespace mk
