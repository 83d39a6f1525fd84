// Abstract syntax for the object language: terms, formulas, abbreviations.
#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace mk {

enum class Kind : std::uint8_t {
  // terms
  Var, Const, App, Quote, Meta,
  // formulas
  Atom, Not, And, Or, Imp, Iff, All, Ex, ExU, Macro, Bot, Top,
  // pattern-only meta operation, e.g. (@subst ?A ?V ?T)
  MetaOp,
};

struct Node;
using Expr = std::shared_ptr<const Node>;

// Immutable syntax node. Binders keep their surface variable in `name`;
// comparison is modulo renaming of bound variables (see alpha_eq / key).
struct Node {
  Kind kind;
  std::string name;
  std::vector<Expr> kids;
};

bool is_term(const Expr& e);
bool is_formula(const Expr& e);
bool is_binder(Kind k);

// --- constructors -------------------------------------------------------
Expr var(std::string name);
Expr cnst(std::string name);
Expr app(std::string fn, std::vector<Expr> args);
Expr quote(Expr syntax);
Expr meta(std::string name);
Expr atom(std::string rel, std::vector<Expr> args);
Expr neg(Expr a);
Expr conj(Expr a, Expr b);
Expr disj(Expr a, Expr b);
Expr imp(Expr a, Expr b);
Expr iff(Expr a, Expr b);
Expr all(std::string x, Expr body);
Expr ex(std::string x, Expr body);
Expr exu(std::string x, Expr body);
Expr bot();
Expr top();
Expr macro(std::string name, std::vector<Expr> args);
Expr make(Kind k, std::string name, std::vector<Expr> kids);

Expr eq(Expr a, Expr b);
Expr mem(Expr a, Expr b);
Expr numeral(unsigned n);
// S^n(0) -> n
bool numeral_value(const Expr& t, unsigned& out);
// Right-nested implication a1 -> (a2 -> ... -> c).
Expr imps(const std::vector<Expr>& ants, Expr concl);
Expr conjs(const std::vector<Expr>& xs);

// Abbreviations (kept as Macro nodes until expand()).
Expr trbox(Expr t);
Expr trdia(Expr t);
Expr tr(Expr t);
Expr mod2(Expr u, Expr t);

// --- language -----------------------------------------------------------
enum class SymKind : std::uint8_t { Rel, Fn, Const };

struct Symbol {
  std::string name;
  SymKind kind;
  int arity;  // -1 for constants
};

// A signature. Names ending in '.' are families: any symbol with that prefix.
class Language {
 public:
  Language() = default;
  Language(std::string tag, std::vector<Symbol> syms);

  const std::string& tag() const { return tag_; }
  const Symbol* find(const std::string& name) const;
  bool has(const std::string& name) const { return find(name) != nullptr; }
  Language join(const Language& other, std::string tag) const;
  bool includes(const Language& other) const;
  std::vector<Symbol> symbols() const;

  static const Language& base();      // L: ZF plus coding/arith machinery
  static const Language& sat();       // L_Sat
  static const Language& uni_mod();   // L_{Uni,Mod}
  static const Language& plus();      // L^+ additions (iota, self, Iso, Crsm)
  static const Language& full();      // union of all
  static const Language* by_tag(const std::string& tag);

 private:
  std::string tag_;
  std::map<std::string, Symbol> syms_;
  std::map<std::string, Symbol> families_;
};

// Non-logical symbols occurring outside quotes.
std::set<std::string> symbols_of(const Expr& e);
// True when every symbol outside quotes is in `lang`.
bool in_language(const Expr& e, const Language& lang, std::string* offending = nullptr);

// --- parse / print ------------------------------------------------------
struct ParseError : std::runtime_error {
  std::size_t pos;
  ParseError(const std::string& msg, std::size_t p)
      : std::runtime_error(msg + " at offset " + std::to_string(p)), pos(p) {}
};

Expr parse(std::string_view text, const Language& lang = Language::full());
Expr parse_formula(std::string_view text, const Language& lang = Language::full());
Expr parse_term(std::string_view text, const Language& lang = Language::full());
// Accepts metavariables ?X and meta operations (@op ...).
Expr parse_pattern(std::string_view text);

std::string print(const Expr& e);

// --- structural operations ---------------------------------------------
std::set<std::string> free_vars(const Expr& e);
bool is_closed(const Expr& e);
bool is_sentence(const Expr& e);
bool alpha_eq(const Expr& a, const Expr& b);
// Canonical string: bound variables by binder depth, invariant under renaming.
std::string key(const Expr& e);
std::size_t size(const Expr& e);
int depth(const Expr& e);

std::string fresh(const std::string& base, const std::set<std::string>& avoid);
// Capture-avoiding; never enters quotes.
Expr substitute(const Expr& e, const std::string& x, const Expr& t);
Expr substitute(const Expr& e, const std::map<std::string, Expr>& s);

// Eliminate trbox/trdia/tr/mod2 macros and exu, including inside quotes.
Expr expand(const Expr& e);

// Recognize the expanded shape of trbox / mod2; returns the code argument.
bool match_trbox(const Expr& e, Expr& code);
bool match_mod2(const Expr& e, Expr& universe, Expr& code);

// Universal closure wrapper: formulas of shape forall x (g -> .) or forall x .
struct PrefixItem {
  std::string var;
  Expr guard;  // may be null; guard mentions var
};
using Prefix = std::vector<PrefixItem>;
Expr wrap(const Prefix& p, Expr body);
// Standard internalisation prefix: forall U (Uni U -> forall f (VAU f U -> .))
Prefix universe_prefix(const std::string& u = "U", const std::string& f = "f");

}  // namespace mk
