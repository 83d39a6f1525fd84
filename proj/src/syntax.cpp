#include "mkernel/syntax.hpp"

#include <algorithm>
#include <cctype>
#include <functional>
#include <sstream>

namespace mk {

bool is_binder(Kind k) { return k == Kind::All || k == Kind::Ex || k == Kind::ExU; }

bool is_term(const Expr& e) {
  switch (e->kind) {
    case Kind::Var: case Kind::Const: case Kind::App: case Kind::Quote: case Kind::Meta:
    case Kind::MetaOp:
      return true;
    default:
      return false;
  }
}

bool is_formula(const Expr& e) {
  switch (e->kind) {
    case Kind::Var: case Kind::Const: case Kind::App: case Kind::Quote:
      return false;
    default:
      return true;
  }
}

Expr make(Kind k, std::string name, std::vector<Expr> kids) {
  return std::make_shared<const Node>(Node{k, std::move(name), std::move(kids)});
}

Expr var(std::string name) { return make(Kind::Var, std::move(name), {}); }
Expr cnst(std::string name) { return make(Kind::Const, std::move(name), {}); }
Expr app(std::string fn, std::vector<Expr> args) { return make(Kind::App, std::move(fn), std::move(args)); }
Expr quote(Expr syntax) { return make(Kind::Quote, "", {std::move(syntax)}); }
Expr meta(std::string name) { return make(Kind::Meta, std::move(name), {}); }
Expr atom(std::string rel, std::vector<Expr> args) { return make(Kind::Atom, std::move(rel), std::move(args)); }
Expr neg(Expr a) { return make(Kind::Not, "", {std::move(a)}); }
Expr conj(Expr a, Expr b) { return make(Kind::And, "", {std::move(a), std::move(b)}); }
Expr disj(Expr a, Expr b) { return make(Kind::Or, "", {std::move(a), std::move(b)}); }
Expr imp(Expr a, Expr b) { return make(Kind::Imp, "", {std::move(a), std::move(b)}); }
Expr iff(Expr a, Expr b) { return make(Kind::Iff, "", {std::move(a), std::move(b)}); }
Expr all(std::string x, Expr body) { return make(Kind::All, std::move(x), {std::move(body)}); }
Expr ex(std::string x, Expr body) { return make(Kind::Ex, std::move(x), {std::move(body)}); }
Expr exu(std::string x, Expr body) { return make(Kind::ExU, std::move(x), {std::move(body)}); }
Expr bot() { static const Expr b = make(Kind::Bot, "", {}); return b; }
Expr top() { static const Expr t = make(Kind::Top, "", {}); return t; }
Expr macro(std::string name, std::vector<Expr> args) { return make(Kind::Macro, std::move(name), std::move(args)); }

Expr eq(Expr a, Expr b) { return atom("=", {std::move(a), std::move(b)}); }
Expr mem(Expr a, Expr b) { return atom("in", {std::move(a), std::move(b)}); }

Expr numeral(unsigned n) {
  Expr t = cnst("0");
  for (unsigned i = 0; i < n; ++i) t = app("S", {t});
  return t;
}

bool numeral_value(const Expr& t, unsigned& out) {
  unsigned n = 0;
  const Node* p = t.get();
  while (p->kind == Kind::App && p->name == "S" && p->kids.size() == 1) {
    ++n;
    p = p->kids[0].get();
  }
  if (p->kind != Kind::Const || p->name != "0") return false;
  out = n;
  return true;
}

Expr imps(const std::vector<Expr>& ants, Expr concl) {
  for (auto it = ants.rbegin(); it != ants.rend(); ++it) concl = imp(*it, concl);
  return concl;
}

Expr conjs(const std::vector<Expr>& xs) {
  if (xs.empty()) return top();
  Expr r = xs.back();
  for (auto it = xs.rbegin() + 1; it != xs.rend(); ++it) r = conj(*it, r);
  return r;
}

Expr trbox(Expr t) { return macro("trbox", {std::move(t)}); }
Expr trdia(Expr t) { return macro("trdia", {std::move(t)}); }
Expr tr(Expr t) { return macro("tr", {std::move(t)}); }
Expr mod2(Expr u, Expr t) { return macro("mod2", {std::move(u), std::move(t)}); }

// --- language -------------------------------------------------------------

Language::Language(std::string tag, std::vector<Symbol> syms) : tag_(std::move(tag)) {
  for (auto& s : syms) {
    if (!s.name.empty() && s.name.back() == '.')
      families_[s.name] = s;
    else
      syms_[s.name] = s;
  }
}

const Symbol* Language::find(const std::string& name) const {
  auto it = syms_.find(name);
  if (it != syms_.end()) return &it->second;
  auto dot = name.find('.');
  if (dot != std::string::npos && dot + 1 < name.size()) {
    auto f = families_.find(name.substr(0, dot + 1));
    if (f != families_.end()) return &f->second;
  }
  return nullptr;
}

Language Language::join(const Language& other, std::string tag) const {
  Language r = *this;
  r.tag_ = std::move(tag);
  for (auto& [k, v] : other.syms_) r.syms_[k] = v;
  for (auto& [k, v] : other.families_) r.families_[k] = v;
  return r;
}

bool Language::includes(const Language& other) const {
  for (auto& [k, v] : other.syms_)
    if (!syms_.count(k)) return false;
  for (auto& [k, v] : other.families_)
    if (!families_.count(k)) return false;
  return true;
}

std::vector<Symbol> Language::symbols() const {
  std::vector<Symbol> r;
  for (auto& [k, v] : syms_) r.push_back(v);
  for (auto& [k, v] : families_) r.push_back(v);
  return r;
}

const Language& Language::base() {
  static const Language L("L", {
      {"in", SymKind::Rel, 2}, {"=", SymKind::Rel, 2}, {"Nat", SymKind::Rel, 1},
      {"Lt", SymKind::Rel, 2}, {"VA", SymKind::Rel, 1}, {"VAU", SymKind::Rel, 2},
      {"VAfv", SymKind::Rel, 3}, {"VAUfv", SymKind::Rel, 4}, {"Struct", SymKind::Rel, 1},
      {"SatL", SymKind::Rel, 3}, {"SatX", SymKind::Rel, 5}, {"Elem", SymKind::Rel, 2},
      {"Ext", SymKind::Rel, 3}, {"NonStd", SymKind::Rel, 1}, {"ModelsSelf", SymKind::Rel, 2},
      {"Models.", SymKind::Rel, 2}, {"Pr.", SymKind::Rel, 1}, {"Ax.", SymKind::Rel, 1},
      {"Fml.", SymKind::Rel, 1}, {"Sent.", SymKind::Rel, 1}, {"VarC", SymKind::Rel, 1},
      {"S", SymKind::Fn, 1}, {"+", SymKind::Fn, 2}, {"*", SymKind::Fn, 2},
      {"pred", SymKind::Fn, 1}, {"dneg", SymKind::Fn, 1}, {"dand", SymKind::Fn, 2},
      {"dor", SymKind::Fn, 2}, {"dimp", SymKind::Fn, 2}, {"diff", SymKind::Fn, 2},
      {"dall", SymKind::Fn, 2}, {"dex", SymKind::Fn, 2}, {"dsub", SymKind::Fn, 3},
      {"dnum", SymKind::Fn, 1}, {"dnumeral", SymKind::Fn, 1}, {"dpr.", SymKind::Fn, 1},
      {"put", SymKind::Fn, 3}, {"at", SymKind::Fn, 2}, {"numin", SymKind::Fn, 2},
      {"0", SymKind::Const, -1}, {"emp", SymKind::Const, -1},
  });
  return L;
}

const Language& Language::sat() {
  static const Language L = base().join(Language("", {{"Sat", SymKind::Rel, 2}}), "L_Sat");
  return L;
}

const Language& Language::uni_mod() {
  static const Language L =
      base().join(Language("", {{"Uni", SymKind::Rel, 1}, {"Mod", SymKind::Rel, 3}}), "L_UM");
  return L;
}

const Language& Language::plus() {
  static const Language L = base().join(
      Language("", {{"iota", SymKind::Fn, 1}, {"self", SymKind::Const, -1},
                    {"Iso", SymKind::Rel, 1}, {"Crsm", SymKind::Rel, 1}}),
      "L+");
  return L;
}

const Language& Language::full() {
  static const Language L = sat().join(uni_mod(), "").join(plus(), "full");
  return L;
}

const Language* Language::by_tag(const std::string& tag) {
  static const Language sat_plus = sat().join(plus(), "L_Sat+");
  static const Language um_plus = uni_mod().join(plus(), "L_UM+");
  if (tag == "L") return &base();
  if (tag == "L_Sat") return &sat();
  if (tag == "L_UM") return &uni_mod();
  if (tag == "L+") return &plus();
  if (tag == "L_Sat+") return &sat_plus;
  if (tag == "L_UM+") return &um_plus;
  if (tag == "full") return &full();
  return nullptr;
}

namespace {

void collect_symbols(const Expr& e, std::set<std::string>& out) {
  switch (e->kind) {
    case Kind::Quote: return;
    case Kind::Atom: case Kind::App: out.insert(e->name); break;
    case Kind::Const: out.insert(e->name); break;
    case Kind::Macro:
      if (e->name == "trbox" || e->name == "trdia" || e->name == "mod2") {
        out.insert("Uni");
        out.insert("Mod");
        out.insert("VAU");
        if (e->name == "trdia") out.insert("dneg");
      } else if (e->name == "tr") {
        out.insert("Sat");
        out.insert("VA");
      }
      break;
    default: break;
  }
  for (auto& k : e->kids) collect_symbols(k, out);
}

}  // namespace

std::set<std::string> symbols_of(const Expr& e) {
  std::set<std::string> s;
  collect_symbols(e, s);
  return s;
}

bool in_language(const Expr& e, const Language& lang, std::string* offending) {
  for (auto& s : symbols_of(e)) {
    if (!lang.has(s)) {
      if (offending) *offending = s;
      return false;
    }
  }
  return true;
}

// --- parser ---------------------------------------------------------------

namespace {

struct Tok {
  std::string text;
  std::size_t pos;
};

std::vector<Tok> tokenize(std::string_view s) {
  std::vector<Tok> out;
  std::size_t i = 0;
  while (i < s.size()) {
    char c = s[i];
    if (std::isspace(static_cast<unsigned char>(c))) { ++i; continue; }
    if (c == ';') break;  // trailing comment
    if (c == '(' || c == ')') { out.push_back({std::string(1, c), i}); ++i; continue; }
    std::size_t j = i;
    while (j < s.size() && !std::isspace(static_cast<unsigned char>(s[j])) && s[j] != '(' &&
           s[j] != ')' && s[j] != ';')
      ++j;
    out.push_back({std::string(s.substr(i, j - i)), i});
    i = j;
  }
  return out;
}

bool valid_var(const std::string& t) {
  if (t.empty() || !std::isalpha(static_cast<unsigned char>(t[0]))) return false;
  for (char c : t)
    if (!std::isalnum(static_cast<unsigned char>(c)) && c != '_' && c != '\'') return false;
  static const std::set<std::string> reserved = {
      "not", "and", "or", "imp", "iff", "all", "ex", "exu", "bot", "top", "quote",
      "trbox", "trdia", "tr", "mod2"};
  if (reserved.count(t)) return false;
  return !Language::full().has(t);
}

bool all_digits(const std::string& t) {
  return !t.empty() && std::all_of(t.begin(), t.end(), [](char c) { return std::isdigit(static_cast<unsigned char>(c)); });
}

enum class Want { Any, Term, Formula };

class Parser {
 public:
  Parser(std::string_view src, const Language& lang, bool pattern)
      : toks_(tokenize(src)), lang_(&lang), pattern_(pattern), len_(src.size()) {}

  Expr run(Want w) {
    Expr e = expr(w, *lang_);
    if (i_ != toks_.size()) throw ParseError("trailing input '" + toks_[i_].text + "'", toks_[i_].pos);
    return e;
  }

 private:
  std::vector<Tok> toks_;
  std::size_t i_ = 0;
  const Language* lang_;
  bool pattern_;
  std::size_t len_;

  const Tok& peek() {
    if (i_ >= toks_.size()) throw ParseError("unexpected end of input", len_);
    return toks_[i_];
  }
  Tok next() { Tok t = peek(); ++i_; return t; }
  void expect(const std::string& s) {
    Tok t = next();
    if (t.text != s) throw ParseError("expected '" + s + "' but found '" + t.text + "'", t.pos);
  }

  static void check_sort(const Expr& e, Want w, std::size_t pos) {
    if (e->kind == Kind::Meta || e->kind == Kind::MetaOp) return;
    if (w == Want::Term && !is_term(e)) throw ParseError("expected a term", pos);
    if (w == Want::Formula && !is_formula(e)) throw ParseError("expected a formula", pos);
  }

  std::string binder_var() {
    Tok t = next();
    if (pattern_ && !t.text.empty() && t.text[0] == '?') return t.text;
    if (!valid_var(t.text)) throw ParseError("bad bound variable '" + t.text + "'", t.pos);
    return t.text;
  }

  Expr expr(Want w, const Language& lang) {
    Tok t = next();
    Expr e;
    if (t.text == ")") throw ParseError("unexpected ')'", t.pos);
    if (t.text != "(") {
      e = leaf(t, lang);
    } else {
      e = list(peek(), lang);
    }
    check_sort(e, w, t.pos);
    return e;
  }

  Expr leaf(const Tok& t, const Language& lang) {
    const std::string& s = t.text;
    if (s == "bot") return bot();
    if (s == "top") return top();
    if (s[0] == '?') {
      if (!pattern_) throw ParseError("metavariable outside pattern", t.pos);
      return meta(s);
    }
    if (all_digits(s)) {
      if (!lang.has("0") || (s != "0" && !lang.has("S")))
        throw ParseError("symbol not in language: numeral", t.pos);
      return numeral(static_cast<unsigned>(std::stoul(s)));
    }
    if (const Symbol* sym = Language::full().find(s)) {
      if (sym->kind != SymKind::Const) throw ParseError("symbol '" + s + "' needs arguments", t.pos);
      if (!lang.has(s)) throw ParseError("symbol not in language: " + s, t.pos);
      return cnst(s);
    }
    if (!valid_var(s)) throw ParseError("bad identifier '" + s + "'", t.pos);
    return var(s);
  }

  std::vector<Expr> args(Want w, const Language& lang) {
    std::vector<Expr> out;
    while (peek().text != ")") out.push_back(expr(w, lang));
    ++i_;
    return out;
  }

  Expr list(const Tok& head, const Language& lang) {
    const std::string h = next().text;
    if (h == "(" || h == ")") throw ParseError("expected a symbol after '('", head.pos);
    auto arity = [&](std::size_t got, std::size_t want) {
      if (got != want)
        throw ParseError("'" + h + "' expects " + std::to_string(want) + " arguments", head.pos);
    };
    if (h == "not") { auto a = args(Want::Formula, lang); arity(a.size(), 1); return neg(a[0]); }
    if (h == "and" || h == "or" || h == "imp" || h == "iff") {
      auto a = args(Want::Formula, lang);
      arity(a.size(), 2);
      Kind k = h == "and" ? Kind::And : h == "or" ? Kind::Or : h == "imp" ? Kind::Imp : Kind::Iff;
      return make(k, "", a);
    }
    if (h == "all" || h == "ex" || h == "exu") {
      std::string v = binder_var();
      Expr body = expr(Want::Formula, lang);
      expect(")");
      return make(h == "all" ? Kind::All : h == "ex" ? Kind::Ex : Kind::ExU, v, {body});
    }
    if (h == "trbox" || h == "trdia" || h == "tr" || h == "mod2") {
      auto a = args(Want::Term, lang);
      arity(a.size(), h == "mod2" ? 2 : 1);
      return macro(h, a);
    }
    if (h == "quote") {
      Expr inner = expr(Want::Any, Language::full());
      expect(")");
      return quote(inner);
    }
    if (h == "bot" || h == "top") throw ParseError("'" + h + "' takes no arguments", head.pos);
    if (h[0] == '@') {
      if (!pattern_) throw ParseError("meta operation outside pattern", head.pos);
      return make(Kind::MetaOp, h, args(Want::Any, lang));
    }
    const Symbol* sym = Language::full().find(h);
    if (!sym) throw ParseError("unknown symbol '" + h + "'", head.pos);
    if (!lang.has(h)) throw ParseError("symbol not in language: " + h, head.pos);
    if (sym->kind == SymKind::Const) throw ParseError("constant '" + h + "' applied to arguments", head.pos);
    auto a = args(Want::Term, lang);
    arity(a.size(), static_cast<std::size_t>(sym->arity));
    return sym->kind == SymKind::Rel ? atom(h, a) : app(h, a);
  }
};

}  // namespace

Expr parse(std::string_view text, const Language& lang) { return Parser(text, lang, false).run(Want::Any); }
Expr parse_formula(std::string_view text, const Language& lang) { return Parser(text, lang, false).run(Want::Formula); }
Expr parse_term(std::string_view text, const Language& lang) { return Parser(text, lang, false).run(Want::Term); }
Expr parse_pattern(std::string_view text) { return Parser(text, Language::full(), true).run(Want::Any); }

// --- printer --------------------------------------------------------------

namespace {

void print_to(const Expr& e, std::string& out) {
  auto list = [&](const std::string& head) {
    out += '(';
    out += head;
    for (auto& k : e->kids) {
      out += ' ';
      print_to(k, out);
    }
    out += ')';
  };
  switch (e->kind) {
    case Kind::Var: case Kind::Const: case Kind::Meta: out += e->name; return;
    case Kind::Bot: out += "bot"; return;
    case Kind::Top: out += "top"; return;
    case Kind::App: case Kind::Atom: case Kind::Macro: case Kind::MetaOp: list(e->name); return;
    case Kind::Quote: list("quote"); return;
    case Kind::Not: list("not"); return;
    case Kind::And: list("and"); return;
    case Kind::Or: list("or"); return;
    case Kind::Imp: list("imp"); return;
    case Kind::Iff: list("iff"); return;
    case Kind::All: case Kind::Ex: case Kind::ExU:
      out += e->kind == Kind::All ? "(all " : e->kind == Kind::Ex ? "(ex " : "(exu ";
      out += e->name;
      out += ' ';
      print_to(e->kids[0], out);
      out += ')';
      return;
  }
}

}  // namespace

std::string print(const Expr& e) {
  std::string s;
  print_to(e, s);
  return s;
}

// --- structure ------------------------------------------------------------

namespace {

void fv(const Expr& e, std::vector<std::string>& bound, std::set<std::string>& out) {
  switch (e->kind) {
    case Kind::Quote: return;
    case Kind::Var:
      if (std::find(bound.begin(), bound.end(), e->name) == bound.end()) out.insert(e->name);
      return;
    case Kind::All: case Kind::Ex: case Kind::ExU:
      bound.push_back(e->name);
      fv(e->kids[0], bound, out);
      bound.pop_back();
      return;
    default:
      for (auto& k : e->kids) fv(k, bound, out);
  }
}

void key_to(const Expr& e, std::vector<std::string>& env, std::string& out) {
  switch (e->kind) {
    case Kind::Var: {
      for (std::size_t i = env.size(); i-- > 0;) {
        if (env[i] == e->name) {
          out += '#';
          out += std::to_string(i);
          return;
        }
      }
      out += e->name;
      return;
    }
    case Kind::Quote: {
      std::vector<std::string> inner;
      out += "(quote ";
      key_to(e->kids[0], inner, out);
      out += ')';
      return;
    }
    case Kind::All: case Kind::Ex: case Kind::ExU:
      out += e->kind == Kind::All ? "(all " : e->kind == Kind::Ex ? "(ex " : "(exu ";
      env.push_back(e->name);
      key_to(e->kids[0], env, out);
      env.pop_back();
      out += ')';
      return;
    case Kind::Const: case Kind::Meta: out += e->name; return;
    case Kind::Bot: out += "bot"; return;
    case Kind::Top: out += "top"; return;
    default:
      out += '(';
      out += std::to_string(static_cast<int>(e->kind));
      out += e->name;
      for (auto& k : e->kids) {
        out += ' ';
        key_to(k, env, out);
      }
      out += ')';
  }
}

int lookup(const std::vector<std::string>& env, const std::string& x) {
  for (std::size_t i = env.size(); i-- > 0;)
    if (env[i] == x) return static_cast<int>(i);
  return -1;
}

bool aeq(const Node* a, const Node* b, std::vector<std::string>& ea, std::vector<std::string>& eb) {
  if (a == b && ea.empty() && eb.empty()) return true;
  if (a->kind != b->kind) return false;
  switch (a->kind) {
    case Kind::Var: {
      int ia = lookup(ea, a->name), ib = lookup(eb, b->name);
      if (ia != ib) return false;
      return ia >= 0 || a->name == b->name;
    }
    case Kind::Quote: {
      std::vector<std::string> qa, qb;
      return aeq(a->kids[0].get(), b->kids[0].get(), qa, qb);
    }
    case Kind::All: case Kind::Ex: case Kind::ExU: {
      ea.push_back(a->name);
      eb.push_back(b->name);
      bool r = aeq(a->kids[0].get(), b->kids[0].get(), ea, eb);
      ea.pop_back();
      eb.pop_back();
      return r;
    }
    default:
      if (a->name != b->name || a->kids.size() != b->kids.size()) return false;
      for (std::size_t i = 0; i < a->kids.size(); ++i)
        if (!aeq(a->kids[i].get(), b->kids[i].get(), ea, eb)) return false;
      return true;
  }
}

}  // namespace

std::set<std::string> free_vars(const Expr& e) {
  std::vector<std::string> bound;
  std::set<std::string> out;
  fv(e, bound, out);
  return out;
}

bool is_closed(const Expr& e) { return free_vars(e).empty(); }
bool is_sentence(const Expr& e) { return is_formula(e) && is_closed(e); }

bool alpha_eq(const Expr& a, const Expr& b) {
  std::vector<std::string> ea, eb;
  return aeq(a.get(), b.get(), ea, eb);
}

std::string key(const Expr& e) {
  std::vector<std::string> env;
  std::string out;
  key_to(e, env, out);
  return out;
}

std::size_t size(const Expr& e) {
  std::size_t n = 1;
  for (auto& k : e->kids) n += size(k);
  return n;
}

int depth(const Expr& e) {
  int d = 0;
  for (auto& k : e->kids) d = std::max(d, depth(k));
  return d + 1;
}

std::string fresh(const std::string& base, const std::set<std::string>& avoid) {
  if (!avoid.count(base) && valid_var(base)) return base;
  for (int i = 1;; ++i) {
    std::string c = base + std::to_string(i);
    if (!avoid.count(c)) return c;
  }
}

namespace {

Expr subst_rec(const Expr& e, const std::map<std::string, Expr>& s) {
  switch (e->kind) {
    case Kind::Var: {
      auto it = s.find(e->name);
      return it == s.end() ? e : it->second;
    }
    case Kind::Quote: case Kind::Const: case Kind::Bot: case Kind::Top: case Kind::Meta:
      return e;
    case Kind::All: case Kind::Ex: case Kind::ExU: {
      std::map<std::string, Expr> inner = s;
      inner.erase(e->name);
      if (inner.empty()) return e;
      std::set<std::string> body_fv = free_vars(e->kids[0]);
      std::set<std::string> incoming;
      bool relevant = false;
      for (auto& [x, t] : inner) {
        if (!body_fv.count(x)) continue;
        relevant = true;
        auto f = free_vars(t);
        incoming.insert(f.begin(), f.end());
      }
      if (!relevant) return e;
      std::string v = e->name;
      Expr body = e->kids[0];
      if (incoming.count(v)) {
        std::set<std::string> avoid = incoming;
        avoid.insert(body_fv.begin(), body_fv.end());
        for (auto& [x, t] : inner) avoid.insert(x);
        std::string nv = fresh(v, avoid);
        body = subst_rec(body, {{v, var(nv)}});
        v = nv;
      }
      return make(e->kind, v, {subst_rec(body, inner)});
    }
    default: {
      std::vector<Expr> kids;
      kids.reserve(e->kids.size());
      bool changed = false;
      for (auto& k : e->kids) {
        kids.push_back(subst_rec(k, s));
        changed |= kids.back() != k;
      }
      return changed ? make(e->kind, e->name, std::move(kids)) : e;
    }
  }
}

}  // namespace

Expr substitute(const Expr& e, const std::map<std::string, Expr>& s) {
  if (s.empty()) return e;
  return subst_rec(e, s);
}

Expr substitute(const Expr& e, const std::string& x, const Expr& t) { return subst_rec(e, {{x, t}}); }

// --- abbreviations ------------------------------------------------------------

namespace {

Expr expand_mod2(const Expr& u, const Expr& t) {
  std::set<std::string> avoid = free_vars(u);
  auto ft = free_vars(t);
  avoid.insert(ft.begin(), ft.end());
  std::string f = fresh("f", avoid);
  return all(f, imp(atom("VAU", {var(f), u}), atom("Mod", {u, t, var(f)})));
}

Expr expand_trbox(const Expr& t) {
  std::string u = fresh("U", free_vars(t));
  return all(u, imp(atom("Uni", {var(u)}), expand_mod2(var(u), t)));
}

}  // namespace

Expr expand(const Expr& e) {
  switch (e->kind) {
    case Kind::Var: case Kind::Const: case Kind::Bot: case Kind::Top: case Kind::Meta:
      return e;
    case Kind::Macro: {
      std::vector<Expr> a;
      for (auto& k : e->kids) a.push_back(expand(k));
      if (e->name == "trbox") return expand_trbox(a[0]);
      if (e->name == "trdia") return neg(expand_trbox(app("dneg", {a[0]})));
      if (e->name == "mod2") return expand_mod2(a[0], a[1]);
      if (e->name == "tr") {
        std::string f = fresh("f", free_vars(a[0]));
        return all(f, imp(atom("VA", {var(f)}), atom("Sat", {a[0], var(f)})));
      }
      throw std::logic_error("unknown macro " + e->name);
    }
    case Kind::ExU: {
      Expr body = expand(e->kids[0]);
      std::set<std::string> avoid = free_vars(body);
      avoid.insert(e->name);
      std::string y = fresh("y", avoid);
      return ex(e->name, conj(body, all(y, imp(substitute(body, e->name, var(y)), eq(var(e->name), var(y))))));
    }
    default: {
      std::vector<Expr> kids;
      bool changed = false;
      for (auto& k : e->kids) {
        kids.push_back(expand(k));
        changed |= kids.back() != k;
      }
      return changed ? make(e->kind, e->name, std::move(kids)) : e;
    }
  }
}

bool match_mod2(const Expr& e, Expr& universe, Expr& code) {
  if (e->kind != Kind::All) return false;
  const std::string& f = e->name;
  const Expr& b = e->kids[0];
  if (b->kind != Kind::Imp) return false;
  const Expr& g = b->kids[0];
  const Expr& m = b->kids[1];
  if (g->kind != Kind::Atom || g->name != "VAU" || m->kind != Kind::Atom || m->name != "Mod") return false;
  if (g->kids[0]->kind != Kind::Var || g->kids[0]->name != f) return false;
  if (m->kids[2]->kind != Kind::Var || m->kids[2]->name != f) return false;
  if (!alpha_eq(g->kids[1], m->kids[0])) return false;
  if (free_vars(m->kids[0]).count(f) || free_vars(m->kids[1]).count(f)) return false;
  universe = m->kids[0];
  code = m->kids[1];
  return true;
}

bool match_trbox(const Expr& e, Expr& code) {
  if (e->kind != Kind::All) return false;
  const std::string& u = e->name;
  const Expr& b = e->kids[0];
  if (b->kind != Kind::Imp) return false;
  const Expr& g = b->kids[0];
  if (g->kind != Kind::Atom || g->name != "Uni" || g->kids[0]->kind != Kind::Var || g->kids[0]->name != u)
    return false;
  Expr uni, c;
  if (!match_mod2(b->kids[1], uni, c)) return false;
  if (uni->kind != Kind::Var || uni->name != u || free_vars(c).count(u)) return false;
  code = c;
  return true;
}

Expr wrap(const Prefix& p, Expr body) {
  for (auto it = p.rbegin(); it != p.rend(); ++it)
    body = all(it->var, it->guard ? imp(it->guard, body) : body);
  return body;
}

Prefix universe_prefix(const std::string& u, const std::string& f) {
  return {{u, atom("Uni", {var(u)})}, {f, atom("VAU", {var(f), var(u)})}};
}

}  // namespace mk
