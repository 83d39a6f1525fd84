#include "mkernel/modal.hpp"

#include <algorithm>
#include <cctype>
#include <functional>
#include <sstream>

#include "mkernel/checker.hpp"
#include "mkernel/generators.hpp"
#include "mkernel/theories.hpp"

namespace mk {

namespace {
ModalFormula mk_node(MKind k, std::vector<ModalFormula> kids, std::string v = {}) {
  return std::make_shared<const MNode>(MNode{k, std::move(v), std::move(kids)});
}
}  // namespace

ModalFormula mvar(std::string p) { return mk_node(MKind::Var, {}, std::move(p)); }
ModalFormula mnot(ModalFormula a) { return mk_node(MKind::Not, {std::move(a)}); }
ModalFormula mand(ModalFormula a, ModalFormula b) { return mk_node(MKind::And, {std::move(a), std::move(b)}); }
ModalFormula mor(ModalFormula a, ModalFormula b) { return mk_node(MKind::Or, {std::move(a), std::move(b)}); }
ModalFormula mimp(ModalFormula a, ModalFormula b) { return mk_node(MKind::Imp, {std::move(a), std::move(b)}); }
ModalFormula miff(ModalFormula a, ModalFormula b) { return mk_node(MKind::Iff, {std::move(a), std::move(b)}); }
ModalFormula mbox(ModalFormula a) { return mk_node(MKind::Box, {std::move(a)}); }
ModalFormula mdia(ModalFormula a) { return mk_node(MKind::Dia, {std::move(a)}); }
ModalFormula mbot() { return mk_node(MKind::Bot, {}); }
ModalFormula mtop() { return mk_node(MKind::Top, {}); }

// --- parse / print -------------------------------------------------------------

namespace {

class ModalParser {
 public:
  explicit ModalParser(std::string_view s) {
    std::string cur;
    auto flush = [&]() {
      if (!cur.empty()) toks_.push_back(cur);
      cur.clear();
    };
    for (char c : s) {
      if (c == '(' || c == ')') {
        flush();
        toks_.emplace_back(1, c);
      } else if (std::isspace(static_cast<unsigned char>(c))) {
        flush();
      } else {
        cur += c;
      }
    }
    flush();
  }

  ModalFormula run() {
    ModalFormula f = expr();
    if (i_ != toks_.size()) throw ModalError("trailing input '" + toks_[i_] + "'");
    return f;
  }

 private:
  const std::string& next() {
    if (i_ >= toks_.size()) throw ModalError("unexpected end of modal formula");
    return toks_[i_++];
  }

  ModalFormula expr() {
    std::string t = next();
    if (t == ")") throw ModalError("unexpected ')'");
    if (t != "(") {
      if (t == "bot") return mbot();
      if (t == "top") return mtop();
      if (!std::islower(static_cast<unsigned char>(t[0])) ||
          !std::all_of(t.begin(), t.end(), [](char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }))
        throw ModalError("bad propositional variable '" + t + "'");
      return mvar(t);
    }
    std::string h = next();
    std::vector<ModalFormula> a;
    while (i_ < toks_.size() && toks_[i_] != ")") a.push_back(expr());
    next();
    auto want = [&](std::size_t n) {
      if (a.size() != n) throw ModalError("'" + h + "' expects " + std::to_string(n) + " arguments");
    };
    if (h == "not") { want(1); return mnot(a[0]); }
    if (h == "box") { want(1); return mbox(a[0]); }
    if (h == "dia") { want(1); return mdia(a[0]); }
    if (h == "and") { want(2); return mand(a[0], a[1]); }
    if (h == "or") { want(2); return mor(a[0], a[1]); }
    if (h == "imp") { want(2); return mimp(a[0], a[1]); }
    if (h == "iff") { want(2); return miff(a[0], a[1]); }
    throw ModalError("unknown modal operator '" + h + "'");
  }

  std::vector<std::string> toks_;
  std::size_t i_ = 0;
};

const char* op_name(MKind k) {
  switch (k) {
    case MKind::Not: return "not";
    case MKind::And: return "and";
    case MKind::Or: return "or";
    case MKind::Imp: return "imp";
    case MKind::Iff: return "iff";
    case MKind::Box: return "box";
    case MKind::Dia: return "dia";
    default: return "";
  }
}

}  // namespace

ModalFormula parse_modal(std::string_view text) { return ModalParser(text).run(); }

std::string print_modal(const ModalFormula& f) {
  switch (f->kind) {
    case MKind::Var: return f->var;
    case MKind::Bot: return "bot";
    case MKind::Top: return "top";
    default: {
      std::string s = std::string("(") + op_name(f->kind);
      for (auto& k : f->kids) s += " " + print_modal(k);
      return s + ")";
    }
  }
}

std::set<std::string> modal_vars(const ModalFormula& f) {
  std::set<std::string> out;
  std::function<void(const ModalFormula&)> go = [&](const ModalFormula& g) {
    if (g->kind == MKind::Var) out.insert(g->var);
    for (auto& k : g->kids) go(k);
  };
  go(f);
  return out;
}

int modal_depth(const ModalFormula& f) {
  int d = 0;
  for (auto& k : f->kids) d = std::max(d, modal_depth(k));
  return d + (f->kind == MKind::Box || f->kind == MKind::Dia ? 1 : 0);
}

ModalFormula eliminate_dia(const ModalFormula& f) {
  if (f->kids.empty()) return f;
  std::vector<ModalFormula> kids;
  for (auto& k : f->kids) kids.push_back(eliminate_dia(k));
  if (f->kind == MKind::Dia) return mnot(mbox(mnot(kids[0])));
  return mk_node(f->kind, std::move(kids), f->var);
}

// --- Kripke models -------------------------------------------------------------

bool KripkeModel::holds(const ModalFormula& f, unsigned w) const {
  switch (f->kind) {
    case MKind::Var: return valuation.at(w).count(f->var) > 0;
    case MKind::Bot: return false;
    case MKind::Top: return true;
    case MKind::Not: return !holds(f->kids[0], w);
    case MKind::And: return holds(f->kids[0], w) && holds(f->kids[1], w);
    case MKind::Or: return holds(f->kids[0], w) || holds(f->kids[1], w);
    case MKind::Imp: return !holds(f->kids[0], w) || holds(f->kids[1], w);
    case MKind::Iff: return holds(f->kids[0], w) == holds(f->kids[1], w);
    case MKind::Box:
    case MKind::Dia: {
      bool box = f->kind == MKind::Box;
      for (auto& [a, b] : access)
        if (a == w && holds(f->kids[0], b) != box) return !box;
      return box;
    }
  }
  return false;
}

bool KripkeModel::transitive() const {
  for (auto& [a, b] : access)
    for (auto& [c, d] : access)
      if (b == c && !access.count({a, d})) return false;
  return true;
}

bool KripkeModel::irreflexive() const {
  return std::none_of(access.begin(), access.end(), [](auto& p) { return p.first == p.second; });
}

std::string KripkeModel::describe() const {
  std::ostringstream o;
  o << "worlds " << worlds << "\nroot w" << root << "\n";
  for (auto& [a, b] : access) o << "access w" << a << " w" << b << "\n";
  for (unsigned w = 0; w < worlds; ++w) {
    o << "true w" << w << ":";
    for (auto& v : valuation[w]) o << " " << v;
    o << "\n";
  }
  return o.str();
}

// --- tableau ---------------------------------------------------------------------

namespace {

// Signed formula: sign true means the formula holds at the world.
struct Signed {
  bool sign;
  ModalFormula f;
};

std::string fkey(const ModalFormula& f) { return print_modal(f); }

struct TabNode {
  std::set<std::string> true_vars;
  std::vector<std::unique_ptr<TabNode>> kids;
};

class Tableau {
 public:
  // Returns an open tableau tree for the set, or null when it closes.
  std::unique_ptr<TabNode> sat(std::vector<Signed> gamma) {
    // Propositional saturation with branching.
    std::map<std::string, bool> seen;  // key -> sign
    std::vector<Signed> todo = std::move(gamma), boxes;
    return expand(todo, 0, seen, boxes);
  }

 private:
  std::unique_ptr<TabNode> expand(std::vector<Signed> todo, std::size_t i, std::map<std::string, bool> seen,
                                  std::vector<Signed> boxes) {
    for (; i < todo.size(); ++i) {
      const Signed s = todo[i];
      std::string k = fkey(s.f);
      auto it = seen.find(k);
      if (it != seen.end()) {
        if (it->second != s.sign) return nullptr;
        continue;
      }
      seen.emplace(k, s.sign);
      const auto& a = s.f->kids;
      switch (s.f->kind) {
        case MKind::Bot: if (s.sign) return nullptr; break;
        case MKind::Top: if (!s.sign) return nullptr; break;
        case MKind::Var: break;
        case MKind::Not: todo.push_back({!s.sign, a[0]}); break;
        case MKind::And:
          if (s.sign) {
            todo.push_back({true, a[0]});
            todo.push_back({true, a[1]});
          } else {
            return branch(todo, i + 1, seen, boxes, {{false, a[0]}}, {{false, a[1]}});
          }
          break;
        case MKind::Or:
          if (!s.sign) {
            todo.push_back({false, a[0]});
            todo.push_back({false, a[1]});
          } else {
            return branch(todo, i + 1, seen, boxes, {{true, a[0]}}, {{true, a[1]}});
          }
          break;
        case MKind::Imp:
          if (!s.sign) {
            todo.push_back({true, a[0]});
            todo.push_back({false, a[1]});
          } else {
            return branch(todo, i + 1, seen, boxes, {{false, a[0]}}, {{true, a[1]}});
          }
          break;
        case MKind::Iff:
          if (s.sign)
            return branch(todo, i + 1, seen, boxes, {{true, a[0]}, {true, a[1]}}, {{false, a[0]}, {false, a[1]}});
          return branch(todo, i + 1, seen, boxes, {{true, a[0]}, {false, a[1]}}, {{false, a[0]}, {true, a[1]}});
        case MKind::Box: boxes.push_back(s); break;
        case MKind::Dia: todo.push_back({!s.sign, mbox(mnot(a[0]))}); break;
      }
    }
    return modal(seen, boxes);
  }

  std::unique_ptr<TabNode> branch(const std::vector<Signed>& todo, std::size_t i, const std::map<std::string, bool>& seen,
                                  const std::vector<Signed>& boxes, std::vector<Signed> left, std::vector<Signed> right) {
    for (auto* side : {&left, &right}) {
      std::vector<Signed> t(todo.begin() + static_cast<long>(i), todo.end());
      t.insert(t.end(), side->begin(), side->end());
      if (auto n = expand(std::move(t), 0, seen, boxes)) return n;
    }
    return nullptr;
  }

  // GL rule: for F box phi, a successor with T chi, T box chi for every
  // T box chi, plus F phi and T box phi.
  std::unique_ptr<TabNode> modal(const std::map<std::string, bool>& seen, const std::vector<Signed>& boxes) {
    auto node = std::make_unique<TabNode>();
    for (auto& [k, sign] : seen)
      if (sign && !k.empty() && k[0] != '(' && k != "top" && k != "bot") node->true_vars.insert(k);
    std::vector<ModalFormula> necessary;
    for (auto& b : boxes)
      if (b.sign) necessary.push_back(b.f->kids[0]);
    for (auto& b : boxes) {
      if (b.sign) continue;
      std::vector<Signed> succ;
      std::vector<std::string> key_parts;
      for (auto& n : necessary) {
        succ.push_back({true, n});
        succ.push_back({true, mbox(n)});
      }
      succ.push_back({false, b.f->kids[0]});
      succ.push_back({true, b.f});
      for (auto& s : succ) key_parts.push_back((s.sign ? "T" : "F") + fkey(s.f));
      std::sort(key_parts.begin(), key_parts.end());
      key_parts.erase(std::unique(key_parts.begin(), key_parts.end()), key_parts.end());
      std::string memo;
      for (auto& p : key_parts) memo += p + ";";
      auto m = closed_.find(memo);
      if (m != closed_.end()) return nullptr;
      auto child = sat(std::move(succ));
      if (!child) {
        closed_.insert(memo);
        return nullptr;
      }
      node->kids.push_back(std::move(child));
    }
    return node;
  }

  std::set<std::string> closed_;
};

void flatten(const TabNode& n, KripkeModel& m, std::vector<unsigned>& ancestors) {
  unsigned w = m.worlds++;
  m.valuation.push_back(n.true_vars);
  for (unsigned a : ancestors) m.access.insert({a, w});
  ancestors.push_back(w);
  for (auto& k : n.kids) flatten(*k, m, ancestors);
  ancestors.pop_back();
}

}  // namespace

bool gl_valid(const ModalFormula& f) {
  Tableau t;
  return t.sat({{false, f}}) == nullptr;
}

namespace {

// Strict partial orders on n worlds as successor bitmasks.
const std::vector<std::vector<unsigned>>& frames(unsigned n) {
  static std::map<unsigned, std::vector<std::vector<unsigned>>> cache;
  auto it = cache.find(n);
  if (it != cache.end()) return it->second;
  std::vector<std::pair<unsigned, unsigned>> pairs;
  for (unsigned a = 0; a < n; ++a)
    for (unsigned b = 0; b < n; ++b)
      if (a != b) pairs.push_back({a, b});
  std::vector<std::vector<unsigned>> out;
  for (unsigned long mask = 0; mask < (1ul << pairs.size()); ++mask) {
    std::vector<unsigned> succ(n, 0);
    for (std::size_t i = 0; i < pairs.size(); ++i)
      if (mask >> i & 1) succ[pairs[i].first] |= 1u << pairs[i].second;
    bool ok = true;
    for (unsigned a = 0; a < n && ok; ++a)
      for (unsigned b = 0; b < n && ok; ++b)
        if (succ[a] >> b & 1) ok = (succ[b] & ~succ[a]) == 0 && !(succ[b] >> a & 1);
    if (ok) out.push_back(std::move(succ));
  }
  return cache.emplace(n, std::move(out)).first->second;
}

unsigned truth_set(const ModalFormula& f, const std::vector<unsigned>& succ, const std::map<std::string, unsigned>& val,
                   unsigned all) {
  const auto& a = f->kids;
  switch (f->kind) {
    case MKind::Var: return val.at(f->var);
    case MKind::Bot: return 0;
    case MKind::Top: return all;
    case MKind::Not: return all & ~truth_set(a[0], succ, val, all);
    case MKind::And: return truth_set(a[0], succ, val, all) & truth_set(a[1], succ, val, all);
    case MKind::Or: return truth_set(a[0], succ, val, all) | truth_set(a[1], succ, val, all);
    case MKind::Imp: return (all & ~truth_set(a[0], succ, val, all)) | truth_set(a[1], succ, val, all);
    case MKind::Iff: return all & ~(truth_set(a[0], succ, val, all) ^ truth_set(a[1], succ, val, all));
    case MKind::Box:
    case MKind::Dia: {
      unsigned s = truth_set(a[0], succ, val, all), out = 0;
      for (unsigned w = 0; w < succ.size(); ++w) {
        bool v = f->kind == MKind::Box ? (succ[w] & ~s) == 0 : (succ[w] & s) != 0;
        if (v) out |= 1u << w;
      }
      return out;
    }
  }
  return 0;
}

}  // namespace

std::optional<KripkeModel> brute_countermodel(const ModalFormula& f, unsigned max_worlds) {
  if (max_worlds > 5) throw ModalError("exhaustive search is limited to five worlds");
  std::set<std::string> vs = modal_vars(f);
  std::vector<std::string> vars(vs.begin(), vs.end());
  for (unsigned n = 1; n <= max_worlds; ++n) {
    const unsigned all = (1u << n) - 1;
    const unsigned long vals = 1ul << (n * vars.size());
    for (const auto& succ : frames(n)) {
      for (unsigned long v = 0; v < vals; ++v) {
        std::map<std::string, unsigned> val;
        for (std::size_t i = 0; i < vars.size(); ++i) val[vars[i]] = static_cast<unsigned>(v >> (i * n)) & all;
        unsigned t = truth_set(f, succ, val, all);
        if (t == all) continue;
        KripkeModel m;
        m.worlds = n;
        m.valuation.resize(n);
        for (unsigned w = 0; w < n; ++w) {
          for (unsigned b = 0; b < n; ++b)
            if (succ[w] >> b & 1) m.access.insert({w, b});
          for (auto& [name, bits] : val)
            if (bits >> w & 1) m.valuation[w].insert(name);
        }
        while (t >> m.root & 1) ++m.root;
        return m;
      }
    }
  }
  return std::nullopt;
}

std::optional<KripkeModel> gl_countermodel(const ModalFormula& f) {
  Tableau t;
  auto tree = t.sat({{false, f}});
  if (!tree) return std::nullopt;
  if (auto m = brute_countermodel(f, 4)) return m;
  KripkeModel m;
  std::vector<unsigned> anc;
  flatten(*tree, m, anc);
  if (m.holds(f, 0)) throw std::logic_error("tableau model does not refute " + print_modal(f));
  return m;
}

std::vector<ModalFormula> enumerate_modal(unsigned depth, const std::vector<std::string>& vars) {
  std::vector<std::vector<ModalFormula>> by_depth(depth + 1);
  for (auto& v : vars) by_depth[0].push_back(mvar(v));
  by_depth[0].push_back(mbot());
  by_depth[0].push_back(mtop());
  for (unsigned d = 1; d <= depth; ++d) {
    std::vector<ModalFormula> lower;
    for (unsigned e = 0; e < d; ++e) lower.insert(lower.end(), by_depth[e].begin(), by_depth[e].end());
    for (auto& a : by_depth[d - 1]) {
      by_depth[d].push_back(mnot(a));
      by_depth[d].push_back(mbox(a));
      by_depth[d].push_back(mdia(a));
    }
    for (auto& a : lower)
      for (auto& b : lower) {
        bool top = std::find(by_depth[d - 1].begin(), by_depth[d - 1].end(), a) != by_depth[d - 1].end() ||
                   std::find(by_depth[d - 1].begin(), by_depth[d - 1].end(), b) != by_depth[d - 1].end();
        if (!top) continue;
        by_depth[d].push_back(mand(a, b));
        by_depth[d].push_back(mor(a, b));
        by_depth[d].push_back(mimp(a, b));
        by_depth[d].push_back(miff(a, b));
      }
  }
  std::vector<ModalFormula> out;
  for (auto& v : by_depth) out.insert(out.end(), v.begin(), v.end());
  return out;
}

// --- embedding ------------------------------------------------------------------

Expr embed(const ModalFormula& f, const std::map<std::string, Expr>& valuation) {
  const auto& a = f->kids;
  switch (f->kind) {
    case MKind::Var: {
      auto it = valuation.find(f->var);
      if (it == valuation.end()) throw ModalError("no sentence for variable " + f->var);
      Expr s = expand(it->second);
      if (!is_sentence(s)) throw ModalError("valuation of " + f->var + " is not a sentence");
      return s;
    }
    case MKind::Bot: return bot();
    case MKind::Top: return top();
    case MKind::Not: return neg(embed(a[0], valuation));
    case MKind::And: return conj(embed(a[0], valuation), embed(a[1], valuation));
    case MKind::Or: return disj(embed(a[0], valuation), embed(a[1], valuation));
    case MKind::Imp: return imp(embed(a[0], valuation), embed(a[1], valuation));
    case MKind::Iff: return iff(embed(a[0], valuation), embed(a[1], valuation));
    case MKind::Box: return ax::box(quote(embed(a[0], valuation)));
    case MKind::Dia: return neg(ax::box(quote(neg(embed(a[0], valuation)))));
  }
  throw ModalError("unreachable");
}

ProofScript k_axiom_proof(const ModalFormula& s, const ModalFormula& t, const std::map<std::string, Expr>& valuation) {
  return generate_box_lemma("CMbox_imp", {embed(s, valuation), embed(t, valuation)}).proof;
}

ProofScript necessitation_proof(const ModalFormula& s, const std::map<std::string, Expr>& valuation) {
  Expr e = embed(s, valuation);
  if (!is_closed_tautology(e)) throw ModalError(print_modal(s) + " does not embed to a tautology");
  ProofBuilder b;
  b.nec(b.taut(e));
  return b.take();
}

}  // namespace mk
