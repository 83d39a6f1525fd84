#include "mkernel/revision.hpp"

#include <algorithm>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>

#include "mkernel/coding.hpp"
#include "mkernel/theories.hpp"

namespace mk {

// --- structures ----------------------------------------------------------------

int FiniteStructure::element(const std::string& n) const {
  auto it = std::find(elements.begin(), elements.end(), n);
  return it == elements.end() ? -1 : static_cast<int>(it - elements.begin());
}

std::vector<int> FiniteStructure::ordinary() const {
  std::vector<int> out;
  for (int e = 0; e < static_cast<int>(elements.size()); ++e)
    if (!is_code(e)) out.push_back(e);
  return out;
}

int FiniteStructure::code_of(const Expr& phi) const {
  std::string k = key(phi);
  for (auto& [e, f] : quote_map)
    if (key(f) == k) return e;
  return -1;
}

bool FiniteStructure::mod(int u, int c, const std::vector<int>& args) const {
  auto it = internal_mod.find({u, c});
  return it != internal_mod.end() && it->second.count(args) > 0;
}

std::set<int> MultiverseState::uni_pool_at(unsigned n) const {
  if (schedule.empty()) {
    std::set<int> all;
    for (int i = 0; i < static_cast<int>(pool.size()); ++i) all.insert(i);
    return all;
  }
  auto it = schedule.upper_bound(n);
  if (it == schedule.begin()) return {};
  return std::prev(it)->second;
}

int MultiverseState::index_of(const std::string& structure) const {
  for (int i = 0; i < static_cast<int>(pool.size()); ++i)
    if (pool[i].name == structure) return i;
  return -1;
}

// --- evaluation ----------------------------------------------------------------

namespace {

struct Value {
  int elem = -1;
  bool is_asg = false;
  int universe = -1;     // assignments: the universe-denoting element
  std::vector<int> asg;  // indexed by stock position
};

class Evaluator {
 public:
  explicit Evaluator(const MultiverseState& s) : s_(s), terms_(s.pool.size()), ordinary_(s.pool.size()) {
    for (std::size_t i = 0; i < s.pool.size(); ++i) ordinary_[i] = s.pool[i].ordinary();
  }

  const std::vector<int>& ordinary(int m) const { return ordinary_[m]; }

  // Stock positions of the free variables of the formula coded by c in m.
  const std::vector<int>& positions(int m, int c) {
    auto k = std::make_pair(m, c);
    auto it = pos_.find(k);
    if (it != pos_.end()) return it->second;
    std::vector<int> p;
    for (const std::string& v : free_vars(s_.pool[m].quote_map.at(c))) {
      auto at = std::find(s_.stock.begin(), s_.stock.end(), v);
      if (at == s_.stock.end()) throw RevisionError("variable " + v + " is outside the stock");
      p.push_back(static_cast<int>(at - s_.stock.begin()));
    }
    return pos_.emplace(k, std::move(p)).first->second;
  }

  bool eval(int m, const Expr& e, std::vector<std::pair<std::string, Value>>& env) {
    const FiniteStructure& M = s_.pool[m];
    switch (e->kind) {
      case Kind::Bot: return false;
      case Kind::Top: return true;
      case Kind::Not: return !eval(m, e->kids[0], env);
      case Kind::And: return eval(m, e->kids[0], env) && eval(m, e->kids[1], env);
      case Kind::Or: return eval(m, e->kids[0], env) || eval(m, e->kids[1], env);
      case Kind::Imp: return !eval(m, e->kids[0], env) || eval(m, e->kids[1], env);
      case Kind::Iff: return eval(m, e->kids[0], env) == eval(m, e->kids[1], env);
      case Kind::All: case Kind::Ex: return quantifier(m, e, env);
      case Kind::Atom: break;
      default: throw RevisionError("cannot evaluate " + print(e));
    }
    const std::string& r = e->name;
    const auto& a = e->kids;
    if (r == "=" || r == "in") {
      int x = elem(m, a[0], env), y = elem(m, a[1], env);
      if (x < 0 || y < 0) return false;
      return r == "=" ? x == y : M.membership.count({x, y}) > 0;
    }
    if (r == "Uni") {
      int x = elem(m, a[0], env);
      return x >= 0 && M.internal_uni.count(x) > 0;
    }
    if (r == "VAU") {
      const Value* f = lookup(a[0], env);
      int u = elem(m, a[1], env);
      return f && f->is_asg && u >= 0 && f->universe == u;
    }
    if (r == "Mod") {
      int u = elem(m, a[0], env), c = elem(m, a[1], env);
      const Value* f = lookup(a[2], env);
      if (u < 0 || c < 0 || !f || !f->is_asg || f->universe != u || !M.is_code(c)) return false;
      const std::vector<int>& p = positions(m, c);
      std::vector<int> args;
      args.reserve(p.size());
      for (int i : p) args.push_back(f->asg[i]);
      return M.mod(u, c, args);
    }
    throw RevisionError("symbol " + r + " is not interpreted by the simulator");
  }

 private:
  static const Value* lookup(const Expr& t, const std::vector<std::pair<std::string, Value>>& env) {
    if (t->kind != Kind::Var) return nullptr;
    for (auto it = env.rbegin(); it != env.rend(); ++it)
      if (it->first == t->name) return &it->second;
    throw RevisionError("unassigned variable " + t->name);
  }

  // Element denoted by t, -1 when undefined.
  int elem(int m, const Expr& t, const std::vector<std::pair<std::string, Value>>& env) {
    if (t->kind == Kind::Var) {
      const Value* v = lookup(t, env);
      return v->is_asg ? -1 : v->elem;
    }
    auto& cache = terms_[m];
    auto it = cache.find(t.get());
    if (it != cache.end()) return it->second;
    int out = -1;
    const FiniteStructure& M = s_.pool[m];
    if (t->kind == Kind::Const) {
      out = M.element(t->name);
    } else if (t->kind == Kind::Quote) {
      out = M.code_of(t->kids[0]);
    } else if (t->kind == Kind::App && is_closed(t)) {
      Expr n = coding_normalize(t);
      if (n->kind == Kind::Quote) out = M.code_of(n->kids[0]);
    } else if (!is_closed(t)) {
      throw RevisionError("cannot evaluate term " + print(t));
    }
    cache.emplace(t.get(), out);
    return out;
  }

  // Stock positions the body reads through the assignment variable f; every
  // position when that cannot be bounded.
  std::vector<int> needed(int m, const std::string& f, const Expr& body,
                          const std::vector<std::pair<std::string, Value>>& env) {
    std::set<int> out;
    bool all = false;
    std::function<void(const Expr&)> walk = [&](const Expr& e) {
      if (all) return;
      if (e->kind == Kind::Quote) return;
      if (e->kind == Kind::Atom && e->name == "Mod" && e->kids[2]->kind == Kind::Var && e->kids[2]->name == f) {
        walk(e->kids[0]);
        const Expr& code = e->kids[1];
        if (code->kind == Kind::Var) {
          all = true;
          return;
        }
        walk(code);
        if (is_closed(code)) {
          int c = elem(m, code, env);
          if (c >= 0 && s_.pool[m].is_code(c))
            for (int i : positions(m, c)) out.insert(i);
        } else {
          all = true;
        }
        return;
      }
      if (e->kind == Kind::Atom && e->name == "VAU" && e->kids[0]->kind == Kind::Var && e->kids[0]->name == f) {
        walk(e->kids[1]);
        return;
      }
      if (e->kind == Kind::Var && e->name == f) {
        all = true;
        return;
      }
      if (is_binder(e->kind) && e->name == f) return;
      for (auto& k : e->kids) walk(k);
    };
    walk(body);
    if (all) {
      std::vector<int> every(s_.stock.size());
      for (std::size_t i = 0; i < every.size(); ++i) every[i] = static_cast<int>(i);
      return every;
    }
    return {out.begin(), out.end()};
  }

  bool quantifier(int m, const Expr& e, std::vector<std::pair<std::string, Value>>& env) {
    const bool universal = e->kind == Kind::All;
    const Expr& body = e->kids[0];
    const std::string& x = e->name;
    // Assignment quantifier: all f (VAU f t -> .) / ex f (VAU f t & .)
    Kind link = universal ? Kind::Imp : Kind::And;
    if (body->kind == link && body->kids[0]->kind == Kind::Atom && body->kids[0]->name == "VAU" &&
        body->kids[0]->kids[0]->kind == Kind::Var && body->kids[0]->kids[0]->name == x) {
      int u = elem(m, body->kids[0]->kids[1], env);
      const FiniteStructure& M = s_.pool[m];
      auto d = M.denotes.find(u);
      if (u < 0 || d == M.denotes.end()) return universal;
      const std::vector<int>& dom = ordinary_.at(d->second);
      const std::size_t n = s_.stock.size();
      if (n > 0 && dom.empty()) return universal;
      std::vector<int> free_pos = needed(m, x, body->kids[1], env);
      Value v;
      v.is_asg = true;
      v.universe = u;
      v.asg.assign(n, n > 0 ? dom[0] : -1);
      env.emplace_back(x, v);
      std::vector<std::size_t> idx(free_pos.size(), 0);
      bool result = universal;
      while (true) {
        Value& cur = env.back().second;
        for (std::size_t i = 0; i < free_pos.size(); ++i) cur.asg[free_pos[i]] = dom[idx[i]];
        bool b = eval(m, body->kids[1], env);
        if (b != universal) {
          result = !universal;
          break;
        }
        std::size_t i = 0;
        while (i < idx.size() && ++idx[i] == dom.size()) idx[i++] = 0;
        if (i == idx.size()) break;
      }
      env.pop_back();
      return result;
    }
    Value v;
    env.emplace_back(x, v);
    bool result = universal;
    for (int a : ordinary_[m]) {
      env.back().second.elem = a;
      if (eval(m, body, env) != universal) {
        result = !universal;
        break;
      }
    }
    env.pop_back();
    return result;
  }

  const MultiverseState& s_;
  std::vector<std::map<const Node*, int>> terms_;
  std::vector<std::vector<int>> ordinary_;
  std::map<std::pair<int, int>, std::vector<int>> pos_;
};

bool has_macro(const Expr& e) {
  if (e->kind == Kind::Macro || e->kind == Kind::ExU) return true;
  if (e->kind == Kind::Quote) return false;
  return std::any_of(e->kids.begin(), e->kids.end(), has_macro);
}

std::vector<std::pair<std::string, Value>> env_of(const Expr& phi, const std::vector<int>& args) {
  std::vector<std::pair<std::string, Value>> env;
  std::size_t i = 0;
  for (const std::string& v : free_vars(phi)) {
    Value val;
    val.elem = args.at(i++);
    env.emplace_back(v, val);
  }
  return env;
}

// Calls fn on every tuple over dom of length n.
template <class F>
void for_tuples(const std::vector<int>& dom, std::size_t n, F&& fn) {
  if (n > 0 && dom.empty()) return;
  std::vector<std::size_t> idx(n, 0);
  std::vector<int> t(n);
  while (true) {
    for (std::size_t i = 0; i < n; ++i) t[i] = dom[idx[i]];
    fn(t);
    std::size_t i = 0;
    while (i < n && ++idx[i] == dom.size()) idx[i++] = 0;
    if (i == n) return;
  }
}

}  // namespace

bool evaluate(const MultiverseState& s, int structure, const Expr& phi, const Assignment& f) {
  if (structure < 0 || structure >= static_cast<int>(s.pool.size())) throw RevisionError("no such structure");
  Expr e = has_macro(phi) ? expand(phi) : phi;
  std::vector<std::pair<std::string, Value>> env;
  for (const std::string& v : free_vars(e)) {
    auto it = f.find(v);
    if (it == f.end()) throw RevisionError("unassigned variable " + v);
    Value val;
    val.elem = it->second;
    env.emplace_back(v, val);
  }
  Evaluator ev(s);
  return ev.eval(structure, e, env);
}

MultiverseState revise(const MultiverseState& s) {
  MultiverseState n = s;
  n.stage = s.stage + 1;
  n.uni_pool = s.uni_pool_at(n.stage);
  Evaluator ev(s);
  for (std::size_t i = 0; i < s.pool.size(); ++i) {
    const FiniteStructure& M = s.pool[i];
    FiniteStructure& out = n.pool[i];
    out.internal_uni.clear();
    out.internal_mod.clear();
    for (auto& [u, target] : M.denotes) {
      if (target < 0 || target >= static_cast<int>(s.pool.size()))
        throw RevisionError(M.name + ": element " + M.elements[u] + " denotes no structure");
    }
    for (int u : M.internal_uni) {
      auto d = M.denotes.find(u);
      if (d == M.denotes.end()) throw RevisionError(M.name + ": universe element " + M.elements[u] + " is dangling");
      int v = d->second;
      if (!n.uni_pool.count(v)) continue;
      out.internal_uni.insert(u);
      for (auto& [c, phi] : M.quote_map) {
        std::set<std::vector<int>> yes;
        std::size_t arity = ev.positions(static_cast<int>(i), c).size();
        for_tuples(ev.ordinary(v), arity, [&](const std::vector<int>& args) {
          auto env = env_of(phi, args);
          if (ev.eval(v, phi, env)) yes.insert(args);
        });
        if (!yes.empty()) out.internal_mod[{u, c}] = std::move(yes);
      }
    }
  }
  return n;
}

// --- externalization -------------------------------------------------------------

FiniteStructure externalize(const FiniteStructure& M, int a) {
  if (a < 0 || a >= static_cast<int>(M.elements.size())) throw RevisionError("no such element");
  std::vector<int> keep;
  for (int x = 0; x < static_cast<int>(M.elements.size()); ++x)
    if (M.membership.count({x, a})) keep.push_back(x);
  std::map<int, int> to;
  FiniteStructure E;
  E.name = M.name + "/" + M.elements[a];
  for (int x : keep) {
    to[x] = static_cast<int>(E.elements.size());
    E.elements.push_back(M.elements[x]);
  }
  auto in = [&](int x) { return to.count(x) > 0; };
  for (auto& [x, y] : M.membership)
    if (in(x) && in(y)) E.membership.insert({to[x], to[y]});
  for (int u : M.internal_uni)
    if (in(u)) E.internal_uni.insert(to[u]);
  for (auto& [u, t] : M.denotes)
    if (in(u)) E.denotes[to[u]] = t;
  for (auto& [c, f] : M.quote_map)
    if (in(c)) E.quote_map[to[c]] = f;
  for (auto& [uc, rows] : M.internal_mod) {
    if (!in(uc.first) || !in(uc.second)) continue;
    // Assignment values live in the denoted structure, not in M.
    E.internal_mod[{to[uc.first], to[uc.second]}] = rows;
  }
  return E;
}

namespace {

std::set<int> members(const FiniteStructure& M, int a) {
  std::set<int> out;
  for (auto& [x, y] : M.membership)
    if (y == a) out.insert(x);
  return out;
}

// Kuratowski pair {{x},{x,y}}.
bool decode_pair(const FiniteStructure& M, int t, int& x, int& y) {
  std::set<int> ms = members(M, t);
  if (ms.empty() || ms.size() > 2) return false;
  std::vector<std::set<int>> parts;
  for (int m : ms) parts.push_back(members(M, m));
  std::set<int> common = parts[0], all = parts[0];
  for (auto& p : parts) {
    std::set<int> c;
    std::set_intersection(common.begin(), common.end(), p.begin(), p.end(), std::inserter(c, c.begin()));
    common = c;
    all.insert(p.begin(), p.end());
  }
  if (common.size() != 1) return false;
  x = *common.begin();
  if (all.size() == 1) {
    if (ms.size() != 1) return false;
    y = x;
    return true;
  }
  if (all.size() != 2 || ms.size() != 2) return false;
  bool singleton = false;
  for (auto& p : parts) singleton = singleton || p.size() == 1;
  if (!singleton) return false;
  all.erase(x);
  y = *all.begin();
  return true;
}

bool decode_tuple(const FiniteStructure& M, int t, unsigned arity, std::vector<int>& out) {
  if (arity == 1) {
    out.push_back(t);
    return true;
  }
  int x, rest;
  if (!decode_pair(M, t, x, rest)) return false;
  out.push_back(x);
  return decode_tuple(M, rest, arity - 1, out);
}

}  // namespace

std::vector<std::vector<int>> externalize_tuples(const FiniteStructure& M, int a, unsigned arity) {
  if (arity == 0) throw RevisionError("tuple arity must be positive");
  std::vector<std::vector<int>> out;
  for (int t : members(M, a)) {
    std::vector<int> tup;
    if (decode_tuple(M, t, arity, tup)) out.push_back(std::move(tup));
  }
  return out;
}

// --- stage checks ----------------------------------------------------------------

std::string StageReport::summary() const {
  std::ostringstream o;
  o << "stage " << stage << ": " << (ok() ? "ok" : "FAILED");
  for (auto& [k, n] : checked) o << " " << k << "=" << n;
  for (auto& s : skipped) o << "\n  skipped " << s;
  for (auto& v : violations) o << "\n  violation " << v;
  return o.str();
}

namespace {

std::string slot(const FiniteStructure& M, int u, int c, const std::vector<int>& args, const MultiverseState& s,
                 int v) {
  std::ostringstream o;
  o << M.name << " u=" << M.elements[u] << " c=" << M.elements[c] << " [";
  for (std::size_t i = 0; i < args.size(); ++i) o << (i ? " " : "") << s.pool[v].elements[args[i]];
  o << "]";
  return o.str();
}

// Values of phi's free variables under the assignment `vars`.
std::vector<int> project(const Expr& phi, const std::map<std::string, int>& vars) {
  std::vector<int> out;
  for (const std::string& v : free_vars(phi)) out.push_back(vars.at(v));
  return out;
}

}  // namespace

StageReport check_stage_axioms(const MultiverseState& s) {
  StageReport r;
  r.stage = s.stage;
  Evaluator ev(s);
  for (std::size_t i = 0; i < s.pool.size(); ++i) {
    const FiniteStructure& M = s.pool[i];
    for (int u : M.internal_uni) {
      auto d = M.denotes.find(u);
      if (d == M.denotes.end()) throw RevisionError(M.name + ": universe element " + M.elements[u] + " is dangling");
      int v = d->second;
      for (auto& [c, phi] : M.quote_map) {
        const std::set<std::string> fvs = free_vars(phi);
        std::vector<std::string> fv(fvs.begin(), fvs.end());
        std::string schema;
        int sub0 = -1, sub1 = -1;
        switch (phi->kind) {
          case Kind::Atom:
            if (phi->name == "=" || phi->name == "in") schema = "CM_eq";
            break;
          case Kind::Not:
            sub0 = M.code_of(phi->kids[0]);
            if (sub0 >= 0) schema = "CM_not";
            break;
          case Kind::And:
            sub0 = M.code_of(phi->kids[0]);
            sub1 = M.code_of(phi->kids[1]);
            if (sub0 >= 0 && sub1 >= 0) schema = "CM_and";
            break;
          case Kind::All:
            sub0 = M.code_of(phi->kids[0]);
            if (sub0 >= 0) schema = "CM_all";
            break;
          default: break;
        }
        if (schema.empty()) continue;
        for_tuples(ev.ordinary(v), fv.size(), [&](const std::vector<int>& args) {
          std::map<std::string, int> vars;
          for (std::size_t k = 0; k < fv.size(); ++k) vars[fv[k]] = args[k];
          bool lhs = M.mod(u, c, args), rhs;
          if (schema == "CM_eq") {
            auto env = env_of(phi, args);
            rhs = ev.eval(v, phi, env);
          } else if (schema == "CM_not") {
            rhs = !M.mod(u, sub0, args);
          } else if (schema == "CM_and") {
            rhs = M.mod(u, sub0, project(phi->kids[0], vars)) && M.mod(u, sub1, project(phi->kids[1], vars));
          } else {
            rhs = true;
            for (int e : ev.ordinary(v)) {
              vars[phi->name] = e;
              if (!M.mod(u, sub0, project(phi->kids[0], vars))) {
                rhs = false;
                break;
              }
            }
          }
          ++r.checked[schema];
          if (lhs != rhs) r.violations.push_back(schema + " at " + slot(M, u, c, args, s, v));
        });
      }
    }
    // Box propositions, evaluated in M.
    const bool nontrivial = !M.internal_uni.empty();
    std::vector<std::pair<std::string, Expr>> props;
    auto coded = [&](const Expr& f) { return M.code_of(f) >= 0; };
    for (auto& [c, phi] : M.quote_map) {
      if (!is_sentence(phi)) continue;
      const auto& k = phi->kids;
      if ((phi->kind == Kind::And || phi->kind == Kind::Imp || phi->kind == Kind::Iff) && coded(k[0]) && coded(k[1])) {
        std::string l = phi->kind == Kind::And ? "CMbox_and" : phi->kind == Kind::Imp ? "CMbox_imp" : "CMbox_iff";
        props.emplace_back(l, ax::box_lemma(l, {k[0], k[1]}));
      }
      if (phi->kind == Kind::Not && coded(k[0])) {
        props.emplace_back("CMdia", ax::box_lemma("CMdia", {k[0]}));
        if (nontrivial) {
          props.emplace_back("CMbox_not", ax::box_lemma("CMbox_not", {k[0]}));
          props.emplace_back("D_CM", ax::box_lemma("D_CM", {k[0]}));
        }
      }
      if (phi->kind == Kind::Bot && nontrivial) props.emplace_back("CMbox_bot", ax::box_lemma("CMbox_bot", {}));
    }
    if (!nontrivial) r.skipped.insert("CMbox_bot, CMbox_not, D_CM in " + M.name + " (internal Uni empty)");
    for (auto& [label, f] : props) {
      std::vector<std::pair<std::string, Value>> env;
      ++r.checked[label];
      if (!ev.eval(static_cast<int>(i), f, env)) r.violations.push_back(label + " in " + M.name + ": " + print(f));
    }
  }
  return r;
}

StageReport soundness_closure_check(const MultiverseState& s, const std::vector<Expr>& sentences) {
  std::vector<Expr> pool;
  std::set<std::string> keys;
  for (const Expr& e : sentences) {
    Expr x = has_macro(e) ? expand(e) : e;
    if (!is_sentence(x)) throw RevisionError("not a sentence: " + print(e));
    pool.push_back(x);
    keys.insert(key(x));
  }
  for (const Expr& x : pool) {
    switch (x->kind) {
      case Kind::Not: case Kind::And: case Kind::Or: case Kind::Imp: case Kind::Iff:
        for (auto& k : x->kids)
          if (!keys.count(key(k))) throw RevisionError("pool is not closed under subformulas: missing " + print(k));
        break;
      default: break;
    }
  }
  StageReport r;
  r.stage = s.stage;
  for (const FiniteStructure& M : s.pool) {
    for (const Expr& ab : pool) {
      if (ab->kind != Kind::Imp) continue;
      int cab = M.code_of(ab), ca = M.code_of(ab->kids[0]), cb = M.code_of(ab->kids[1]);
      for (int u : M.internal_uni) {
        ++r.checked["MP"];
        bool a = ca >= 0 && M.mod(u, ca, {}), i = cab >= 0 && M.mod(u, cab, {});
        bool b = cb >= 0 && M.mod(u, cb, {});
        if (a && i && !b) r.violations.push_back("MP at " + M.name + " u=" + M.elements[u] + ": " + print(ab));
      }
    }
  }
  return r;
}

// --- scenarios -------------------------------------------------------------------

namespace {

struct PendingMod {
  int structure;
  std::string u, c;
  std::vector<std::pair<std::string, std::string>> args;
  int line;
};

std::string err_at(int line, const std::string& m) { return "scenario line " + std::to_string(line) + ": " + m; }

void finalize(MultiverseState& s, const std::map<int, std::map<int, std::string>>& denote_names,
              const std::vector<PendingMod>& mods) {
  for (auto& [i, dn] : denote_names) {
    for (auto& [u, name] : dn) {
      int t = s.index_of(name);
      if (t < 0) throw RevisionError(s.pool[i].name + ": element " + s.pool[i].elements[u] + " denotes unknown structure " + name);
      s.pool[i].denotes[u] = t;
    }
  }
  std::set<std::string> stock;
  for (FiniteStructure& M : s.pool) {
    for (int u : M.internal_uni)
      if (!M.denotes.count(u)) throw RevisionError(M.name + ": universe element " + M.elements[u] + " is dangling");
    for (auto& [c, f] : M.quote_map) {
      for (auto& v : free_vars(f)) stock.insert(v);
    }
  }
  s.stock.assign(stock.begin(), stock.end());
  if (!s.schedule.empty()) {
    if (!s.schedule.count(0)) {
      std::set<int> all;
      for (int i = 0; i < static_cast<int>(s.pool.size()); ++i) all.insert(i);
      s.schedule[0] = all;
    }
    const std::set<int>* prev = nullptr;
    for (auto& [n, set] : s.schedule) {
      if (prev && !std::includes(prev->begin(), prev->end(), set.begin(), set.end()))
        throw RevisionError("Uni schedule grows at stage " + std::to_string(n));
      prev = &set;
    }
  }
  s.uni_pool = s.uni_pool_at(0);
  for (FiniteStructure& M : s.pool) {
    std::set<int> seeds = M.internal_uni;
    M.internal_uni.clear();
    for (int u : seeds)
      if (s.uni_pool.count(M.denotes.at(u))) M.internal_uni.insert(u);
  }
  for (const PendingMod& p : mods) {
    FiniteStructure& M = s.pool[p.structure];
    int u = M.element(p.u), c = M.element(p.c);
    if (u < 0 || !M.denotes.count(u)) throw RevisionError(err_at(p.line, p.u + " is not universe-denoting"));
    if (c < 0 || !M.is_code(c)) throw RevisionError(err_at(p.line, p.c + " is not a code"));
    const FiniteStructure& V = s.pool[M.denotes.at(u)];
    std::map<std::string, int> vals;
    for (auto& [x, e] : p.args) {
      int el = V.element(e);
      if (el < 0 || V.is_code(el)) throw RevisionError(err_at(p.line, e + " is not an ordinary element of " + V.name));
      vals[x] = el;
    }
    std::vector<int> args;
    for (const std::string& v : free_vars(M.quote_map.at(c))) {
      auto it = vals.find(v);
      if (it == vals.end()) throw RevisionError(err_at(p.line, "missing value for " + v));
      args.push_back(it->second);
    }
    if (vals.size() != args.size()) throw RevisionError(err_at(p.line, "extra assignment entries"));
    if (M.internal_uni.count(u)) M.internal_mod[{u, c}].insert(args);
  }
}

}  // namespace

MultiverseState parse_scenario(std::string_view text) {
  MultiverseState s;
  std::map<int, std::map<int, std::string>> denote_names;
  std::vector<PendingMod> mods;
  std::vector<std::pair<int, std::pair<std::string, std::string>>> pending_quotes;  // structure, (element, formula)
  std::string designated;
  std::istringstream in{std::string(text)};
  std::string line;
  int lineno = 0, cur = -1;
  auto need_cur = [&]() {
    if (cur < 0) throw RevisionError(err_at(lineno, "no current structure"));
    return &s.pool[cur];
  };
  while (std::getline(in, line)) {
    ++lineno;
    if (auto h = line.find('#'); h != std::string::npos) line.erase(h);
    std::istringstream ls(line);
    std::string kw;
    if (!(ls >> kw)) continue;
    std::vector<std::string> w;
    if (kw == "code") {
      std::string el;
      if (!(ls >> el)) throw RevisionError(err_at(lineno, "code needs an element and a formula"));
      std::string rest;
      std::getline(ls, rest);
      need_cur();
      pending_quotes.push_back({cur, {el, rest}});
      continue;
    }
    for (std::string t; ls >> t;) w.push_back(t);
    if (kw == "structure") {
      if (w.size() != 1) throw RevisionError(err_at(lineno, "structure takes a name"));
      if (s.index_of(w[0]) >= 0) throw RevisionError(err_at(lineno, "duplicate structure " + w[0]));
      FiniteStructure M;
      M.name = w[0];
      s.pool.push_back(M);
      cur = static_cast<int>(s.pool.size()) - 1;
    } else if (kw == "elements") {
      FiniteStructure* M = need_cur();
      for (auto& e : w) {
        if (M->element(e) >= 0) throw RevisionError(err_at(lineno, "duplicate element " + e));
        M->elements.push_back(e);
      }
    } else if (kw == "member") {
      FiniteStructure* M = need_cur();
      if (w.size() != 2) throw RevisionError(err_at(lineno, "member takes two elements"));
      int x = M->element(w[0]), a = M->element(w[1]);
      if (x < 0 || a < 0) throw RevisionError(err_at(lineno, "unknown element"));
      M->membership.insert({x, a});
    } else if (kw == "universe" || kw == "denote") {
      FiniteStructure* M = need_cur();
      if (w.size() != 2) throw RevisionError(err_at(lineno, kw + " takes an element and a structure"));
      int u = M->element(w[0]);
      if (u < 0) throw RevisionError(err_at(lineno, "unknown element " + w[0]));
      denote_names[cur][u] = w[1];
      if (kw == "universe") M->internal_uni.insert(u);
    } else if (kw == "mod0") {
      need_cur();
      if (w.size() < 2) throw RevisionError(err_at(lineno, "mod0 takes a universe element and a code"));
      PendingMod p{cur, w[0], w[1], {}, lineno};
      for (std::size_t i = 2; i < w.size(); ++i) {
        auto eq = w[i].find('=');
        if (eq == std::string::npos) throw RevisionError(err_at(lineno, "expected var=element"));
        p.args.push_back({w[i].substr(0, eq), w[i].substr(eq + 1)});
      }
      mods.push_back(std::move(p));
    } else if (kw == "schedule") {
      if (w.empty()) throw RevisionError(err_at(lineno, "schedule takes a stage"));
      unsigned n = static_cast<unsigned>(std::stoul(w[0]));
      std::set<int> set;
      for (std::size_t i = 1; i < w.size(); ++i) {
        if (w[i] == "-") continue;
        int t = s.index_of(w[i]);
        if (t < 0) throw RevisionError(err_at(lineno, "unknown structure " + w[i]));
        set.insert(t);
      }
      s.schedule[n] = set;
    } else if (kw == "designate") {
      if (w.size() != 1) throw RevisionError(err_at(lineno, "designate takes a structure"));
      designated = w[0];
    } else {
      throw RevisionError(err_at(lineno, "unknown keyword " + kw));
    }
  }
  for (auto& [i, q] : pending_quotes) {
    FiniteStructure& M = s.pool[i];
    int c = M.element(q.first);
    if (c < 0) throw RevisionError("unknown code element " + q.first + " in " + M.name);
    Expr f;
    try {
      f = parse_formula(q.second);
    } catch (const ParseError& e) {
      throw RevisionError(M.name + ": code " + q.first + ": " + e.what());
    }
    std::map<std::string, Expr> params;
    for (const std::string& v : free_vars(f))
      if (M.element(v) >= 0) params[v] = cnst(v);
    f = expand(substitute(f, params));
    for (auto& [e, g] : M.quote_map)
      if (alpha_eq(g, f)) throw RevisionError(M.name + ": formula coded twice: " + print(f));
    M.quote_map[c] = f;
  }
  if (!designated.empty()) {
    s.designated = s.index_of(designated);
    if (s.designated < 0) throw RevisionError("unknown designated structure " + designated);
  }
  finalize(s, denote_names, mods);
  return s;
}

MultiverseState load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw RevisionError("cannot read " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_scenario(ss.str());
}

std::string truth_table_tsv(const MultiverseState& s, bool header) {
  std::ostringstream o;
  if (header) o << "stage\tstructure\tuniverse\tcode\tassignment\tvalue\n";
  for (const FiniteStructure& M : s.pool) {
    for (auto& [u, v] : M.denotes) {
      const FiniteStructure& V = s.pool.at(v);
      std::vector<int> dom = V.ordinary();
      for (auto& [c, phi] : M.quote_map) {
        const std::set<std::string> fvs = free_vars(phi);
        std::vector<std::string> fv(fvs.begin(), fvs.end());
        for_tuples(dom, fv.size(), [&](const std::vector<int>& args) {
          o << s.stage << '\t' << M.name << '\t' << M.elements[u] << '\t' << M.elements[c] << '\t';
          if (fv.empty()) o << '-';
          for (std::size_t k = 0; k < fv.size(); ++k) o << (k ? "," : "") << fv[k] << '=' << V.elements[args[k]];
          o << '\t' << (M.mod(u, c, args) ? "true" : "false") << '\n';
        });
      }
    }
  }
  return o.str();
}

std::string table_signature(const MultiverseState& s) {
  std::ostringstream o;
  for (int i : s.uni_pool) o << i << ',';
  o << '|';
  if (!s.schedule.empty() && s.stage < s.schedule.rbegin()->first) o << "stage" << s.stage << '|';
  for (const FiniteStructure& M : s.pool) {
    for (int u : M.internal_uni) o << u << ',';
    o << ';';
    for (auto& [uc, rows] : M.internal_mod) {
      o << uc.first << '.' << uc.second << ':';
      for (auto& r : rows) {
        for (int x : r) o << x << '.';
        o << ' ';
      }
    }
    o << '|';
  }
  return o.str();
}

CycleInfo find_cycle(const MultiverseState& s, unsigned horizon) {
  std::map<std::string, unsigned> seen;
  MultiverseState cur = s;
  for (unsigned k = 0; k <= horizon; ++k) {
    std::string sig = table_signature(cur);
    auto it = seen.find(sig);
    if (it != seen.end()) return CycleInfo{it->second, cur.stage - it->second};
    seen.emplace(sig, cur.stage);
    if (k < horizon) cur = revise(cur);
  }
  return {};
}

// --- random scenarios ------------------------------------------------------------

namespace {

class PoolGen {
 public:
  explicit PoolGen(std::mt19937& rng) : rng_(rng) {}

  // Adds phi and its subformulas, treating trbox atoms as atomic; false when
  // the pool would exceed the limit.
  bool add(const Expr& phi) {
    std::vector<Expr> fresh_items;
    std::set<std::string> seen;
    collect(phi, fresh_items, seen);
    if (items.size() + fresh_items.size() > kLimit) return false;
    for (auto& f : fresh_items) {
      keys_.insert(key(f));
      items.push_back(f);
    }
    return true;
  }

  Expr random_formula(int d) {
    std::uniform_int_distribution<int> pick(0, 9);
    int k = d <= 0 ? pick(rng_) % 4 : pick(rng_);
    auto v = [&]() { return var(rng_() % 2 ? "x" : "y"); };
    switch (k) {
      case 0: return mem(v(), v());
      case 1: return eq(v(), v());
      case 2: return atom("Uni", {v()});
      case 3: {
        std::vector<Expr> sent;
        for (auto& f : items)
          if (is_sentence(f)) sent.push_back(f);
        if (sent.empty() || rng_() % 3 == 0) return bot();
        return trbox(quote(sent[rng_() % sent.size()]));
      }
      case 4: return neg(random_formula(d - 1));
      case 5: return conj(random_formula(d - 1), random_formula(d - 1));
      case 6: return imp(random_formula(d - 1), random_formula(d - 1));
      case 7: return iff(random_formula(d - 1), random_formula(d - 1));
      case 8: return all(rng_() % 2 ? "x" : "y", random_formula(d - 1));
      default: return ex(rng_() % 2 ? "x" : "y", random_formula(d - 1));
    }
  }

  static constexpr std::size_t kLimit = 30;
  std::vector<Expr> items;

 private:
  void collect(const Expr& f, std::vector<Expr>& out, std::set<std::string>& seen) {
    if (f->kind != Kind::Macro && f->kind != Kind::Atom && f->kind != Kind::Bot && f->kind != Kind::Top)
      for (auto& k : f->kids) collect(k, out, seen);
    std::string k = key(f);
    if (keys_.count(k) || seen.count(k)) return;
    seen.insert(k);
    out.push_back(f);
  }

  std::mt19937& rng_;
  std::set<std::string> keys_;
};

}  // namespace

MultiverseState random_scenario(std::uint32_t seed) {
  std::mt19937 rng(seed);
  auto chance = [&](double p) { return std::uniform_real_distribution<double>(0, 1)(rng) < p; };
  MultiverseState s;
  const int n = 1 + static_cast<int>(rng() % 4);
  PoolGen gen(rng);
  gen.add(bot());
  for (int attempt = 0; attempt < 120 && gen.items.size() < PoolGen::kLimit; ++attempt) {
    std::vector<Expr> sent;
    for (auto& f : gen.items)
      if (is_sentence(f)) sent.push_back(f);
    if (sent.size() >= 2 && chance(0.35)) {
      Expr a = sent[rng() % sent.size()], b = sent[rng() % sent.size()];
      switch (rng() % 4) {
        case 0: gen.add(conj(a, b)); break;
        case 1: gen.add(imp(a, b)); break;
        case 2: gen.add(iff(a, b)); break;
        default: gen.add(neg(a));
      }
    } else {
      Expr f = gen.random_formula(1 + static_cast<int>(rng() % 3));
      if (chance(0.6))
        for (const std::string& v : free_vars(f)) f = all(v, f);
      gen.add(f);
    }
  }
  std::vector<Expr> codes;
  std::set<std::string> stock;
  for (auto& f : gen.items) {
    codes.push_back(expand(f));
    for (auto& v : free_vars(f)) stock.insert(v);
  }
  s.stock.assign(stock.begin(), stock.end());
  std::map<int, std::vector<int>> denoting;
  for (int i = 0; i < n; ++i) {
    FiniteStructure M;
    M.name = "M" + std::to_string(i);
    const int ord = 2 + static_cast<int>(rng() % 4);
    for (int j = 0; j < ord; ++j) M.elements.push_back("a" + std::to_string(j));
    for (int j = 0; j < ord; ++j) {
      if (j == 0 || chance(0.4)) {
        M.denotes[j] = static_cast<int>(rng() % n);
        if (chance(0.85)) M.internal_uni.insert(j);
      }
      for (int k = 0; k < ord; ++k)
        if (chance(0.3)) M.membership.insert({j, k});
    }
    for (std::size_t c = 0; c < codes.size(); ++c) {
      int e = static_cast<int>(M.elements.size());
      M.elements.push_back("c" + std::to_string(c));
      M.quote_map[e] = codes[c];
    }
    s.pool.push_back(std::move(M));
  }
  std::set<int> all;
  for (int i = 0; i < n; ++i) all.insert(i);
  s.schedule[0] = all;
  if (chance(0.5)) {
    std::set<int> less = all;
    less.erase(static_cast<int>(rng() % n));
    s.schedule[1 + rng() % 10] = less;
  }
  if (chance(0.15)) s.schedule[1 + rng() % 10] = {};
  // Later entries may not grow the pool.
  std::set<int> prev = all;
  for (auto& [k, set] : s.schedule) {
    std::set<int> c;
    std::set_intersection(prev.begin(), prev.end(), set.begin(), set.end(), std::inserter(c, c.begin()));
    set = c;
    prev = c;
  }
  s.uni_pool = s.uni_pool_at(0);
  // Arbitrary stage-0 tables.
  for (FiniteStructure& M : s.pool) {
    for (int u : M.internal_uni) {
      const FiniteStructure& V = s.pool[M.denotes.at(u)];
      std::vector<int> dom = V.ordinary();
      for (auto& [c, phi] : M.quote_map) {
        std::size_t ar = free_vars(phi).size();
        for_tuples(dom, ar, [&](const std::vector<int>& args) {
          if (chance(0.3)) M.internal_mod[{u, c}].insert(args);
        });
      }
    }
  }
  return s;
}

}  // namespace mk
