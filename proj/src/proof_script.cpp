#include "mkernel/proof_script.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

namespace mk {

const Step* ProofScript::find(int id) const {
  for (auto& s : steps)
    if (s.id == id) return &s;
  return nullptr;
}

std::string to_string(const Justification& j) {
  auto refs = [&](const char* sep) {
    std::string s;
    for (std::size_t i = 0; i < j.refs.size(); ++i) {
      if (i) s += sep;
      s += std::to_string(j.refs[i]);
    }
    return s;
  };
  switch (j.rule) {
    case Rule::Axiom: return "axiom " + j.theory + "." + j.schema;
    case Rule::Taut: return "taut";
    case Rule::MP: return "mp " + refs(" ");
    case Rule::Gen: return "gen " + refs(" ") + " " + j.var;
    case Rule::Inst: return "inst " + refs(" ") + " " + print(j.term);
    case Rule::NEC: return "nec " + refs(" ");
    case Rule::CONEC: return "conec " + refs(" ");
    case Rule::Refl: return "reflrule " + refs(" ");
    case Rule::Coding: return "coding " + (j.schema.empty() ? std::string("norm") : j.schema);
    case Rule::PrIntro: return "printro " + (j.file.empty() ? std::string("<inline>") : j.file);
    case Rule::Macro:
      return "macro " + j.macro + " " + (j.refs.empty() ? std::string("-") : refs(",")) + " " +
             (j.file.empty() ? std::string("<inline>") : j.file);
  }
  return "?";
}

std::string to_text(const ProofScript& p) {
  std::string out;
  for (auto& s : p.steps) {
    out += "step " + std::to_string(s.id) + ": " + print(s.formula) + " ; " + to_string(s.just) + "\n";
  }
  return out;
}

namespace {

std::string trim(std::string_view s) {
  std::size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return std::string(s.substr(a, b - a));
}

int to_int(const std::string& s, std::size_t pos) {
  try {
    std::size_t used = 0;
    int v = std::stoi(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw ParseError("expected a step number, got '" + s + "'", pos);
  }
}

}  // namespace

ProofScript parse_proof(std::string_view text, const std::string& base_dir) {
  ProofScript p;
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t offset = 0;
  while (std::getline(in, line)) {
    std::size_t here = offset;
    offset += line.size() + 1;
    std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    if (t.rfind("step ", 0) != 0) throw ParseError("expected 'step'", here);
    auto colon = t.find(':');
    auto semi = t.find(';');
    if (colon == std::string::npos || semi == std::string::npos || semi < colon)
      throw ParseError("malformed step line", here);
    Step s;
    s.id = to_int(trim(t.substr(5, colon - 5)), here);
    s.formula = parse_formula(trim(t.substr(colon + 1, semi - colon - 1)));
    std::istringstream js(trim(t.substr(semi + 1)));
    std::string kw;
    js >> kw;
    Justification& j = s.just;
    std::string rest;
    std::getline(js, rest);
    rest = trim(rest);
    std::istringstream rs(rest);
    auto need_int = [&]() {
      std::string w;
      if (!(rs >> w)) throw ParseError("missing step reference", here);
      return to_int(w, here);
    };
    if (kw == "axiom") {
      auto dot = rest.find('.');
      if (dot == std::string::npos) throw ParseError("axiom needs <theory>.<schema>", here);
      j.rule = Rule::Axiom;
      j.theory = rest.substr(0, dot);
      j.schema = rest.substr(dot + 1);
    } else if (kw == "taut") {
      j.rule = Rule::Taut;
    } else if (kw == "mp") {
      j.rule = Rule::MP;
      j.refs = {need_int(), need_int()};
    } else if (kw == "gen") {
      j.rule = Rule::Gen;
      j.refs = {need_int()};
      rs >> j.var;
      if (j.var.empty()) throw ParseError("gen needs a variable", here);
    } else if (kw == "inst") {
      j.rule = Rule::Inst;
      j.refs = {need_int()};
      std::string term;
      std::getline(rs, term);
      j.term = parse_term(trim(term));
    } else if (kw == "nec" || kw == "conec") {
      j.rule = kw == "nec" ? Rule::NEC : Rule::CONEC;
      j.refs = {need_int()};
    } else if (kw == "reflrule") {
      j.rule = Rule::Refl;
      j.refs = {need_int()};
    } else if (kw == "coding") {
      j.rule = Rule::Coding;
      rs >> j.schema;
    } else if (kw == "printro") {
      j.rule = Rule::PrIntro;
      rs >> j.file;
      auto path = std::filesystem::path(base_dir) / j.file;
      j.sub = std::make_shared<const ProofScript>(load_proof(path.string()));
    } else if (kw == "macro") {
      j.rule = Rule::Macro;
      std::string ids;
      rs >> j.macro >> ids >> j.file;
      if (j.file.empty()) throw ParseError("macro needs <name> <ids> <file>", here);
      if (ids != "-") {
        std::stringstream is(ids);
        std::string w;
        while (std::getline(is, w, ',')) j.refs.push_back(to_int(w, here));
      }
      auto path = std::filesystem::path(base_dir) / j.file;
      j.sub = std::make_shared<const ProofScript>(load_proof(path.string()));
    } else {
      throw ParseError("unknown justification '" + kw + "'", here);
    }
    p.steps.push_back(std::move(s));
  }
  return p;
}

ProofScript load_proof(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open proof file " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_proof(ss.str(), std::filesystem::path(path).parent_path().string());
}

void save_proof(const ProofScript& p, const std::string& path) {
  ProofScript copy = p;
  int k = 0;
  for (auto& s : copy.steps) {
    if (!s.just.sub) continue;
    std::string sub = path + ".sub" + std::to_string(++k);
    save_proof(*s.just.sub, sub);
    s.just.file = std::filesystem::path(sub).filename().string();
  }
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << to_text(copy);
}

// --- builder ----------------------------------------------------------------

ProofBuilder::ProofBuilder(ProofScript seed) : p_(std::move(seed)) {
  for (auto& s : p_.steps) {
    by_key_.emplace(key(s.formula), s.id);
    next_id_ = std::max(next_id_, s.id + 1);
  }
}

int ProofBuilder::add(Expr f, Justification j) {
  std::string k = key(f);
  auto it = by_key_.find(k);
  if (it != by_key_.end()) return it->second;
  int id = next_id_++;
  p_.steps.push_back(Step{id, std::move(f), std::move(j)});
  by_key_.emplace(std::move(k), id);
  return id;
}

int ProofBuilder::axiom(const std::string& theory, const std::string& schema, Expr f) {
  Justification j;
  j.rule = Rule::Axiom;
  j.theory = theory;
  j.schema = schema;
  return add(std::move(f), std::move(j));
}

int ProofBuilder::taut(Expr f) {
  Justification j;
  j.rule = Rule::Taut;
  return add(std::move(f), std::move(j));
}

const Expr& ProofBuilder::formula(int id) const {
  const Step* s = p_.find(id);
  if (!s) throw std::logic_error("no step " + std::to_string(id));
  return s->formula;
}

int ProofBuilder::find(const Expr& f) const {
  auto it = by_key_.find(key(f));
  return it == by_key_.end() ? -1 : it->second;
}

int ProofBuilder::mp(int imp_id, int ant_id) {
  const Expr& f = formula(imp_id);
  if (f->kind != Kind::Imp || !alpha_eq(f->kids[0], formula(ant_id)))
    throw std::logic_error("mp: step " + std::to_string(imp_id) + " does not match " + std::to_string(ant_id));
  Justification j;
  j.rule = Rule::MP;
  j.refs = {imp_id, ant_id};
  return add(f->kids[1], std::move(j));
}

int ProofBuilder::gen(int id, const std::string& x) {
  Justification j;
  j.rule = Rule::Gen;
  j.refs = {id};
  j.var = x;
  return add(all(x, formula(id)), std::move(j));
}

int ProofBuilder::inst(int id, Expr t) {
  const Expr& f = formula(id);
  if (f->kind != Kind::All) throw std::logic_error("inst: not a universal");
  Justification j;
  j.rule = Rule::Inst;
  j.refs = {id};
  j.term = t;
  return add(substitute(f->kids[0], f->name, t), std::move(j));
}

int ProofBuilder::nec(int id) {
  Justification j;
  j.rule = Rule::NEC;
  j.refs = {id};
  return add(expand(trbox(quote(formula(id)))), std::move(j));
}

int ProofBuilder::conec(int id) {
  Expr code;
  if (!match_trbox(formula(id), code) || code->kind != Kind::Quote)
    throw std::logic_error("conec: premise is not Tr-box of a code");
  Justification j;
  j.rule = Rule::CONEC;
  j.refs = {id};
  return add(code->kids[0], std::move(j));
}

int ProofBuilder::refl(int id) {
  const Expr& f = formula(id);
  if (f->kind != Kind::Atom || f->name.rfind("Pr.", 0) != 0 || f->kids[0]->kind != Kind::Quote)
    throw std::logic_error("reflrule: premise is not Pr of a quoted sentence");
  Justification j;
  j.rule = Rule::Refl;
  j.refs = {id};
  return add(f->kids[0]->kids[0], std::move(j));
}

int ProofBuilder::nec_tr(int id) {
  Justification j;
  j.rule = Rule::NEC;
  j.refs = {id};
  return add(expand(tr(quote(formula(id)))), std::move(j));
}

int ProofBuilder::conec_tr(int id) {
  const Expr& f = formula(id);
  // forall f (VA f -> Sat(quote phi, f))
  Expr code;
  if (f->kind != Kind::All || f->kids[0]->kind != Kind::Imp || f->kids[0]->kids[1]->kind != Kind::Atom ||
      f->kids[0]->kids[1]->name != "Sat" || (code = f->kids[0]->kids[1]->kids[0])->kind != Kind::Quote)
    throw std::logic_error("conec: premise is not Tr of a code");
  Justification j;
  j.rule = Rule::CONEC;
  j.refs = {id};
  return add(code->kids[0], std::move(j));
}

int ProofBuilder::coding(Expr f) {
  Justification j;
  j.rule = Rule::Coding;
  j.schema = "norm";
  return add(std::move(f), std::move(j));
}

int ProofBuilder::taut_chain(const std::vector<int>& premises, Expr concl) {
  std::vector<Expr> ants;
  for (int id : premises) ants.push_back(formula(id));
  int cur = taut(imps(ants, concl));
  for (int id : premises) cur = mp(cur, id);
  return cur;
}

bool ProofBuilder::unwrap(const Prefix& pi, const Expr& f, Expr& body) {
  Expr cur = f;
  for (auto& item : pi) {
    if (cur->kind != Kind::All) return false;
    Expr inner = cur->kids[0];
    if (cur->name != item.var) {
      if (free_vars(inner).count(item.var)) return false;
      inner = substitute(inner, cur->name, var(item.var));
    }
    if (item.guard) {
      if (inner->kind != Kind::Imp || !alpha_eq(inner->kids[0], item.guard)) return false;
      inner = inner->kids[1];
    }
    cur = inner;
  }
  body = cur;
  return true;
}

int ProofBuilder::lift(const Prefix& pi, int id) {
  if (pi.empty()) return id;
  const Expr& f = formula(id);
  int ax = logic("vac", imp(f, wrap(pi, f)));
  return mp(ax, id);
}

int ProofBuilder::ctx_taut(const Prefix& pi, const std::vector<int>& premises, Expr concl) {
  if (pi.empty()) return taut_chain(premises, concl);
  std::vector<Expr> bodies;
  for (int id : premises) {
    Expr b;
    if (!unwrap(pi, formula(id), b))
      throw std::logic_error("ctx_taut: step " + std::to_string(id) + " lacks the prefix");
    bodies.push_back(b);
  }
  int cur = taut(wrap(pi, imps(bodies, concl)));
  for (std::size_t i = 0; i < premises.size(); ++i) {
    std::vector<Expr> rest(bodies.begin() + static_cast<long>(i) + 1, bodies.end());
    Expr r = imps(rest, concl);
    int d = logic("dist", imp(wrap(pi, imp(bodies[i], r)), imp(wrap(pi, bodies[i]), wrap(pi, r))));
    cur = mp(mp(d, cur), premises[i]);
  }
  return cur;
}

int ProofBuilder::ctx_inst(const Prefix& pi, int id, Expr t) {
  Expr b;
  if (!unwrap(pi, formula(id), b) || b->kind != Kind::All)
    throw std::logic_error("ctx_inst: expected a prefixed universal");
  Expr inst_body = substitute(b->kids[0], b->name, t);
  if (pi.empty()) {
    int ax = logic("inst", imp(b, inst_body));
    return mp(ax, id);
  }
  int ax = logic("inst", wrap(pi, imp(b, inst_body)));
  int d = logic("dist", imp(wrap(pi, imp(b, inst_body)), imp(wrap(pi, b), wrap(pi, inst_body))));
  return mp(mp(d, ax), id);
}

int ProofBuilder::ctx_discharge(const Prefix& pi, int id, int fact_id) {
  Expr b;
  if (!unwrap(pi, formula(id), b) || b->kind != Kind::Imp)
    throw std::logic_error("ctx_discharge: expected a prefixed implication");
  int lifted = lift(pi, fact_id);
  return ctx_taut(pi, {id, lifted}, b->kids[1]);
}

int ProofBuilder::ctx_normalize(const Prefix& pi, int id, Expr normalized_body) {
  Expr b;
  if (!unwrap(pi, formula(id), b)) throw std::logic_error("ctx_normalize: prefix mismatch");
  Expr target = wrap(pi, normalized_body);
  if (alpha_eq(target, formula(id))) return id;
  int c = coding(iff(formula(id), target));
  return taut_chain({c, id}, target);
}

}  // namespace mk
