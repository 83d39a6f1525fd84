#include "mkernel/interpret.hpp"

#include <fstream>
#include <sstream>

#include "mkernel/normalize.hpp"
#include "mkernel/soundness.hpp"

namespace mk {

Expr apply(const Interpretation& I, const Expr& phi_in) {
  Expr phi = expand(phi_in);
  const Language* src = Language::by_tag(I.source_lang);
  if (!src) throw LanguageError("unknown language tag " + I.source_lang);
  std::string bad;
  if (!in_language(phi, *src, &bad)) throw LanguageError("symbol " + bad + " is outside " + I.source_lang);
  struct Rec {
    const Interpretation& I;
    Expr operator()(const Expr& e) const {
      switch (e->kind) {
        case Kind::Atom:
          if (e->name == "Uni" && e->kids.size() == 1) return substitute(I.uni_image, "U", e->kids[0]);
          if (e->name == "Mod" && e->kids.size() == 3)
            return substitute(I.mod_image, std::map<std::string, Expr>{{"U", e->kids[0]}, {"p", e->kids[1]}, {"f", e->kids[2]}});
          return e;
        case Kind::Not: case Kind::And: case Kind::Or: case Kind::Imp: case Kind::Iff:
        case Kind::All: case Kind::Ex: case Kind::ExU: {
          std::vector<Expr> kids;
          kids.reserve(e->kids.size());
          for (auto& k : e->kids) kids.push_back((*this)(k));
          return make(e->kind, e->name, std::move(kids));
        }
        default:
          return e;
      }
    }
  };
  return Rec{I}(phi);
}

// --- parameters ---------------------------------------------------------------

std::string RevisionParams::theory_name(unsigned n) const {
  unsigned a = absolute(n);
  if (hierarchy == "Con") return con_name(a);
  if (hierarchy == "R") return refl_name(a);
  throw LedgerError("unknown hierarchy " + hierarchy);
}

TheoryDescriptor RevisionParams::theory(unsigned n) const { return Registry::standard().get(theory_name(n)); }

Expr RevisionParams::uni_at(unsigned n) const { return uni_stage(*family, absolute(n)); }

Expr RevisionParams::mod_at(unsigned n) const { return mod_stage(*family, absolute(n)); }

Interpretation RevisionParams::at(unsigned k) const {
  Interpretation I;
  I.uni_image = uni_at(k);
  I.mod_image = mod_at(k);
  return I;
}

AdmissibilityReport admissibility_check(const RevisionParams& params) {
  AdmissibilityReport r;
  for (const char* rule : {kNecStar, kConecStar, kReflStar})
    if (params.declared.count(rule)) {
      r.admitted.insert(rule);
      r.derivations.push_back(std::string(rule) + " declared");
    }
  if (params.declared.count(kSoundStar) && !r.admitted.count(kNecStar)) {
    r.admitted.insert(kNecStar);
    r.derivations.push_back("Soundness* => NEC*");
  }
  if (params.declared.count(kCompleteStar) && r.admitted.count(kReflStar) && !r.admitted.count(kConecStar)) {
    r.admitted.insert(kConecStar);
    r.derivations.push_back("Completeness* + ReflectionRule* => CONEC*");
  }
  return r;
}

RevisionParams make_params(std::string name, std::string hierarchy, Expr uni, Expr mod0, std::string rev_lang,
                           std::set<std::string> declared, std::map<std::string, unsigned> certificates, bool circ) {
  static const std::set<std::string> known = {kNecStar, kConecStar, kReflStar, kSoundStar, kCompleteStar};
  for (auto& d : declared)
    if (!known.count(d)) throw LedgerError("unknown revision condition " + d);
  RevisionParams p;
  p.name = std::move(name);
  p.hierarchy = std::move(hierarchy);
  p.uni = std::move(uni);
  p.mod0 = std::move(mod0);
  p.rev_lang = std::move(rev_lang);
  p.circ = circ;
  p.declared = std::move(declared);
  p.certificates = std::move(certificates);
  try {
    p.family = std::make_shared<const ModFamily>(circ ? build_mod_circ(p.uni, p.rev_lang)
                                                      : build_mod_family(p.uni, p.mod0, p.rev_lang));
  } catch (const CodingError& e) {
    throw LedgerError(std::string("parameters: ") + e.what());
  }
  p.admitted = admissibility_check(p).admitted;
  (void)p.theory_name(0);
  return p;
}

RevisionParams parse_params(std::string_view text) {
  std::string name, hierarchy, rev_lang = "UM";
  Expr uni, mod0;
  bool circ = false;
  std::set<std::string> declared;
  std::map<std::string, unsigned> certs;
  std::istringstream in{std::string(text)};
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto h = line.find('#'); h != std::string::npos) line.erase(h);
    std::istringstream ls(line);
    std::string key;
    if (!(ls >> key)) continue;
    std::string rest;
    std::getline(ls, rest);
    if (auto b = rest.find_first_not_of(" \t"); b != std::string::npos) rest.erase(0, b);
    auto bad = [&](const std::string& why) { return LedgerError("params line " + std::to_string(lineno) + ": " + why); };
    try {
      if (key == "name") name = rest;
      else if (key == "hierarchy") hierarchy = rest;
      else if (key == "rev_lang") rev_lang = rest;
      else if (key == "uni") uni = parse_formula(rest);
      else if (key == "mod0") mod0 = parse_formula(rest);
      else if (key == "circ") circ = rest == "yes";
      else if (key == "declare") declared.insert(rest);
      else if (key == "certificate") {
        std::istringstream cs(rest);
        std::string fam;
        unsigned a = 0;
        if (!(cs >> fam >> a)) throw bad("certificate needs a family and a stage");
        certs[fam] = a;
      } else {
        throw bad("unknown key " + key);
      }
    } catch (const ParseError& e) {
      throw bad(e.what());
    }
  }
  if (name.empty() || hierarchy.empty() || !uni || (!mod0 && !circ)) throw LedgerError("params: name, hierarchy, uni and mod0 are required");
  return make_params(name, hierarchy, uni, mod0, rev_lang, declared, certs, circ);
}

RevisionParams load_params(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw LedgerError("cannot read " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_params(ss.str());
}

RevisionParams shift(const RevisionParams& params, unsigned a_prime) {
  if (a_prime < 1) throw std::invalid_argument("shift needs A' >= 1");
  RevisionParams p = params;
  p.offset += a_prime;
  return p;
}

namespace {

std::vector<Expr> conjuncts(const Expr& e) {
  std::vector<Expr> out;
  Expr cur = e;
  while (cur->kind == Kind::And) {
    out.push_back(cur->kids[0]);
    cur = cur->kids[1];
  }
  out.push_back(cur);
  return out;
}

bool has_conjunct(const Expr& e, const Expr& c) {
  for (auto& x : conjuncts(e))
    if (alpha_eq(x, c)) return true;
  return false;
}

}  // namespace

std::vector<std::string> appropriate_check(const RevisionParams& params, unsigned stages) {
  std::vector<std::string> fail;
  const Registry& reg = Registry::standard();
  Expr U = var("U");
  for (unsigned n = 0; n < stages; ++n) {
    TheoryDescriptor t = params.theory(n);
    if (!t.language.includes(Language::base())) fail.push_back("1: L is not contained in the language of " + t.name);
    if (t.language.has("Uni") || t.language.has("Mod")) fail.push_back("2: Uni or Mod occurs in the language of " + t.name);
    if (!reg.subtheory(params.theory_name(n), params.theory_name(n + 1)))
      fail.push_back("4: " + params.theory_name(n + 1) + " does not contain " + params.theory_name(n));
  }
  if (!reg.subtheory("ZF", params.theory_name(0))) fail.push_back("3: stage 0 does not contain ZF");
  Expr structure = atom("Struct", {U});
  if (!has_conjunct(params.uni_at(0), structure)) fail.push_back("5: Uni_0(U) does not state that U is a structure");
  // Uni_n is Struct U & (0 < n -> U models T_{n-1}); nesting of T_n gives Uni_{n+1} in Uni_n.
  Expr n = var("n");
  Expr tmpl = conj(structure, imp(atom("Lt", {cnst("0"), n}), atom("Models." + params.hierarchy, {U, app("pred", {n})})));
  if (params.circ) {
    if (!has_conjunct(params.uni_at(0), structure)) fail.push_back("6: circular family without a structure guard");
  } else if (!alpha_eq(params.uni, tmpl)) {
    fail.push_back("6: Uni_n is not the models-of-T_{n-1} template, inclusion unwitnessed");
  }
  if (!params.circ) {
    for (const Expr& c : {structure, atom("Fml." + params.rev_lang, {var("p")}), atom("VAU", {var("f"), U})})
      if (!has_conjunct(params.mod0, c)) fail.push_back("7: Mod_0 does not imply " + print(c));
  }
  return fail;
}

const char* to_string(LedgerCase c) {
  switch (c) {
    case LedgerCase::Axiom: return "Axiom";
    case LedgerCase::FirstOrder: return "FirstOrder";
    case LedgerCase::Nec: return "NEC*";
    case LedgerCase::Conec: return "CONEC*";
  }
  return "?";
}

// --- macro expansion ------------------------------------------------------------

ProofScript expand_macros(const ProofScript& p) {
  ProofScript out;
  std::map<int, int> at;
  std::map<int, Expr> formula;
  int next = 1;
  for (const Step& s : p.steps) {
    if (s.just.rule != Rule::Macro) {
      Step c = s;
      c.id = next++;
      for (int& r : c.just.refs) r = at.at(r);
      at[s.id] = c.id;
      formula[c.id] = expand(c.formula);
      out.steps.push_back(std::move(c));
      continue;
    }
    if (!s.just.sub) throw LedgerError("macro step " + std::to_string(s.id) + " has no subproof");
    std::vector<Expr> premises;
    for (int r : s.just.refs) premises.push_back(formula.at(at.at(r)));
    ProofScript exp;
    try {
      exp = expand_macros(soundness_macro(premises, *s.just.sub));
    } catch (const MacroError& e) {
      throw LedgerError("macro step " + std::to_string(s.id) + ": " + e.what());
    }
    std::map<int, int> local;
    for (const Step& e : exp.steps) {
      if (e.just.rule == Rule::Axiom && e.just.theory == "hyp") {
        local[e.id] = at.at(s.just.refs.at(std::stoul(e.just.schema)));
        continue;
      }
      Step c = e;
      c.id = next++;
      for (int& r : c.just.refs) r = local.at(r);
      local[e.id] = c.id;
      formula[c.id] = expand(c.formula);
      out.steps.push_back(std::move(c));
    }
    at[s.id] = local.at(exp.last().id);
  }
  return out;
}

// --- ledger -----------------------------------------------------------------------

namespace {

bool zf_family(const std::string& fam) {
  return fam == "ZF" || fam == "HB" || fam.rfind("Sep[", 0) == 0 || fam.rfind("Rep[", 0) == 0;
}

std::optional<AxiomMatch> source_axiom(const TheoryDescriptor& src, const Justification& j, const Expr& f) {
  const Registry& reg = Registry::standard();
  try {
    if (src.has_family(j.theory)) return is_axiom_as(src, f, j.theory, j.schema);
    if (reg.known(j.theory) && reg.subtheory(j.theory, src.name)) {
      auto m = is_axiom(reg.get(j.theory), f);
      if (m && m->label == j.schema) return m;
    }
  } catch (const std::exception&) {
  }
  return std::nullopt;
}

struct Counts {
  std::set<int> nec, conec;
};

std::vector<Counts> ancestry(const ProofScript& p) {
  std::map<int, std::size_t> pos;
  std::vector<Counts> out(p.steps.size());
  for (std::size_t i = 0; i < p.steps.size(); ++i) {
    const Step& s = p.steps[i];
    pos[s.id] = i;
    for (int r : s.just.refs) {
      const Counts& c = out[pos.at(r)];
      out[i].nec.insert(c.nec.begin(), c.nec.end());
      out[i].conec.insert(c.conec.begin(), c.conec.end());
    }
    if (s.just.rule == Rule::NEC) out[i].nec.insert(s.id);
    if (s.just.rule == Rule::CONEC) out[i].conec.insert(s.id);
  }
  return out;
}

LedgerCase case_of(const Step& s) {
  switch (s.just.rule) {
    case Rule::Axiom: case Rule::Coding: case Rule::PrIntro: return LedgerCase::Axiom;
    case Rule::Taut: case Rule::MP: case Rule::Gen: case Rule::Inst: return LedgerCase::FirstOrder;
    case Rule::NEC: return LedgerCase::Nec;
    case Rule::CONEC: return LedgerCase::Conec;
    default: throw LedgerError("step " + std::to_string(s.id) + ": rule " + to_string(s.just) + " has no ledger case");
  }
}

// How T'_k proves the image of an axiom step; throws LedgerError when nothing does.
std::string certify(const Step& s, const TheoryDescriptor& src, const RevisionParams& P, unsigned k) {
  const Justification& j = s.just;
  Expr f = expand(s.formula);
  auto fixed = [&](const char* what) {
    if (!in_language(f, Language::base()))
      throw LedgerError("step " + std::to_string(s.id) + ": " + what + " outside L");
    return std::string(what);
  };
  if (j.rule == Rule::Coding) return fixed("coding");
  if (j.rule == Rule::PrIntro) return fixed("PrIntro");
  if (j.theory == "logic") return "logic." + j.schema;
  if (j.theory == "Base" && j.schema == "va") return "Base.va";
  if (j.theory == "Base") return fixed("Base");
  if (j.theory == "hyp") throw LedgerError("step " + std::to_string(s.id) + ": hypotheses are not translated");
  auto m = source_axiom(src, j, f);
  if (!m) throw LedgerError("step " + std::to_string(s.id) + ": not an axiom of " + src.name);
  if (zf_family(m->family)) return "ZF:" + m->str();
  unsigned kabs = P.absolute(k);
  if (m->family == "CMcomp") {
    if (kabs < 1) throw LedgerError("step " + std::to_string(s.id) + ": compositional axioms need stage >= 1");
    return "dagger:" + m->str();
  }
  auto c = P.certificates.find(m->family);
  if (c == P.certificates.end())
    throw LedgerError("step " + std::to_string(s.id) + ": parameters " + P.name + " certify no axioms of " + m->family);
  if (kabs < c->second)
    throw LedgerError("step " + std::to_string(s.id) + ": " + m->family + " certified from stage " + std::to_string(c->second));
  return "cert:" + m->str() + ">=" + std::to_string(c->second);
}

// The SatX conjunct of the unfolded Mod_k, with p free.
Expr sat_conjunct(const ModFamily& fam, unsigned kabs) { return conjuncts(dagger_rhs(fam, kabs)).back(); }

// forall U (Uni'_k U -> forall f (VAU f U -> <U, Uni'_{k-1}, Mod'_{k-1}> |= (code, f)))
Expr internal_line(const RevisionParams& P, unsigned k, const Expr& code) {
  Expr sat = substitute(sat_conjunct(*P.family, P.absolute(k)), "p", code);
  return all("U", imp(P.uni_at(k), all("f", imp(atom("VAU", {var("f"), var("U")}), sat))));
}

}  // namespace

TranslationLedger main_lemma_transform(const ProofScript& p, const RevisionParams& params, unsigned a_prime,
                                       const TheoryDescriptor& source) {
  CheckReport pre = check(p, source);
  if (!pre.ok) throw LedgerError("source proof does not check: " + pre.summary());
  if (!nec_before_conec(p)) throw LedgerError("source proof is not in NEC-before-CONEC form; normalize it first");
  RevisionParams P = a_prime ? shift(params, a_prime) : params;
  TranslationLedger L;
  L.source_theory = source.name;
  L.params = params.name;
  L.a_prime = a_prime;
  L.source = expand_macros(p);
  auto counts = ancestry(L.source);
  std::map<int, const Step*> by_id;
  int total_nec = 0, total_conec = 0;
  for (std::size_t i = 0; i < L.source.steps.size(); ++i) {
    const Step& s = L.source.steps[i];
    by_id[s.id] = &s;
    LedgerRow row;
    row.source = s.id;
    row.kind = case_of(s);
    row.nec = static_cast<int>(counts[i].nec.size());
    row.conec = static_cast<int>(counts[i].conec.size());
    row.stage = static_cast<unsigned>(row.nec) + 1;
    row.theory = 2 * static_cast<unsigned>(row.conec) + row.stage;
    Expr f = expand(s.formula);
    switch (row.kind) {
      case LedgerCase::Axiom:
        row.certificate = certify(s, source, P, row.stage);
        break;
      case LedgerCase::FirstOrder:
        row.certificate = to_string(s.just);
        break;
      case LedgerCase::Nec: {
        ++total_nec;
        if (!P.admitted.count(kNecStar)) throw LedgerError("step " + std::to_string(s.id) + ": NEC needs NEC*, not admitted by " + P.name);
        Expr code;
        if (!match_trbox(f, code)) throw LedgerError("step " + std::to_string(s.id) + ": only the Tr-box form of NEC is translated");
        row.witness = internal_line(P, row.stage, code);
        row.certificate = "dagger@" + std::to_string(P.absolute(row.stage));
        break;
      }
      case LedgerCase::Conec: {
        ++total_conec;
        if (!P.admitted.count(kConecStar)) throw LedgerError("step " + std::to_string(s.id) + ": CONEC needs CONEC*, not admitted by " + P.name);
        const Step* prem = by_id.at(s.just.refs.at(0));
        Expr code;
        if (!match_trbox(expand(prem->formula), code)) throw LedgerError("step " + std::to_string(s.id) + ": only the Tr-box form of CONEC is translated");
        row.witness = mk::apply(P.at(row.stage + 1), prem->formula);
        row.certificate = "CONEC*";
        break;
      }
    }
    row.formula = mk::apply(P.at(row.stage), f);
    L.rows.push_back(std::move(row));
  }
  LedgerFinal& fin = L.final;
  fin.nec = total_nec;
  fin.conec = total_conec;
  fin.stage = static_cast<unsigned>(total_nec) + 1;
  fin.theory = 2 * static_cast<unsigned>(total_conec) + fin.stage;
  fin.stage_abs = fin.stage + a_prime;
  fin.theory_abs = fin.theory + a_prime;
  fin.formula = mk::apply(P.at(fin.stage), L.source.last().formula);
  return L;
}

CheckReport verify_ledger(const TranslationLedger& L, const RevisionParams& params) {
  CheckReport rep;
  auto fail = [&](int step, LedgerCase c, const std::string& why) {
    rep.failures.push_back({step, std::string(to_string(c)) + ": " + why});
  };
  if (L.params != params.name) {
    rep.failures.push_back({0, "ledger was built for parameters " + L.params});
    rep.ok = false;
    return rep;
  }
  const Registry& reg = Registry::standard();
  TheoryDescriptor src, zf = reg.get("ZF");
  try {
    src = reg.get(L.source_theory);
  } catch (const RegistryError& e) {
    rep.failures.push_back({0, e.what()});
    rep.ok = false;
    return rep;
  }
  RevisionParams P = L.a_prime ? shift(params, L.a_prime) : params;
  if (L.rows.size() != L.source.steps.size()) {
    rep.failures.push_back({0, "row count differs from the source proof"});
    rep.ok = false;
    return rep;
  }
  auto counts = ancestry(L.source);
  std::map<int, std::size_t> pos;
  std::map<unsigned, bool> dagger_ok;
  auto dagger = [&](unsigned kabs) {
    auto it = dagger_ok.find(kabs);
    if (it != dagger_ok.end()) return it->second;
    bool ok = check(verify_dagger(*P.family, kabs), zf).ok;
    dagger_ok[kabs] = ok;
    return ok;
  };
  for (std::size_t i = 0; i < L.rows.size(); ++i) {
    const LedgerRow& row = L.rows[i];
    const Step& s = L.source.steps[i];
    pos[s.id] = i;
    LedgerCase kind;
    try {
      kind = case_of(s);
    } catch (const LedgerError& e) {
      fail(s.id, row.kind, e.what());
      continue;
    }
    if (row.source != s.id || row.kind != kind) {
      fail(s.id, row.kind, "row does not match source step");
      continue;
    }
    int n = static_cast<int>(counts[i].nec.size()), c = static_cast<int>(counts[i].conec.size());
    if (row.nec != n || row.conec != c) fail(s.id, kind, "N/C counts differ from the source derivation");
    if (row.stage < static_cast<unsigned>(n) + 1) fail(s.id, kind, "stage below N + 1");
    if (row.stage != static_cast<unsigned>(row.nec) + 1 || row.theory != 2 * static_cast<unsigned>(row.conec) + row.stage)
      fail(s.id, kind, "indices violate theory = 2C + k with k = N + 1");
    Expr f = expand(s.formula);
    Expr image;
    try {
      image = mk::apply(P.at(row.stage), f);
    } catch (const std::exception& e) {
      fail(s.id, kind, e.what());
      continue;
    }
    if (!row.formula || !alpha_eq(row.formula, image)) {
      fail(s.id, kind, "translated formula is not the image at stage " + std::to_string(row.stage));
      continue;
    }
    switch (kind) {
      case LedgerCase::Axiom: {
        std::string cert;
        try {
          cert = certify(s, src, P, row.stage);
        } catch (const LedgerError& e) {
          fail(s.id, kind, e.what());
          break;
        }
        if (cert != row.certificate) {
          fail(s.id, kind, "certificate " + row.certificate + " differs from " + cert);
          break;
        }
        if (cert.rfind("logic.", 0) == 0) {
          // The image is a substitution instance of the source instance.
          if (!logic_axiom_ok(s.just.schema, f)) fail(s.id, kind, "source row is not an instance of " + cert);
        } else if (cert.rfind("ZF:", 0) == 0) {
          auto m = is_axiom(zf, row.formula);
          if (!m) fail(s.id, kind, "image is not a ZF axiom");
        } else if (cert.rfind("dagger:", 0) == 0) {
          if (!dagger(P.absolute(row.stage))) fail(s.id, kind, "unfolding of Mod_k fails");
        } else if (cert == "Base.va") {
          // every structure carries an assignment, and Uni'_k(U) implies Struct U
          Expr U = var("U");
          Expr uni = P.uni_at(row.stage);
          if (!has_conjunct(uni, atom("Struct", {U})) ||
              !alpha_eq(row.formula, all("U", imp(uni, ex("f", atom("VAU", {var("f"), U}))))))
            fail(s.id, kind, "image is not the assignment fact over Uni'_k");
        } else if (cert.rfind("cert:", 0) == 0) {
          // certify() has matched the family and the stage bound
        } else {
          if (!alpha_eq(row.formula, f)) fail(s.id, kind, "L-sentence is not fixed");
          Step one = s;
          one.id = 1;
          ProofScript q;
          q.steps.push_back(one);
          CheckReport r = check(q, zf);
          if (!r.ok) fail(s.id, kind, "fact does not hold in T_0: " + r.summary());
        }
        break;
      }
      case LedgerCase::FirstOrder: {
        if (s.just.rule == Rule::Taut) {
          // Images of tautologies are substitution instances of them.
          if (!is_closed_tautology(f)) fail(s.id, kind, "source row is not a tautology");
          break;
        }
        ProofScript q;
        CheckOptions o;
        Step last = s;
        last.formula = row.formula;
        last.just.refs.clear();
        int id = 1;
        bool bad = false;
        for (int r : s.just.refs) {
          const LedgerRow& pr = L.rows.at(pos.at(r));
          if (pr.conec > row.conec || pr.nec > row.nec) bad = true;
          Step h;
          h.id = id;
          h.formula = mk::apply(P.at(row.stage), L.source.steps[pos.at(r)].formula);
          h.just.rule = Rule::Axiom;
          h.just.theory = "hyp";
          h.just.schema = std::to_string(id - 1);
          o.hypotheses.push_back(expand(h.formula));
          last.just.refs.push_back(id++);
          q.steps.push_back(std::move(h));
        }
        if (bad) fail(s.id, kind, "premise needs a higher theory index");
        last.id = id;
        q.steps.push_back(std::move(last));
        CheckReport r = check(q, zf, o);
        if (!r.ok) fail(s.id, kind, "replay fails: " + r.summary());
        break;
      }
      case LedgerCase::Nec: {
        if (!P.admitted.count(kNecStar)) fail(s.id, kind, "NEC* not admitted");
        const LedgerRow& pr = L.rows.at(pos.at(s.just.refs.at(0)));
        if (c != 0) fail(s.id, kind, "NEC above a CONEC step");
        if (pr.stage + 1 > row.stage) fail(s.id, kind, "premise stage is not below the row stage");
        Expr code;
        if (!match_trbox(f, code)) {
          fail(s.id, kind, "formula is not a Tr-box");
          break;
        }
        if (!row.witness || !alpha_eq(row.witness, internal_line(P, row.stage, code)))
          fail(s.id, kind, "internal-model line differs");
        if (row.certificate != "dagger@" + std::to_string(P.absolute(row.stage))) fail(s.id, kind, "certificate differs");
        if (!dagger(P.absolute(row.stage))) fail(s.id, kind, "unfolding of Mod_k fails");
        break;
      }
      case LedgerCase::Conec: {
        if (!P.admitted.count(kConecStar)) fail(s.id, kind, "CONEC* not admitted");
        std::size_t ppos = pos.at(s.just.refs.at(0));
        const LedgerRow& pr = L.rows.at(ppos);
        if (pr.conec + 1 > row.conec) fail(s.id, kind, "C does not grow across CONEC");
        if (2 * static_cast<unsigned>(pr.conec) + row.stage + 2 > row.theory) fail(s.id, kind, "theory index below 2C' + k + 2");
        Expr prem = expand(L.source.steps[ppos].formula);
        Expr code;
        bool boxed = match_trbox(prem, code);
        try {
          boxed = boxed && alpha_eq(expand(decode(coding_normalize(code))), f);
        } catch (const CodingError&) {
          boxed = false;
        }
        if (!boxed) fail(s.id, kind, "premise is not the Tr-box of the row");
        if (!row.witness || !alpha_eq(row.witness, mk::apply(P.at(row.stage + 1), prem)))
          fail(s.id, kind, "premise image at stage k + 1 differs");
        break;
      }
    }
  }
  int N = 0, C = 0;
  for (const Step& s : L.source.steps) {
    N += s.just.rule == Rule::NEC;
    C += s.just.rule == Rule::CONEC;
  }
  const LedgerFinal& fin = L.final;
  if (fin.nec != N || fin.conec != C) rep.failures.push_back({0, "final: N/C counts differ"});
  unsigned st = static_cast<unsigned>(N) + 1, th = 2 * static_cast<unsigned>(C) + st;
  if (fin.stage != st || fin.theory != th || fin.stage_abs != st + L.a_prime || fin.theory_abs != th + L.a_prime)
    rep.failures.push_back({0, "final: indices differ from 2C + N + 1 (+ A')"});
  if (!L.source.empty() && (!fin.formula || !alpha_eq(fin.formula, mk::apply(P.at(st), L.source.last().formula))))
    rep.failures.push_back({0, "final: translated conclusion differs"});
  if (!L.rows.empty() && L.rows.back().theory > fin.theory) rep.failures.push_back({0, "final: theory below the last row"});
  rep.nec = N;
  rep.conec = C;
  rep.ok = rep.failures.empty();
  return rep;
}

std::string ledger_tsv(const TranslationLedger& L) {
  std::ostringstream o;
  o << "# ledger source=" << L.source_theory << " params=" << L.params << " a_prime=" << L.a_prime << '\n';
  o << "step\tcase\tN\tC\tstage\ttheory\tstage_abs\ttheory_abs\tcertificate\tformula\twitness\n";
  for (const LedgerRow& r : L.rows)
    o << r.source << '\t' << to_string(r.kind) << '\t' << r.nec << '\t' << r.conec << '\t' << r.stage << '\t' << r.theory
      << '\t' << r.stage + L.a_prime << '\t' << r.theory + L.a_prime << '\t' << r.certificate << '\t' << print(r.formula)
      << '\t' << (r.witness ? print(r.witness) : "-") << '\n';
  const LedgerFinal& f = L.final;
  o << "final\t-\t" << f.nec << '\t' << f.conec << '\t' << f.stage << '\t' << f.theory << '\t' << f.stage_abs << '\t'
    << f.theory_abs << '\t' << "A'=" << L.a_prime << '\t' << print(f.formula) << "\t-\n";
  return o.str();
}

namespace {

std::vector<std::string> split_tabs(const std::string& line) {
  std::vector<std::string> out;
  std::size_t a = 0;
  while (true) {
    std::size_t b = line.find('\t', a);
    out.push_back(line.substr(a, b == std::string::npos ? std::string::npos : b - a));
    if (b == std::string::npos) return out;
    a = b + 1;
  }
}

unsigned to_unsigned(const std::string& s, int line) {
  try {
    std::size_t used = 0;
    unsigned long v = std::stoul(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return static_cast<unsigned>(v);
  } catch (const std::exception&) {
    throw LedgerError("ledger line " + std::to_string(line) + ": expected a number, got '" + s + "'");
  }
}

Expr formula_cell(const std::string& s, int line) {
  try {
    return parse_formula(s);
  } catch (const ParseError& e) {
    throw LedgerError("ledger line " + std::to_string(line) + ": " + e.what());
  }
}

}  // namespace

TranslationLedger parse_ledger(std::string_view text, const ProofScript& source) {
  TranslationLedger L;
  L.source = expand_macros(source);
  std::istringstream in{std::string(text)};
  std::string line;
  int n = 0;
  bool header = false, final_seen = false;
  while (std::getline(in, line)) {
    ++n;
    if (line.empty()) continue;
    if (line.rfind("# ledger ", 0) == 0) {
      std::istringstream h(line.substr(9));
      for (std::string kv; h >> kv;) {
        auto eq = kv.find('=');
        if (eq == std::string::npos) throw LedgerError("ledger line " + std::to_string(n) + ": bad header field " + kv);
        std::string k = kv.substr(0, eq), v = kv.substr(eq + 1);
        if (k == "source") L.source_theory = v;
        else if (k == "params") L.params = v;
        else if (k == "a_prime") L.a_prime = to_unsigned(v, n);
        else throw LedgerError("ledger line " + std::to_string(n) + ": unknown header field " + k);
      }
      header = true;
      continue;
    }
    if (line.rfind("step\t", 0) == 0) continue;
    if (final_seen) throw LedgerError("ledger line " + std::to_string(n) + ": rows after the final line");
    std::vector<std::string> c = split_tabs(line);
    if (c.size() != 11) throw LedgerError("ledger line " + std::to_string(n) + ": expected 11 columns");
    if (c[0] == "final") {
      LedgerFinal& f = L.final;
      f.nec = static_cast<int>(to_unsigned(c[2], n));
      f.conec = static_cast<int>(to_unsigned(c[3], n));
      f.stage = to_unsigned(c[4], n);
      f.theory = to_unsigned(c[5], n);
      f.stage_abs = to_unsigned(c[6], n);
      f.theory_abs = to_unsigned(c[7], n);
      if (c[8] != "A'=" + std::to_string(L.a_prime))
        throw LedgerError("ledger line " + std::to_string(n) + ": final A' disagrees with the header");
      f.formula = formula_cell(c[9], n);
      final_seen = true;
      continue;
    }
    LedgerRow r;
    r.source = static_cast<int>(to_unsigned(c[0], n));
    bool known = false;
    for (LedgerCase k : {LedgerCase::Axiom, LedgerCase::FirstOrder, LedgerCase::Nec, LedgerCase::Conec})
      if (c[1] == to_string(k)) {
        r.kind = k;
        known = true;
      }
    if (!known) throw LedgerError("ledger line " + std::to_string(n) + ": unknown case " + c[1]);
    r.nec = static_cast<int>(to_unsigned(c[2], n));
    r.conec = static_cast<int>(to_unsigned(c[3], n));
    r.stage = to_unsigned(c[4], n);
    r.theory = to_unsigned(c[5], n);
    if (to_unsigned(c[6], n) != r.stage + L.a_prime || to_unsigned(c[7], n) != r.theory + L.a_prime)
      throw LedgerError("ledger line " + std::to_string(n) + ": absolute indices disagree with A'");
    r.certificate = c[8];
    r.formula = formula_cell(c[9], n);
    if (c[10] != "-") r.witness = formula_cell(c[10], n);
    L.rows.push_back(std::move(r));
  }
  if (!header) throw LedgerError("ledger header line missing");
  if (!final_seen) throw LedgerError("ledger final line missing");
  return L;
}

}  // namespace mk
