#include "mkernel/soundness.hpp"

#include "mkernel/checker.hpp"
#include "mkernel/coding.hpp"
#include "mkernel/theories.hpp"

namespace mk {

namespace {

Expr mod_of(const Expr& phi) { return atom("Mod", {var("U"), quote(phi), var("f")}); }

// CM instance making Mod(U, quote phi, f) compositional at phi's principal connective.
Expr cm_step(const Expr& phi) {
  switch (phi->kind) {
    case Kind::Not: return ax::cm_instance("CM_not", {quote(phi->kids[0])});
    case Kind::And: return ax::cm_instance("CM_and", {quote(phi->kids[0]), quote(phi->kids[1])});
    case Kind::Or: return ax::cm_instance("CM_or", {quote(phi->kids[0]), quote(phi->kids[1])});
    case Kind::Imp: return ax::cm_instance("CM_imp", {quote(phi->kids[0]), quote(phi->kids[1])});
    case Kind::Iff: return ax::cm_instance("CM_iff", {quote(phi->kids[0]), quote(phi->kids[1])});
    case Kind::Bot: return ax::cm_instance("CM_bot", {});
    case Kind::Top: return ax::cm_instance("CM_top", {});
    default: return nullptr;
  }
}

const char* cm_label(Kind k) {
  switch (k) {
    case Kind::Not: return "CM_not";
    case Kind::And: return "CM_and";
    case Kind::Or: return "CM_or";
    case Kind::Imp: return "CM_imp";
    case Kind::Iff: return "CM_iff";
    case Kind::Bot: return "CM_bot";
    default: return "CM_top";
  }
}

// One CM instance per propositional node of phi.
void internalize(ProofBuilder& b, const Expr& phi, std::vector<int>& ids) {
  Expr inst = cm_step(phi);
  if (!inst) return;
  ids.push_back(b.axiom("CMcomp", cm_label(phi->kind), inst));
  for (auto& k : phi->kids) internalize(b, k, ids);
}

}  // namespace

ProofScript soundness_macro(const std::vector<Expr>& premises, const ProofScript& fo_subproof) {
  if (fo_subproof.empty()) throw MacroError("empty subproof");
  const Prefix pi = universe_prefix();
  ProofBuilder b;
  std::map<int, int> boxed;  // subproof id -> builder id of its boxed form
  for (const Step& s : fo_subproof.steps) {
    Expr theta = expand(s.formula);
    if (!is_formula(theta) || !is_sentence(theta)) throw MacroError("step " + std::to_string(s.id) + " is not a sentence");
    const Justification& j = s.just;
    switch (j.rule) {
      case Rule::Axiom: {
        if (j.theory != "hyp") throw MacroError("step " + std::to_string(s.id) + ": only hypotheses may be cited");
        std::size_t k = std::stoul(j.schema);
        if (k >= premises.size()) throw MacroError("step " + std::to_string(s.id) + ": no premise " + j.schema);
        if (!alpha_eq(premises[k], ax::box(quote(theta))))
          throw MacroError("premise " + j.schema + " is not the box of hypothesis " + std::to_string(s.id));
        boxed[s.id] = b.axiom("hyp", j.schema, premises[k]);
        break;
      }
      case Rule::Taut: {
        if (!is_tautology(theta)) throw MacroError("step " + std::to_string(s.id) + " is not a tautology");
        std::vector<int> ids;
        internalize(b, theta, ids);
        boxed[s.id] = b.ctx_taut(pi, ids, mod_of(theta));
        break;
      }
      case Rule::MP: {
        auto a = boxed.find(j.refs.at(0)), c = boxed.find(j.refs.at(1));
        if (a == boxed.end() || c == boxed.end()) throw MacroError("step " + std::to_string(s.id) + ": bad reference");
        const Step* ps = fo_subproof.find(j.refs[1]);
        Expr ant = expand(ps->formula);
        int inst = b.axiom("CMcomp", "CM_imp", ax::cm_instance("CM_imp", {quote(ant), quote(theta)}));
        boxed[s.id] = b.ctx_taut(pi, {inst, a->second, c->second}, mod_of(theta));
        break;
      }
      default:
        throw MacroError("step " + std::to_string(s.id) + ": rule " + to_string(j) +
                         " is beyond propositional internalization");
    }
  }
  ProofScript out = b.take();
  // The builder reuses alpha-equal steps; make sure the conclusion is last.
  Expr concl = ax::box(quote(expand(fo_subproof.last().formula)));
  if (!alpha_eq(out.last().formula, concl)) {
    ProofBuilder tail(std::move(out));
    int id = tail.find(concl);
    int t = tail.taut(imp(concl, concl));
    out = tail.take();
    Step s;
    s.id = out.last().id + 1;
    s.formula = concl;
    s.just.rule = Rule::MP;
    s.just.refs = {t, id};
    out.steps.push_back(std::move(s));
  }
  return out;
}

int soundness_step(ProofBuilder& b, const std::vector<int>& premise_ids, ProofScript sub) {
  Justification j;
  j.rule = Rule::Macro;
  j.macro = "soundness";
  j.refs = premise_ids;
  Expr concl = ax::box(quote(expand(sub.last().formula)));
  j.sub = std::make_shared<const ProofScript>(std::move(sub));
  return b.add(concl, std::move(j));
}

ProofScript propositional_subproof(const std::vector<Expr>& hyps, const Expr& concl) {
  ProofBuilder b;
  std::vector<int> ids;
  for (std::size_t k = 0; k < hyps.size(); ++k) ids.push_back(b.axiom("hyp", std::to_string(k), hyps[k]));
  if (hyps.empty()) {
    b.taut(concl);
  } else {
    b.taut_chain(ids, concl);
  }
  return b.take();
}

}  // namespace mk
