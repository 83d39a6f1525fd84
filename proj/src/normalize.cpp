#include "mkernel/normalize.hpp"

#include <algorithm>
#include <cstdlib>
#include <map>

#include "mkernel/generators.hpp"
#include "mkernel/soundness.hpp"
#include "mkernel/theories.hpp"

namespace mk {

bool nec_before_conec(const ProofScript& p) {
  int last_nec = -1, first_conec = -1;
  for (std::size_t i = 0; i < p.steps.size(); ++i) {
    Rule r = p.steps[i].just.rule;
    if (r == Rule::NEC) last_nec = static_cast<int>(i);
    if (r == Rule::CONEC && first_conec < 0) first_conec = static_cast<int>(i);
  }
  return last_nec < 0 || first_conec < 0 || last_nec < first_conec;
}

ProofScript renumber(const ProofScript& p) {
  std::map<int, int> to;
  ProofScript out;
  int next = 1;
  for (const Step& s : p.steps) {
    Step c = s;
    c.id = next;
    for (int& r : c.just.refs) r = to.at(r);
    to[s.id] = next++;
    out.steps.push_back(std::move(c));
  }
  return out;
}

namespace {

enum Section { A = 0, B = 1 };  // A: no CONEC above; B: may follow CONEC, never NEC

std::size_t budget() {
  if (const char* e = std::getenv("MULTIKERNEL_BUDGET")) {
    long v = std::strtol(e, nullptr, 10);
    if (v > 0) return static_cast<std::size_t>(v);
  }
  return 200000;
}

struct Entry {
  Expr f;
  Justification j;  // refs are pool indices
  int section;
  int origin;  // input step id, 0 for generated steps
};

class Normalizer {
 public:
  explicit Normalizer(std::size_t limit) : limit_(limit) {}

  int add(Expr f, Justification j, int section, int origin) {
    std::string k = key(f);
    auto it = index_.find(k);
    if (it != index_.end()) return it->second;
    if (pool_.size() >= limit_) throw ResourceError("normalization exceeds the step budget of " + std::to_string(limit_));
    int idx = static_cast<int>(pool_.size());
    pool_.push_back(Entry{std::move(f), std::move(j), section, origin});
    index_.emplace(std::move(k), idx);
    return idx;
  }

  int section_of(const std::vector<int>& refs) const {
    int s = A;
    for (int r : refs) s = std::max(s, pool_[r].section);
    return s;
  }

  const Entry& at(int idx) const { return pool_[idx]; }

  // Pool index of a derivation of trbox(quote theta) for the entry idx.
  int box_of(int idx) {
    auto m = boxed_.find(idx);
    if (m != boxed_.end()) return m->second;
    Entry e = pool_[idx];
    int out;
    switch (e.j.rule) {
      case Rule::CONEC:
        out = e.j.refs.at(0);
        break;
      case Rule::Taut:
        out = macro({}, propositional_subproof({}, e.f), e.f);
        break;
      case Rule::MP: {
        int imp_box = box_of(e.j.refs.at(0));
        int ant_box = box_of(e.j.refs.at(1));
        out = mp_macro(e.j.refs.at(0), e.j.refs.at(1), imp_box, ant_box, e.f);
        break;
      }
      case Rule::Macro:
        if (e.section == B) {
          out = inline_macro(e);
          break;
        }
        [[fallthrough]];
      default:
        if (e.section != A)
          throw NormalizeError(e.origin, "rule " + to_string(e.j) + " cannot be carried under the box after CONEC");
        out = nec(idx);
    }
    boxed_[idx] = out;
    return out;
  }

  ProofScript emit() const {
    ProofScript out;
    std::vector<int> id(pool_.size(), 0);
    int next = 1;
    for (int sec : {A, B}) {
      for (std::size_t i = 0; i < pool_.size(); ++i) {
        if (pool_[i].section != sec) continue;
        Step s;
        s.id = next;
        id[i] = next++;
        s.formula = pool_[i].f;
        s.just = pool_[i].j;
        for (int& r : s.just.refs) r = id.at(r);
        out.steps.push_back(std::move(s));
      }
    }
    return out;
  }

 private:
  int nec(int idx) {
    Justification j;
    j.rule = Rule::NEC;
    j.refs = {idx};
    return add(ax::box(quote(pool_[idx].f)), std::move(j), A, 0);
  }

  // A soundness-macro step from the boxes at premise_boxes (in hypothesis order).
  int macro(const std::vector<int>& premise_boxes, ProofScript sub, const Expr& theta) {
    Justification j;
    j.rule = Rule::Macro;
    j.macro = "soundness";
    j.refs = premise_boxes;
    j.sub = std::make_shared<const ProofScript>(std::move(sub));
    return add(ax::box(quote(theta)), std::move(j), section_of(premise_boxes), 0);
  }

  // Premises in ascending pool order, deduplicated by formula.
  int mp_macro(int imp_idx, int ant_idx, int imp_box, int ant_box, const Expr& theta) {
    std::vector<std::pair<int, int>> prem = {{imp_idx, imp_box}, {ant_idx, ant_box}};
    std::sort(prem.begin(), prem.end());
    prem.erase(std::unique(prem.begin(), prem.end()), prem.end());
    ProofBuilder b;
    std::map<int, int> hyp;
    std::vector<int> boxes;
    for (std::size_t k = 0; k < prem.size(); ++k) {
      hyp[prem[k].first] = b.axiom("hyp", std::to_string(k), pool_[prem[k].first].f);
      boxes.push_back(prem[k].second);
    }
    b.mp(hyp.at(imp_idx), hyp.at(ant_idx));
    return macro(boxes, b.take(), theta);
  }

  // Boxes every row of a macro's expansion, whose hypotheses are the boxed
  // premises at e.j.refs.
  int inline_macro(const Entry& e) {
    std::vector<Expr> premises;
    for (int r : e.j.refs) premises.push_back(pool_[r].f);
    ProofScript exp = soundness_macro(premises, *e.j.sub);
    std::map<int, int> row;  // expansion step id -> pool index of the row itself
    std::map<int, int> box;  // expansion step id -> pool index of its box
    int last = -1;
    for (const Step& s : exp.steps) {
      const Justification& j = s.just;
      int r;
      if (j.rule == Rule::Axiom && j.theory == "hyp") {
        r = e.j.refs.at(std::stoul(j.schema));
        box[s.id] = box_of(r);
      } else if (j.rule == Rule::Axiom || j.rule == Rule::Taut) {
        r = add(s.formula, j, A, 0);
        box[s.id] = box_of(r);
      } else if (j.rule == Rule::MP) {
        int i = row.at(j.refs.at(0)), a = row.at(j.refs.at(1));
        Justification jj = j;
        jj.refs = {i, a};
        r = add(s.formula, jj, section_of(jj.refs), 0);
        box[s.id] = mp_macro(i, a, box.at(j.refs[0]), box.at(j.refs[1]), s.formula);
      } else {
        throw NormalizeError(e.origin, "unexpected rule in soundness expansion");
      }
      row[s.id] = r;
      last = box[s.id];
    }
    return last;
  }

  std::size_t limit_;
  std::vector<Entry> pool_;
  std::map<std::string, int> index_;
  std::map<int, int> boxed_;
};

}  // namespace

ProofScript normalize(const ProofScript& p, const TheoryDescriptor& theory, const CheckOptions& opts) {
  CheckReport pre = check(p, theory, opts);
  if (!pre.ok) {
    int step = pre.failures.empty() ? 0 : pre.failures.front().step;
    throw NormalizeError(step, "input does not check: " + pre.summary());
  }
  if (nec_before_conec(p)) return renumber(p);
  Normalizer n(budget());
  std::map<int, int> at;  // input id -> pool index
  int last = -1;
  for (const Step& s : p.steps) {
    Justification j = s.just;
    for (int& r : j.refs) r = at.at(r);
    int idx;
    switch (j.rule) {
      case Rule::NEC: {
        Expr code;
        if (!match_trbox(s.formula, code)) throw NormalizeError(s.id, "only trbox NEC steps are normalized");
        idx = n.box_of(j.refs.at(0));
        break;
      }
      case Rule::CONEC:
        idx = n.add(s.formula, j, B, s.id);
        break;
      default:
        idx = n.add(s.formula, j, n.section_of(j.refs), s.id);
    }
    at[s.id] = idx;
    last = idx;
  }
  ProofScript out = n.emit();
  // The conclusion may sit in section A while later B steps exist; repeat it last.
  const Expr& concl = n.at(last).f;
  if (!alpha_eq(out.last().formula, concl)) {
    int id = 0;
    for (auto& s : out.steps)
      if (alpha_eq(s.formula, concl)) id = s.id;
    ProofBuilder tail(std::move(out));
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

}  // namespace mk
