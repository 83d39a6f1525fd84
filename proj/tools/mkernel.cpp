// mkernel: command-line driver over the kernel modules.
#include <CLI11.hpp>

#include <chrono>
#include <fstream>
#include <iostream>
#include <sstream>

#include "mkernel/checker.hpp"
#include "mkernel/coding.hpp"
#include "mkernel/generators.hpp"
#include "mkernel/interpret.hpp"
#include "mkernel/modal.hpp"
#include "mkernel/normalize.hpp"
#include "mkernel/revision.hpp"
#include "mkernel/theories.hpp"

using namespace mk;

namespace {

constexpr int kOk = 0, kFail = 1, kUsage = 2;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Globals {
  bool machine = false;
  bool verbose = false;
  std::string save_dir;
};

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot read " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// A positional argument naming a file is read; anything else is the text.
std::string text_or_file(const std::string& arg) {
  std::ifstream in(arg);
  if (!in) return arg;
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_out(const std::string& path, const std::string& text) {
  if (path.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream out(path);
  if (!out) throw UsageError("cannot write " + path);
  out << text;
}

TheoryDescriptor theory(const std::string& name) {
  if (!Registry::standard().known(name)) throw UsageError("unknown theory " + name);
  return Registry::standard().get(name);
}

// The theory named by a leading "# theory: T" line, if any.
std::string declared_theory(const std::string& path, const std::string& fallback) {
  std::ifstream in(path);
  std::string line;
  while (std::getline(in, line) && !line.empty() && line[0] == '#')
    if (line.rfind("# theory: ", 0) == 0) return line.substr(10);
  return fallback;
}

ProofScript proof_file(const std::string& path) {
  if (!std::ifstream(path)) throw UsageError("cannot read " + path);
  return load_proof(path);
}

std::string token(std::string s) {
  for (char& c : s)
    if (c == ' ' || c == '\t') c = '_';
  return s;
}

int report(const Globals& g, const std::string& label, const CheckReport& r) {
  if (g.machine) {
    std::string what = token(label);
    std::cout << "record=check target=" << what << " ok=" << (r.ok ? 1 : 0) << " nec=" << r.nec << " conec=" << r.conec
              << " failures=" << r.failures.size() << " flagged=" << r.flagged.size() << "\n";
    for (auto& f : r.failures) std::cout << "record=failure target=" << what << " step=" << f.step << " reason=" << f.reason << "\n";
  } else {
    std::cout << label << ": " << r.summary() << "\n";
  }
  return r.ok ? kOk : kFail;
}

// --- demo targets -----------------------------------------------------------------

int show(const Globals& g, const std::string& name, const Generated& gen) {
  if (!g.save_dir.empty()) {
    std::string file = token(name);
    std::erase_if(file, [](char c) { return c == '(' || c == ')' || c == ','; });
    std::ofstream out(g.save_dir + "/" + file + ".p");
    if (!out) throw UsageError("cannot write into " + g.save_dir);
    out << "# theory: " << gen.theory << "\n" << to_text(gen.proof);
  }
  if (!g.machine) std::cout << "== " << name << " (theory " << gen.theory << ")\n" << to_text(gen.proof);
  return report(g, name, check(gen.proof, theory(gen.theory)));
}

int demo(const Globals& g, const std::string& target) {
  int rc = kOk;
  auto merge = [&](int r) { rc = std::max(rc, r); };
  Expr a = parse_formula("(ex x (all y (not (in y x))))"), c = parse_formula("(all x (= x x))");
  if (target == "liar-a" || target == "liar-b") {
    Generated gen = generate_liar(target == "liar-a" ? LiarVariant::A : LiarVariant::B);
    merge(show(g, target, gen));
    ProofScript cut;
    int named = liar_named_step(gen);
    for (auto& s : gen.proof.steps)
      if (s.id != named) cut.steps.push_back(s);
    CheckReport ablated = check(cut, theory(gen.theory));
    if (g.machine)
      std::cout << "record=ablation target=" << target << " removed_step=" << named << " ok=" << (ablated.ok ? 1 : 0) << "\n";
    else
      std::cout << "ablation: without step " << named << " the checker " << (ablated.ok ? "ACCEPTS" : "rejects") << "\n";
    if (ablated.ok) merge(kFail);
  } else if (target == "tarski") {
    for (const char* f : {"(in x y)", "(not (= x y))", "(all z (imp (in z x) (in z y)))", "(ex x (all y (not (in y x))))"})
      merge(show(g, std::string("tarski ") + f, generate_tarski(parse_formula(f))));
  } else if (target == "box-props") {
    for (const char* l : {"CMbox_imp", "CMbox_and", "CMbox_iff"}) merge(show(g, l, generate_box_lemma(l, {a, c})));
    merge(show(g, "CMbox_bot", generate_box_lemma("CMbox_bot", {})));
    merge(show(g, "CMbox_not", generate_box_lemma("CMbox_not", {a})));
    merge(show(g, "D_CM", generate_box_lemma("D_CM", {a})));
  } else if (target == "con-iter") {
    for (unsigned n = 1; n <= 3; ++n) merge(show(g, "con-" + std::to_string(n), generate_iterated(IterKind::Con, n)));
  } else if (target == "refl-iter") {
    for (unsigned n = 1; n <= 3; ++n)
      merge(show(g, "refl-" + std::to_string(n), generate_iterated(IterKind::Reflection, n, parse_formula("(ex x (= x x))"))));
  } else if (target == "arith-abs") {
    merge(show(g, "arith-abs", generate_arith_abs(parse_formula("(all x (imp (Nat x) (ex y (and (Nat y) (Lt x y)))))"))));
  } else if (target == "k-embed") {
    std::map<std::string, Expr> val = {{"p", a}, {"q", c}};
    ModalFormula p = mvar("p"), q = mvar("q");
    Generated k{"CMminus", k_axiom_proof(p, q, val)};
    merge(show(g, "K instance p q", k));
    Generated kn{"CMminus", k_axiom_proof(mbox(p), mnot(q), val)};
    merge(show(g, "K instance (box p) (not q)", kn));
    Generated nec{"MSminus", necessitation_proof(mimp(p, p), val)};
    merge(show(g, "necessitation (imp p p)", nec));
  } else {
    throw UsageError("unknown demo target " + target);
  }
  return rc;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"mkernel: multiverse truth kernel"};
  app.require_subcommand(1);
  app.fallthrough();
  Globals g;
  app.add_flag("--machine", g.machine, "line-oriented key=value records");
  app.add_flag("--verbose", g.verbose, "timing on stderr");

  std::string input, theory_name = "CMminus", out_path, params_path, ledger_path, scenario_path;
  unsigned a_prime = 1, stages = 10;
  bool do_expand = false, with_checks = false;

  auto* parse_cmd = app.add_subcommand("parse", "parse and print a formula");
  parse_cmd->add_option("input", input, "formula text or file")->required();
  parse_cmd->add_flag("--expand", do_expand, "eliminate abbreviations");

  auto* check_cmd = app.add_subcommand("check", "check a proof file");
  check_cmd->add_option("proof", input)->required();
  auto* check_cmd_th = check_cmd->add_option("--theory", theory_name, "ambient theory");

  auto* norm_cmd = app.add_subcommand("normalize", "move NEC steps before CONEC steps");
  norm_cmd->add_option("proof", input)->required();
  auto* norm_cmd_th = norm_cmd->add_option("--theory", theory_name);
  norm_cmd->add_option("-o,--output", out_path, "write the normalized proof here");

  auto* tr_cmd = app.add_subcommand("translate", "translation ledger of a normalized proof");
  tr_cmd->add_option("proof", input)->required();
  auto* tr_cmd_th = tr_cmd->add_option("--theory", theory_name);
  tr_cmd->add_option("--params", params_path, "revision parameter manifest")->required();
  tr_cmd->add_option("--a-prime", a_prime, "stage shift");
  tr_cmd->add_option("-o,--output", out_path);

  auto* vl_cmd = app.add_subcommand("verify-ledger", "verify a ledger against its proof");
  vl_cmd->add_option("proof", input)->required();
  vl_cmd->add_option("--ledger", ledger_path)->required();
  vl_cmd->add_option("--params", params_path)->required();

  auto* diag_cmd = app.add_subcommand("diagonalize", "fixed point of a formula in one free variable");
  diag_cmd->add_option("formula", input)->required();
  diag_cmd->add_option("--theory", theory_name);

  auto* rev_cmd = app.add_subcommand("revise", "run the stage map on a scenario");
  rev_cmd->add_option("--scenario", scenario_path)->required();
  rev_cmd->add_option("--stages", stages);
  rev_cmd->add_flag("--check", with_checks, "also report the stage axiom checks");

  auto* gl_cmd = app.add_subcommand("gl", "provability logic");
  std::string gl_mode, gl_formula;
  std::vector<std::string> gl_vals;
  gl_cmd->add_option("mode", gl_mode, "valid | countermodel | embed")->required()->check(CLI::IsMember({"valid", "countermodel", "embed"}));
  gl_cmd->add_option("formula", gl_formula)->required();
  gl_cmd->add_option("--val", gl_vals, "p=<sentence>");

  auto* demo_cmd = app.add_subcommand("demo", "reproduce a derivation");
  std::string target;
  demo_cmd->add_option("target", target)
      ->required()
      ->check(CLI::IsMember({"liar-a", "liar-b", "tarski", "box-props", "con-iter", "refl-iter", "arith-abs", "k-embed"}));
  demo_cmd->add_option("--save-dir", g.save_dir, "also write each proof to this directory")->check(CLI::ExistingDirectory);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsage;
  }

  for (auto [cmd, opt] : {std::pair{check_cmd, check_cmd_th}, {norm_cmd, norm_cmd_th}, {tr_cmd, tr_cmd_th}})
    if (cmd->parsed() && opt->count() == 0) theory_name = declared_theory(input, theory_name);

  auto t0 = std::chrono::steady_clock::now();
  int rc = kOk;
  try {
    if (*parse_cmd) {
      Expr e = parse_formula(text_or_file(input));
      std::cout << print(do_expand ? expand(e) : e) << "\n";
    } else if (*check_cmd) {
      rc = report(g, input, check(proof_file(input), theory(theory_name)));
    } else if (*norm_cmd) {
      ProofScript p = normalize(proof_file(input), theory(theory_name));
      if (out_path.empty()) std::cout << to_text(p);
      else save_proof(p, out_path);
      if (g.machine) std::cout << "record=normalize steps=" << p.steps.size() << " order_ok=" << nec_before_conec(p) << "\n";
    } else if (*tr_cmd) {
      RevisionParams P = load_params(params_path);
      TranslationLedger L = main_lemma_transform(proof_file(input), P, a_prime, theory(theory_name));
      write_out(out_path, ledger_tsv(L));
    } else if (*vl_cmd) {
      RevisionParams P = load_params(params_path);
      TranslationLedger L = parse_ledger(read_file(ledger_path), proof_file(input));
      rc = report(g, ledger_path, verify_ledger(L, P));
    } else if (*diag_cmd) {
      Diagonal d = diagonalize(expand(parse_formula(text_or_file(input))));
      CheckReport r = check(d.proof, theory(theory_name));
      if (g.machine) {
        std::cout << "record=diagonal var=" << d.var << " lambda=" << print(d.lambda) << "\n";
      } else {
        std::cout << "lambda: " << print(d.lambda) << "\n" << to_text(d.proof);
      }
      rc = report(g, "diagonal", r);
    } else if (*rev_cmd) {
      MultiverseState s = load_scenario(scenario_path);
      if (g.machine) std::cout << "record=scenario structures=" << s.pool.size() << " stock=" << s.stock.size() << "\n";
      for (unsigned n = 1; n <= stages; ++n) {
        s = revise(s);
        std::cout << truth_table_tsv(s, n == 1 && !g.machine);
        if (with_checks) {
          StageReport r = check_stage_axioms(s);
          if (g.machine) std::cout << "record=stage stage=" << n << " ok=" << r.ok() << " violations=" << r.violations.size() << "\n";
          else std::cout << "# " << r.summary() << "\n";
          if (!r.ok()) rc = kFail;
        }
      }
      CycleInfo c = find_cycle(load_scenario(scenario_path), stages);
      if (g.machine) std::cout << "record=cycle preperiod=" << c.preperiod << " period=" << c.period << "\n";
      else if (c.period) std::cout << "# tables repeat from stage " << c.preperiod << " with period " << c.period << "\n";
      else std::cout << "# no repetition within " << stages << " stages\n";
    } else if (*gl_cmd) {
      ModalFormula f = parse_modal(gl_formula);
      if (gl_mode == "valid") {
        bool v = gl_valid(f);
        std::cout << (g.machine ? "record=gl valid=" + std::to_string(v) : std::string(v ? "valid" : "not valid")) << "\n";
        rc = v ? kOk : kFail;
      } else if (gl_mode == "countermodel") {
        auto m = gl_countermodel(f);
        if (m) std::cout << m->describe();
        else std::cout << "none: the formula is valid\n";
      } else {
        std::map<std::string, Expr> val;
        for (auto& kv : gl_vals) {
          auto eq = kv.find('=');
          if (eq == std::string::npos) throw UsageError("--val expects p=<sentence>");
          val[kv.substr(0, eq)] = parse_formula(kv.substr(eq + 1));
        }
        std::cout << print(embed(f, val)) << "\n";
      }
    } else if (*demo_cmd) {
      rc = demo(g, target);
    }
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const ModalError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    rc = kFail;
  }
  if (g.verbose) {
    double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::cerr << "elapsed " << secs << " s\n";
  }
  return rc;
}
