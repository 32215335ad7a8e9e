#include "cli.hpp"

#include <chrono>
#include <filesystem>
#include <sstream>

#include <CLI11.hpp>

#include "hyperclock/engine.hpp"
#include "hyperclock/formula.hpp"
#include "hyperclock/io.hpp"
#include "hyperclock/mso.hpp"
#include "hyperclock/pointwise.hpp"
#include "hyperclock/semantics.hpp"

#ifndef HYPERCLOCK_CORPUS_DIR
#define HYPERCLOCK_CORPUS_DIR "corpus"
#endif

namespace hyperclock {

namespace {

struct BudgetFlags {
  int granularity = 1;
  int maxTransitions = 2;
  std::string horizon = "2";
  int jobs = 1;

  void attach(CLI::App* cmd) {
    cmd->add_option("--granularity", granularity, "grid endpoints on multiples of 1/K");
    cmd->add_option("--max-transitions", maxTransitions, "transition bound D");
    cmd->add_option("--horizon", horizon, "time bound N");
    cmd->add_option("--jobs", jobs, "worker threads");
  }
  GridBudget budget() const {
    GridBudget b;
    b.granularity = granularity;
    b.maxTransitions = maxTransitions;
    try {
      b.horizon = Rational::parse(horizon);
    } catch (const std::exception& e) {
      throw InputError("--horizon", e.what());
    }
    b.jobs = jobs;
    checkBudget(b);
    return b;
  }
};

InputError inFile(const std::string& path, const InputError& e) {
  return InputError(e.where().empty() ? path : path + ":" + e.where(), e.message());
}

// "@path" reads the formula from a file.
std::string formulaText(const std::string& arg) {
  if (!arg.empty() && arg[0] == '@') {
    std::string s;
    try {
      s = readFile(arg.substr(1));
    } catch (const InputError& e) {
      throw InputError(arg.substr(1), e.message());
    }
    while (!s.empty() && (s.back() == '\n' || s.back() == '\r')) s.pop_back();
    return s;
  }
  return arg;
}

TimedAutomaton loadAutomaton(const std::string& path) {
  try {
    return automatonFromJson(parseJson(readFile(path)));
  } catch (const InputError& e) {
    throw inFile(path, e);
  }
}

PointTimedAutomaton loadPointAutomaton(const std::string& path) {
  try {
    return pointAutomatonFromJson(parseJson(readFile(path)));
  } catch (const InputError& e) {
    throw inFile(path, e);
  }
}

Environment loadEnvironment(const std::string& path) {
  try {
    return environmentFromJson(parseJson(readFile(path)));
  } catch (const InputError& e) {
    throw inFile(path, e);
  }
}

// Labels every state with its own name.
TimedAutomaton selfLabelled(const PathEnvironment& Pi) {
  TimedAutomaton A;
  std::set<std::string> seen;
  for (const auto& [name, run] : Pi.paths)
    for (const auto& s : run.segments)
      if (seen.insert(s.state).second) {
        A.states.push_back(s.state);
        A.propositions.push_back(s.state);
        A.labels[s.state] = {s.state};
      }
  return A;
}

int exitFor(const Verdict& v) { return v.holds() ? 0 : 1; }

CorpusOutcome runEntry(const Json& e, const std::filesystem::path& dir) {
  CorpusOutcome o;
  o.name = e.at("name").get<std::string>();
  o.expected = e.at("expected").get<std::string>();
  std::string kind = e.value("kind", "interval");
  const auto& bj = e.at("budget");
  GridBudget b;
  b.granularity = bj.value("granularity", 1);
  b.maxTransitions = bj.value("maxTransitions", 2);
  b.horizon = Rational::parse(bj.at("horizon").get<std::string>());
  auto phi = e.contains("negateOf") ? negate(parseFormula(e.at("negateOf").get<std::string>()))
                                     : parseFormula(e.at("formula").get<std::string>());
  auto path = (dir / e.at("automaton").get<std::string>()).string();
  auto t0 = std::chrono::steady_clock::now();
  Verdict v = kind == "point" ? verifyPointChecked(loadPointAutomaton(path), phi, b) : verify(loadAutomaton(path), phi, b);
  o.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  o.got = verdictName(v.kind);
  o.witnessConfirmed = v.witnessConfirmed;
  o.runs = v.runsEnumerated;
  o.ok = o.got == o.expected && o.runs > 0 && (v.kind != VerdictKind::FailsWithWitness || v.witnessConfirmed);
  return o;
}

}  // namespace

std::vector<CorpusOutcome> runCorpus(const std::string& dir) {
  std::filesystem::path d = dir;
  Json index = parseJson(readFile((d / "corpus.json").string()));
  std::vector<CorpusOutcome> out;
  for (const auto& e : index.at("entries")) out.push_back(runEntry(e, d));
  return out;
}

int cliMain(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"hyperclock: hyperproperties of timed automata"};
  app.require_subcommand(1);

  std::string formulaArg, automatonPath, envPath, timeArg = "0", anchorArg, routeArg = "both", corpusDir;
  bool grid = false, timing = false;
  int index = 0;
  BudgetFlags budget;

  auto* parseCmd = app.add_subcommand("parse", "parse a formula and print its canonical form");
  parseCmd->add_option("formula", formulaArg)->required();

  auto* negateCmd = app.add_subcommand("negate", "print the negation normal form of !phi");
  negateCmd->add_option("formula", formulaArg)->required();

  auto* traceCmd = app.add_subcommand("check-trace", "evaluate a formula over an environment");
  traceCmd->add_option("env", envPath)->required();
  traceCmd->add_option("formula", formulaArg)->required();
  traceCmd->add_option("--at", timeArg, "evaluation time");
  traceCmd->add_option("--anchor", anchorArg, "anchor path variable (default: none)");
  traceCmd->add_option("--automaton", automatonPath, "automaton supplying labels");
  traceCmd->add_flag("--grid", grid, "quantify over grid runs of the automaton instead of the environment");
  budget.attach(traceCmd);

  auto* verifyCmd = app.add_subcommand("verify", "check a sentence on an interval-based automaton");
  verifyCmd->add_option("automaton", automatonPath)->required();
  verifyCmd->add_option("formula", formulaArg)->required();
  verifyCmd->add_flag("--timing", timing, "include wall time in the verdict");
  budget.attach(verifyCmd);

  auto* pointCmd = app.add_subcommand("verify-point", "check a sentence on a point-based automaton");
  pointCmd->add_option("automaton", automatonPath)->required();
  pointCmd->add_option("formula", formulaArg)->required();
  pointCmd->add_option("--route", routeArg, "direct, reduce or both")
      ->check(CLI::IsMember({"direct", "reduce", "both"}));
  pointCmd->add_flag("--timing", timing, "include wall time in the verdict");
  budget.attach(pointCmd);

  auto* msoCmd = app.add_subcommand("to-mso", "emit the automaton formula or a formula translation");
  msoCmd->add_option("--automaton", automatonPath)->required();
  msoCmd->add_option("--formula", formulaArg, "formula to translate instead of the automaton formula");
  msoCmd->add_option("--index", index, "translation index (0 for the root level)");
  msoCmd->add_option("--horizon", budget.horizon, "horizon recorded in the manifest");

  auto* p2iCmd = app.add_subcommand("point2interval", "emit the interval automaton and transformed formula");
  p2iCmd->add_option("automaton", automatonPath)->required();
  p2iCmd->add_option("formula", formulaArg);

  auto* corpusCmd = app.add_subcommand("corpus", "security property corpus");
  auto* corpusRun = corpusCmd->add_subcommand("run", "replay every corpus entry");
  corpusCmd->require_subcommand(1);
  corpusRun->add_option("--dir", corpusDir, "corpus directory")->default_val(HYPERCLOCK_CORPUS_DIR);

  try {
    std::vector<std::string> rev(args.rbegin(), args.rend());
    app.parse(rev);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e, out, err);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*parseCmd) {
      auto phi = parseFormula(formulaText(formulaArg), false);
      out << phi->str() << "\n";
      return 0;
    }
    if (*negateCmd) {
      auto phi = parseFormula(formulaText(formulaArg), false);
      out << negate(phi)->str() << "\n";
      return 0;
    }
    if (*traceCmd) {
      Rational t;
      try {
        t = Rational::parse(timeArg);
      } catch (const std::exception& e) {
        throw InputError("--at", e.what());
      }
      Anchor dag = anchorArg.empty() ? Anchor{} : Anchor{anchorArg};
      auto phi = parseFormula(formulaText(formulaArg), false);
      Environment env = loadEnvironment(envPath);
      bool result;
      if (auto* Pi = std::get_if<PathEnvironment>(&env)) {
        TimedAutomaton A = automatonPath.empty() ? selfLabelled(*Pi) : loadAutomaton(automatonPath);
        std::vector<Execution> runs;
        if (grid) {
          if (automatonPath.empty()) throw InputError("--grid", "needs --automaton");
          runs = enumerateRuns(A, budget.budget());
        } else {
          for (const auto& [name, run] : Pi->paths) runs.push_back(run);
        }
        RunListProvider provider(std::move(runs));
        result = satInterval(A, *Pi, t, dag, phi, &provider);
      } else {
        auto& Gamma = std::get<PointEnvironment>(env);
        if (automatonPath.empty()) throw InputError("--automaton", "point environments need a point automaton");
        PointTimedAutomaton B = loadPointAutomaton(automatonPath);
        std::vector<PointExecution> runs;
        if (grid) {
          runs = enumeratePointRuns(B, budget.budget());
        } else {
          for (const auto& [name, run] : Gamma.paths) runs.push_back(run);
        }
        PointRunListProvider provider(std::move(runs));
        result = satPoint(B, Gamma, t, dag, phi, &provider);
      }
      out << (result ? "true" : "false") << "\n";
      return result ? 0 : 1;
    }
    if (*verifyCmd) {
      auto A = loadAutomaton(automatonPath);
      auto phi = parseFormula(formulaText(formulaArg));
      auto v = verify(A, phi, budget.budget());
      out << toJson(v, timing).dump(2) << "\n";
      return exitFor(v);
    }
    if (*pointCmd) {
      auto B = loadPointAutomaton(automatonPath);
      auto phi = parseFormula(formulaText(formulaArg));
      auto b = budget.budget();
      Verdict v;
      if (routeArg == "direct") {
        v = verifyPoint(B, phi, b, Route::Direct);
      } else if (routeArg == "reduce") {
        v = verifyPoint(B, phi, b, Route::Reduce);
      } else {
        try {
          v = verifyPointChecked(B, phi, b);
        } catch (const ConsistencyError& e) {
          err << "error: " << e.what() << "\n";
          return 1;
        }
      }
      out << toJson(v, timing).dump(2) << "\n";
      return exitFor(v);
    }
    if (*msoCmd) {
      auto A = loadAutomaton(automatonPath);
      FormulaPtr phi;
      if (!formulaArg.empty()) phi = parseFormula(formulaText(formulaArg), false);
      Rational N;
      try {
        N = Rational::parse(budget.horizon);
      } catch (const std::exception& e) {
        throw InputError("--horizon", e.what());
      }
      auto constants = A.constants();
      if (phi)
        for (const auto& c : formulaConstants(phi)) constants.push_back(c);
      constants.push_back(N);
      auto scaling = scaleToIntegers(constants);
      auto As = A.scaled(scaling.factor);
      MsoManifest manifest;
      manifest.scale = scaling.factor;
      manifest.horizon = N * Rational(scaling.factor);
      MsoPtr out_phi;
      if (phi) {
        auto order = freeVars(phi);
        auto translated = translateHcmtl(scaleFormula(phi, scaling.factor), As, order);
        if (index < 0 || index >= static_cast<int>(translated.size()))
          throw InputError("--index", "expected 0.." + std::to_string(translated.size() - 1));
        out_phi = translated[index];
        std::string paths;
        for (const auto& v : order) paths += (paths.empty() ? "" : ",") + v;
        manifest.notes["free"] = "x";
        if (!paths.empty()) manifest.notes["paths"] = paths;
        manifest.notes["index"] = std::to_string(index);
      } else {
        out_phi = emitAutomatonFormula(As);
      }
      out << serializeMsoDocument(out_phi, manifest);
      return 0;
    }
    if (*p2iCmd) {
      auto B = loadPointAutomaton(automatonPath);
      Json j;
      j["automaton"] = toJson(buildIntervalAutomaton(B));
      if (!formulaArg.empty()) {
        auto phi = parseFormula(formulaText(formulaArg), false);
        j["formula"] = pointToInterval(phi, freeVars(phi))->str();
      }
      out << j.dump(2) << "\n";
      return 0;
    }
    if (*corpusRun) {
      bool all = true;
      for (const auto& o : runCorpus(corpusDir)) {
        out << (o.ok ? "ok   " : "FAIL ") << o.name << "  expected " << o.expected << "  got " << o.got;
        if (o.got == verdictName(VerdictKind::FailsWithWitness)) out << (o.witnessConfirmed ? " (confirmed)" : " (unconfirmed)");
        out << "  runs " << o.runs << "\n";
        all = all && o.ok;
      }
      return all ? 0 : 1;
    }
  } catch (const ParseError& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  } catch (const InputError& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  } catch (const WellFormednessError& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  } catch (const Json::exception& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::domain_error& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  } catch (const EvalError& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  }
  return 2;
}

}  // namespace hyperclock
