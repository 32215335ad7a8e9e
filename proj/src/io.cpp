#include "hyperclock/io.hpp"

#include <fstream>
#include <sstream>

namespace hyperclock {

namespace {

std::string at(const std::string& where, const std::string& key) { return where + "/" + key; }
std::string at(const std::string& where, std::size_t i) { return where + "/" + std::to_string(i); }

const Json& field(const Json& j, const std::string& key, const std::string& where) {
  if (!j.is_object()) throw InputError(where.empty() ? "/" : where, "expected an object");
  auto it = j.find(key);
  if (it == j.end()) throw InputError(where.empty() ? "/" : where, "missing field '" + key + "'");
  return *it;
}

std::string str(const Json& j, const std::string& where) {
  if (!j.is_string()) throw InputError(where, "expected a string");
  return j.get<std::string>();
}

// Rationals may be written as strings or JSON integers.
Rational rat(const Json& j, const std::string& where) {
  try {
    if (j.is_number_integer()) return Rational(j.get<std::int64_t>());
    if (j.is_string()) return Rational::parse(j.get<std::string>());
  } catch (const std::exception& e) {
    throw InputError(where, e.what());
  }
  throw InputError(where, "expected a rational");
}

TimeBound bound(const Json& j, const std::string& where) {
  if (j.is_string() && j.get<std::string>() == "inf") return TimeBound::infinity();
  return TimeBound(rat(j, where));
}

const Json& arr(const Json& j, const std::string& where) {
  if (!j.is_array()) throw InputError(where, "expected an array");
  return j;
}

std::vector<std::string> strings(const Json& j, const std::string& where) {
  std::vector<std::string> out;
  const auto& a = arr(j, where);
  for (std::size_t i = 0; i < a.size(); ++i) out.push_back(str(a[i], at(where, i)));
  return out;
}

std::set<std::string> stringSet(const Json& j, const std::string& where) {
  auto v = strings(j, where);
  return {v.begin(), v.end()};
}

int integer(const Json& j, const std::string& where) {
  if (!j.is_number_integer()) throw InputError(where, "expected an integer");
  return j.get<int>();
}

ConstraintPtr constraint(const Json& j, const std::string& where) {
  try {
    return ClockConstraint::parse(str(j, where));
  } catch (const InputError&) {
    throw;
  } catch (const std::exception& e) {
    throw InputError(where, e.what());
  }
}

Interval interval(const Json& j, const std::string& where) {
  try {
    return Interval::parse(str(j, where));
  } catch (const InputError&) {
    throw;
  } catch (const std::exception& e) {
    throw InputError(where, e.what());
  }
}

template <class T>
Json jsonSet(const T& c) {
  Json a = Json::array();
  for (const auto& s : c) a.push_back(s);
  return a;
}

template <class F>
auto checked(const std::string& where, F&& f) {
  try {
    return f();
  } catch (const InputError&) {
    throw;
  } catch (const std::exception& e) {
    throw InputError(where, e.what());
  }
}

}  // namespace

Json parseJson(const std::string& text) {
  try {
    return Json::parse(text);
  } catch (const Json::parse_error& e) {
    std::size_t line = 1, col = 1;
    for (std::size_t i = 0; i + 1 < e.byte && i < text.size(); ++i) {
      if (text[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    std::string msg = e.what();
    auto p = msg.find("syntax error");
    throw InputError(std::to_string(line) + ":" + std::to_string(col), p == std::string::npos ? msg : msg.substr(p));
  }
}

std::string readFile(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError(path, "cannot open file");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

TimedAutomaton automatonFromJson(const Json& j) {
  TimedAutomaton A;
  A.propositions = strings(field(j, "propositions", ""), "/propositions");
  A.states = strings(field(j, "states", ""), "/states");
  A.initial = stringSet(field(j, "initial", ""), "/initial");
  if (j.contains("labels")) {
    const auto& L = j["labels"];
    if (!L.is_object()) throw InputError("/labels", "expected an object");
    for (const auto& [v, props] : L.items()) A.labels[v] = stringSet(props, at("/labels", v));
  }
  A.clocks = j.contains("clocks") ? strings(j["clocks"], "/clocks") : std::vector<std::string>{};
  if (j.contains("stateConstraints")) {
    const auto& S = j["stateConstraints"];
    if (!S.is_object()) throw InputError("/stateConstraints", "expected an object");
    for (const auto& [v, byClock] : S.items()) {
      std::string w = at("/stateConstraints", v);
      if (!byClock.is_object()) throw InputError(w, "expected an object");
      for (const auto& [x, c] : byClock.items()) A.stateConstraints[{v, x}] = constraint(c, at(w, x));
    }
  }
  const auto& E = arr(field(j, "edges", ""), "/edges");
  for (std::size_t i = 0; i < E.size(); ++i) {
    std::string w = at("/edges", i);
    Edge e;
    e.from = str(field(E[i], "from", w), at(w, "from"));
    e.to = str(field(E[i], "to", w), at(w, "to"));
    if (E[i].contains("guards")) {
      const auto& G = arr(E[i]["guards"], at(w, "guards"));
      for (std::size_t g = 0; g < G.size(); ++g) e.guards.push_back(constraint(G[g], at(at(w, "guards"), g)));
    }
    if (E[i].contains("resets")) e.resets = stringSet(E[i]["resets"], at(w, "resets"));
    A.edges.push_back(std::move(e));
  }
  A.final = stringSet(field(j, "final", ""), "/final");
  checked("/", [&] {
    A.check();
    return 0;
  });
  return A;
}

Json toJson(const TimedAutomaton& A) {
  Json j;
  j["propositions"] = jsonSet(A.propositions);
  j["states"] = jsonSet(A.states);
  j["initial"] = jsonSet(A.initial);
  j["labels"] = Json::object();
  for (const auto& [v, props] : A.labels) j["labels"][v] = jsonSet(props);
  j["clocks"] = jsonSet(A.clocks);
  j["stateConstraints"] = Json::object();
  for (const auto& [key, c] : A.stateConstraints) j["stateConstraints"][key.first][key.second] = c->str();
  j["edges"] = Json::array();
  for (const auto& e : A.edges) {
    Json g = Json::array();
    for (const auto& c : e.guards) g.push_back(c->str());
    j["edges"].push_back({{"from", e.from}, {"to", e.to}, {"guards", g}, {"resets", jsonSet(e.resets)}});
  }
  j["final"] = jsonSet(A.final);
  return j;
}

PointTimedAutomaton pointAutomatonFromJson(const Json& j) {
  PointTimedAutomaton B;
  B.propositions = strings(field(j, "propositions", ""), "/propositions");
  B.states = strings(field(j, "states", ""), "/states");
  B.start = str(field(j, "start", ""), "/start");
  B.clocks = j.contains("clocks") ? strings(j["clocks"], "/clocks") : std::vector<std::string>{};
  const auto& E = arr(field(j, "edges", ""), "/edges");
  for (std::size_t i = 0; i < E.size(); ++i) {
    std::string w = at("/edges", i);
    PointEdge e;
    e.from = str(field(E[i], "from", w), at(w, "from"));
    e.to = str(field(E[i], "to", w), at(w, "to"));
    if (E[i].contains("events")) e.event = stringSet(E[i]["events"], at(w, "events"));
    if (E[i].contains("guards")) {
      const auto& G = arr(E[i]["guards"], at(w, "guards"));
      for (std::size_t g = 0; g < G.size(); ++g) e.guards.push_back(constraint(G[g], at(at(w, "guards"), g)));
    }
    if (E[i].contains("resets")) e.resets = stringSet(E[i]["resets"], at(w, "resets"));
    B.edges.push_back(std::move(e));
  }
  B.final = stringSet(field(j, "final", ""), "/final");
  checked("/", [&] {
    B.check();
    return 0;
  });
  return B;
}

Json toJson(const PointTimedAutomaton& B) {
  Json j;
  j["propositions"] = jsonSet(B.propositions);
  j["states"] = jsonSet(B.states);
  j["start"] = B.start;
  j["clocks"] = jsonSet(B.clocks);
  j["edges"] = Json::array();
  for (const auto& e : B.edges) {
    Json g = Json::array();
    for (const auto& c : e.guards) g.push_back(c->str());
    j["edges"].push_back(
        {{"from", e.from}, {"to", e.to}, {"events", jsonSet(e.event)}, {"guards", g}, {"resets", jsonSet(e.resets)}});
  }
  j["final"] = jsonSet(B.final);
  return j;
}

Execution executionFromJson(const Json& j, const std::string& where) {
  Execution rho;
  std::string ws = at(where, "segments");
  const auto& S = arr(field(j, "segments", where), ws);
  if (S.empty()) throw InputError(ws, "an execution needs at least one segment");
  for (std::size_t i = 0; i < S.size(); ++i) {
    std::string w = at(ws, i);
    rho.segments.push_back({str(field(S[i], "state", w), at(w, "state")),
                            interval(field(S[i], "interval", w), at(w, "interval"))});
  }
  std::string wt = at(where, "transitions");
  const auto& T = arr(field(j, "transitions", where), wt);
  for (std::size_t i = 0; i < T.size(); ++i) rho.transitions.push_back(integer(T[i], at(wt, i)));
  if (rho.transitions.size() + 1 != rho.segments.size())
    throw InputError(wt, "expected one transition per adjacent segment pair");
  std::vector<Interval> items;
  for (const auto& s : rho.segments) items.push_back(s.interval);
  if (auto err = checkIntervalSequence(items); !err.empty()) throw InputError(ws, err);
  return rho;
}

Json toJson(const Execution& rho) {
  Json segs = Json::array();
  for (const auto& s : rho.segments) segs.push_back({{"state", s.state}, {"interval", s.interval.str()}});
  return {{"segments", segs}, {"transitions", jsonSet(rho.transitions)}};
}

PointExecution pointExecutionFromJson(const Json& j, const std::string& where) {
  PointExecution eta;
  std::string ws = at(where, "steps");
  const auto& S = arr(field(j, "steps", where), ws);
  for (std::size_t i = 0; i < S.size(); ++i) {
    std::string w = at(ws, i);
    eta.steps.push_back({integer(field(S[i], "edge", w), at(w, "edge")), rat(field(S[i], "time", w), at(w, "time"))});
  }
  return eta;
}

Json toJson(const PointExecution& eta) {
  Json steps = Json::array();
  for (const auto& s : eta.steps) steps.push_back({{"edge", s.edge}, {"time", s.time.str()}});
  return {{"steps", steps}};
}

Environment environmentFromJson(const Json& j) {
  TimeBound N = j.contains("horizon") ? bound(j["horizon"], "/horizon") : TimeBound::infinity();
  std::string mode = j.contains("mode") ? str(j["mode"], "/mode") : "interval";
  const auto& P = field(j, "paths", "");
  if (!P.is_object()) throw InputError("/paths", "expected an object");
  if (mode == "interval") {
    PathEnvironment Pi;
    Pi.horizon = N;
    for (const auto& [name, run] : P.items()) Pi.paths[name] = executionFromJson(run, at("/paths", name));
    return Pi;
  }
  if (mode == "point") {
    PointEnvironment G;
    G.horizon = N;
    for (const auto& [name, run] : P.items()) G.paths[name] = pointExecutionFromJson(run, at("/paths", name));
    return G;
  }
  throw InputError("/mode", "expected \"interval\" or \"point\"");
}

Json toJson(const PathEnvironment& Pi) {
  Json paths = Json::object();
  for (const auto& [name, run] : Pi.paths) paths[name] = toJson(run);
  return {{"horizon", Pi.horizon.str()}, {"mode", "interval"}, {"paths", paths}};
}

Json toJson(const PointEnvironment& Gamma) {
  Json paths = Json::object();
  for (const auto& [name, run] : Gamma.paths) paths[name] = toJson(run);
  return {{"horizon", Gamma.horizon.str()}, {"mode", "point"}, {"paths", paths}};
}

Flow flowFromJson(const Json& j) {
  TimeBound N = bound(field(j, "horizon", ""), "/horizon");
  std::vector<FlowSegment> segs;
  const auto& S = arr(field(j, "segments", ""), "/segments");
  for (std::size_t i = 0; i < S.size(); ++i) {
    std::string w = at("/segments", i);
    segs.push_back({interval(field(S[i], "interval", w), at(w, "interval")),
                    stringSet(field(S[i], "predicates", w), at(w, "predicates"))});
  }
  return checked("/segments", [&] { return Flow(N, segs); });
}

Json toJson(const Flow& f) {
  Json segs = Json::array();
  for (const auto& s : f.segments()) segs.push_back({{"interval", s.interval.str()}, {"predicates", jsonSet(s.preds)}});
  return {{"horizon", f.horizon().str()}, {"segments", segs}};
}

Json toJson(const GridBudget& b) {
  return {{"granularity", b.granularity},
          {"maxTransitions", b.maxTransitions},
          {"horizon", b.horizon.str()},
          {"jobs", b.jobs}};
}

Json toJson(const Verdict& v, bool timing) {
  Json j;
  j["verdict"] = verdictName(v.kind);
  if (!v.witness.empty() || !v.pointWitness.empty()) {
    Json w = Json::array();
    for (const auto& [var, run] : v.witness) w.push_back({{"var", var}, {"run", toJson(run)}});
    for (const auto& [var, run] : v.pointWitness) w.push_back({{"var", var}, {"run", toJson(run)}});
    j["witness"] = w;
    j["witnessConfirmed"] = v.witnessConfirmed;
  }
  j["budget"] = toJson(v.budget);
  j["stats"] = {{"route", v.route},
                {"runsEnumerated", v.runsEnumerated},
                {"quantifierBranches", v.quantifierBranches}};
  if (timing) j["stats"]["wallSeconds"] = v.wallSeconds;
  if (!v.warnings.empty()) j["warnings"] = jsonSet(v.warnings);
  return j;
}

}  // namespace hyperclock
