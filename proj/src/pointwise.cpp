#include "hyperclock/pointwise.hpp"

#include <algorithm>

namespace hyperclock {

bool PointTimedAutomaton::hasState(const std::string& s) const {
  return std::find(states.begin(), states.end(), s) != states.end();
}

void PointTimedAutomaton::check() const {
  auto fail = [](const std::string& m) { throw std::invalid_argument(m); };
  if (!hasState(start)) fail("start state '" + start + "' is not declared");
  for (const auto& s : final)
    if (!hasState(s)) fail("final state '" + s + "' is not declared");
  std::set<std::string> props(propositions.begin(), propositions.end());
  if (props.count(kMark)) fail("'#' is reserved");
  std::set<std::string> seen;
  for (const auto& s : states) {
    if (!seen.insert(s).second) fail("duplicate state '" + s + "'");
    if (props.count(s)) fail("state '" + s + "' clashes with a proposition name");
    if (s.rfind("edge", 0) == 0) fail("state names starting with 'edge' are reserved");
  }
  for (const auto& x : clocks)
    if (x == kSingClock) fail("clock name '" + kSingClock + "' is reserved");
  for (std::size_t i = 0; i < edges.size(); ++i) {
    const PointEdge& e = edges[i];
    std::string id = "edge " + std::to_string(i);
    if (!hasState(e.from) || !hasState(e.to)) fail(id + " references an undeclared state");
    for (const auto& p : e.event)
      if (!props.count(p)) fail(id + " carries undeclared proposition '" + p + "'");
    for (const auto& x : e.resets)
      if (std::find(clocks.begin(), clocks.end(), x) == clocks.end()) fail(id + " resets undeclared clock '" + x + "'");
    for (const auto& g : e.guards) {
      auto cs = g->clocks();
      if (cs.size() > 1) fail(id + " has a guard over several clocks: " + g->str());
      for (const auto& x : cs)
        if (std::find(clocks.begin(), clocks.end(), x) == clocks.end())
          fail(id + " guards undeclared clock '" + x + "'");
    }
  }
}

std::vector<Rational> PointTimedAutomaton::constants() const {
  std::vector<Rational> out;
  for (const auto& e : edges)
    for (const auto& g : e.guards) g->collectConstants(out);
  return out;
}

PointTimedAutomaton PointTimedAutomaton::scaled(std::int64_t factor) const {
  PointTimedAutomaton B = *this;
  for (auto& e : B.edges)
    for (auto& g : e.guards) g = scaleConstraint(g, factor);
  return B;
}

bool PointExecution::operator<(const PointExecution& o) const {
  if (steps.size() != o.steps.size()) return steps.size() < o.steps.size();
  return steps < o.steps;
}

int PointExecution::stepAt(const Rational& t) const {
  for (std::size_t i = 0; i < steps.size(); ++i)
    if (steps[i].time == t) return int(i);
  return -1;
}

std::string PointExecution::str() const {
  std::string s = "<";
  for (std::size_t i = 0; i < steps.size(); ++i) {
    if (i) s += ", ";
    s += "e" + std::to_string(steps[i].edge) + "@" + steps[i].time.str();
  }
  return s + ">";
}

std::vector<PointViolation> validatePointExecution(const PointTimedAutomaton& B, const PointExecution& eta) {
  std::vector<PointViolation> out;
  std::string cur = B.start;
  ClockValuation mu;
  for (const auto& x : B.clocks) mu[x] = 0;
  Rational prev = 0;
  for (std::size_t i = 0; i < eta.steps.size(); ++i) {
    int idx = int(i) + 1;
    const PointStep& st = eta.steps[i];
    if (st.edge < 0 || st.edge >= int(B.edges.size())) {
      out.push_back({idx, "unknown edge " + std::to_string(st.edge)});
      return out;
    }
    if (st.time < Rational(0)) out.push_back({idx, "negative time " + st.time.str()});
    if (i > 0 && st.time <= prev)
      out.push_back({idx, "event times must be strictly increasing (" + prev.str() + " then " + st.time.str() + ")"});
    const PointEdge& e = B.edges[st.edge];
    if (e.from != cur) out.push_back({idx, "edge " + std::to_string(st.edge) + " does not leave '" + cur + "'"});
    Rational d = st.time - prev;
    for (const auto& g : e.guards)
      for (const auto& x : g->clocks())
        if (!evalConstraintAt(*g, mu.at(x) + d))
          out.push_back({idx, "guard " + g->str() + " fails with " + x + " = " + (mu.at(x) + d).str()});
    for (auto& [x, v] : mu) v = e.resets.count(x) ? Rational(0) : v + d;
    prev = st.time;
    cur = e.to;
  }
  return out;
}

std::string lastState(const PointTimedAutomaton& B, const PointExecution& eta) {
  return eta.steps.empty() ? B.start : B.edges.at(eta.steps.back().edge).to;
}

bool isAccepting(const PointTimedAutomaton& B, const PointExecution& eta) {
  return !eta.steps.empty() && B.final.count(lastState(B, eta)) > 0;
}

bool isValidAccepting(const PointTimedAutomaton& B, const PointExecution& eta) {
  return isAccepting(B, eta) && validatePointExecution(B, eta).empty();
}

bool extendsFrom(const PointExecution& eta, const PointExecution& anchor, const Rational& t) {
  if (eta.duration() < t) return false;
  std::size_t i = 0;
  for (; i < anchor.steps.size() && anchor.steps[i].time <= t; ++i)
    if (i >= eta.steps.size() || !(eta.steps[i] == anchor.steps[i])) return false;
  return i >= eta.steps.size() || t < eta.steps[i].time;
}

std::string edgeStateName(int edge) { return "edge" + std::to_string(edge); }

TimedAutomaton buildIntervalAutomaton(const PointTimedAutomaton& B) {
  B.check();
  TimedAutomaton A;
  for (const auto& s : B.states) A.propositions.push_back(s);
  for (const auto& p : B.propositions) A.propositions.push_back(p);
  A.propositions.push_back(kMark);
  A.states = B.states;
  A.clocks = B.clocks;
  A.clocks.push_back(kSingClock);
  A.initial.insert(B.start);
  for (const auto& s : B.states) A.labels[s] = {s};
  for (std::size_t i = 0; i < B.edges.size(); ++i) {
    const PointEdge& e = B.edges[i];
    std::string v = edgeStateName(int(i));
    A.states.push_back(v);
    std::set<std::string> lab = e.event;
    lab.insert(kMark);
    A.labels[v] = lab;
    if (e.from == B.start) A.initial.insert(v);
    if (B.final.count(e.to)) A.final.insert(v);
    std::map<std::string, ConstraintPtr> perClock;
    for (const auto& g : e.guards)
      for (const auto& x : g->clocks()) {
        auto& slot = perClock[x];
        slot = slot ? ClockConstraint::conj(slot, g) : g;
      }
    for (const auto& [x, c] : perClock) A.stateConstraints[{v, x}] = c;
    A.stateConstraints[{v, kSingClock}] = ClockConstraint::atom(kSingClock, Rel::Eq, 0);
    // Edge 2i enters the edge-state, edge 2i+1 leaves it.
    A.edges.push_back({e.from, v, {}, {kSingClock}});
    A.edges.push_back({v, e.to, {}, e.resets});
  }
  return A;
}

Execution chi(const PointTimedAutomaton& B, const PointExecution& eta) {
  auto vs = validatePointExecution(B, eta);
  if (!vs.empty()) throw std::invalid_argument("chi: invalid point execution: " + vs[0].message);
  if (eta.steps.empty()) throw std::invalid_argument("chi: execution has no events");
  Execution rho;
  std::string cur = B.start;
  Rational prev = 0;
  for (std::size_t i = 0; i < eta.steps.size(); ++i) {
    const PointStep& st = eta.steps[i];
    if (i > 0) {
      rho.transitions.push_back(2 * eta.steps[i - 1].edge + 1);
      rho.segments.push_back({cur, Interval(prev, st.time, false, false)});
      rho.transitions.push_back(2 * st.edge);
    } else if (Rational(0) < st.time) {
      rho.segments.push_back({cur, Interval(0, st.time, true, false)});
      rho.transitions.push_back(2 * st.edge);
    }
    rho.segments.push_back({edgeStateName(st.edge), Interval::point(st.time)});
    cur = B.edges[st.edge].to;
    prev = st.time;
  }
  return rho;
}

PointExecution chiInverse(const PointTimedAutomaton& B, const Execution& rho) {
  auto fail = [](const std::string& m) -> PointExecution { throw std::invalid_argument("chiInverse: " + m); };
  PointExecution eta;
  if (rho.segments.empty()) return fail("empty execution");
  if (rho.transitions.size() + 1 != rho.segments.size()) return fail("transition count mismatch");
  std::size_t i = 0;
  std::string cur = B.start;
  bool first = true;
  while (i < rho.segments.size()) {
    const Segment& s = rho.segments[i];
    bool isState = B.hasState(s.state);
    if (isState) {
      if (s.state != cur) return fail("segment " + std::to_string(i) + " is in '" + s.state + "', expected '" + cur + "'");
      if (i + 1 >= rho.segments.size()) return fail("execution ends in a state segment");
      const Interval& I = s.interval;
      bool shapeOk = first ? (I.L() == Rational(0) && I.leftClosed() && !I.rightClosed())
                           : (!I.leftClosed() && !I.rightClosed());
      if (!shapeOk || I.singular()) return fail("state segment " + std::to_string(i) + " has shape " + I.str());
      ++i;
    } else if (!first || cur != B.start) {
      return fail("two edge segments in a row at " + std::to_string(i));
    }
    const Segment& es = rho.segments[i];
    if (es.state.rfind("edge", 0) != 0) return fail("segment " + std::to_string(i) + " is not an edge state");
    int e = -1;
    try {
      e = std::stoi(es.state.substr(4));
    } catch (const std::exception&) {
      return fail("malformed edge state '" + es.state + "'");
    }
    if (e < 0 || e >= int(B.edges.size()) || edgeStateName(e) != es.state)
      return fail("unknown edge state '" + es.state + "'");
    if (!es.interval.singular()) return fail("edge segment " + std::to_string(i) + " is not singular");
    if (first && i == 0 && es.interval.L() != Rational(0)) return fail("execution does not start at 0");
    if (B.edges[e].from != cur) return fail("edge " + std::to_string(e) + " does not leave '" + cur + "'");
    if (i > 0 && rho.transitions[i - 1] != 2 * e) return fail("wrong entering transition at " + std::to_string(i));
    if (i + 1 < rho.segments.size() && rho.transitions[i] != 2 * e + 1)
      return fail("wrong leaving transition at " + std::to_string(i));
    eta.steps.push_back({e, es.interval.L()});
    cur = B.edges[e].to;
    first = false;
    ++i;
    if (i < rho.segments.size() && !B.hasState(rho.segments[i].state))
      return fail("edge segment followed by another edge segment");
  }
  auto vs = validatePointExecution(B, eta);
  if (!vs.empty()) return fail(vs[0].message);
  if (chi(B, eta) != rho) return fail("execution is not in the image of chi");
  return eta;
}

}  // namespace hyperclock
