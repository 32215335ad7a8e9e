// Random automata, runs and flows for property tests.
#pragma once

#include <random>
#include <set>
#include <string>
#include <vector>

#include "hyperclock/automaton.hpp"
#include "support.hpp"

namespace hyperclock::testing {

struct AutomatonShape {
  int maxStates = 4;
  int maxClocks = 2;
  int maxConst = 3;
  int maxEdges = 6;
  int numProps = 2;
};

inline ConstraintPtr randomAtom(std::mt19937_64& g, const std::string& x, int maxConst) {
  static const Rel rels[] = {Rel::Lt, Rel::Le, Rel::Eq, Rel::Ge, Rel::Gt};
  return ClockConstraint::atom(x, rels[uniform(g, 0, 4)], uniform(g, 0, maxConst));
}

inline ConstraintPtr randomConstraint(std::mt19937_64& g, const std::string& x, int maxConst, int depth = 1) {
  if (depth == 0 || coin(g, 0.6)) return randomAtom(g, x, maxConst);
  auto a = randomConstraint(g, x, maxConst, depth - 1);
  auto b = randomConstraint(g, x, maxConst, depth - 1);
  return coin(g) ? ClockConstraint::conj(a, b) : ClockConstraint::disj(a, b);
}

inline TimedAutomaton randomAutomaton(std::mt19937_64& g, const AutomatonShape& sh = {}) {
  TimedAutomaton A;
  for (int i = 0; i < sh.numProps; ++i) A.propositions.push_back("p" + std::to_string(i));
  int ns = uniform(g, 1, sh.maxStates);
  for (int i = 0; i < ns; ++i) A.states.push_back("s" + std::to_string(i));
  int nc = uniform(g, 0, sh.maxClocks);
  for (int i = 0; i < nc; ++i) A.clocks.push_back("x" + std::to_string(i));
  A.initial.insert(A.states[0]);
  if (ns > 1 && coin(g, 0.3)) A.initial.insert(A.states[uniform(g, 1, ns - 1)]);
  for (const auto& v : A.states) {
    if (coin(g, 0.5)) A.final.insert(v);
    std::set<std::string> lab;
    for (const auto& p : A.propositions)
      if (coin(g)) lab.insert(p);
    A.labels[v] = lab;
    for (const auto& x : A.clocks)
      if (coin(g, 0.3)) {
        // Upper-bound style invariants keep runs feasible more often.
        static const Rel ups[] = {Rel::Lt, Rel::Le};
        auto c = ClockConstraint::atom(x, ups[uniform(g, 0, 1)], uniform(g, 1, sh.maxConst));
        if (coin(g, 0.3)) c = ClockConstraint::disj(c, randomAtom(g, x, sh.maxConst));
        A.stateConstraints[{v, x}] = c;
      }
  }
  if (A.final.empty()) A.final.insert(A.states[uniform(g, 0, ns - 1)]);
  int ne = uniform(g, 1, sh.maxEdges);
  for (int i = 0; i < ne; ++i) {
    Edge e;
    e.from = A.states[uniform(g, 0, ns - 1)];
    e.to = A.states[uniform(g, 0, ns - 1)];
    for (const auto& x : A.clocks) {
      if (coin(g, 0.35)) e.guards.push_back(randomConstraint(g, x, sh.maxConst));
      if (coin(g, 0.4)) e.resets.insert(x);
    }
    A.edges.push_back(e);
  }
  A.check();
  return A;
}

struct RunShape {
  int granularity = 4;  // grid 1/k
  int horizon = 5;
  int maxTransitions = 4;
};

// One attempt at a random bounded run; returns nullopt when the draw is not a valid accepting run.
inline std::optional<Execution> randomRunAttempt(std::mt19937_64& g, const TimedAutomaton& A, const RunShape& rs) {
  int k = uniform(g, 0, rs.maxTransitions);
  std::vector<std::string> path;
  std::vector<int> edges;
  std::vector<std::string> inits(A.initial.begin(), A.initial.end());
  path.push_back(inits[uniform(g, 0, int(inits.size()) - 1)]);
  for (int i = 0; i < k; ++i) {
    std::vector<int> out;
    for (std::size_t e = 0; e < A.edges.size(); ++e)
      if (A.edges[e].from == path.back()) out.push_back(int(e));
    if (out.empty()) break;
    int e = out[uniform(g, 0, int(out.size()) - 1)];
    edges.push_back(e);
    path.push_back(A.edges[e].to);
  }
  k = int(edges.size());
  int ticks = rs.granularity * rs.horizon;
  std::vector<int> ts;
  for (int i = 0; i < k; ++i) ts.push_back(uniform(g, 0, ticks - 1));
  std::sort(ts.begin(), ts.end());
  int endTick = uniform(g, k ? ts.back() : 0, ticks);
  Execution rho;
  rho.transitions = edges;
  Rational left = 0;
  bool lc = true;
  try {
    for (int i = 0; i <= k; ++i) {
      if (i < k) {
        Rational t(ts[i], rs.granularity);
        bool rc = coin(g);
        // A junction at t may also be singular; the Interval constructor rejects empties.
        rho.segments.push_back({path[i], Interval(left, t, lc, rc)});
        left = t;
        lc = !rc;
      } else {
        Rational t(endTick, rs.granularity);
        bool rc = endTick < ticks && coin(g);
        if (t == left) rc = true;
        rho.segments.push_back({path[i], Interval(left, t, lc, rc)});
      }
    }
  } catch (const std::invalid_argument&) {
    return std::nullopt;
  }
  if (!rho.boundedBy(rs.horizon)) return std::nullopt;
  if (!isValidAccepting(A, rho)) return std::nullopt;
  return rho;
}

inline std::vector<Execution> randomRuns(std::mt19937_64& g, const TimedAutomaton& A, const RunShape& rs, int want,
                                         int attempts) {
  std::set<Execution> seen;
  std::vector<Execution> out;
  for (int a = 0; a < attempts && int(out.size()) < want; ++a)
    if (auto r = randomRunAttempt(g, A, rs))
      if (seen.insert(*r).second) out.push_back(*r);
  return out;
}

// The five-segment example run over clocks x1, x2 with all-true constraints.
inline TimedAutomaton exampleAutomaton() {
  TimedAutomaton A;
  A.propositions = {"p", "q"};
  A.states = {"v1", "v2", "v3", "v4"};
  A.initial = {"v1"};
  A.final = {"v4"};
  A.labels = {{"v1", {"p"}}, {"v2", {"q"}}, {"v3", {"p", "q"}}, {"v4", {}}};
  A.clocks = {"x1", "x2"};
  A.edges = {{"v1", "v2", {}, {"x1"}}, {"v2", "v3", {}, {"x2"}}, {"v3", "v1", {}, {"x2"}}, {"v1", "v4", {}, {"x1"}}};
  return A;
}

inline Execution exampleRun() {
  Execution rho;
  rho.segments = {{"v1", Interval::parse("[0,5)")},
                  {"v2", Interval::parse("[5,10]")},
                  {"v3", Interval::parse("(10,12)")},
                  {"v1", Interval::parse("[12,12]")},
                  {"v4", Interval::parse("(12,15)")}};
  rho.transitions = {0, 1, 2, 3};
  return rho;
}

}  // namespace hyperclock::testing

#include "hyperclock/pointwise.hpp"

namespace hyperclock::testing {

inline PointTimedAutomaton randomPointAutomaton(std::mt19937_64& g, int maxStates = 3, int maxClocks = 1,
                                                int maxConst = 3, int maxEdges = 4) {
  PointTimedAutomaton B;
  B.propositions = {"p", "q"};
  int ns = uniform(g, 1, maxStates);
  for (int i = 0; i < ns; ++i) B.states.push_back("s" + std::to_string(i));
  B.start = "s0";
  int nc = uniform(g, 0, maxClocks);
  for (int i = 0; i < nc; ++i) B.clocks.push_back("y" + std::to_string(i));
  for (const auto& s : B.states)
    if (coin(g, 0.5)) B.final.insert(s);
  if (B.final.empty()) B.final.insert(B.states[uniform(g, 0, ns - 1)]);
  int ne = uniform(g, 1, maxEdges);
  for (int i = 0; i < ne; ++i) {
    PointEdge e;
    e.from = i == 0 ? B.start : B.states[uniform(g, 0, ns - 1)];
    e.to = B.states[uniform(g, 0, ns - 1)];
    for (const auto& p : B.propositions)
      if (coin(g)) e.event.insert(p);
    for (const auto& x : B.clocks) {
      if (coin(g, 0.4)) e.guards.push_back(randomConstraint(g, x, maxConst));
      if (coin(g, 0.4)) e.resets.insert(x);
    }
    B.edges.push_back(e);
  }
  B.check();
  return B;
}

inline std::optional<PointExecution> randomPointRunAttempt(std::mt19937_64& g, const PointTimedAutomaton& B,
                                                           int granularity, int horizon, int maxSteps) {
  int k = uniform(g, 1, maxSteps);
  std::set<int> ticks;
  while (int(ticks.size()) < k) ticks.insert(uniform(g, 0, granularity * horizon - 1));
  PointExecution eta;
  std::string cur = B.start;
  for (int t : ticks) {
    std::vector<int> out;
    for (std::size_t e = 0; e < B.edges.size(); ++e)
      if (B.edges[e].from == cur) out.push_back(int(e));
    if (out.empty()) return std::nullopt;
    int e = out[uniform(g, 0, int(out.size()) - 1)];
    eta.steps.push_back({e, Rational(t, granularity)});
    cur = B.edges[e].to;
  }
  if (!isValidAccepting(B, eta)) return std::nullopt;
  return eta;
}

}  // namespace hyperclock::testing

#include "hyperclock/formula.hpp"

namespace hyperclock::testing {

inline Interval randomInterval(std::mt19937_64& g, int maxConst, int granularity = 1) {
  int hi = maxConst * granularity;
  int l = uniform(g, 0, hi);
  bool inf = coin(g, 0.2);
  int r = uniform(g, l, hi);
  bool lc = coin(g), rc = coin(g);
  if (inf) return Interval(Rational(l, granularity), TimeBound::infinity(), lc, false);
  if (l == r) lc = rc = true;
  return Interval(Rational(l, granularity), Rational(r, granularity), lc, rc);
}

struct FormulaShape {
  std::vector<std::string> props{"p0", "p1"};
  std::vector<std::string> freeVars{"x"};
  int depth = 4;
  int maxTemporal = 3;
  int maxQuantifiers = 0;
  int maxConst = 3;
  int granularity = 1;
  double temporalBias = 0.45;
};

namespace detail {

struct FormulaGen {
  std::mt19937_64& g;
  const FormulaShape& sh;
  int quantifiersLeft;
  int fresh = 0;

  FormulaPtr atomIn(const std::vector<std::string>& scope) {
    const auto& p = sh.props[uniform(g, 0, int(sh.props.size()) - 1)];
    const auto& v = scope[uniform(g, 0, int(scope.size()) - 1)];
    return coin(g) ? Formula::atom(p, v) : Formula::negAtom(p, v);
  }

  FormulaPtr quant(std::vector<std::string>& scope, int depth, int temporalLeft) {
    --quantifiersLeft;
    std::string v = "v" + std::to_string(fresh++);
    scope.push_back(v);
    FormulaPtr body = go(scope, depth - 1, temporalLeft);
    scope.pop_back();
    return coin(g) ? Formula::exists(v, body) : Formula::forall(v, body);
  }

  FormulaPtr go(std::vector<std::string>& scope, int depth, int temporalLeft) {
    if (depth <= 0 || coin(g, 0.2)) return atomIn(scope);
    if (quantifiersLeft > 0 && coin(g, 0.25)) return quant(scope, depth, temporalLeft);
    if (temporalLeft > 0 && coin(g, sh.temporalBias)) {
      Interval I = randomInterval(g, sh.maxConst, sh.granularity);
      int k = uniform(g, 0, 2);
      if (k == 0) return Formula::finally(I, go(scope, depth - 1, temporalLeft - 1));
      if (k == 1) return Formula::globally(I, go(scope, depth - 1, temporalLeft - 1));
      return Formula::until(I, go(scope, depth - 1, temporalLeft - 1), go(scope, depth - 1, temporalLeft - 1));
    }
    auto a = go(scope, depth - 1, temporalLeft);
    auto b = go(scope, depth - 1, temporalLeft);
    return coin(g) ? Formula::conj(a, b) : Formula::disj(a, b);
  }
};

}  // namespace detail

// A formula over sh.freeVars, with at most sh.maxQuantifiers nested binders.
inline FormulaPtr randomFormula(std::mt19937_64& g, const FormulaShape& sh) {
  detail::FormulaGen gen{g, sh, sh.maxQuantifiers};
  std::vector<std::string> scope = sh.freeVars;
  return gen.go(scope, sh.depth, sh.maxTemporal);
}

// A sentence: a leading quantifier followed by a random body (which may quantify again).
inline FormulaPtr randomSentence(std::mt19937_64& g, const FormulaShape& sh) {
  detail::FormulaGen gen{g, sh, std::max(0, sh.maxQuantifiers)};
  std::vector<std::string> scope;
  return gen.quant(scope, sh.depth + 1, sh.maxTemporal);
}

}  // namespace hyperclock::testing
