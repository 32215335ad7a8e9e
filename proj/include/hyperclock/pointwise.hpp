// Point-based timed automata, the chi map to interval executions, and T_int(B).
#pragma once

#include <set>
#include <string>
#include <vector>

#include "hyperclock/automaton.hpp"

namespace hyperclock {

inline const std::string kSingClock = "x_sing";
inline const std::string kMark = "#";

struct PointEdge {
  std::string from;
  std::string to;
  std::set<std::string> event;  // σ ⊆ P
  std::vector<ConstraintPtr> guards;
  std::set<std::string> resets;
};

struct PointTimedAutomaton {
  std::vector<std::string> propositions;
  std::vector<std::string> states;
  std::string start;
  std::vector<std::string> clocks;
  std::vector<PointEdge> edges;
  std::set<std::string> final;

  bool hasState(const std::string& s) const;
  void check() const;
  std::vector<Rational> constants() const;
  PointTimedAutomaton scaled(std::int64_t factor) const;
};

struct PointStep {
  int edge;
  Rational time;
  bool operator==(const PointStep& o) const { return edge == o.edge && time == o.time; }
  bool operator<(const PointStep& o) const { return time != o.time ? time < o.time : edge < o.edge; }
};

struct PointExecution {
  std::vector<PointStep> steps;

  bool operator==(const PointExecution& o) const { return steps == o.steps; }
  bool operator!=(const PointExecution& o) const { return !(*this == o); }
  bool operator<(const PointExecution& o) const;

  Rational duration() const { return steps.empty() ? Rational(0) : steps.back().time; }
  // Index of the step at time t, or -1 when t is not an event time.
  int stepAt(const Rational& t) const;
  std::string str() const;
};

struct PointViolation {
  int step;  // 1-based step index, 0 for whole-execution problems
  std::string message;
};

std::vector<PointViolation> validatePointExecution(const PointTimedAutomaton& B, const PointExecution& eta);
std::string lastState(const PointTimedAutomaton& B, const PointExecution& eta);
bool isAccepting(const PointTimedAutomaton& B, const PointExecution& eta);
bool isValidAccepting(const PointTimedAutomaton& B, const PointExecution& eta);
// Does eta agree with anchor on every step at or before t (and take no other step there)? eta must also last
// until t, so a run that stopped earlier is not a branch.
bool extendsFrom(const PointExecution& eta, const PointExecution& anchor, const Rational& t);

// Names of the T_int(B) states standing for an edge of B.
std::string edgeStateName(int edge);

TimedAutomaton buildIntervalAutomaton(const PointTimedAutomaton& B);
Execution chi(const PointTimedAutomaton& B, const PointExecution& eta);
PointExecution chiInverse(const PointTimedAutomaton& B, const Execution& rho);

}  // namespace hyperclock
