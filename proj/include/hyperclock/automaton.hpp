// Interval-based timed automata, executions and the execution/flow encoding.
#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "hyperclock/timecore.hpp"

namespace hyperclock {

struct Edge {
  std::string from;
  std::string to;
  std::vector<ConstraintPtr> guards;
  std::set<std::string> resets;
};

struct TimedAutomaton {
  std::vector<std::string> propositions;
  std::vector<std::string> states;
  std::set<std::string> initial;
  std::map<std::string, std::set<std::string>> labels;
  std::vector<std::string> clocks;
  // Missing entries mean the always-true constraint.
  std::map<std::pair<std::string, std::string>, ConstraintPtr> stateConstraints;
  std::vector<Edge> edges;
  std::set<std::string> final;

  bool hasState(const std::string& v) const;
  bool hasClock(const std::string& x) const;
  ConstraintPtr beta(const std::string& v, const std::string& x) const;
  const std::set<std::string>& label(const std::string& v) const;

  // Throws std::invalid_argument describing the first structural problem.
  void check() const;
  // Every constant appearing in state constraints and guards.
  std::vector<Rational> constants() const;
  TimedAutomaton scaled(std::int64_t factor) const;
};

struct Segment {
  std::string state;
  Interval interval;
  bool operator==(const Segment& o) const { return state == o.state && interval == o.interval; }
};

struct Execution {
  std::vector<Segment> segments;
  std::vector<int> transitions;  // edge indices, one per adjacent segment pair

  bool operator==(const Execution& o) const {
    return segments == o.segments && transitions == o.transitions;
  }
  bool operator!=(const Execution& o) const { return !(*this == o); }
  bool operator<(const Execution& o) const;

  bool contains(const Rational& t) const;
  // Index of the segment containing t, or -1.
  int segmentAt(const Rational& t) const;
  // Right end of the support, i.e. sup |rho|.
  const TimeBound& end() const { return segments.back().interval.R(); }
  bool boundedBy(const Rational& N) const;
  std::string str() const;
};

struct Violation {
  enum class Kind { Shape, Initial, Consecution, EdgeMembership, StateConstraint, Guard };
  Kind kind;
  int index;                    // segment or transition index
  std::optional<Rational> time;  // witness time when meaningful
  std::string constraint;
  std::string message;
};

std::string kindName(Violation::Kind k);

std::vector<Violation> validateExecution(const TimedAutomaton& A, const Execution& rho);
bool isAccepting(const TimedAutomaton& A, const Execution& rho);
bool isValidAccepting(const TimedAutomaton& A, const Execution& rho);

// μ_i for every segment i (valuation on entering the segment).
std::vector<ClockValuation> entryValuations(const TimedAutomaton& A, const Execution& rho);
ClockValuation clockValuationAt(const TimedAutomaton& A, const Execution& rho, const Rational& t);
Execution prefix(const Execution& rho, const Rational& t);

struct MonadicPredicate {
  enum class Kind { State, TransMinus, TransPlus, ResetMinus, ResetPlus, EventMark };
  Kind kind;
  std::string name;  // state or clock id
  int edge = -1;

  std::string str() const;
  static MonadicPredicate parse(const std::string& s);
  static MonadicPredicate state(const std::string& v) { return {Kind::State, v, -1}; }
  static MonadicPredicate tminus(int e) { return {Kind::TransMinus, "", e}; }
  static MonadicPredicate tplus(int e) { return {Kind::TransPlus, "", e}; }
  static MonadicPredicate rminus(const std::string& x) { return {Kind::ResetMinus, x, -1}; }
  static MonadicPredicate rplus(const std::string& x) { return {Kind::ResetPlus, x, -1}; }
};

// The predicate alphabet MP = V ∪ T ∪ R of an automaton, as names.
std::vector<std::string> predicateAlphabet(const TimedAutomaton& A);

using PredSet = std::set<std::string>;

struct FlowSegment {
  Interval interval;
  PredSet preds;
  bool operator==(const FlowSegment& o) const { return interval == o.interval && preds == o.preds; }
};

// Finitely variable map from [0,horizon) to predicate sets; gaps carry the empty set.
class Flow {
 public:
  Flow() = default;
  // Segments are sorted, checked for overlap and merged into canonical form.
  Flow(TimeBound horizon, std::vector<FlowSegment> segments);

  const TimeBound& horizon() const { return horizon_; }
  const std::vector<FlowSegment>& segments() const { return segs_; }
  PredSet at(const Rational& t) const;
  // Every finite interval endpoint, sorted and unique.
  std::vector<Rational> breakpoints() const;
  std::set<std::string> predicates() const;

  bool operator==(const Flow& o) const { return horizon_ == o.horizon_ && segs_ == o.segs_; }
  bool operator!=(const Flow& o) const { return !(*this == o); }
  bool operator<(const Flow& o) const;

  // Union of two flows over the same horizon.
  static Flow merge(const Flow& a, const Flow& b);
  // Renames every predicate p to p + suffix.
  Flow suffixed(const std::string& suffix) const;
  std::string str() const;

 private:
  TimeBound horizon_ = TimeBound::infinity();
  std::vector<FlowSegment> segs_;
};

class EncodingError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

Flow encodeFlow(const TimedAutomaton& A, const Execution& rho, TimeBound horizon = TimeBound::infinity(),
                bool requireAccepting = true);

struct DecodeError {
  int property;  // decode condition number 1..11 (0 for re-encoding mismatch)
  std::optional<Rational> time;
  std::string message;
  std::string str() const;
};

struct DecodeResult {
  std::optional<Execution> execution;
  std::optional<DecodeError> error;
  bool ok() const { return execution.has_value(); }
};

DecodeResult decodeFlow(const TimedAutomaton& A, const Flow& f);

}  // namespace hyperclock
