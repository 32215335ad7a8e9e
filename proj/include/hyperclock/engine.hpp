// Grid-bounded verification of sentences over timed automata, and the MSO cross-check harness.
#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "hyperclock/automaton.hpp"
#include "hyperclock/formula.hpp"
#include "hyperclock/mso.hpp"
#include "hyperclock/pointwise.hpp"
#include "hyperclock/semantics.hpp"

namespace hyperclock {

struct GridBudget {
  int granularity = 1;     // endpoints on multiples of 1/k
  int maxTransitions = 2;  // events for point automata
  Rational horizon = 2;
  int jobs = 1;
};

void checkBudget(const GridBudget& b);

// Witness minimization order: transition count, then endpoint times, then boundary flags.
bool witnessOrder(const Execution& a, const Execution& b);
bool witnessOrder(const PointExecution& a, const PointExecution& b);

struct RunAnchor {
  Execution run;
  Rational time;
};

// Accepting runs bounded by the horizon with grid endpoints, sorted by witnessOrder.
std::vector<Execution> enumerateRuns(const TimedAutomaton& A, const GridBudget& b,
                                     const std::optional<RunAnchor>& anchor = std::nullopt);

// Accepting point executions with 1..d events at grid times in [0, N), sorted by witnessOrder.
std::vector<PointExecution> enumeratePointRuns(const PointTimedAutomaton& B, const GridBudget& b);

enum class VerdictKind { Holds, Fails, HoldsOnGrid, FailsWithWitness, FailsOnGrid };
std::string verdictName(VerdictKind k);

struct Verdict {
  VerdictKind kind = VerdictKind::FailsOnGrid;
  // Choices for the outermost universal quantifiers, in binding order.
  std::vector<std::pair<std::string, Execution>> witness;
  std::vector<std::pair<std::string, PointExecution>> pointWitness;
  bool witnessConfirmed = false;
  GridBudget budget;
  std::string route;
  long long runsEnumerated = 0;
  long long quantifierBranches = 0;
  double wallSeconds = 0;
  std::vector<std::string> warnings;

  bool holds() const { return kind == VerdictKind::Holds || kind == VerdictKind::HoldsOnGrid; }
};

class ConsistencyError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Throws std::invalid_argument for non-sentences.
Verdict verify(const TimedAutomaton& A, const FormulaPtr& phi, const GridBudget& b);

// Verdict for a quantifier-free formula over a supplied environment.
Verdict checkEnvironment(const TimedAutomaton& A, const PathEnvironment& Pi, const Rational& t, const Anchor& dag,
                         const FormulaPtr& phi);

enum class Route { Direct, Reduce };

// The reduce route runs verify on T_int(B) and pointToInterval(phi) with 2d transitions.
Verdict verifyPoint(const PointTimedAutomaton& B, const FormulaPtr& phi, const GridBudget& b, Route route);
// Both routes; throws ConsistencyError when they disagree.
Verdict verifyPointChecked(const PointTimedAutomaton& B, const FormulaPtr& phi, const GridBudget& b);

struct CrossCheckSample {
  PathEnvironment env;
  Rational time;
  Anchor anchor;
  bool semantic = false;
  bool mso = false;
};

struct CrossCheckReport {
  int samples = 0;
  int agreements = 0;
  std::vector<CrossCheckSample> disagreements;
};

// Requires integer constants in A and phi. Quantifiers range over grid runs of runBudget on the semantic side
// and over encodings of grid runs of soBudget on the MSO side.
CrossCheckReport crossCheckMso(const TimedAutomaton& A, const FormulaPtr& phi, const GridBudget& runBudget,
                               const GridBudget& soBudget, int samples, std::uint64_t seed);

}  // namespace hyperclock
