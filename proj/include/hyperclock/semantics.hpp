// Satisfaction of HCMTL* formulas over concrete path environments (interval, bounded and point-based).
#pragma once

#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "hyperclock/automaton.hpp"
#include "hyperclock/formula.hpp"
#include "hyperclock/pointwise.hpp"

namespace hyperclock {

struct PathEnvironment {
  std::map<std::string, Execution> paths;
  TimeBound horizon = TimeBound::infinity();  // finite horizon selects the bounded semantics
};

struct PointEnvironment {
  std::map<std::string, PointExecution> paths;
  TimeBound horizon = TimeBound::infinity();
};

// nullopt stands for the empty anchor ε.
using Anchor = std::optional<std::string>;

// Supplies the runs a quantifier ranges over.
class ExecutionProvider {
 public:
  virtual ~ExecutionProvider() = default;
  // Accepting runs agreeing with anchor up to t, or every run when anchor is null.
  virtual std::vector<const Execution*> candidates(const Execution* anchor, const Rational& t) const = 0;
  // Times at which the yielded runs change segment; used to build critical points.
  virtual std::vector<Rational> breakpoints() const = 0;
};

// Largest time up to which two runs have equal prefixes.
struct AgreementBound {
  bool never = false;
  TimeBound value;
  bool closed = false;
  bool admits(const Rational& t) const;
};
AgreementBound agreementBound(const Execution& a, const Execution& b);

class RunListProvider : public ExecutionProvider {
 public:
  explicit RunListProvider(std::vector<Execution> runs);
  std::vector<const Execution*> candidates(const Execution* anchor, const Rational& t) const override;
  std::vector<Rational> breakpoints() const override { return breakpoints_; }
  const std::vector<Execution>& runs() const { return runs_; }

 private:
  std::vector<Execution> runs_;
  std::vector<Rational> breakpoints_;
  mutable std::mutex mu_;
  mutable std::map<Execution, std::vector<AgreementBound>> cache_;
};

class PointExecutionProvider {
 public:
  virtual ~PointExecutionProvider() = default;
  // Accepting executions extending anchor from t, or all of them when anchor is null.
  virtual std::vector<const PointExecution*> candidates(const PointExecution* anchor, const Rational& t) const = 0;
};

class PointRunListProvider : public PointExecutionProvider {
 public:
  explicit PointRunListProvider(std::vector<PointExecution> runs) : runs_(std::move(runs)) {}
  std::vector<const PointExecution*> candidates(const PointExecution* anchor, const Rational& t) const override;
  const std::vector<PointExecution>& runs() const { return runs_; }

 private:
  std::vector<PointExecution> runs_;
};

struct EvalStats {
  long long quantifierBranches = 0;
  std::vector<std::string> warnings;
};

class EvalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Sorted critical points of phi over Pi inside window, plus one midpoint per gap between them.
std::vector<Rational> criticalPoints(const PathEnvironment& Pi, const FormulaPtr& phi, const Interval& window,
                                     const std::vector<Rational>& extra = {});

bool satInterval(const TimedAutomaton& A, const PathEnvironment& Pi, const Rational& t, const Anchor& dag,
                 const FormulaPtr& phi, const ExecutionProvider* provider = nullptr, EvalStats* stats = nullptr);

// Truth of phi on each cell of its critical-point partition of [0, N): points and the open gaps between them.
struct TruthCell {
  Interval cell;
  bool value;
};
std::vector<TruthCell> truthProfile(const TimedAutomaton& A, const PathEnvironment& Pi, const Anchor& dag,
                                    const FormulaPtr& phi, const ExecutionProvider* provider = nullptr,
                                    const std::vector<Rational>& extra = {});

bool satPoint(const PointTimedAutomaton& B, const PointEnvironment& Gamma, const Rational& t, const Anchor& dag,
              const FormulaPtr& phi, const PointExecutionProvider* provider = nullptr, EvalStats* stats = nullptr);

// The chi image of a point environment.
PathEnvironment chiEnvironment(const PointTimedAutomaton& B, const PointEnvironment& Gamma);

}  // namespace hyperclock
