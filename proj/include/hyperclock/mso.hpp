// MSO(<,+1) over flows on [0,N): syntax, evaluation, the automaton formula, and the HCMTL* translation.
#pragma once

#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "hyperclock/automaton.hpp"
#include "hyperclock/formula.hpp"
#include "hyperclock/semantics.hpp"

namespace hyperclock {

class MsoFormula;
using MsoPtr = std::shared_ptr<const MsoFormula>;

// Core syntax only; the derived forms in namespace mso expand into it.
class MsoFormula {
 public:
  enum class Kind { Less, PlusOne, Pred, Or, Not, ExistsFO, ExistsSO };

  static MsoPtr less(const std::string& x, const std::string& y);
  static MsoPtr plusOne(const std::string& x, const std::string& y);
  static MsoPtr pred(const std::string& P, const std::string& x);
  // The empty disjunction is false.
  static MsoPtr disj(std::vector<MsoPtr> kids);
  static MsoPtr neg(MsoPtr a);
  static MsoPtr existsFO(const std::string& x, MsoPtr body);
  static MsoPtr existsSO(const std::string& P, MsoPtr body);

  Kind kind() const { return kind_; }
  // Less/PlusOne: x, y. Pred: the variable. Quantifiers: the bound name.
  const std::string& x() const { return x_; }
  const std::string& y() const { return y_; }
  // Predicate name of Pred.
  const std::string& name() const { return y_; }
  const std::vector<MsoPtr>& kids() const { return kids_; }
  const MsoPtr& body() const { return kids_[0]; }

 private:
  Kind kind_ = Kind::Less;
  std::string x_, y_;
  std::vector<MsoPtr> kids_;
};

namespace mso {

MsoPtr truth();
MsoPtr falsity();
MsoPtr disj(MsoPtr a, MsoPtr b);
MsoPtr conj(std::vector<MsoPtr> kids);
MsoPtr conj(MsoPtr a, MsoPtr b);
MsoPtr implies(MsoPtr a, MsoPtr b);
MsoPtr iff(MsoPtr a, MsoPtr b);
MsoPtr forallFO(const std::string& x, MsoPtr body);
MsoPtr existsSO(const std::vector<std::string>& preds, MsoPtr body);
MsoPtr forallSO(const std::vector<std::string>& preds, MsoPtr body);
MsoPtr le(const std::string& x, const std::string& y);
MsoPtr eq(const std::string& x, const std::string& y);
// 0(x): x is the origin.
MsoPtr zero(const std::string& x, const std::string& fresh);

}  // namespace mso

class MsoScopeError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

using Interpretation = std::map<std::string, Rational>;

// Supplies witness flows for a block of second-order predicates quantified together; nullopt falls back to
// grid enumeration.
using BlockOracle = std::function<std::optional<std::vector<Flow>>(const std::vector<std::string>& preds)>;

struct SoBudget {
  int granularity = 2;  // witness breakpoints on the grid 1/k
  int maxSegments = 2;  // at most this many maximal intervals where a witness predicate holds
  BlockOracle blocks;
};

struct MsoStats {
  long long soWitnesses = 0;
};

// f over [0,N) with N finite. extraCandidates are added to every first-order candidate set.
bool evalMso(const Flow& f, const Interpretation& I, const MsoPtr& phi, const Rational& N, const SoBudget& budget = {},
             const std::vector<Rational>& extraCandidates = {}, MsoStats* stats = nullptr);

std::set<std::string> freePredicates(const MsoPtr& phi);
std::set<std::string> freeFOVars(const MsoPtr& phi);
std::size_t msoSize(const MsoPtr& phi);
MsoPtr renamePredicates(const MsoPtr& phi, const std::function<std::string(const std::string&)>& rename);

std::string indexedName(const std::string& base, int pathIndex);

// φ_A over the predicates of predicateAlphabet(A). Requires integer constants.
MsoPtr emitAutomatonFormula(const TimedAutomaton& A);

// f_Π with the predicates of order[i] indexed by i + 1.
Flow envToFlow(const TimedAutomaton& A, const PathEnvironment& Pi, const std::vector<std::string>& order);

// ⟨φ⟩_0 .. ⟨φ⟩_m, each with the free first-order variable "x"; order lists π_1..π_m.
std::vector<MsoPtr> translateHcmtl(const FormulaPtr& phi, const TimedAutomaton& A,
                                   const std::vector<std::string>& order);

std::string serializeMso(const MsoPtr& phi);
MsoPtr parseMso(const std::string& text);

struct MsoManifest {
  std::int64_t scale = 1;
  std::optional<Rational> horizon;
  std::map<std::string, std::string> notes;
};

// Serialized formula preceded by "; key value" manifest lines.
std::string serializeMsoDocument(const MsoPtr& phi, const MsoManifest& manifest);
std::pair<MsoPtr, MsoManifest> parseMsoDocument(const std::string& text);

}  // namespace hyperclock
