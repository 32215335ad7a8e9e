// HCMTL* formulas in negation normal form: syntax tree, parser, printer and transforms.
#pragma once

#include <memory>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "hyperclock/timecore.hpp"

namespace hyperclock {

class Formula;
using FormulaPtr = std::shared_ptr<const Formula>;

class Formula {
 public:
  enum class Kind { Atom, NegAtom, Or, And, Finally, Globally, Until, Exists, Forall };

  static FormulaPtr atom(const std::string& prop, const std::string& var);
  static FormulaPtr negAtom(const std::string& prop, const std::string& var);
  static FormulaPtr disj(FormulaPtr a, FormulaPtr b);
  static FormulaPtr conj(FormulaPtr a, FormulaPtr b);
  static FormulaPtr finally(const Interval& I, FormulaPtr a);
  static FormulaPtr globally(const Interval& I, FormulaPtr a);
  static FormulaPtr until(const Interval& I, FormulaPtr a, FormulaPtr b);
  static FormulaPtr exists(const std::string& var, FormulaPtr body);
  static FormulaPtr forall(const std::string& var, FormulaPtr body);

  Kind kind() const { return kind_; }
  const std::string& prop() const { return prop_; }
  // Path variable of an atom, or the bound variable of a quantifier.
  const std::string& var() const { return var_; }
  const Interval& interval() const { return *interval_; }
  // Left operand, or the only operand of F, G and quantifiers.
  const FormulaPtr& lhs() const { return a_; }
  const FormulaPtr& rhs() const { return b_; }

  bool isAtomic() const { return kind_ == Kind::Atom || kind_ == Kind::NegAtom; }
  bool isTemporal() const { return kind_ == Kind::Finally || kind_ == Kind::Globally || kind_ == Kind::Until; }
  bool isQuantifier() const { return kind_ == Kind::Exists || kind_ == Kind::Forall; }

  // Concrete syntax accepted by parseFormula.
  std::string str() const;

 private:
  Kind kind_ = Kind::Atom;
  std::string prop_, var_;
  std::optional<Interval> interval_;
  FormulaPtr a_, b_;
};

bool equal(const FormulaPtr& a, const FormulaPtr& b);

class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& msg, std::size_t pos, const std::string& text);
  std::size_t position() const { return pos_; }

 private:
  std::size_t pos_;
};

class WellFormednessError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// With requireQuantifiedTemporal, F/G/U outside every quantifier is rejected.
std::vector<std::string> wellFormednessErrors(const FormulaPtr& phi, bool requireQuantifiedTemporal = true);
void checkWellFormed(const FormulaPtr& phi, bool requireQuantifiedTemporal = true);

// Parses and checks well-formedness; "->" and "<->" are eliminated through negate.
FormulaPtr parseFormula(const std::string& text, bool requireQuantifiedTemporal = true);

FormulaPtr negate(const FormulaPtr& phi);

// Free path variables in order of first occurrence.
std::vector<std::string> freeVars(const FormulaPtr& phi);
std::set<std::string> propositions(const FormulaPtr& phi);
int temporalDepth(const FormulaPtr& phi);
int quantifierCount(const FormulaPtr& phi);
bool isSentence(const FormulaPtr& phi);
// Every interval endpoint (finite ones) used by temporal operators.
std::vector<Rational> formulaConstants(const FormulaPtr& phi);
FormulaPtr scaleFormula(const FormulaPtr& phi, std::int64_t factor);

// The point-to-interval transform; scopeVars are the path variables in scope at the root.
FormulaPtr pointToInterval(const FormulaPtr& phi, const std::vector<std::string>& scopeVars);

}  // namespace hyperclock
