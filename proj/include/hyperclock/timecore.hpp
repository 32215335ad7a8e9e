// Exact time arithmetic: rationals, intervals, interval sequences and clock constraints.
#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

namespace hyperclock {

class Rational {
 public:
  Rational() = default;
  Rational(std::int64_t n) : num_(n), den_(1) {}  // NOLINT: implicit from integers
  Rational(std::int64_t n, std::int64_t d);

  std::int64_t num() const { return num_; }
  std::int64_t den() const { return den_; }

  bool isInteger() const { return den_ == 1; }
  std::int64_t floor() const;
  Rational frac() const { return *this - Rational(floor()); }

  Rational operator+(const Rational& o) const;
  Rational operator-(const Rational& o) const;
  Rational operator*(const Rational& o) const;
  Rational operator/(const Rational& o) const;
  Rational operator-() const { return Rational(-num_, den_); }
  Rational& operator+=(const Rational& o) { return *this = *this + o; }
  Rational& operator-=(const Rational& o) { return *this = *this - o; }

  bool operator==(const Rational& o) const { return num_ == o.num_ && den_ == o.den_; }
  bool operator!=(const Rational& o) const { return !(*this == o); }
  bool operator<(const Rational& o) const;
  bool operator<=(const Rational& o) const { return !(o < *this); }
  bool operator>(const Rational& o) const { return o < *this; }
  bool operator>=(const Rational& o) const { return !(*this < o); }

  std::string str() const;
  // Accepts "p", "p/q" and "-p"; no decimals.
  static Rational parse(const std::string& s);

 private:
  std::int64_t num_ = 0;
  std::int64_t den_ = 1;
};

Rational midpoint(const Rational& a, const Rational& b);

class TimeBound {
 public:
  TimeBound() = default;
  TimeBound(const Rational& r) : value_(r) {}  // NOLINT: implicit finite bound
  TimeBound(std::int64_t n) : value_(n) {}      // NOLINT
  static TimeBound infinity() {
    TimeBound b;
    b.inf_ = true;
    return b;
  }

  bool isInfinite() const { return inf_; }
  const Rational& value() const;

  bool operator==(const TimeBound& o) const;
  bool operator!=(const TimeBound& o) const { return !(*this == o); }
  bool operator<(const TimeBound& o) const;
  bool operator<=(const TimeBound& o) const { return !(o < *this); }

  TimeBound operator+(const Rational& t) const { return inf_ ? *this : TimeBound(value_ + t); }

  std::string str() const { return inf_ ? "inf" : value_.str(); }
  static TimeBound parse(const std::string& s);

 private:
  bool inf_ = false;
  Rational value_;
};

bool operator<(const Rational& a, const TimeBound& b);
bool operator<(const TimeBound& a, const Rational& b);

class Interval {
 public:
  // Throws std::invalid_argument for empty or malformed intervals.
  Interval(const Rational& left, const TimeBound& right, bool leftClosed, bool rightClosed);

  static Interval closed(const Rational& a, const Rational& b) { return {a, b, true, true}; }
  static Interval point(const Rational& t) { return {t, t, true, true}; }
  static Interval parse(const std::string& s);

  const Rational& L() const { return left_; }
  const TimeBound& R() const { return right_; }
  bool leftClosed() const { return lc_; }
  bool rightClosed() const { return rc_; }
  bool singular() const { return !right_.isInfinite() && right_.value() == left_; }

  bool operator==(const Interval& o) const {
    return left_ == o.left_ && right_ == o.right_ && lc_ == o.lc_ && rc_ == o.rc_;
  }
  bool operator!=(const Interval& o) const { return !(*this == o); }
  bool operator<(const Interval& o) const;

  std::string str() const;

 private:
  Rational left_;
  TimeBound right_;
  bool lc_;
  bool rc_;
};

bool contains(const Interval& I, const Rational& t);
Interval shift(const Rational& t, const Interval& I);
bool consecutive(const Interval& a, const Interval& b);
// Intersection with [0,t]; nullopt if empty.
std::optional<Interval> truncate(const Interval& I, const Rational& t);

// Returns an empty string when valid, otherwise a description of the first failure.
std::string checkIntervalSequence(const std::vector<Interval>& items);

enum class Rel { Lt, Le, Eq, Ge, Gt };

std::string relName(Rel r);
bool relHolds(const Rational& lhs, Rel r, const Rational& rhs);

class ClockConstraint;
using ConstraintPtr = std::shared_ptr<const ClockConstraint>;

class ClockConstraint {
 public:
  enum class Kind { True, Atom, And, Or };

  static ConstraintPtr top();
  static ConstraintPtr atom(const std::string& clock, Rel rel, const Rational& c);
  static ConstraintPtr conj(ConstraintPtr a, ConstraintPtr b);
  static ConstraintPtr disj(ConstraintPtr a, ConstraintPtr b);
  // Prefix grammar: true | (op clock const) | (and c c) | (or c c).
  static ConstraintPtr parse(const std::string& text);

  Kind kind() const { return kind_; }
  const std::string& clock() const { return clock_; }
  Rel rel() const { return rel_; }
  const Rational& constant() const { return c_; }
  const ConstraintPtr& lhs() const { return a_; }
  const ConstraintPtr& rhs() const { return b_; }

  std::set<std::string> clocks() const;
  void collectConstants(std::vector<Rational>& out) const;
  std::string str() const;

 private:
  Kind kind_ = Kind::True;
  std::string clock_;
  Rel rel_ = Rel::Le;
  Rational c_;
  ConstraintPtr a_, b_;
};

using ClockValuation = std::map<std::string, Rational>;

class DomainError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Throws DomainError if a clock of psi is missing from mu.
bool evalConstraint(const ClockValuation& mu, const ClockConstraint& psi);

// Evaluates psi with every clock replaced by value (the single-clock case used for β(v,x)).
bool evalConstraintAt(const ClockConstraint& psi, const Rational& value);

// Scales psi's constants by factor (a positive integer).
ConstraintPtr scaleConstraint(const ConstraintPtr& psi, std::int64_t factor);

struct Scaling {
  std::int64_t factor = 1;
  std::vector<std::int64_t> scaled;
};

Scaling scaleToIntegers(const std::vector<Rational>& constants);

}  // namespace hyperclock
