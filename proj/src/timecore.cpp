#include "hyperclock/timecore.hpp"

#include <cctype>
#include <numeric>
#include <sstream>

namespace hyperclock {

namespace {

using i128 = __int128;

std::int64_t narrow(i128 v) {
  if (v > INT64_MAX || v < INT64_MIN) throw std::overflow_error("rational overflow");
  return static_cast<std::int64_t>(v);
}

Rational make(i128 n, i128 d) {
  if (d == 0) throw std::domain_error("zero denominator");
  if (d < 0) {
    n = -n;
    d = -d;
  }
  i128 a = n < 0 ? -n : n, b = d;
  while (b != 0) {
    i128 r = a % b;
    a = b;
    b = r;
  }
  if (a > 1) {
    n /= a;
    d /= a;
  }
  return Rational(narrow(n), narrow(d));
}

}  // namespace

Rational::Rational(std::int64_t n, std::int64_t d) {
  if (d == 0) throw std::domain_error("zero denominator");
  if (d < 0) {
    n = -n;
    d = -d;
  }
  std::int64_t g = std::gcd(n, d);
  if (g > 1) {
    n /= g;
    d /= g;
  }
  num_ = n;
  den_ = d;
}

std::int64_t Rational::floor() const {
  std::int64_t q = num_ / den_;
  if (num_ % den_ != 0 && num_ < 0) --q;
  return q;
}

Rational Rational::operator+(const Rational& o) const {
  if (den_ == o.den_) return make(i128(num_) + o.num_, den_);
  return make(i128(num_) * o.den_ + i128(o.num_) * den_, i128(den_) * o.den_);
}

Rational Rational::operator-(const Rational& o) const {
  if (den_ == o.den_) return make(i128(num_) - o.num_, den_);
  return make(i128(num_) * o.den_ - i128(o.num_) * den_, i128(den_) * o.den_);
}

Rational Rational::operator*(const Rational& o) const {
  return make(i128(num_) * o.num_, i128(den_) * o.den_);
}

Rational Rational::operator/(const Rational& o) const {
  return make(i128(num_) * o.den_, i128(den_) * o.num_);
}

bool Rational::operator<(const Rational& o) const {
  if (den_ == o.den_) return num_ < o.num_;
  return i128(num_) * o.den_ < i128(o.num_) * den_;
}

std::string Rational::str() const {
  if (den_ == 1) return std::to_string(num_);
  return std::to_string(num_) + "/" + std::to_string(den_);
}

Rational Rational::parse(const std::string& s) {
  auto parseInt = [&](const std::string& part) -> std::int64_t {
    if (part.empty()) throw std::invalid_argument("malformed rational '" + s + "'");
    std::size_t i = (part[0] == '-') ? 1 : 0;
    if (i == part.size()) throw std::invalid_argument("malformed rational '" + s + "'");
    for (std::size_t j = i; j < part.size(); ++j)
      if (!std::isdigit(static_cast<unsigned char>(part[j])))
        throw std::invalid_argument("malformed rational '" + s + "'");
    try {
      return std::stoll(part);
    } catch (const std::out_of_range&) {
      throw std::invalid_argument("rational out of range '" + s + "'");
    }
  };
  auto slash = s.find('/');
  if (slash == std::string::npos) return Rational(parseInt(s));
  std::int64_t d = parseInt(s.substr(slash + 1));
  if (d == 0) throw std::invalid_argument("zero denominator in '" + s + "'");
  return Rational(parseInt(s.substr(0, slash)), d);
}

Rational midpoint(const Rational& a, const Rational& b) { return (a + b) * Rational(1, 2); }

const Rational& TimeBound::value() const {
  if (inf_) throw std::logic_error("value() of infinite bound");
  return value_;
}

bool TimeBound::operator==(const TimeBound& o) const {
  if (inf_ || o.inf_) return inf_ == o.inf_;
  return value_ == o.value_;
}

bool TimeBound::operator<(const TimeBound& o) const {
  if (inf_) return false;
  if (o.inf_) return true;
  return value_ < o.value_;
}

TimeBound TimeBound::parse(const std::string& s) {
  if (s == "inf") return infinity();
  return TimeBound(Rational::parse(s));
}

bool operator<(const Rational& a, const TimeBound& b) { return b.isInfinite() || a < b.value(); }
bool operator<(const TimeBound& a, const Rational& b) { return !a.isInfinite() && a.value() < b; }

Interval::Interval(const Rational& left, const TimeBound& right, bool leftClosed, bool rightClosed)
    : left_(left), right_(right), lc_(leftClosed), rc_(rightClosed) {
  if (left_ < Rational(0)) throw std::invalid_argument("interval left endpoint is negative");
  if (right_.isInfinite()) {
    if (rc_) throw std::invalid_argument("interval closed at infinity");
    return;
  }
  if (right_.value() < left_) throw std::invalid_argument("interval with left > right");
  if (right_.value() == left_ && !(lc_ && rc_))
    throw std::invalid_argument("empty interval " + str());
}

bool Interval::operator<(const Interval& o) const {
  if (left_ != o.left_) return left_ < o.left_;
  if (lc_ != o.lc_) return lc_;
  if (right_ != o.right_) return right_ < o.right_;
  return !rc_ && o.rc_;
}

std::string Interval::str() const {
  std::string s;
  s += lc_ ? '[' : '(';
  s += left_.str();
  s += ',';
  s += right_.str();
  s += rc_ ? ']' : ')';
  return s;
}

Interval Interval::parse(const std::string& text) {
  std::string s;
  for (char c : text)
    if (!std::isspace(static_cast<unsigned char>(c))) s += c;
  if (s.size() < 5) throw std::invalid_argument("malformed interval '" + text + "'");
  bool lc = s.front() == '[';
  bool rc = s.back() == ']';
  if ((!lc && s.front() != '(') || (!rc && s.back() != ')'))
    throw std::invalid_argument("malformed interval '" + text + "'");
  auto comma = s.find(',');
  if (comma == std::string::npos) throw std::invalid_argument("malformed interval '" + text + "'");
  Rational a = Rational::parse(s.substr(1, comma - 1));
  TimeBound b = TimeBound::parse(s.substr(comma + 1, s.size() - comma - 2));
  return Interval(a, b, lc, rc);
}

bool contains(const Interval& I, const Rational& t) {
  if (t < I.L() || (t == I.L() && !I.leftClosed())) return false;
  if (I.R().isInfinite()) return true;
  const Rational& r = I.R().value();
  return t < r || (t == r && I.rightClosed());
}

Interval shift(const Rational& t, const Interval& I) {
  return Interval(I.L() + t, I.R() + t, I.leftClosed(), I.rightClosed());
}

bool consecutive(const Interval& a, const Interval& b) {
  if (a.R().isInfinite() || a.R().value() != b.L()) return false;
  const Rational& p = a.R().value();
  // The shared point must lie in exactly one of them; two singular intervals never qualify.
  return contains(a, p) != contains(b, p);
}

std::optional<Interval> truncate(const Interval& I, const Rational& t) {
  if (t < I.L() || (t == I.L() && !I.leftClosed())) return std::nullopt;
  if (I.R() <= TimeBound(t)) return I;
  return Interval(I.L(), t, I.leftClosed(), true);
}

std::string checkIntervalSequence(const std::vector<Interval>& items) {
  if (items.empty()) return "empty interval sequence";
  if (items[0].L() != Rational(0) || !items[0].leftClosed())
    return "first interval " + items[0].str() + " does not contain 0";
  for (std::size_t i = 0; i + 1 < items.size(); ++i)
    if (!consecutive(items[i], items[i + 1]))
      return "intervals " + items[i].str() + " and " + items[i + 1].str() + " are not consecutive";
  return {};
}

std::string relName(Rel r) {
  switch (r) {
    case Rel::Lt: return "<";
    case Rel::Le: return "<=";
    case Rel::Eq: return "=";
    case Rel::Ge: return ">=";
    case Rel::Gt: return ">";
  }
  return "?";
}

bool relHolds(const Rational& lhs, Rel r, const Rational& rhs) {
  switch (r) {
    case Rel::Lt: return lhs < rhs;
    case Rel::Le: return lhs <= rhs;
    case Rel::Eq: return lhs == rhs;
    case Rel::Ge: return lhs >= rhs;
    case Rel::Gt: return lhs > rhs;
  }
  return false;
}

ConstraintPtr ClockConstraint::top() {
  static const ConstraintPtr t = std::make_shared<ClockConstraint>();
  return t;
}

ConstraintPtr ClockConstraint::atom(const std::string& clock, Rel rel, const Rational& c) {
  if (c < Rational(0)) throw std::invalid_argument("negative clock constant");
  auto p = std::make_shared<ClockConstraint>();
  p->kind_ = Kind::Atom;
  p->clock_ = clock;
  p->rel_ = rel;
  p->c_ = c;
  return p;
}

ConstraintPtr ClockConstraint::conj(ConstraintPtr a, ConstraintPtr b) {
  auto p = std::make_shared<ClockConstraint>();
  p->kind_ = Kind::And;
  p->a_ = std::move(a);
  p->b_ = std::move(b);
  return p;
}

ConstraintPtr ClockConstraint::disj(ConstraintPtr a, ConstraintPtr b) {
  auto p = std::make_shared<ClockConstraint>();
  p->kind_ = Kind::Or;
  p->a_ = std::move(a);
  p->b_ = std::move(b);
  return p;
}

namespace {

struct ConstraintParser {
  const std::string& s;
  std::size_t pos = 0;

  [[noreturn]] void fail(const std::string& msg) const {
    throw std::invalid_argument("constraint '" + s + "' at " + std::to_string(pos) + ": " + msg);
  }
  void skip() {
    while (pos < s.size() && std::isspace(static_cast<unsigned char>(s[pos]))) ++pos;
  }
  std::string token() {
    skip();
    std::size_t b = pos;
    while (pos < s.size() && !std::isspace(static_cast<unsigned char>(s[pos])) && s[pos] != '(' &&
           s[pos] != ')')
      ++pos;
    if (b == pos) fail("expected token");
    return s.substr(b, pos - b);
  }
  void expect(char c) {
    skip();
    if (pos >= s.size() || s[pos] != c) fail(std::string("expected '") + c + "'");
    ++pos;
  }

  ConstraintPtr parse() {
    skip();
    if (pos < s.size() && s[pos] != '(') {
      std::string t = token();
      if (t == "true") return ClockConstraint::top();
      fail("unexpected '" + t + "'");
    }
    expect('(');
    std::string op = token();
    ConstraintPtr out;
    if (op == "and" || op == "or") {
      ConstraintPtr a = parse();
      ConstraintPtr b = parse();
      out = op == "and" ? ClockConstraint::conj(a, b) : ClockConstraint::disj(a, b);
      skip();
      // Allow n-ary and/or by folding left.
      while (pos < s.size() && s[pos] == '(') {
        ConstraintPtr c = parse();
        out = op == "and" ? ClockConstraint::conj(out, c) : ClockConstraint::disj(out, c);
        skip();
      }
    } else {
      Rel r;
      if (op == "<") r = Rel::Lt;
      else if (op == "<=") r = Rel::Le;
      else if (op == "=") r = Rel::Eq;
      else if (op == ">=") r = Rel::Ge;
      else if (op == ">") r = Rel::Gt;
      else fail("unknown operator '" + op + "'");
      std::string clock = token();
      Rational c;
      try {
        c = Rational::parse(token());
      } catch (const std::exception& e) {
        fail(e.what());
      }
      if (c < Rational(0)) fail("negative constant");
      out = ClockConstraint::atom(clock, r, c);
    }
    expect(')');
    return out;
  }
};

}  // namespace

ConstraintPtr ClockConstraint::parse(const std::string& text) {
  ConstraintParser p{text};
  ConstraintPtr c = p.parse();
  p.skip();
  if (p.pos != text.size()) p.fail("trailing input");
  return c;
}

std::set<std::string> ClockConstraint::clocks() const {
  std::set<std::string> out;
  if (kind_ == Kind::Atom) out.insert(clock_);
  if (a_) out.merge(a_->clocks());
  if (b_) out.merge(b_->clocks());
  return out;
}

void ClockConstraint::collectConstants(std::vector<Rational>& out) const {
  if (kind_ == Kind::Atom) out.push_back(c_);
  if (a_) a_->collectConstants(out);
  if (b_) b_->collectConstants(out);
}

std::string ClockConstraint::str() const {
  switch (kind_) {
    case Kind::True: return "true";
    case Kind::Atom: return "(" + relName(rel_) + " " + clock_ + " " + c_.str() + ")";
    case Kind::And: return "(and " + a_->str() + " " + b_->str() + ")";
    case Kind::Or: return "(or " + a_->str() + " " + b_->str() + ")";
  }
  return "";
}

bool evalConstraint(const ClockValuation& mu, const ClockConstraint& psi) {
  switch (psi.kind()) {
    case ClockConstraint::Kind::True: return true;
    case ClockConstraint::Kind::Atom: {
      auto it = mu.find(psi.clock());
      if (it == mu.end()) throw DomainError("unknown clock '" + psi.clock() + "'");
      return relHolds(it->second, psi.rel(), psi.constant());
    }
    case ClockConstraint::Kind::And:
      return evalConstraint(mu, *psi.lhs()) && evalConstraint(mu, *psi.rhs());
    case ClockConstraint::Kind::Or:
      return evalConstraint(mu, *psi.lhs()) || evalConstraint(mu, *psi.rhs());
  }
  return false;
}

bool evalConstraintAt(const ClockConstraint& psi, const Rational& value) {
  switch (psi.kind()) {
    case ClockConstraint::Kind::True: return true;
    case ClockConstraint::Kind::Atom: return relHolds(value, psi.rel(), psi.constant());
    case ClockConstraint::Kind::And:
      return evalConstraintAt(*psi.lhs(), value) && evalConstraintAt(*psi.rhs(), value);
    case ClockConstraint::Kind::Or:
      return evalConstraintAt(*psi.lhs(), value) || evalConstraintAt(*psi.rhs(), value);
  }
  return false;
}

ConstraintPtr scaleConstraint(const ConstraintPtr& psi, std::int64_t factor) {
  switch (psi->kind()) {
    case ClockConstraint::Kind::True: return psi;
    case ClockConstraint::Kind::Atom:
      return ClockConstraint::atom(psi->clock(), psi->rel(), psi->constant() * Rational(factor));
    case ClockConstraint::Kind::And:
      return ClockConstraint::conj(scaleConstraint(psi->lhs(), factor), scaleConstraint(psi->rhs(), factor));
    case ClockConstraint::Kind::Or:
      return ClockConstraint::disj(scaleConstraint(psi->lhs(), factor), scaleConstraint(psi->rhs(), factor));
  }
  return psi;
}

Scaling scaleToIntegers(const std::vector<Rational>& constants) {
  Scaling s;
  for (const Rational& c : constants) {
    if (c < Rational(0)) throw std::invalid_argument("scaleToIntegers: negative constant");
    s.factor = std::lcm(s.factor, c.den());
  }
  for (const Rational& c : constants) s.scaled.push_back((c * Rational(s.factor)).num());
  return s;
}

}  // namespace hyperclock
