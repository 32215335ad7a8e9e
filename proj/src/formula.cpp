#include "hyperclock/formula.hpp"

#include <algorithm>
#include <cctype>
#include <functional>
#include <map>

namespace hyperclock {

FormulaPtr Formula::atom(const std::string& prop, const std::string& var) {
  auto f = std::make_shared<Formula>();
  f->kind_ = Kind::Atom;
  f->prop_ = prop;
  f->var_ = var;
  return f;
}

FormulaPtr Formula::negAtom(const std::string& prop, const std::string& var) {
  auto f = std::make_shared<Formula>();
  f->kind_ = Kind::NegAtom;
  f->prop_ = prop;
  f->var_ = var;
  return f;
}

FormulaPtr Formula::disj(FormulaPtr a, FormulaPtr b) {
  auto f = std::make_shared<Formula>();
  f->kind_ = Kind::Or;
  f->a_ = std::move(a);
  f->b_ = std::move(b);
  return f;
}

FormulaPtr Formula::conj(FormulaPtr a, FormulaPtr b) {
  auto f = std::make_shared<Formula>();
  f->kind_ = Kind::And;
  f->a_ = std::move(a);
  f->b_ = std::move(b);
  return f;
}

FormulaPtr Formula::finally(const Interval& I, FormulaPtr a) {
  auto f = std::make_shared<Formula>();
  f->kind_ = Kind::Finally;
  f->interval_ = I;
  f->a_ = std::move(a);
  return f;
}

FormulaPtr Formula::globally(const Interval& I, FormulaPtr a) {
  auto f = std::make_shared<Formula>();
  f->kind_ = Kind::Globally;
  f->interval_ = I;
  f->a_ = std::move(a);
  return f;
}

FormulaPtr Formula::until(const Interval& I, FormulaPtr a, FormulaPtr b) {
  auto f = std::make_shared<Formula>();
  f->kind_ = Kind::Until;
  f->interval_ = I;
  f->a_ = std::move(a);
  f->b_ = std::move(b);
  return f;
}

FormulaPtr Formula::exists(const std::string& var, FormulaPtr body) {
  auto f = std::make_shared<Formula>();
  f->kind_ = Kind::Exists;
  f->var_ = var;
  f->a_ = std::move(body);
  return f;
}

FormulaPtr Formula::forall(const std::string& var, FormulaPtr body) {
  auto f = std::make_shared<Formula>();
  f->kind_ = Kind::Forall;
  f->var_ = var;
  f->a_ = std::move(body);
  return f;
}

namespace {

std::string show(const Formula& f, bool root) {
  using K = Formula::Kind;
  switch (f.kind()) {
    case K::Atom:
      return f.prop() + "@" + f.var();
    case K::NegAtom:
      return "!" + f.prop() + "@" + f.var();
    case K::Or:
      return "(" + show(*f.lhs(), false) + " | " + show(*f.rhs(), false) + ")";
    case K::And:
      return "(" + show(*f.lhs(), false) + " & " + show(*f.rhs(), false) + ")";
    case K::Finally:
      return "F" + f.interval().str() + " " + show(*f.lhs(), false);
    case K::Globally:
      return "G" + f.interval().str() + " " + show(*f.lhs(), false);
    case K::Until:
      return "(" + show(*f.lhs(), false) + " U" + f.interval().str() + " " + show(*f.rhs(), false) + ")";
    case K::Exists:
    case K::Forall: {
      std::string s = std::string(f.kind() == K::Exists ? "exists " : "forall ") + f.var() + ". " + show(*f.lhs(), true);
      return root ? s : "(" + s + ")";
    }
  }
  return "";
}

}  // namespace

std::string Formula::str() const { return show(*this, true); }

bool equal(const FormulaPtr& a, const FormulaPtr& b) {
  if (a == b) return true;
  if (!a || !b) return false;
  if (a->kind() != b->kind()) return false;
  switch (a->kind()) {
    case Formula::Kind::Atom:
    case Formula::Kind::NegAtom:
      return a->prop() == b->prop() && a->var() == b->var();
    case Formula::Kind::Or:
    case Formula::Kind::And:
      return equal(a->lhs(), b->lhs()) && equal(a->rhs(), b->rhs());
    case Formula::Kind::Finally:
    case Formula::Kind::Globally:
      return a->interval() == b->interval() && equal(a->lhs(), b->lhs());
    case Formula::Kind::Until:
      return a->interval() == b->interval() && equal(a->lhs(), b->lhs()) && equal(a->rhs(), b->rhs());
    case Formula::Kind::Exists:
    case Formula::Kind::Forall:
      return a->var() == b->var() && equal(a->lhs(), b->lhs());
  }
  return false;
}

namespace {

std::string describePosition(const std::string& text, std::size_t pos) {
  std::size_t line = 1, col = 1;
  for (std::size_t i = 0; i < pos && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return std::to_string(line) + ":" + std::to_string(col);
}

}  // namespace

ParseError::ParseError(const std::string& msg, std::size_t pos, const std::string& text)
    : std::runtime_error("syntax error at " + describePosition(text, pos) + ": " + msg), pos_(pos) {}

namespace {

enum class Tok { Ident, Number, Sym, End };

struct Token {
  Tok kind;
  std::string text;
  std::size_t pos;
};

std::vector<Token> lex(const std::string& s) {
  std::vector<Token> out;
  std::size_t i = 0;
  auto identChar = [](char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '\''; };
  while (i < s.size()) {
    char c = s[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      ++i;
      continue;
    }
    std::size_t start = i;
    if (std::isdigit(static_cast<unsigned char>(c))) {
      while (i < s.size() && std::isdigit(static_cast<unsigned char>(s[i]))) ++i;
      if (i < s.size() && s[i] == '/') {
        ++i;
        if (i >= s.size() || !std::isdigit(static_cast<unsigned char>(s[i])))
          throw ParseError("expected denominator", i, s);
        while (i < s.size() && std::isdigit(static_cast<unsigned char>(s[i]))) ++i;
      }
      out.push_back({Tok::Number, s.substr(start, i - start), start});
    } else if (std::isalpha(static_cast<unsigned char>(c)) || c == '_' || c == '#') {
      ++i;
      while (i < s.size() && identChar(s[i])) ++i;
      out.push_back({Tok::Ident, s.substr(start, i - start), start});
    } else if (s.compare(i, 3, "<->") == 0) {
      i += 3;
      out.push_back({Tok::Sym, "<->", start});
    } else if (s.compare(i, 2, "->") == 0) {
      i += 2;
      out.push_back({Tok::Sym, "->", start});
    } else if (std::string("@!&|()[],.").find(c) != std::string::npos) {
      ++i;
      out.push_back({Tok::Sym, std::string(1, c), start});
    } else {
      throw ParseError(std::string("unexpected character '") + c + "'", i, s);
    }
  }
  out.push_back({Tok::End, "", s.size()});
  return out;
}

class Parser {
 public:
  explicit Parser(const std::string& text) : text_(text), toks_(lex(text)) {}

  FormulaPtr parseAll() {
    FormulaPtr f = formula();
    if (peek().kind != Tok::End) fail("unexpected '" + peek().text + "'");
    return f;
  }

 private:
  const std::string& text_;
  std::vector<Token> toks_;
  std::size_t i_ = 0;

  const Token& peek(std::size_t k = 0) const { return toks_[std::min(i_ + k, toks_.size() - 1)]; }
  [[noreturn]] void fail(const std::string& m) const { throw ParseError(m, peek().pos, text_); }
  bool isSym(const std::string& s, std::size_t k = 0) const { return peek(k).kind == Tok::Sym && peek(k).text == s; }
  bool isIdent(const std::string& s, std::size_t k = 0) const {
    return peek(k).kind == Tok::Ident && peek(k).text == s;
  }
  void expect(const std::string& s) {
    if (!isSym(s)) fail("expected '" + s + "'");
    ++i_;
  }
  std::string ident(const char* what) {
    if (peek().kind != Tok::Ident) fail(std::string("expected ") + what);
    return toks_[i_++].text;
  }

  bool atQuantifier() const {
    return (isIdent("exists") || isIdent("forall")) && peek(1).kind == Tok::Ident && isSym(".", 2);
  }
  bool atTemporal() const { return (isIdent("F") || isIdent("G")) && (isSym("[", 1) || isSym("(", 1)); }

  FormulaPtr formula() {
    if (atQuantifier()) return quant();
    return iff();
  }

  FormulaPtr quant() {
    bool ex = peek().text == "exists";
    ++i_;
    std::string v = ident("path variable");
    expect(".");
    FormulaPtr body = formula();
    return ex ? Formula::exists(v, body) : Formula::forall(v, body);
  }

  FormulaPtr iff() {
    FormulaPtr f = imp();
    while (isSym("<->")) {
      ++i_;
      FormulaPtr g = imp();
      f = Formula::conj(Formula::disj(negate(f), g), Formula::disj(negate(g), f));
    }
    return f;
  }

  FormulaPtr imp() {
    FormulaPtr f = disjunction();
    while (isSym("->")) {
      ++i_;
      f = Formula::disj(negate(f), disjunction());
    }
    return f;
  }

  FormulaPtr disjunction() {
    FormulaPtr f = conjunction();
    while (isSym("|")) {
      ++i_;
      f = Formula::disj(f, conjunction());
    }
    return f;
  }

  FormulaPtr conjunction() {
    FormulaPtr f = unary();
    while (isSym("&")) {
      ++i_;
      f = Formula::conj(f, unary());
    }
    return f;
  }

  Rational number() {
    if (peek().kind != Tok::Number) fail("expected a rational constant");
    return Rational::parse(toks_[i_++].text);
  }

  Interval interval() {
    std::size_t pos = peek().pos;
    bool lc;
    if (isSym("["))
      lc = true;
    else if (isSym("("))
      lc = false;
    else
      fail("expected '[' or '(' to start an interval");
    ++i_;
    Rational l = number();
    expect(",");
    TimeBound r;
    if (isIdent("inf")) {
      ++i_;
      r = TimeBound::infinity();
    } else {
      r = number();
    }
    bool rc;
    if (isSym("]"))
      rc = true;
    else if (isSym(")"))
      rc = false;
    else
      fail("expected ']' or ')' to close an interval");
    ++i_;
    try {
      return Interval(l, r, lc, rc);
    } catch (const std::invalid_argument& e) {
      throw ParseError(e.what(), pos, text_);
    }
  }

  FormulaPtr atom(bool negated) {
    std::string p = ident("proposition");
    expect("@");
    std::string v = ident("path variable");
    return negated ? Formula::negAtom(p, v) : Formula::atom(p, v);
  }

  FormulaPtr unary() {
    if (isSym("!")) {
      ++i_;
      if (peek().kind == Tok::Ident && isSym("@", 1)) return atom(true);
      return negate(unary());
    }
    if (atQuantifier()) return quant();
    if (atTemporal()) {
      bool fin = peek().text == "F";
      ++i_;
      Interval I = interval();
      FormulaPtr a = unary();
      return fin ? Formula::finally(I, a) : Formula::globally(I, a);
    }
    if (isSym("(")) {
      ++i_;
      FormulaPtr a = formula();
      if (isIdent("U") && (isSym("[", 1) || isSym("(", 1))) {
        ++i_;
        Interval I = interval();
        FormulaPtr b = formula();
        expect(")");
        return Formula::until(I, a, b);
      }
      expect(")");
      return a;
    }
    if (peek().kind == Tok::Ident) return atom(false);
    if (peek().kind == Tok::End) fail("unexpected end of input");
    fail("unexpected '" + peek().text + "'");
  }
};

void walkScopes(const FormulaPtr& f, std::vector<std::string>& bound, int quantDepth,
                const std::function<void(const Formula&, const std::vector<std::string>&, int)>& visit) {
  visit(*f, bound, quantDepth);
  if (f->isQuantifier()) {
    bound.push_back(f->var());
    walkScopes(f->lhs(), bound, quantDepth + 1, visit);
    bound.pop_back();
    return;
  }
  if (f->lhs()) walkScopes(f->lhs(), bound, quantDepth, visit);
  if (f->rhs()) walkScopes(f->rhs(), bound, quantDepth, visit);
}

}  // namespace

std::vector<std::string> wellFormednessErrors(const FormulaPtr& phi, bool requireQuantifiedTemporal) {
  std::vector<std::string> errs;
  std::map<std::string, int> bindings;
  std::set<std::string> freeUses;
  std::vector<std::string> bound;
  walkScopes(phi, bound, 0, [&](const Formula& f, const std::vector<std::string>& scope, int depth) {
    if (f.isQuantifier()) {
      // Sibling binders may reuse a name (negation and "<->" duplicate subformulas); nesting may not.
      if (std::find(scope.begin(), scope.end(), f.var()) != scope.end())
        errs.push_back("variable '" + f.var() + "' is rebound inside its own scope");
      ++bindings[f.var()];
    }
    if (f.isAtomic() && std::find(scope.begin(), scope.end(), f.var()) == scope.end()) freeUses.insert(f.var());
    if (f.isTemporal() && requireQuantifiedTemporal && depth == 0)
      errs.push_back("temporal operator " + std::string(f.kind() == Formula::Kind::Finally    ? "F"
                                                        : f.kind() == Formula::Kind::Globally ? "G"
                                                                                              : "U") +
                     f.interval().str() + " is not within the scope of a quantifier");
  });
  for (const auto& v : freeUses)
    if (bindings.count(v)) errs.push_back("variable '" + v + "' occurs both free and bound");
  return errs;
}

void checkWellFormed(const FormulaPtr& phi, bool requireQuantifiedTemporal) {
  auto errs = wellFormednessErrors(phi, requireQuantifiedTemporal);
  if (!errs.empty()) throw WellFormednessError(errs.front());
}

FormulaPtr parseFormula(const std::string& text, bool requireQuantifiedTemporal) {
  FormulaPtr f = Parser(text).parseAll();
  checkWellFormed(f, requireQuantifiedTemporal);
  return f;
}

namespace {

// phi holds on some right neighbourhood (t, t+d) of the current time.
FormulaPtr soonAlways(const FormulaPtr& phi) {
  return Formula::until(Interval(0, TimeBound::infinity(), false, false), phi, phi);
}

// Classical dual of (a U_I b): no b-point of t+I lies at or before the first failure of a.
FormulaPtr untilDual(const Interval& I, const FormulaPtr& a, const FormulaPtr& b) {
  FormulaPtr na = negate(a), nb = negate(b);
  FormulaPtr stop = Formula::disj(na, soonAlways(na));
  FormulaPtr out = Formula::disj(Formula::globally(I, nb), soonAlways(na));
  const Rational& l = I.L();
  const TimeBound& r = I.R();
  if (l == Rational(0)) {
    if (Rational(0) < r)
      out = Formula::disj(out, Formula::until(Interval(0, r, true, false), nb, Formula::conj(nb, stop)));
    return out;
  }
  out = Formula::disj(out, Formula::finally(Interval(0, l, false, !I.leftClosed()), stop));
  if (l < r) {
    TimeBound rest = r.isInfinite() ? r : TimeBound(r.value() - l);
    FormulaPtr later = Formula::until(Interval(0, rest, true, false), nb, Formula::conj(nb, stop));
    FormulaPtr atL = I.leftClosed() ? Formula::conj(nb, Formula::disj(stop, later)) : later;
    out = Formula::disj(out, Formula::finally(Interval::point(l), atL));
  }
  return out;
}

}  // namespace

FormulaPtr negate(const FormulaPtr& phi) {
  using K = Formula::Kind;
  switch (phi->kind()) {
    case K::Atom:
      return Formula::negAtom(phi->prop(), phi->var());
    case K::NegAtom:
      return Formula::atom(phi->prop(), phi->var());
    case K::Or:
      return Formula::conj(negate(phi->lhs()), negate(phi->rhs()));
    case K::And:
      return Formula::disj(negate(phi->lhs()), negate(phi->rhs()));
    case K::Finally:
      return Formula::globally(phi->interval(), negate(phi->lhs()));
    case K::Globally:
      return Formula::finally(phi->interval(), negate(phi->lhs()));
    case K::Until:
      return untilDual(phi->interval(), phi->lhs(), phi->rhs());
    case K::Exists:
      return Formula::forall(phi->var(), negate(phi->lhs()));
    case K::Forall:
      return Formula::exists(phi->var(), negate(phi->lhs()));
  }
  return phi;
}

std::vector<std::string> freeVars(const FormulaPtr& phi) {
  std::vector<std::string> out;
  std::vector<std::string> bound;
  walkScopes(phi, bound, 0, [&](const Formula& f, const std::vector<std::string>& scope, int) {
    if (!f.isAtomic()) return;
    if (std::find(scope.begin(), scope.end(), f.var()) != scope.end()) return;
    if (std::find(out.begin(), out.end(), f.var()) == out.end()) out.push_back(f.var());
  });
  return out;
}

std::set<std::string> propositions(const FormulaPtr& phi) {
  std::set<std::string> out;
  std::vector<std::string> bound;
  walkScopes(phi, bound, 0, [&](const Formula& f, const std::vector<std::string>&, int) {
    if (f.isAtomic()) out.insert(f.prop());
  });
  return out;
}

int temporalDepth(const FormulaPtr& phi) {
  int d = 0;
  if (phi->lhs()) d = std::max(d, temporalDepth(phi->lhs()));
  if (phi->rhs()) d = std::max(d, temporalDepth(phi->rhs()));
  return d + (phi->isTemporal() ? 1 : 0);
}

int quantifierCount(const FormulaPtr& phi) {
  int n = phi->isQuantifier() ? 1 : 0;
  if (phi->lhs()) n += quantifierCount(phi->lhs());
  if (phi->rhs()) n += quantifierCount(phi->rhs());
  return n;
}

bool isSentence(const FormulaPtr& phi) { return freeVars(phi).empty(); }

std::vector<Rational> formulaConstants(const FormulaPtr& phi) {
  std::vector<Rational> out;
  std::function<void(const FormulaPtr&)> go = [&](const FormulaPtr& f) {
    if (f->isTemporal()) {
      out.push_back(f->interval().L());
      if (!f->interval().R().isInfinite()) out.push_back(f->interval().R().value());
    }
    if (f->lhs()) go(f->lhs());
    if (f->rhs()) go(f->rhs());
  };
  go(phi);
  return out;
}

namespace {

Interval scaleInterval(const Interval& I, std::int64_t k) {
  TimeBound r = I.R().isInfinite() ? I.R() : TimeBound(I.R().value() * Rational(k));
  return Interval(I.L() * Rational(k), r, I.leftClosed(), I.rightClosed());
}

FormulaPtr rebuild(const Formula& f, FormulaPtr a, FormulaPtr b, const std::optional<Interval>& I) {
  using K = Formula::Kind;
  switch (f.kind()) {
    case K::Atom:
    case K::NegAtom:
      return f.kind() == K::Atom ? Formula::atom(f.prop(), f.var()) : Formula::negAtom(f.prop(), f.var());
    case K::Or:
      return Formula::disj(a, b);
    case K::And:
      return Formula::conj(a, b);
    case K::Finally:
      return Formula::finally(*I, a);
    case K::Globally:
      return Formula::globally(*I, a);
    case K::Until:
      return Formula::until(*I, a, b);
    case K::Exists:
      return Formula::exists(f.var(), a);
    case K::Forall:
      return Formula::forall(f.var(), a);
  }
  return nullptr;
}

}  // namespace

FormulaPtr scaleFormula(const FormulaPtr& phi, std::int64_t factor) {
  if (phi->isAtomic()) return phi;
  FormulaPtr a = phi->lhs() ? scaleFormula(phi->lhs(), factor) : nullptr;
  FormulaPtr b = phi->rhs() ? scaleFormula(phi->rhs(), factor) : nullptr;
  std::optional<Interval> I;
  if (phi->isTemporal()) I = scaleInterval(phi->interval(), factor);
  return rebuild(*phi, a, b, I);
}

namespace {

const char* const kMarkProp = "#";

FormulaPtr anyMark(const std::vector<std::string>& scope) {
  if (scope.empty()) throw std::invalid_argument("pointToInterval: temporal operator with no path variable in scope");
  FormulaPtr h = Formula::atom(kMarkProp, scope[0]);
  for (std::size_t i = 1; i < scope.size(); ++i) h = Formula::disj(h, Formula::atom(kMarkProp, scope[i]));
  return h;
}

FormulaPtr p2i(const FormulaPtr& f, std::vector<std::string>& scope) {
  using K = Formula::Kind;
  switch (f->kind()) {
    case K::Atom:
    case K::NegAtom:
      return Formula::conj(Formula::atom(kMarkProp, f->var()), f);
    case K::Or:
      return Formula::disj(p2i(f->lhs(), scope), p2i(f->rhs(), scope));
    case K::And:
      return Formula::conj(p2i(f->lhs(), scope), p2i(f->rhs(), scope));
    case K::Finally:
      return Formula::finally(f->interval(), Formula::conj(anyMark(scope), p2i(f->lhs(), scope)));
    case K::Globally:
      return Formula::globally(f->interval(), Formula::disj(negate(anyMark(scope)), p2i(f->lhs(), scope)));
    case K::Until: {
      FormulaPtr h = anyMark(scope);
      return Formula::until(f->interval(), Formula::disj(negate(h), p2i(f->lhs(), scope)),
                            Formula::conj(h, p2i(f->rhs(), scope)));
    }
    case K::Exists:
    case K::Forall: {
      scope.push_back(f->var());
      FormulaPtr body = p2i(f->lhs(), scope);
      scope.pop_back();
      return f->kind() == K::Exists ? Formula::exists(f->var(), body) : Formula::forall(f->var(), body);
    }
  }
  return f;
}

}  // namespace

FormulaPtr pointToInterval(const FormulaPtr& phi, const std::vector<std::string>& scopeVars) {
  std::vector<std::string> scope = scopeVars;
  return p2i(phi, scope);
}

}  // namespace hyperclock
