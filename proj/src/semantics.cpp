#include "hyperclock/semantics.hpp"

#include <algorithm>
#include <set>
#include <unordered_map>

namespace hyperclock {

namespace {

using K = Formula::Kind;

// One end of an interval; inf only for upper ends.
struct End {
  bool inf = false;
  Rational v;
  bool closed = false;
};

End maxLower(const End& a, const End& b) {
  if (a.v != b.v) return a.v < b.v ? b : a;
  return a.closed ? b : a;
}

End minUpper(const End& a, const End& b) {
  if (a.inf) return b;
  if (b.inf) return a;
  if (a.v != b.v) return a.v < b.v ? a : b;
  return a.closed ? b : a;
}

bool nonEmpty(const End& lo, const End& hi) {
  if (hi.inf) return true;
  if (lo.v < hi.v) return true;
  return lo.v == hi.v && lo.closed && hi.closed;
}

void addRunBreakpoints(const Execution& rho, std::vector<Rational>& out) {
  for (const auto& s : rho.segments) {
    out.push_back(s.interval.L());
    if (!s.interval.R().isInfinite()) out.push_back(s.interval.R().value());
  }
}

void sortUnique(std::vector<Rational>& v) {
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
}

std::vector<Rational> shiftsOf(const FormulaPtr& phi) {
  std::vector<Rational> s;
  for (const auto& c : formulaConstants(phi))
    if (c != Rational(0)) s.push_back(c);
  sortUnique(s);
  return s;
}

// Base points closed under +-c for the formula's constants, depth times, clipped to [0, N].
std::vector<Rational> closePoints(std::vector<Rational> pts, const FormulaPtr& phi, const TimeBound& N) {
  auto shifts = shiftsOf(phi);
  int depth = temporalDepth(phi);
  Rational cap;
  if (N.isInfinite()) {
    cap = 0;
    for (const auto& p : pts) cap = std::max(cap, p);
    for (const auto& c : shifts) cap = cap + c * Rational(depth);
  } else {
    cap = N.value();
  }
  auto keep = [&](const Rational& x) { return Rational(0) <= x && x <= cap; };
  pts.erase(std::remove_if(pts.begin(), pts.end(), [&](const Rational& x) { return !keep(x); }), pts.end());
  pts.push_back(0);
  sortUnique(pts);
  std::vector<Rational> frontier = pts;
  for (int d = 0; d < depth && !frontier.empty() && !shifts.empty(); ++d) {
    std::vector<Rational> fresh;
    for (const auto& p : frontier)
      for (const auto& c : shifts) {
        for (const auto& q : {p - c, p + c})
          if (keep(q)) fresh.push_back(q);
      }
    sortUnique(fresh);
    std::vector<Rational> added;
    std::set_difference(fresh.begin(), fresh.end(), pts.begin(), pts.end(), std::back_inserter(added));
    std::vector<Rational> merged;
    std::merge(pts.begin(), pts.end(), added.begin(), added.end(), std::back_inserter(merged));
    pts.swap(merged);
    frontier.swap(added);
  }
  return pts;
}

std::vector<Rational> basePoints(const PathEnvironment& Pi, const ExecutionProvider* provider,
                                 const std::vector<Rational>& extra) {
  std::vector<Rational> pts = extra;
  for (const auto& [name, rho] : Pi.paths) addRunBreakpoints(rho, pts);
  if (provider) {
    auto b = provider->breakpoints();
    pts.insert(pts.end(), b.begin(), b.end());
  }
  if (!Pi.horizon.isInfinite()) pts.push_back(Pi.horizon.value());
  return pts;
}

// Cell 2i is the point pts[i]; cell 2i+1 is the open gap after it.
class Cells {
 public:
  Cells(std::vector<Rational> pts, TimeBound N) : N_(std::move(N)) {
    for (auto& p : pts)
      if (p < N_) pts_.push_back(p);
  }
  int count() const { return 2 * static_cast<int>(pts_.size()); }
  bool isPoint(int c) const { return c % 2 == 0; }
  End lower(int c) const { return {false, pts_[c / 2], isPoint(c)}; }
  End upper(int c) const {
    if (isPoint(c)) return {false, pts_[c / 2], true};
    std::size_t i = c / 2 + 1;
    if (i < pts_.size()) return {false, pts_[i], false};
    if (N_.isInfinite()) return {true, {}, false};
    return {false, N_.value(), false};
  }
  Rational rep(int c) const {
    if (isPoint(c)) return pts_[c / 2];
    End u = upper(c);
    return u.inf ? pts_[c / 2] + Rational(1) : midpoint(pts_[c / 2], u.v);
  }
  // Cell containing t, which must lie in [0, N).
  int cellOf(const Rational& t) const {
    auto it = std::upper_bound(pts_.begin(), pts_.end(), t);
    int i = static_cast<int>(it - pts_.begin()) - 1;
    return pts_[i] == t ? 2 * i : 2 * i + 1;
  }
  Interval interval(int c) const {
    End lo = lower(c), hi = upper(c);
    if (hi.inf) return Interval(lo.v, TimeBound::infinity(), lo.closed, false);
    return Interval(lo.v, hi.v, lo.closed, hi.closed);
  }
  const TimeBound& horizon() const { return N_; }

 private:
  std::vector<Rational> pts_;
  TimeBound N_;
};

struct Scope {
  std::map<std::string, const Execution*> env;
  std::unordered_map<const Formula*, std::vector<signed char>> memo;
};

class IntervalEvaluator {
 public:
  IntervalEvaluator(const TimedAutomaton& A, const ExecutionProvider* provider, const Cells& cells, EvalStats* stats)
      : A_(A), provider_(provider), cells_(cells), stats_(stats) {}

  bool eval(const FormulaPtr& f, Scope& sc, int cell, const Anchor& dag) {
    auto& row = sc.memo[f.get()];
    if (row.empty()) row.assign(cells_.count(), -1);
    if (row[cell] >= 0) return row[cell];
    bool v = compute(f, sc, cell, dag);
    // compute may rehash the memo, so look the row up again.
    sc.memo[f.get()][cell] = v;
    return v;
  }

 private:
  const Execution* path(const Scope& sc, const std::string& var) const {
    auto it = sc.env.find(var);
    if (it == sc.env.end()) throw EvalError("unbound path variable '" + var + "'");
    return it->second;
  }

  bool atom(const Formula& f, const Scope& sc, const Rational& t) const {
    const Execution* rho = path(sc, f.var());
    int i = rho->segmentAt(t);
    bool has = i >= 0 && A_.label(rho->segments[i].state).count(f.prop()) > 0;
    if (f.kind() == K::Atom) return has;
    // Off the run, the mark is read classically.
    if (f.prop() == kMark) return !has;
    return i >= 0 && !has;
  }

  // The window (t + I) ∩ (t, N) as a pair of ends.
  std::pair<End, End> window(const Interval& I, const Rational& t) const {
    End lo{false, t + I.L(), I.leftClosed()};
    lo = maxLower(lo, End{false, t, false});
    End hi = I.R().isInfinite() ? End{true, {}, false} : End{false, t + I.R().value(), I.rightClosed()};
    if (!cells_.horizon().isInfinite()) hi = minUpper(hi, End{false, cells_.horizon().value(), false});
    return {lo, hi};
  }

  bool meets(int c, const std::pair<End, End>& w) const {
    return nonEmpty(maxLower(cells_.lower(c), w.first), minUpper(cells_.upper(c), w.second));
  }

  // First cell that can meet the window, and whether cell c lies past it entirely.
  int firstCell(const std::pair<End, End>& w) const { return cells_.cellOf(w.first.v); }
  bool beyond(int c, const std::pair<End, End>& w) const {
    if (w.second.inf) return false;
    End lo = cells_.lower(c);
    return w.second.v < lo.v || (w.second.v == lo.v && !(lo.closed && w.second.closed));
  }

  bool compute(const FormulaPtr& fp, Scope& sc, int cell, const Anchor& dag) {
    const Formula& f = *fp;
    Rational t = cells_.rep(cell);
    switch (f.kind()) {
      case K::Atom:
      case K::NegAtom:
        return atom(f, sc, t);
      case K::Or:
        return eval(f.lhs(), sc, cell, dag) || eval(f.rhs(), sc, cell, dag);
      case K::And:
        return eval(f.lhs(), sc, cell, dag) && eval(f.rhs(), sc, cell, dag);
      case K::Finally:
      case K::Globally: {
        bool fin = f.kind() == K::Finally;
        auto w = window(f.interval(), t);
        if (!nonEmpty(w.first, w.second)) return !fin;
        for (int c = firstCell(w); c < cells_.count() && !beyond(c, w); ++c) {
          if (!meets(c, w)) continue;
          if (eval(f.lhs(), sc, c, dag) == fin) return fin;
        }
        return !fin;
      }
      case K::Until: {
        auto w = window(f.interval(), t);
        if (!nonEmpty(w.first, w.second)) return false;
        // Within the current gap both operands must hold on the part after t.
        if (!cells_.isPoint(cell) && meets(cell, w) && eval(f.rhs(), sc, cell, dag) && eval(f.lhs(), sc, cell, dag))
          return true;
        if (!cells_.isPoint(cell) && !eval(f.lhs(), sc, cell, dag)) return false;
        for (int c = cell + 1; c < cells_.count() && !beyond(c, w); ++c) {
          if (meets(c, w) && eval(f.rhs(), sc, c, dag) && (cells_.isPoint(c) || eval(f.lhs(), sc, c, dag)))
            return true;
          if (!eval(f.lhs(), sc, c, dag)) return false;
        }
        return false;
      }
      case K::Exists:
      case K::Forall:
        return quantify(f, sc, cell, dag, t);
    }
    return false;
  }

  bool quantify(const Formula& f, Scope& sc, int cell, const Anchor& dag, const Rational& t) {
    bool ex = f.kind() == K::Exists;
    if (!provider_) throw EvalError("quantifier over '" + f.var() + "' needs an execution provider");
    std::vector<const Execution*> cands;
    if (!dag) {
      if (t != Rational(0)) return !ex;
      cands = provider_->candidates(nullptr, t);
      if (cands.empty() && stats_)
        stats_->warnings.push_back("no accepting run for the quantifier over '" + f.var() + "'");
    } else {
      const Execution* anchor = path(sc, *dag);
      if (!anchor->contains(t)) return !ex;
      cands = provider_->candidates(anchor, t);
    }
    for (const Execution* rho : cands) {
      if (stats_) ++stats_->quantifierBranches;
      Scope inner;
      inner.env = sc.env;
      inner.env[f.var()] = rho;
      if (eval(f.lhs(), inner, cell, Anchor(f.var())) == ex) return ex;
    }
    return !ex;
  }

  const TimedAutomaton& A_;
  const ExecutionProvider* provider_;
  const Cells& cells_;
  EvalStats* stats_;
};

Cells makeCells(const PathEnvironment& Pi, const FormulaPtr& phi, const ExecutionProvider* provider,
                const std::vector<Rational>& extra) {
  return Cells(closePoints(basePoints(Pi, provider, extra), phi, Pi.horizon), Pi.horizon);
}

Scope topScope(const PathEnvironment& Pi) {
  Scope sc;
  for (const auto& [name, rho] : Pi.paths) sc.env[name] = &rho;
  return sc;
}

}  // namespace

bool AgreementBound::admits(const Rational& t) const {
  if (never) return false;
  if (value.isInfinite()) return true;
  return t < value.value() || (t == value.value() && closed);
}

AgreementBound agreementBound(const Execution& a, const Execution& b) {
  std::size_t n = std::min(a.segments.size(), b.segments.size());
  auto endOf = [](const Segment& s) { return AgreementBound{false, s.interval.R(), s.interval.rightClosed()}; };
  for (std::size_t j = 0; j < n; ++j) {
    const Segment& x = a.segments[j];
    const Segment& y = b.segments[j];
    bool sameEntry = j == 0 || a.transitions[j - 1] == b.transitions[j - 1];
    if (sameEntry && x.state == y.state && x.interval.L() == y.interval.L() &&
        x.interval.leftClosed() == y.interval.leftClosed()) {
      if (x.interval == y.interval) continue;
      const TimeBound& rx = x.interval.R();
      const TimeBound& ry = y.interval.R();
      if (rx < ry) return endOf(x);
      if (ry < rx) return endOf(y);
      return {false, rx, false};
    }
    if (j == 0) return {true, {}, false};
    return endOf(a.segments[j - 1]);
  }
  return endOf(a.segments[n - 1]);
}

RunListProvider::RunListProvider(std::vector<Execution> runs) : runs_(std::move(runs)) {
  for (const auto& r : runs_) addRunBreakpoints(r, breakpoints_);
  sortUnique(breakpoints_);
}

std::vector<const Execution*> RunListProvider::candidates(const Execution* anchor, const Rational& t) const {
  std::vector<const Execution*> out;
  if (!anchor) {
    for (const auto& r : runs_) out.push_back(&r);
    return out;
  }
  const std::vector<AgreementBound>* bounds;
  {
    std::lock_guard<std::mutex> lock(mu_);
    auto it = cache_.find(*anchor);
    if (it == cache_.end()) {
      std::vector<AgreementBound> bs;
      bs.reserve(runs_.size());
      for (const auto& r : runs_) bs.push_back(agreementBound(r, *anchor));
      it = cache_.emplace(*anchor, std::move(bs)).first;
    }
    bounds = &it->second;  // map nodes are stable
  }
  for (std::size_t i = 0; i < runs_.size(); ++i)
    if ((*bounds)[i].admits(t)) out.push_back(&runs_[i]);
  return out;
}

std::vector<const PointExecution*> PointRunListProvider::candidates(const PointExecution* anchor,
                                                                    const Rational& t) const {
  std::vector<const PointExecution*> out;
  for (const auto& r : runs_)
    if (!anchor || extendsFrom(r, *anchor, t)) out.push_back(&r);
  return out;
}

std::vector<Rational> criticalPoints(const PathEnvironment& Pi, const FormulaPtr& phi, const Interval& window,
                                     const std::vector<Rational>& extra) {
  std::vector<Rational> base = basePoints(Pi, nullptr, extra);
  base.push_back(window.L());
  if (!window.R().isInfinite()) base.push_back(window.R().value());
  auto pts = closePoints(base, phi, Pi.horizon);
  std::vector<Rational> inside;
  for (const auto& p : pts)
    if (contains(window, p)) inside.push_back(p);
  std::vector<Rational> out;
  for (std::size_t i = 0; i < inside.size(); ++i) {
    out.push_back(inside[i]);
    if (i + 1 < inside.size()) out.push_back(midpoint(inside[i], inside[i + 1]));
  }
  return out;
}

bool satInterval(const TimedAutomaton& A, const PathEnvironment& Pi, const Rational& t, const Anchor& dag,
                 const FormulaPtr& phi, const ExecutionProvider* provider, EvalStats* stats) {
  if (t < Rational(0)) throw EvalError("negative time " + t.str());
  if (!Pi.horizon.isInfinite() && !(t < Pi.horizon.value())) return false;
  Cells cells = makeCells(Pi, phi, provider, {t});
  IntervalEvaluator ev(A, provider, cells, stats);
  Scope sc = topScope(Pi);
  return ev.eval(phi, sc, cells.cellOf(t), dag);
}

std::vector<TruthCell> truthProfile(const TimedAutomaton& A, const PathEnvironment& Pi, const Anchor& dag,
                                    const FormulaPtr& phi, const ExecutionProvider* provider,
                                    const std::vector<Rational>& extra) {
  Cells cells = makeCells(Pi, phi, provider, extra);
  IntervalEvaluator ev(A, provider, cells, nullptr);
  Scope sc = topScope(Pi);
  std::vector<TruthCell> out;
  for (int c = 0; c < cells.count(); ++c) out.push_back({cells.interval(c), ev.eval(phi, sc, c, dag)});
  return out;
}

namespace {

class PointEvaluator {
 public:
  PointEvaluator(const PointTimedAutomaton& B, const PointExecutionProvider* provider, TimeBound N, EvalStats* stats)
      : B_(B), provider_(provider), N_(std::move(N)), stats_(stats) {}

  using Env = std::map<std::string, const PointExecution*>;

  bool eval(const Formula& f, const Env& env, const Rational& t, const Anchor& dag) {
    switch (f.kind()) {
      case K::Atom:
      case K::NegAtom: {
        const PointExecution* eta = path(env, f.var());
        int i = eta->stepAt(t);
        if (i < 0) return false;
        bool has = B_.edges[eta->steps[i].edge].event.count(f.prop()) > 0;
        return f.kind() == K::Atom ? has : !has;
      }
      case K::Or:
        return eval(*f.lhs(), env, t, dag) || eval(*f.rhs(), env, t, dag);
      case K::And:
        return eval(*f.lhs(), env, t, dag) && eval(*f.rhs(), env, t, dag);
      case K::Finally:
      case K::Globally: {
        bool fin = f.kind() == K::Finally;
        for (const auto& u : events(env, t))
          if (inWindow(f.interval(), t, u) && eval(*f.lhs(), env, u, dag) == fin) return fin;
        return !fin;
      }
      case K::Until: {
        for (const auto& u : events(env, t)) {
          if (inWindow(f.interval(), t, u) && eval(*f.rhs(), env, u, dag)) return true;
          if (!eval(*f.lhs(), env, u, dag)) return false;
        }
        return false;
      }
      case K::Exists:
      case K::Forall:
        return quantify(f, env, t, dag);
    }
    return false;
  }

 private:
  const PointExecution* path(const Env& env, const std::string& var) const {
    auto it = env.find(var);
    if (it == env.end()) throw EvalError("unbound path variable '" + var + "'");
    return it->second;
  }

  // Event points of the environment after t (and before N), ascending.
  std::vector<Rational> events(const Env& env, const Rational& t) const {
    std::vector<Rational> out;
    for (const auto& [name, eta] : env)
      for (const auto& s : eta->steps)
        if (t < s.time && (N_.isInfinite() || s.time < N_.value())) out.push_back(s.time);
    sortUnique(out);
    return out;
  }

  static bool inWindow(const Interval& I, const Rational& t, const Rational& u) { return contains(I, u - t); }

  bool quantify(const Formula& f, const Env& env, const Rational& t, const Anchor& dag) {
    bool ex = f.kind() == K::Exists;
    if (!provider_) throw EvalError("quantifier over '" + f.var() + "' needs an execution provider");
    std::vector<const PointExecution*> cands;
    if (!dag) {
      if (t != Rational(0)) return !ex;
      cands = provider_->candidates(nullptr, t);
      if (cands.empty() && stats_)
        stats_->warnings.push_back("no accepting run for the quantifier over '" + f.var() + "'");
    } else {
      const PointExecution* anchor = path(env, *dag);
      if (anchor->duration() < t) return !ex;
      cands = provider_->candidates(anchor, t);
    }
    for (const PointExecution* eta : cands) {
      if (stats_) ++stats_->quantifierBranches;
      Env inner = env;
      inner[f.var()] = eta;
      if (eval(*f.lhs(), inner, t, Anchor(f.var())) == ex) return ex;
    }
    return !ex;
  }

  const PointTimedAutomaton& B_;
  const PointExecutionProvider* provider_;
  TimeBound N_;
  EvalStats* stats_;
};

}  // namespace

bool satPoint(const PointTimedAutomaton& B, const PointEnvironment& Gamma, const Rational& t, const Anchor& dag,
              const FormulaPtr& phi, const PointExecutionProvider* provider, EvalStats* stats) {
  if (t < Rational(0)) throw EvalError("negative time " + t.str());
  if (!Gamma.horizon.isInfinite() && !(t < Gamma.horizon.value())) return false;
  PointEvaluator ev(B, provider, Gamma.horizon, stats);
  PointEvaluator::Env env;
  for (const auto& [name, eta] : Gamma.paths) env[name] = &eta;
  return ev.eval(*phi, env, t, dag);
}

PathEnvironment chiEnvironment(const PointTimedAutomaton& B, const PointEnvironment& Gamma) {
  PathEnvironment Pi;
  Pi.horizon = Gamma.horizon;
  for (const auto& [name, eta] : Gamma.paths) Pi.paths.emplace(name, chi(B, eta));
  return Pi;
}

}  // namespace hyperclock
