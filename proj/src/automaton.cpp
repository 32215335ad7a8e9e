#include "hyperclock/automaton.hpp"

#include <algorithm>
#include <sstream>

namespace hyperclock {

bool TimedAutomaton::hasState(const std::string& v) const {
  return std::find(states.begin(), states.end(), v) != states.end();
}

bool TimedAutomaton::hasClock(const std::string& x) const {
  return std::find(clocks.begin(), clocks.end(), x) != clocks.end();
}

ConstraintPtr TimedAutomaton::beta(const std::string& v, const std::string& x) const {
  auto it = stateConstraints.find({v, x});
  return it == stateConstraints.end() ? ClockConstraint::top() : it->second;
}

const std::set<std::string>& TimedAutomaton::label(const std::string& v) const {
  static const std::set<std::string> empty;
  auto it = labels.find(v);
  return it == labels.end() ? empty : it->second;
}

void TimedAutomaton::check() const {
  auto fail = [](const std::string& m) { throw std::invalid_argument(m); };
  std::set<std::string> seen;
  for (const auto& v : states)
    if (!seen.insert(v).second) fail("duplicate state '" + v + "'");
  seen.clear();
  for (const auto& x : clocks)
    if (!seen.insert(x).second) fail("duplicate clock '" + x + "'");
  if (states.empty()) fail("automaton has no states");
  for (const auto& v : initial)
    if (!hasState(v)) fail("initial state '" + v + "' is not declared");
  for (const auto& v : final)
    if (!hasState(v)) fail("final state '" + v + "' is not declared");
  std::set<std::string> props(propositions.begin(), propositions.end());
  for (const auto& [v, ps] : labels) {
    if (!hasState(v)) fail("label for undeclared state '" + v + "'");
    for (const auto& p : ps)
      if (!props.count(p)) fail("label '" + p + "' of state '" + v + "' is not a declared proposition");
  }
  for (const auto& [key, c] : stateConstraints) {
    if (!hasState(key.first)) fail("state constraint for undeclared state '" + key.first + "'");
    if (!hasClock(key.second)) fail("state constraint for undeclared clock '" + key.second + "'");
    for (const auto& x : c->clocks())
      if (x != key.second)
        fail("state constraint of (" + key.first + "," + key.second + ") mentions clock '" + x + "'");
  }
  for (std::size_t i = 0; i < edges.size(); ++i) {
    const Edge& e = edges[i];
    std::string id = "edge " + std::to_string(i);
    if (!hasState(e.from) || !hasState(e.to)) fail(id + " references an undeclared state");
    for (const auto& x : e.resets)
      if (!hasClock(x)) fail(id + " resets undeclared clock '" + x + "'");
    for (const auto& g : e.guards) {
      auto cs = g->clocks();
      if (cs.size() > 1) fail(id + " has a guard over several clocks: " + g->str());
      for (const auto& x : cs)
        if (!hasClock(x)) fail(id + " guards undeclared clock '" + x + "'");
    }
  }
}

std::vector<Rational> TimedAutomaton::constants() const {
  std::vector<Rational> out;
  for (const auto& [k, c] : stateConstraints) c->collectConstants(out);
  for (const auto& e : edges)
    for (const auto& g : e.guards) g->collectConstants(out);
  return out;
}

TimedAutomaton TimedAutomaton::scaled(std::int64_t factor) const {
  TimedAutomaton B = *this;
  for (auto& [k, c] : B.stateConstraints) c = scaleConstraint(c, factor);
  for (auto& e : B.edges)
    for (auto& g : e.guards) g = scaleConstraint(g, factor);
  return B;
}

bool Execution::operator<(const Execution& o) const {
  if (segments.size() != o.segments.size()) return segments.size() < o.segments.size();
  for (std::size_t i = 0; i < segments.size(); ++i) {
    const auto& a = segments[i];
    const auto& b = o.segments[i];
    if (a.interval != b.interval) return a.interval < b.interval;
    if (a.state != b.state) return a.state < b.state;
  }
  return transitions < o.transitions;
}

bool Execution::contains(const Rational& t) const { return segmentAt(t) >= 0; }

int Execution::segmentAt(const Rational& t) const {
  for (std::size_t i = 0; i < segments.size(); ++i)
    if (hyperclock::contains(segments[i].interval, t)) return static_cast<int>(i);
  return -1;
}

bool Execution::boundedBy(const Rational& N) const {
  const TimeBound& r = end();
  if (r.isInfinite()) return false;
  return r.value() < N || (r.value() == N && !segments.back().interval.rightClosed());
}

std::string Execution::str() const {
  std::string s;
  for (std::size_t i = 0; i < segments.size(); ++i) {
    if (i > 0) s += " -e" + std::to_string(transitions[i - 1]) + "-> ";
    s += "(" + segments[i].state + "," + segments[i].interval.str() + ")";
  }
  return s;
}

std::string kindName(Violation::Kind k) {
  switch (k) {
    case Violation::Kind::Shape: return "shape";
    case Violation::Kind::Initial: return "initial";
    case Violation::Kind::Consecution: return "consecution";
    case Violation::Kind::EdgeMembership: return "edge-membership";
    case Violation::Kind::StateConstraint: return "state-constraint";
    case Violation::Kind::Guard: return "guard";
  }
  return "?";
}

namespace {

// Earliest clock value u in the set {start + (t - L) : t in I} with !psi(u), if any.
// psi is piecewise constant between its constants, so checking the interval endpoints,
// every constant inside, and one point in each gap is exact.
std::optional<Rational> firstFailure(const ClockConstraint& psi, const Rational& start, const Interval& I) {
  TimeBound len = I.R().isInfinite() ? TimeBound::infinity() : TimeBound(I.R().value() - I.L());
  Interval J(start, len + start, I.leftClosed(), I.rightClosed());
  std::vector<Rational> cs;
  psi.collectConstants(cs);
  std::vector<Rational> pts{J.L()};
  for (const auto& c : cs)
    if (J.L() < c && c < J.R()) pts.push_back(c);
  if (!J.R().isInfinite()) pts.push_back(J.R().value());
  std::sort(pts.begin(), pts.end());
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  std::vector<Rational> probes;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    probes.push_back(pts[i]);
    if (i + 1 < pts.size()) probes.push_back(midpoint(pts[i], pts[i + 1]));
  }
  if (J.R().isInfinite()) probes.push_back(pts.back() + 1);
  for (const auto& u : probes)
    if (contains(J, u) && !evalConstraintAt(psi, u)) return u;
  return std::nullopt;
}

}  // namespace

std::vector<ClockValuation> entryValuations(const TimedAutomaton& A, const Execution& rho) {
  std::vector<ClockValuation> mus;
  ClockValuation mu;
  for (const auto& x : A.clocks) mu[x] = 0;
  mus.push_back(mu);
  for (std::size_t i = 0; i + 1 < rho.segments.size(); ++i) {
    const Interval& I = rho.segments[i].interval;
    Rational d = I.R().isInfinite() ? Rational(0) : I.R().value() - I.L();
    const Edge& e = A.edges.at(rho.transitions.at(i));
    for (auto& [x, v] : mu) v = e.resets.count(x) ? Rational(0) : v + d;
    mus.push_back(mu);
  }
  return mus;
}

std::vector<Violation> validateExecution(const TimedAutomaton& A, const Execution& rho) {
  std::vector<Violation> out;
  using K = Violation::Kind;
  if (rho.segments.empty()) {
    out.push_back({K::Shape, 0, std::nullopt, "", "execution has no segments"});
    return out;
  }
  if (rho.transitions.size() + 1 != rho.segments.size()) {
    out.push_back({K::Shape, 0, std::nullopt, "", "transition count must be segment count minus one"});
    return out;
  }
  for (std::size_t i = 0; i < rho.segments.size(); ++i)
    if (!A.hasState(rho.segments[i].state)) {
      out.push_back({K::Shape, int(i), std::nullopt, "", "unknown state '" + rho.segments[i].state + "'"});
      return out;
    }
  for (std::size_t i = 0; i < rho.transitions.size(); ++i)
    if (rho.transitions[i] < 0 || rho.transitions[i] >= int(A.edges.size())) {
      out.push_back({K::Shape, int(i), std::nullopt, "", "unknown edge index"});
      return out;
    }
  const Interval& first = rho.segments[0].interval;
  if (first.L() != Rational(0) || !first.leftClosed())
    out.push_back({K::Initial, 0, std::nullopt, "", "first interval " + first.str() + " does not contain 0"});
  if (!A.initial.count(rho.segments[0].state))
    out.push_back({K::Initial, 0, Rational(0), "", "state '" + rho.segments[0].state + "' is not initial"});
  bool timeline = true;
  for (std::size_t i = 0; i + 1 < rho.segments.size(); ++i) {
    const Interval& a = rho.segments[i].interval;
    const Interval& b = rho.segments[i + 1].interval;
    if (!consecutive(a, b)) {
      timeline = false;
      out.push_back({K::Consecution, int(i), std::nullopt, "",
                     "intervals " + a.str() + " and " + b.str() + " are not consecutive"});
    }
    const Edge& e = A.edges[rho.transitions[i]];
    if (e.from != rho.segments[i].state || e.to != rho.segments[i + 1].state)
      out.push_back({K::EdgeMembership, int(i), a.R().isInfinite() ? std::nullopt : std::optional(a.R().value()),
                     "", "edge " + std::to_string(rho.transitions[i]) + " does not connect '" +
                             rho.segments[i].state + "' to '" + rho.segments[i + 1].state + "'"});
  }
  if (!timeline) return out;
  auto mus = entryValuations(A, rho);
  for (std::size_t i = 0; i < rho.segments.size(); ++i) {
    const Segment& s = rho.segments[i];
    for (const auto& x : A.clocks) {
      ConstraintPtr b = A.beta(s.state, x);
      if (auto u = firstFailure(*b, mus[i].at(x), s.interval)) {
        Rational t = *u - mus[i].at(x) + s.interval.L();
        out.push_back({K::StateConstraint, int(i), t, b->str(),
                       "clock " + x + " = " + u->str() + " violates " + b->str() + " in state '" + s.state + "'"});
      }
    }
  }
  for (std::size_t i = 0; i + 1 < rho.segments.size(); ++i) {
    const Interval& I = rho.segments[i].interval;
    Rational t = I.R().value();
    const Edge& e = A.edges[rho.transitions[i]];
    for (const auto& g : e.guards)
      for (const auto& x : g->clocks()) {
        Rational val = mus[i].at(x) + t - I.L();
        if (!evalConstraintAt(*g, val))
          out.push_back({K::Guard, int(i), t, g->str(),
                         "guard " + g->str() + " fails with " + x + " = " + val.str()});
      }
  }
  return out;
}

bool isAccepting(const TimedAutomaton& A, const Execution& rho) {
  return !rho.segments.empty() && A.final.count(rho.segments.back().state) > 0;
}

bool isValidAccepting(const TimedAutomaton& A, const Execution& rho) {
  return isAccepting(A, rho) && validateExecution(A, rho).empty();
}

ClockValuation clockValuationAt(const TimedAutomaton& A, const Execution& rho, const Rational& t) {
  int i = rho.segmentAt(t);
  if (i < 0) throw DomainError("time " + t.str() + " is outside the execution");
  ClockValuation mu = entryValuations(A, rho)[i];
  for (auto& [x, v] : mu) v = v + t - rho.segments[i].interval.L();
  return mu;
}

Execution prefix(const Execution& rho, const Rational& t) {
  int i = rho.segmentAt(t);
  if (i < 0) throw DomainError("time " + t.str() + " is outside the execution");
  Execution p;
  p.segments.assign(rho.segments.begin(), rho.segments.begin() + i + 1);
  p.transitions.assign(rho.transitions.begin(), rho.transitions.begin() + i);
  p.segments.back().interval = *truncate(rho.segments[i].interval, t);
  return p;
}

std::string MonadicPredicate::str() const {
  switch (kind) {
    case Kind::State: return "v:" + name;
    case Kind::TransMinus: return "tminus:" + std::to_string(edge);
    case Kind::TransPlus: return "tplus:" + std::to_string(edge);
    case Kind::ResetMinus: return "rminus:" + name;
    case Kind::ResetPlus: return "rplus:" + name;
    case Kind::EventMark: return "mark";
  }
  return "";
}

MonadicPredicate MonadicPredicate::parse(const std::string& s) {
  if (s == "mark") return {Kind::EventMark, "", -1};
  auto colon = s.find(':');
  if (colon == std::string::npos) throw std::invalid_argument("malformed predicate '" + s + "'");
  std::string tag = s.substr(0, colon), rest = s.substr(colon + 1);
  if (rest.empty()) throw std::invalid_argument("malformed predicate '" + s + "'");
  if (tag == "v") return state(rest);
  if (tag == "rminus") return rminus(rest);
  if (tag == "rplus") return rplus(rest);
  if (tag == "tminus" || tag == "tplus") {
    for (char c : rest)
      if (!std::isdigit(static_cast<unsigned char>(c))) throw std::invalid_argument("malformed predicate '" + s + "'");
    int e = std::stoi(rest);
    return tag == "tminus" ? tminus(e) : tplus(e);
  }
  throw std::invalid_argument("unknown predicate kind in '" + s + "'");
}

std::vector<std::string> predicateAlphabet(const TimedAutomaton& A) {
  std::vector<std::string> out;
  for (const auto& v : A.states) out.push_back(MonadicPredicate::state(v).str());
  for (std::size_t e = 0; e < A.edges.size(); ++e) {
    out.push_back(MonadicPredicate::tminus(int(e)).str());
    out.push_back(MonadicPredicate::tplus(int(e)).str());
  }
  for (const auto& x : A.clocks) {
    out.push_back(MonadicPredicate::rminus(x).str());
    out.push_back(MonadicPredicate::rplus(x).str());
  }
  return out;
}

Flow::Flow(TimeBound horizon, std::vector<FlowSegment> segments) : horizon_(std::move(horizon)) {
  std::vector<FlowSegment> segs;
  for (auto& s : segments)
    if (!s.preds.empty()) segs.push_back(std::move(s));
  std::sort(segs.begin(), segs.end(),
            [](const FlowSegment& a, const FlowSegment& b) { return a.interval < b.interval; });
  for (std::size_t i = 0; i < segs.size(); ++i) {
    const Interval& I = segs[i].interval;
    if (!horizon_.isInfinite()) {
      const Rational& N = horizon_.value();
      if (I.R().isInfinite() || N < I.R().value() || (I.R().value() == N && I.rightClosed()))
        throw std::invalid_argument("flow segment " + I.str() + " exceeds horizon " + horizon_.str());
    }
    if (i + 1 < segs.size()) {
      const Interval& J = segs[i + 1].interval;
      bool overlap = J.L() < I.R() || (!I.R().isInfinite() && I.R().value() == J.L() && I.rightClosed() &&
                                       J.leftClosed());
      if (overlap) throw std::invalid_argument("overlapping flow segments " + I.str() + " and " + J.str());
    }
  }
  for (auto& s : segs) {
    if (!segs_.empty() && segs_.back().preds == s.preds && consecutive(segs_.back().interval, s.interval)) {
      const Interval& a = segs_.back().interval;
      segs_.back().interval = Interval(a.L(), s.interval.R(), a.leftClosed(), s.interval.rightClosed());
    } else {
      segs_.push_back(std::move(s));
    }
  }
}

PredSet Flow::at(const Rational& t) const {
  for (const auto& s : segs_) {
    if (t < s.interval.L()) break;
    if (contains(s.interval, t)) return s.preds;
  }
  return {};
}

std::vector<Rational> Flow::breakpoints() const {
  std::vector<Rational> out;
  for (const auto& s : segs_) {
    out.push_back(s.interval.L());
    if (!s.interval.R().isInfinite()) out.push_back(s.interval.R().value());
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

std::set<std::string> Flow::predicates() const {
  std::set<std::string> out;
  for (const auto& s : segs_) out.insert(s.preds.begin(), s.preds.end());
  return out;
}

bool Flow::operator<(const Flow& o) const {
  if (segs_.size() != o.segs_.size()) return segs_.size() < o.segs_.size();
  for (std::size_t i = 0; i < segs_.size(); ++i) {
    if (segs_[i].interval != o.segs_[i].interval) return segs_[i].interval < o.segs_[i].interval;
    if (segs_[i].preds != o.segs_[i].preds) return segs_[i].preds < o.segs_[i].preds;
  }
  return horizon_ < o.horizon_;
}

namespace {

// Splits the timeline at every breakpoint of both flows and unions the labels.
std::vector<FlowSegment> refine(const std::vector<const Flow*>& flows) {
  std::vector<Rational> pts;
  bool unbounded = false;
  for (const Flow* f : flows) {
    for (const auto& s : f->segments()) {
      pts.push_back(s.interval.L());
      if (s.interval.R().isInfinite()) unbounded = true;
      else pts.push_back(s.interval.R().value());
    }
  }
  std::sort(pts.begin(), pts.end());
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  std::vector<FlowSegment> out;
  auto labelAt = [&](const Rational& t) {
    PredSet ps;
    for (const Flow* f : flows) {
      auto s = f->at(t);
      ps.insert(s.begin(), s.end());
    }
    return ps;
  };
  for (std::size_t i = 0; i < pts.size(); ++i) {
    out.push_back({Interval::point(pts[i]), labelAt(pts[i])});
    if (i + 1 < pts.size())
      out.push_back({Interval(pts[i], pts[i + 1], false, false), labelAt(midpoint(pts[i], pts[i + 1]))});
  }
  if (unbounded && !pts.empty())
    out.push_back({Interval(pts.back(), TimeBound::infinity(), false, false), labelAt(pts.back() + 1)});
  return out;
}

}  // namespace

Flow Flow::merge(const Flow& a, const Flow& b) {
  if (a.horizon() != b.horizon()) throw std::invalid_argument("merging flows with different horizons");
  return Flow(a.horizon(), refine({&a, &b}));
}

Flow Flow::suffixed(const std::string& suffix) const {
  std::vector<FlowSegment> segs;
  for (const auto& s : segs_) {
    PredSet ps;
    for (const auto& p : s.preds) ps.insert(p + suffix);
    segs.push_back({s.interval, ps});
  }
  return Flow(horizon_, segs);
}

std::string Flow::str() const {
  std::string s = "horizon " + horizon_.str() + ":";
  for (const auto& seg : segs_) {
    s += " " + seg.interval.str() + "{";
    bool first = true;
    for (const auto& p : seg.preds) {
      if (!first) s += ",";
      s += p;
      first = false;
    }
    s += "}";
  }
  return s;
}

Flow encodeFlow(const TimedAutomaton& A, const Execution& rho, TimeBound horizon, bool requireAccepting) {
  auto vs = validateExecution(A, rho);
  if (!vs.empty()) throw EncodingError("cannot encode invalid execution: " + vs[0].message);
  if (requireAccepting && !isAccepting(A, rho)) throw EncodingError("cannot encode non-accepting execution");
  std::vector<FlowSegment> segs;
  std::size_t n = rho.segments.size();
  for (std::size_t i = 0; i < n; ++i) {
    const Segment& s = rho.segments[i];
    const Interval& I = s.interval;
    PredSet base{MonadicPredicate::state(s.state).str()};
    if (I.singular()) {
      PredSet ps = base;
      if (i > 0) {
        const Edge& e = A.edges[rho.transitions[i - 1]];
        ps.insert(MonadicPredicate::tminus(rho.transitions[i - 1]).str());
        for (const auto& x : e.resets) ps.insert(MonadicPredicate::rminus(x).str());
      }
      if (i + 1 < n) {
        const Edge& e = A.edges[rho.transitions[i]];
        ps.insert(MonadicPredicate::tplus(rho.transitions[i]).str());
        for (const auto& x : e.resets) ps.insert(MonadicPredicate::rplus(x).str());
      }
      segs.push_back({I, ps});
      continue;
    }
    if (I.leftClosed()) {
      PredSet ps = base;
      if (i > 0) {
        const Edge& e = A.edges[rho.transitions[i - 1]];
        ps.insert(MonadicPredicate::tminus(rho.transitions[i - 1]).str());
        for (const auto& x : e.resets) ps.insert(MonadicPredicate::rminus(x).str());
      }
      segs.push_back({Interval::point(I.L()), ps});
    }
    segs.push_back({Interval(I.L(), I.R(), false, false), base});
    if (I.rightClosed()) {
      PredSet ps = base;
      if (i + 1 < n) {
        const Edge& e = A.edges[rho.transitions[i]];
        ps.insert(MonadicPredicate::tplus(rho.transitions[i]).str());
        for (const auto& x : e.resets) ps.insert(MonadicPredicate::rplus(x).str());
      }
      segs.push_back({Interval::point(I.R().value()), ps});
    }
  }
  return Flow(horizon, segs);
}

std::string DecodeError::str() const {
  std::string s = "property " + std::to_string(property);
  if (time) s += " at " + time->str();
  return s + ": " + message;
}

namespace {

struct Classified {
  std::vector<std::string> states;
  std::vector<int> tminus, tplus;
  std::set<std::string> rminus, rplus;
  bool mark = false;
};

Classified classify(const PredSet& ps) {
  Classified c;
  for (const auto& p : ps) {
    MonadicPredicate m = MonadicPredicate::parse(p);
    switch (m.kind) {
      case MonadicPredicate::Kind::State: c.states.push_back(m.name); break;
      case MonadicPredicate::Kind::TransMinus: c.tminus.push_back(m.edge); break;
      case MonadicPredicate::Kind::TransPlus: c.tplus.push_back(m.edge); break;
      case MonadicPredicate::Kind::ResetMinus: c.rminus.insert(m.name); break;
      case MonadicPredicate::Kind::ResetPlus: c.rplus.insert(m.name); break;
      case MonadicPredicate::Kind::EventMark: c.mark = true; break;
    }
  }
  return c;
}

}  // namespace

DecodeResult decodeFlow(const TimedAutomaton& A, const Flow& f) {
  DecodeResult res;
  auto fail = [&](int prop, std::optional<Rational> t, const std::string& msg) {
    res.error = DecodeError{prop, t, msg};
    return res;
  };
  const auto& segs = f.segments();
  if (segs.empty()) return fail(1, Rational(0), "no state at time 0");
  std::vector<Classified> cls;
  for (const auto& s : segs) {
    try {
      cls.push_back(classify(s.preds));
    } catch (const std::invalid_argument& e) {
      return fail(1, s.interval.L(), e.what());
    }
  }
  for (std::size_t i = 0; i < segs.size(); ++i) {
    const Classified& c = cls[i];
    const Interval& I = segs[i].interval;
    for (const auto& v : c.states)
      if (!A.hasState(v)) return fail(1, I.L(), "unknown state '" + v + "'");
    for (int e : c.tminus)
      if (e < 0 || e >= int(A.edges.size())) return fail(4, I.L(), "unknown edge " + std::to_string(e));
    for (int e : c.tplus)
      if (e < 0 || e >= int(A.edges.size())) return fail(4, I.L(), "unknown edge " + std::to_string(e));
    for (const auto& x : c.rminus)
      if (!A.hasClock(x)) return fail(6, I.L(), "unknown clock '" + x + "'");
    for (const auto& x : c.rplus)
      if (!A.hasClock(x)) return fail(6, I.L(), "unknown clock '" + x + "'");
    if (c.mark) return fail(1, I.L(), "event mark is not an automaton predicate");
    if (c.states.size() > 1) return fail(1, I.L(), "unique state violated: several states at one time");
    if (c.states.empty()) {
      if (!c.tminus.empty() || !c.tplus.empty()) return fail(4, I.L(), "transition without a state");
      return fail(6, I.L(), "reset without a state");
    }
  }
  // Support must be a single interval starting at 0.
  if (segs[0].interval.L() != Rational(0) || !segs[0].interval.leftClosed())
    return fail(1, Rational(0), "no state at time 0");
  for (std::size_t i = 0; i + 1 < segs.size(); ++i)
    if (segs[i].interval.R().isInfinite() || !consecutive(segs[i].interval, segs[i + 1].interval))
      return fail(1, segs[i + 1].interval.L(), "state support has a gap");
  if (!A.initial.count(cls[0].states[0])) return fail(2, Rational(0), "state at time 0 is not initial");

  Execution rho;
  std::string curState = cls[0].states[0];
  Rational curL = 0;
  bool curLc = true;
  for (std::size_t i = 0; i < segs.size(); ++i) {
    const Classified& c = cls[i];
    const Interval& I = segs[i].interval;
    const std::string& v = c.states[0];
    Rational t = I.L();
    if (c.tminus.size() > 1 || c.tplus.size() > 1) return fail(3, t, "several transitions of one kind at a time");
    bool hasT = !c.tminus.empty() || !c.tplus.empty();
    if (!I.singular()) {
      if (hasT) return fail(3, t, "transition predicates on a non-degenerate interval");
      if (!c.rminus.empty() || !c.rplus.empty()) return fail(6, t, "resets without a transition");
      if (v != curState) return fail(5, t, "state changes from '" + curState + "' to '" + v + "' without a transition");
      continue;
    }
    if (!c.tminus.empty()) {
      int ei = c.tminus[0];
      const Edge& e = A.edges[ei];
      if (e.to != v) return fail(4, t, "T- of edge " + std::to_string(ei) + " outside its target state");
      if (i == 0) return fail(4, t, "T- at time 0 has no preceding state");
      if (e.from != curState) return fail(4, t, "T- of edge " + std::to_string(ei) + " not preceded by its source");
      if (c.rminus != e.resets) return fail(4, t, "R- predicates differ from the resets of edge " + std::to_string(ei));
      rho.segments.push_back({curState, Interval(curL, t, curLc, false)});
      rho.transitions.push_back(ei);
      curState = v;
      curL = t;
      curLc = true;
    } else {
      if (!c.rminus.empty()) return fail(6, t, "R- without a T- transition");
      if (v != curState)
        return fail(5, t, "state changes from '" + curState + "' to '" + v + "' without a transition");
    }
    if (!c.tplus.empty()) {
      int ei = c.tplus[0];
      const Edge& e = A.edges[ei];
      if (e.from != v) return fail(4, t, "T+ of edge " + std::to_string(ei) + " outside its source state");
      if (c.rplus != e.resets) return fail(4, t, "R+ predicates differ from the resets of edge " + std::to_string(ei));
      if (i + 1 >= segs.size() || segs[i + 1].interval.leftClosed() || cls[i + 1].states[0] != e.to)
        return fail(4, t, "T+ of edge " + std::to_string(ei) + " not followed by its target");
      rho.segments.push_back({curState, Interval(curL, t, curLc, true)});
      rho.transitions.push_back(ei);
      curState = e.to;
      curL = t;
      curLc = false;
    } else if (!c.rplus.empty()) {
      return fail(6, t, "R+ without a T+ transition");
    } else if (i + 1 < segs.size() && cls[i + 1].states[0] != v && cls[i + 1].tminus.empty()) {
      return fail(5, t, "state changes after '" + v + "' without a transition");
    }
  }
  const Interval& last = segs.back().interval;
  try {
    rho.segments.push_back({curState, Interval(curL, last.R(), curLc, last.rightClosed())});
  } catch (const std::invalid_argument& e) {
    return fail(1, curL, e.what());
  }
  auto vs = validateExecution(A, rho);
  for (const auto& vio : vs) {
    if (vio.kind == Violation::Kind::StateConstraint) return fail(9, vio.time, vio.message);
    if (vio.kind == Violation::Kind::Guard) return fail(10, vio.time, vio.message);
    return fail(4, vio.time, vio.message);
  }
  if (!isAccepting(A, rho)) return fail(11, std::nullopt, "last state '" + curState + "' is not final");
  Flow again = encodeFlow(A, rho, f.horizon());
  if (again != f) return fail(0, std::nullopt, "re-encoding differs from the input flow");
  res.execution = std::move(rho);
  return res;
}

}  // namespace hyperclock
