#include "hyperclock/engine.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <random>
#include <thread>

namespace hyperclock {

void checkBudget(const GridBudget& b) {
  if (b.granularity < 1) throw std::invalid_argument("granularity must be at least 1");
  if (b.maxTransitions < 0) throw std::invalid_argument("max transitions must be nonnegative");
  if (!(Rational(0) < b.horizon)) throw std::invalid_argument("horizon must be positive");
  if (b.jobs < 1) throw std::invalid_argument("jobs must be at least 1");
}

namespace {

std::vector<Rational> endpointTimes(const Execution& r) {
  std::vector<Rational> out;
  for (const auto& s : r.segments) {
    out.push_back(s.interval.L());
    out.push_back(s.interval.R().isInfinite() ? Rational(-1) : s.interval.R().value());
  }
  return out;
}

std::vector<int> flags(const Execution& r) {
  std::vector<int> out;
  for (const auto& s : r.segments) out.push_back(int(s.interval.leftClosed()) * 2 + int(s.interval.rightClosed()));
  return out;
}

std::vector<Rational> grid(const GridBudget& b) {
  std::vector<Rational> out;
  for (std::int64_t j = 0; Rational(j, b.granularity) <= b.horizon; ++j) out.push_back(Rational(j, b.granularity));
  return out;
}

class RunSearch {
 public:
  RunSearch(const TimedAutomaton& A, const GridBudget& b) : A_(A), b_(b), grid_(grid(b)) {}

  struct Task {
    std::string state;
    std::size_t rIndex;
    bool rc;
  };

  std::vector<Task> tasks() const {
    std::vector<Task> out;
    for (const auto& v : A_.states)
      if (A_.initial.count(v))
        for (std::size_t r = 0; r < grid_.size(); ++r)
          for (bool rc : {true, false}) out.push_back({v, r, rc});
    return out;
  }

  void runTask(const Task& t, std::vector<Execution>& out) {
    Execution prefix;
    if (!place(prefix, t.state, Rational(0), true, grid_[t.rIndex], t.rc)) return;
    after(prefix, out);
  }

 private:
  const TimedAutomaton& A_;
  const GridBudget& b_;
  std::vector<Rational> grid_;

  // Appends (v, L..R) when it is nonempty, bounded and keeps the prefix valid.
  bool place(Execution& prefix, const std::string& v, const Rational& L, bool lc, const Rational& R, bool rc) {
    if (R < L) return false;
    if (R == L && !(lc && rc)) return false;
    if (R == b_.horizon && rc) return false;
    prefix.segments.push_back({v, Interval(L, R, lc, rc)});
    if (!validateExecution(A_, prefix).empty()) {
      prefix.segments.pop_back();
      return false;
    }
    return true;
  }

  void after(Execution& prefix, std::vector<Execution>& out) {
    const Segment& last = prefix.segments.back();
    if (A_.final.count(last.state)) out.push_back(prefix);
    if (static_cast<int>(prefix.transitions.size()) >= b_.maxTransitions) {
      prefix.segments.pop_back();
      return;
    }
    Rational L = last.interval.R().value();
    bool lc = !last.interval.rightClosed();
    std::string from = last.state;
    if (L < b_.horizon) {
      for (std::size_t e = 0; e < A_.edges.size(); ++e) {
        if (A_.edges[e].from != from) continue;
        prefix.transitions.push_back(static_cast<int>(e));
        for (const auto& R : grid_) {
          if (R < L) continue;
          bool anyFail = false;
          for (bool rc : {true, false}) {
            if (R == L && !(lc && rc)) continue;
            if (R == b_.horizon && rc) continue;
            if (place(prefix, A_.edges[e].to, L, lc, R, rc))
              after(prefix, out);
            else
              anyFail = true;
          }
          // Longer segments only add clock values, so a failure here persists.
          if (anyFail) break;
        }
        prefix.transitions.pop_back();
      }
    }
    prefix.segments.pop_back();
  }
};

}  // namespace

bool witnessOrder(const Execution& a, const Execution& b) {
  if (a.transitions.size() != b.transitions.size()) return a.transitions.size() < b.transitions.size();
  auto ta = endpointTimes(a), tb = endpointTimes(b);
  if (ta != tb) return ta < tb;
  auto fa = flags(a), fb = flags(b);
  if (fa != fb) return fa < fb;
  return a < b;
}

bool witnessOrder(const PointExecution& a, const PointExecution& b) {
  if (a.steps.size() != b.steps.size()) return a.steps.size() < b.steps.size();
  return a < b;
}

std::vector<Execution> enumerateRuns(const TimedAutomaton& A, const GridBudget& b,
                                     const std::optional<RunAnchor>& anchor) {
  checkBudget(b);
  RunSearch search(A, b);
  auto tasks = search.tasks();
  std::vector<std::vector<Execution>> parts(tasks.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    RunSearch local(A, b);
    for (std::size_t i = next++; i < tasks.size(); i = next++) local.runTask(tasks[i], parts[i]);
  };
  int jobs = std::min<int>(b.jobs, std::max<std::size_t>(1, tasks.size()));
  if (jobs <= 1) {
    worker();
  } else {
    std::vector<std::thread> ts;
    for (int j = 0; j < jobs; ++j) ts.emplace_back(worker);
    for (auto& t : ts) t.join();
  }
  std::vector<Execution> out;
  for (auto& p : parts)
    for (auto& r : p)
      if (!anchor || agreementBound(r, anchor->run).admits(anchor->time)) out.push_back(std::move(r));
  std::sort(out.begin(), out.end(), [](const Execution& x, const Execution& y) { return witnessOrder(x, y); });
  return out;
}

std::vector<PointExecution> enumeratePointRuns(const PointTimedAutomaton& B, const GridBudget& b) {
  checkBudget(b);
  std::vector<Rational> times;
  for (const auto& t : grid(b))
    if (t < b.horizon) times.push_back(t);
  std::vector<PointExecution> out;
  PointExecution cur;
  std::function<void(std::size_t, const std::string&)> rec = [&](std::size_t from, const std::string& state) {
    if (!cur.steps.empty() && B.final.count(state)) out.push_back(cur);
    if (static_cast<int>(cur.steps.size()) >= b.maxTransitions) return;
    for (std::size_t e = 0; e < B.edges.size(); ++e) {
      if (B.edges[e].from != state) continue;
      for (std::size_t i = from; i < times.size(); ++i) {
        cur.steps.push_back({static_cast<int>(e), times[i]});
        if (validatePointExecution(B, cur).empty()) rec(i + 1, B.edges[e].to);
        cur.steps.pop_back();
      }
    }
  };
  rec(0, B.start);
  std::sort(out.begin(), out.end(), [](const PointExecution& x, const PointExecution& y) { return witnessOrder(x, y); });
  return out;
}

std::string verdictName(VerdictKind k) {
  switch (k) {
    case VerdictKind::Holds: return "holds";
    case VerdictKind::Fails: return "fails";
    case VerdictKind::HoldsOnGrid: return "holds-on-grid";
    case VerdictKind::FailsWithWitness: return "fails-with-witness";
    case VerdictKind::FailsOnGrid: return "fails-on-grid";
  }
  return "";
}

namespace {

double since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

void requireSentence(const FormulaPtr& phi) {
  if (!isSentence(phi)) throw std::invalid_argument("verification needs a sentence; free variables remain");
  auto errs = wellFormednessErrors(phi);
  if (!errs.empty()) throw std::invalid_argument(errs[0]);
}

// Walks the outermost universal quantifiers (and false conjuncts) down to a false matrix.
template <class Env, class Run, class Sat, class Cands>
std::vector<std::pair<std::string, Run>> extractWitness(FormulaPtr phi, Env& env, Anchor& dag, Sat sat,
                                                        Cands candidates, bool& confirmed) {
  std::vector<std::pair<std::string, Run>> out;
  for (;;) {
    if (phi->kind() == Formula::Kind::And) {
      phi = !sat(env, dag, phi->lhs()) ? phi->lhs() : phi->rhs();
      continue;
    }
    if (phi->kind() != Formula::Kind::Forall) break;
    bool found = false;
    for (const Run* r : candidates(env, dag)) {
      env.paths[phi->var()] = *r;
      if (!sat(env, Anchor{phi->var()}, phi->lhs())) {
        out.push_back({phi->var(), *r});
        dag = phi->var();
        phi = phi->lhs();
        found = true;
        break;
      }
      env.paths.erase(phi->var());
    }
    if (!found) break;
  }
  confirmed = !sat(env, dag, phi);
  return out;
}

}  // namespace

Verdict verify(const TimedAutomaton& A, const FormulaPtr& phi, const GridBudget& b) {
  requireSentence(phi);
  checkBudget(b);
  auto t0 = std::chrono::steady_clock::now();
  Verdict v;
  v.budget = b;
  v.route = "interval";
  RunListProvider provider(enumerateRuns(A, b));
  v.runsEnumerated = static_cast<long long>(provider.runs().size());
  PathEnvironment Pi;
  Pi.horizon = b.horizon;
  EvalStats stats;
  bool holds = satInterval(A, Pi, 0, std::nullopt, phi, &provider, &stats);
  v.quantifierBranches = stats.quantifierBranches;
  v.warnings = stats.warnings;
  if (holds) {
    v.kind = VerdictKind::HoldsOnGrid;
  } else {
    Anchor dag;
    auto sat = [&](const PathEnvironment& env, const Anchor& d, const FormulaPtr& f) {
      return satInterval(A, env, 0, d, f, &provider);
    };
    auto cands = [&](const PathEnvironment& env, const Anchor& d) {
      return provider.candidates(d ? &env.paths.at(*d) : nullptr, 0);
    };
    v.witness = extractWitness<PathEnvironment, Execution>(phi, Pi, dag, sat, cands, v.witnessConfirmed);
    v.kind = v.witness.empty() ? VerdictKind::FailsOnGrid : VerdictKind::FailsWithWitness;
  }
  v.wallSeconds = since(t0);
  return v;
}

Verdict checkEnvironment(const TimedAutomaton& A, const PathEnvironment& Pi, const Rational& t, const Anchor& dag,
                         const FormulaPtr& phi) {
  if (quantifierCount(phi) > 0) throw std::invalid_argument("exact environment checks take quantifier-free formulas");
  auto t0 = std::chrono::steady_clock::now();
  Verdict v;
  v.route = "environment";
  v.kind = satInterval(A, Pi, t, dag, phi) ? VerdictKind::Holds : VerdictKind::Fails;
  v.wallSeconds = since(t0);
  return v;
}

Verdict verifyPoint(const PointTimedAutomaton& B, const FormulaPtr& phi, const GridBudget& b, Route route) {
  requireSentence(phi);
  checkBudget(b);
  if (b.maxTransitions < 1) throw std::invalid_argument("point verification needs at least one event");
  if (route == Route::Reduce) {
    // d events take 2d - 1 transitions from s0; a run starting in an edge state at 0 needs one fewer, so 2d
    // would admit d + 1 events.
    GridBudget rb = b;
    rb.maxTransitions = 2 * b.maxTransitions - 1;
    TimedAutomaton A = buildIntervalAutomaton(B);
    Verdict v = verify(A, pointToInterval(phi, {}), rb);
    v.budget = b;
    v.route = "reduce";
    for (const auto& [var, rho] : v.witness) v.pointWitness.push_back({var, chiInverse(B, rho)});
    return v;
  }
  auto t0 = std::chrono::steady_clock::now();
  Verdict v;
  v.budget = b;
  v.route = "direct";
  PointRunListProvider provider(enumeratePointRuns(B, b));
  v.runsEnumerated = static_cast<long long>(provider.runs().size());
  PointEnvironment Gamma;
  Gamma.horizon = b.horizon;
  EvalStats stats;
  bool holds = satPoint(B, Gamma, 0, std::nullopt, phi, &provider, &stats);
  v.quantifierBranches = stats.quantifierBranches;
  v.warnings = stats.warnings;
  if (holds) {
    v.kind = VerdictKind::HoldsOnGrid;
  } else {
    Anchor dag;
    auto sat = [&](const PointEnvironment& env, const Anchor& d, const FormulaPtr& f) {
      return satPoint(B, env, 0, d, f, &provider);
    };
    auto cands = [&](const PointEnvironment& env, const Anchor& d) {
      return provider.candidates(d ? &env.paths.at(*d) : nullptr, 0);
    };
    v.pointWitness = extractWitness<PointEnvironment, PointExecution>(phi, Gamma, dag, sat, cands, v.witnessConfirmed);
    v.kind = v.pointWitness.empty() ? VerdictKind::FailsOnGrid : VerdictKind::FailsWithWitness;
  }
  v.wallSeconds = since(t0);
  return v;
}

Verdict verifyPointChecked(const PointTimedAutomaton& B, const FormulaPtr& phi, const GridBudget& b) {
  Verdict d = verifyPoint(B, phi, b, Route::Direct);
  Verdict r = verifyPoint(B, phi, b, Route::Reduce);
  if (d.holds() != r.holds())
    throw ConsistencyError("point routes disagree: direct " + verdictName(d.kind) + ", reduce " +
                           verdictName(r.kind));
  d.route = "direct+reduce";
  return d;
}

CrossCheckReport crossCheckMso(const TimedAutomaton& A, const FormulaPtr& phi, const GridBudget& runBudget,
                               const GridBudget& soBudget, int samples, std::uint64_t seed) {
  checkBudget(runBudget);
  checkBudget(soBudget);
  if (runBudget.horizon != soBudget.horizon) throw std::invalid_argument("budgets need a common horizon");
  const Rational N = runBudget.horizon;
  std::vector<std::string> order = freeVars(phi);
  auto tr = translateHcmtl(phi, A, order);
  RunListProvider provider(enumerateRuns(A, runBudget));
  std::vector<Flow> encoded;
  for (const auto& r : enumerateRuns(A, soBudget)) encoded.push_back(encodeFlow(A, r, N));
  SoBudget so{soBudget.granularity, soBudget.maxTransitions + 1, [&](const std::vector<std::string>& block) {
                std::string suffix = block.empty() ? std::string() : block[0].substr(block[0].rfind('@'));
                std::vector<Flow> out;
                for (const auto& e : encoded) out.push_back(e.suffixed(suffix));
                return std::optional<std::vector<Flow>>(std::move(out));
              }};
  CrossCheckReport rep;
  const auto& pool = provider.runs();
  if (!order.empty() && pool.empty()) return rep;
  std::mt19937_64 g(seed);
  auto pick = [&](std::size_t n) { return std::uniform_int_distribution<std::size_t>(0, n - 1)(g); };
  std::int64_t ticks = (N * Rational(2 * runBudget.granularity)).floor();
  for (int s = 0; s < samples; ++s) {
    CrossCheckSample c;
    c.env.horizon = N;
    for (const auto& v : order) c.env.paths[v] = pool[pick(pool.size())];
    std::int64_t tick = std::uniform_int_distribution<std::int64_t>(0, std::max<std::int64_t>(0, ticks - 1))(g);
    c.time = Rational(tick, 2 * runBudget.granularity);
    if (!(c.time < N)) c.time = Rational(0);
    std::size_t i = pick(order.size() + 1);
    if (i > 0) c.anchor = order[i - 1];
    c.semantic = satInterval(A, c.env, c.time, c.anchor, phi, &provider);
    Flow f = envToFlow(A, c.env, order);
    c.mso = evalMso(f, {{"x", c.time}}, tr[i], N, so);
    ++rep.samples;
    if (c.semantic == c.mso)
      ++rep.agreements;
    else
      rep.disagreements.push_back(c);
  }
  return rep;
}

}  // namespace hyperclock
