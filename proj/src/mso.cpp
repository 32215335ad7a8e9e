#include "hyperclock/mso.hpp"

#include <algorithm>
#include <cctype>
#include <sstream>
#include <unordered_map>

namespace hyperclock {

MsoPtr MsoFormula::less(const std::string& x, const std::string& y) {
  auto f = std::make_shared<MsoFormula>();
  f->kind_ = Kind::Less;
  f->x_ = x;
  f->y_ = y;
  return f;
}

MsoPtr MsoFormula::plusOne(const std::string& x, const std::string& y) {
  auto f = std::make_shared<MsoFormula>();
  f->kind_ = Kind::PlusOne;
  f->x_ = x;
  f->y_ = y;
  return f;
}

MsoPtr MsoFormula::pred(const std::string& P, const std::string& x) {
  auto f = std::make_shared<MsoFormula>();
  f->kind_ = Kind::Pred;
  f->x_ = x;
  f->y_ = P;
  return f;
}

MsoPtr MsoFormula::disj(std::vector<MsoPtr> kids) {
  if (kids.size() == 1) return kids[0];
  auto f = std::make_shared<MsoFormula>();
  f->kind_ = Kind::Or;
  f->kids_ = std::move(kids);
  return f;
}

MsoPtr MsoFormula::neg(MsoPtr a) {
  if (a->kind() == Kind::Not) return a->body();
  auto f = std::make_shared<MsoFormula>();
  f->kind_ = Kind::Not;
  f->kids_ = {std::move(a)};
  return f;
}

MsoPtr MsoFormula::existsFO(const std::string& x, MsoPtr body) {
  auto f = std::make_shared<MsoFormula>();
  f->kind_ = Kind::ExistsFO;
  f->x_ = x;
  f->kids_ = {std::move(body)};
  return f;
}

MsoPtr MsoFormula::existsSO(const std::string& P, MsoPtr body) {
  auto f = std::make_shared<MsoFormula>();
  f->kind_ = Kind::ExistsSO;
  f->x_ = P;
  f->kids_ = {std::move(body)};
  return f;
}

namespace mso {

MsoPtr truth() { return MsoFormula::neg(falsity()); }
MsoPtr falsity() { return MsoFormula::disj({}); }
MsoPtr disj(MsoPtr a, MsoPtr b) { return MsoFormula::disj({std::move(a), std::move(b)}); }

MsoPtr conj(std::vector<MsoPtr> kids) {
  for (auto& k : kids) k = MsoFormula::neg(k);
  return MsoFormula::neg(MsoFormula::disj(std::move(kids)));
}

MsoPtr conj(MsoPtr a, MsoPtr b) { return conj(std::vector<MsoPtr>{std::move(a), std::move(b)}); }
MsoPtr implies(MsoPtr a, MsoPtr b) { return disj(MsoFormula::neg(std::move(a)), std::move(b)); }
MsoPtr iff(MsoPtr a, MsoPtr b) { return conj(implies(a, b), implies(b, a)); }

MsoPtr forallFO(const std::string& x, MsoPtr body) {
  return MsoFormula::neg(MsoFormula::existsFO(x, MsoFormula::neg(std::move(body))));
}

MsoPtr existsSO(const std::vector<std::string>& preds, MsoPtr body) {
  for (auto it = preds.rbegin(); it != preds.rend(); ++it) body = MsoFormula::existsSO(*it, body);
  return body;
}

MsoPtr forallSO(const std::vector<std::string>& preds, MsoPtr body) {
  return MsoFormula::neg(existsSO(preds, MsoFormula::neg(std::move(body))));
}

MsoPtr le(const std::string& x, const std::string& y) { return MsoFormula::neg(MsoFormula::less(y, x)); }
MsoPtr eq(const std::string& x, const std::string& y) { return conj(le(x, y), le(y, x)); }

MsoPtr zero(const std::string& x, const std::string& fresh) {
  return MsoFormula::neg(MsoFormula::existsFO(fresh, MsoFormula::less(fresh, x)));
}

}  // namespace mso

// ---------------------------------------------------------------------------------------------------------
// Evaluation

namespace {

using K = MsoFormula::Kind;

struct Bound {
  int slot;
  bool strict;
};

struct CNode {
  K kind;
  int a = -1, b = -1;  // slots
  int pred = -1;
  std::vector<int> kids;
  // ExistsFO only: y = value(slot) + dir, and range restrictions read off the body's conjuncts.
  std::vector<std::pair<int, int>> forced;
  std::vector<Bound> lower, upper;
};

class Compiler {
 public:
  std::vector<CNode> nodes;
  std::vector<std::string> predNames;  // pid -> name (bound ones get a unique entry)
  std::map<std::string, int> freePreds;
  std::map<std::string, int> freeSlots;
  int slotCount = 0;

  int compile(const MsoPtr& f) { return rec(f); }

 private:
  std::vector<std::pair<std::string, int>> fo_, so_;

  int slotOf(const std::string& v) {
    for (auto it = fo_.rbegin(); it != fo_.rend(); ++it)
      if (it->first == v) return it->second;
    auto it = freeSlots.find(v);
    if (it != freeSlots.end()) return it->second;
    return freeSlots[v] = slotCount++;
  }

  int predOf(const std::string& P) {
    for (auto it = so_.rbegin(); it != so_.rend(); ++it)
      if (it->first == P) return it->second;
    auto it = freePreds.find(P);
    if (it != freePreds.end()) return it->second;
    predNames.push_back(P);
    return freePreds[P] = static_cast<int>(predNames.size()) - 1;
  }

  int push(CNode n) {
    nodes.push_back(std::move(n));
    return static_cast<int>(nodes.size()) - 1;
  }

  // Reads y's forced values and bounds off an atom that is a conjunct of its quantifier's body.
  void inspect(CNode& q, int y, int atom, bool negated) {
    const CNode& n = nodes[atom];
    if (n.kind == K::PlusOne && !negated) {
      if (n.b == y && n.a != y) q.forced.push_back({n.a, 1});
      if (n.a == y && n.b != y) q.forced.push_back({n.b, -1});
    } else if (n.kind == K::Less) {
      if (n.a == n.b) return;
      // negated: the conjunct is ¬(a < b), i.e. b ≤ a.
      if (!negated) {
        if (n.b == y) q.lower.push_back({n.a, true});
        if (n.a == y) q.upper.push_back({n.b, true});
      } else {
        if (n.a == y) q.lower.push_back({n.b, false});
        if (n.b == y) q.upper.push_back({n.a, false});
      }
    }
  }

  int rec(const MsoPtr& f) {
    CNode n;
    n.kind = f->kind();
    switch (f->kind()) {
      case K::Less:
      case K::PlusOne:
        n.a = slotOf(f->x());
        n.b = slotOf(f->y());
        return push(std::move(n));
      case K::Pred:
        n.a = slotOf(f->x());
        n.pred = predOf(f->name());
        return push(std::move(n));
      case K::Or:
        for (const auto& k : f->kids()) n.kids.push_back(rec(k));
        return push(std::move(n));
      case K::Not:
        n.kids.push_back(rec(f->body()));
        return push(std::move(n));
      case K::ExistsFO: {
        n.a = slotCount++;
        fo_.push_back({f->x(), n.a});
        int body = rec(f->body());
        fo_.pop_back();
        n.kids.push_back(body);
        const CNode& bn = nodes[body];
        if (bn.kind == K::PlusOne) inspect(n, n.a, body, false);
        if (bn.kind == K::Not && nodes[bn.kids[0]].kind == K::Or) {
          for (int k : nodes[bn.kids[0]].kids) {
            // Each disjunct is the negation of a conjunct.
            if (nodes[k].kind == K::Not) {
              int c = nodes[k].kids[0];
              if (nodes[c].kind == K::PlusOne || nodes[c].kind == K::Less) inspect(n, n.a, c, false);
            } else if (nodes[k].kind == K::Less) {
              inspect(n, n.a, k, true);
            }
          }
        }
        return push(std::move(n));
      }
      case K::ExistsSO: {
        predNames.push_back(f->x());
        n.pred = static_cast<int>(predNames.size()) - 1;
        so_.push_back({f->x(), n.pred});
        n.kids.push_back(rec(f->body()));
        so_.pop_back();
        return push(std::move(n));
      }
    }
    throw std::logic_error("unknown MSO node");
  }
};

struct Layer {
  const Flow* flow;
  std::map<std::string, int> ids;  // predicate name in flow -> pid
};

class Model {
 public:
  Model(const std::vector<Layer>& layers, const Rational& N, int predCount, const std::vector<Rational>& extra)
      : N_(N), words_((predCount + 63) / 64), extra_(extra) {
    pts_.push_back(Rational(0));
    for (const auto& l : layers)
      for (const auto& b : l.flow->breakpoints())
        if (Rational(0) <= b && b < N) pts_.push_back(b);
    std::sort(pts_.begin(), pts_.end());
    pts_.erase(std::unique(pts_.begin(), pts_.end()), pts_.end());
    bits_.assign(2 * pts_.size() * words_, 0);
    for (std::size_t c = 0; c < 2 * pts_.size(); ++c) {
      std::size_t i = c / 2;
      Rational rep = c % 2 == 0 ? pts_[i] : midpoint(pts_[i], i + 1 < pts_.size() ? pts_[i + 1] : N);
      for (const auto& l : layers)
        for (const auto& p : l.flow->at(rep)) {
          auto it = l.ids.find(p);
          if (it == l.ids.end()) continue;
          bits_[c * words_ + it->second / 64] |= std::uint64_t(1) << (it->second % 64);
        }
    }
    for (const auto& p : pts_) fracs_.push_back(p.frac());
    fracs_.push_back(N.frac());
    std::sort(fracs_.begin(), fracs_.end());
    fracs_.erase(std::unique(fracs_.begin(), fracs_.end()), fracs_.end());
  }

  bool has(int pid, const Rational& t) const {
    std::size_t i = std::upper_bound(pts_.begin(), pts_.end(), t) - pts_.begin() - 1;
    std::size_t c = pts_[i] == t ? 2 * i : 2 * i + 1;
    return (bits_[c * words_ + pid / 64] >> (pid % 64)) & 1;
  }

  bool knownFrac(const Rational& f) const { return std::binary_search(fracs_.begin(), fracs_.end(), f); }

  // Shift-closed points of the model and of the extra fractional classes, with midpoints.
  const std::vector<Rational>& candidates(const std::vector<Rational>& extraFracs) {
    auto it = cache_.find(extraFracs);
    if (it != cache_.end()) return it->second;
    std::vector<Rational> fr = fracs_;
    fr.insert(fr.end(), extraFracs.begin(), extraFracs.end());
    std::vector<Rational> s;
    for (const auto& f : fr)
      for (Rational v = f; v < N_; v += Rational(1)) s.push_back(v);
    std::sort(s.begin(), s.end());
    s.erase(std::unique(s.begin(), s.end()), s.end());
    std::vector<Rational> out;
    for (std::size_t i = 0; i < s.size(); ++i) {
      out.push_back(s[i]);
      out.push_back(midpoint(s[i], i + 1 < s.size() ? s[i + 1] : N_));
    }
    out.insert(out.end(), extra_.begin(), extra_.end());
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return cache_.emplace(extraFracs, std::move(out)).first->second;
  }

 private:
  Rational N_;
  int words_;
  std::vector<Rational> extra_;
  std::vector<Rational> pts_;
  std::vector<std::uint64_t> bits_;
  std::vector<Rational> fracs_;
  std::map<std::vector<Rational>, std::vector<Rational>> cache_;
};

class Evaluator {
 public:
  Evaluator(const Compiler& c, const Rational& N, const SoBudget& budget, const std::vector<Rational>& extra,
            std::vector<Layer> layers, MsoStats* stats)
      : c_(c), N_(N), budget_(budget), extra_(extra), layers_(std::move(layers)), stats_(stats) {
    for (const auto& e : extra_)
      if (e < Rational(0) || !(e < N_)) throw std::invalid_argument("extra candidate outside [0,N)");
    val_.assign(c.slotCount, Rational(0));
    set_.assign(c.slotCount, 0);
    models_.push_back(std::make_unique<Model>(layers_, N_, static_cast<int>(c.predNames.size()), extra_));
  }

  void assign(int slot, const Rational& v) {
    val_[slot] = v;
    set_[slot] = 1;
    assigned_.push_back(slot);
  }

  bool eval(int n) {
    const CNode& x = c_.nodes[n];
    switch (x.kind) {
      case K::Less:
        return val_[x.a] < val_[x.b];
      case K::PlusOne:
        return val_[x.b] == val_[x.a] + Rational(1);
      case K::Pred:
        return models_.back()->has(x.pred, val_[x.a]);
      case K::Or:
        for (int k : x.kids)
          if (eval(k)) return true;
        return false;
      case K::Not:
        return !eval(x.kids[0]);
      case K::ExistsFO:
        return existsFO(x);
      case K::ExistsSO:
        return existsSO(n);
    }
    return false;
  }

 private:
  const Compiler& c_;
  Rational N_;
  const SoBudget& budget_;
  const std::vector<Rational>& extra_;
  std::vector<Layer> layers_;
  MsoStats* stats_;
  std::vector<Rational> val_;
  std::vector<char> set_;
  std::vector<int> assigned_;
  std::vector<std::unique_ptr<Model>> models_;
  std::vector<Flow> witnessFlows_;

  bool tryValue(const CNode& x, const Rational& v) {
    assign(x.a, v);
    bool r = eval(x.kids[0]);
    assigned_.pop_back();
    set_[x.a] = 0;
    return r;
  }

  bool existsFO(const CNode& x) {
    for (const auto& [s, dir] : x.forced) {
      if (!set_[s]) continue;
      Rational v = val_[s] + Rational(dir);
      if (v < Rational(0) || !(v < N_)) return false;
      return tryValue(x, v);
    }
    std::vector<Rational> fr;
    Model& m = *models_.back();
    for (int s : assigned_) {
      Rational f = val_[s].frac();
      if (!m.knownFrac(f)) fr.push_back(f);
    }
    std::sort(fr.begin(), fr.end());
    fr.erase(std::unique(fr.begin(), fr.end()), fr.end());
    const std::vector<Rational>& cand = m.candidates(fr);
    auto lo = cand.begin(), hi = cand.end();
    for (const auto& b : x.lower) {
      if (!set_[b.slot]) continue;
      auto it = b.strict ? std::upper_bound(cand.begin(), cand.end(), val_[b.slot])
                         : std::lower_bound(cand.begin(), cand.end(), val_[b.slot]);
      if (it > lo) lo = it;
    }
    for (const auto& b : x.upper) {
      if (!set_[b.slot]) continue;
      auto it = b.strict ? std::lower_bound(cand.begin(), cand.end(), val_[b.slot])
                         : std::upper_bound(cand.begin(), cand.end(), val_[b.slot]);
      if (it < hi) hi = it;
    }
    // cand stays valid: the model is not replaced while this loop runs (SO scopes push and pop models).
    for (auto it = lo; it < hi; ++it)
      if (tryValue(x, *it)) return true;
    return false;
  }

  bool withWitness(const std::vector<int>& pids, const Flow& w, int body) {
    if (stats_) ++stats_->soWitnesses;
    Layer l{&w, {}};
    for (int pid : pids) l.ids[c_.predNames[pid]] = pid;
    layers_.push_back(l);
    models_.push_back(std::make_unique<Model>(layers_, N_, static_cast<int>(c_.predNames.size()), extra_));
    bool r = eval(body);
    models_.pop_back();
    layers_.pop_back();
    return r;
  }

  bool existsSO(int n) {
    std::vector<int> pids;
    std::vector<std::string> names;
    int cur = n;
    while (c_.nodes[cur].kind == K::ExistsSO) {
      pids.push_back(c_.nodes[cur].pred);
      names.push_back(c_.predNames[c_.nodes[cur].pred]);
      cur = c_.nodes[cur].kids[0];
    }
    if (budget_.blocks) {
      auto ws = budget_.blocks(names);
      if (ws) {
        for (const auto& w : *ws)
          if (withWitness(pids, w, cur)) return true;
        return false;
      }
    }
    return gridWitnesses(pids, names, 0, cur);
  }

  // Every set of grid cells forming at most maxSegments maximal runs.
  bool gridWitnesses(const std::vector<int>& pids, const std::vector<std::string>& names, std::size_t i, int body) {
    if (i == pids.size()) return eval(body);
    int k = std::max(1, budget_.granularity);
    std::vector<Rational> grid;
    for (std::int64_t j = 0; Rational(j, k) < N_; ++j) grid.push_back(Rational(j, k));
    int cells = 2 * static_cast<int>(grid.size());
    auto bound = [&](int c) -> TimeBound {
      int g = c / 2;
      if (c % 2 == 0) return grid[g];
      return g + 1 < static_cast<int>(grid.size()) ? TimeBound(grid[g + 1]) : TimeBound(N_);
    };
    std::vector<std::pair<int, int>> runs;
    std::function<bool(int)> rec = [&](int from) -> bool {
      std::vector<FlowSegment> segs;
      for (auto [s, e] : runs)
        segs.push_back({Interval(grid[s / 2], bound(e), s % 2 == 0, e % 2 == 0),
                        {names[i]}});
      Flow w(N_, segs);
      if (stats_) ++stats_->soWitnesses;
      Layer l{&w, {{names[i], pids[i]}}};
      layers_.push_back(l);
      models_.push_back(std::make_unique<Model>(layers_, N_, static_cast<int>(c_.predNames.size()), extra_));
      bool r = gridWitnesses(pids, names, i + 1, body);
      models_.pop_back();
      layers_.pop_back();
      if (r) return true;
      if (static_cast<int>(runs.size()) >= budget_.maxSegments) return false;
      for (int s = from; s < cells; ++s)
        for (int e = s; e < cells; ++e) {
          runs.push_back({s, e});
          bool ok = rec(e + 2);
          runs.pop_back();
          if (ok) return true;
        }
      return false;
    };
    return rec(0);
  }
};

}  // namespace

bool evalMso(const Flow& f, const Interpretation& I, const MsoPtr& phi, const Rational& N, const SoBudget& budget,
             const std::vector<Rational>& extraCandidates, MsoStats* stats) {
  if (!(Rational(0) < N)) throw std::invalid_argument("MSO time domain needs N > 0");
  Compiler c;
  int root = c.compile(phi);
  std::vector<Layer> layers{{&f, {}}};
  for (const auto& [name, pid] : c.freePreds) layers[0].ids[name] = pid;
  Evaluator ev(c, N, budget, extraCandidates, layers, stats);
  for (const auto& [v, slot] : c.freeSlots) {
    auto it = I.find(v);
    if (it == I.end()) throw MsoScopeError("unbound first-order variable '" + v + "'");
    if (it->second < Rational(0) || !(it->second < N))
      throw std::invalid_argument("interpretation of '" + v + "' outside [0,N)");
    ev.assign(slot, it->second);
  }
  return ev.eval(root);
}

// ---------------------------------------------------------------------------------------------------------
// Structural helpers

namespace {

void collectFree(const MsoPtr& f, std::vector<std::string>& fo, std::vector<std::string>& so,
                 std::set<std::string>& outFo, std::set<std::string>& outSo) {
  auto bound = [](const std::vector<std::string>& s, const std::string& v) {
    return std::find(s.begin(), s.end(), v) != s.end();
  };
  switch (f->kind()) {
    case K::Less:
    case K::PlusOne:
      if (!bound(fo, f->x())) outFo.insert(f->x());
      if (!bound(fo, f->y())) outFo.insert(f->y());
      return;
    case K::Pred:
      if (!bound(fo, f->x())) outFo.insert(f->x());
      if (!bound(so, f->name())) outSo.insert(f->name());
      return;
    case K::Or:
    case K::Not:
      for (const auto& k : f->kids()) collectFree(k, fo, so, outFo, outSo);
      return;
    case K::ExistsFO:
      fo.push_back(f->x());
      collectFree(f->body(), fo, so, outFo, outSo);
      fo.pop_back();
      return;
    case K::ExistsSO:
      so.push_back(f->x());
      collectFree(f->body(), fo, so, outFo, outSo);
      so.pop_back();
      return;
  }
}

}  // namespace

std::set<std::string> freePredicates(const MsoPtr& phi) {
  std::vector<std::string> fo, so;
  std::set<std::string> a, b;
  collectFree(phi, fo, so, a, b);
  return b;
}

std::set<std::string> freeFOVars(const MsoPtr& phi) {
  std::vector<std::string> fo, so;
  std::set<std::string> a, b;
  collectFree(phi, fo, so, a, b);
  return a;
}

std::size_t msoSize(const MsoPtr& phi) {
  std::size_t n = 1;
  for (const auto& k : phi->kids()) n += msoSize(k);
  return n;
}

MsoPtr renamePredicates(const MsoPtr& phi, const std::function<std::string(const std::string&)>& rename) {
  std::unordered_map<const MsoFormula*, MsoPtr> memo;
  std::function<MsoPtr(const MsoPtr&)> rec = [&](const MsoPtr& f) -> MsoPtr {
    auto it = memo.find(f.get());
    if (it != memo.end()) return it->second;
    MsoPtr out;
    switch (f->kind()) {
      case K::Less:
      case K::PlusOne:
        out = f;
        break;
      case K::Pred:
        out = MsoFormula::pred(rename(f->name()), f->x());
        break;
      case K::Or: {
        std::vector<MsoPtr> ks;
        for (const auto& k : f->kids()) ks.push_back(rec(k));
        out = MsoFormula::disj(ks);
        break;
      }
      case K::Not:
        out = MsoFormula::neg(rec(f->body()));
        break;
      case K::ExistsFO:
        out = MsoFormula::existsFO(f->x(), rec(f->body()));
        break;
      case K::ExistsSO:
        out = MsoFormula::existsSO(rename(f->x()), rec(f->body()));
        break;
    }
    memo[f.get()] = out;
    return out;
  };
  return rec(phi);
}

std::string indexedName(const std::string& base, int pathIndex) { return base + "@" + std::to_string(pathIndex); }

// ---------------------------------------------------------------------------------------------------------
// φ_A

namespace {

using mso::conj;
using mso::disj;
using mso::forallFO;
using mso::implies;
using mso::le;
using MF = MsoFormula;

MsoPtr P(const std::string& name, const std::string& x) { return MF::pred(name, x); }
MsoPtr lt(const std::string& x, const std::string& y) { return MF::less(x, y); }
MsoPtr constant(bool b) { return b ? mso::truth() : mso::falsity(); }

std::int64_t intConstant(const Rational& c) {
  if (!c.isInteger()) throw std::invalid_argument("constant " + c.str() + " is not an integer; scale first");
  return c.num();
}

class Names {
 public:
  explicit Names(std::string prefix) : prefix_(std::move(prefix)) {}
  std::string operator()() { return prefix_ + std::to_string(++n_); }

 private:
  std::string prefix_;
  int n_ = 0;
};

// ∃z1(+1(x,z1) ∧ ∃z2(+1(z1,z2) ∧ ... body(zc))); body(x) when c = 0.
MsoPtr plusC(Names& fresh, const std::string& x, std::int64_t c,
             const std::function<MsoPtr(const std::string&)>& body) {
  if (c == 0) return body(x);
  std::string z = fresh();
  return MF::existsFO(z, conj(MF::plusOne(x, z), plusC(fresh, z, c - 1, body)));
}

// t rel r + c for integer c; false when r + c leaves the domain and the relation needs it to exist.
MsoPtr shiftedRel(Names& fresh, const std::string& t, Rel rel, const std::string& r, std::int64_t c) {
  if (c == 0) {
    switch (rel) {
      case Rel::Lt: return lt(t, r);
      case Rel::Le: return le(t, r);
      case Rel::Eq: return mso::eq(t, r);
      case Rel::Ge: return le(r, t);
      case Rel::Gt: return lt(r, t);
    }
  }
  switch (rel) {
    case Rel::Lt: return MF::neg(plusC(fresh, r, c, [&](const std::string& w) { return le(w, t); }));
    case Rel::Le: return MF::neg(plusC(fresh, r, c, [&](const std::string& w) { return lt(w, t); }));
    case Rel::Eq: return plusC(fresh, r, c, [&](const std::string& w) { return mso::eq(w, t); });
    case Rel::Ge: return plusC(fresh, r, c, [&](const std::string& w) { return le(w, t); });
    case Rel::Gt: return plusC(fresh, r, c, [&](const std::string& w) { return lt(w, t); });
  }
  return mso::falsity();
}

class AutomatonEmitter {
 public:
  explicit AutomatonEmitter(const TimedAutomaton& A) : A_(A), fresh_("t") {
    for (const auto& v : A.states) V_.push_back(MonadicPredicate::state(v).str());
    for (std::size_t e = 0; e < A.edges.size(); ++e) {
      Tm_.push_back(MonadicPredicate::tminus(static_cast<int>(e)).str());
      Tp_.push_back(MonadicPredicate::tplus(static_cast<int>(e)).str());
    }
  }

  MsoPtr emit() {
    std::vector<MsoPtr> rest{initial(), atMostOneTransition(), noResetsWithoutTransitions(), transitionConsistency(),
                             isolation(), forcedTransitions(), acceptance(), stateConstraints(), guards()};
    MsoPtr R = conj(rest);
    std::vector<MsoPtr> variants;
    for (const auto& t : termination()) variants.push_back(conj(t, R));
    return MF::disj(variants);
  }

 private:
  const TimedAutomaton& A_;
  Names fresh_;
  std::vector<std::string> V_, Tm_, Tp_;

  std::string rm(const std::string& x) { return MonadicPredicate::rminus(x).str(); }
  std::string rp(const std::string& x) { return MonadicPredicate::rplus(x).str(); }
  std::string st(const std::string& v) { return MonadicPredicate::state(v).str(); }

  MsoPtr anyOf(const std::vector<std::string>& ps, const std::string& t) {
    std::vector<MsoPtr> ks;
    for (const auto& p : ps) ks.push_back(P(p, t));
    return MF::disj(ks);
  }
  MsoPtr someState(const std::string& t) { return anyOf(V_, t); }
  MsoPtr anyT(const std::string& t) { return disj(anyOf(Tm_, t), anyOf(Tp_, t)); }

  MsoPtr uniqueState(const std::string& t) {
    std::vector<MsoPtr> ks;
    for (std::size_t i = 0; i < V_.size(); ++i) {
      std::vector<MsoPtr> c{P(V_[i], t)};
      for (std::size_t j = 0; j < V_.size(); ++j)
        if (j != i) c.push_back(MF::neg(P(V_[j], t)));
      ks.push_back(conj(c));
    }
    return MF::disj(ks);
  }

  MsoPtr zero(const std::string& t) { return mso::zero(t, fresh_()); }

  // body holds throughout (y, t) for some y < t.
  MsoPtr justBefore(const std::string& t, const std::function<MsoPtr(const std::string&)>& body) {
    std::string y = fresh_(), z = fresh_();
    return MF::existsFO(y, conj(lt(y, t), forallFO(z, implies(conj(lt(y, z), lt(z, t)), body(z)))));
  }

  MsoPtr justAfter(const std::string& t, const std::function<MsoPtr(const std::string&)>& body) {
    std::string y = fresh_(), z = fresh_();
    return MF::existsFO(y, conj(lt(t, y), forallFO(z, implies(conj(lt(t, z), lt(z, y)), body(z)))));
  }

  // Support [0,l], [0,l) or all of [0,N).
  std::vector<MsoPtr> termination() {
    std::vector<MsoPtr> out;
    for (bool closed : {true, false}) {
      std::string l = fresh_(), t = fresh_();
      MsoPtr inside = closed ? le(t, l) : lt(t, l);
      MsoPtr beyond = closed ? lt(l, t) : le(l, t);
      out.push_back(MF::existsFO(
          l, forallFO(t, conj(implies(inside, uniqueState(t)), implies(beyond, MF::neg(someState(t)))))));
    }
    std::string t = fresh_();
    out.push_back(forallFO(t, uniqueState(t)));
    return out;
  }

  MsoPtr initial() {
    std::string t = fresh_();
    std::vector<MsoPtr> ks;
    for (const auto& v : A_.states)
      if (A_.initial.count(v)) ks.push_back(P(st(v), t));
    return forallFO(t, implies(zero(t), MF::disj(ks)));
  }

  MsoPtr atMostOneTransition() {
    std::string t = fresh_();
    std::vector<MsoPtr> ks;
    for (const auto* T : {&Tm_, &Tp_})
      for (std::size_t i = 0; i < T->size(); ++i)
        for (std::size_t j = i + 1; j < T->size(); ++j)
          ks.push_back(MF::neg(conj(P((*T)[i], t), P((*T)[j], t))));
    return forallFO(t, implies(someState(t), conj(ks)));
  }

  MsoPtr noResetsWithoutTransitions() {
    std::vector<MsoPtr> out;
    std::string t = fresh_();
    std::vector<MsoPtr> a, b;
    for (const auto& x : A_.clocks) {
      a.push_back(MF::neg(P(rm(x), t)));
      b.push_back(MF::neg(P(rp(x), t)));
    }
    out.push_back(forallFO(t, implies(MF::neg(anyOf(Tm_, t)), conj(a))));
    out.push_back(forallFO(t, implies(MF::neg(anyOf(Tp_, t)), conj(b))));
    return conj(out);
  }

  MsoPtr resetsMatch(const Edge& e, const std::string& t, bool minus) {
    std::vector<MsoPtr> ks;
    for (const auto& x : A_.clocks) {
      MsoPtr r = P(minus ? rm(x) : rp(x), t);
      ks.push_back(e.resets.count(x) ? r : MF::neg(r));
    }
    return conj(ks);
  }

  MsoPtr transitionConsistency() {
    std::vector<MsoPtr> out;
    for (std::size_t i = 0; i < A_.edges.size(); ++i) {
      const Edge& e = A_.edges[i];
      std::string t = fresh_();
      std::string from = st(e.from), to = st(e.to);
      out.push_back(forallFO(
          t, implies(P(Tm_[i], t), conj({P(to, t), resetsMatch(e, t, true),
                                         justBefore(t, [&](const std::string& z) { return P(from, z); })}))));
      t = fresh_();
      out.push_back(forallFO(
          t, implies(P(Tp_[i], t), conj({P(from, t), resetsMatch(e, t, false),
                                         justAfter(t, [&](const std::string& z) { return P(to, z); })}))));
    }
    return conj(out);
  }

  // Transition predicates hold at isolated points only.
  MsoPtr isolation() {
    std::string t = fresh_();
    return forallFO(t, implies(anyT(t), justAfter(t, [&](const std::string& z) { return MF::neg(anyT(z)); })));
  }

  MsoPtr forcedTransitions() {
    std::vector<MsoPtr> out;
    for (const auto& v1 : A_.states)
      for (const auto& v2 : A_.states) {
        if (v1 == v2) continue;
        std::vector<std::string> minus, plus;
        for (std::size_t i = 0; i < A_.edges.size(); ++i)
          if (A_.edges[i].from == v1 && A_.edges[i].to == v2) {
            minus.push_back(Tm_[i]);
            plus.push_back(Tp_[i]);
          }
        std::string t = fresh_();
        out.push_back(forallFO(t, implies(conj(P(st(v2), t), MF::neg(anyOf(minus, t))),
                                          MF::neg(justBefore(t, [&](const std::string& z) {
                                            return P(st(v1), z);
                                          })))));
        t = fresh_();
        out.push_back(forallFO(t, implies(conj(P(st(v1), t), MF::neg(anyOf(plus, t))),
                                          MF::neg(justAfter(t, [&](const std::string& z) {
                                            return P(st(v2), z);
                                          })))));
      }
    return conj(out);
  }

  MsoPtr finalState(const std::string& t) {
    std::vector<MsoPtr> ks;
    for (const auto& v : A_.states)
      if (A_.final.count(v)) ks.push_back(P(st(v), t));
    return MF::disj(ks);
  }

  // last(x): the final transition point. Without transitions the state at 0 must be final.
  MsoPtr acceptance() {
    auto last = [&](const std::string& x) {
      std::string y = fresh_();
      return conj(anyT(x), forallFO(y, implies(lt(x, y), MF::neg(anyT(y)))));
    };
    std::string x = fresh_(), y = fresh_(), z = fresh_(), w = fresh_();
    MsoPtr a = forallFO(x, implies(conj(last(x), MF::neg(anyOf(Tp_, x))), finalState(x)));
    std::string x2 = fresh_();
    MsoPtr b = forallFO(x2, implies(conj(last(x2), anyOf(Tp_, x2)),
                                    MF::existsFO(y, conj(lt(x2, y), finalState(y)))));
    MsoPtr c = implies(forallFO(z, MF::neg(anyT(z))), MF::existsFO(w, conj(zero(w), finalState(w))));
    return conj({a, b, c});
  }

  // Value of x at t, ignoring a reset at t itself, compared with c.
  MsoPtr sinceRel(const std::string& t, const std::string& x, Rel rel, std::int64_t c) {
    if (c < 0) return constant(rel == Rel::Ge || rel == Rel::Gt);
    std::string r = fresh_(), z = fresh_();
    MsoPtr resetAt = MF::disj({P(rm(x), r), P(rp(x), r), zero(r)});
    MsoPtr quiet = forallFO(z, implies(conj(lt(r, z), lt(z, t)), conj(MF::neg(P(rm(x), z)), MF::neg(P(rp(x), z)))));
    MsoPtr found = MF::existsFO(r, conj({lt(r, t), resetAt, shiftedRel(fresh_, t, rel, r, c), quiet}));
    return disj(found, conj(zero(t), constant(relHolds(Rational(0), rel, Rational(c)))));
  }

  // Value of x at t: 0 after a reset entering at t.
  MsoPtr valueRel(const std::string& t, const std::string& x, Rel rel, std::int64_t c) {
    MsoPtr resetNow = P(rm(x), t);
    return disj(conj(resetNow, constant(relHolds(Rational(0), rel, Rational(c)))),
                conj(MF::neg(resetNow), sinceRel(t, x, rel, c)));
  }

  MsoPtr constraint(const ConstraintPtr& psi, const std::string& t, bool beforeReset) {
    switch (psi->kind()) {
      case ClockConstraint::Kind::True:
        return mso::truth();
      case ClockConstraint::Kind::Atom: {
        auto c = intConstant(psi->constant());
        return beforeReset ? sinceRel(t, psi->clock(), psi->rel(), c) : valueRel(t, psi->clock(), psi->rel(), c);
      }
      case ClockConstraint::Kind::And:
        return conj(constraint(psi->lhs(), t, beforeReset), constraint(psi->rhs(), t, beforeReset));
      case ClockConstraint::Kind::Or:
        return disj(constraint(psi->lhs(), t, beforeReset), constraint(psi->rhs(), t, beforeReset));
    }
    return mso::truth();
  }

  MsoPtr stateConstraints() {
    std::vector<MsoPtr> out;
    for (const auto& [key, psi] : A_.stateConstraints) {
      if (psi->kind() == ClockConstraint::Kind::True) continue;
      std::string t = fresh_();
      out.push_back(forallFO(t, implies(P(st(key.first), t), constraint(psi, t, false))));
    }
    return conj(out);
  }

  // A guard sees the value at the end of the source segment.
  MsoPtr guards() {
    std::vector<MsoPtr> out;
    for (std::size_t i = 0; i < A_.edges.size(); ++i)
      for (const auto& g : A_.edges[i].guards) {
        if (g->kind() == ClockConstraint::Kind::True) continue;
        std::string t = fresh_();
        out.push_back(forallFO(t, implies(P(Tm_[i], t), constraint(g, t, true))));
        t = fresh_();
        out.push_back(forallFO(t, implies(P(Tp_[i], t), constraint(g, t, false))));
      }
    return conj(out);
  }
};

}  // namespace

MsoPtr emitAutomatonFormula(const TimedAutomaton& A) {
  for (const auto& c : A.constants()) intConstant(c);
  return AutomatonEmitter(A).emit();
}

Flow envToFlow(const TimedAutomaton& A, const PathEnvironment& Pi, const std::vector<std::string>& order) {
  Flow out(Pi.horizon, {});
  for (std::size_t i = 0; i < order.size(); ++i) {
    auto it = Pi.paths.find(order[i]);
    if (it == Pi.paths.end()) throw std::invalid_argument("path variable '" + order[i] + "' not in environment");
    if (!Pi.horizon.isInfinite() && !it->second.boundedBy(Pi.horizon.value()))
      throw std::invalid_argument("run of '" + order[i] + "' exceeds the horizon");
    Flow f = encodeFlow(A, it->second, Pi.horizon, false).suffixed("@" + std::to_string(i + 1));
    out = Flow::merge(out, f);
  }
  return out;
}

// ---------------------------------------------------------------------------------------------------------
// ⟨φ⟩_i

namespace {

class Translator {
 public:
  Translator(const TimedAutomaton& A, const std::vector<std::string>& order)
      : A_(A), fresh_("y"), phiA_(emitAutomatonFormula(A)), alphabet_(predicateAlphabet(A)) {
    for (std::size_t i = 0; i < order.size(); ++i) scope_.push_back({order[i], static_cast<int>(i) + 1});
  }

  MsoPtr tr(const FormulaPtr& f, int i, const std::string& x) {
    using FK = Formula::Kind;
    switch (f->kind()) {
      case FK::Atom:
      case FK::NegAtom:
        return atom(f, x);
      case FK::Or:
        return disj(tr(f->lhs(), i, x), tr(f->rhs(), i, x));
      case FK::And:
        return conj(tr(f->lhs(), i, x), tr(f->rhs(), i, x));
      case FK::Finally: {
        std::string y = fresh_();
        return MF::existsFO(y, conj({lt(x, y), member(x, y, f->interval()), tr(f->lhs(), i, y)}));
      }
      case FK::Globally: {
        std::string y = fresh_();
        return forallFO(y, implies(conj(lt(x, y), member(x, y, f->interval())), tr(f->lhs(), i, y)));
      }
      case FK::Until: {
        std::string y = fresh_(), z = fresh_();
        MsoPtr between = forallFO(z, implies(conj(lt(x, z), lt(z, y)), tr(f->lhs(), i, z)));
        return MF::existsFO(y, conj({lt(x, y), member(x, y, f->interval()), tr(f->rhs(), i, y), between}));
      }
      case FK::Exists:
      case FK::Forall:
        return quantifier(f, i, x);
    }
    throw std::logic_error("unknown formula node");
  }

 private:
  const TimedAutomaton& A_;
  Names fresh_;
  MsoPtr phiA_;
  std::vector<std::string> alphabet_;
  std::vector<std::pair<std::string, int>> scope_;

  int indexOf(const std::string& v) const {
    for (auto it = scope_.rbegin(); it != scope_.rend(); ++it)
      if (it->first == v) return it->second;
    throw std::invalid_argument("path variable '" + v + "' is not in the translation order");
  }

  std::string st(const std::string& v, int j) const { return indexedName(MonadicPredicate::state(v).str(), j); }

  MsoPtr atom(const FormulaPtr& f, const std::string& x) {
    int j = indexOf(f->var());
    bool neg = f->kind() == Formula::Kind::NegAtom;
    std::vector<MsoPtr> ks;
    if (neg && f->prop() == "#") {
      for (const auto& v : A_.states)
        if (A_.label(v).count("#")) ks.push_back(MF::neg(P(st(v, j), x)));
      return conj(ks);
    }
    for (const auto& v : A_.states)
      if (A_.label(v).count(f->prop()) != static_cast<std::size_t>(neg)) ks.push_back(P(st(v, j), x));
    return MF::disj(ks);
  }

  // y − x ∈ I, given x < y.
  MsoPtr member(const std::string& x, const std::string& y, const Interval& I) {
    std::vector<MsoPtr> ks;
    auto l = intConstant(I.L());
    if (l > 0 || !I.leftClosed()) ks.push_back(shiftedRel(fresh_, y, I.leftClosed() ? Rel::Ge : Rel::Gt, x, l));
    if (!I.R().isInfinite())
      ks.push_back(shiftedRel(fresh_, y, I.rightClosed() ? Rel::Le : Rel::Lt, x, intConstant(I.R().value())));
    return conj(ks);
  }

  MsoPtr quantifier(const FormulaPtr& f, int i, const std::string& x) {
    int k = static_cast<int>(scope_.size()) + 1;
    scope_.push_back({f->var(), k});
    MsoPtr body = tr(f->lhs(), k, x);
    scope_.pop_back();
    std::vector<std::string> block;
    for (const auto& p : alphabet_) block.push_back(indexedName(p, k));
    std::vector<MsoPtr> cond{renamePredicates(phiA_, [&](const std::string& p) { return indexedName(p, k); })};
    if (i == 0) {
      cond.push_back(mso::zero(x, fresh_()));
    } else {
      cond.push_back(alive(i, x));
      cond.push_back(agree(i, k, x));
    }
    if (f->kind() == Formula::Kind::Exists) {
      cond.push_back(body);
      return mso::existsSO(block, conj(cond));
    }
    return mso::forallSO(block, implies(conj(cond), body));
  }

  MsoPtr alive(int i, const std::string& x) {
    std::vector<MsoPtr> ks;
    for (const auto& v : A_.states) ks.push_back(P(st(v, i), x));
    return MF::disj(ks);
  }

  // Equal prefixes up to x: states, entering transitions and their resets on [0,x]; leaving ones on [0,x).
  MsoPtr agree(int i, int k, const std::string& x) {
    std::vector<MsoPtr> upTo, before;
    std::string y = fresh_(), z = fresh_();
    for (const auto& p : alphabet_) {
      auto kind = MonadicPredicate::parse(p).kind;
      bool leaving = kind == MonadicPredicate::Kind::TransPlus || kind == MonadicPredicate::Kind::ResetPlus;
      const std::string& v = leaving ? z : y;
      (leaving ? before : upTo).push_back(mso::iff(P(indexedName(p, i), v), P(indexedName(p, k), v)));
    }
    return conj(forallFO(y, implies(le(y, x), conj(upTo))), forallFO(z, implies(lt(z, x), conj(before))));
  }
};

}  // namespace

std::vector<MsoPtr> translateHcmtl(const FormulaPtr& phi, const TimedAutomaton& A,
                                   const std::vector<std::string>& order) {
  for (const auto& c : formulaConstants(phi)) intConstant(c);
  std::vector<MsoPtr> out;
  for (std::size_t i = 0; i <= order.size(); ++i) {
    Translator t(A, order);
    out.push_back(t.tr(phi, static_cast<int>(i), "x"));
  }
  return out;
}

// ---------------------------------------------------------------------------------------------------------
// Text format

namespace {

void write(const MsoPtr& f, std::string& out) {
  switch (f->kind()) {
    case K::Less:
      out += "(< " + f->x() + " " + f->y() + ")";
      return;
    case K::PlusOne:
      out += "(+1 " + f->x() + " " + f->y() + ")";
      return;
    case K::Pred:
      out += "(pred " + f->name() + " " + f->x() + ")";
      return;
    case K::Or:
      out += "(or";
      for (const auto& k : f->kids()) {
        out += " ";
        write(k, out);
      }
      out += ")";
      return;
    case K::Not:
      out += "(not ";
      write(f->body(), out);
      out += ")";
      return;
    case K::ExistsFO:
    case K::ExistsSO:
      out += std::string(f->kind() == K::ExistsFO ? "(exists-fo " : "(exists-so ") + f->x() + " ";
      write(f->body(), out);
      out += ")";
      return;
  }
}

class SexpParser {
 public:
  explicit SexpParser(const std::string& s) : s_(s) {}

  MsoPtr parseAll() {
    MsoPtr f = parse();
    skip();
    if (pos_ != s_.size()) fail("trailing input");
    return f;
  }

 private:
  const std::string& s_;
  std::size_t pos_ = 0;

  [[noreturn]] void fail(const std::string& msg) const {
    throw std::invalid_argument("MSO text: " + msg + " at offset " + std::to_string(pos_));
  }

  void skip() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }

  std::string token() {
    skip();
    std::size_t b = pos_;
    while (pos_ < s_.size() && !std::isspace(static_cast<unsigned char>(s_[pos_])) && s_[pos_] != '(' &&
           s_[pos_] != ')')
      ++pos_;
    if (b == pos_) fail("expected a name");
    return s_.substr(b, pos_ - b);
  }

  void expect(char c) {
    skip();
    if (pos_ >= s_.size() || s_[pos_] != c) fail(std::string("expected '") + c + "'");
    ++pos_;
  }

  MsoPtr parse() {
    expect('(');
    std::string op = token();
    MsoPtr f;
    if (op == "<" || op == "+1") {
      std::string a = token(), b = token();
      f = op == "<" ? MF::less(a, b) : MF::plusOne(a, b);
    } else if (op == "pred") {
      std::string p = token(), x = token();
      f = MF::pred(p, x);
    } else if (op == "or") {
      std::vector<MsoPtr> ks;
      skip();
      while (pos_ < s_.size() && s_[pos_] == '(') {
        ks.push_back(parse());
        skip();
      }
      f = MF::disj(std::move(ks));
    } else if (op == "not") {
      MsoPtr a = parse();
      if (a->kind() == K::Not) fail("double negation");
      f = MF::neg(a);
    } else if (op == "exists-fo" || op == "exists-so") {
      std::string v = token();
      MsoPtr b = parse();
      f = op == "exists-fo" ? MF::existsFO(v, b) : MF::existsSO(v, b);
    } else {
      fail("unknown operator '" + op + "'");
    }
    expect(')');
    return f;
  }
};

}  // namespace

std::string serializeMso(const MsoPtr& phi) {
  std::string out;
  write(phi, out);
  return out;
}

MsoPtr parseMso(const std::string& text) { return SexpParser(text).parseAll(); }

std::string serializeMsoDocument(const MsoPtr& phi, const MsoManifest& manifest) {
  std::string out = "; hyperclock-mso 1\n; scale " + std::to_string(manifest.scale) + "\n";
  if (manifest.horizon) out += "; horizon " + manifest.horizon->str() + "\n";
  for (const auto& [k, v] : manifest.notes) out += "; " + k + " " + v + "\n";
  return out + serializeMso(phi) + "\n";
}

std::pair<MsoPtr, MsoManifest> parseMsoDocument(const std::string& text) {
  MsoManifest m;
  std::istringstream in(text);
  std::string line, body;
  while (std::getline(in, line)) {
    if (line.rfind(";", 0) != 0) {
      body += line + "\n";
      continue;
    }
    std::istringstream ls(line.substr(1));
    std::string key, value;
    ls >> key;
    std::getline(ls >> std::ws, value);
    if (key == "hyperclock-mso") continue;
    if (key == "scale")
      m.scale = std::stoll(value);
    else if (key == "horizon")
      m.horizon = Rational::parse(value);
    else if (!key.empty())
      m.notes[key] = value;
  }
  return {parseMso(body), m};
}

}  // namespace hyperclock
