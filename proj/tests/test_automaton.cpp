#include <gtest/gtest.h>

#include <map>

#include "generators.hpp"
#include "hyperclock/automaton.hpp"

using namespace hyperclock;
using namespace hyperclock::testing;

namespace {

Interval iv(const char* s) { return Interval::parse(s); }

PredSet ps(std::initializer_list<const char*> xs) {
  PredSet out;
  for (auto x : xs) out.insert(x);
  return out;
}

TimedAutomaton oneState(const char* beta) {
  TimedAutomaton A;
  A.states = {"v"};
  A.initial = {"v"};
  A.final = {"v"};
  A.clocks = {"x"};
  if (beta) A.stateConstraints[{"v", "x"}] = ClockConstraint::parse(beta);
  return A;
}

}  // namespace

TEST(Execution, ExampleRunIsValid) {
  auto A = exampleAutomaton();
  A.check();
  auto rho = exampleRun();
  EXPECT_TRUE(validateExecution(A, rho).empty());
  EXPECT_TRUE(isAccepting(A, rho));
}

TEST(Execution, EdgeMembershipViolation) {
  auto A = exampleAutomaton();
  Execution rho;
  rho.segments = {{"v1", iv("[0,5)")}, {"v3", iv("[5,6]")}};
  rho.transitions = {0};
  auto vs = validateExecution(A, rho);
  ASSERT_EQ(vs.size(), 1u);
  EXPECT_EQ(vs[0].kind, Violation::Kind::EdgeMembership);
  EXPECT_EQ(vs[0].index, 0);
}

TEST(Execution, StateConstraintWitness) {
  auto A = oneState("(<= x 2)");
  Execution rho;
  rho.segments = {{"v", iv("[0,3]")}};
  auto vs = validateExecution(A, rho);
  ASSERT_EQ(vs.size(), 1u);
  EXPECT_EQ(vs[0].kind, Violation::Kind::StateConstraint);
  ASSERT_TRUE(vs[0].time.has_value());
  // Clock equals t here, so the constraint fails exactly on (2,3].
  Rational w = *vs[0].time;
  EXPECT_TRUE(Rational(2) < w && w <= Rational(3)) << w.str();
  EXPECT_EQ(vs[0].constraint, "(<= x 2)");
  rho.segments = {{"v", iv("[0,2]")}};
  EXPECT_TRUE(validateExecution(A, rho).empty());
  rho.segments = {{"v", iv("[0,2)")}};
  EXPECT_TRUE(validateExecution(A, rho).empty());
}

TEST(Execution, StateConstraintOpenBoundary) {
  auto A = oneState("(< x 2)");
  Execution rho;
  rho.segments = {{"v", iv("[0,2)")}};
  EXPECT_TRUE(validateExecution(A, rho).empty());
  rho.segments = {{"v", iv("[0,2]")}};
  auto vs = validateExecution(A, rho);
  ASSERT_EQ(vs.size(), 1u);
  EXPECT_EQ(*vs[0].time, Rational(2));
  auto B = oneState("(> x 1)");
  rho.segments = {{"v", iv("[0,2)")}};
  vs = validateExecution(B, rho);
  ASSERT_EQ(vs.size(), 1u);
  EXPECT_EQ(*vs[0].time, Rational(0));
}

TEST(Execution, GuardUsesPreResetValuation) {
  TimedAutomaton A = oneState(nullptr);
  A.edges = {{"v", "v", {ClockConstraint::parse("(>= x 2)")}, {"x"}}};
  Execution rho;
  rho.segments = {{"v", iv("[0,2)")}, {"v", iv("[2,3]")}};
  rho.transitions = {0};
  EXPECT_TRUE(validateExecution(A, rho).empty());
  rho.segments = {{"v", iv("[0,1]")}, {"v", iv("(1,3]")}};
  auto vs = validateExecution(A, rho);
  ASSERT_EQ(vs.size(), 1u);
  EXPECT_EQ(vs[0].kind, Violation::Kind::Guard);
  EXPECT_EQ(*vs[0].time, Rational(1));
}

TEST(Execution, ClockValuation) {
  auto A = exampleAutomaton();
  auto rho = exampleRun();
  // Hand application of the recurrence: x1 reset at 5 (6 elapsed), x2 reset at 10 (1 elapsed).
  auto mu = clockValuationAt(A, rho, 11);
  EXPECT_EQ(mu.at("x1"), Rational(6));
  EXPECT_EQ(mu.at("x2"), Rational(1));
  mu = clockValuationAt(A, rho, 0);
  EXPECT_EQ(mu.at("x1"), Rational(0));
  EXPECT_EQ(mu.at("x2"), Rational(0));
  mu = clockValuationAt(A, rho, Rational(7, 2));
  EXPECT_EQ(mu.at("x1"), Rational(7, 2));
  mu = clockValuationAt(A, rho, 12);
  EXPECT_EQ(mu.at("x1"), Rational(7));
  EXPECT_EQ(mu.at("x2"), Rational(0));
  EXPECT_THROW(clockValuationAt(A, rho, 15), DomainError);
}

TEST(Execution, ClockValuationPiecewiseAffine) {
  auto g = rng(10);
  int runs = 0;
  for (int a = 0; a < 30; ++a) {
    auto A = randomAutomaton(g);
    for (const auto& rho : randomRuns(g, A, {}, 10, 400)) {
      ++runs;
      auto mus = entryValuations(A, rho);
      for (std::size_t i = 0; i < rho.segments.size(); ++i) {
        const Interval& I = rho.segments[i].interval;
        for (int k = 0; k <= 20; ++k) {
          Rational t(k, 4);
          if (!contains(I, t)) continue;
          auto mu = clockValuationAt(A, rho, t);
          for (const auto& x : A.clocks) EXPECT_EQ(mu.at(x), mus[i].at(x) + t - I.L());
        }
        if (i > 0)
          for (const auto& x : A.edges[rho.transitions[i - 1]].resets) EXPECT_EQ(mus[i].at(x), Rational(0));
      }
    }
  }
  EXPECT_GT(runs, 50);
}

TEST(Execution, Prefix) {
  Execution r;
  r.segments = {{"v", iv("[0,10]")}};
  EXPECT_EQ(prefix(r, 5).segments[0].interval, iv("[0,5]"));
  EXPECT_EQ(prefix(r, 10), r);
  auto rho = exampleRun();
  // 10 lies in the second segment [5,10], so the prefix keeps two segments.
  auto p = prefix(rho, 10);
  ASSERT_EQ(p.segments.size(), 2u);
  EXPECT_EQ(p.segments[1].interval, iv("[5,10]"));
  EXPECT_EQ(p.transitions, std::vector<int>{0});
  p = prefix(rho, 11);
  ASSERT_EQ(p.segments.size(), 3u);
  EXPECT_EQ(p.segments[2].interval, iv("(10,11]"));
  EXPECT_THROW(prefix(rho, 15), DomainError);
}

TEST(Execution, PrefixIsWellShaped) {
  auto g = rng(11);
  for (int a = 0; a < 20; ++a) {
    auto A = randomAutomaton(g);
    for (const auto& rho : randomRuns(g, A, {}, 10, 300))
      for (int k = 0; k <= 40; ++k) {
        Rational t(k, 8);
        if (!rho.contains(t)) continue;
        auto p = prefix(rho, t);
        std::vector<Interval> is;
        for (const auto& s : p.segments) is.push_back(s.interval);
        EXPECT_EQ(checkIntervalSequence(is), "");
        EXPECT_EQ(p.transitions.size() + 1, p.segments.size());
      }
  }
}

TEST(Encoding, ExampleFlow) {
  auto A = exampleAutomaton();
  auto f = encodeFlow(A, exampleRun());
  EXPECT_EQ(f.at(0), ps({"v:v1"}));
  EXPECT_EQ(f.at(Rational(9, 2)), ps({"v:v1"}));
  EXPECT_EQ(f.at(5), ps({"v:v2", "tminus:0", "rminus:x1"}));
  EXPECT_EQ(f.at(7), ps({"v:v2"}));
  EXPECT_EQ(f.at(10), ps({"v:v2", "tplus:1", "rplus:x2"}));
  EXPECT_EQ(f.at(11), ps({"v:v3"}));
  EXPECT_EQ(f.at(12), ps({"v:v1", "tminus:2", "rminus:x2", "tplus:3", "rplus:x1"}));
  EXPECT_EQ(f.at(14), ps({"v:v4"}));
  EXPECT_EQ(f.at(15), PredSet{});
  EXPECT_EQ(f.segments().size(), 7u);
}

TEST(Encoding, SingleSegment) {
  auto A = oneState(nullptr);
  Execution r;
  r.segments = {{"v", iv("[0,3]")}};
  auto f = encodeFlow(A, r);
  ASSERT_EQ(f.segments().size(), 1u);
  EXPECT_EQ(f.segments()[0].interval, iv("[0,3]"));
  EXPECT_EQ(f.at(Rational(31, 10)), PredSet{});
}

TEST(Encoding, DistinguishesSplitRuns) {
  auto A = oneState(nullptr);
  A.edges = {{"v", "v", {}, {}}};
  Execution r1, r2;
  r1.segments = {{"v", iv("[0,10]")}};
  r2.segments = {{"v", iv("[0,5]")}, {"v", iv("(5,10]")}};
  r2.transitions = {0};
  EXPECT_NE(encodeFlow(A, r1), encodeFlow(A, r2));
}

TEST(Encoding, RejectsInvalid) {
  auto A = exampleAutomaton();
  Execution r;
  r.segments = {{"v2", iv("[0,1]")}};
  EXPECT_THROW(encodeFlow(A, r), EncodingError);
}

TEST(Decoding, RoundTripExample) {
  auto A = exampleAutomaton();
  auto rho = exampleRun();
  auto d = decodeFlow(A, encodeFlow(A, rho));
  ASSERT_TRUE(d.ok()) << d.error->str();
  EXPECT_EQ(*d.execution, rho);
}

TEST(Decoding, UniqueStateViolation) {
  auto A = exampleAutomaton();
  Flow f(TimeBound::infinity(), {{iv("[0,2)"), ps({"v:v1"})}, {iv("[2,2]"), ps({"v:v1", "v:v2"})}});
  auto d = decodeFlow(A, f);
  ASSERT_FALSE(d.ok());
  EXPECT_EQ(d.error->property, 1);
  EXPECT_EQ(*d.error->time, Rational(2));
}

TEST(Decoding, StructuredErrors) {
  auto A = exampleAutomaton();
  auto dec = [&](std::vector<FlowSegment> s) { return decodeFlow(A, Flow(TimeBound::infinity(), s)); };
  EXPECT_EQ(dec({{iv("[0,1]"), ps({"v:v2"})}}).error->property, 2);
  EXPECT_EQ(dec({{iv("(0,1]"), ps({"v:v1"})}}).error->property, 1);
  EXPECT_EQ(dec({{iv("[0,1)"), ps({"v:v1"})}, {iv("(1,2)"), ps({"v:v4"})}}).error->property, 1);
  EXPECT_EQ(dec({{iv("[0,1)"), ps({"v:v1"})}, {iv("[1,2)"), ps({"v:v4"})}}).error->property, 5);
  EXPECT_EQ(dec({{iv("[0,1)"), ps({"v:v1"})}, {iv("[1,1]"), ps({"v:v4", "tminus:3"})}, {iv("(1,2)"), ps({"v:v4"})}})
                .error->property,
            4);
  EXPECT_EQ(dec({{iv("[0,1)"), ps({"v:v1"})}, {iv("[1,1]"), ps({"v:v1", "rminus:x1"})}, {iv("(1,2)"), ps({"v:v1"})}})
                .error->property,
            6);
  EXPECT_EQ(dec({{iv("[0,2)"), ps({"v:v1"})}}).error->property, 11);
  EXPECT_EQ(dec({{iv("[0,1)"), ps({"v:v1"})}, {iv("[1,2)"), ps({"v:v4", "tminus:3", "rminus:x1"})}}).error->property,
            3);
}

TEST(Decoding, RoundTripAndInjectivityOnRandomRuns) {
  auto g = rng(12);
  int total = 0;
  for (int a = 0; a < 25; ++a) {
    auto A = randomAutomaton(g);
    auto runs = randomRuns(g, A, {}, 30, 1500);
    std::map<Flow, Execution> seen;
    for (const auto& rho : runs) {
      ++total;
      Flow f = encodeFlow(A, rho, Rational(5));
      auto d = decodeFlow(A, f);
      ASSERT_TRUE(d.ok()) << rho.str() << " " << d.error->str();
      EXPECT_EQ(*d.execution, rho);
      auto [it, fresh] = seen.emplace(f, rho);
      EXPECT_TRUE(fresh) << "collision: " << rho.str() << " vs " << it->second.str();
    }
  }
  EXPECT_GT(total, 200);
}

TEST(Flow, CanonicalMerge) {
  Flow f(Rational(5), {{iv("[0,1)"), ps({"a"})}, {iv("[1,1]"), ps({"a"})}, {iv("(1,2)"), ps({"a"})}});
  ASSERT_EQ(f.segments().size(), 1u);
  EXPECT_EQ(f.segments()[0].interval, iv("[0,2)"));
  EXPECT_THROW(Flow(Rational(5), {{iv("[0,2]"), ps({"a"})}, {iv("[2,3]"), ps({"b"})}}), std::invalid_argument);
  EXPECT_THROW(Flow(Rational(5), {{iv("[0,5]"), ps({"a"})}}), std::invalid_argument);
  Flow g = Flow::merge(f, Flow(Rational(5), {{iv("[1,3)"), ps({"b"})}}));
  EXPECT_EQ(g.at(Rational(1, 2)), ps({"a"}));
  EXPECT_EQ(g.at(1), ps({"a", "b"}));
  EXPECT_EQ(g.at(2), ps({"b"}));
}

TEST(Execution, StateConstraintCheckAgreesWithSampling) {
  auto g = rng(13);
  int flagged = 0, clean = 0;
  for (int a = 0; a < 60; ++a) {
    auto A = randomAutomaton(g);
    for (int k = 0; k < 300; ++k) {
      // Build shape-valid runs directly so constraint failures are not filtered out.
      Execution rho;
      std::string cur = *A.initial.begin();
      Rational left = 0;
      bool lc = true;
      int n = uniform(g, 0, 3);
      bool ok = true;
      for (int i = 0; i < n && ok; ++i) {
        std::vector<int> out;
        for (std::size_t e = 0; e < A.edges.size(); ++e)
          if (A.edges[e].from == cur) out.push_back(int(e));
        if (out.empty()) break;
        int e = out[uniform(g, 0, int(out.size()) - 1)];
        Rational t = left + Rational(uniform(g, 0, 8), 4);
        bool rc = coin(g);
        try {
          rho.segments.push_back({cur, Interval(left, t, lc, rc)});
        } catch (const std::invalid_argument&) {
          ok = false;
          break;
        }
        rho.transitions.push_back(e);
        cur = A.edges[e].to;
        left = t;
        lc = !rc;
      }
      if (!ok) continue;
      try {
        rho.segments.push_back({cur, Interval(left, left + Rational(uniform(g, 0, 8), 4), lc, true)});
      } catch (const std::invalid_argument&) {
        continue;
      }
      auto mus = entryValuations(A, rho);
      bool sampledBad = false;
      for (std::size_t i = 0; i < rho.segments.size(); ++i) {
        const Interval& I = rho.segments[i].interval;
        for (int s = 0; s <= 160; ++s) {
          Rational t(s, 16);
          if (!contains(I, t)) continue;
          for (const auto& x : A.clocks)
            if (!evalConstraintAt(*A.beta(rho.segments[i].state, x), mus[i].at(x) + t - I.L())) sampledBad = true;
        }
      }
      bool reported = false;
      for (const auto& v : validateExecution(A, rho)) {
        if (v.kind != Violation::Kind::StateConstraint) continue;
        reported = true;
        int i = v.index;
        const Interval& I = rho.segments[i].interval;
        ASSERT_TRUE(contains(I, *v.time));
        auto mu = clockValuationAt(A, rho, *v.time);
        EXPECT_FALSE(evalConstraint(mu, *ClockConstraint::parse(v.constraint))) << rho.str();
      }
      if (sampledBad) EXPECT_TRUE(reported) << rho.str();
      (reported ? flagged : clean)++;
    }
  }
  EXPECT_GT(flagged, 50);
  EXPECT_GT(clean, 50);
}
