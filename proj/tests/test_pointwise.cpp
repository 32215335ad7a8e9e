#include <gtest/gtest.h>

#include "generators.hpp"
#include "hyperclock/pointwise.hpp"

using namespace hyperclock;
using namespace hyperclock::testing;

namespace {

Interval iv(const char* s) { return Interval::parse(s); }

PointTimedAutomaton twoStates(const char* guard) {
  PointTimedAutomaton B;
  B.propositions = {"p", "q"};
  B.states = {"s0", "s1"};
  B.start = "s0";
  B.clocks = {"x"};
  B.final = {"s1", "s0"};
  PointEdge e{"s0", "s1", {"p"}, {}, {}};
  if (guard) e.guards.push_back(ClockConstraint::parse(guard));
  B.edges = {e, PointEdge{"s1", "s0", {"q"}, {}, {"x"}}};
  return B;
}

PointExecution steps(std::vector<std::pair<int, Rational>> xs) {
  PointExecution eta;
  for (auto& [e, t] : xs) eta.steps.push_back({e, t});
  return eta;
}

}  // namespace

TEST(PointExecution, Validation) {
  auto B = twoStates("(>= x 2)");
  EXPECT_TRUE(validatePointExecution(B, steps({{0, 3}})).empty());
  auto B4 = twoStates("(>= x 4)");
  auto vs = validatePointExecution(B4, steps({{0, 3}}));
  ASSERT_EQ(vs.size(), 1u);
  EXPECT_EQ(vs[0].step, 1);
  vs = validatePointExecution(B, steps({{0, 2}, {1, 2}}));
  ASSERT_EQ(vs.size(), 1u);
  EXPECT_EQ(vs[0].step, 2);
  EXPECT_NE(vs[0].message.find("strictly increasing"), std::string::npos);
  EXPECT_FALSE(validatePointExecution(B, steps({{1, 2}})).empty());
}

TEST(PointExecution, GuardUsesElapsedSincePreviousStep) {
  auto B = twoStates(nullptr);
  B.edges[1].guards.push_back(ClockConstraint::parse("(>= x 3)"));
  // x is never reset before step 2, so its value at t=3 is 3.
  EXPECT_TRUE(validatePointExecution(B, steps({{0, 1}, {1, 3}})).empty());
  EXPECT_FALSE(validatePointExecution(B, steps({{0, 1}, {1, Rational(5, 2)}})).empty());
}

TEST(IntervalAutomaton, Construction) {
  PointTimedAutomaton B;
  B.propositions = {"p"};
  B.states = {"a", "b"};
  B.start = "a";
  B.clocks = {"x"};
  B.final = {"b"};
  B.edges = {PointEdge{"a", "b", {"p"}, {ClockConstraint::parse("(<= x 2)"), ClockConstraint::parse("(> x 1)")}, {"x"}}};
  auto A = buildIntervalAutomaton(B);
  A.check();
  EXPECT_EQ(A.states.size(), 3u);
  EXPECT_EQ(A.edges.size(), 2u);
  EXPECT_TRUE(A.hasClock(kSingClock));
  EXPECT_EQ(A.label("edge0"), (std::set<std::string>{"p", "#"}));
  EXPECT_EQ(A.label("a"), (std::set<std::string>{"a"}));
  EXPECT_EQ(A.initial, (std::set<std::string>{"a", "edge0"}));
  EXPECT_EQ(A.final, (std::set<std::string>{"edge0"}));
  EXPECT_EQ(A.beta("edge0", "x")->str(), "(and (<= x 2) (> x 1))");
  EXPECT_EQ(A.beta("edge0", kSingClock)->str(), "(= x_sing 0)");
  EXPECT_EQ(A.beta("a", "x")->kind(), ClockConstraint::Kind::True);
  EXPECT_EQ(A.edges[0].resets, (std::set<std::string>{kSingClock}));
  EXPECT_EQ(A.edges[1].resets, (std::set<std::string>{"x"}));
  B.clocks.push_back(kSingClock);
  EXPECT_THROW(buildIntervalAutomaton(B), std::invalid_argument);
}

TEST(Chi, Examples) {
  auto B = twoStates(nullptr);
  auto rho = chi(B, steps({{0, 3}}));
  ASSERT_EQ(rho.segments.size(), 2u);
  EXPECT_EQ(rho.segments[0], (Segment{"s0", iv("[0,3)")}));
  EXPECT_EQ(rho.segments[1], (Segment{"edge0", iv("[3,3]")}));
  rho = chi(B, steps({{0, 3}, {1, 5}}));
  ASSERT_EQ(rho.segments.size(), 4u);
  EXPECT_EQ(rho.segments[2], (Segment{"s1", iv("(3,5)")}));
  EXPECT_EQ(rho.segments[3], (Segment{"edge1", iv("[5,5]")}));
  EXPECT_EQ(rho.transitions, (std::vector<int>{0, 1, 2}));
  rho = chi(B, steps({{0, 0}, {1, 1}}));
  EXPECT_EQ(rho.segments[0], (Segment{"edge0", iv("[0,0]")}));
  auto A = buildIntervalAutomaton(B);
  EXPECT_TRUE(isValidAccepting(A, rho)) << rho.str();
}

TEST(Chi, InverseRejectsBadShapes) {
  auto B = twoStates(nullptr);
  Execution rho;
  rho.segments = {{"s0", iv("[0,3)")}, {"edge0", iv("[3,4]")}};
  rho.transitions = {0};
  EXPECT_THROW(chiInverse(B, rho), std::invalid_argument);
  rho.segments = {{"s0", iv("[0,3)")}};
  rho.transitions = {};
  EXPECT_THROW(chiInverse(B, rho), std::invalid_argument);
  auto A = buildIntervalAutomaton(B);
  // The x_sing invariant is what makes a non-singular edge segment invalid.
  rho.segments = {{"s0", iv("[0,3)")}, {"edge0", iv("[3,4]")}};
  rho.transitions = {0};
  EXPECT_FALSE(validateExecution(A, rho).empty());
}

TEST(Chi, RandomBijection) {
  auto g = rng(20);
  int n = 0;
  for (int a = 0; a < 40; ++a) {
    auto B = randomPointAutomaton(g);
    auto A = buildIntervalAutomaton(B);
    for (int k = 0; k < 200; ++k) {
      auto eta = randomPointRunAttempt(g, B, 2, 5, 4);
      if (!eta) continue;
      ++n;
      auto rho = chi(B, *eta);
      ASSERT_TRUE(isValidAccepting(A, rho)) << eta->str() << " " << rho.str();
      EXPECT_EQ(chiInverse(B, rho), *eta);
      // # holds exactly at event times.
      for (int t4 = 0; t4 < 24; ++t4) {
        Rational t(t4, 4);
        int seg = rho.segmentAt(t);
        bool marked = seg >= 0 && A.label(rho.segments[seg].state).count(kMark);
        EXPECT_EQ(marked, eta->stepAt(t) >= 0);
      }
    }
  }
  EXPECT_GT(n, 100);
}

TEST(PointExecution, ExtendsFrom) {
  auto a = steps({{0, 1}, {1, 2}});
  EXPECT_TRUE(extendsFrom(steps({{0, 1}, {1, 3}}), a, Rational(3, 2)));
  EXPECT_FALSE(extendsFrom(steps({{0, 1}, {1, 3}}), a, 2));
  EXPECT_TRUE(extendsFrom(a, a, 2));
  EXPECT_FALSE(extendsFrom(steps({{0, 1}, {1, Rational(3, 2)}}), a, Rational(3, 2)));
  // Stopped before t.
  EXPECT_FALSE(extendsFrom(steps({{0, 1}}), a, Rational(3, 2)));
  EXPECT_TRUE(extendsFrom(steps({{0, 1}}), a, 1));
}
