#include <gtest/gtest.h>

#include <functional>

#include "oracles.hpp"
#include "hyperclock/mso.hpp"

using namespace hyperclock;
using namespace hyperclock::testing;
using MF = MsoFormula;

namespace {

Flow flowOf(const Rational& N, std::vector<std::pair<std::string, std::string>> segs) {
  std::vector<FlowSegment> out;
  for (auto& [iv, p] : segs) out.push_back({Interval::parse(iv), {p}});
  return Flow(N, out);
}

}  // namespace

TEST(Mso, Examples) {
  Flow f = flowOf(2, {{"[0,1)", "P"}});
  EXPECT_TRUE(evalMso(f, {}, MF::existsFO("x", MF::pred("P", "x")), 2));
  EXPECT_FALSE(evalMso(f, {}, MF::existsFO("x", mso::conj(MF::less("x", "x"), MF::pred("P", "x"))), 2));

  Flow g = flowOf(2, {{"[0,2)", "P"}});
  auto plus = MF::existsFO("y", mso::conj(MF::plusOne("x", "y"), MF::pred("P", "y")));
  EXPECT_TRUE(evalMso(g, {{"x", Rational(1, 2)}}, plus, 2));
  EXPECT_FALSE(evalMso(g, {{"x", Rational(3, 2)}}, plus, 2));
  EXPECT_FALSE(evalMso(f, {{"x", Rational(1, 2)}}, plus, 2));

  // A singular point found through shift closure: Q only at 5/2, reached from x = 3/2.
  Flow h = flowOf(3, {{"[5/2,5/2]", "Q"}});
  EXPECT_TRUE(evalMso(h, {{"x", Rational(3, 2)}},
                      MF::existsFO("y", mso::conj(MF::plusOne("x", "y"), MF::pred("Q", "y"))), 3));
  EXPECT_TRUE(evalMso(h, {}, MF::existsFO("y", MF::pred("Q", "y")), 3));

  EXPECT_THROW(evalMso(f, {}, MF::pred("P", "x"), 2), MsoScopeError);
  EXPECT_THROW(evalMso(f, {{"x", Rational(2)}}, MF::pred("P", "x"), 2), std::invalid_argument);
}

TEST(Mso, DerivedFormsExpandToCore) {
  auto f = mso::forallFO("x", mso::implies(MF::pred("P", "x"), mso::le("x", "y")));
  EXPECT_EQ(serializeMso(f), "(not (exists-fo x (not (or (not (pred P x)) (not (< y x))))))");
  EXPECT_EQ(serializeMso(mso::truth()), "(not (or))");
  EXPECT_EQ(serializeMso(MF::less("x", "y")), "(< x y)");
  EXPECT_EQ(serializeMso(MF::existsFO("x", MF::pred("P", "x"))), "(exists-fo x (pred P x))");
  EXPECT_EQ(freeFOVars(f), std::set<std::string>{"y"});
  EXPECT_EQ(freePredicates(mso::existsSO({"P"}, mso::conj(MF::pred("P", "x"), MF::pred("Q", "x")))),
            std::set<std::string>{"Q"});
}

TEST(Mso, SecondOrderGridWitnesses) {
  Flow f = flowOf(3, {{"[1,2)", "Q"}});
  SoBudget b{2, 2, {}};
  // Some nonempty P inside Q.
  auto inside = mso::existsSO({"P"}, mso::conj(mso::forallFO("x", mso::implies(MF::pred("P", "x"),
                                                                               MF::pred("Q", "x"))),
                                               MF::existsFO("x", MF::pred("P", "x"))));
  EXPECT_TRUE(evalMso(f, {}, inside, 3, b));
  // P equal to the complement of Q needs two segments.
  auto complement = mso::existsSO(
      {"P"}, mso::forallFO("x", mso::iff(MF::pred("P", "x"), MF::neg(MF::pred("Q", "x")))));
  EXPECT_TRUE(evalMso(f, {}, complement, 3, b));
  EXPECT_FALSE(evalMso(f, {}, complement, 3, SoBudget{2, 1, {}}));
  // A point set off the grid is out of reach.
  Flow h = flowOf(3, {{"[1/3,1/3]", "Q"}});
  auto same = mso::existsSO({"P"}, mso::forallFO("x", mso::iff(MF::pred("P", "x"), MF::pred("Q", "x"))));
  EXPECT_FALSE(evalMso(h, {}, same, 3, b));
  EXPECT_TRUE(evalMso(h, {}, same, 3, SoBudget{3, 1, {}}));
  // The oracle replaces enumeration.
  Flow w = flowOf(3, {{"[1/3,1/3]", "P"}});
  SoBudget o{2, 2, [&](const std::vector<std::string>& block) {
               EXPECT_EQ(block, std::vector<std::string>{"P"});
               return std::optional<std::vector<Flow>>{{w}};
             }};
  EXPECT_TRUE(evalMso(h, {}, same, 3, o));
  EXPECT_FALSE(evalMso(f, {}, same, 3, o));
}

TEST(Mso, FirstOrderMatchesLatticeOracleAndProbes) {
  auto g = rng(60);
  const Rational N(3);
  int nontrivial = 0;
  for (int inst = 0; inst < 40; ++inst) {
    Flow f = randomGridFlow(g, N, 2, {"P", "Q"}, 0.4);
    std::vector<std::string> scope{"x"};
    int counter = 0;
    MsoPtr phi = randomFO(g, scope, 4, counter);
    // Truth on each class of the 1/2 grid, checked against the lattice oracle.
    std::vector<Interval> cells = gridCells(N, 2);
    std::vector<bool> truth;
    int trues = 0;
    for (const auto& c : cells) {
      Rational r = representative(c);
      bool v = evalMso(f, {{"x", r}}, phi, N);
      std::map<std::string, Rational> env{{"x", r}};
      ASSERT_EQ(v, latticeEval(f, phi, env, N, 0)) << serializeMso(phi) << " at " << r.str() << "\n" << f.str();
      truth.push_back(v);
      trues += v;
    }
    if (trues > 0 && trues < int(cells.size())) ++nontrivial;
    // Dense probes agree with the representative of their class.
    for (int p = 0; p < 10000; ++p) {
      Rational t(uniform(g, 0, 3 * 7919 - 1), 7919);
      std::size_t idx = 0;
      while (!contains(cells[idx], t)) ++idx;
      ASSERT_EQ(evalMso(f, {{"x", t}}, phi, N), truth[idx]) << serializeMso(phi) << " at " << t.str();
    }
  }
  EXPECT_GT(nontrivial, 5);
}

TEST(Mso, RefiningCandidatesKeepsVerdict) {
  auto g = rng(61);
  const Rational N(3);
  for (int inst = 0; inst < 150; ++inst) {
    Flow f = randomGridFlow(g, N, 2, {"P", "Q"}, 0.4);
    std::vector<std::string> scope{"x"};
    int counter = 0;
    MsoPtr phi = randomFO(g, scope, 5, counter);
    Rational t(uniform(g, 0, 3 * 97 - 1), 97);
    std::vector<Rational> extra;
    for (int i = 0; i < 6; ++i) extra.push_back(Rational(uniform(g, 0, 3 * 101 - 1), 101));
    EXPECT_EQ(evalMso(f, {{"x", t}}, phi, N), evalMso(f, {{"x", t}}, phi, N, {}, extra)) << serializeMso(phi);
  }
}

TEST(AutomatonFormula, ExampleRun) {
  auto A = exampleAutomaton();
  auto phiA = emitAutomatonFormula(A);
  Flow f = encodeFlow(A, exampleRun(), 15);
  EXPECT_TRUE(evalMso(f, {}, phiA, 15));
  // Two states at once.
  Flow two = Flow::merge(f, Flow(15, {{Interval::closed(2, 3), {"v:v2"}}}));
  EXPECT_FALSE(evalMso(two, {}, phiA, 15));
  // A run starting in a non-initial state.
  Flow nonInitial(15, {{Interval::parse("[0,4)"), {"v:v2"}}});
  EXPECT_FALSE(evalMso(nonInitial, {}, phiA, 15));
  EXPECT_FALSE(decodeFlow(A, nonInitial).ok());
  // Non-accepting: stops in v2.
  Execution stop;
  stop.segments = {{"v1", Interval::parse("[0,1]")}, {"v2", Interval::parse("(1,3)")}};
  stop.transitions = {0};
  EXPECT_FALSE(evalMso(encodeFlow(A, stop, 15, false), {}, phiA, 15));
  auto B = exampleAutomaton();
  B.stateConstraints[{"v1", "x1"}] = ClockConstraint::atom("x1", Rel::Le, Rational(1, 2));
  EXPECT_THROW(emitAutomatonFormula(B), std::invalid_argument);
}

TEST(AutomatonFormula, AcceptsEveryEncodedRun) {
  auto g = rng(62);
  int checked = 0;
  for (int a = 0; a < 60; ++a) {
    auto A = randomAutomaton(g);
    auto phiA = emitAutomatonFormula(A);
    RunShape rs;
    for (const auto& rho : randomRuns(g, A, rs, 20, 400)) {
      Flow f = encodeFlow(A, rho, rs.horizon);
      ASSERT_TRUE(evalMso(f, {}, phiA, rs.horizon)) << rho.str() << "\n" << f.str();
      ++checked;
    }
  }
  EXPECT_GE(checked, 300);
}

TEST(AutomatonFormula, AcceptsExactlyTheDecodableFlows) {
  auto g = rng(63);
  int accepted = 0, rejected = 0;
  const int k = 4;
  for (int a = 0; a < 80; ++a) {
    auto A = randomAutomaton(g);
    auto phiA = emitAutomatonFormula(A);
    auto alphabet = predicateAlphabet(A);
    RunShape rs;
    const Rational N(rs.horizon);
    auto cells = gridCells(N, k);
    for (const auto& rho : randomRuns(g, A, rs, 10, 200)) {
      for (int m = 0; m < 4; ++m) {
        Flow base = encodeFlow(A, rho, N);
        std::vector<FlowSegment> segs;
        for (const auto& c : cells) segs.push_back({c, base.at(representative(c))});
        int muts = m == 0 ? 0 : uniform(g, 1, 3);
        for (int i = 0; i < muts; ++i) {
          auto& s = segs[uniform(g, 0, int(segs.size()) - 1)];
          const auto& p = alphabet[uniform(g, 0, int(alphabet.size()) - 1)];
          if (!s.preds.erase(p)) s.preds.insert(p);
        }
        Flow f(N, segs);
        bool sat = evalMso(f, {}, phiA, N);
        auto d = decodeFlow(A, f);
        ASSERT_EQ(sat, d.ok()) << f.str() << "\n" << (d.error ? d.error->str() : std::string("decoded"));
        if (sat) {
          ++accepted;
          EXPECT_TRUE(isValidAccepting(A, *d.execution));
          EXPECT_EQ(encodeFlow(A, *d.execution, N), f);
        } else {
          ++rejected;
        }
      }
    }
  }
  EXPECT_GE(accepted, 200);
  EXPECT_GE(rejected, 200);
}

TEST(EnvToFlow, Examples) {
  auto A = exampleAutomaton();
  PathEnvironment Pi;
  Pi.horizon = 15;
  Pi.paths["a"] = exampleRun();
  EXPECT_EQ(envToFlow(A, Pi, {"a"}), encodeFlow(A, exampleRun(), 15).suffixed("@1"));

  Pi.paths["b"] = exampleRun();
  Flow two = envToFlow(A, Pi, {"a", "b"});
  for (const auto& s : two.segments()) {
    std::set<std::string> ones, twos;
    for (const auto& p : s.preds) {
      std::string base = p.substr(0, p.rfind('@'));
      (p.back() == '1' ? ones : twos).insert(base);
    }
    EXPECT_EQ(ones, twos);
  }

  Execution flat;
  flat.segments = {{"v1", Interval::parse("[0,15)")}};
  Pi.paths["b"] = flat;
  Flow mixed = envToFlow(A, Pi, {"a", "b"});
  EXPECT_EQ(mixed.breakpoints(), encodeFlow(A, exampleRun(), 15).breakpoints());
  // One state group for b and one predicate group per segment of a.
  std::set<PredSet> groupsA;
  for (const auto& s : mixed.segments()) {
    EXPECT_TRUE(s.preds.count("v:v1@2"));
    PredSet a;
    for (const auto& p : s.preds)
      if (p.back() == '1') a.insert(p);
    groupsA.insert(a);
  }
  EXPECT_EQ(groupsA.size(), 7u);
  Execution tooLong;
  tooLong.segments = {{"v1", Interval::parse("[0,16)")}};
  Pi.paths["b"] = tooLong;
  EXPECT_THROW(envToFlow(A, Pi, {"a", "b"}), std::invalid_argument);
}

TEST(Translate, Atoms) {
  auto A = exampleAutomaton();
  auto f = parseFormula("p@a", false);
  auto tr = translateHcmtl(f, A, {"a"});
  ASSERT_EQ(tr.size(), 2u);
  for (const auto& t : tr) EXPECT_EQ(serializeMso(t), "(or (pred v:v1@1 x) (pred v:v3@1 x))");
  // α⁻¹(q) ∩ α⁻¹(p) = {v3}.
  auto g = translateHcmtl(parseFormula("p@a & q@a", false), A, {"a"});
  Flow fl = envToFlow(A, {{{"a", exampleRun()}}, 15}, {"a"});
  EXPECT_TRUE(evalMso(fl, {{"x", Rational(11)}}, g[1], 15));
  EXPECT_FALSE(evalMso(fl, {{"x", Rational(7)}}, g[1], 15));
  EXPECT_EQ(serializeMso(translateHcmtl(parseFormula("!p@a", false), A, {"a"})[0]),
            "(or (pred v:v2@1 x) (pred v:v4@1 x))");
}

TEST(Translate, MembershipNearTheHorizon) {
  // y − x ≤ 2 must hold when x + 2 lies beyond N.
  auto A = exampleAutomaton();
  auto f = parseFormula("(q@a U[0,2] p@a)", false);
  auto tr = translateHcmtl(f, A, {"a"});
  Execution rho;
  rho.segments = {{"v1", Interval::parse("[0,3)")}, {"v2", Interval::parse("[3,4)")}, {"v3", Interval::parse("[4,5)")}};
  rho.transitions = {0, 1};
  PathEnvironment Pi{{{"a", rho}}, 5};
  Flow fl = envToFlow(A, Pi, {"a"});
  for (auto t : {Rational(7, 2), Rational(3), Rational(1, 2), Rational(9, 2)})
    EXPECT_EQ(evalMso(fl, {{"x", t}}, tr[1], 5), satInterval(A, Pi, t, std::string("a"), f)) << t.str();
}

TEST(Translate, QuantifierFreeMatchesSemantics) {
  auto g = rng(64);
  int checks = 0, trues = 0;
  for (int inst = 0; inst < 120; ++inst) {
    auto A = randomAutomaton(g);
    RunShape rs{4, 5, 4};
    auto runs = randomRuns(g, A, rs, 2, 300);
    if (runs.size() < 2) continue;
    PathEnvironment Pi{{{"x", runs[0]}, {"y", runs[1]}}, 5};
    FormulaShape sh;
    sh.freeVars = {"x", "y"};
    sh.maxQuantifiers = 0;
    auto phi = randomFormula(g, sh);
    auto tr = translateHcmtl(phi, A, {"x", "y"});
    Flow f = envToFlow(A, Pi, {"x", "y"});
    for (int p = 0; p < 12; ++p) {
      Rational t(uniform(g, 0, 39), 8);
      int i = uniform(g, 0, 2);
      Anchor dag = i == 0 ? Anchor{} : Anchor{i == 1 ? "x" : "y"};
      bool expect = satInterval(A, Pi, t, dag, phi);
      ASSERT_EQ(evalMso(f, {{"x", t}}, tr[i], 5), expect)
          << phi->str() << " at " << t.str() << " anchor " << i << "\n" << f.str();
      ++checks;
      trues += expect;
    }
  }
  EXPECT_GT(checks, 600);
  EXPECT_GT(trues, checks / 10);
  EXPECT_LT(trues, checks * 9 / 10);
}

TEST(Translate, QuantifiedMatchesSemanticsOverARunPool) {
  auto g = rng(65);
  int checks = 0, quantified = 0;
  for (int inst = 0; inst < 40; ++inst) {
    AutomatonShape ash;
    ash.maxStates = 3;
    ash.maxClocks = 1;
    ash.maxEdges = 4;
    auto A = randomAutomaton(g, ash);
    RunShape rs{2, 4, 3};
    auto pool = randomRuns(g, A, rs, 6, 300);
    if (pool.size() < 2) continue;
    RunListProvider provider(pool);
    std::vector<Flow> encoded;
    for (const auto& r : pool) encoded.push_back(encodeFlow(A, r, 4));
    SoBudget budget{2, 2, [&](const std::vector<std::string>& block) {
                      std::string suffix = block[0].substr(block[0].rfind('@'));
                      std::vector<Flow> out;
                      for (const auto& e : encoded) out.push_back(e.suffixed(suffix));
                      return std::optional<std::vector<Flow>>(out);
                    }};
    PathEnvironment Pi{{{"x", pool[0]}}, 4};
    FormulaShape sh;
    sh.freeVars = {"x"};
    sh.maxQuantifiers = 1;
    sh.depth = 3;
    sh.maxConst = 2;
    auto phi = randomFormula(g, sh);
    if (quantifierCount(phi) > 0) ++quantified;
    auto tr = translateHcmtl(phi, A, {"x"});
    Flow f = envToFlow(A, Pi, {"x"});
    for (int p = 0; p < 4; ++p) {
      Rational t = p == 0 ? Rational(0) : Rational(uniform(g, 0, 15), 4);
      int i = uniform(g, 0, 1);
      Anchor dag = i == 0 ? Anchor{} : Anchor{"x"};
      bool expect = satInterval(A, Pi, t, dag, phi, &provider);
      ASSERT_EQ(evalMso(f, {{"x", t}}, tr[i], 4, budget), expect)
          << phi->str() << " at " << t.str() << " anchor " << i;
      ++checks;
    }
  }
  EXPECT_GT(checks, 80);
  EXPECT_GT(quantified, 10);
}

TEST(Serialize, RoundTrip) {
  auto g = rng(66);
  for (int a = 0; a < 10; ++a) {
    auto A = randomAutomaton(g);
    auto phiA = emitAutomatonFormula(A);
    std::string s = serializeMso(phiA);
    EXPECT_EQ(serializeMso(parseMso(s)), s);
    EXPECT_EQ(s, serializeMso(emitAutomatonFormula(A)));
    MsoManifest m;
    m.scale = 4;
    m.horizon = Rational(20);
    m.notes["free"] = "x";
    auto [back, mm] = parseMsoDocument(serializeMsoDocument(phiA, m));
    EXPECT_EQ(serializeMso(back), s);
    EXPECT_EQ(mm.scale, 4);
    EXPECT_EQ(*mm.horizon, Rational(20));
    EXPECT_EQ(mm.notes.at("free"), "x");
  }
  EXPECT_THROW(parseMso("(< x"), std::invalid_argument);
  EXPECT_THROW(parseMso("(foo x y)"), std::invalid_argument);
}
