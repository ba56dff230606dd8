#include <gtest/gtest.h>

#include <sstream>

#include "cfst/dual.hpp"
#include "cfst/equiv.hpp"
#include "cfst/pretty.hpp"
#include "cfst/syntax.hpp"
#include "generators.hpp"
#include "oracles.hpp"

using namespace cfst;
using namespace cfst::testing;

namespace {

const char* kTreeC = "rec x. +{Leaf: Skip, Node: !Int;x;x;?Int}";

Verdict decide(const std::string& a, const std::string& b, EquivOptions opts = {}) {
  KindEnv env{{"alpha", Kind::sl()}, {"beta", Kind::sl()}};
  return equivalence(parse_type(a), parse_type(b), env, opts);
}

}  // namespace

TEST(Node, Canonical) {
  Node n = make_node({{{2}, {1}}, {{1}, {1, 2}}, {{2}, {1}}});
  ASSERT_EQ(n.pairs.size(), 2u);
  for (const auto& [l, r] : n.pairs) EXPECT_LE(l, r);
  EXPECT_TRUE(std::is_sorted(n.pairs.begin(), n.pairs.end()));
  EXPECT_EQ(n.total_length(), 5u);
  EXPECT_EQ(NodeHash{}(n), NodeHash{}(make_node({{{1}, {2}}, {{1, 2}, {1}}})));
}

TEST(Congruence, RewritesInsideWords) {
  WordPair ab{{1}, {2}};
  std::vector<const WordPair*> rel{&ab};
  EXPECT_TRUE(congruent({{1, 3}, {2, 3}}, rel));
  EXPECT_TRUE(congruent({{3, 1, 1}, {3, 2, 1}}, rel));
  EXPECT_TRUE(congruent({{1, 1}, {2, 2}}, rel));
  EXPECT_FALSE(congruent({{1, 3}, {3, 2}}, rel));
  EXPECT_FALSE(congruent({{3}, {4}}, rel));
}

TEST(Expand, MismatchedActionsFail) {
  GrammarBuilder b;
  Word x = b.add(parse_type("!Int"));
  Word y = b.add(parse_type("?Int"));
  Grammar g = compute_norms(b.finish());
  EXPECT_FALSE(expand(g, make_node({{x, y}})));
  auto same = expand(g, make_node({{x, x}}));
  ASSERT_TRUE(same);
}

TEST(Equiv, Examples) {
  EXPECT_EQ(decide("Skip;!Int", "!Int"), Verdict::Equivalent);
  EXPECT_EQ(decide("!Int;Skip", "!Int"), Verdict::Equivalent);
  EXPECT_EQ(decide("!Int", "?Int"), Verdict::NotEquivalent);
  EXPECT_EQ(decide("+{A: !Int, B: Skip};?Bool", "+{A: !Int;?Bool, B: ?Bool}"),
            Verdict::Equivalent);
  EXPECT_EQ(decide("+{A: Skip}", "&{A: Skip}"), Verdict::NotEquivalent);
  EXPECT_EQ(decide(kTreeC, std::string("+{Leaf: Skip, Node: !Int;(") + kTreeC + ");(" + kTreeC + ");?Int}"),
            Verdict::Equivalent);
  EXPECT_EQ(decide("rec x. !Int;x", "rec y. !Int;!Int;y"), Verdict::Equivalent);
  EXPECT_EQ(decide("rec x. !Int;x;?Int", "rec x. !Int;x;?Bool"), Verdict::Equivalent);
  EXPECT_EQ(decide("rec x. !Int;x;?Int", "rec x. !Int;x"), Verdict::Equivalent);
  EXPECT_EQ(decide("(rec x. +{A: Skip, B: !Int;x;?Int});?Bool",
                   "(rec x. +{A: Skip, B: !Int;x;?Int});?Int"),
            Verdict::NotEquivalent);
  EXPECT_EQ(decide("alpha;Skip", "alpha"), Verdict::Equivalent);
  EXPECT_EQ(decide("alpha;beta", "beta;alpha"), Verdict::NotEquivalent);
}

TEST(Equiv, FunctionalTypes) {
  EXPECT_EQ(decide("Int -> Skip;!Int", "Int -> !Int"), Verdict::Equivalent);
  EXPECT_EQ(decide("Int -> Int", "Int -o Int"), Verdict::NotEquivalent);
  EXPECT_EQ(decide("(Int, !Int;Skip)", "(Int, !Int)"), Verdict::Equivalent);
  EXPECT_EQ(decide("Int", "Skip"), Verdict::NotEquivalent);
  EXPECT_EQ(decide("Tree", "Tree"), Verdict::Equivalent);
}

TEST(Equiv, NonTailRecursiveUnfoldings) {
  // Two presentations of the same context-free protocol.
  EXPECT_EQ(decide("rec x. &{Done: Skip, More: ?Int;x;!Int}",
                   "&{Done: Skip, More: ?Int;(rec x. &{Done: Skip, More: ?Int;x;!Int});!Int}"),
            Verdict::Equivalent);
  EXPECT_EQ(decide("rec x. +{A: !Int;x;x, B: Skip}", "rec y. +{A: !Int;y;y, B: Skip};Skip"),
            Verdict::Equivalent);
  EXPECT_EQ(decide("rec x. +{A: !Int;x;x, B: Skip}", "rec y. +{A: !Int;y, B: Skip}"),
            Verdict::NotEquivalent);
}

TEST(Equiv, TreeCAgainstUnfoldings) {
  TypePtr t = parse_type(kTreeC);
  for (int levels = 1; levels <= 4; ++levels) {
    SearchResult r = session_equivalence(t, unfold_levels(t, levels));
    EXPECT_EQ(r.verdict, Verdict::Equivalent) << levels;
    EXPECT_LT(r.nodes, EquivOptions{}.budget);
  }
}

TEST(Equiv, BudgetExhaustionIsInconclusive) {
  EquivOptions opts;
  opts.budget = 1;
  TypePtr t = parse_type(kTreeC);
  SearchResult r = session_equivalence(t, unfold_levels(t, 3), opts);
  EXPECT_EQ(r.verdict, Verdict::Inconclusive);
  EXPECT_THROW(equivalent(t, unfold_levels(t, 3), {}, opts), InconclusiveError);
}

TEST(Equiv, TraceLines) {
  std::ostringstream out;
  EquivOptions opts;
  opts.trace = &out;
  decide("rec x. !Int;x", "rec y. !Int;!Int;y", opts);
  std::string line;
  std::istringstream in(out.str());
  int lines = 0;
  while (std::getline(in, line)) {
    ++lines;
    EXPECT_EQ(line.rfind("depth=", 0), 0u) << line;
    EXPECT_NE(line.find(" pairs="), std::string::npos);
    EXPECT_NE(line.find(" action="), std::string::npos);
  }
  EXPECT_GT(lines, 0);
}

TEST(Equiv, Reflexive) {
  Rng rng(11);
  GenConfig cfg;
  cfg.free_vars = {"alpha"};
  for (int i = 0; i < 300; ++i) {
    TypePtr t = random_session(rng, cfg);
    EXPECT_EQ(equivalence(t, t, {{"alpha", Kind::sl()}}), Verdict::Equivalent) << pretty(t);
    EXPECT_EQ(equivalence(t, unfold_levels(t, 2), {{"alpha", Kind::sl()}}), Verdict::Equivalent)
        << pretty(t);
  }
}

namespace {

void law_suite(std::pair<TypePtr, TypePtr> (*law)(Rng&, const GenConfig&), std::uint64_t seed) {
  Rng rng(seed);
  GenConfig cfg;
  cfg.depth = 3;
  for (int i = 0; i < 200; ++i) {
    auto [a, b] = law(rng, cfg);
    ASSERT_EQ(session_equivalence(a, b).verdict, Verdict::Equivalent)
        << pretty(a) << "  vs  " << pretty(b);
  }
}

}  // namespace

TEST(Laws, Monoid) { law_suite(monoid_instance, 21); }
TEST(Laws, Associativity) { law_suite(associativity_instance, 22); }
TEST(Laws, Distributivity) { law_suite(distributivity_instance, 23); }

TEST(Oracle, PerturbedPairsAgreeWithProductSearch) {
  Rng rng(31);
  GenConfig cfg;
  cfg.depth = 3;
  int decisive = 0;
  for (int i = 0; i < 300; ++i) {
    TypePtr a = random_session(rng, cfg);
    TypePtr b = perturb(rng, a);
    OracleVerdict o = bounded_bisimilarity(a, b);
    Verdict v = session_equivalence(a, b).verdict;
    ASSERT_NE(v, Verdict::Inconclusive) << pretty(a) << " vs " << pretty(b);
    if (o == OracleVerdict::Unknown) continue;
    ++decisive;
    ASSERT_EQ(v == Verdict::Equivalent, o == OracleVerdict::Equivalent)
        << pretty(a) << " vs " << pretty(b) << ": oracle " << to_string(o);
  }
  EXPECT_GT(decisive, 150);
}

TEST(Oracle, RegularFragmentMatchesGayHole) {
  Rng rng(41);
  GenConfig cfg;
  cfg.depth = 4;
  cfg.labels = 2;
  int equal = 0;
  for (int i = 0; i < 200; ++i) {
    TypePtr a = random_tail_recursive(rng, cfg);
    TypePtr b = (i % 3 == 0) ? random_tail_recursive(rng, cfg)
               : (i % 3 == 1) ? unfold_levels(a, 2)
                              : perturb(rng, a);
    bool expected = gay_hole_equivalent(a, b);
    equal += expected;
    ASSERT_EQ(session_equivalence(a, b).verdict,
              expected ? Verdict::Equivalent : Verdict::NotEquivalent)
        << pretty(a) << " vs " << pretty(b);
  }
  EXPECT_GT(equal, 40);
}

TEST(Ablation, VerdictsDoNotDependOnStrategy) {
  Rng rng(51);
  GenConfig cfg;
  cfg.depth = 3;
  for (int i = 0; i < 150; ++i) {
    TypePtr a = random_session(rng, cfg);
    TypePtr b = i % 2 ? perturb(rng, a) : unfold_levels(a, 1);
    Verdict base = session_equivalence(a, b).verdict;
    ASSERT_NE(base, Verdict::Inconclusive);
    EquivOptions plain;
    plain.prioritize = false;
    EquivOptions single;
    single.simplification = Simplification::SinglePass;
    EXPECT_EQ(session_equivalence(a, b, plain).verdict, base) << pretty(a) << " vs " << pretty(b);
    EXPECT_EQ(session_equivalence(a, b, single).verdict, base) << pretty(a) << " vs " << pretty(b);
    EquivOptions off;
    off.simplification = Simplification::Off;
    off.budget = 5000;
    Verdict v = session_equivalence(a, b, off).verdict;
    if (v != Verdict::Inconclusive) EXPECT_EQ(v, base) << pretty(a) << " vs " << pretty(b);
  }
}

TEST(Equiv, DualityCommutesWithEquivalence) {
  Rng rng(61);
  for (int i = 0; i < 100; ++i) {
    TypePtr a = random_session(rng);
    TypePtr b = i % 2 ? perturb(rng, a) : unfold_levels(a, 1);
    EXPECT_EQ(session_equivalence(a, b).verdict, session_equivalence(dual(a), dual(b)).verdict);
  }
}

TEST(Rewrites, EquivalentVariantsAreEquivalent) {
  Rng rng(71);
  GenConfig cfg;
  cfg.depth = 4;
  cfg.free_vars = {"alpha", "beta"};
  KindEnv env{{"alpha", Kind::sl()}, {"beta", Kind::sl()}};
  for (int i = 0; i < 300; ++i) {
    TypePtr a = random_session(rng, cfg);
    TypePtr b = equivalent_variant(rng, a, 10);
    ASSERT_EQ(equivalence(a, b, env), Verdict::Equivalent) << pretty(a) << "  vs  " << pretty(b);
  }
}

TEST(Oracle, PerturbedVariantsAgreeWithProductSearch) {
  Rng rng(72);
  GenConfig cfg;
  cfg.depth = 4;
  int decisive = 0, equal = 0;
  for (int i = 0; i < 300; ++i) {
    TypePtr a = random_session(rng, cfg);
    TypePtr b = perturb(rng, equivalent_variant(rng, a, 8));
    OracleVerdict o = bounded_bisimilarity(a, b);
    Verdict v = session_equivalence(a, b).verdict;
    ASSERT_NE(v, Verdict::Inconclusive) << pretty(a) << " vs " << pretty(b);
    if (o == OracleVerdict::Unknown) continue;
    ++decisive;
    equal += o == OracleVerdict::Equivalent;
    ASSERT_EQ(v == Verdict::Equivalent, o == OracleVerdict::Equivalent)
        << pretty(a) << " vs " << pretty(b) << ": oracle " << to_string(o);
  }
  EXPECT_GT(decisive, 250);
}
