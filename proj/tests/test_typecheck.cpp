#include <gtest/gtest.h>

#include <fstream>
#include <sstream>

#include "cfst/pretty.hpp"
#include "cfst/typecheck.hpp"
#include "mutations.hpp"

using namespace cfst;
using namespace cfst::testing;

namespace {

std::string sample(const std::string& name) {
  std::ifstream in(std::string(CFST_SAMPLES) + "/" + name);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

// Parse diagnostics or type diagnostics, joined.
std::string errors(const std::string& src) {
  auto r = parse_program(src);
  Diagnostics d = r.program ? check_program(*r.program) : r.diagnostics;
  std::string out;
  for (const auto& x : d) out += std::to_string(x.pos.line) + ": " + x.message + "\n";
  return out;
}

}  // namespace

TEST(Check, Samples) {
  for (const char* f : {"tree_transform.fst", "cross.fst", "cross_doubled.fst"})
    EXPECT_EQ(errors(sample(f)), "") << f;
}

TEST(Check, SmallPrograms) {
  EXPECT_EQ(errors("main : Int\nmain = 1 + 2\n"), "");
  EXPECT_EQ(errors("main : Bool\nmain = 'a' == 'b' || 3 <= 4\n"), "");
  EXPECT_EQ(errors("f : Int -> Int -> Int\nf x y = x * y\nmain : Int\nmain = f 2 3\n"), "");
  EXPECT_EQ(errors("id : forall a:TU => a -> a\nid x = x\nmain : Int\nmain = id[Int] 4\n"), "");
  EXPECT_EQ(errors("main : (Int, Bool)\nmain = let f = \\x : Int -> (x, True) in f 1\n"), "");
}

TEST(Check, LinearityMutationsAreRejected) {
  const std::string base = sample("tree_transform.fst");
  ASSERT_EQ(errors(base), "");
  for (const auto& m : tree_mutations()) {
    std::string mutated = apply(m, base);
    EXPECT_NE(errors(mutated), "") << m.name;
  }
}

TEST(Check, LinearRules) {
  EXPECT_NE(errors("f : !Int -> Skip\nf c = let g = \\x : Int -> send x c in g 1\n"
                   "main : Int\nmain = 1\n")
                .find("captures linear"),
            std::string::npos);
  EXPECT_EQ(errors("f : !Int -> Skip\nf c = let g = \\x : Int -o send x c in g 1\n"
                   "main : Int\nmain = 1\n"),
            "");
  EXPECT_NE(errors("f : !Int -> Int\nf c = 1\nmain : Int\nmain = 1\n").find("never used"),
            std::string::npos);
  EXPECT_NE(errors("f : !Int -> !Int -> Skip\nf c d = let c = send 1 d in c\n"
                   "main : Int\nmain = 1\n")
                .find("shadowed"),
            std::string::npos);
  EXPECT_NE(errors("f : Bool -> !Int -> Skip\nf b c = if b then send 1 c else c\n"
                   "main : Int\nmain = 1\n"),
            "");
  EXPECT_EQ(errors("f : Bool -> !Int -> Skip\nf b c = if b then send 1 c else send 2 c\n"
                   "main : Int\nmain = 1\n"),
            "");
}

TEST(Check, SessionOperations) {
  EXPECT_NE(errors("f : ?Int -> Skip\nf c = send 1 c\nmain : Int\nmain = 1\n")
                .find("does not start with an output"),
            std::string::npos);
  EXPECT_NE(errors("f : !Int -> Skip\nf c = send True c\nmain : Int\nmain = 1\n"), "");
  EXPECT_NE(errors("f : &{A: Skip} -> Skip\nf c = select A c\nmain : Int\nmain = 1\n"), "");
  EXPECT_NE(errors("f : &{A: Skip, B: Skip} -> Skip\nf c = match c with A c -> c\n"
                   "main : Int\nmain = 1\n")
                .find("missing a branch"),
            std::string::npos);
  EXPECT_EQ(errors("f : &{A: ?Int, B: Skip};!Bool -> Skip\n"
                   "f c = match c with A c -> (let x, c = receive c in send (x > 0) c), "
                   "B c -> send False c\nmain : Int\nmain = 1\n"),
            "");
  EXPECT_NE(errors("f : forall a:SL => a -> (a, Skip)\nf c = (c, new a)\nmain : Int\nmain = 1\n")
                .find("closed"),
            std::string::npos);
  EXPECT_NE(errors("main : Int\nmain = let w, r = new !Int in let _ = fork w in 1\n"), "");
  EXPECT_NE(errors("main : Int\nmain = let w, r = new Int in 1\n"), "");
}

TEST(Check, TypeApplications) {
  const std::string id = "id : forall a:TU => a -> a\nid x = x\n";
  EXPECT_NE(errors(id + "main : Int\nmain = id 4\n").find("must be applied"), std::string::npos);
  EXPECT_NE(errors(id + "main : Int\nmain = id[!Int] 4\n").find("subkind"), std::string::npos);
  EXPECT_NE(errors(id + "main : Int\nmain = id[Int, Int] 4\n"), "");
}

TEST(Check, MainMustBeAValue) {
  EXPECT_NE(errors("main : Int -> Int\nmain x = x\n").find("non-function"), std::string::npos);
  EXPECT_NE(errors("main : Skip\nmain = let w, r = new Skip in w\n"), "");
}

TEST(Check, DiagnosticsQuoteBothTypes) {
  std::string e = errors("main : Int\nmain = True\n");
  EXPECT_NE(e.find("`Int`"), std::string::npos) << e;
  EXPECT_NE(e.find("`Bool`"), std::string::npos) << e;
  EXPECT_EQ(e.rfind("2: ", 0), 0u);
}

TEST(Check, EveryDefinitionIsReported) {
  std::string e = errors("f : Int\nf = True\ng : Bool\ng = 1\nmain : Int\nmain = 1\n");
  EXPECT_NE(e.find("2: "), std::string::npos);
  EXPECT_NE(e.find("4: "), std::string::npos);
}

TEST(Abbrevs, RecursiveAbbreviationsBecomeRec) {
  auto r = parse_program(sample("tree_transform.fst"));
  ASSERT_TRUE(r.program);
  auto ab = resolve_abbrevs(*r.program);
  EXPECT_EQ(pretty(ab.at("TreeC")), "rec treeC. +{Leaf: Skip, Node: !Int;treeC;treeC;?Int}");
  EXPECT_TRUE(free_vars(ab.at("TreeS")).empty());
}

TEST(Abbrevs, MutualRecursion) {
  auto r = parse_program("type A = !Int;B\ntype B = +{Stop: Skip, Go: A}\nmain : Int\nmain = 1\n");
  ASSERT_TRUE(r.program);
  auto ab = resolve_abbrevs(*r.program);
  EXPECT_TRUE(free_vars(ab.at("A")).empty());
  EXPECT_TRUE(equivalent(ab.at("A"), parse_type("rec x. !Int;+{Stop: Skip, Go: x}")));
  EXPECT_TRUE(equivalent(ab.at("B"), parse_type("+{Stop: Skip, Go: rec x. !Int;+{Stop: Skip, Go: x}}")));
  EXPECT_THROW(resolve_abbrevs(*parse_program("type A = Nope\nmain : Int\nmain = 1\n").program),
               CompileError);
}

TEST(Datatypes, LinearFieldsMakeLinearTypes) {
  auto r = parse_program(
      "data Box = Box !Int\ndata Plain = P Int Bool\ndata Wrap = W Box\nmain : Int\nmain = 1\n");
  ASSERT_TRUE(r.program);
  Diagnostics d;
  auto env = build_global_env(*r.program, d);
  ASSERT_TRUE(env);
  EXPECT_EQ(env->data_kinds.at("Box"), Kind::tl());
  EXPECT_EQ(env->data_kinds.at("Plain"), Kind::tu());
  EXPECT_EQ(env->data_kinds.at("Wrap"), Kind::tl());
}

TEST(SessionHead, Normalizes) {
  auto h = session_head(parse_type("Skip;(Skip;!Int);?Bool"));
  EXPECT_EQ(h.kind, SessionHead::Kind::Message);
  EXPECT_EQ(h.polarity, Polarity::Out);
  EXPECT_TRUE(equivalent(h.continuation, parse_type("?Bool")));
  auto c = session_head(parse_type("(rec x. +{A: Skip, B: !Int;x});?Int"));
  ASSERT_EQ(c.kind, SessionHead::Kind::Choice);
  EXPECT_TRUE(equivalent(c.branches.at("A"), parse_type("?Int")));
  EXPECT_EQ(session_head(parse_type("Skip;Skip")).kind, SessionHead::Kind::Done);
  EXPECT_THROW(session_head(parse_type("Int")), CompileError);
}

TEST(TypingCtx, ConsumesLinearBindings) {
  TypingCtx ctx;
  ctx.bind("c", parse_type("!Int"), Kind::sl(), {});
  ctx.bind("n", parse_type("Int"), Kind::tu(), {});
  EXPECT_EQ(ctx.linear_names(), std::set<std::string>{"c"});
  EXPECT_TRUE(ctx.use("c", {}));
  EXPECT_FALSE(ctx.contains("c"));
  EXPECT_THROW(ctx.use("c", {}), CompileError);
  EXPECT_TRUE(ctx.use("n", {}));
  EXPECT_TRUE(ctx.use("n", {}));
  EXPECT_FALSE(ctx.use("other", {}));
  EXPECT_THROW(ctx.bind("_", parse_type("!Int"), Kind::sl(), {}), CompileError);
}
