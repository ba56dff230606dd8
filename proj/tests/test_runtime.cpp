#include <gtest/gtest.h>

#include <chrono>
#include <fstream>
#include <future>
#include <sstream>
#include <thread>

#include "cfst/runtime.hpp"
#include "cfst/typecheck.hpp"
#include "generators.hpp"

using namespace cfst;
using namespace std::chrono_literals;

namespace {

std::string sample(const std::string& name) {
  std::ifstream in(std::string(CFST_SAMPLES) + "/" + name);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

Program checked(const std::string& src) {
  auto r = parse_program(src);
  if (!r.program) throw std::runtime_error("parse: " + r.diagnostics.at(0).message);
  auto d = check_program(*r.program);
  if (!d.empty()) throw std::runtime_error("check: " + d[0].message);
  return *r.program;
}

RunResult run(const std::string& src, std::optional<std::uint64_t> seed = {},
              std::chrono::milliseconds quiescence = 100ms) {
  RunOptions opts;
  opts.seed = seed;
  opts.quiescence = quiescence;
  return run_program(checked(src), opts);
}

const char* kTreeResult =
    "Node 36 (Node 22 (Node 8 Leaf Leaf) (Node 12 (Node 5 Leaf Leaf) (Node 4 Leaf Leaf))) "
    "(Node 13 Leaf (Node 7 Leaf Leaf))";

}  // namespace

TEST(Slot, PutThenTake) {
  Monitor mon({});
  Slot s;
  EXPECT_FALSE(s.full());
  s.put(make_value(BasicValue{Basic::Int, 5}), mon, "t");
  EXPECT_TRUE(s.full());
  EXPECT_EQ(show_value(s.take(mon, "t")), "5");
  EXPECT_FALSE(s.full());
}

TEST(Slot, SecondPutBlocksUntilTake) {
  Monitor mon({});
  Slot s;
  s.put(make_value(BasicValue{Basic::Int, 1}), mon, "t");
  auto second = std::async(std::launch::async, [&] {
    s.put(make_value(BasicValue{Basic::Int, 2}), mon, "t");
  });
  EXPECT_EQ(second.wait_for(100ms), std::future_status::timeout);
  EXPECT_EQ(show_value(s.take(mon, "t")), "1");
  EXPECT_EQ(second.wait_for(2s), std::future_status::ready);
  EXPECT_EQ(show_value(s.take(mon, "t")), "2");
}

TEST(Slot, TakeBlocksUntilPut) {
  Monitor mon({});
  Slot s;
  auto taker = std::async(std::launch::async, [&] { return s.take(mon, "t"); });
  EXPECT_EQ(taker.wait_for(100ms), std::future_status::timeout);
  s.put(make_value(BasicValue{Basic::Char, 'z'}), mon, "t");
  EXPECT_EQ(show_value(taker.get()), "'z'");
}

TEST(Slot, CancellationReleasesWaiters) {
  Monitor mon({});
  Slot s;
  auto taker = std::async(std::launch::async, [&] {
    try {
      s.take(mon, "t");
    } catch (const Cancelled&) {
      return true;
    }
    return false;
  });
  std::this_thread::sleep_for(30ms);
  mon.cancel();
  EXPECT_TRUE(taker.get());
}

TEST(Channel, EndsAreCrossed) {
  auto [a, b] = make_channel();
  EXPECT_EQ(a.write, b.read);
  EXPECT_EQ(a.read, b.write);
  EXPECT_NE(a.read, a.write);
}

// Values put on one end arrive in order on the other, in both directions at
// once, under randomized yields.
TEST(Channel, CrossingUnderRandomInterleavings) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    RunOptions opts;
    opts.seed = seed;
    Monitor mon(opts);
    auto [a, b] = make_channel();
    cfst::testing::Rng rng(seed);
    std::vector<std::int64_t> forward(50), backward(50);
    for (auto& v : forward) v = static_cast<std::int64_t>(rng() % 1000);
    for (auto& v : backward) v = static_cast<std::int64_t>(rng() % 1000);
    auto peer = std::async(std::launch::async, [&, b = b] {
      mon.enter("peer", 1);
      std::vector<std::int64_t> got;
      for (std::size_t i = 0; i < forward.size(); ++i) {
        got.push_back(b.read->take(mon, "peer")->as<BasicValue>()->value);
        b.write->put(make_value(BasicValue{Basic::Int, backward[i]}), mon, "peer");
      }
      mon.leave();
      return got;
    });
    mon.enter("self", 0);
    std::vector<std::int64_t> got;
    for (std::size_t i = 0; i < forward.size(); ++i) {
      a.write->put(make_value(BasicValue{Basic::Int, forward[i]}), mon, "self");
      got.push_back(a.read->take(mon, "self")->as<BasicValue>()->value);
    }
    mon.leave();
    EXPECT_EQ(peer.get(), forward);
    EXPECT_EQ(got, backward);
  }
}

TEST(Values, Printing) {
  auto i = [](std::int64_t v) { return make_value(BasicValue{Basic::Int, v}); };
  auto leaf = make_value(Value{CtorValue{"Leaf", 0, {}}});
  auto node = make_value(Value{CtorValue{"Node", 3, {i(-1), leaf, leaf}}});
  EXPECT_EQ(show_value(node), "Node (-1) Leaf Leaf");
  EXPECT_EQ(show_value(make_value(Value{CtorValue{"Node", 3, {i(2), node, leaf}}})),
            "Node 2 (Node (-1) Leaf Leaf) Leaf");
  EXPECT_EQ(show_value(make_value(Value{PairValue{i(1), make_value(BasicValue{Basic::Bool, 1})}})),
            "(1, True)");
  EXPECT_EQ(show_value(unit_value()), "()");
  EXPECT_EQ(show_value(make_value(BasicValue{Basic::Char, '\n'})), "'\\n'");
  EXPECT_EQ(show_value(make_value(Value{CtorValue{"Node", 3, {i(1)}}})), "<function>");
}

TEST(Run, Arithmetic) {
  auto r = run("main : Int\nmain = 1 + 2\n");
  ASSERT_EQ(r.status, RunResult::Status::Ok);
  EXPECT_EQ(show_value(r.value), "3");
  EXPECT_EQ(show_value(run("main : Int\nmain = (7 - 10) * 2 / 3 % 5\n").value), "-2");
  EXPECT_EQ(show_value(run("main : Bool\nmain = 3 < 4 && 'a' /= 'b'\n").value), "True");
}

TEST(Run, RuntimeErrors) {
  auto div = run("main : Int\nmain = 1 / (2 - 2)\n");
  EXPECT_EQ(div.status, RunResult::Status::Error);
  EXPECT_NE(div.message.find("division by zero"), std::string::npos);
  auto big = run("f : Int -> Int\nf x = if x > 4611686018427387904 then x * 2 else f (x * 2)\n"
                 "main : Int\nmain = f 1\n");
  EXPECT_EQ(big.status, RunResult::Status::Error);
  EXPECT_NE(big.message.find("overflow"), std::string::npos);
}

TEST(Run, TailCallsRunInConstantStack) {
  auto r = run("count : Int -> Int -> Int\n"
               "count n acc = if n == 0 then acc else count (n - 1) (acc + 1)\n"
               "main : Int\nmain = count 1000000 0\n");
  ASSERT_EQ(r.status, RunResult::Status::Ok) << r.message;
  EXPECT_EQ(show_value(r.value), "1000000");
}

TEST(Run, TreeTransform) {
  auto r = run(sample("tree_transform.fst"));
  ASSERT_EQ(r.status, RunResult::Status::Ok) << r.message;
  EXPECT_EQ(show_value(r.value), kTreeResult);
}

TEST(Run, StarvedReceiveTriggersWatchdog) {
  auto r = run("main : Int\n"
               "main = let w, r = new !Int in let x, _ = receive r in let _ = send x w in x\n");
  EXPECT_EQ(r.status, RunResult::Status::Deadlock);
  EXPECT_NE(r.message.find("receive at 2:"), std::string::npos) << r.message;
}

TEST(Run, CrossProgramTerminates) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    auto r = run(sample("cross.fst"), seed);
    ASSERT_EQ(r.status, RunResult::Status::Ok) << r.message;
    EXPECT_EQ(show_value(r.value), "False");
  }
}

TEST(Run, DoubledCrossDeadlocks) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    auto r = run(sample("cross_doubled.fst"), seed, 50ms);
    ASSERT_EQ(r.status, RunResult::Status::Deadlock) << seed;
    EXPECT_NE(r.message.find("main: receive"), std::string::npos) << r.message;
    EXPECT_NE(r.message.find(": send"), std::string::npos) << r.message;
  }
}

// A single slot takes one value without a reader; a second never fits.
TEST(Run, BufferCapacityIsOne) {
  const char* one = "main : Int\n"
                    "main = let w, r = new !Int in let _ = send 7 w in let x, _ = receive r in x\n";
  const char* two = "main : Int\n"
                    "main = let w, r = new !Int;!Int in let w = send 1 w in let _ = send 2 w in\n"
                    "       let x, r = receive r in let _, _ = receive r in x\n";
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    auto a = run(one, seed, 30ms);
    ASSERT_EQ(a.status, RunResult::Status::Ok);
    EXPECT_EQ(show_value(a.value), "7");
    ASSERT_EQ(run(two, seed, 30ms).status, RunResult::Status::Deadlock);
  }
}

TEST(Run, DeterministicAcrossSchedules) {
  const std::string tree = sample("tree_transform.fst");
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    auto r = run(tree, seed);
    ASSERT_EQ(r.status, RunResult::Status::Ok) << r.message;
    ASSERT_EQ(show_value(r.value), kTreeResult) << seed;
  }
}

TEST(Run, MainDoesNotWaitForForkedThreads) {
  auto start = std::chrono::steady_clock::now();
  auto r = run("loop : Int -> Int\nloop n = loop (n + 1)\n"
               "main : Int\nmain = let _ = fork (let _ = loop 0 in ()) in 5\n",
               {}, 2000ms);
  ASSERT_EQ(r.status, RunResult::Status::Ok);
  EXPECT_EQ(show_value(r.value), "5");
  EXPECT_LT(std::chrono::steady_clock::now() - start, 1500ms);
}

TEST(Run, ChoicesTravelAsLabels) {
  auto r = run("server : &{Inc: ?Int;!Int, Neg: ?Int;!Int} -> Skip\n"
               "server c = match c with\n"
               "  Inc c -> (let x, c = receive c in send (x + 1) c),\n"
               "  Neg c -> (let x, c = receive c in send (0 - x) c)\n"
               "main : Int\n"
               "main = let w, r = new +{Inc: !Int;?Int, Neg: !Int;?Int} in\n"
               "  let _ = fork (server r) in\n"
               "  let w = select Neg w in let w = send 5 w in let y, _ = receive w in y\n");
  ASSERT_EQ(r.status, RunResult::Status::Ok) << r.message;
  EXPECT_EQ(show_value(r.value), "-5");
}
