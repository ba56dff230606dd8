#pragma once

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "cfst/syntax.hpp"

namespace cfst {

struct Value;
using ValuePtr = std::shared_ptr<const Value>;

struct EnvNode;
using Env = std::shared_ptr<const EnvNode>;

struct BasicValue {
  Basic type;
  std::int64_t value;
};
struct Closure {
  std::string param;
  ExprPtr body;
  Env env;
};
struct PairValue {
  ValuePtr fst;
  ValuePtr snd;
};
/// Constructor application; partial while args.size() < arity.
struct CtorValue {
  std::string name;
  std::size_t arity;
  std::vector<ValuePtr> args;
};
struct LabelValue {
  std::string label;
};

class Slot;
/// One end of a channel: the peer's write slot is this end's read slot.
struct ChannelEnd {
  std::shared_ptr<Slot> read;
  std::shared_ptr<Slot> write;
};

struct Value {
  std::variant<BasicValue, Closure, PairValue, CtorValue, LabelValue, ChannelEnd> node;

  template <typename T>
  const T* as() const {
    return std::get_if<T>(&node);
  }
};

ValuePtr make_value(BasicValue v);
ValuePtr make_value(Value v);
ValuePtr unit_value();

struct EnvNode {
  std::string name;
  ValuePtr value;
  Env parent;
};
Env extend_env(const Env& env, std::string name, ValuePtr value);
ValuePtr lookup(const Env& env, const std::string& name);

/// Constructor application form: `Node 1 Leaf (Node 2 Leaf Leaf)`.
std::string show_value(const ValuePtr& v);

class RuntimeError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Thrown inside interpreter threads once the run is over.
struct Cancelled {};

struct RunOptions {
  std::optional<std::uint64_t> seed;  // randomized yields when set
  std::chrono::milliseconds quiescence{2000};
};

/// Thread bookkeeping shared by every interpreter thread of one run: liveness,
/// blocking sites for the deadlock watchdog, cancellation and yields.
class Monitor {
 public:
  explicit Monitor(RunOptions opts);

  /// Registers the calling thread; `name` appears in watchdog reports.
  void enter(const std::string& name, std::uint64_t stream);
  void leave();

  void block(const std::string& site);
  void unblock();

  /// Random yield before a channel operation when a seed was given.
  void perturb();

  bool cancelled() const { return cancelled_.load(); }
  void cancel();

  /// Blocks the caller until `done()` holds or the watchdog fires. Returns
  /// false on watchdog, with the blocking sites in `report`.
  bool wait(const std::function<bool()>& done, std::string& report);
  /// Wakes `wait` to re-check its predicate.
  void notify();

  const RunOptions& options() const { return opts_; }

 private:
  RunOptions opts_;
  std::atomic<bool> cancelled_{false};
  std::mutex m_;
  std::condition_variable cv_;
  std::size_t live_ = 0;
  std::size_t blocked_ = 0;
  std::uint64_t epoch_ = 0;
  std::map<std::uint64_t, std::string> names_;   // by thread token
  std::map<std::uint64_t, std::string> sites_;   // blocked threads only
};

/// One-place buffer: put blocks while full, take blocks while empty.
class Slot {
 public:
  void put(ValuePtr v, Monitor& m, const std::string& site);
  ValuePtr take(Monitor& m, const std::string& site);
  bool full() const;

 private:
  mutable std::mutex m_;
  std::condition_variable cv_;
  std::optional<ValuePtr> value_;
};

/// Two ends sharing two slots, crossed.
std::pair<ChannelEnd, ChannelEnd> make_channel();

struct RunResult {
  enum class Status { Ok, Deadlock, Error };
  Status status = Status::Ok;
  ValuePtr value;
  std::string message;  // error text or watchdog report
};

/// Evaluates `main` of a well-typed program. Forked threads still running when
/// main finishes are cancelled.
RunResult run_program(const Program& p, const RunOptions& opts = {});

}  // namespace cfst
