#include "cfst/runtime.hpp"

#include <cstdio>
#include <future>
#include <random>
#include <sstream>
#include <thread>

namespace cfst {

ValuePtr make_value(BasicValue v) { return std::make_shared<const Value>(Value{v}); }
ValuePtr make_value(Value v) { return std::make_shared<const Value>(std::move(v)); }

ValuePtr unit_value() {
  static const ValuePtr unit = make_value(BasicValue{Basic::Unit, 0});
  return unit;
}

Env extend_env(const Env& env, std::string name, ValuePtr value) {
  if (name == "_") return env;
  return std::make_shared<const EnvNode>(EnvNode{std::move(name), std::move(value), env});
}

ValuePtr lookup(const Env& env, const std::string& name) {
  for (const EnvNode* n = env.get(); n; n = n->parent.get())
    if (n->name == name) return n->value;
  return nullptr;
}

namespace {

std::string show_char(std::int64_t c) {
  switch (c) {
    case '\n': return "'\\n'";
    case '\t': return "'\\t'";
    case '\\': return "'\\\\'";
    case '\'': return "'\\''";
    case 0: return "'\\0'";
  }
  if (c >= 32 && c < 127) return std::string("'") + static_cast<char>(c) + "'";
  char buf[16];
  std::snprintf(buf, sizeof buf, "'\\x%02llx'", static_cast<unsigned long long>(c & 0xff));
  return buf;
}

bool needs_parens(const ValuePtr& v) {
  if (const auto* c = v->as<CtorValue>()) return !c->args.empty();
  if (const auto* b = v->as<BasicValue>()) return b->type == Basic::Int && b->value < 0;
  return false;
}

}  // namespace

std::string show_value(const ValuePtr& v) {
  return std::visit(
      [&](const auto& n) -> std::string {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, BasicValue>) {
          switch (n.type) {
            case Basic::Int: return std::to_string(n.value);
            case Basic::Bool: return n.value ? "True" : "False";
            case Basic::Char: return show_char(n.value);
            case Basic::Unit: return "()";
          }
          return "?";
        } else if constexpr (std::is_same_v<T, CtorValue>) {
          if (n.args.size() < n.arity) return "<function>";
          std::string s = n.name;
          for (const auto& a : n.args) {
            s += ' ';
            s += needs_parens(a) ? "(" + show_value(a) + ")" : show_value(a);
          }
          return s;
        } else if constexpr (std::is_same_v<T, PairValue>) {
          return "(" + show_value(n.fst) + ", " + show_value(n.snd) + ")";
        } else if constexpr (std::is_same_v<T, Closure>) {
          return "<function>";
        } else if constexpr (std::is_same_v<T, LabelValue>) {
          return "<label " + n.label + ">";
        } else {
          return "<channel>";
        }
      },
      v->node);
}

// ---- Monitor ----------------------------------------------------------------

namespace {

struct ThreadState {
  std::uint64_t token = 0;
  std::mt19937_64 rng;
};
thread_local ThreadState current;

}  // namespace

Monitor::Monitor(RunOptions opts) : opts_(opts) {}

void Monitor::enter(const std::string& name, std::uint64_t stream) {
  current.token = stream;
  current.rng.seed(opts_.seed.value_or(0) * 0x9e3779b97f4a7c15ULL + stream);
  std::lock_guard l(m_);
  ++live_;
  ++epoch_;
  names_[stream] = name;
}

void Monitor::leave() {
  {
    std::lock_guard l(m_);
    --live_;
    ++epoch_;
    names_.erase(current.token);
  }
  cv_.notify_all();
}

void Monitor::block(const std::string& site) {
  std::lock_guard l(m_);
  ++blocked_;
  ++epoch_;
  sites_[current.token] = site;
}

void Monitor::unblock() {
  std::lock_guard l(m_);
  --blocked_;
  ++epoch_;
  sites_.erase(current.token);
}

void Monitor::perturb() {
  if (!opts_.seed) return;
  switch (current.rng() % 4) {
    case 0: std::this_thread::yield(); break;
    case 1: std::this_thread::sleep_for(std::chrono::microseconds(current.rng() % 200)); break;
    default: break;
  }
}

void Monitor::cancel() {
  cancelled_ = true;
  notify();
}

void Monitor::notify() {
  { std::lock_guard l(m_); }
  cv_.notify_all();
}

bool Monitor::wait(const std::function<bool()>& done, std::string& report) {
  using clock = std::chrono::steady_clock;
  auto step = std::max(opts_.quiescence / 10, std::chrono::milliseconds(1));
  std::unique_lock l(m_);
  std::uint64_t seen = epoch_;
  auto since = clock::now();
  while (!done()) {
    cv_.wait_for(l, step);
    if (done()) break;
    bool quiet = live_ > 0 && blocked_ == live_;
    if (!quiet || epoch_ != seen) {
      seen = epoch_;
      since = clock::now();
      continue;
    }
    if (clock::now() - since >= opts_.quiescence) {
      std::ostringstream out;
      out << "deadlock: all " << live_ << " thread(s) blocked";
      for (const auto& [token, site] : sites_) out << "\n  " << names_[token] << ": " << site;
      report = out.str();
      return false;
    }
  }
  return true;
}

// ---- Slot -------------------------------------------------------------------

namespace {
constexpr auto kPoll = std::chrono::milliseconds(20);
}

void Slot::put(ValuePtr v, Monitor& mon, const std::string& site) {
  mon.perturb();
  std::unique_lock l(m_);
  if (value_) {
    mon.block(site);
    while (value_) {
      if (mon.cancelled()) {
        mon.unblock();
        throw Cancelled{};
      }
      cv_.wait_for(l, kPoll);
    }
    mon.unblock();
  }
  value_ = std::move(v);
  cv_.notify_all();
}

ValuePtr Slot::take(Monitor& mon, const std::string& site) {
  mon.perturb();
  std::unique_lock l(m_);
  if (!value_) {
    mon.block(site);
    while (!value_) {
      if (mon.cancelled()) {
        mon.unblock();
        throw Cancelled{};
      }
      cv_.wait_for(l, kPoll);
    }
    mon.unblock();
  }
  ValuePtr v = std::move(*value_);
  value_.reset();
  cv_.notify_all();
  return v;
}

bool Slot::full() const {
  std::lock_guard l(m_);
  return value_.has_value();
}

std::pair<ChannelEnd, ChannelEnd> make_channel() {
  auto s1 = std::make_shared<Slot>();
  auto s2 = std::make_shared<Slot>();
  return {ChannelEnd{s1, s2}, ChannelEnd{s2, s1}};
}

// ---- Interpreter --------------------------------------------------------------

namespace {

std::string site(const char* op, Pos pos) {
  return std::string(op) + " at " + std::to_string(pos.line) + ":" + std::to_string(pos.col);
}

std::int64_t int_of(const ValuePtr& v) { return v->as<BasicValue>()->value; }

ValuePtr int_value(std::int64_t i) { return make_value(BasicValue{Basic::Int, i}); }
ValuePtr bool_value(bool b) { return make_value(BasicValue{Basic::Bool, b ? 1 : 0}); }

class Interpreter {
 public:
  Interpreter(const Program& p, Monitor& mon) : mon_(mon) {
    for (const auto& d : p.datatypes)
      for (const auto& c : d.constructors) arity_[c.name] = c.fields.size();
    for (const auto& d : p.definitions) {
      auto g = std::make_unique<Global>();
      if (d.params.empty()) {
        g->body = d.body;
      } else {
        ExprPtr body = d.body;
        for (std::size_t i = d.params.size(); i-- > 1;)
          body = make_expr(Lambda{Multiplicity::Unrestricted, d.params[i], nullptr, body}, d.pos);
        g->value = make_value(Value{Closure{d.params[0], body, nullptr}});
      }
      globals_.emplace(d.name, std::move(g));
    }
  }

  ~Interpreter() { join_all(); }

  ValuePtr global(const std::string& name, Pos pos) {
    auto it = globals_.find(name);
    if (it == globals_.end()) throw RuntimeError("unbound name `" + name + "`");
    Global& g = *it->second;
    std::lock_guard l(g.m);
    if (g.value) return g.value;
    if (g.evaluating) throw RuntimeError("definition of `" + name + "` depends on itself at " +
                                         std::to_string(pos.line) + ":" + std::to_string(pos.col));
    g.evaluating = true;
    try {
      g.value = eval(nullptr, g.body);
    } catch (...) {
      g.evaluating = false;
      throw;
    }
    g.evaluating = false;
    return g.value;
  }

  /// Runs `e` on a new interpreter thread.
  void spawn(const std::string& name, Env env, ExprPtr e, std::function<void(ValuePtr)> done) {
    std::lock_guard l(threads_m_);
    if (mon_.cancelled()) throw Cancelled{};
    std::uint64_t stream = next_stream_++;
    // Registered before the thread starts so the watchdog never sees a gap.
    std::promise<void> registered;
    auto ready = registered.get_future();
    threads_.emplace_back([this, name, stream, env = std::move(env), e = std::move(e),
                           done = std::move(done), registered = std::move(registered)]() mutable {
      mon_.enter(name, stream);
      registered.set_value();
      try {
        ValuePtr v = eval(env, e);
        if (done) done(v);
      } catch (const Cancelled&) {
      } catch (const RuntimeError& err) {
        fail(err.what());
      } catch (const std::exception& err) {
        fail(std::string("internal error: ") + err.what());
      }
      mon_.leave();
    });
    ready.wait();
  }

  void fail(const std::string& message) {
    {
      std::lock_guard l(error_m_);
      if (!error_) error_ = message;
    }
    mon_.notify();
  }

  std::optional<std::string> error() {
    std::lock_guard l(error_m_);
    return error_;
  }

  void join_all() {
    for (;;) {
      std::vector<std::thread> batch;
      {
        std::lock_guard l(threads_m_);
        batch.swap(threads_);
      }
      if (batch.empty()) return;
      for (auto& t : batch) t.join();
    }
  }

  ValuePtr eval(Env env, ExprPtr e);

 private:
  struct Global {
    std::recursive_mutex m;
    ExprPtr body;
    ValuePtr value;
    bool evaluating = false;
  };

  ValuePtr binary(BinaryOp op, const ValuePtr& l, const ValuePtr& r, Pos pos);
  ValuePtr name(const Env& env, const std::string& n, Pos pos);

  Monitor& mon_;
  std::map<std::string, std::size_t> arity_;
  std::map<std::string, std::unique_ptr<Global>> globals_;
  std::mutex threads_m_;
  std::vector<std::thread> threads_;
  std::uint64_t next_stream_ = 0;
  std::mutex error_m_;
  std::optional<std::string> error_;
};

ValuePtr Interpreter::name(const Env& env, const std::string& n, Pos pos) {
  if (ValuePtr v = lookup(env, n)) return v;
  if (auto a = arity_.find(n); a != arity_.end())
    return make_value(Value{CtorValue{n, a->second, {}}});
  return global(n, pos);
}

ValuePtr Interpreter::binary(BinaryOp op, const ValuePtr& l, const ValuePtr& r, Pos pos) {
  auto where = [&] { return " at " + std::to_string(pos.line) + ":" + std::to_string(pos.col); };
  const auto& a = *l->as<BasicValue>();
  const auto& b = *r->as<BasicValue>();
  std::int64_t out = 0;
  switch (op) {
    case BinaryOp::Add:
      if (__builtin_add_overflow(a.value, b.value, &out)) throw RuntimeError("integer overflow" + where());
      return int_value(out);
    case BinaryOp::Sub:
      if (__builtin_sub_overflow(a.value, b.value, &out)) throw RuntimeError("integer overflow" + where());
      return int_value(out);
    case BinaryOp::Mul:
      if (__builtin_mul_overflow(a.value, b.value, &out)) throw RuntimeError("integer overflow" + where());
      return int_value(out);
    case BinaryOp::Div:
    case BinaryOp::Mod:
      if (b.value == 0) throw RuntimeError("division by zero" + where());
      if (a.value == INT64_MIN && b.value == -1) throw RuntimeError("integer overflow" + where());
      return int_value(op == BinaryOp::Div ? a.value / b.value : a.value % b.value);
    case BinaryOp::Eq: return bool_value(a.value == b.value);
    case BinaryOp::Ne: return bool_value(a.value != b.value);
    case BinaryOp::Lt: return bool_value(a.value < b.value);
    case BinaryOp::Le: return bool_value(a.value <= b.value);
    case BinaryOp::Gt: return bool_value(a.value > b.value);
    case BinaryOp::Ge: return bool_value(a.value >= b.value);
    case BinaryOp::And: return bool_value(a.value && b.value);
    case BinaryOp::Or: return bool_value(a.value || b.value);
  }
  return unit_value();
}

// Tail positions (application bodies, let bodies, branches) loop instead of
// recursing, so tail-recursive programs run in constant stack.
ValuePtr Interpreter::eval(Env env, ExprPtr e) {
  for (;;) {
    if (mon_.cancelled()) throw Cancelled{};
    const Pos pos = e->pos;
    const auto& node = e->node;
    if (const auto* n = std::get_if<Literal>(&node)) return make_value(BasicValue{n->type, n->value});
    if (const auto* n = std::get_if<Var>(&node)) return name(env, n->name, pos);
    if (const auto* n = std::get_if<TypeApp>(&node)) return global(n->name, pos);
    if (const auto* n = std::get_if<Lambda>(&node))
      return make_value(Value{Closure{n->param, n->body, env}});
    if (const auto* n = std::get_if<App>(&node)) {
      ValuePtr f = eval(env, n->fun);
      ValuePtr a = eval(env, n->arg);
      if (const auto* c = f->as<CtorValue>()) {
        CtorValue next = *c;
        next.args.push_back(std::move(a));
        return make_value(Value{std::move(next)});
      }
      const auto& c = *f->as<Closure>();
      env = extend_env(c.env, c.param, std::move(a));
      e = c.body;
      continue;
    }
    if (const auto* n = std::get_if<PairExpr>(&node)) {
      ValuePtr a = eval(env, n->fst);
      ValuePtr b = eval(env, n->snd);
      return make_value(Value{PairValue{std::move(a), std::move(b)}});
    }
    if (const auto* n = std::get_if<LetPair>(&node)) {
      ValuePtr v = eval(env, n->bound);
      const auto& p = *v->as<PairValue>();
      env = extend_env(extend_env(env, n->fst, p.fst), n->snd, p.snd);
      e = n->body;
      continue;
    }
    if (const auto* n = std::get_if<Let>(&node)) {
      ValuePtr v = eval(env, n->bound);
      env = extend_env(env, n->name, std::move(v));
      e = n->body;
      continue;
    }
    if (const auto* n = std::get_if<If>(&node)) {
      e = int_of(eval(env, n->cond)) ? n->then_branch : n->else_branch;
      continue;
    }
    if (const auto* n = std::get_if<Case>(&node)) {
      ValuePtr v = eval(env, n->scrutinee);
      const auto& c = *v->as<CtorValue>();
      const auto& br = n->branches.at(c.name);
      for (std::size_t i = 0; i < br.params.size(); ++i) env = extend_env(env, br.params[i], c.args[i]);
      e = br.body;
      continue;
    }
    if (const auto* n = std::get_if<Binary>(&node)) {
      ValuePtr l = eval(env, n->lhs);
      ValuePtr r = eval(env, n->rhs);
      return binary(n->op, l, r, pos);
    }
    if (const auto* n = std::get_if<Fork>(&node)) {
      spawn("thread forked at " + std::to_string(pos.line) + ":" + std::to_string(pos.col),
            env, n->body, nullptr);
      return unit_value();
    }
    if (std::get_if<New>(&node)) {
      auto [a, b] = make_channel();
      return make_value(Value{PairValue{make_value(Value{a}), make_value(Value{b})}});
    }
    if (const auto* n = std::get_if<Send>(&node)) {
      ValuePtr v = eval(env, n->value);
      ValuePtr c = eval(env, n->channel);
      c->as<ChannelEnd>()->write->put(std::move(v), mon_, site("send", pos));
      return c;
    }
    if (const auto* n = std::get_if<Receive>(&node)) {
      ValuePtr c = eval(env, n->channel);
      ValuePtr v = c->as<ChannelEnd>()->read->take(mon_, site("receive", pos));
      return make_value(Value{PairValue{std::move(v), std::move(c)}});
    }
    if (const auto* n = std::get_if<Select>(&node)) {
      ValuePtr c = eval(env, n->channel);
      c->as<ChannelEnd>()->write->put(make_value(Value{LabelValue{n->label}}), mon_,
                                      site("select", pos));
      return c;
    }
    const auto& m = std::get<Match>(node);
    ValuePtr c = eval(env, m.channel);
    ValuePtr label = c->as<ChannelEnd>()->read->take(mon_, site("match", pos));
    const auto* l = label->as<LabelValue>();
    if (!l) throw RuntimeError("match received a value instead of a label");
    const auto& br = m.branches.at(l->label);
    env = extend_env(env, br.binder, std::move(c));
    e = br.body;
  }
}

}  // namespace

RunResult run_program(const Program& p, const RunOptions& opts) {
  const Definition* main = p.find_definition("main");
  if (!main) return {RunResult::Status::Error, nullptr, "missing main"};
  Monitor mon(opts);
  RunResult result;
  std::atomic<bool> finished{false};
  {
    Interpreter interp(p, mon);
    ValuePtr value;
    interp.spawn("main", nullptr, make_expr(Var{"main"}, main->pos), [&](ValuePtr v) {
      value = std::move(v);
      finished = true;
      mon.notify();
    });
    std::string report;
    bool ok = mon.wait([&] { return finished.load() || interp.error().has_value(); }, report);
    mon.cancel();
    interp.join_all();
    if (finished) {
      result = {RunResult::Status::Ok, value, ""};
    } else if (auto err = interp.error()) {
      result = {RunResult::Status::Error, nullptr, *err};
    } else {
      result = {RunResult::Status::Deadlock, nullptr, ok ? "" : report};
    }
  }
  return result;
}

}  // namespace cfst
