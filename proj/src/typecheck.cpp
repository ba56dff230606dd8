#include "cfst/typecheck.hpp"

#include <cctype>
#include <functional>

#include "cfst/dual.hpp"
#include "cfst/pretty.hpp"

namespace cfst {

namespace {

std::string quote(const TypePtr& t) { return "`" + pretty(t) + "`"; }

void collect_binders(const TypePtr& t, std::set<std::string>& out) {
  std::visit(
      [&](const auto& n) {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, Arrow>) {
          collect_binders(n.dom, out);
          collect_binders(n.cod, out);
        } else if constexpr (std::is_same_v<T, PairType>) {
          collect_binders(n.fst, out);
          collect_binders(n.snd, out);
        } else if constexpr (std::is_same_v<T, Semi>) {
          collect_binders(n.lhs, out);
          collect_binders(n.rhs, out);
        } else if constexpr (std::is_same_v<T, Choice>) {
          for (const auto& [_, b] : n.branches) collect_binders(b, out);
        } else if constexpr (std::is_same_v<T, Rec>) {
          out.insert(n.var);
          collect_binders(n.body, out);
        }
      },
      t->node);
}

class AbbrevResolver {
 public:
  AbbrevResolver(const std::map<std::string, TypePtr>& raw,
                 const std::set<std::string>& datatypes)
      : raw_(raw), datatypes_(datatypes) {
    for (const auto& [_, body] : raw_) collect_binders(body, binders_);
  }

  TypePtr expand(const std::string& name) {
    for (const auto& [n, var] : stack_)
      if (n == name) return make_var(var);
    auto done = cache_.find(name);
    if (done != cache_.end()) return done->second;
    // `TreeC` becomes `rec treeC. ...` unless a written binder already uses it.
    std::string var = name;
    var[0] = static_cast<char>(std::tolower(static_cast<unsigned char>(var[0])));
    if (binders_.count(var)) var = fresh_name(var);
    stack_.emplace_back(name, var);
    TypePtr body = walk(raw_.at(name));
    stack_.pop_back();
    TypePtr out = occurs_free(var, body) ? make_rec(var, body, body->pos) : body;
    if (stack_.empty()) cache_.emplace(name, out);
    return out;
  }

  TypePtr walk(const TypePtr& t) {
    return std::visit(
        [&](const auto& n) -> TypePtr {
          using T = std::decay_t<decltype(n)>;
          if constexpr (std::is_same_v<T, DataRef>) {
            if (raw_.count(n.name)) return expand(n.name);
            if (datatypes_.count(n.name)) return t;
            throw CompileError(t->pos, "unknown type `" + n.name + "`");
          } else if constexpr (std::is_same_v<T, Arrow>) {
            return make_arrow(n.mult, walk(n.dom), walk(n.cod), t->pos);
          } else if constexpr (std::is_same_v<T, PairType>) {
            return make_pair_type(walk(n.fst), walk(n.snd), t->pos);
          } else if constexpr (std::is_same_v<T, Semi>) {
            return make_semi(walk(n.lhs), walk(n.rhs), t->pos);
          } else if constexpr (std::is_same_v<T, Choice>) {
            std::map<std::string, TypePtr> bs;
            for (const auto& [l, b] : n.branches) bs.emplace(l, walk(b));
            return make_choice(n.view, std::move(bs), t->pos);
          } else if constexpr (std::is_same_v<T, Rec>) {
            return make_rec(n.var, walk(n.body), t->pos);
          } else {
            return t;
          }
        },
        t->node);
  }

 private:
  const std::map<std::string, TypePtr>& raw_;
  const std::set<std::string>& datatypes_;
  std::vector<std::pair<std::string, std::string>> stack_;
  std::map<std::string, TypePtr> cache_;
  std::set<std::string> binders_;
};

}  // namespace

TypePtr resolve(const TypePtr& t, const std::map<std::string, TypePtr>& abbrevs) {
  return std::visit(
      [&](const auto& n) -> TypePtr {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, DataRef>) {
          auto it = abbrevs.find(n.name);
          return it == abbrevs.end() ? t : it->second;
        } else if constexpr (std::is_same_v<T, Arrow>) {
          return make_arrow(n.mult, resolve(n.dom, abbrevs), resolve(n.cod, abbrevs), t->pos);
        } else if constexpr (std::is_same_v<T, PairType>) {
          return make_pair_type(resolve(n.fst, abbrevs), resolve(n.snd, abbrevs), t->pos);
        } else if constexpr (std::is_same_v<T, Semi>) {
          return make_semi(resolve(n.lhs, abbrevs), resolve(n.rhs, abbrevs), t->pos);
        } else if constexpr (std::is_same_v<T, Choice>) {
          std::map<std::string, TypePtr> bs;
          for (const auto& [l, b] : n.branches) bs.emplace(l, resolve(b, abbrevs));
          return make_choice(n.view, std::move(bs), t->pos);
        } else if constexpr (std::is_same_v<T, Rec>) {
          return make_rec(n.var, resolve(n.body, abbrevs), t->pos);
        } else {
          return t;
        }
      },
      t->node);
}

std::map<std::string, TypePtr> resolve_abbrevs(const Program& p) {
  std::map<std::string, TypePtr> raw;
  for (const auto& a : p.abbrevs) raw.emplace(a.name, a.body);
  std::set<std::string> datatypes;
  for (const auto& d : p.datatypes) datatypes.insert(d.name);
  AbbrevResolver r(raw, datatypes);
  std::map<std::string, TypePtr> out;
  for (const auto& a : p.abbrevs) out.emplace(a.name, r.expand(a.name));
  return out;
}

// ---- TypingCtx -----------------------------------------------------------

void TypingCtx::bind(const std::string& name, TypePtr type, Kind kind, Pos pos) {
  if (name == "_") {
    if (kind.is_linear())
      throw CompileError(pos, "cannot discard a value of linear type " + quote(type));
    return;
  }
  auto it = bindings_.find(name);
  if (it != bindings_.end()) {
    if (it->second.kind.is_linear())
      throw CompileError(pos, "linear variable `" + name + "` of type " +
                                  quote(it->second.type) + " is shadowed before being used");
    shadowed_[name].push_back(it->second);
  } else {
    shadowed_[name].push_back(std::nullopt);
  }
  bindings_[name] = Binding{std::move(type), kind};
  consumed_.erase(name);
}

void TypingCtx::unbind(const std::string& name, Pos pos) {
  if (name == "_") return;
  auto it = bindings_.find(name);
  if (it != bindings_.end() && it->second.kind.is_linear())
    throw CompileError(pos, "linear variable `" + name + "` of type " +
                                quote(it->second.type) + " is never used");
  bindings_.erase(name);
  consumed_.erase(name);
  auto& stack = shadowed_[name];
  if (!stack.empty()) {
    if (stack.back()) bindings_[name] = *stack.back();
    stack.pop_back();
  }
}

std::optional<TypingCtx::Binding> TypingCtx::use(const std::string& name, Pos pos) {
  auto it = bindings_.find(name);
  if (it == bindings_.end()) {
    if (consumed_.count(name))
      throw CompileError(pos, "linear variable `" + name + "` is used more than once");
    return std::nullopt;
  }
  Binding b = it->second;
  if (b.kind.is_linear()) {
    bindings_.erase(it);
    consumed_.insert(name);
  }
  return b;
}

std::set<std::string> TypingCtx::linear_names() const {
  std::set<std::string> out;
  for (const auto& [n, b] : bindings_)
    if (b.kind.is_linear()) out.insert(n);
  return out;
}

// ---- session heads --------------------------------------------------------

SessionHead session_head(const TypePtr& t) {
  return std::visit(
      [&](const auto& n) -> SessionHead {
        using T = std::decay_t<decltype(n)>;
        SessionHead h;
        if constexpr (std::is_same_v<T, Skip>) {
          return h;
        } else if constexpr (std::is_same_v<T, Message>) {
          h.kind = SessionHead::Kind::Message;
          h.polarity = n.polarity;
          h.payload = n.payload;
          h.continuation = make_skip(t->pos);
          return h;
        } else if constexpr (std::is_same_v<T, Choice>) {
          h.kind = SessionHead::Kind::Choice;
          h.view = n.view;
          h.branches = n.branches;
          return h;
        } else if constexpr (std::is_same_v<T, TypeVar>) {
          h.kind = SessionHead::Kind::Var;
          h.var = n.name;
          h.continuation = make_skip(t->pos);
          return h;
        } else if constexpr (std::is_same_v<T, Semi>) {
          h = session_head(n.lhs);
          switch (h.kind) {
            case SessionHead::Kind::Done: return session_head(n.rhs);
            case SessionHead::Kind::Message:
            case SessionHead::Kind::Var: h.continuation = seq(h.continuation, n.rhs); break;
            case SessionHead::Kind::Choice:
              for (auto& [_, b] : h.branches) b = seq(b, n.rhs);
              break;
          }
          return h;
        } else if constexpr (std::is_same_v<T, Rec>) {
          return session_head(unfold(t));
        } else {
          throw CompileError(t->pos, quote(t) + " is not a session type");
        }
      },
      t->node);
}

// ---- TypeChecker ------------------------------------------------------------

TypeChecker::TypeChecker(const GlobalEnv& env, KindEnv kinds)
    : env_(env), kinds_(std::move(kinds)) {}

Kind TypeChecker::kind_of(const TypePtr& t, Pos pos) const {
  try {
    return synth_kind(kinds_, t, env_.data_kinds);
  } catch (const CompileError& e) {
    throw CompileError(e.pos().line ? e.pos() : pos, e.what());
  }
}

bool TypeChecker::equiv(const TypePtr& a, const TypePtr& b, Pos pos) const {
  try {
    return equivalent(a, b, kinds_, env_.equiv);
  } catch (const InconclusiveError&) {
    throw CompileError(pos, "could not decide whether " + quote(a) + " and " + quote(b) +
                                " are equivalent within the node budget");
  }
}

namespace {

Pos pos_of(const ExprPtr& e) { return e->pos; }

}  // namespace

void TypeChecker::check_branches_agree(const std::vector<std::set<std::string>>& residuals,
                                       const std::vector<Pos>& positions) {
  for (std::size_t i = 1; i < residuals.size(); ++i) {
    if (residuals[i] == residuals[0]) continue;
    std::string names;
    for (const auto& n : residuals[0])
      if (!residuals[i].count(n)) names += " `" + n + "`";
    for (const auto& n : residuals[i])
      if (!residuals[0].count(n)) names += " `" + n + "`";
    throw CompileError(positions[i],
                       "branches consume different linear variables:" + names);
  }
}

TypePtr TypeChecker::synth(TypingCtx& ctx, const ExprPtr& e) {
  const Pos pos = e->pos;
  return std::visit(
      [&](const auto& n) -> TypePtr {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, Literal>) {
          return make_basic(n.type, pos);
        } else if constexpr (std::is_same_v<T, Var>) {
          if (auto b = ctx.use(n.name, pos)) return b->type;
          if (auto s = env_.schemes.find(n.name); s != env_.schemes.end()) {
            if (!s->second.binders.empty())
              throw CompileError(pos, "polymorphic `" + n.name +
                                          "` must be applied to types: " + n.name + "[...]");
            return s->second.body;
          }
          if (auto c = env_.constructors.find(n.name); c != env_.constructors.end()) {
            TypePtr t = make_data(c->second.datatype, pos);
            bool linear_after = false;
            std::vector<Multiplicity> mults;
            for (const auto& f : c->second.fields) {
              mults.push_back(linear_after ? Multiplicity::Linear : Multiplicity::Unrestricted);
              if (kind_of(f, pos).is_linear()) linear_after = true;
            }
            for (std::size_t i = c->second.fields.size(); i-- > 0;)
              t = make_arrow(mults[i], c->second.fields[i], t, pos);
            return t;
          }
          throw CompileError(pos, "unbound variable `" + n.name + "`");
        } else if constexpr (std::is_same_v<T, Lambda>) {
          if (!n.param_type)
            throw CompileError(pos, "cannot synthesize the type of `\\" + n.param +
                                        "`; annotate the parameter");
          TypePtr dom = resolve(n.param_type, env_.abbrevs);
          auto outer = ctx.linear_names();
          ctx.bind(n.param, dom, kind_of(dom, pos), pos);
          TypePtr cod = synth(ctx, n.body);
          ctx.unbind(n.param, pos);
          if (n.mult == Multiplicity::Unrestricted) {
            for (const auto& name : outer)
              if (!ctx.contains(name))
                throw CompileError(pos, "unrestricted function captures linear variable `" +
                                            name + "`; use -o");
          }
          return make_arrow(n.mult, dom, cod, pos);
        } else if constexpr (std::is_same_v<T, App>) {
          TypePtr f = synth(ctx, n.fun);
          const auto* arrow = f->template as<Arrow>();
          if (!arrow)
            throw CompileError(pos, "applying an expression of non-function type " + quote(f));
          check_against(ctx, n.arg, arrow->dom);
          return arrow->cod;
        } else if constexpr (std::is_same_v<T, PairExpr>) {
          TypePtr a = synth(ctx, n.fst);
          TypePtr b = synth(ctx, n.snd);
          return make_pair_type(a, b, pos);
        } else if constexpr (std::is_same_v<T, LetPair>) {
          TypePtr bound = synth(ctx, n.bound);
          const auto* pair = bound->template as<PairType>();
          if (!pair)
            throw CompileError(pos, "`let " + n.fst + ", " + n.snd +
                                        "` expects a pair, found " + quote(bound));
          ctx.bind(n.fst, pair->fst, kind_of(pair->fst, pos), pos);
          ctx.bind(n.snd, pair->snd, kind_of(pair->snd, pos), pos);
          TypePtr body = synth(ctx, n.body);
          ctx.unbind(n.snd, pos);
          ctx.unbind(n.fst, pos);
          return body;
        } else if constexpr (std::is_same_v<T, Let>) {
          TypePtr bound = synth(ctx, n.bound);
          ctx.bind(n.name, bound, kind_of(bound, pos), pos);
          TypePtr body = synth(ctx, n.body);
          ctx.unbind(n.name, pos);
          return body;
        } else if constexpr (std::is_same_v<T, If>) {
          check_against(ctx, n.cond, make_basic(Basic::Bool));
          TypingCtx other = ctx;
          TypePtr a = synth(ctx, n.then_branch);
          TypePtr b = synth(other, n.else_branch);
          check_branches_agree({ctx.linear_names(), other.linear_names()},
                               {pos_of(n.then_branch), pos_of(n.else_branch)});
          if (!equiv(a, b, pos))
            throw CompileError(pos_of(n.else_branch), "branches have different types " +
                                                          quote(a) + " and " + quote(b));
          return a;
        } else if constexpr (std::is_same_v<T, Case>) {
          TypePtr scrut = synth(ctx, n.scrutinee);
          const auto* data = scrut->template as<DataRef>();
          if (!data || !env_.datatypes.count(data->name))
            throw CompileError(pos, "case expects a datatype, found " + quote(scrut));
          const auto& ctors = env_.datatypes.at(data->name);
          for (const auto& [c, br] : n.branches)
            if (std::find(ctors.begin(), ctors.end(), c) == ctors.end())
              throw CompileError(br.pos, "`" + c + "` is not a constructor of `" +
                                             data->name + "`");
          TypingCtx start = ctx;
          TypePtr result;
          std::vector<std::set<std::string>> residuals;
          std::vector<Pos> positions;
          for (const auto& c : ctors) {
            auto it = n.branches.find(c);
            if (it == n.branches.end())
              throw CompileError(pos, "case is missing a branch for `" + c + "`");
            const auto& br = it->second;
            const auto& fields = env_.constructors.at(c).fields;
            if (br.params.size() != fields.size())
              throw CompileError(br.pos, "`" + c + "` has " + std::to_string(fields.size()) +
                                             " fields, pattern binds " +
                                             std::to_string(br.params.size()));
            TypingCtx local = start;
            for (std::size_t i = 0; i < fields.size(); ++i)
              local.bind(br.params[i], fields[i], kind_of(fields[i], br.pos), br.pos);
            TypePtr t = synth(local, br.body);
            for (std::size_t i = fields.size(); i-- > 0;) local.unbind(br.params[i], br.pos);
            if (!result) {
              result = t;
              ctx = local;
            } else if (!equiv(result, t, br.pos)) {
              throw CompileError(br.pos, "branch has type " + quote(t) + ", expected " +
                                             quote(result));
            }
            residuals.push_back(local.linear_names());
            positions.push_back(br.pos);
          }
          check_branches_agree(residuals, positions);
          return result;
        } else if constexpr (std::is_same_v<T, TypeApp>) {
          auto s = env_.schemes.find(n.name);
          if (s == env_.schemes.end())
            throw CompileError(pos, "type application to `" + n.name +
                                        "`, which is not a top-level polymorphic function");
          const Scheme& scheme = s->second;
          if (scheme.binders.size() != n.args.size())
            throw CompileError(pos, "`" + n.name + "` expects " +
                                        std::to_string(scheme.binders.size()) +
                                        " type argument(s), given " +
                                        std::to_string(n.args.size()));
          TypePtr body = scheme.body;
          std::vector<std::string> fresh;
          for (const auto& [var, _] : scheme.binders) {
            fresh.push_back(fresh_name(var));
            body = substitute(body, var, make_var(fresh.back()));
          }
          for (std::size_t i = 0; i < n.args.size(); ++i) {
            TypePtr arg = resolve(n.args[i], env_.abbrevs);
            Kind k = kind_of(arg, pos);
            Kind bound = scheme.binders[i].second;
            if (!subkind(k, bound))
              throw CompileError(pos, "type argument " + quote(arg) + " has kind " +
                                          to_string(k) + ", which is not a subkind of " +
                                          to_string(bound) + " required by `" +
                                          scheme.binders[i].first + "`");
            body = substitute(body, fresh[i], arg);
          }
          return body;
        } else if constexpr (std::is_same_v<T, Fork>) {
          TypePtr t = synth(ctx, n.body);
          Kind k = kind_of(t, pos);
          bool droppable = !k.is_linear() ||
                           (k.is_session() && equiv(t, make_skip(), pos));
          if (!droppable)
            throw CompileError(pos, "forked expression has type " + quote(t) +
                                        ", whose value cannot be discarded");
          return make_basic(Basic::Unit, pos);
        } else if constexpr (std::is_same_v<T, New>) {
          TypePtr s = resolve(n.type, env_.abbrevs);
          Kind k = kind_of(s, pos);
          if (!k.is_session())
            throw CompileError(pos, "`new` expects a session type, found " + quote(s));
          if (!free_vars(s).empty())
            throw CompileError(pos, "`new` expects a closed session type, found " + quote(s));
          return make_pair_type(s, dual(s), pos);
        } else if constexpr (std::is_same_v<T, Binary>) {
          TypePtr i = make_basic(Basic::Int), b = make_basic(Basic::Bool);
          switch (n.op) {
            case BinaryOp::Add: case BinaryOp::Sub: case BinaryOp::Mul:
            case BinaryOp::Div: case BinaryOp::Mod:
              check_against(ctx, n.lhs, i);
              check_against(ctx, n.rhs, i);
              return make_basic(Basic::Int, pos);
            case BinaryOp::Lt: case BinaryOp::Le: case BinaryOp::Gt: case BinaryOp::Ge:
              check_against(ctx, n.lhs, i);
              check_against(ctx, n.rhs, i);
              return make_basic(Basic::Bool, pos);
            case BinaryOp::Eq: case BinaryOp::Ne: {
              TypePtr l = synth(ctx, n.lhs);
              if (!l->template is<BasicType>())
                throw CompileError(pos, std::string("`") + op_symbol(n.op) +
                                            "` compares basic values, found " + quote(l));
              check_against(ctx, n.rhs, l);
              return make_basic(Basic::Bool, pos);
            }
            case BinaryOp::And: case BinaryOp::Or:
              check_against(ctx, n.lhs, b);
              check_against(ctx, n.rhs, b);
              return make_basic(Basic::Bool, pos);
          }
          return b;
        } else {
          return session_op(ctx, e);
        }
      },
      e->node);
}

TypePtr TypeChecker::session_op(TypingCtx& ctx, const ExprPtr& e) {
  const Pos pos = e->pos;
  auto channel_head = [&](const ExprPtr& chan, TypePtr& type) {
    type = synth(ctx, chan);
    if (!kind_of(type, chan->pos).is_session())
      throw CompileError(chan->pos, "expected a channel, found a value of type " + quote(type));
    return session_head(type);
  };
  if (const auto* n = e->as<Send>()) {
    TypePtr ct;
    SessionHead h = channel_head(n->channel, ct);
    if (h.kind != SessionHead::Kind::Message || h.polarity != Polarity::Out)
      throw CompileError(pos, "send on a channel of type " + quote(ct) +
                                  ", which does not start with an output");
    check_against(ctx, n->value, make_basic(h.payload));
    return h.continuation;
  }
  if (const auto* n = e->as<Receive>()) {
    TypePtr ct;
    SessionHead h = channel_head(n->channel, ct);
    if (h.kind != SessionHead::Kind::Message || h.polarity != Polarity::In)
      throw CompileError(pos, "receive on a channel of type " + quote(ct) +
                                  ", which does not start with an input");
    return make_pair_type(make_basic(h.payload, pos), h.continuation, pos);
  }
  if (const auto* n = e->as<Select>()) {
    TypePtr ct;
    SessionHead h = channel_head(n->channel, ct);
    if (h.kind != SessionHead::Kind::Choice || h.view != View::Internal)
      throw CompileError(pos, "select on a channel of type " + quote(ct) +
                                  ", which does not offer an internal choice");
    auto it = h.branches.find(n->label);
    if (it == h.branches.end())
      throw CompileError(pos, "label `" + n->label + "` is not offered by " + quote(ct));
    return it->second;
  }
  const auto* n = e->as<Match>();
  TypePtr ct;
  SessionHead h = channel_head(n->channel, ct);
  if (h.kind != SessionHead::Kind::Choice || h.view != View::External)
    throw CompileError(pos, "match on a channel of type " + quote(ct) +
                                ", which does not offer an external choice");
  for (const auto& [l, br] : n->branches)
    if (!h.branches.count(l))
      throw CompileError(br.pos, "label `" + l + "` is not offered by " + quote(ct));
  TypingCtx start = ctx;
  TypePtr result;
  std::vector<std::set<std::string>> residuals;
  std::vector<Pos> positions;
  for (const auto& [label, cont] : h.branches) {
    auto it = n->branches.find(label);
    if (it == n->branches.end())
      throw CompileError(pos, "match is missing a branch for `" + label + "`");
    const auto& br = it->second;
    TypingCtx local = start;
    local.bind(br.binder, cont, kind_of(cont, br.pos), br.pos);
    TypePtr t = synth(local, br.body);
    local.unbind(br.binder, br.pos);
    if (!result) {
      result = t;
      ctx = local;
    } else if (!equiv(result, t, br.pos)) {
      throw CompileError(br.pos, "branch has type " + quote(t) + ", expected " + quote(result));
    }
    residuals.push_back(local.linear_names());
    positions.push_back(br.pos);
  }
  check_branches_agree(residuals, positions);
  return result;
}

void TypeChecker::check_against(TypingCtx& ctx, const ExprPtr& e, const TypePtr& t) {
  const Pos pos = e->pos;
  if (const auto* lam = e->as<Lambda>(); lam && !lam->param_type) {
    const auto* arrow = t->as<Arrow>();
    if (!arrow) throw CompileError(pos, "a function cannot have type " + quote(t));
    if (arrow->mult != lam->mult)
      throw CompileError(pos, std::string("expected a") +
                                  (arrow->mult == Multiplicity::Linear ? " linear (-o)"
                                                                       : "n unrestricted (->)") +
                                  " function of type " + quote(t));
    auto outer = ctx.linear_names();
    ctx.bind(lam->param, arrow->dom, kind_of(arrow->dom, pos), pos);
    check_against(ctx, lam->body, arrow->cod);
    ctx.unbind(lam->param, pos);
    if (lam->mult == Multiplicity::Unrestricted)
      for (const auto& name : outer)
        if (!ctx.contains(name))
          throw CompileError(pos, "unrestricted function captures linear variable `" + name +
                                      "`; use -o");
    return;
  }
  if (const auto* let = e->as<Let>()) {
    TypePtr bound = synth(ctx, let->bound);
    ctx.bind(let->name, bound, kind_of(bound, pos), pos);
    check_against(ctx, let->body, t);
    ctx.unbind(let->name, pos);
    return;
  }
  if (const auto* lp = e->as<LetPair>()) {
    TypePtr bound = synth(ctx, lp->bound);
    const auto* pair = bound->as<PairType>();
    if (!pair)
      throw CompileError(pos, "`let " + lp->fst + ", " + lp->snd + "` expects a pair, found " +
                                  quote(bound));
    ctx.bind(lp->fst, pair->fst, kind_of(pair->fst, pos), pos);
    ctx.bind(lp->snd, pair->snd, kind_of(pair->snd, pos), pos);
    check_against(ctx, lp->body, t);
    ctx.unbind(lp->snd, pos);
    ctx.unbind(lp->fst, pos);
    return;
  }
  if (const auto* pe = e->as<PairExpr>()) {
    if (const auto* pt = t->as<PairType>()) {
      check_against(ctx, pe->fst, pt->fst);
      check_against(ctx, pe->snd, pt->snd);
      return;
    }
  }
  if (const auto* c = e->as<If>()) {
    check_against(ctx, c->cond, make_basic(Basic::Bool));
    TypingCtx other = ctx;
    check_against(ctx, c->then_branch, t);
    check_against(other, c->else_branch, t);
    check_branches_agree({ctx.linear_names(), other.linear_names()},
                         {c->then_branch->pos, c->else_branch->pos});
    return;
  }
  TypePtr actual = synth(ctx, e);
  if (!equiv(actual, t, pos))
    throw CompileError(pos, "expected type " + quote(t) + " but found " + quote(actual));
}

// ---- programs ---------------------------------------------------------------

std::optional<GlobalEnv> build_global_env(const Program& p, Diagnostics& diags) {
  GlobalEnv env;
  std::size_t before = diags.size();
  try {
    env.abbrevs = resolve_abbrevs(p);
  } catch (const CompileError& e) {
    diags.push_back(e.diagnostic());
    return std::nullopt;
  }
  for (const auto& a : p.abbrevs) {
    try {
      synth_kind({}, env.abbrevs.at(a.name), [&] {
        DataKinds dk;
        for (const auto& d : p.datatypes) dk[d.name] = Kind::tu();
        return dk;
      }());
    } catch (const CompileError& e) {
      diags.push_back({e.pos().line ? e.pos() : a.pos, Severity::Error,
                       "in type `" + a.name + "`: " + e.what()});
    }
  }

  for (const auto& d : p.datatypes) {
    env.data_kinds[d.name] = Kind::tu();
    auto& names = env.datatypes[d.name];
    for (const auto& c : d.constructors) {
      names.push_back(c.name);
      ConstructorInfo info{d.name, {}};
      for (const auto& f : c.fields) info.fields.push_back(resolve(f, env.abbrevs));
      env.constructors.emplace(c.name, std::move(info));
    }
  }
  // Datatype kinds: least fixed point from TU, TL once any field is linear.
  bool changed = true;
  while (changed) {
    changed = false;
    for (const auto& d : p.datatypes) {
      if (env.data_kinds[d.name].is_linear()) continue;
      for (const auto& c : d.constructors) {
        for (const auto& f : env.constructors.at(c.name).fields) {
          Kind k;
          try {
            k = synth_kind({}, f, env.data_kinds);
          } catch (const CompileError&) {
            continue;
          }
          if (k.is_linear()) {
            env.data_kinds[d.name] = Kind::tl();
            changed = true;
          }
        }
      }
    }
  }
  for (const auto& d : p.datatypes)
    for (const auto& c : d.constructors)
      for (const auto& f : env.constructors.at(c.name).fields) {
        try {
          synth_kind({}, f, env.data_kinds);
        } catch (const CompileError& e) {
          diags.push_back({e.pos().line ? e.pos() : c.pos, Severity::Error,
                           "in constructor `" + c.name + "`: " + e.what()});
        }
      }

  for (const auto& s : p.signatures) {
    try {
      Scheme scheme = s.scheme;
      scheme.body = resolve(scheme.body, env.abbrevs);
      KindEnv kinds;
      for (const auto& [v, k] : scheme.binders) kinds[v] = k;
      synth_kind(kinds, scheme.body, env.data_kinds);
      env.schemes.emplace(s.name, std::move(scheme));
    } catch (const CompileError& e) {
      diags.push_back({e.pos().line ? e.pos() : s.pos, Severity::Error,
                       "in signature of `" + s.name + "`: " + e.what()});
    }
  }
  if (diags.size() != before) return std::nullopt;
  return env;
}

namespace {

void check_definition(const GlobalEnv& env, const Definition& d) {
  const Scheme& scheme = env.schemes.at(d.name);
  KindEnv kinds;
  for (const auto& [v, k] : scheme.binders) kinds[v] = k;
  TypeChecker tc(env, kinds);
  TypingCtx ctx;
  TypePtr t = scheme.body;
  for (const auto& param : d.params) {
    const auto* arrow = t->as<Arrow>();
    if (!arrow)
      throw CompileError(d.pos, "`" + d.name + "` has more parameters than its type " +
                                    quote(scheme.body) + " allows");
    ctx.bind(param, arrow->dom, tc.kind_of(arrow->dom, d.pos), d.pos);
    t = arrow->cod;
  }
  tc.check_against(ctx, d.body, t);
  for (auto it = d.params.rbegin(); it != d.params.rend(); ++it) ctx.unbind(*it, d.pos);
}

}  // namespace

Diagnostics check_program(const Program& p, const EquivOptions& equiv) {
  Diagnostics diags;
  auto env = build_global_env(p, diags);
  if (!env) return diags;
  env->equiv = equiv;
  for (const auto& d : p.definitions) {
    try {
      check_definition(*env, d);
    } catch (const CompileError& e) {
      diags.push_back(e.diagnostic());
    }
  }
  if (const auto* sig = p.find_signature("main")) {
    const Scheme& s = env->schemes.at("main");
    if (!s.binders.empty() || s.body->is<Arrow>()) {
      diags.push_back({sig->pos, Severity::Error,
                       "main must have a non-function type, found `" + pretty(s) + "`"});
    } else {
      try {
        if (synth_kind({}, s.body, env->data_kinds).is_session())
          diags.push_back({sig->pos, Severity::Error,
                           "main must not have a session type, found " + quote(s.body)});
      } catch (const CompileError& e) {
        diags.push_back(e.diagnostic());
      }
    }
  }
  return diags;
}

}  // namespace cfst
