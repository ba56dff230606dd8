#include "cfst/kinds.hpp"

#include "cfst/pretty.hpp"

namespace cfst {

std::string to_string(Kind k) {
  std::string s;
  s += k.is_session() ? 'S' : 'T';
  s += k.is_linear() ? 'L' : 'U';
  return s;
}

std::optional<Kind> parse_kind(const std::string& text) {
  if (text == "SU") return Kind::su();
  if (text == "SL") return Kind::sl();
  if (text == "TU") return Kind::tu();
  if (text == "TL") return Kind::tl();
  return std::nullopt;
}

// Session < Functional and Unrestricted < Linear, compared componentwise.
bool subkind(Kind k1, Kind k2) {
  bool pre = k1.prekind == k2.prekind || k2.prekind == Prekind::Functional;
  bool mult =
      k1.multiplicity == k2.multiplicity || k2.multiplicity == Multiplicity::Linear;
  return pre && mult;
}

Kind lub(Kind k1, Kind k2) {
  Kind k;
  k.prekind = (k1.is_session() && k2.is_session()) ? Prekind::Session
                                                    : Prekind::Functional;
  k.multiplicity = (k1.is_linear() || k2.is_linear())
                       ? Multiplicity::Linear
                       : Multiplicity::Unrestricted;
  return k;
}

bool nullable(const TypePtr& t) {
  if (t->is<Skip>() || t->is<TypeVar>()) return true;
  if (const auto* s = t->as<Semi>()) return nullable(s->lhs) && nullable(s->rhs);
  if (const auto* r = t->as<Rec>()) return nullable(r->body);
  return false;
}

namespace {

bool unguarded(const std::string& x, const TypePtr& t) {
  if (const auto* v = t->as<TypeVar>()) return v->name == x;
  if (const auto* s = t->as<Semi>())
    return unguarded(x, s->lhs) || (nullable(s->lhs) && unguarded(x, s->rhs));
  if (const auto* r = t->as<Rec>()) return r->var != x && unguarded(x, r->body);
  return false;
}

}  // namespace

bool contractive(const TypePtr& t) {
  return std::visit(
      [&](const auto& n) -> bool {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, Rec>) {
          return !unguarded(n.var, n.body) && contractive(n.body);
        } else if constexpr (std::is_same_v<T, Semi>) {
          return contractive(n.lhs) && contractive(n.rhs);
        } else if constexpr (std::is_same_v<T, Choice>) {
          for (const auto& [_, b] : n.branches)
            if (!contractive(b)) return false;
          return true;
        } else if constexpr (std::is_same_v<T, Arrow>) {
          return contractive(n.dom) && contractive(n.cod);
        } else if constexpr (std::is_same_v<T, PairType>) {
          return contractive(n.fst) && contractive(n.snd);
        } else {
          return true;
        }
      },
      t->node);
}

namespace {

Kind require_session(const KindEnv& env, const TypePtr& t,
                     const DataKinds& data, const char* context) {
  Kind k = synth_kind(env, t, data);
  if (!k.is_session())
    throw CompileError(t->pos, std::string("the ") + context +
                                   " is defined on session types only, but `" +
                                   pretty(t) + "` has kind " + to_string(k));
  return k;
}

}  // namespace

Kind synth_kind(const KindEnv& env, const TypePtr& t, const DataKinds& data) {
  return std::visit(
      [&](const auto& n) -> Kind {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, BasicType>) {
          return Kind::tu();
        } else if constexpr (std::is_same_v<T, Arrow>) {
          synth_kind(env, n.dom, data);
          synth_kind(env, n.cod, data);
          return n.mult == Multiplicity::Linear ? Kind::tl() : Kind::tu();
        } else if constexpr (std::is_same_v<T, PairType>) {
          Kind k = lub(synth_kind(env, n.fst, data), synth_kind(env, n.snd, data));
          k.prekind = Prekind::Functional;
          return k;
        } else if constexpr (std::is_same_v<T, DataRef>) {
          auto it = data.find(n.name);
          if (it == data.end())
            throw CompileError(t->pos, "unknown type `" + n.name + "`");
          return it->second;
        } else if constexpr (std::is_same_v<T, Skip>) {
          return Kind::su();
        } else if constexpr (std::is_same_v<T, Semi>) {
          Kind l = require_session(env, n.lhs, data, "semicolon operator");
          Kind r = require_session(env, n.rhs, data, "semicolon operator");
          return (l.is_linear() || r.is_linear()) ? Kind::sl() : Kind::su();
        } else if constexpr (std::is_same_v<T, Message>) {
          return Kind::sl();
        } else if constexpr (std::is_same_v<T, Choice>) {
          if (n.branches.empty()) throw CompileError(t->pos, "empty choice");
          for (const auto& [_, b] : n.branches)
            require_session(env, b, data, "choice");
          return Kind::sl();
        } else if constexpr (std::is_same_v<T, Rec>) {
          if (!contractive(t))
            throw CompileError(t->pos,
                               "type `" + pretty(t) + "` is not contractive");
          KindEnv inner = env;
          inner[n.var] = Kind::su();
          Kind k = synth_kind(inner, n.body, data);
          if (!k.is_session())
            throw CompileError(t->pos, "only session types can be recursive: `" +
                                           pretty(t) + "`");
          return k;
        } else {
          auto it = env.find(n.name);
          if (it == env.end())
            throw CompileError(t->pos, "unbound type variable `" + n.name + "`");
          return it->second;
        }
      },
      t->node);
}

}  // namespace cfst
