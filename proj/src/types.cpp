#include "cfst/types.hpp"

#include <atomic>
#include <sstream>
#include <utility>

namespace cfst {

const char* basic_name(Basic b) {
  switch (b) {
    case Basic::Int: return "Int";
    case Basic::Bool: return "Bool";
    case Basic::Char: return "Char";
    case Basic::Unit: return "()";
  }
  return "?";
}

std::string format_diagnostic(const std::string& file, const Diagnostic& d) {
  std::ostringstream out;
  out << file << ':' << d.pos.line << ':' << d.pos.col << ": ";
  switch (d.severity) {
    case Severity::Error: out << "error"; break;
    case Severity::Warning: out << "warning"; break;
    case Severity::Note: out << "note"; break;
  }
  out << ": " << d.message;
  return out.str();
}

namespace {

TypePtr mk(Type::Node node, Pos pos) {
  return std::make_shared<const Type>(Type{std::move(node), pos});
}

}  // namespace

TypePtr make_basic(Basic b, Pos pos) { return mk(BasicType{b}, pos); }
TypePtr make_arrow(Multiplicity m, TypePtr dom, TypePtr cod, Pos pos) {
  return mk(Arrow{m, std::move(dom), std::move(cod)}, pos);
}
TypePtr make_pair_type(TypePtr fst, TypePtr snd, Pos pos) {
  return mk(PairType{std::move(fst), std::move(snd)}, pos);
}
TypePtr make_data(std::string name, Pos pos) {
  return mk(DataRef{std::move(name)}, pos);
}
TypePtr make_skip(Pos pos) { return mk(Skip{}, pos); }
TypePtr make_semi(TypePtr lhs, TypePtr rhs, Pos pos) {
  return mk(Semi{std::move(lhs), std::move(rhs)}, pos);
}
TypePtr make_message(Polarity p, Basic b, Pos pos) {
  return mk(Message{p, b}, pos);
}
TypePtr make_choice(View v, std::map<std::string, TypePtr> branches, Pos pos) {
  return mk(Choice{v, std::move(branches)}, pos);
}
TypePtr make_rec(std::string var, TypePtr body, Pos pos) {
  return mk(Rec{std::move(var), std::move(body)}, pos);
}
TypePtr make_var(std::string name, Pos pos) {
  return mk(TypeVar{std::move(name)}, pos);
}

TypePtr seq(TypePtr a, TypePtr b) {
  if (a->is<Skip>()) return b;
  if (b->is<Skip>()) return a;
  Pos pos = a->pos;
  return make_semi(std::move(a), std::move(b), pos);
}

namespace {

using Binders = std::vector<std::pair<std::string, std::string>>;

bool same(const TypePtr& a, const TypePtr& b, Binders& env) {
  if (a->node.index() != b->node.index()) return false;
  return std::visit(
      [&](const auto& x) -> bool {
        using T = std::decay_t<decltype(x)>;
        const auto& y = std::get<T>(b->node);
        if constexpr (std::is_same_v<T, BasicType>) {
          return x.basic == y.basic;
        } else if constexpr (std::is_same_v<T, Arrow>) {
          return x.mult == y.mult && same(x.dom, y.dom, env) &&
                 same(x.cod, y.cod, env);
        } else if constexpr (std::is_same_v<T, PairType>) {
          return same(x.fst, y.fst, env) && same(x.snd, y.snd, env);
        } else if constexpr (std::is_same_v<T, DataRef>) {
          return x.name == y.name;
        } else if constexpr (std::is_same_v<T, Skip>) {
          return true;
        } else if constexpr (std::is_same_v<T, Semi>) {
          return same(x.lhs, y.lhs, env) && same(x.rhs, y.rhs, env);
        } else if constexpr (std::is_same_v<T, Message>) {
          return x.polarity == y.polarity && x.payload == y.payload;
        } else if constexpr (std::is_same_v<T, Choice>) {
          if (x.view != y.view || x.branches.size() != y.branches.size())
            return false;
          auto it = y.branches.begin();
          for (const auto& [label, t] : x.branches) {
            if (label != it->first || !same(t, it->second, env)) return false;
            ++it;
          }
          return true;
        } else if constexpr (std::is_same_v<T, Rec>) {
          env.emplace_back(x.var, y.var);
          bool r = same(x.body, y.body, env);
          env.pop_back();
          return r;
        } else {
          for (auto it = env.rbegin(); it != env.rend(); ++it) {
            bool l = it->first == x.name;
            bool r = it->second == y.name;
            if (l || r) return l && r;
          }
          return x.name == y.name;
        }
      },
      a->node);
}

void collect_semi(const TypePtr& t, std::vector<TypePtr>& out) {
  if (const auto* s = t->as<Semi>()) {
    collect_semi(s->lhs, out);
    collect_semi(s->rhs, out);
  } else if (!t->is<Skip>()) {
    out.push_back(flatten_semi(t));
  }
}

void free_vars_into(const TypePtr& t, std::set<std::string>& bound,
                    std::set<std::string>& out) {
  std::visit(
      [&](const auto& x) {
        using T = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<T, Arrow>) {
          free_vars_into(x.dom, bound, out);
          free_vars_into(x.cod, bound, out);
        } else if constexpr (std::is_same_v<T, PairType>) {
          free_vars_into(x.fst, bound, out);
          free_vars_into(x.snd, bound, out);
        } else if constexpr (std::is_same_v<T, Semi>) {
          free_vars_into(x.lhs, bound, out);
          free_vars_into(x.rhs, bound, out);
        } else if constexpr (std::is_same_v<T, Choice>) {
          for (const auto& [_, b] : x.branches) free_vars_into(b, bound, out);
        } else if constexpr (std::is_same_v<T, Rec>) {
          bool fresh = bound.insert(x.var).second;
          free_vars_into(x.body, bound, out);
          if (fresh) bound.erase(x.var);
        } else if constexpr (std::is_same_v<T, TypeVar>) {
          if (!bound.count(x.name)) out.insert(x.name);
        }
      },
      t->node);
}

}  // namespace

bool same_type(const TypePtr& a, const TypePtr& b) {
  Binders env;
  return same(a, b, env);
}

TypePtr flatten_semi(const TypePtr& t) {
  return std::visit(
      [&](const auto& x) -> TypePtr {
        using T = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<T, Arrow>) {
          return make_arrow(x.mult, flatten_semi(x.dom), flatten_semi(x.cod),
                            t->pos);
        } else if constexpr (std::is_same_v<T, PairType>) {
          return make_pair_type(flatten_semi(x.fst), flatten_semi(x.snd),
                                t->pos);
        } else if constexpr (std::is_same_v<T, Semi>) {
          std::vector<TypePtr> parts;
          collect_semi(t, parts);
          if (parts.empty()) return make_skip(t->pos);
          TypePtr acc = parts.back();
          for (auto it = parts.rbegin() + 1; it != parts.rend(); ++it)
            acc = make_semi(*it, acc, t->pos);
          return acc;
        } else if constexpr (std::is_same_v<T, Choice>) {
          std::map<std::string, TypePtr> bs;
          for (const auto& [l, b] : x.branches) bs.emplace(l, flatten_semi(b));
          return make_choice(x.view, std::move(bs), t->pos);
        } else if constexpr (std::is_same_v<T, Rec>) {
          return make_rec(x.var, flatten_semi(x.body), t->pos);
        } else {
          return t;
        }
      },
      t->node);
}

std::set<std::string> free_vars(const TypePtr& t) {
  std::set<std::string> bound, out;
  free_vars_into(t, bound, out);
  return out;
}

bool occurs_free(const std::string& name, const TypePtr& t) {
  return free_vars(t).count(name) > 0;
}

std::string fresh_name(const std::string& base) {
  static std::atomic<unsigned long> counter{0};
  auto stem = base.substr(0, base.find('\''));
  return stem + "'" + std::to_string(++counter);
}

namespace {

TypePtr subst(const TypePtr& t, const std::string& name, const TypePtr& rep,
              const std::set<std::string>& rep_free) {
  return std::visit(
      [&](const auto& x) -> TypePtr {
        using T = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<T, Arrow>) {
          return make_arrow(x.mult, subst(x.dom, name, rep, rep_free),
                            subst(x.cod, name, rep, rep_free), t->pos);
        } else if constexpr (std::is_same_v<T, PairType>) {
          return make_pair_type(subst(x.fst, name, rep, rep_free),
                                subst(x.snd, name, rep, rep_free), t->pos);
        } else if constexpr (std::is_same_v<T, Semi>) {
          return make_semi(subst(x.lhs, name, rep, rep_free),
                           subst(x.rhs, name, rep, rep_free), t->pos);
        } else if constexpr (std::is_same_v<T, Choice>) {
          std::map<std::string, TypePtr> bs;
          for (const auto& [l, b] : x.branches)
            bs.emplace(l, subst(b, name, rep, rep_free));
          return make_choice(x.view, std::move(bs), t->pos);
        } else if constexpr (std::is_same_v<T, Rec>) {
          if (x.var == name) return t;
          if (rep_free.count(x.var) && occurs_free(name, x.body)) {
            auto renamed = fresh_name(x.var);
            auto body = subst(x.body, x.var, make_var(renamed), {renamed});
            return make_rec(renamed, subst(body, name, rep, rep_free), t->pos);
          }
          return make_rec(x.var, subst(x.body, name, rep, rep_free), t->pos);
        } else if constexpr (std::is_same_v<T, TypeVar>) {
          return x.name == name ? rep : t;
        } else {
          return t;
        }
      },
      t->node);
}

}  // namespace

TypePtr substitute(const TypePtr& t, const std::string& name,
                   const TypePtr& replacement) {
  return subst(t, name, replacement, free_vars(replacement));
}

TypePtr unfold(const TypePtr& rec) {
  const auto* r = rec->as<Rec>();
  if (!r) return rec;
  return substitute(r->body, r->var, rec);
}

bool is_session_syntax(const TypePtr& t) {
  return t->is<Skip>() || t->is<Semi>() || t->is<Message>() ||
         t->is<Choice>() || t->is<Rec>();
}

}  // namespace cfst
