#include "cfst/grammar.hpp"

#include <limits>
#include <set>
#include <sstream>
#include <stdexcept>

#include "cfst/pretty.hpp"

namespace cfst {

std::string to_string(const Terminal& t) {
  switch (t.kind) {
    case Terminal::Kind::Out: return std::string("!") + basic_name(t.payload);
    case Terminal::Kind::In: return std::string("?") + basic_name(t.payload);
    case Terminal::Kind::Select: return "+" + t.label;
    case Terminal::Kind::Branch: return "&" + t.label;
    case Terminal::Kind::Var: return t.label;
  }
  return "?";
}

std::string symbol_name(Symbol x) { return "X" + std::to_string(x); }

std::string to_string(const Word& w) {
  if (w.empty()) return "ε";
  std::string s;
  for (std::size_t i = 0; i < w.size(); ++i) {
    if (i) s += ' ';
    s += symbol_name(w[i]);
  }
  return s;
}

Norm Grammar::norm(const Word& w) const {
  std::uint64_t total = 0;
  for (Symbol x : w) {
    const Norm& n = norms.at(x);
    if (!n) return std::nullopt;
    if (*n > std::numeric_limits<std::uint64_t>::max() - total)
      throw std::overflow_error("norm exceeds 64 bits");
    total += *n;
  }
  return total;
}

std::vector<Symbol> Grammar::reachable(const std::vector<Word>& starts) const {
  std::vector<bool> seen(size(), false);
  std::vector<Symbol> stack;
  for (const auto& w : starts)
    for (Symbol x : w) stack.push_back(x);
  while (!stack.empty()) {
    Symbol x = stack.back();
    stack.pop_back();
    if (seen[x]) continue;
    seen[x] = true;
    for (const auto& [_, w] : productions[x])
      for (Symbol y : w)
        if (!seen[y]) stack.push_back(y);
  }
  std::vector<Symbol> out;
  for (Symbol x = 0; x < size(); ++x)
    if (seen[x]) out.push_back(x);
  return out;
}

struct GrammarBuilder::Impl {
  using Scope = std::vector<std::pair<std::string, Symbol>>;

  std::vector<Productions> productions;
  std::vector<std::string> origins;
  // Recursion nonterminals are first defined by a (non-GNF) word.
  std::map<Symbol, Word> pending;
  std::map<Productions, Symbol> by_productions;
  std::map<std::string, Symbol> by_structure;

  Symbol fresh(std::string origin) {
    productions.emplace_back();
    origins.push_back(std::move(origin));
    return static_cast<Symbol>(productions.size() - 1);
  }

  Symbol defined_by(Productions p, const TypePtr& origin) {
    auto it = by_productions.find(p);
    if (it != by_productions.end()) return it->second;
    Symbol x = fresh(pretty(origin));
    productions[x] = p;
    by_productions.emplace(std::move(p), x);
    return x;
  }

  static const Symbol* lookup(const Scope& scope, const std::string& name) {
    for (auto it = scope.rbegin(); it != scope.rend(); ++it)
      if (it->first == name) return &it->second;
    return nullptr;
  }

  // Canonical text of a subterm: bound rec variables as de Bruijn indices,
  // enclosing recursion variables as their nonterminal.
  static void key(std::ostream& out, const TypePtr& t,
                  std::vector<std::string>& bound, const Scope& scope) {
    std::visit(
        [&](const auto& n) {
          using T = std::decay_t<decltype(n)>;
          if constexpr (std::is_same_v<T, Skip>) {
            out << 'S';
          } else if constexpr (std::is_same_v<T, Semi>) {
            out << '(';
            key(out, n.lhs, bound, scope);
            out << ';';
            key(out, n.rhs, bound, scope);
            out << ')';
          } else if constexpr (std::is_same_v<T, Message>) {
            out << (n.polarity == Polarity::Out ? '!' : '?')
                << static_cast<int>(n.payload);
          } else if constexpr (std::is_same_v<T, Choice>) {
            out << (n.view == View::Internal ? "+{" : "&{");
            for (const auto& [l, b] : n.branches) {
              out << l << ':';
              key(out, b, bound, scope);
              out << ',';
            }
            out << '}';
          } else if constexpr (std::is_same_v<T, Rec>) {
            out << "rec.";
            bound.push_back(n.var);
            key(out, n.body, bound, scope);
            bound.pop_back();
          } else if constexpr (std::is_same_v<T, TypeVar>) {
            for (std::size_t i = bound.size(); i-- > 0;) {
              if (bound[i] == n.name) {
                out << '@' << (bound.size() - 1 - i);
                return;
              }
            }
            if (const Symbol* x = lookup(scope, n.name)) {
              out << '#' << *x;
            } else {
              out << '$' << n.name << '$';
            }
          } else {
            throw std::logic_error("functional type in session grammar");
          }
        },
        t->node);
  }

  Word word(const TypePtr& t, Scope& scope) {
    return std::visit(
        [&](const auto& n) -> Word {
          using T = std::decay_t<decltype(n)>;
          if constexpr (std::is_same_v<T, Skip>) {
            return {};
          } else if constexpr (std::is_same_v<T, Semi>) {
            Word w = word(n.lhs, scope);
            Word r = word(n.rhs, scope);
            w.insert(w.end(), r.begin(), r.end());
            return w;
          } else if constexpr (std::is_same_v<T, Message>) {
            Terminal a = n.polarity == Polarity::Out ? Terminal::out(n.payload)
                                                     : Terminal::in(n.payload);
            return {defined_by({{a, {}}}, t)};
          } else if constexpr (std::is_same_v<T, Choice>) {
            Productions p;
            for (const auto& [l, b] : n.branches) {
              Terminal a = n.view == View::Internal ? Terminal::select(l)
                                                    : Terminal::branch(l);
              p.emplace(a, word(b, scope));
            }
            return {defined_by(std::move(p), t)};
          } else if constexpr (std::is_same_v<T, TypeVar>) {
            if (const Symbol* x = lookup(scope, n.name)) return {*x};
            return {defined_by({{Terminal::var(n.name), {}}}, t)};
          } else if constexpr (std::is_same_v<T, Rec>) {
            if (!occurs_free(n.var, n.body)) return word(n.body, scope);
            std::ostringstream k;
            std::vector<std::string> bound;
            key(k, t, bound, scope);
            auto it = by_structure.find(k.str());
            if (it != by_structure.end()) return {it->second};
            Symbol x = fresh(pretty(t));
            by_structure.emplace(k.str(), x);
            scope.emplace_back(n.var, x);
            Word body = word(n.body, scope);
            scope.pop_back();
            if (body.empty())
              throw std::logic_error("recursive type with empty body word");
            pending.emplace(x, std::move(body));
            return {x};
          } else {
            throw std::logic_error("functional type in session grammar");
          }
        },
        t->node);
  }

  void resolve(Symbol x, std::set<Symbol>& active) {
    auto it = pending.find(x);
    if (it == pending.end()) return;
    if (!active.insert(x).second)
      throw std::logic_error("non-contractive recursion reached the grammar");
    Word w = it->second;
    resolve(w.front(), active);
    Productions p;
    for (const auto& [a, delta] : productions[w.front()]) {
      Word rhs = delta;
      rhs.insert(rhs.end(), w.begin() + 1, w.end());
      p.emplace(a, std::move(rhs));
    }
    productions[x] = std::move(p);
    pending.erase(x);
    active.erase(x);
  }
};

GrammarBuilder::GrammarBuilder() : impl_(std::make_unique<Impl>()) {}
GrammarBuilder::~GrammarBuilder() = default;

Word GrammarBuilder::add(const TypePtr& t) {
  Impl::Scope scope;
  return impl_->word(t, scope);
}

Grammar GrammarBuilder::finish() {
  while (!impl_->pending.empty()) {
    std::set<Symbol> active;
    impl_->resolve(impl_->pending.begin()->first, active);
  }
  Grammar g;
  g.productions = std::move(impl_->productions);
  g.origins = std::move(impl_->origins);
  g.norms.assign(g.productions.size(), std::nullopt);
  return g;
}

Grammar compute_norms(Grammar g) {
  g.norms.assign(g.size(), std::nullopt);
  bool changed = true;
  while (changed) {
    changed = false;
    for (Symbol x = 0; x < g.size(); ++x) {
      Norm best = g.norms[x];
      for (const auto& [_, w] : g.productions[x]) {
        Norm n = g.norm(w);
        if (n && (!best || *n + 1 < *best)) best = *n + 1;
      }
      if (best != g.norms[x]) {
        g.norms[x] = best;
        changed = true;
      }
    }
  }
  return g;
}

BuiltGrammar build(const TypePtr& t1, const TypePtr& t2) {
  GrammarBuilder b;
  Word w1 = b.add(t1);
  Word w2 = b.add(t2);
  return {compute_norms(b.finish()), std::move(w1), std::move(w2)};
}

Word prune_word(const Grammar& g, const Word& w) {
  for (std::size_t i = 0; i < w.size(); ++i)
    if (!g.normed(w[i])) return Word(w.begin(), w.begin() + i + 1);
  return w;
}

Grammar prune(Grammar g) {
  for (auto& prods : g.productions)
    for (auto& [_, w] : prods) w = prune_word(g, w);
  return g;
}

std::map<Terminal, Word> step(const Grammar& g, const Word& w) {
  std::map<Terminal, Word> out;
  if (w.empty()) return out;
  for (const auto& [a, delta] : g.productions[w.front()]) {
    Word next = delta;
    next.insert(next.end(), w.begin() + 1, w.end());
    out.emplace(a, std::move(next));
  }
  return out;
}

std::string dump(const Grammar& g, const std::vector<Word>& starts) {
  std::ostringstream out;
  auto symbols = g.reachable(starts);
  for (Symbol x : symbols) {
    for (const auto& [a, w] : g.productions[x]) {
      out << symbol_name(x) << " -> " << to_string(a);
      for (Symbol y : w) out << ' ' << symbol_name(y);
      out << '\n';
    }
  }
  for (Symbol x : symbols) {
    out << "norm(" << symbol_name(x) << ") = ";
    if (g.norms.size() > x && g.norms[x]) {
      out << *g.norms[x];
    } else {
      out << "inf";
    }
    out << '\n';
  }
  return out.str();
}

}  // namespace cfst
