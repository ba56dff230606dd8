#include "cfst/equiv.hpp"

#include <algorithm>
#include <functional>
#include <ostream>
#include <set>

namespace cfst {

const char* to_string(Verdict v) {
  switch (v) {
    case Verdict::Equivalent: return "equivalent";
    case Verdict::NotEquivalent: return "not equivalent";
    case Verdict::Inconclusive: return "inconclusive";
  }
  return "?";
}

std::size_t Node::total_length() const {
  std::size_t n = 0;
  for (const auto& [a, b] : pairs) n += a.size() + b.size();
  return n;
}

Node make_node(std::vector<WordPair> pairs) {
  for (auto& p : pairs)
    if (p.second < p.first) std::swap(p.first, p.second);
  std::sort(pairs.begin(), pairs.end());
  pairs.erase(std::unique(pairs.begin(), pairs.end()), pairs.end());
  return Node{std::move(pairs)};
}

std::size_t NodeHash::operator()(const Node& n) const {
  std::size_t h = n.pairs.size();
  auto mix = [&h](std::size_t v) { h ^= v + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2); };
  for (const auto& [a, b] : n.pairs) {
    for (Symbol x : a) mix(x);
    mix(0xffffffffu);
    for (Symbol x : b) mix(x);
    mix(0xfffffffeu);
  }
  return h;
}

History extend(const History& h, const std::vector<WordPair>& pairs) {
  if (pairs.empty()) return h;
  return std::make_shared<const HistoryLink>(HistoryLink{pairs, h});
}

std::vector<WordPair> collect(const History& h) {
  std::vector<WordPair> out;
  for (const HistoryLink* l = h.get(); l; l = l->parent.get())
    out.insert(out.end(), l->pairs.begin(), l->pairs.end());
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

std::optional<Node> expand(const Grammar& g, const Node& n) {
  std::vector<WordPair> out;
  for (const auto& [u, v] : n.pairs) {
    auto su = step(g, u);
    auto sv = step(g, v);
    if (su.size() != sv.size()) return std::nullopt;
    auto it = sv.begin();
    for (auto& [a, w] : su) {
      if (!(a == it->first)) return std::nullopt;
      out.emplace_back(prune_word(g, w), prune_word(g, it->second));
      ++it;
    }
  }
  return make_node(std::move(out));
}

namespace {

constexpr std::size_t kRewriteDepth = 2;
constexpr std::size_t kRewriteWidth = 128;

// Words reachable from the frontier by one rewrite with a relation member.
void rewrite_once(std::vector<Word>& frontier, std::set<Word>& seen,
                  const std::vector<const WordPair*>& relation, std::size_t max_len) {
  std::vector<Word> next;
  for (const Word& w : frontier) {
    for (const WordPair* r : relation) {
      for (int dir = 0; dir < 2; ++dir) {
        const Word& from = dir ? r->second : r->first;
        const Word& to = dir ? r->first : r->second;
        if (from.empty() || from.size() > w.size()) continue;
        if (w.size() - from.size() + to.size() > max_len) continue;
        for (std::size_t i = 0; i + from.size() <= w.size(); ++i) {
          if (!std::equal(from.begin(), from.end(), w.begin() + i)) continue;
          Word out(w.begin(), w.begin() + i);
          out.insert(out.end(), to.begin(), to.end());
          out.insert(out.end(), w.begin() + i + from.size(), w.end());
          if (seen.insert(out).second) next.push_back(std::move(out));
          if (seen.size() >= kRewriteWidth) {
            frontier = std::move(next);
            return;
          }
        }
      }
    }
  }
  frontier = std::move(next);
}

bool intersects(const std::set<Word>& a, const std::set<Word>& b) {
  const auto& small = a.size() < b.size() ? a : b;
  const auto& large = a.size() < b.size() ? b : a;
  for (const auto& w : small)
    if (large.count(w)) return true;
  return false;
}

}  // namespace

bool congruent(const WordPair& p, const std::vector<const WordPair*>& relation) {
  if (p.first == p.second) return true;
  if (relation.empty()) return false;
  for (const WordPair* r : relation)
    if ((r->first == p.first && r->second == p.second) ||
        (r->first == p.second && r->second == p.first))
      return true;
  std::size_t max_len = std::max(p.first.size(), p.second.size()) + 2;
  std::set<Word> left{p.first}, right{p.second};
  std::vector<Word> lf{p.first}, rf{p.second};
  for (std::size_t d = 0; d < kRewriteDepth; ++d) {
    if (left.size() < kRewriteWidth) rewrite_once(lf, left, relation, max_len);
    if (intersects(left, right)) return true;
    if (right.size() < kRewriteWidth) rewrite_once(rf, right, relation, max_len);
    if (intersects(left, right)) return true;
    if (lf.empty() && rf.empty()) break;
  }
  return false;
}

namespace {

class Simplifier {
 public:
  Simplifier(const Grammar& g, std::vector<WordPair> history, Simplification mode)
      : g_(g), history_(std::move(history)), mode_(mode) {
    history_set_.insert(history_.begin(), history_.end());
  }

  std::vector<Node> run(const Node& n) {
    std::vector<WordPair> pairs = n.pairs;
    close(pairs);
    Node base = make_node(pairs);
    if (mode_ == Simplification::Off) return {base};

    std::vector<Node> out;
    auto push = [&](Node x) {
      if (std::find(out.begin(), out.end(), x) == out.end()) out.push_back(std::move(x));
    };
    for (std::size_t i = 0; i < base.pairs.size(); ++i) {
      auto candidates = bpa2_candidates(base.pairs[i]);
      if (!candidates) continue;
      for (auto& replacement : *candidates) {
        std::vector<WordPair> sibling;
        for (std::size_t j = 0; j < base.pairs.size(); ++j)
          if (j != i) sibling.push_back(base.pairs[j]);
        sibling.insert(sibling.end(), replacement.begin(), replacement.end());
        close(sibling);
        push(make_node(std::move(sibling)));
      }
      break;  // one BPA2 application per phase
    }
    push(std::move(base));
    return out;
  }

 private:
  // Reflexivity, BPA1 and congruence; to a fixed point unless single-pass.
  void close(std::vector<WordPair>& pairs) {
    bool changed = true;
    while (changed) {
      changed = false;
      std::vector<WordPair> kept;
      for (auto p : pairs) {
        if (mode_ != Simplification::Off && strip_common_head(p)) changed = true;
        if (p.first == p.second) {
          changed = true;
          continue;
        }
        kept.push_back(std::move(p));
      }
      pairs = make_node(std::move(kept)).pairs;
      if (mode_ == Simplification::Off) {
        pairs.erase(std::remove_if(pairs.begin(), pairs.end(),
                                   [&](const WordPair& p) { return history_set_.count(p) > 0; }),
                    pairs.end());
        return;
      }
      for (std::size_t i = 0; i < pairs.size();) {
        std::vector<const WordPair*> relation;
        relation.reserve(pairs.size() + history_.size());
        for (std::size_t j = 0; j < pairs.size(); ++j)
          if (j != i) relation.push_back(&pairs[j]);
        for (const auto& h : history_) relation.push_back(&h);
        if (congruent(pairs[i], relation)) {
          pairs.erase(pairs.begin() + static_cast<std::ptrdiff_t>(i));
          changed = true;
        } else {
          ++i;
        }
      }
      if (mode_ == Simplification::SinglePass) return;
    }
  }

  // BPA1: (Xγ, Xδ) with X normed becomes (γ, δ).
  bool strip_common_head(WordPair& p) const {
    std::size_t k = 0;
    while (k < p.first.size() && k < p.second.size() && p.first[k] == p.second[k] &&
           g_.normed(p.first[k]))
      ++k;
    if (k == 0) return false;
    p.first.erase(p.first.begin(), p.first.begin() + static_cast<std::ptrdiff_t>(k));
    p.second.erase(p.second.begin(), p.second.begin() + static_cast<std::ptrdiff_t>(k));
    if (p.second < p.first) std::swap(p.first, p.second);
    return true;
  }

  // BPA2 on (Xγ, Yδ), X ≠ Y both normed, norm(X) ≤ norm(Y), both sides of
  // length at least two: each candidate β yields {(Y, Xβ), (γ, βδ)}.
  std::optional<std::vector<std::vector<WordPair>>> bpa2_candidates(const WordPair& p) const {
    Word a = p.first, b = p.second;
    if (a.size() < 2 || b.size() < 2 || a[0] == b[0]) return std::nullopt;
    if (!g_.normed(a[0]) || !g_.normed(b[0])) return std::nullopt;
    if (*g_.norm(a[0]) > *g_.norm(b[0])) std::swap(a, b);
    Symbol x = a[0], y = b[0];
    Word gamma(a.begin() + 1, a.end()), delta(b.begin() + 1, b.end());

    std::set<Word> level{{y}};
    for (std::uint64_t k = 0; k < *g_.norm(x); ++k) {
      std::set<Word> next;
      for (const Word& w : level) {
        auto n = *g_.norm(w);
        for (auto& [_, w2] : step(g_, w)) {
          auto n2 = g_.norm(w2);
          if (n2 && *n2 + 1 == n) next.insert(w2);
        }
      }
      level = std::move(next);
    }
    std::vector<std::vector<WordPair>> out;
    for (const Word& beta : level) {
      Word xb{x};
      xb.insert(xb.end(), beta.begin(), beta.end());
      Word bd = beta;
      bd.insert(bd.end(), delta.begin(), delta.end());
      out.push_back({{Word{y}, prune_word(g_, xb)}, {gamma, prune_word(g_, bd)}});
    }
    return out;
  }

  const Grammar& g_;
  std::vector<WordPair> history_;
  std::set<WordPair> history_set_;
  Simplification mode_;
};

}  // namespace

std::vector<Node> simplify(const Grammar& g, const Node& n, const History& history,
                           Simplification mode) {
  return Simplifier(g, collect(history), mode).run(n);
}

bool prioritize(Frontier& f, Frontier::Entry child, const Node& parent, bool enabled) {
  if (!f.visited.insert(child.node).second) return false;
  std::size_t cp = child.node.pairs.size(), pp = parent.pairs.size();
  std::size_t cl = child.node.total_length(), pl = parent.total_length();
  bool smaller = child.node.empty() || (cp <= pp && cl <= pl && (cp < pp || cl < pl));
  if (enabled && smaller) {
    f.queue.push_front(std::move(child));
  } else {
    f.queue.push_back(std::move(child));
  }
  return true;
}

namespace {

void trace_line(std::ostream* out, std::size_t depth, const Node& n, const char* action) {
  if (out) *out << "depth=" << depth << " pairs=" << n.pairs.size() << " action=" << action << '\n';
}

}  // namespace

SearchResult search(const Grammar& g, const Node& root, const EquivOptions& opts) {
  Frontier f;
  f.visited.insert(root);
  f.queue.push_back({root, nullptr, 0});
  std::size_t processed = 0;
  while (!f.queue.empty()) {
    Frontier::Entry entry = std::move(f.queue.front());
    f.queue.pop_front();
    if (processed >= opts.budget) {
      trace_line(opts.trace, entry.depth, entry.node, "budget");
      return {Verdict::Inconclusive, processed};
    }
    ++processed;
    if (entry.node.empty()) {
      trace_line(opts.trace, entry.depth, entry.node, "empty");
      return {Verdict::Equivalent, processed};
    }
    auto expanded = expand(g, entry.node);
    if (!expanded) {
      trace_line(opts.trace, entry.depth, entry.node, "fail");
      continue;
    }
    trace_line(opts.trace, entry.depth, entry.node, "expand");
    History h = extend(entry.history, entry.node.pairs);
    auto siblings = simplify(g, *expanded, h, opts.simplification);
    History child_history = extend(h, expanded->pairs);
    for (auto& s : siblings) {
      if (s.empty()) {
        trace_line(opts.trace, entry.depth + 1, s, "empty");
        return {Verdict::Equivalent, processed};
      }
      prioritize(f, {std::move(s), child_history, entry.depth + 1}, entry.node,
                 opts.prioritize);
    }
  }
  return {Verdict::NotEquivalent, processed};
}

SearchResult session_equivalence(const TypePtr& t1, const TypePtr& t2,
                                 const EquivOptions& opts) {
  auto built = build(t1, t2);
  Grammar g = prune(std::move(built.grammar));
  Node root = make_node({{prune_word(g, built.start1), prune_word(g, built.start2)}});
  return search(g, root, opts);
}

namespace {

bool session_typed(const TypePtr& t, const KindEnv& env) {
  if (is_session_syntax(t)) return true;
  if (const auto* v = t->as<TypeVar>()) {
    auto it = env.find(v->name);
    return it != env.end() && it->second.is_session();
  }
  return false;
}

Verdict both(Verdict a, const std::function<Verdict()>& b) {
  if (a == Verdict::NotEquivalent) return a;
  Verdict r = b();
  if (r == Verdict::NotEquivalent) return r;
  return (a == Verdict::Inconclusive || r == Verdict::Inconclusive) ? Verdict::Inconclusive
                                                                    : Verdict::Equivalent;
}

}  // namespace

Verdict equivalence(const TypePtr& t1, const TypePtr& t2, const KindEnv& env,
                    const EquivOptions& opts) {
  bool s1 = session_typed(t1, env), s2 = session_typed(t2, env);
  if (s1 != s2) return Verdict::NotEquivalent;
  if (s1) return session_equivalence(t1, t2, opts).verdict;
  if (t1->node.index() != t2->node.index()) return Verdict::NotEquivalent;
  auto yes = [](bool b) { return b ? Verdict::Equivalent : Verdict::NotEquivalent; };
  if (const auto* b = t1->as<BasicType>()) return yes(b->basic == t2->as<BasicType>()->basic);
  if (const auto* d = t1->as<DataRef>()) return yes(d->name == t2->as<DataRef>()->name);
  if (const auto* v = t1->as<TypeVar>()) return yes(v->name == t2->as<TypeVar>()->name);
  if (const auto* a = t1->as<Arrow>()) {
    const auto* b = t2->as<Arrow>();
    if (a->mult != b->mult) return Verdict::NotEquivalent;
    return both(equivalence(a->dom, b->dom, env, opts),
                [&] { return equivalence(a->cod, b->cod, env, opts); });
  }
  if (const auto* a = t1->as<PairType>()) {
    const auto* b = t2->as<PairType>();
    return both(equivalence(a->fst, b->fst, env, opts),
                [&] { return equivalence(a->snd, b->snd, env, opts); });
  }
  return Verdict::NotEquivalent;
}

bool equivalent(const TypePtr& t1, const TypePtr& t2, const KindEnv& env,
                const EquivOptions& opts) {
  Verdict v = equivalence(t1, t2, env, opts);
  if (v == Verdict::Inconclusive)
    throw InconclusiveError("type equivalence check exceeded its node budget");
  return v == Verdict::Equivalent;
}

}  // namespace cfst
