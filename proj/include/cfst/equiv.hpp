#pragma once

#include <cstddef>
#include <deque>
#include <iosfwd>
#include <memory>
#include <optional>
#include <stdexcept>
#include <unordered_set>
#include <utility>
#include <vector>

#include "cfst/grammar.hpp"
#include "cfst/kinds.hpp"

namespace cfst {

using WordPair = std::pair<Word, Word>;

/// A set of word pairs, kept canonical: each pair oriented with the smaller
/// word first, pairs sorted and deduplicated.
struct Node {
  std::vector<WordPair> pairs;

  bool empty() const { return pairs.empty(); }
  std::size_t total_length() const;
  friend bool operator==(const Node& a, const Node& b) { return a.pairs == b.pairs; }
};

Node make_node(std::vector<WordPair> pairs);

struct NodeHash {
  std::size_t operator()(const Node& n) const;
};

/// Pairs assumed on the path from the root, shared between siblings.
struct HistoryLink {
  std::vector<WordPair> pairs;
  std::shared_ptr<const HistoryLink> parent;
};
using History = std::shared_ptr<const HistoryLink>;

History extend(const History& h, const std::vector<WordPair>& pairs);
std::vector<WordPair> collect(const History& h);

enum class Simplification {
  FixedPoint,  // iterate the rules until nothing changes
  SinglePass,  // apply each rule once
  Off,         // reflexivity and exact history hits only
};

struct EquivOptions {
  std::size_t budget = 100000;
  bool prioritize = true;
  Simplification simplification = Simplification::FixedPoint;
  std::ostream* trace = nullptr;
};

enum class Verdict { Equivalent, NotEquivalent, Inconclusive };
const char* to_string(Verdict v);

struct SearchResult {
  Verdict verdict;
  std::size_t nodes = 0;  // nodes popped from the frontier
};

/// Matches the transitions of every pair; nullopt when some pair's action
/// sets differ.
std::optional<Node> expand(const Grammar& g, const Node& n);

/// True when `p` follows from `relation` by rewriting with relation members
/// (in either direction, anywhere inside a word) within a few steps.
bool congruent(const WordPair& p, const std::vector<const WordPair*>& relation);

/// Sibling nodes obtained by the reflexive, congruence and BPA rules.
std::vector<Node> simplify(const Grammar& g, const Node& n, const History& history,
                           Simplification mode = Simplification::FixedPoint);

struct Frontier {
  struct Entry {
    Node node;
    History history;
    std::size_t depth = 0;
  };
  std::deque<Entry> queue;
  std::unordered_set<Node, NodeHash> visited;
};

/// Enqueues `child` at the front when it is no larger than `parent` in both
/// pair count and total word length and strictly smaller in one of them,
/// at the back otherwise. Returns false (and drops the child) if the node
/// was already visited.
bool prioritize(Frontier& f, Frontier::Entry child, const Node& parent,
                bool enabled = true);

/// Breadth-first traversal of the expansion tree rooted at `root`.
SearchResult search(const Grammar& g, const Node& root, const EquivOptions& opts = {});

/// Bisimilarity of two contractive session types through the grammar
/// pipeline: build, norms, prune, search.
SearchResult session_equivalence(const TypePtr& t1, const TypePtr& t2,
                                 const EquivOptions& opts = {});

/// Type equivalence: structural on functional constructors, bisimilarity on
/// session components. Comparing a session type with a functional one is
/// NotEquivalent.
Verdict equivalence(const TypePtr& t1, const TypePtr& t2, const KindEnv& env,
                    const EquivOptions& opts = {});

class InconclusiveError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// `equivalence` as a predicate; throws InconclusiveError on budget exhaustion.
bool equivalent(const TypePtr& t1, const TypePtr& t2, const KindEnv& env = {},
                const EquivOptions& opts = {});

}  // namespace cfst
