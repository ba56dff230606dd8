#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "cfst/types.hpp"

namespace cfst {

/// A transition label. Free type variables become opaque atoms so that
/// polymorphic session types can be compared without instantiation.
struct Terminal {
  enum class Kind { Out, In, Select, Branch, Var };
  Kind kind;
  Basic payload = Basic::Unit;
  std::string label;  // choice label or variable name

  static Terminal out(Basic b) { return {Kind::Out, b, {}}; }
  static Terminal in(Basic b) { return {Kind::In, b, {}}; }
  static Terminal select(std::string l) { return {Kind::Select, Basic::Unit, std::move(l)}; }
  static Terminal branch(std::string l) { return {Kind::Branch, Basic::Unit, std::move(l)}; }
  static Terminal var(std::string v) { return {Kind::Var, Basic::Unit, std::move(v)}; }

  friend bool operator<(const Terminal& a, const Terminal& b) {
    if (a.kind != b.kind) return a.kind < b.kind;
    if (a.payload != b.payload) return a.payload < b.payload;
    return a.label < b.label;
  }
  friend bool operator==(const Terminal& a, const Terminal& b) {
    return a.kind == b.kind && a.payload == b.payload && a.label == b.label;
  }
};

std::string to_string(const Terminal& t);

using Symbol = std::uint32_t;
/// A sequence of nonterminals; the empty word is the terminated protocol.
using Word = std::vector<Symbol>;
/// Deterministic GNF productions of one nonterminal.
using Productions = std::map<Terminal, Word>;
/// Least number of transitions to the empty word; nullopt when unnormed.
using Norm = std::optional<std::uint64_t>;

struct Grammar {
  std::vector<Productions> productions;  // indexed by Symbol
  std::vector<Norm> norms;               // filled by compute_norms
  std::vector<std::string> origins;      // source subterm of each symbol

  std::size_t size() const { return productions.size(); }
  Norm norm(Symbol x) const { return norms.at(x); }
  /// Sum of member norms; unnormed if any member is.
  Norm norm(const Word& w) const;
  bool normed(Symbol x) const { return norms.at(x).has_value(); }

  /// Symbols reachable from `starts` through productions, in ascending order.
  std::vector<Symbol> reachable(const std::vector<Word>& starts) const;
};

std::string symbol_name(Symbol x);
std::string to_string(const Word& w);

/// Incremental translation of closed-or-polymorphic session types into one
/// shared grammar. Structurally identical subterms share a nonterminal.
class GrammarBuilder {
 public:
  GrammarBuilder();
  ~GrammarBuilder();
  GrammarBuilder(const GrammarBuilder&) = delete;
  GrammarBuilder& operator=(const GrammarBuilder&) = delete;

  /// Start word of `t`. `t` must be a contractive session type; free type
  /// variables are treated as atomic actions.
  Word add(const TypePtr& t);

  /// Resolves every recursion nonterminal to GNF productions. The builder
  /// may not be used afterwards.
  Grammar finish();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

struct BuiltGrammar {
  Grammar grammar;
  Word start1;
  Word start2;
};

/// Grammar for two types, with norms computed but not pruned.
BuiltGrammar build(const TypePtr& t1, const TypePtr& t2);

/// Populates `norms` by least-fixed-point iteration from all-unnormed.
Grammar compute_norms(Grammar g);

/// Truncates `w` right after its first unnormed symbol.
Word prune_word(const Grammar& g, const Word& w);

/// Prunes every production right-hand side. Requires norms.
Grammar prune(Grammar g);

/// Transitions of `w`: for w = X·γ, each production X→(a,δ) gives a ↦ δ·γ.
std::map<Terminal, Word> step(const Grammar& g, const Word& w);

/// Line-oriented listing: productions `X -> a Y Z` of the symbols reachable
/// from `starts`, then `norm(X) = n|inf`.
std::string dump(const Grammar& g, const std::vector<Word>& starts);

}  // namespace cfst
