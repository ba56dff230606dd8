#pragma once

#include <map>
#include <optional>
#include <string>

#include "cfst/types.hpp"

namespace cfst {

enum class Prekind { Session, Functional };

/// A prekind paired with a multiplicity. The four kinds form a diamond with
/// SU at the bottom and TL at the top; TU and SL are incomparable.
struct Kind {
  Prekind prekind = Prekind::Session;
  Multiplicity multiplicity = Multiplicity::Linear;

  static constexpr Kind su() { return {Prekind::Session, Multiplicity::Unrestricted}; }
  static constexpr Kind sl() { return {Prekind::Session, Multiplicity::Linear}; }
  static constexpr Kind tu() { return {Prekind::Functional, Multiplicity::Unrestricted}; }
  static constexpr Kind tl() { return {Prekind::Functional, Multiplicity::Linear}; }

  bool is_session() const { return prekind == Prekind::Session; }
  bool is_linear() const { return multiplicity == Multiplicity::Linear; }

  friend bool operator==(Kind a, Kind b) {
    return a.prekind == b.prekind && a.multiplicity == b.multiplicity;
  }
  friend bool operator!=(Kind a, Kind b) { return !(a == b); }
};

/// "SU", "SL", "TU" or "TL".
std::string to_string(Kind k);
std::optional<Kind> parse_kind(const std::string& text);

bool subkind(Kind k1, Kind k2);
Kind lub(Kind k1, Kind k2);

/// Kinds of the type variables in scope.
using KindEnv = std::map<std::string, Kind>;

/// Datatype kinds, keyed by datatype name. A datatype reference whose name is
/// missing from the table is an error.
using DataKinds = std::map<std::string, Kind>;

/// Least kind of `t`. Throws CompileError on ill-formed types: `;` or
/// choices over functional operands, unbound variables, unknown datatypes,
/// or non-contractive recursion.
Kind synth_kind(const KindEnv& env, const TypePtr& t,
                const DataKinds& data = {});

/// False when some rec-bound variable occurs unguarded in `t`.
bool contractive(const TypePtr& t);

/// True when `t` may finish without performing any action. Type variables
/// count as nullable: they may be instantiated to Skip.
bool nullable(const TypePtr& t);

}  // namespace cfst
