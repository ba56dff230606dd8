#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "cfst/diagnostics.hpp"
#include "cfst/equiv.hpp"
#include "cfst/kinds.hpp"
#include "cfst/syntax.hpp"

namespace cfst {

struct ConstructorInfo {
  std::string datatype;
  std::vector<TypePtr> fields;
};

/// Program-wide typing information after abbreviation resolution.
struct GlobalEnv {
  std::map<std::string, Scheme> schemes;
  std::map<std::string, ConstructorInfo> constructors;
  std::map<std::string, std::vector<std::string>> datatypes;  // ctor names in order
  DataKinds data_kinds;
  std::map<std::string, TypePtr> abbrevs;  // resolved, closed
  EquivOptions equiv;
};

/// Replaces abbreviation references in `t` by their (recursive) expansions.
/// References to datatypes stay as DataRef.
TypePtr resolve(const TypePtr& t, const std::map<std::string, TypePtr>& abbrevs);

/// Expands a program's type abbreviations into closed types; recursive ones
/// become `rec` types. Throws CompileError on unknown names.
std::map<std::string, TypePtr> resolve_abbrevs(const Program& p);

/// Typing context: linear bindings disappear once used.
class TypingCtx {
 public:
  struct Binding {
    TypePtr type;
    Kind kind;
  };

  void bind(const std::string& name, TypePtr type, Kind kind, Pos pos);
  /// Removes `name` on scope exit; errors if it is linear and unused.
  void unbind(const std::string& name, Pos pos);
  /// Looks `name` up, consuming it when linear.
  std::optional<Binding> use(const std::string& name, Pos pos);

  bool contains(const std::string& name) const { return bindings_.count(name) > 0; }
  const std::map<std::string, Binding>& bindings() const { return bindings_; }
  std::set<std::string> linear_names() const;

 private:
  std::map<std::string, Binding> bindings_;
  std::set<std::string> consumed_;
  // Outer bindings hidden by an inner one of the same name.
  std::map<std::string, std::vector<std::optional<Binding>>> shadowed_;
};

class TypeChecker {
 public:
  TypeChecker(const GlobalEnv& env, KindEnv kinds);

  TypePtr synth(TypingCtx& ctx, const ExprPtr& e);
  void check_against(TypingCtx& ctx, const ExprPtr& e, const TypePtr& t);
  Kind kind_of(const TypePtr& t, Pos pos) const;
  bool equiv(const TypePtr& a, const TypePtr& b, Pos pos) const;

 private:
  TypePtr session_op(TypingCtx& ctx, const ExprPtr& e);
  void check_branches_agree(const std::vector<std::set<std::string>>& residuals,
                            const std::vector<Pos>& positions);

  const GlobalEnv& env_;
  KindEnv kinds_;
};

/// Head of a session type after applying the monoid, associativity and
/// distributivity laws and unfolding recursion.
struct SessionHead {
  enum class Kind { Done, Message, Choice, Var };
  Kind kind = Kind::Done;
  Polarity polarity = Polarity::Out;
  Basic payload = Basic::Unit;
  View view = View::Internal;
  std::string var;
  TypePtr continuation;                      // for Message and Var
  std::map<std::string, TypePtr> branches;   // for Choice
};
SessionHead session_head(const TypePtr& t);

/// Builds the global environment and kind-checks every declaration.
/// Appends diagnostics; returns nullopt if the declarations are unusable.
std::optional<GlobalEnv> build_global_env(const Program& p, Diagnostics& diags);

/// Full program check. Empty result iff the program is well typed.
Diagnostics check_program(const Program& p, const EquivOptions& equiv = {});

}  // namespace cfst
