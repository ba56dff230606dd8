#pragma once

#include <map>
#include <memory>
#include <set>
#include <string>
#include <variant>
#include <vector>

#include "cfst/diagnostics.hpp"

namespace cfst {

enum class Basic { Int, Bool, Char, Unit };
enum class Multiplicity { Unrestricted, Linear };
enum class Polarity { Out, In };
enum class View { Internal, External };

const char* basic_name(Basic b);

struct Type;
using TypePtr = std::shared_ptr<const Type>;

// Functional types
struct BasicType {
  Basic basic;
};
struct Arrow {
  Multiplicity mult;
  TypePtr dom;
  TypePtr cod;
};
struct PairType {
  TypePtr fst;
  TypePtr snd;
};
/// Reference to a datatype or, before resolution, to a type abbreviation.
struct DataRef {
  std::string name;
};

// Session types
struct Skip {};
struct Semi {
  TypePtr lhs;
  TypePtr rhs;
};
struct Message {
  Polarity polarity;
  Basic payload;
};
struct Choice {
  View view;
  std::map<std::string, TypePtr> branches;
};
struct Rec {
  std::string var;
  TypePtr body;
};

struct TypeVar {
  std::string name;
};

struct Type {
  using Node = std::variant<BasicType, Arrow, PairType, DataRef, Skip, Semi,
                            Message, Choice, Rec, TypeVar>;
  Node node;
  Pos pos;

  template <typename T>
  const T* as() const {
    return std::get_if<T>(&node);
  }
  template <typename T>
  bool is() const {
    return std::holds_alternative<T>(node);
  }
};

TypePtr make_basic(Basic b, Pos pos = {});
TypePtr make_arrow(Multiplicity m, TypePtr dom, TypePtr cod, Pos pos = {});
TypePtr make_pair_type(TypePtr fst, TypePtr snd, Pos pos = {});
TypePtr make_data(std::string name, Pos pos = {});
TypePtr make_skip(Pos pos = {});
TypePtr make_semi(TypePtr lhs, TypePtr rhs, Pos pos = {});
TypePtr make_message(Polarity p, Basic b, Pos pos = {});
TypePtr make_choice(View v, std::map<std::string, TypePtr> branches,
                    Pos pos = {});
TypePtr make_rec(std::string var, TypePtr body, Pos pos = {});
TypePtr make_var(std::string name, Pos pos = {});

/// `a;b` with the unit laws applied at the top: Skip operands vanish.
TypePtr seq(TypePtr a, TypePtr b);

/// Structural equality up to renaming of rec binders. Semi nesting is
/// significant; use `flatten_semi` first to compare modulo associativity.
bool same_type(const TypePtr& a, const TypePtr& b);

/// Re-associates every `;` chain to the right and drops Skip operands.
TypePtr flatten_semi(const TypePtr& t);

std::set<std::string> free_vars(const TypePtr& t);
bool occurs_free(const std::string& name, const TypePtr& t);

/// Capture-avoiding substitution of `replacement` for free `name` in `t`.
TypePtr substitute(const TypePtr& t, const std::string& name,
                   const TypePtr& replacement);

/// One-step unfolding of `rec x.S` into `S[rec x.S / x]`.
TypePtr unfold(const TypePtr& rec);

/// A name that cannot collide with any other name produced by this function.
std::string fresh_name(const std::string& base);

/// Syntactic classification: Skip, `;`, messages, choices and rec are
/// session types. Type variables are classified by their kind elsewhere.
bool is_session_syntax(const TypePtr& t);

}  // namespace cfst
