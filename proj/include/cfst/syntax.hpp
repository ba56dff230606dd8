#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "cfst/diagnostics.hpp"
#include "cfst/kinds.hpp"
#include "cfst/types.hpp"

namespace cfst {

struct Expr;
using ExprPtr = std::shared_ptr<const Expr>;

/// Int, Bool (0/1), Char (code point) or Unit (0).
struct Literal {
  Basic type;
  std::int64_t value;
};
struct Var {
  std::string name;
};
struct Lambda {
  Multiplicity mult;
  std::string param;
  TypePtr param_type;  // optional annotation, null when absent
  ExprPtr body;
};
struct App {
  ExprPtr fun;
  ExprPtr arg;
};
struct PairExpr {
  ExprPtr fst;
  ExprPtr snd;
};
/// `let x, y = bound in body`
struct LetPair {
  std::string fst;
  std::string snd;
  ExprPtr bound;
  ExprPtr body;
};
struct CaseBranch {
  std::vector<std::string> params;
  ExprPtr body;
  Pos pos;
};
struct Case {
  ExprPtr scrutinee;
  std::map<std::string, CaseBranch> branches;
};
struct If {
  ExprPtr cond;
  ExprPtr then_branch;
  ExprPtr else_branch;
};
struct TypeApp {
  std::string name;
  std::vector<TypePtr> args;
};
struct Fork {
  ExprPtr body;
};
struct New {
  TypePtr type;
};
struct Send {
  ExprPtr value;
  ExprPtr channel;
};
struct Receive {
  ExprPtr channel;
};
struct Select {
  std::string label;
  ExprPtr channel;
};
struct MatchBranch {
  std::string binder;
  ExprPtr body;
  Pos pos;
};
struct Match {
  ExprPtr channel;
  std::map<std::string, MatchBranch> branches;
};
/// `let x = bound in body`; a `_` name discards the value.
struct Let {
  std::string name;
  ExprPtr bound;
  ExprPtr body;
};

enum class BinaryOp { Add, Sub, Mul, Div, Mod, Eq, Ne, Lt, Le, Gt, Ge, And, Or };
const char* op_symbol(BinaryOp op);

struct Binary {
  BinaryOp op;
  ExprPtr lhs;
  ExprPtr rhs;
};

struct Expr {
  using Node = std::variant<Literal, Var, Lambda, App, PairExpr, LetPair, Case,
                            If, TypeApp, Fork, New, Send, Receive, Select,
                            Match, Let, Binary>;
  Node node;
  Pos pos;

  template <typename T>
  const T* as() const {
    return std::get_if<T>(&node);
  }
};

template <typename T>
ExprPtr make_expr(T node, Pos pos = {}) {
  return std::make_shared<const Expr>(Expr{std::move(node), pos});
}

struct Scheme {
  std::vector<std::pair<std::string, Kind>> binders;
  TypePtr body;
};

std::string pretty(const Scheme& s);

struct TypeAbbrev {
  std::string name;
  TypePtr body;
  Pos pos;
};

struct Constructor {
  std::string name;
  std::vector<TypePtr> fields;
  Pos pos;
};

struct DataDecl {
  std::string name;
  std::vector<Constructor> constructors;
  Pos pos;
};

struct Signature {
  std::string name;
  Scheme scheme;
  Pos pos;
};

struct Definition {
  std::string name;
  std::vector<std::string> params;
  ExprPtr body;
  Pos pos;
};

/// Declarations in source order. Names are unique per category; the parser
/// reports duplicates.
struct Program {
  std::vector<TypeAbbrev> abbrevs;
  std::vector<DataDecl> datatypes;
  std::vector<Signature> signatures;
  std::vector<Definition> definitions;

  const Signature* find_signature(const std::string& name) const;
  const Definition* find_definition(const std::string& name) const;
};

struct ParseResult {
  std::optional<Program> program;
  Diagnostics diagnostics;
};

/// Parses a whole source file. On success `diagnostics` is empty.
ParseResult parse_program(const std::string& source);

/// Parses a standalone type. Throws CompileError on malformed input.
TypePtr parse_type(const std::string& source);

}  // namespace cfst
