#include <cctype>
#include <set>
#include <sstream>

#include "cfst/pretty.hpp"
#include "cfst/syntax.hpp"

namespace cfst {

namespace {

enum class Tok {
  Ident,   // lower-case or underscore-led identifier
  UIdent,  // upper-case identifier
  Int,
  Char,
  Keyword,
  Symbol,
  Eof,
};

struct Token {
  Tok kind;
  std::string text;
  Pos pos;
  std::int64_t value = 0;
};

const std::set<std::string> kKeywords = {
    "type", "data", "forall", "rec",   "let",    "in",      "case",
    "of",   "if",   "then",   "else",  "fork",   "new",     "send",
    "receive", "select", "match", "with", "True", "False", "Skip",
    "Int",  "Bool", "Char"};

// Longest symbols first.
const char* const kSymbols[] = {"::", "->", "=>", "==", "/=", "<=", ">=", "&&",
                                "||", "(",  ")",  "[",  "]",  "{",  "}",  ",",
                                ";",  ":",  ".",  "=",  "\\", "!",  "?",  "+",
                                "&",  "|",  "*",  "/",  "-",  "<",  ">",  "%"};

bool ident_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '\'';
}

std::vector<Token> lex(const std::string& src) {
  std::vector<Token> out;
  int line = 1, col = 1;
  std::size_t i = 0;
  auto advance = [&](std::size_t n) {
    for (std::size_t k = 0; k < n && i < src.size(); ++k, ++i) {
      if (src[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
  };
  while (i < src.size()) {
    char c = src[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      advance(1);
      continue;
    }
    if (c == '-' && i + 1 < src.size() && src[i + 1] == '-') {
      while (i < src.size() && src[i] != '\n') advance(1);
      continue;
    }
    Pos pos{line, col};
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::size_t j = i;
      while (j < src.size() && ident_char(src[j])) ++j;
      std::string word = src.substr(i, j - i);
      Tok kind = kKeywords.count(word)                              ? Tok::Keyword
                 : std::isupper(static_cast<unsigned char>(word[0])) ? Tok::UIdent
                                                                     : Tok::Ident;
      if (word == "_") kind = Tok::Symbol;
      out.push_back({kind, word, pos});
      advance(j - i);
      continue;
    }
    if (std::isdigit(static_cast<unsigned char>(c))) {
      std::size_t j = i;
      while (j < src.size() && std::isdigit(static_cast<unsigned char>(src[j]))) ++j;
      std::string digits = src.substr(i, j - i);
      Token t{Tok::Int, digits, pos};
      try {
        t.value = std::stoll(digits);
      } catch (const std::out_of_range&) {
        throw CompileError(pos, "integer literal out of range: " + digits);
      }
      out.push_back(t);
      advance(j - i);
      continue;
    }
    if (c == '\'') {
      std::size_t j = i + 1;
      if (j >= src.size()) throw CompileError(pos, "unterminated character literal");
      std::int64_t value = static_cast<unsigned char>(src[j]);
      if (src[j] == '\\') {
        ++j;
        if (j >= src.size()) throw CompileError(pos, "unterminated character literal");
        switch (src[j]) {
          case 'n': value = '\n'; break;
          case 't': value = '\t'; break;
          case '\\': value = '\\'; break;
          case '\'': value = '\''; break;
          case '0': value = 0; break;
          default: throw CompileError(pos, std::string("unknown escape \\") + src[j]);
        }
      }
      ++j;
      if (j >= src.size() || src[j] != '\'')
        throw CompileError(pos, "unterminated character literal");
      Token t{Tok::Char, src.substr(i, j + 1 - i), pos};
      t.value = value;
      out.push_back(t);
      advance(j + 1 - i);
      continue;
    }
    // `-o` is the linear arrow unless it starts a longer identifier.
    if (c == '-' && i + 1 < src.size() && src[i + 1] == 'o' &&
        (i + 2 >= src.size() || !ident_char(src[i + 2]))) {
      out.push_back({Tok::Symbol, "-o", pos});
      advance(2);
      continue;
    }
    bool matched = false;
    for (const char* sym : kSymbols) {
      std::string s(sym);
      if (src.compare(i, s.size(), s) == 0) {
        out.push_back({Tok::Symbol, s, pos});
        advance(s.size());
        matched = true;
        break;
      }
    }
    if (!matched)
      throw CompileError(pos, std::string("unexpected character '") + c + "'");
  }
  out.push_back({Tok::Eof, "", {line, col}});
  return out;
}

class Parser {
 public:
  explicit Parser(std::vector<Token> toks) : toks_(std::move(toks)) {}

  bool at_eof() const { return peek().kind == Tok::Eof; }

  // ---- types ----------------------------------------------------------

  TypePtr type() {
    TypePtr lhs = semi_type();
    if (is_sym("->") || is_sym("-o")) {
      Pos pos = peek().pos;
      auto mult = next().text == "->" ? Multiplicity::Unrestricted
                                      : Multiplicity::Linear;
      return make_arrow(mult, lhs, type(), pos);
    }
    return lhs;
  }

  TypePtr semi_type() {
    TypePtr lhs = atom_type();
    if (is_sym(";")) {
      Pos pos = next().pos;
      return make_semi(lhs, semi_type(), pos);
    }
    return lhs;
  }

  bool starts_type_atom() const {
    const Token& t = peek();
    if (t.kind == Tok::UIdent || t.kind == Tok::Ident) return true;
    if (t.kind == Tok::Keyword)
      return t.text == "Skip" || t.text == "Int" || t.text == "Bool" ||
             t.text == "Char" || t.text == "rec";
    return is_sym("(") || is_sym("!") || is_sym("?") || is_sym("+") || is_sym("&");
  }

  TypePtr atom_type() {
    const Token& t = peek();
    Pos pos = t.pos;
    if (t.kind == Tok::Keyword) {
      if (t.text == "Skip") return next(), make_skip(pos);
      if (t.text == "Int") return next(), make_basic(Basic::Int, pos);
      if (t.text == "Bool") return next(), make_basic(Basic::Bool, pos);
      if (t.text == "Char") return next(), make_basic(Basic::Char, pos);
      if (t.text == "rec") {
        next();
        std::string var = expect_ident("type variable after `rec`");
        expect_sym(".");
        return make_rec(var, semi_type(), pos);
      }
    }
    if (t.kind == Tok::UIdent) return make_data(next().text, pos);
    if (t.kind == Tok::Ident) return make_var(next().text, pos);
    if (is_sym("!") || is_sym("?")) {
      auto pol = next().text == "!" ? Polarity::Out : Polarity::In;
      return make_message(pol, basic_payload(), pos);
    }
    if (is_sym("+") || is_sym("&")) {
      auto view = next().text == "+" ? View::Internal : View::External;
      expect_sym("{");
      std::map<std::string, TypePtr> branches;
      if (is_sym("}")) throw CompileError(pos, "empty choice");
      while (true) {
        Token label = peek();
        if (label.kind != Tok::UIdent && label.kind != Tok::Ident)
          throw error("choice label");
        next();
        expect_sym(":");
        if (!branches.emplace(label.text, type()).second)
          throw CompileError(label.pos, "duplicate choice label `" + label.text + "`");
        if (is_sym(",")) {
          next();
          continue;
        }
        expect_sym("}");
        break;
      }
      return make_choice(view, std::move(branches), pos);
    }
    if (is_sym("(")) {
      next();
      if (is_sym(")")) return next(), make_basic(Basic::Unit, pos);
      TypePtr first = type();
      if (is_sym(",")) {
        next();
        TypePtr second = type();
        expect_sym(")");
        return make_pair_type(first, second, pos);
      }
      expect_sym(")");
      return first;
    }
    throw error("type");
  }

  Basic basic_payload() {
    const Token& t = peek();
    if (t.kind == Tok::Keyword) {
      if (t.text == "Int") return next(), Basic::Int;
      if (t.text == "Bool") return next(), Basic::Bool;
      if (t.text == "Char") return next(), Basic::Char;
    }
    if (is_sym("(") && peek(1).kind == Tok::Symbol && peek(1).text == ")") {
      next();
      next();
      return Basic::Unit;
    }
    throw error("basic type (messages carry Int, Bool, Char or ())");
  }

  Scheme scheme() {
    Scheme s;
    if (is_kw("forall")) {
      next();
      std::set<std::string> seen;
      while (!is_sym("=>")) {
        Token name = peek();
        std::string var = expect_ident("type variable");
        Kind k = Kind::sl();
        if (is_sym(":")) {
          next();
          Token kt = next();
          auto parsed = parse_kind(kt.text);
          if (!parsed)
            throw CompileError(kt.pos, "expected a kind (SU, SL, TU, TL), found `" +
                                           kt.text + "`");
          k = *parsed;
        }
        if (!seen.insert(var).second)
          throw CompileError(name.pos, "duplicate type variable `" + var + "`");
        s.binders.emplace_back(var, k);
        if (is_sym(",")) next();
      }
      next();
    }
    s.body = type();
    return s;
  }

  // ---- expressions ----------------------------------------------------

  ExprPtr expr() {
    const Token& t = peek();
    Pos pos = t.pos;
    if (is_sym("\\")) {
      next();
      std::string param = binder();
      TypePtr annot;
      if (is_sym(":")) {
        next();
        annot = semi_type();
      }
      Multiplicity m;
      if (is_sym("->")) {
        m = Multiplicity::Unrestricted;
      } else if (is_sym("-o")) {
        m = Multiplicity::Linear;
      } else {
        throw error("`->` or `-o`");
      }
      next();
      return make_expr(Lambda{m, param, annot, expr()}, pos);
    }
    if (is_kw("let")) {
      next();
      std::string x = binder();
      if (is_sym(",")) {
        next();
        std::string y = binder();
        expect_sym("=");
        ExprPtr bound = expr();
        expect_kw("in");
        return make_expr(LetPair{x, y, bound, expr()}, pos);
      }
      expect_sym("=");
      ExprPtr bound = expr();
      expect_kw("in");
      return make_expr(Let{x, bound, expr()}, pos);
    }
    if (is_kw("if")) {
      next();
      ExprPtr c = expr();
      expect_kw("then");
      ExprPtr a = expr();
      expect_kw("else");
      return make_expr(If{c, a, expr()}, pos);
    }
    if (is_kw("case")) {
      next();
      ExprPtr scrut = expr();
      expect_kw("of");
      Case node{scrut, {}};
      do {
        Token ctor = peek();
        if (ctor.kind != Tok::UIdent) throw error("constructor");
        next();
        std::vector<std::string> params;
        while (!is_sym("->")) params.push_back(binder());
        next();
        CaseBranch br{params, expr(), ctor.pos};
        if (!node.branches.emplace(ctor.text, br).second)
          throw CompileError(ctor.pos, "duplicate branch `" + ctor.text + "`");
      } while (another_branch());
      return make_expr(std::move(node), pos);
    }
    if (is_kw("match")) {
      next();
      ExprPtr chan = expr();
      expect_kw("with");
      Match node{chan, {}};
      do {
        Token label = peek();
        if (label.kind != Tok::UIdent && label.kind != Tok::Ident)
          throw error("choice label");
        next();
        std::string b = binder();
        expect_sym("->");
        MatchBranch br{b, expr(), label.pos};
        if (!node.branches.emplace(label.text, br).second)
          throw CompileError(label.pos, "duplicate branch `" + label.text + "`");
      } while (another_branch());
      return make_expr(std::move(node), pos);
    }
    return binary(0);
  }

  // ---- declarations ---------------------------------------------------

  void declaration(Program& p) {
    const Token& t = peek();
    if (is_kw("type")) {
      next();
      Token name = peek();
      if (name.kind != Tok::UIdent) throw error("type name");
      next();
      expect_sym("=");
      p.abbrevs.push_back({name.text, type(), name.pos});
      return;
    }
    if (is_kw("data")) {
      next();
      Token name = peek();
      if (name.kind != Tok::UIdent) throw error("datatype name");
      next();
      expect_sym("=");
      DataDecl d{name.text, {}, name.pos};
      do {
        Token ctor = peek();
        if (ctor.kind != Tok::UIdent) throw error("constructor name");
        next();
        Constructor c{ctor.text, {}, ctor.pos};
        while (starts_type_atom() && peek().kind != Tok::Ident &&
               !is_kw("rec"))
          c.fields.push_back(atom_type());
        d.constructors.push_back(std::move(c));
      } while (is_sym("|") && (next(), true));
      p.datatypes.push_back(std::move(d));
      return;
    }
    if (t.kind == Tok::Ident) {
      Token name = next();
      if (is_sym(":") || is_sym("::")) {
        next();
        p.signatures.push_back({name.text, scheme(), name.pos});
        return;
      }
      std::vector<std::string> params;
      while (!is_sym("=")) params.push_back(binder());
      next();
      p.definitions.push_back({name.text, params, expr(), name.pos});
      return;
    }
    throw error("declaration");
  }

  // Skips to the next token in column 1 that could begin a declaration.
  void recover() {
    next();
    while (!at_eof()) {
      const Token& t = peek();
      if (t.pos.col == 1 && (t.kind == Tok::Ident || is_kw("type") || is_kw("data")))
        return;
      next();
    }
  }

  CompileError error(const std::string& what) const {
    const Token& t = peek();
    std::string found = t.kind == Tok::Eof ? "end of input" : "`" + t.text + "`";
    return CompileError(t.pos, "expected " + what + ", found " + found);
  }

 private:
  const Token& peek(std::size_t k = 0) const {
    return toks_[std::min(pos_ + k, toks_.size() - 1)];
  }
  Token next() {
    Token t = peek();
    if (pos_ < toks_.size() - 1) ++pos_;
    return t;
  }
  bool is_sym(const char* s) const {
    return peek().kind == Tok::Symbol && peek().text == s;
  }
  bool is_kw(const char* s) const {
    return peek().kind == Tok::Keyword && peek().text == s;
  }
  void expect_sym(const char* s) {
    if (!is_sym(s)) throw error(std::string("`") + s + "`");
    next();
  }
  void expect_kw(const char* s) {
    if (!is_kw(s)) throw error(std::string("`") + s + "`");
    next();
  }
  std::string expect_ident(const std::string& what) {
    if (peek().kind != Tok::Ident) throw error(what);
    return next().text;
  }
  std::string binder() {
    if (is_sym("_")) return next().text;
    return expect_ident("variable");
  }

  // `ident (ident|_)* stop` starting at offset k.
  bool header_ahead(std::size_t k, Tok head, std::initializer_list<const char*> stops) const {
    if (peek(k).kind != head) return false;
    ++k;
    while (peek(k).kind == Tok::Ident ||
           (peek(k).kind == Tok::Symbol && peek(k).text == "_"))
      ++k;
    const Token& t = peek(k);
    if (t.kind != Tok::Symbol) return false;
    for (const char* s : stops)
      if (t.text == s) return true;
    return false;
  }

  bool branch_ahead(std::size_t k = 0) const {
    return header_ahead(k, Tok::UIdent, {"->"}) ||
           header_ahead(k, Tok::Ident, {"->"});
  }
  bool declaration_ahead() const {
    return header_ahead(0, Tok::Ident, {"=", ":", "::"});
  }

  bool another_branch() {
    if (is_sym(",") && branch_ahead(1)) {
      next();
      return true;
    }
    return branch_ahead();
  }

  static int precedence(const Token& t, BinaryOp& op) {
    if (t.kind != Tok::Symbol) return -1;
    static const std::map<std::string, std::pair<int, BinaryOp>> table = {
        {"||", {1, BinaryOp::Or}},  {"&&", {2, BinaryOp::And}},
        {"==", {3, BinaryOp::Eq}},  {"/=", {3, BinaryOp::Ne}},
        {"<", {3, BinaryOp::Lt}},   {"<=", {3, BinaryOp::Le}},
        {">", {3, BinaryOp::Gt}},   {">=", {3, BinaryOp::Ge}},
        {"+", {4, BinaryOp::Add}},  {"-", {4, BinaryOp::Sub}},
        {"*", {5, BinaryOp::Mul}},  {"/", {5, BinaryOp::Div}},
        {"%", {5, BinaryOp::Mod}}};
    auto it = table.find(t.text);
    if (it == table.end()) return -1;
    op = it->second.second;
    return it->second.first;
  }

  // Left-associative precedence climbing; comparisons do not chain.
  ExprPtr binary(int min_prec) {
    ExprPtr lhs = application();
    while (true) {
      BinaryOp op;
      int prec = precedence(peek(), op);
      if (prec < 0 || prec < min_prec) return lhs;
      Pos pos = next().pos;
      ExprPtr rhs = binary(prec + 1);
      lhs = make_expr(Binary{op, lhs, rhs}, pos);
      if (prec == 3) {
        BinaryOp dummy;
        if (precedence(peek(), dummy) == 3)
          throw CompileError(peek().pos, "comparison operators do not chain");
      }
    }
  }

  bool starts_argument() const {
    const Token& t = peek();
    if (branch_ahead() || declaration_ahead()) return false;
    if (t.kind == Tok::Ident || t.kind == Tok::UIdent || t.kind == Tok::Int ||
        t.kind == Tok::Char)
      return true;
    if (t.kind == Tok::Keyword) return t.text == "True" || t.text == "False";
    return is_sym("(");
  }

  ExprPtr application() {
    Pos pos = peek().pos;
    ExprPtr head;
    if (is_kw("send")) {
      next();
      ExprPtr value = atom();
      head = make_expr(Send{value, atom()}, pos);
    } else if (is_kw("receive")) {
      next();
      head = make_expr(Receive{atom()}, pos);
    } else if (is_kw("select")) {
      next();
      Token label = peek();
      if (label.kind != Tok::UIdent && label.kind != Tok::Ident)
        throw error("choice label");
      next();
      head = make_expr(Select{label.text, atom()}, pos);
    } else if (is_kw("new")) {
      next();
      head = make_expr(New{semi_type()}, pos);
    } else if (is_kw("fork")) {
      next();
      return make_expr(Fork{application()}, pos);
    } else {
      head = atom();
    }
    while (starts_argument()) {
      Pos apos = peek().pos;
      head = make_expr(App{head, atom()}, apos);
    }
    return head;
  }

  ExprPtr atom() {
    const Token& t = peek();
    Pos pos = t.pos;
    switch (t.kind) {
      case Tok::Int: return make_expr(Literal{Basic::Int, next().value}, pos);
      case Tok::Char: return make_expr(Literal{Basic::Char, next().value}, pos);
      case Tok::Keyword:
        if (t.text == "True" || t.text == "False")
          return make_expr(Literal{Basic::Bool, next().text == "True" ? 1 : 0}, pos);
        break;
      case Tok::UIdent: return make_expr(Var{next().text}, pos);
      case Tok::Ident: {
        std::string name = next().text;
        if (is_sym("[")) {
          next();
          std::vector<TypePtr> args{type()};
          while (is_sym(",")) {
            next();
            args.push_back(type());
          }
          expect_sym("]");
          return make_expr(TypeApp{name, std::move(args)}, pos);
        }
        return make_expr(Var{name}, pos);
      }
      default: break;
    }
    if (is_sym("(")) {
      next();
      if (is_sym(")")) return next(), make_expr(Literal{Basic::Unit, 0}, pos);
      ExprPtr e = expr();
      if (is_sym(",")) {
        next();
        ExprPtr snd = expr();
        expect_sym(")");
        return make_expr(PairExpr{e, snd}, pos);
      }
      expect_sym(")");
      return e;
    }
    throw error("expression");
  }

  std::vector<Token> toks_;
  std::size_t pos_ = 0;
};

}  // namespace

const char* op_symbol(BinaryOp op) {
  switch (op) {
    case BinaryOp::Add: return "+";
    case BinaryOp::Sub: return "-";
    case BinaryOp::Mul: return "*";
    case BinaryOp::Div: return "/";
    case BinaryOp::Mod: return "%";
    case BinaryOp::Eq: return "==";
    case BinaryOp::Ne: return "/=";
    case BinaryOp::Lt: return "<";
    case BinaryOp::Le: return "<=";
    case BinaryOp::Gt: return ">";
    case BinaryOp::Ge: return ">=";
    case BinaryOp::And: return "&&";
    case BinaryOp::Or: return "||";
  }
  return "?";
}

std::string pretty(const Scheme& s) {
  std::ostringstream out;
  if (!s.binders.empty()) {
    out << "forall ";
    for (std::size_t i = 0; i < s.binders.size(); ++i) {
      if (i) out << ", ";
      out << s.binders[i].first << ':' << to_string(s.binders[i].second);
    }
    out << " => ";
  }
  out << pretty(s.body);
  return out.str();
}

const Signature* Program::find_signature(const std::string& name) const {
  for (const auto& s : signatures)
    if (s.name == name) return &s;
  return nullptr;
}

const Definition* Program::find_definition(const std::string& name) const {
  for (const auto& d : definitions)
    if (d.name == name) return &d;
  return nullptr;
}

TypePtr parse_type(const std::string& source) {
  Parser p(lex(source));
  TypePtr t = p.type();
  if (!p.at_eof()) throw p.error("end of type");
  return t;
}

ParseResult parse_program(const std::string& source) {
  ParseResult result;
  std::vector<Token> toks;
  try {
    toks = lex(source);
  } catch (const CompileError& e) {
    result.diagnostics.push_back(e.diagnostic());
    return result;
  }
  Parser parser(std::move(toks));
  Program prog;
  while (!parser.at_eof()) {
    try {
      parser.declaration(prog);
    } catch (const CompileError& e) {
      result.diagnostics.push_back(e.diagnostic());
      parser.recover();
    }
  }
  if (!result.diagnostics.empty()) return result;

  auto& diags = result.diagnostics;
  auto duplicate = [&](Pos pos, const std::string& what, const std::string& name) {
    diags.push_back({pos, Severity::Error, "duplicate " + what + " `" + name + "`"});
  };
  std::set<std::string> types, ctors, sigs, defs;
  for (const auto& a : prog.abbrevs)
    if (!types.insert(a.name).second) duplicate(a.pos, "type name", a.name);
  for (const auto& d : prog.datatypes) {
    if (!types.insert(d.name).second) duplicate(d.pos, "type name", d.name);
    for (const auto& c : d.constructors)
      if (!ctors.insert(c.name).second) duplicate(c.pos, "constructor", c.name);
  }
  for (const auto& s : prog.signatures)
    if (!sigs.insert(s.name).second) duplicate(s.pos, "signature for", s.name);
  for (const auto& d : prog.definitions) {
    if (!defs.insert(d.name).second) duplicate(d.pos, "definition of", d.name);
    if (!sigs.count(d.name))
      diags.push_back({d.pos, Severity::Error,
                       "definition `" + d.name + "` has no type signature"});
  }
  for (const auto& s : prog.signatures)
    if (!defs.count(s.name))
      diags.push_back({s.pos, Severity::Error,
                       "signature for `" + s.name + "` lacks a definition"});
  if (!defs.count("main")) diags.push_back({{1, 1}, Severity::Error, "missing main"});
  if (diags.empty()) result.program = std::move(prog);
  return result;
}

}  // namespace cfst
