#include "cfst/pretty.hpp"

#include <sstream>

namespace cfst {

namespace {

enum class Level { Arrow, Semi, Atom };

void print(std::ostream& out, const TypePtr& t, Level ctx);

void print_paren(std::ostream& out, const TypePtr& t, bool paren) {
  if (paren) out << '(';
  print(out, t, paren ? Level::Arrow : Level::Atom);
  if (paren) out << ')';
}

void print(std::ostream& out, const TypePtr& t, Level ctx) {
  std::visit(
      [&](const auto& n) {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, BasicType>) {
          out << basic_name(n.basic);
        } else if constexpr (std::is_same_v<T, Arrow>) {
          bool paren = ctx != Level::Arrow;
          if (paren) out << '(';
          print(out, n.dom, Level::Semi);
          out << (n.mult == Multiplicity::Linear ? " -o " : " -> ");
          print(out, n.cod, Level::Arrow);
          if (paren) out << ')';
        } else if constexpr (std::is_same_v<T, PairType>) {
          out << '(';
          print(out, n.fst, Level::Arrow);
          out << ", ";
          print(out, n.snd, Level::Arrow);
          out << ')';
        } else if constexpr (std::is_same_v<T, DataRef>) {
          out << n.name;
        } else if constexpr (std::is_same_v<T, Skip>) {
          out << "Skip";
        } else if constexpr (std::is_same_v<T, Semi>) {
          bool paren = ctx == Level::Atom;
          if (paren) out << '(';
          // Left operands that would swallow the `;` need parentheses.
          bool lparen = n.lhs->template is<Semi>() || n.lhs->template is<Rec>() ||
                        n.lhs->template is<Arrow>();
          print_paren(out, n.lhs, lparen);
          out << ';';
          print(out, n.rhs, Level::Semi);
          if (paren) out << ')';
        } else if constexpr (std::is_same_v<T, Message>) {
          out << (n.polarity == Polarity::Out ? '!' : '?')
              << basic_name(n.payload);
        } else if constexpr (std::is_same_v<T, Choice>) {
          out << (n.view == View::Internal ? "+{" : "&{");
          bool first = true;
          for (const auto& [label, b] : n.branches) {
            if (!first) out << ", ";
            first = false;
            out << label << ": ";
            print(out, b, Level::Arrow);
          }
          out << '}';
        } else if constexpr (std::is_same_v<T, Rec>) {
          bool paren = ctx == Level::Atom;
          if (paren) out << '(';
          out << "rec " << n.var << ". ";
          print(out, n.body, Level::Semi);
          if (paren) out << ')';
        } else {
          out << n.name;
        }
      },
      t->node);
}

}  // namespace

std::string pretty(const TypePtr& t) {
  std::ostringstream out;
  print(out, t, Level::Arrow);
  return out.str();
}

}  // namespace cfst
