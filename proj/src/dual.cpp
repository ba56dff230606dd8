#include "cfst/dual.hpp"

namespace cfst {

TypePtr dual(const TypePtr& s) {
  return std::visit(
      [&](const auto& n) -> TypePtr {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, Semi>) {
          return make_semi(dual(n.lhs), dual(n.rhs), s->pos);
        } else if constexpr (std::is_same_v<T, Message>) {
          auto flipped = n.polarity == Polarity::Out ? Polarity::In : Polarity::Out;
          return make_message(flipped, n.payload, s->pos);
        } else if constexpr (std::is_same_v<T, Choice>) {
          std::map<std::string, TypePtr> bs;
          for (const auto& [l, b] : n.branches) bs.emplace(l, dual(b));
          auto flipped = n.view == View::Internal ? View::External : View::Internal;
          return make_choice(flipped, std::move(bs), s->pos);
        } else if constexpr (std::is_same_v<T, Rec>) {
          return make_rec(n.var, dual(n.body), s->pos);
        } else {
          return s;
        }
      },
      s->node);
}

}  // namespace cfst
