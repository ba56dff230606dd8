#pragma once

#include <random>
#include <string>
#include <utility>
#include <vector>

#include "cfst/types.hpp"

namespace cfst::testing {

using Rng = std::mt19937_64;

struct GenConfig {
  int depth = 4;
  bool allow_rec = true;
  std::vector<std::string> free_vars;  // polymorphic atoms, none by default
  int labels = 3;                      // labels drawn from A, B, C, ...
};

/// Contractive, well-kinded session type. Every rec body starts with a
/// message or choice, so bound variables are always guarded.
TypePtr random_session(Rng& rng, const GenConfig& cfg = {});

/// Tail-recursive session type: `;` only as `message;S`, variables only in
/// tail position.
TypePtr random_tail_recursive(Rng& rng, const GenConfig& cfg = {});

/// Any well-kinded type, functional or session.
TypePtr random_type(Rng& rng, int depth = 3);

/// One structural change: a flipped polarity or view, or a renamed label.
TypePtr perturb(Rng& rng, const TypePtr& t);

/// Instances of the laws `;` must satisfy.
std::pair<TypePtr, TypePtr> monoid_instance(Rng& rng, const GenConfig& cfg = {});
std::pair<TypePtr, TypePtr> associativity_instance(Rng& rng, const GenConfig& cfg = {});
std::pair<TypePtr, TypePtr> distributivity_instance(Rng& rng, const GenConfig& cfg = {});

/// Applies `steps` equivalence-preserving rewrites at random positions:
/// unfolding, distributing `;` into a choice, re-association, adding Skip.
TypePtr equivalent_variant(Rng& rng, const TypePtr& t, int steps = 4);

/// `t` unfolded `levels` times at every outermost rec.
TypePtr unfold_levels(const TypePtr& t, int levels);

}  // namespace cfst::testing
