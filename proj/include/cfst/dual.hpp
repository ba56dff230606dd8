#pragma once

#include "cfst/types.hpp"

namespace cfst {

/// Syntactic dual of a session type: polarities and choice views flip,
/// everything else is preserved.
TypePtr dual(const TypePtr& s);

}  // namespace cfst
