#pragma once

#include <string>

#include "cfst/types.hpp"

namespace cfst {

/// Concrete syntax for `t`, parenthesized just enough to parse back to the
/// same tree.
std::string pretty(const TypePtr& t);

}  // namespace cfst
