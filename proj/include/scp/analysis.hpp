#pragma once

// Strictness approximation and the annoying-expression classifier.

#include "scp/syntax.hpp"

namespace scp {

/// Variables whose value evaluation of `e` certainly demands: all free
/// variables except those only under a lambda or not in every case branch.
NameSet strict_vars(const ExprPtr& e);

/// a ::= x | n ⊕ a | a ⊕ n | a ⊕ a | a ē
bool is_annoying(const ExprPtr& e);

}  // namespace scp
