#pragma once

// Whistle and generalization: uniform terms, homeomorphic embedding, most
// specific generalization and split.

#include "scp/syntax.hpp"

#include <string>
#include <utility>
#include <vector>

namespace scp {

struct UniformTerm {
  enum class Kind { Fun, Ctor, CaseOf, Let, Letrec, PrimOp, Lambda, Apply, VarAtom, IntAtom };
  Kind kind;
  std::string name;  // Fun and Ctor only
  std::vector<UniformTerm> children;

  bool same_symbol(const UniformTerm& other) const {
    return kind == other.kind && name == other.name && children.size() == other.children.size();
  }
  std::size_t size() const;
  std::string to_string() const;
};

UniformTerm to_uniform(const ExprPtr& e);

/// e ⊴ f, decided in O(|e|·|f|).
bool embeds(const UniformTerm& e, const UniformTerm& f);
bool embeds(const ExprPtr& e, const ExprPtr& f);

/// Ordered substitution, in left-to-right order of first occurrence.
using Bindings = std::vector<std::pair<std::string, ExprPtr>>;
Substitution to_substitution(const Bindings& b);

struct Generalization {
  ExprPtr common;
  Bindings theta1;
  Bindings theta2;
};

/// Most specific generalization. Fresh variables come from `supply` and are
/// flagged fresh.
Generalization msg(const ExprPtr& e, const ExprPtr& f, NameSupply& supply);

struct SplitResult {
  ExprPtr common;
  std::vector<ExprPtr> parts;
  std::vector<std::string> holes;
};

SplitResult split(const ExprPtr& t1, const ExprPtr& t2, NameSupply& supply);

}  // namespace scp
