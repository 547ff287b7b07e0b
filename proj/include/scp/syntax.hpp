#pragma once

// Core language: a strict, pure, higher-order functional language with
// integers, constructors, case, let and letrec.

#include <boost/multiprecision/cpp_int.hpp>

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace scp {

using Integer = boost::multiprecision::cpp_int;
using NameSet = std::set<std::string>;

/// Name of the fixed-point combinator used by the letrec encoding.
inline constexpr const char* kFixName = "fix";
inline constexpr const char* kNilCtor = "Nil";
inline constexpr const char* kConsCtor = "Cons";

enum class Op { Add, Sub, Mul };

const char* op_symbol(Op op);
Integer apply_op(Op op, const Integer& lhs, const Integer& rhs);

class Expr;
using ExprPtr = std::shared_ptr<const Expr>;

struct Pattern {
  enum class Kind { Int, Ctor, Default };

  Kind kind = Kind::Default;
  Integer value;
  std::string ctor;
  std::vector<std::string> vars;
  // Parallel to `vars`; empty means no variable is fresh.
  std::vector<bool> fresh;

  static Pattern integer(Integer n);
  static Pattern constructor(std::string k, std::vector<std::string> vars,
                             std::vector<bool> fresh = {});
  bool var_fresh(std::size_t i) const { return i < fresh.size() && fresh[i]; }
  static Pattern wildcard();

  /// Pattern viewed as an expression (k x̄ or n); nullopt for the wildcard.
  std::optional<ExprPtr> as_expr() const;
  bool binds(const std::string& x) const;
  bool same_shape(const Pattern& other) const;
};

struct Alt {
  Pattern pattern;
  ExprPtr body;
};

struct IntLit {
  Integer value;
};
struct Var {
  std::string name;
  bool fresh = false;
};
struct Global {
  std::string name;
};
struct App {
  ExprPtr fun;
  ExprPtr arg;
};
struct Lambda {
  std::string param;
  ExprPtr body;
};
struct CtorApp {
  std::string ctor;
  std::vector<ExprPtr> args;
};
struct PrimOp {
  Op op;
  ExprPtr lhs;
  ExprPtr rhs;
};
struct Case {
  ExprPtr scrutinee;
  std::vector<Alt> alts;
};
struct Let {
  std::string binder;
  ExprPtr bound;
  ExprPtr body;
};
struct Letrec {
  std::string name;
  ExprPtr rhs;
  ExprPtr body;
};
// Driver-internal: a pending generalization request addressed to the memo
// entry `owner`. Never present in finished residuals.
struct Marker {
  std::string owner;
  ExprPtr term;
};

class Expr {
 public:
  using Node = std::variant<IntLit, Var, Global, App, Lambda, CtorApp, PrimOp,
                            Case, Let, Letrec, Marker>;

  explicit Expr(Node node);

  const Node& node() const { return node_; }
  template <typename T>
  const T* as() const {
    return std::get_if<T>(&node_);
  }
  template <typename T>
  bool is() const {
    return std::holds_alternative<T>(node_);
  }

  /// v ::= n | λx.e | k v̄
  bool is_value() const { return value_; }
  const NameSet& free_vars() const { return fv_; }

 private:
  Node node_;
  bool value_ = false;
  NameSet fv_;
};

namespace mk {
ExprPtr integer(Integer n);
ExprPtr var(std::string name, bool fresh = false);
ExprPtr global(std::string name);
ExprPtr app(ExprPtr fun, ExprPtr arg);
ExprPtr apps(ExprPtr fun, const std::vector<ExprPtr>& args);
ExprPtr lambda(std::string param, ExprPtr body);
ExprPtr lambdas(const std::vector<std::string>& params, ExprPtr body);
ExprPtr ctor(std::string k, std::vector<ExprPtr> args = {});
ExprPtr prim(Op op, ExprPtr lhs, ExprPtr rhs);
ExprPtr case_of(ExprPtr scrutinee, std::vector<Alt> alts);
ExprPtr let(std::string x, ExprPtr bound, ExprPtr body);
ExprPtr letrec(std::string g, ExprPtr rhs, ExprPtr body);
ExprPtr marker(std::string owner, ExprPtr term);
ExprPtr nil();
ExprPtr cons(ExprPtr head, ExprPtr tail);
ExprPtr list(const std::vector<ExprPtr>& items);
}  // namespace mk

/// An application spine f e₁ … eₙ viewed as (head, args).
struct Spine {
  ExprPtr head;
  std::vector<ExprPtr> args;
};
Spine spine_of(const ExprPtr& e);

/// Nested lambdas λx₁.…λxₙ.body viewed as (params, body).
struct LambdaView {
  std::vector<std::string> params;
  ExprPtr body;
};
LambdaView lambda_view(const ExprPtr& e);

NameSet free_vars(const ExprPtr& e);
NameSet fun_names(const ExprPtr& e);
/// Free variables ordered by first occurrence, left to right.
std::vector<std::string> free_vars_ordered(const ExprPtr& e);
/// Every variable name appearing anywhere (bound, free or in patterns).
void collect_var_names(const ExprPtr& e, NameSet& out);
bool contains_marker(const ExprPtr& e);
std::size_t size_of(const ExprPtr& e);

/// Issues names that never collide with the seeded names or each other.
class NameSupply {
 public:
  NameSupply() = default;
  explicit NameSupply(NameSet taken) : taken_(std::move(taken)) {}

  void reserve(const std::string& name) { taken_.insert(name); }
  void reserve_all(const NameSet& names);
  /// Fresh variable name derived from `hint`.
  std::string fresh_name(const std::string& hint = "x");
  /// Fresh function symbol.
  std::string fresh_fun(const std::string& hint = "h");
  ExprPtr fresh_var(const std::string& hint = "x");

 private:
  std::string issue(std::string base);
  NameSet taken_;
  std::map<std::string, std::uint64_t> counters_;
};

using Substitution = std::map<std::string, ExprPtr>;

/// Simultaneous capture-avoiding substitution. Binders are renamed (and
/// flagged fresh) only when a capture would otherwise occur.
ExprPtr substitute(const Substitution& bindings, const ExprPtr& e,
                   NameSupply* supply = nullptr);
ExprPtr substitute1(const std::string& x, const ExprPtr& value,
                    const ExprPtr& e, NameSupply* supply = nullptr);
/// Replaces free occurrences of function symbol `from` by `to`.
ExprPtr rename_global(const ExprPtr& e, const std::string& from,
                      const ExprPtr& to);

/// x occurs at most once in e; a case head and its branches may not both
/// mention x, but several branches may.
bool is_linear(const ExprPtr& e, const std::string& x);

/// Equality up to consistent renaming of bound variables and of
/// letrec-bound function names.
bool alpha_eq(const ExprPtr& a, const ExprPtr& b);

using Renaming = std::map<std::string, std::string>;

/// σ with σ(pattern) ≡ subject (modulo bound names), mapping free variables
/// of `pattern` to variables. σ need not be injective.
std::optional<Renaming> match_renaming(const ExprPtr& pattern,
                                       const ExprPtr& subject);

/// Initial-input variables, integers and function names weigh 2, fresh
/// variables 1, composite terms one plus the weight of their parts.
std::uint64_t weight(const ExprPtr& e, const NameSet& initial_vars);

class LetrecError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// letrec h = λx̄.e in e′ as (λh.e′)(λy.fix (λh.λx̄.e) y).
ExprPtr desugar_letrec(const std::string& g, const ExprPtr& rhs,
                       const ExprPtr& body);
/// fix = λf.f (λn.fix f n)
ExprPtr fix_definition();

using Globals = std::map<std::string, ExprPtr>;

struct Definition {
  std::string name;
  ExprPtr value;
};

struct Program {
  std::vector<Definition> defs;
  std::string entry = "main";

  const Definition* find(const std::string& name) const;
  void set(const std::string& name, ExprPtr value);
  Globals globals() const;
};

/// α-equivalence of programs: definitions are matched from the entry,
/// with a consistent bijection between non-entry function names.
bool alpha_eq(const Program& a, const Program& b);

}  // namespace scp
