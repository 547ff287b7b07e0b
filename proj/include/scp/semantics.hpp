#pragma once

// Small-step call-by-value reference interpreter with call, allocation and
// step counters.

#include "scp/syntax.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace scp {

/// One layer of a reduction context E.
struct Frame {
  enum class Kind {
    AppFun,     // E e
    AppArg,     // (λx.e) E
    CtorArg,    // k v̄ E ē
    PrimLeft,   // E ⊕ e
    PrimRight,  // n ⊕ E
    CaseScrut,  // case E of alts
    LetBound,   // let x = E in e
  };
  Kind kind;
  ExprPtr expr;                 // argument, lambda, right operand, left value or let body
  std::vector<ExprPtr> before;  // CtorArg: evaluated arguments
  std::vector<ExprPtr> after;   // CtorArg: pending arguments
  std::string name;             // CtorArg: constructor; LetBound: binder
  Op op = Op::Add;
  std::vector<Alt> alts;
};

/// Innermost frame last.
using ReductionContext = std::vector<Frame>;

ExprPtr plug(const ReductionContext& context, ExprPtr e);

class StuckError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Decomposition {
  bool is_value = false;
  ReductionContext context;
  ExprPtr redex;
};

/// Unique decomposition e = E⟨redex⟩. Throws StuckError when e is neither a
/// value nor decomposable (a free variable in redex position).
Decomposition decompose(const ExprPtr& e);

enum class Rule { Global, App, Let, KCase, NCase, Arith, Letrec };
const char* rule_name(Rule r);

struct StepResult {
  ExprPtr expr;
  Rule rule;
};

/// One reduction at the unique redex; nullopt when e is a value.
std::optional<StepResult> step(const ExprPtr& e, const Globals& globals);

struct EvalStats {
  std::uint64_t calls = 0;
  std::uint64_t allocs = 0;
  std::uint64_t steps = 0;
  std::map<std::string, std::uint64_t> allocs_by_ctor;
};

struct EvalOutcome {
  enum class Kind { Value, OutOfFuel, Stuck };
  Kind kind = Kind::Stuck;
  ExprPtr value;
  std::string reason;
  EvalStats stats;

  bool is_value() const { return kind == Kind::Value; }
};

struct EvalOptions {
  // Constructor values already present in the initial expression are
  // inputs, not allocations.
  bool count_initial_ctors = false;
};

EvalOutcome eval(const ExprPtr& e, const Globals& globals, std::uint64_t fuel,
                 const EvalOptions& options = {});

/// calls=… allocs=… steps=… outcome=… as key=value lines.
std::string render_stats(const EvalOutcome& outcome);
const char* outcome_name(EvalOutcome::Kind kind);

}  // namespace scp
