#pragma once

// The supercompiler: driving rules, application driving with memoization,
// folding and generalization, and residual program assembly.

#include "scp/syntax.hpp"

#include <cstdint>
#include <map>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

namespace scp {

/// One layer of a driving context R.
struct DFrame {
  enum class Kind {
    AppArg,     // R e
    CaseScrut,  // case R of alts
    PrimLeft,   // R ⊕ e
    PrimRight,  // e ⊕ R
  };
  Kind kind;
  ExprPtr expr;
  Op op = Op::Add;
  std::vector<Alt> alts;
};

/// Innermost frame last.
using DrivingContext = std::vector<DFrame>;

ExprPtr plug(const DrivingContext& context, ExprPtr e);
NameSet context_free_vars(const DrivingContext& context);

struct MemoEntry {
  std::string h;
  ExprPtr term;
  std::vector<std::string> params;
};

/// Ordered by insertion; passed down the recursion by value.
using MemoList = std::vector<MemoEntry>;

class DriverError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct DriveOptions {
  bool lift = true;
  bool assert_measure = false;
  std::ostream* trace = nullptr;
  std::ostream* explain_strict = nullptr;
  std::uint64_t max_drive_calls = 2'000'000;
};

struct DriveReport {
  std::map<std::string, std::uint64_t> rule_counts;
  std::uint64_t drive_calls = 0;
  std::uint64_t memo_entries = 0;
  std::uint64_t folds = 0;
  std::uint64_t generalizations = 0;
  std::vector<std::string> measure_violations;
  std::vector<std::string> memo_violations;
};

/// D⟦e⟧ in the empty context with an empty memo list. `initial_vars` are the
/// variables of the input program (weight 2 in the termination measure).
ExprPtr drive_expression(const ExprPtr& e, const Globals& globals, NameSupply& supply,
                         const DriveOptions& options, DriveReport* report = nullptr,
                         Globals* local_globals = nullptr);

/// Drives the entry definition's body with its parameters free, then lifts
/// residual letrecs to top level (unless disabled) and renames generated
/// functions canonically.
Program supercompile(const Program& p, const DriveOptions& options = {},
                     DriveReport* report = nullptr);

/// Hoists every letrec to a top-level definition.
Program lift_letrecs(const std::string& entry, const ExprPtr& entry_value);

}  // namespace scp
