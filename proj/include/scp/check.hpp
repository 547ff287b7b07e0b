#pragma once

// Differential checking of a program against its residual.

#include "scp/driver.hpp"
#include "scp/semantics.hpp"

#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace scp {

// Sidecar manifest, one directive per line:
//
//   golden: PATH          expected residual program (relative to the manifest)
//   entry: EXPR           closed sample call, repeatable
//   extern NAME = EXPR    closed value for a free variable of the program
//
// Blank lines and lines starting with "#" are ignored.
struct Manifest {
  std::string golden;
  std::vector<std::string> entries;
  std::vector<std::pair<std::string, std::string>> externs;
};

Manifest parse_manifest(const std::string& text, const std::string& base_dir);
Manifest load_manifest(const std::string& path);

/// The sidecar next to `program_path` (extension replaced by .manifest), if any.
std::optional<std::string> default_manifest_path(const std::string& program_path);

enum class OutcomeMatch { BothValueEqual, BothOutOfFuel, Mismatch };
const char* match_name(OutcomeMatch m);

OutcomeMatch compare_outcomes(const EvalOutcome& original, const EvalOutcome& residual);

/// Replaces the free variables named by the manifest's externs in every
/// definition.
Program bind_externs(const Program& p, const Manifest& m);

struct SampleReport {
  std::string entry;
  OutcomeMatch match = OutcomeMatch::Mismatch;
  EvalOutcome original;
  EvalOutcome residual;
  bool improved = true;
};

struct CheckReport {
  std::string program;
  std::string residual_text;
  std::optional<bool> golden_match;
  std::vector<SampleReport> samples;
  DriveReport drive;

  /// Outcome matches, improvement and driver invariants; the golden
  /// comparison is reported but does not fail the check.
  bool ok() const;
};

struct CheckOptions {
  std::uint64_t fuel = 1'000'000;
  DriveOptions drive;
};

CheckReport check_program(const Program& original, const Manifest& manifest,
                          const CheckOptions& options = {},
                          const std::optional<Program>& golden = std::nullopt);

/// Runs a single sample on both programs.
SampleReport check_sample(const Program& original, const Program& residual,
                          const std::string& entry, std::uint64_t fuel);

std::string render(const CheckReport& report);

std::string read_file(const std::string& path);

}  // namespace scp
