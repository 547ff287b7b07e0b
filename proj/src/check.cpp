#include "scp/check.hpp"

#include "scp/parser.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

namespace scp {

namespace fs = std::filesystem;

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

namespace {

std::string trim(const std::string& s) {
  auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

bool starts_with(const std::string& s, const std::string& prefix) {
  return s.compare(0, prefix.size(), prefix) == 0;
}

NameSet def_names(const Program& p) {
  NameSet out;
  for (const auto& d : p.defs) out.insert(d.name);
  return out;
}

}  // namespace

Manifest parse_manifest(const std::string& text, const std::string& base_dir) {
  Manifest m;
  std::istringstream in(text);
  std::string raw;
  int line = 0;
  while (std::getline(in, raw)) {
    ++line;
    std::string l = trim(raw);
    if (l.empty() || l[0] == '#') continue;
    if (starts_with(l, "golden:")) {
      fs::path p = trim(l.substr(7));
      m.golden = p.is_absolute() || base_dir.empty() ? p.string() : (fs::path(base_dir) / p).string();
    } else if (starts_with(l, "entry:")) {
      m.entries.push_back(trim(l.substr(6)));
    } else if (starts_with(l, "extern ")) {
      std::string rest = l.substr(7);
      auto eq = rest.find('=');
      if (eq == std::string::npos)
        throw std::runtime_error("manifest line " + std::to_string(line) + ": expected '='");
      m.externs.emplace_back(trim(rest.substr(0, eq)), trim(rest.substr(eq + 1)));
    } else {
      throw std::runtime_error("manifest line " + std::to_string(line) + ": unknown directive");
    }
  }
  return m;
}

Manifest load_manifest(const std::string& path) {
  return parse_manifest(read_file(path), fs::path(path).parent_path().string());
}

std::optional<std::string> default_manifest_path(const std::string& program_path) {
  fs::path p(program_path);
  p.replace_extension(".manifest");
  if (fs::exists(p)) return p.string();
  return std::nullopt;
}

const char* match_name(OutcomeMatch m) {
  switch (m) {
    case OutcomeMatch::BothValueEqual:
      return "both-value-equal";
    case OutcomeMatch::BothOutOfFuel:
      return "both-out-of-fuel";
    case OutcomeMatch::Mismatch:
      return "MISMATCH";
  }
  return "?";
}

OutcomeMatch compare_outcomes(const EvalOutcome& original, const EvalOutcome& residual) {
  using K = EvalOutcome::Kind;
  if (original.kind == K::Value && residual.kind == K::Value)
    return alpha_eq(original.value, residual.value) ? OutcomeMatch::BothValueEqual
                                                    : OutcomeMatch::Mismatch;
  if (original.kind == K::OutOfFuel && residual.kind == K::OutOfFuel)
    return OutcomeMatch::BothOutOfFuel;
  return OutcomeMatch::Mismatch;
}

Program bind_externs(const Program& p, const Manifest& m) {
  if (m.externs.empty()) return p;
  NameSet globals = def_names(p);
  Substitution s;
  for (const auto& [name, text] : m.externs) s[name] = parse_expression(text, globals);
  Program out = p;
  for (auto& d : out.defs) d.value = substitute(s, d.value, nullptr);
  return out;
}

SampleReport check_sample(const Program& original, const Program& residual,
                          const std::string& entry, std::uint64_t fuel) {
  SampleReport r;
  r.entry = entry;
  Globals og = original.globals();
  Globals rg = og;
  for (const auto& d : residual.defs) rg[d.name] = d.value;
  NameSet names;
  for (const auto& [g, v] : rg) names.insert(g);
  ExprPtr call = parse_expression(entry, names);
  r.original = eval(call, og, fuel);
  r.residual = eval(call, rg, fuel);
  r.match = compare_outcomes(r.original, r.residual);
  if (r.original.is_value() && r.residual.is_value())
    r.improved = r.residual.stats.calls <= r.original.stats.calls;
  return r;
}

bool CheckReport::ok() const {
  for (const auto& s : samples)
    if (s.match == OutcomeMatch::Mismatch || !s.improved) return false;
  return drive.measure_violations.empty() && drive.memo_violations.empty();
}

CheckReport check_program(const Program& original, const Manifest& manifest,
                          const CheckOptions& options, const std::optional<Program>& golden) {
  CheckReport report;
  Program residual = supercompile(original, options.drive, &report.drive);
  report.residual_text = pretty(residual);
  if (golden) report.golden_match = alpha_eq(residual, *golden);
  Program o = bind_externs(original, manifest);
  Program r = bind_externs(residual, manifest);
  std::vector<std::string> entries = manifest.entries;
  if (entries.empty()) {
    const Definition* d = original.find(original.entry);
    if (d != nullptr && lambda_view(d->value).params.empty()) entries.push_back(original.entry);
  }
  for (const auto& e : entries) report.samples.push_back(check_sample(o, r, e, options.fuel));
  return report;
}

std::string render(const CheckReport& report) {
  std::ostringstream s;
  if (!report.program.empty()) s << "program: " << report.program << "\n";
  if (report.golden_match) s << "golden: " << (*report.golden_match ? "match" : "DIFFERS") << "\n";
  for (const auto& v : report.drive.measure_violations) s << "measure violation: " << v << "\n";
  for (const auto& v : report.drive.memo_violations) s << "memo violation: " << v << "\n";
  for (const auto& sample : report.samples) {
    s << "sample " << sample.entry << ": " << match_name(sample.match);
    if (sample.match == OutcomeMatch::Mismatch)
      s << " (original " << outcome_name(sample.original.kind) << ", residual "
        << outcome_name(sample.residual.kind) << ")";
    s << "\n  calls " << sample.original.stats.calls << " -> " << sample.residual.stats.calls
      << (sample.improved ? "" : "  IMPROVEMENT VIOLATED") << "\n  allocs "
      << sample.original.stats.allocs << " -> " << sample.residual.stats.allocs << "\n  steps "
      << sample.original.stats.steps << " -> " << sample.residual.stats.steps << "\n";
  }
  s << "result: " << (report.ok() ? "ok" : "FAILED") << "\n";
  return s.str();
}

}  // namespace scp
