// scp: build, evaluate and check programs with the supercompiler.

#include "scp/analysis.hpp"
#include "scp/check.hpp"
#include "scp/driver.hpp"
#include "scp/generalize.hpp"
#include "scp/parser.hpp"
#include "scp/semantics.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>

namespace {

constexpr int kOk = 0;
constexpr int kCheckFailed = 1;
constexpr int kUsage = 2;
constexpr int kInternal = 3;

scp::Program load_program(const std::string& path) {
  return scp::parse_program(scp::read_file(path));
}

int cmd_build(const std::string& file, const std::string& out, bool no_lift, bool trace,
              bool assert_measure, bool explain_strict) {
  scp::Program p = load_program(file);
  scp::DriveOptions opts;
  opts.lift = !no_lift;
  opts.assert_measure = assert_measure;
  if (trace) opts.trace = &std::cerr;
  if (explain_strict) opts.explain_strict = &std::cerr;
  scp::DriveReport report;
  scp::Program residual = scp::supercompile(p, opts, &report);
  std::string text = scp::pretty(residual);
  if (out.empty()) {
    std::cout << text;
  } else {
    std::ofstream f(out, std::ios::binary);
    if (!f) throw std::runtime_error("cannot write " + out);
    f << text;
  }
  if (assert_measure) {
    for (const auto& v : report.measure_violations) std::cerr << "measure violation: " << v << "\n";
    for (const auto& v : report.memo_violations) std::cerr << "memo violation: " << v << "\n";
    if (!report.measure_violations.empty() || !report.memo_violations.empty()) return kInternal;
  }
  return kOk;
}

int cmd_eval(const std::string& file, const std::string& expr, std::uint64_t fuel, bool stats,
             std::string manifest_path) {
  scp::Program p = load_program(file);
  if (manifest_path.empty()) manifest_path = scp::default_manifest_path(file).value_or("");
  if (!manifest_path.empty()) p = scp::bind_externs(p, scp::load_manifest(manifest_path));
  scp::NameSet names;
  for (const auto& d : p.defs) names.insert(d.name);
  scp::ExprPtr e = scp::parse_expression(expr.empty() ? p.entry : expr, names);
  scp::EvalOutcome r = scp::eval(e, p.globals(), fuel);
  switch (r.kind) {
    case scp::EvalOutcome::Kind::Value:
      std::cout << scp::pretty(r.value) << "\n";
      break;
    case scp::EvalOutcome::Kind::OutOfFuel:
      std::cout << "OUT-OF-FUEL\n";
      break;
    case scp::EvalOutcome::Kind::Stuck:
      std::cout << "STUCK: " << r.reason << "\n";
      break;
  }
  if (stats) std::cout << scp::render_stats(r);
  return r.kind == scp::EvalOutcome::Kind::Stuck ? kCheckFailed : kOk;
}

int cmd_check(const std::string& file, std::uint64_t fuel, std::string manifest_path) {
  scp::Program p = load_program(file);
  if (manifest_path.empty()) manifest_path = scp::default_manifest_path(file).value_or("");
  scp::Manifest m;
  if (!manifest_path.empty()) m = scp::load_manifest(manifest_path);
  std::optional<scp::Program> golden;
  if (!m.golden.empty()) golden = load_program(m.golden);
  scp::CheckOptions opts;
  opts.fuel = fuel;
  opts.drive.assert_measure = true;
  scp::CheckReport report = scp::check_program(p, m, opts, golden);
  report.program = file;
  std::cout << scp::render(report);
  if (report.golden_match && !*report.golden_match) std::cout << "residual:\n" << report.residual_text;
  return report.ok() ? kOk : kCheckFailed;
}

int cmd_embed(const std::string& a, const std::string& b) {
  scp::ExprPtr e = scp::parse_expression(a);
  scp::ExprPtr f = scp::parse_expression(b);
  std::cout << (scp::embeds(e, f) ? "true" : "false") << "\n";
  return kOk;
}

int cmd_msg(const std::string& a, const std::string& b) {
  scp::ExprPtr e = scp::parse_expression(a);
  scp::ExprPtr f = scp::parse_expression(b);
  scp::NameSet taken;
  scp::collect_var_names(e, taken);
  scp::collect_var_names(f, taken);
  scp::NameSupply supply(taken);
  scp::Generalization g = scp::msg(e, f, supply);
  auto show = [](const scp::Bindings& b) {
    std::string out = "[";
    for (std::size_t i = 0; i < b.size(); ++i)
      out += (i ? ", " : "") + b[i].first + " := " + scp::pretty(b[i].second);
    return out + "]";
  };
  std::cout << "common: " << scp::pretty(g.common) << "\n";
  std::cout << "theta1: " << show(g.theta1) << "\n";
  std::cout << "theta2: " << show(g.theta2) << "\n";
  return kOk;
}

int cmd_strict(const std::string& file) {
  scp::Program p = load_program(file);
  for (const auto& d : p.defs) {
    scp::LambdaView v = scp::lambda_view(d.value);
    scp::NameSet s = scp::strict_vars(v.body);
    std::cout << d.name << ": {";
    bool first = true;
    for (const auto& x : s) {
      std::cout << (first ? "" : ", ") << x;
      first = false;
    }
    std::cout << "}\n";
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Positive supercompiler for a strict higher-order language"};
  app.require_subcommand(1);

  std::string file, out, expr, manifest, e1, e2;
  bool no_lift = false, trace = false, assert_measure = false, explain_strict = false, stats = false;
  std::uint64_t fuel = 1'000'000;

  auto* build = app.add_subcommand("build", "Supercompile a program and print the residual");
  build->add_option("FILE", file, "Program file")->required();
  build->add_option("-o,--output", out, "Write the residual here");
  build->add_flag("--no-lift", no_lift, "Keep residual letrecs in place");
  build->add_flag("--trace", trace, "Print one line per driving rule to stderr");
  build->add_flag("--assert-measure", assert_measure, "Check the termination measure");
  build->add_flag("--explain-strict", explain_strict, "Explain each strictness decision");

  auto* ev = app.add_subcommand("eval", "Evaluate an expression against a program");
  ev->add_option("FILE", file, "Program file")->required();
  ev->add_option("-e,--expr", expr, "Expression to evaluate (default: the entry)");
  ev->add_option("--fuel", fuel, "Reduction budget");
  ev->add_flag("--stats", stats, "Print call, allocation and step counts");
  ev->add_option("--manifest", manifest, "Manifest whose externs are bound (default: FILE with .manifest)");

  auto* check = app.add_subcommand("check", "Compare a program with its residual");
  check->add_option("FILE", file, "Program file")->required();
  check->add_option("--fuel", fuel, "Reduction budget per sample");
  check->add_option("--manifest", manifest, "Manifest (default: FILE with .manifest)");

  auto* embed = app.add_subcommand("embed", "Decide homeomorphic embedding E1 <| E2");
  embed->add_option("E1", e1)->required();
  embed->add_option("E2", e2)->required();

  auto* gen = app.add_subcommand("msg", "Most specific generalization of E1 and E2");
  gen->add_option("E1", e1)->required();
  gen->add_option("E2", e2)->required();

  auto* strict = app.add_subcommand("strict", "Print strict variables per definition");
  strict->add_option("FILE", file, "Program file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (*build) return cmd_build(file, out, no_lift, trace, assert_measure, explain_strict);
    if (*ev) return cmd_eval(file, expr, fuel, stats, manifest);
    if (*check) return cmd_check(file, fuel, manifest);
    if (*embed) return cmd_embed(e1, e2);
    if (*gen) return cmd_msg(e1, e2);
    if (*strict) return cmd_strict(file);
  } catch (const scp::ParseError& e) {
    std::cerr << "parse error: " << e.what() << "\n";
    return kUsage;
  } catch (const scp::LetrecError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const scp::DriverError& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return kInternal;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  }
  return kUsage;
}
