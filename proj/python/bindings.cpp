// Python bindings for the supercompiler: parsing, driving, evaluation,
// differential checking and the generalization machinery.

#include "scp/analysis.hpp"
#include "scp/check.hpp"
#include "scp/driver.hpp"
#include "scp/generalize.hpp"
#include "scp/parser.hpp"
#include "scp/semantics.hpp"

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

namespace py = pybind11;

namespace {

scp::NameSet def_names(const scp::Program& p) {
  scp::NameSet out;
  for (const auto& d : p.defs) out.insert(d.name);
  return out;
}

py::dict outcome_dict(const scp::EvalOutcome& o) {
  py::dict d;
  d["outcome"] = scp::outcome_name(o.kind);
  d["value"] = o.is_value() ? py::object(py::str(scp::pretty(o.value))) : py::object(py::none());
  d["reason"] = o.reason;
  d["calls"] = o.stats.calls;
  d["allocs"] = o.stats.allocs;
  d["steps"] = o.stats.steps;
  d["allocs_by_ctor"] = o.stats.allocs_by_ctor;
  return d;
}

std::string supercompile_text(const std::string& text, bool lift, bool assert_measure) {
  scp::DriveOptions o;
  o.lift = lift;
  o.assert_measure = assert_measure;
  scp::DriveReport rep;
  scp::Program r = scp::supercompile(scp::parse_program(text), o, &rep);
  if (assert_measure && (!rep.measure_violations.empty() || !rep.memo_violations.empty())) {
    std::string why = !rep.measure_violations.empty() ? rep.measure_violations.front()
                                                      : rep.memo_violations.front();
    throw scp::DriverError("invariant violated: " + why);
  }
  return scp::pretty(r);
}

py::dict evaluate(const std::string& text, const std::string& expr, std::uint64_t fuel) {
  scp::Program p = scp::parse_program(text);
  scp::ExprPtr e = scp::parse_expression(expr.empty() ? p.entry : expr, def_names(p));
  return outcome_dict(scp::eval(e, p.globals(), fuel));
}

py::dict check(const std::string& text, const std::string& manifest, const std::string& base_dir,
               std::uint64_t fuel) {
  scp::Program p = scp::parse_program(text);
  scp::Manifest m = scp::parse_manifest(manifest, base_dir);
  std::optional<scp::Program> golden;
  if (!m.golden.empty()) golden = scp::parse_program(scp::read_file(m.golden));
  scp::CheckOptions o;
  o.fuel = fuel;
  o.drive.assert_measure = true;
  scp::CheckReport r = scp::check_program(p, m, o, golden);
  py::dict d;
  d["ok"] = r.ok();
  d["residual"] = r.residual_text;
  d["golden_match"] = r.golden_match ? py::object(py::bool_(*r.golden_match)) : py::object(py::none());
  py::list samples;
  for (const auto& s : r.samples) {
    py::dict x;
    x["entry"] = s.entry;
    x["match"] = scp::match_name(s.match);
    x["improved"] = s.improved;
    x["original"] = outcome_dict(s.original);
    x["residual"] = outcome_dict(s.residual);
    samples.append(x);
  }
  d["samples"] = samples;
  d["measure_violations"] = r.drive.measure_violations;
  d["memo_violations"] = r.drive.memo_violations;
  d["report"] = scp::render(r);
  return d;
}

py::tuple msg(const std::string& a, const std::string& b) {
  scp::ExprPtr e = scp::parse_expression(a);
  scp::ExprPtr f = scp::parse_expression(b);
  scp::NameSet taken;
  scp::collect_var_names(e, taken);
  scp::collect_var_names(f, taken);
  scp::NameSupply supply(taken);
  scp::Generalization g = scp::msg(e, f, supply);
  auto pairs = [](const scp::Bindings& bs) {
    std::vector<std::pair<std::string, std::string>> out;
    for (const auto& [x, v] : bs) out.emplace_back(x, scp::pretty(v));
    return out;
  };
  return py::make_tuple(scp::pretty(g.common), pairs(g.theta1), pairs(g.theta2));
}

}  // namespace

PYBIND11_MODULE(_scp, m) {
  m.doc() = "Positive supercompiler for a strict higher-order language";

  py::register_exception<scp::ParseError>(m, "ParseError", PyExc_ValueError);
  py::register_exception<scp::DriverError>(m, "DriverError", PyExc_RuntimeError);
  py::register_exception<scp::LetrecError>(m, "LetrecError", PyExc_ValueError);

  m.def("parse", [](const std::string& text) { return scp::pretty(scp::parse_program(text)); },
        py::arg("text"), "Parse a program and print it back in normal form.");
  m.def("supercompile", &supercompile_text, py::arg("text"), py::arg("lift") = true,
        py::arg("assert_measure") = false, "Supercompile a program; returns the residual program text.");
  m.def("evaluate", &evaluate, py::arg("text"), py::arg("expr") = "", py::arg("fuel") = 1'000'000,
        "Evaluate an expression against a program.");
  m.def("check", &check, py::arg("text"), py::arg("manifest") = "", py::arg("base_dir") = "",
        py::arg("fuel") = 1'000'000, "Supercompile and compare original and residual on the manifest samples.");
  m.def("embeds", [](const std::string& a, const std::string& b) {
    return scp::embeds(scp::parse_expression(a), scp::parse_expression(b));
  }, py::arg("e1"), py::arg("e2"), "Homeomorphic embedding e1 <| e2.");
  m.def("msg", &msg, py::arg("e1"), py::arg("e2"),
        "Most specific generalization: (common, theta1, theta2).");
  m.def("strict_vars", [](const std::string& e) {
    scp::NameSet s = scp::strict_vars(scp::parse_expression(e));
    return std::vector<std::string>(s.begin(), s.end());
  }, py::arg("expr"), "Strict free variables of an expression.");
}
