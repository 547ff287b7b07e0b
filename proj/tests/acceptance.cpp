// Runs every acceptance criterion and prints one PASS/FAIL line for each.
// Exit status is nonzero when any criterion fails.

#include "support.hpp"

#include "scp/check.hpp"
#include "scp/driver.hpp"
#include "scp/generalize.hpp"

#include <chrono>
#include <iostream>
#include <sstream>

using namespace scp;
namespace t = scp::testing;

namespace {

struct Outcome {
  bool pass = true;
  std::vector<std::string> notes;

  void fail(const std::string& why) {
    pass = false;
    notes.push_back(why);
  }
};

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

std::string int_list(int n, int offset) {
  std::string s = "[";
  for (int i = 0; i < n; ++i) s += (i ? ", " : "") + std::to_string(i + offset);
  return s + "]";
}

std::string tree(int depth, int& next) {
  if (depth == 0) return "Leaf " + std::to_string(next++);
  std::string l = tree(depth - 1, next);
  std::string r = tree(depth - 1, next);
  return "Branch (" + l + ") (" + r + ")";
}

std::uint64_t tree_allocs(const EvalOutcome& o) {
  std::uint64_t n = 0;
  for (const char* k : {"Leaf", "Branch"}) {
    auto it = o.stats.allocs_by_ctor.find(k);
    if (it != o.stats.allocs_by_ctor.end()) n += it->second;
  }
  return n;
}

Outcome goldens() {
  Outcome out;
  for (const auto& name : t::kFixtures) {
    t::Fixture f = t::load_fixture(name);
    if (!f.golden) continue;
    auto start = std::chrono::steady_clock::now();
    Program r = supercompile(f.program);
    double secs = seconds_since(start);
    if (secs > 1.0) out.fail(name + ": driving took " + std::to_string(secs) + " s");
    if (!alpha_eq(r, *f.golden)) out.fail(name + ": residual differs from golden");
  }
  return out;
}

Outcome allocation_ratios() {
  Outcome out;
  {
    t::Fixture f = t::load_fixture("double_append");
    Program r = supercompile(f.program);
    std::string entry = "main " + int_list(1000, 0) + " " + int_list(1000, 1000) + " " + int_list(1000, 2000);
    SampleReport s = check_sample(f.program, r, entry, 10'000'000);
    if (s.match != OutcomeMatch::BothValueEqual) {
      out.fail("double append: outcome " + std::string(match_name(s.match)));
    } else {
      double ratio = static_cast<double>(s.residual.stats.allocs) / static_cast<double>(s.original.stats.allocs);
      std::ostringstream note;
      note << "double append allocs " << s.original.stats.allocs << " -> " << s.residual.stats.allocs
           << " ratio " << ratio;
      out.notes.push_back(note.str());
      if (std::abs(ratio - 2.0 / 3.0) > 0.01 * (2.0 / 3.0)) out.fail("double append ratio out of tolerance");
    }
  }
  {
    t::Fixture f = t::load_fixture("flip_tree");
    Program r = supercompile(f.program);
    int next = 1;
    std::string entry = "main (" + tree(8, next) + ")";
    SampleReport s = check_sample(bind_externs(f.program, f.manifest), bind_externs(r, f.manifest), entry,
                                  10'000'000);
    if (s.match != OutcomeMatch::BothValueEqual) {
      out.fail("flip tree: outcome " + std::string(match_name(s.match)));
    } else {
      std::uint64_t o = tree_allocs(s.original);
      std::uint64_t n = tree_allocs(s.residual);
      out.notes.push_back("flip tree node allocs " + std::to_string(o) + " -> " + std::to_string(n));
      if (n != 0) out.fail("flip tree residual allocates tree nodes");
      if (o < 2 * ((1U << 8U) - 1)) out.fail("flip tree original allocates fewer nodes than expected");
    }
  }
  return out;
}

Outcome preservation() {
  Outcome out;
  std::size_t samples = 0;
  for (const auto& name : t::kFixtures) {
    t::Fixture f = t::load_fixture(name);
    CheckReport r = check_program(f.program, f.manifest, {});
    for (const auto& s : r.samples) {
      ++samples;
      if (s.match == OutcomeMatch::Mismatch) out.fail(name + ": " + s.entry + " MISMATCH");
    }
  }
  t::Rng rng(1009);
  t::ProgramGen gen(rng);
  for (int i = 0; i < 500; ++i) {
    auto g = gen.generate(rng.chance(5));
    Program r = supercompile(g.program);
    for (const auto& e : g.entries) {
      ++samples;
      SampleReport s = check_sample(g.program, r, e, 1'000'000);
      if (s.match == OutcomeMatch::Mismatch) out.fail("generated #" + std::to_string(i) + ": " + e + " MISMATCH");
    }
  }
  out.notes.push_back(std::to_string(samples) + " samples over 500 generated programs and the fixtures");
  return out;
}

Outcome no_accidental_termination() {
  Outcome out;
  Program p = t::program("loop n = loop n;\nmain = (\\x -> 42) (loop 1);\n");
  Program r = supercompile(p);
  for (std::uint64_t fuel : {1'000ULL, 10'000ULL, 100'000ULL, 1'000'000ULL}) {
    SampleReport s = check_sample(p, r, "main", fuel);
    if (s.original.kind != EvalOutcome::Kind::OutOfFuel || s.residual.kind != EvalOutcome::Kind::OutOfFuel)
      out.fail("fuel " + std::to_string(fuel) + ": " + outcome_name(s.original.kind) + " / " +
               outcome_name(s.residual.kind));
  }
  return out;
}

Outcome improvement() {
  Outcome out;
  std::size_t compared = 0;
  for (const auto& name : t::kFixtures) {
    t::Fixture f = t::load_fixture(name);
    CheckReport r = check_program(f.program, f.manifest, {});
    for (const auto& s : r.samples) {
      if (!s.original.is_value() || !s.residual.is_value()) continue;
      ++compared;
      if (!s.improved)
        out.fail(name + ": " + s.entry + " calls " + std::to_string(s.original.stats.calls) + " -> " +
                 std::to_string(s.residual.stats.calls));
    }
  }
  out.notes.push_back(std::to_string(compared) + " samples compared");
  return out;
}

Outcome measure() {
  Outcome out;
  for (const auto& name : t::kFixtures) {
    t::Fixture f = t::load_fixture(name);
    DriveOptions o;
    o.assert_measure = true;
    DriveReport rep;
    try {
      Program r = supercompile(f.program, o, &rep);
    } catch (const DriverError& e) {
      out.fail(name + ": " + e.what());
      continue;
    }
    for (const auto& v : rep.measure_violations) out.fail(name + ": measure " + v);
    for (const auto& v : rep.memo_violations) out.fail(name + ": memo " + v);
  }
  return out;
}

Outcome machinery() {
  Outcome out;
  auto start = std::chrono::steady_clock::now();
  std::vector<UniformTerm> all;
  for (int n = 1; n <= 7; ++n)
    for (const auto& u : t::terms_of_size(n)) all.push_back(u);
  std::size_t disagreements = 0;
  for (const auto& f : all) {
    std::set<std::string> below = t::deletions(f);
    for (const auto& e : all)
      if (embeds(e, f) != (below.count(e.to_string()) != 0U)) ++disagreements;
  }
  double secs = seconds_since(start);
  out.notes.push_back("embedding oracle: " + std::to_string(all.size() * all.size()) + " pairs in " +
                      std::to_string(secs) + " s");
  if (disagreements != 0) out.fail(std::to_string(disagreements) + " embedding disagreements");
  if (secs > 60) out.fail("embedding oracle too slow");

  t::Rng rng(1013);
  t::ExprGen gen(rng, {"x", "y", "z"}, {"f", "g"});
  std::size_t broken = 0;
  for (int i = 0; i < 10000; ++i) {
    ExprPtr a = gen.gen(4);
    ExprPtr b = rng.chance(70) ? gen.mutate(a, 3) : gen.gen(4);
    NameSet names;
    collect_var_names(a, names);
    collect_var_names(b, names);
    NameSupply supply(names);
    Generalization m = msg(a, b, supply);
    bool ok = alpha_eq(substitute(to_substitution(m.theta1), m.common), a) &&
              alpha_eq(substitute(to_substitution(m.theta2), m.common), b);
    SplitResult sp = split(a, b, supply);
    Substitution back;
    for (std::size_t j = 0; j < sp.holes.size(); ++j) back[sp.holes[j]] = sp.parts[j];
    ok = ok && alpha_eq(substitute(back, sp.common), a);
    if (!ok) ++broken;
  }
  if (broken != 0) out.fail(std::to_string(broken) + " msg/split reassembly failures");

  // The three rows of the generalization table.
  struct Row {
    const char* small;
    const char* big;
    const char* common;  // with hole x
    const char* theta1;
    const char* theta2;
  };
  NameSet g{"fac"};
  for (const Row& row : {Row{"e", "Just e", "x", "e", "Just e"},
                         Row{"Right e", "Right (Pair e e2)", "Right x", "e", "Pair e e2"},
                         Row{"fac y", "fac (y - 1)", "fac x", "y", "y - 1"}}) {
    ExprPtr a = parse_expression(row.small, g);
    ExprPtr b = parse_expression(row.big, g);
    if (!embeds(a, b)) out.fail(std::string(row.small) + " does not embed in " + row.big);
    NameSupply supply({"e", "e2", "y", "x"});
    Generalization m = msg(a, b, supply);
    bool shape = m.theta1.size() == 1 &&
                 alpha_eq(substitute({{m.theta1[0].first, mk::var("x")}}, m.common),
                          parse_expression(row.common, g)) &&
                 alpha_eq(m.theta1[0].second, parse_expression(row.theta1, g)) &&
                 alpha_eq(m.theta2[0].second, parse_expression(row.theta2, g));
    if (!shape) out.fail(std::string("msg(") + row.small + ", " + row.big + ") = " + pretty(m.common));
  }
  return out;
}

Outcome strictness() {
  Outcome out;
  t::StrictnessProbe probe;
  for (const auto& name : t::kFixtures) {
    t::Fixture f = t::load_fixture(name);
    t::probe_strictness(bind_externs(f.program, f.manifest), probe);
  }
  out.notes.push_back(std::to_string(probe.checked) + " strict variables checked, " +
                      std::to_string(probe.skipped) + " definitions without a closing input");
  for (const auto& c : probe.counterexamples) out.fail(c);
  return out;
}

}  // namespace

int main() {
  struct Criterion {
    const char* name;
    Outcome (*run)();
  };
  const Criterion criteria[] = {
      {"1 golden residuals", goldens},
      {"2 allocation ratios", allocation_ratios},
      {"3 semantic preservation", preservation},
      {"4 no accidental termination", no_accidental_termination},
      {"5 improvement", improvement},
      {"6 termination measure and memo invariant", measure},
      {"7 machinery oracles", machinery},
      {"8 strictness soundness", strictness},
  };
  int failed = 0;
  for (const auto& c : criteria) {
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o.fail(std::string("exception: ") + e.what());
    }
    std::cout << (o.pass ? "PASS" : "FAIL") << "  " << c.name << "\n";
    for (const auto& n : o.notes) std::cout << "      " << n << "\n";
    if (!o.pass) ++failed;
  }
  std::cout << failed << " of " << std::size(criteria) << " criteria failed\n";
  return failed == 0 ? 0 : 1;
}
