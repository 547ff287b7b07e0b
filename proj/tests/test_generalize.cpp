#include "support.hpp"

#include "scp/generalize.hpp"

#include <doctest.h>


using namespace scp;
using scp::testing::expr;

namespace {

using K = UniformTerm::Kind;
using scp::testing::deletions;
using scp::testing::sym;
using scp::testing::terms_of_size;

UniformTerm random_term(scp::testing::Rng& rng, int depth) {
  if (depth == 0 || rng.chance(25)) return sym(rng.chance(50) ? "a" : "b");
  if (rng.chance(50)) return sym("f", {random_term(rng, depth - 1)});
  return sym("g", {random_term(rng, depth - 1), random_term(rng, depth - 1)});
}

bool same_head(const ExprPtr& a, const ExprPtr& b) {
  if (const auto* c = a->as<CtorApp>()) {
    const auto* d = b->as<CtorApp>();
    return d != nullptr && c->ctor == d->ctor && c->args.size() == d->args.size();
  }
  if (a->is<App>() && b->is<App>()) {
    Spine sa = spine_of(a);
    Spine sb = spine_of(b);
    const auto* ga = sa.head->as<Global>();
    const auto* gb = sb.head->as<Global>();
    return ga != nullptr && gb != nullptr && ga->name == gb->name && sa.args.size() == sb.args.size();
  }
  return false;
}

}  // namespace

TEST_CASE("uniform encoding") {
  CHECK(to_uniform(expr("x")).kind == K::VarAtom);
  CHECK(to_uniform(expr("fac (y - 1)", {"fac"})).to_string() == "apply(fac, primop(var, int))");
  CHECK(to_uniform(expr("case x of { 0 -> 1 }")).to_string() == "caseof(var, int)");
  CHECK(to_uniform(expr("\\x -> x")).to_string() == "lambda(var)");
}

TEST_CASE("embedding examples") {
  NameSet g{"fac"};
  CHECK(embeds(expr("e"), expr("Just e")));
  CHECK(embeds(expr("Right e"), expr("Right (Pair e e2)")));
  CHECK(embeds(expr("fac y", g), expr("fac (y - 1)", g)));
  CHECK_FALSE(embeds(expr("fac (y - 1)", g), expr("fac y", g)));
  CHECK(embeds(expr("x"), expr("y")));
  CHECK(embeds(expr("1"), expr("7")));
  CHECK_FALSE(embeds(expr("Just x"), expr("Right x")));
  CHECK_FALSE(embeds(expr("f x", {"f"}), expr("g x", {"g"})));
}

TEST_CASE("embedding agrees with exhaustive deletion on all small terms") {
  std::vector<UniformTerm> all;
  for (int n = 1; n <= 7; ++n)
    for (const auto& t : terms_of_size(n)) all.push_back(t);
  REQUIRE(all.size() == 89);
  std::size_t positive = 0;
  for (const auto& f : all) {
    std::set<std::string> below = deletions(f);
    for (const auto& e : all) {
      bool expected = below.count(e.to_string()) != 0U;
      positive += expected ? 1 : 0;
      if (embeds(e, f) != expected) {
        INFO(e.to_string() << " <| " << f.to_string());
        CHECK(embeds(e, f) == expected);
      }
    }
  }
  CHECK(positive > 89);
}

TEST_CASE("embedding is reflexive and transitive") {
  scp::testing::Rng rng(31);
  scp::testing::ExprGen gen(rng, {"x", "y"}, {"f", "g"});
  for (int i = 0; i < 2000; ++i) {
    ExprPtr a = gen.gen(3);
    CHECK(embeds(a, a));
    ExprPtr b = gen.mutate(a, 3);
    ExprPtr c = gen.mutate(b, 3);
    if (embeds(a, b) && embeds(b, c)) CHECK(embeds(a, c));
  }
}

TEST_CASE("long sequences over a finite alphabet contain an embedded pair") {
  scp::testing::Rng rng(37);
  for (int round = 0; round < 50; ++round) {
    std::vector<UniformTerm> seq;
    for (int i = 0; i < 200; ++i) seq.push_back(random_term(rng, 6));
    bool found = false;
    for (std::size_t j = 1; j < seq.size() && !found; ++j)
      for (std::size_t i = 0; i < j && !found; ++i) found = embeds(seq[i], seq[j]);
    CHECK(found);
  }
}

TEST_CASE("msg examples") {
  NameSupply s({"e", "e2", "y", "fac"});
  Generalization r = msg(expr("Right e"), expr("Right (Pair e e2)"), s);
  CHECK(alpha_eq(r.common, mk::ctor("Right", {mk::var(r.theta1.at(0).first)})));
  REQUIRE(r.theta1.size() == 1);
  CHECK(alpha_eq(r.theta1[0].second, expr("e")));
  CHECK(alpha_eq(r.theta2[0].second, expr("Pair e e2")));

  NameSet g{"fac"};
  Generalization f = msg(expr("fac y", g), expr("fac (y - 1)", g), s);
  REQUIRE(f.theta1.size() == 1);
  CHECK(f.common->free_vars() == NameSet{f.theta1[0].first});
  CHECK(alpha_eq(f.theta2[0].second, expr("y - 1")));
  const auto* hole = f.common->as<App>()->arg->as<Var>();
  REQUIRE(hole != nullptr);
  CHECK(hole->fresh);

  Generalization same = msg(expr("f x 1", {"f"}), expr("f x 1", {"f"}), s);
  CHECK(same.theta1.empty());
  CHECK(alpha_eq(same.common, expr("f x 1", {"f"})));
}

TEST_CASE("msg shares one variable for repeated mismatches") {
  NameSupply s({"a", "b", "c"});
  Generalization r = msg(expr("Pair a a"), expr("Pair b b"), s);
  CHECK(r.theta1.size() == 1);
  Generalization t = msg(expr("Pair a a"), expr("Pair b c"), s);
  CHECK(t.theta1.size() == 2);
}

TEST_CASE("split examples") {
  NameSet g{"append", "rev"};
  NameSupply s({"xs", "xs'", "x'"});
  // The shared argument stays: the result is more specific than abstracting both.
  SplitResult a = split(expr("append xs xs", g), expr("append xs' xs", g), s);
  REQUIRE(a.holes.size() == 1);
  CHECK(alpha_eq(a.common, mk::apps(mk::global("append"), {mk::var(a.holes[0]), mk::var("xs")})));
  CHECK(alpha_eq(a.parts[0], expr("xs")));

  SplitResult r = split(expr("rev xs' (x' : [])", g), expr("rev xs []", g), s);
  // Distinct variables are a mismatch too; the variable comes back as a part.
  REQUIRE(r.holes.size() == 2);
  CHECK(alpha_eq(r.common, mk::apps(mk::global("rev"), {mk::var(r.holes[0]), mk::var(r.holes[1])})));
  CHECK(alpha_eq(r.parts[0], expr("xs'")));
  CHECK(alpha_eq(r.parts[1], expr("[x']")));

  SplitResult k = split(expr("K a b"), expr("g c", {"g"}), s);
  REQUIRE(k.holes.size() == 2);
  CHECK(alpha_eq(k.common, mk::ctor("K", {mk::var(k.holes[0]), mk::var(k.holes[1])})));
  CHECK(alpha_eq(k.parts[0], expr("a")));
  CHECK(alpha_eq(k.parts[1], expr("b")));
}

TEST_CASE("msg and split reassemble their inputs") {
  scp::testing::Rng rng(41);
  scp::testing::ExprGen gen(rng, {"x", "y", "z"}, {"f", "g"});
  for (int i = 0; i < 10000; ++i) {
    ExprPtr a = gen.gen(4);
    ExprPtr b = rng.chance(70) ? gen.mutate(a, 3) : gen.gen(4);
    NameSet names;
    collect_var_names(a, names);
    collect_var_names(b, names);
    NameSupply supply(names);
    INFO(pretty(a));
    INFO(pretty(b));

    Generalization m = msg(a, b, supply);
    CHECK(alpha_eq(substitute(to_substitution(m.theta1), m.common), a));
    CHECK(alpha_eq(substitute(to_substitution(m.theta2), m.common), b));
    REQUIRE(m.theta1.size() == m.theta2.size());
    for (std::size_t j = 0; j < m.theta1.size(); ++j) CHECK(m.theta1[j].first == m.theta2[j].first);
    CHECK(weight(m.common, {}) >= 1);
    // With equal heads and no binders at the root the common part keeps
    // the head symbol. Binders and operators (collapsed to one primop
    // symbol) can force a whole-term variable.
    if (same_head(a, b)) {
      const auto* v = m.common->as<Var>();
      CHECK((v == nullptr || !v->fresh));
    }

    SplitResult sp = split(a, b, supply);
    REQUIRE(sp.holes.size() == sp.parts.size());
    Substitution back;
    for (std::size_t j = 0; j < sp.holes.size(); ++j) back[sp.holes[j]] = sp.parts[j];
    CHECK(alpha_eq(substitute(back, sp.common), a));
  }
}

TEST_CASE("split is deterministic") {
  NameSet g{"append"};
  NameSupply s1({"xs", "ys"});
  NameSupply s2({"xs", "ys"});
  SplitResult a = split(expr("append (append xs ys) xs", g), expr("append xs ys", g), s1);
  SplitResult b = split(expr("append (append xs ys) xs", g), expr("append xs ys", g), s2);
  CHECK(a.holes == b.holes);
  CHECK(pretty(a.common) == pretty(b.common));
}
