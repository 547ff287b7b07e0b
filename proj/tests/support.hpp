#pragma once

// Shared test helpers: parsing shortcuts, fixtures, random generators for
// expressions and well-typed programs, and independent oracles.

#include "scp/analysis.hpp"
#include "scp/check.hpp"
#include "scp/generalize.hpp"
#include "scp/parser.hpp"
#include "scp/semantics.hpp"
#include "scp/syntax.hpp"

#include <algorithm>
#include <deque>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <random>
#include <string>
#include <vector>

namespace scp::testing {

inline ExprPtr expr(const std::string& text, const NameSet& globals = {}) {
  return parse_expression(text, globals);
}

inline Program program(const std::string& text) { return parse_program(text); }

inline std::string fixture_path(const std::string& name) {
#ifdef SCP_FIXTURES
  return std::string(SCP_FIXTURES) + "/" + name;
#else
  return "fixtures/" + name;
#endif
}

inline const std::vector<std::string> kFixtures{
    "double_append", "fac",          "sum_map_square", "mapsq_mapsq", "sum_f_mutual", "vecdot",
    "flip_tree",     "sum_squares_tree", "append_xs_xs", "rev_acc",   "loop"};

struct Fixture {
  std::string name;
  Program program;
  Manifest manifest;
  std::optional<Program> golden;
};

inline Fixture load_fixture(const std::string& name) {
  Fixture f;
  f.name = name;
  f.program = parse_program(read_file(fixture_path(name + ".core")));
  f.manifest = load_manifest(fixture_path(name + ".manifest"));
  if (!f.manifest.golden.empty()) f.golden = parse_program(read_file(f.manifest.golden));
  return f;
}

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  int below(int n) { return std::uniform_int_distribution<int>(0, n - 1)(gen_); }
  int range(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(gen_); }
  bool chance(int percent) { return below(100) < percent; }
  template <typename T>
  const T& pick(const std::vector<T>& v) {
    return v[static_cast<std::size_t>(below(static_cast<int>(v.size())))];
  }

 private:
  std::mt19937_64 gen_;
};

// Untyped expressions over the whole syntax, used for the machinery laws.
// Free variables come from `vars`, function symbols from `funs`.
class ExprGen {
 public:
  ExprGen(Rng& rng, std::vector<std::string> vars, std::vector<std::string> funs)
      : rng_(rng), vars_(std::move(vars)), funs_(std::move(funs)) {}

  ExprPtr gen(int depth) { return gen(depth, {}); }

  // A variant of `e` with a few subterms replaced.
  ExprPtr mutate(const ExprPtr& e, int depth) {
    if (rng_.chance(15)) return gen(depth);
    if (const auto* a = e->as<App>()) return mk::app(mutate(a->fun, depth), mutate(a->arg, depth));
    if (const auto* c = e->as<CtorApp>()) {
      std::vector<ExprPtr> args;
      for (const auto& x : c->args) args.push_back(mutate(x, depth));
      return mk::ctor(c->ctor, std::move(args));
    }
    if (const auto* p = e->as<PrimOp>()) return mk::prim(p->op, mutate(p->lhs, depth), mutate(p->rhs, depth));
    if (const auto* k = e->as<Case>()) {
      std::vector<Alt> alts;
      for (const auto& alt : k->alts) alts.push_back(Alt{alt.pattern, alt.body});
      return mk::case_of(mutate(k->scrutinee, depth), std::move(alts));
    }
    return e;
  }

 private:
  Rng& rng_;
  std::vector<std::string> vars_;
  std::vector<std::string> funs_;

  ExprPtr gen(int depth, std::vector<std::string> bound) {
    std::vector<std::string> scope = vars_;
    scope.insert(scope.end(), bound.begin(), bound.end());
    if (depth <= 0 || rng_.chance(20)) {
      switch (rng_.below(4)) {
        case 0:
          return mk::integer(rng_.range(0, 3));
        case 1:
          return mk::global(rng_.pick(funs_));
        default:
          return mk::var(rng_.pick(scope));
      }
    }
    switch (rng_.below(8)) {
      case 0:
      case 1: {
        ExprPtr f = rng_.chance(60) ? mk::global(rng_.pick(funs_)) : gen(depth - 1, bound);
        int n = rng_.range(1, 2);
        for (int i = 0; i < n; ++i) f = mk::app(f, gen(depth - 1, bound));
        return f;
      }
      case 2: {
        std::string x = "b" + std::to_string(rng_.below(3));
        bound.push_back(x);
        return mk::lambda(x, gen(depth - 1, bound));
      }
      case 3:
        if (rng_.chance(50)) return mk::nil();
        return mk::cons(gen(depth - 1, bound), gen(depth - 1, bound));
      case 4: {
        static const std::vector<Op> ops{Op::Add, Op::Sub, Op::Mul};
        return mk::prim(rng_.pick(ops), gen(depth - 1, bound), gen(depth - 1, bound));
      }
      case 5: {
        std::string x = "p" + std::to_string(rng_.below(3));
        std::string xs = "q" + std::to_string(rng_.below(3));
        ExprPtr scrut = gen(depth - 1, bound);
        ExprPtr nil = gen(depth - 1, bound);
        auto inner = bound;
        inner.push_back(x);
        inner.push_back(xs);
        return mk::case_of(scrut, {Alt{Pattern::constructor(kNilCtor, {}), nil},
                                   Alt{Pattern::constructor(kConsCtor, {x, xs}), gen(depth - 1, inner)}});
      }
      case 6: {
        std::string x = "l" + std::to_string(rng_.below(3));
        ExprPtr b = gen(depth - 1, bound);
        bound.push_back(x);
        return mk::let(x, b, gen(depth - 1, bound));
      }
      default:
        return mk::ctor("Pair", {gen(depth - 1, bound), gen(depth - 1, bound)});
    }
  }
};

// Well-typed, well-scoped programs over Int, [Int] and Int -> Int. Every
// recursive call passes a structurally smaller list as its first argument,
// so generated programs terminate unless `diverge` is set.
class ProgramGen {
 public:
  enum class Ty { Int, List, Fun };

  struct Sig {
    std::string name;
    std::vector<Ty> params;
    Ty result;
  };

  explicit ProgramGen(Rng& rng) : rng_(rng) {}

  struct Generated {
    Program program;
    std::vector<std::string> entries;  // closed sample calls of main
  };

  Generated generate(bool diverge = false) {
    sigs_.clear();
    int nfun = rng_.range(1, 4);
    for (int i = 0; i < nfun; ++i) {
      Sig s;
      s.name = "f" + std::to_string(i);
      s.params.push_back(Ty::List);
      int extra = rng_.below(3);
      for (int j = 0; j < extra; ++j) s.params.push_back(random_param_type());
      s.result = rng_.chance(50) ? Ty::Int : Ty::List;
      sigs_.push_back(s);
    }
    Generated out;
    for (int i = 0; i < nfun; ++i) {
      current_ = i;
      const Sig& s = sigs_[static_cast<std::size_t>(i)];
      Scope scope;
      std::vector<std::string> names;
      for (std::size_t j = 0; j < s.params.size(); ++j) {
        std::string x = param_name(s.params[j], j);
        names.push_back(x);
        scope.push_back(Binding{x, s.params[j], false, j == 0});
      }
      ExprPtr body = gen(s.result, 3, scope);
      out.program.defs.push_back(Definition{s.name, mk::lambdas(names, body)});
    }
    current_ = nfun;
    Scope scope{Binding{"xs", Ty::List, false}, Binding{"n", Ty::Int, false}};
    ExprPtr main = gen(rng_.chance(50) ? Ty::Int : Ty::List, 3, scope);
    if (diverge) {
      out.program.defs.push_back(Definition{"spin", mk::lambda("k", mk::app(mk::global("spin"), mk::var("k")))});
      main = mk::prim(Op::Add, mk::app(mk::global("spin"), mk::var("n")), mk::integer(0));
      if (rng_.chance(50)) main = mk::app(mk::lambda("u", mk::integer(1)), main);
    }
    out.program.defs.push_back(Definition{"main", mk::lambdas({"xs", "n"}, main)});
    for (int k = 0; k < 3; ++k) {
      std::string list = "[";
      int len = rng_.below(5);
      for (int i = 0; i < len; ++i) list += (i ? ", " : "") + std::to_string(rng_.range(0, 6));
      list += "]";
      out.entries.push_back("main " + list + " " + std::to_string(rng_.range(0, 4)));
    }
    return out;
  }

 private:
  struct Binding {
    std::string name;
    Ty ty;
    bool decreasing;  // may be passed as the first argument of a recursive call
    bool root = false;  // first parameter: its tails are decreasing
  };
  using Scope = std::vector<Binding>;

  Rng& rng_;
  std::vector<Sig> sigs_;
  int current_ = 0;
  int counter_ = 0;

  // Calls from main never recurse; f_i may call f_j freely only when j > i.
  bool recursive(std::size_t i) const {
    return current_ < static_cast<int>(sigs_.size()) && static_cast<int>(i) <= current_;
  }

  Ty random_param_type() {
    int r = rng_.below(10);
    return r < 5 ? Ty::Int : (r < 8 ? Ty::List : Ty::Fun);
  }

  static std::string param_name(Ty t, std::size_t j) {
    switch (t) {
      case Ty::Int:
        return "a" + std::to_string(j);
      case Ty::List:
        return "l" + std::to_string(j);
      case Ty::Fun:
        return "g" + std::to_string(j);
    }
    return "z";
  }

  // Reuses a small pool of names so that shadowing happens.
  std::string binder(const char* base) { return std::string(base) + std::to_string(rng_.below(3)); }

  static Scope bind(Scope scope, const std::string& x, Ty t, bool decreasing) {
    for (auto it = scope.begin(); it != scope.end();)
      it = it->name == x ? scope.erase(it) : it + 1;
    scope.push_back(Binding{x, t, decreasing, false});
    return scope;
  }

  std::vector<const Binding*> of_type(const Scope& scope, Ty t) {
    std::vector<const Binding*> out;
    for (const auto& b : scope)
      if (b.ty == t) out.push_back(&b);
    return out;
  }

  ExprPtr leaf(Ty t, const Scope& scope) {
    auto vs = of_type(scope, t);
    if (!vs.empty() && rng_.chance(70)) return mk::var(rng_.pick(vs)->name);
    switch (t) {
      case Ty::Int:
        return rng_.chance(15) ? mk::integer(-rng_.range(1, 3)) : mk::integer(rng_.range(0, 5));
      case Ty::List:
        return rng_.chance(70) ? mk::nil() : mk::cons(mk::integer(rng_.range(0, 5)), mk::nil());
      case Ty::Fun: {
        std::string v = binder("v");
        return mk::lambda(v, mk::prim(Op::Add, mk::var(v), mk::integer(rng_.range(0, 3))));
      }
    }
    return mk::integer(0);
  }

  ExprPtr call(Ty result, int depth, const Scope& scope) {
    std::vector<std::size_t> candidates;
    std::vector<const Binding*> dec;
    for (const auto& b : scope)
      if (b.decreasing && b.ty == Ty::List) dec.push_back(&b);
    for (std::size_t i = 0; i < sigs_.size(); ++i) {
      if (sigs_[i].result != result) continue;
      if (!recursive(i) || !dec.empty()) candidates.push_back(i);
    }
    if (candidates.empty()) return nullptr;
    std::size_t i = rng_.pick(candidates);
    const Sig& s = sigs_[i];
    std::vector<ExprPtr> args;
    for (std::size_t j = 0; j < s.params.size(); ++j) {
      if (j == 0 && recursive(i))
        args.push_back(mk::var(rng_.pick(dec)->name));
      else
        args.push_back(gen(s.params[j], depth - 1, scope));
    }
    return mk::apps(mk::global(s.name), args);
  }

  ExprPtr gen(Ty t, int depth, const Scope& scope) {
    if (depth <= 0 || rng_.chance(15)) return leaf(t, scope);
    int choice = rng_.below(t == Ty::Fun ? 2 : 9);
    if (t == Ty::Fun) {
      if (choice == 0) return leaf(t, scope);
      std::string v = binder("v");
      return mk::lambda(v, gen(Ty::Int, depth - 1, bind(scope, v, Ty::Int, false)));
    }
    switch (choice) {
      case 0:
        if (t == Ty::Int) {
          static const std::vector<Op> ops{Op::Add, Op::Sub, Op::Mul};
          return mk::prim(rng_.pick(ops), gen(Ty::Int, depth - 1, scope), gen(Ty::Int, depth - 1, scope));
        }
        return mk::cons(gen(Ty::Int, depth - 1, scope), gen(Ty::List, depth - 1, scope));
      case 1:
      case 2:
        if (ExprPtr c = call(t, depth, scope)) return c;
        return leaf(t, scope);
      case 3: {
        // case over a list
        auto lists = of_type(scope, Ty::List);
        ExprPtr scrut;
        bool dec = false;
        if (!lists.empty() && rng_.chance(75)) {
          const Binding* b = rng_.pick(lists);
          scrut = mk::var(b->name);
          dec = b->decreasing || b->root;
        } else {
          scrut = gen(Ty::List, depth - 1, scope);
        }
        std::string x = binder("y");
        std::string xs = binder("ys");
        if (x == xs) xs += "s";
        ExprPtr nil = gen(t, depth - 1, scope);
        Scope inner = bind(bind(scope, x, Ty::Int, false), xs, Ty::List, dec);
        ExprPtr cons = gen(t, depth - 1, inner);
        if (rng_.chance(20))
          return mk::case_of(scrut, {Alt{Pattern::constructor(kConsCtor, {x, xs}), cons},
                                     Alt{Pattern::wildcard(), nil}});
        return mk::case_of(scrut, {Alt{Pattern::constructor(kNilCtor, {}), nil},
                                   Alt{Pattern::constructor(kConsCtor, {x, xs}), cons}});
      }
      case 4: {
        // case over an integer
        ExprPtr scrut = gen(Ty::Int, depth - 1, scope);
        std::vector<Alt> alts;
        int n = rng_.range(1, 2);
        std::vector<int> used;
        for (int i = 0; i < n; ++i) {
          int v = rng_.range(0, 3);
          if (std::find(used.begin(), used.end(), v) != used.end()) continue;
          used.push_back(v);
          alts.push_back(Alt{Pattern::integer(v), gen(t, depth - 1, scope)});
        }
        alts.push_back(Alt{Pattern::wildcard(), gen(t, depth - 1, scope)});
        return mk::case_of(scrut, std::move(alts));
      }
      case 5: {
        Ty bt = rng_.chance(60) ? Ty::Int : (rng_.chance(70) ? Ty::List : Ty::Fun);
        std::string x = binder(bt == Ty::Int ? "k" : (bt == Ty::List ? "m" : "g"));
        ExprPtr b = gen(bt, depth - 1, scope);
        return mk::let(x, b, gen(t, depth - 1, bind(scope, x, bt, false)));
      }
      case 6: {
        // (\x -> body) arg
        Ty bt = rng_.chance(70) ? Ty::Int : Ty::List;
        std::string x = binder(bt == Ty::Int ? "k" : "m");
        ExprPtr body = gen(t, depth - 1, bind(scope, x, bt, false));
        return mk::app(mk::lambda(x, body), gen(bt, depth - 1, scope));
      }
      case 7: {
        if (t == Ty::Int) {
          auto funs = of_type(scope, Ty::Fun);
          ExprPtr f = !funs.empty() && rng_.chance(70) ? mk::var(rng_.pick(funs)->name)
                                                        : gen(Ty::Fun, depth - 1, scope);
          return mk::app(f, gen(Ty::Int, depth - 1, scope));
        }
        return leaf(t, scope);
      }
      default: {
        // local letrec over a list, recursing on the tail
        std::string g = "r" + std::to_string(counter_++);
        std::string p = "w";
        std::string x = "wy";
        std::string xs = "wys";
        Scope inner{Binding{x, Ty::Int, false}, Binding{xs, Ty::List, false}};
        ExprPtr rec = mk::app(mk::global(g), mk::var(xs));
        ExprPtr cons;
        if (t == Ty::Int)
          cons = mk::prim(Op::Add, mk::var(x), rec);
        else
          cons = mk::cons(mk::prim(Op::Mul, mk::var(x), mk::integer(2)), rec);
        ExprPtr nil = leaf(t, {});
        ExprPtr rhs = mk::lambda(p, mk::case_of(mk::var(p), {Alt{Pattern::constructor(kNilCtor, {}), nil},
                                                              Alt{Pattern::constructor(kConsCtor, {x, xs}), cons}}));
        return mk::letrec(g, rhs, mk::app(mk::global(g), gen(Ty::List, depth - 1, scope)));
      }
    }
  }
};

// Embedding oracle over the alphabet {a/0, f/1, g/2}.
inline UniformTerm sym(const std::string& s, std::vector<UniformTerm> children = {}) {
  return UniformTerm{UniformTerm::Kind::Ctor, s, std::move(children)};
}

// All terms over {a/0, f/1, g/2} with exactly n symbols.
inline std::vector<UniformTerm> terms_of_size(int n) {
  static std::map<int, std::vector<UniformTerm>> memo;
  if (auto it = memo.find(n); it != memo.end()) return it->second;
  std::vector<UniformTerm> out;
  if (n == 1) out.push_back(sym("a"));
  if (n >= 2)
    for (const auto& t : terms_of_size(n - 1)) out.push_back(sym("f", {t}));
  for (int l = 1; l + 1 < n; ++l)
    for (const auto& a : terms_of_size(l))
      for (const auto& b : terms_of_size(n - 1 - l)) out.push_back(sym("g", {a, b}));
  memo[n] = out;
  return out;
}

// Every term reachable from t by repeatedly replacing some subterm by one
// of its children. e ⊴ t iff e is in this set.
inline std::set<std::string> deletions(const UniformTerm& t) {
  std::set<std::string> seen;
  std::deque<UniformTerm> queue{t};
  seen.insert(t.to_string());
  while (!queue.empty()) {
    UniformTerm cur = queue.front();
    queue.pop_front();
    std::vector<UniformTerm> next;
    // positions are visited by rebuilding along every path
    std::function<void(const UniformTerm&, const std::function<UniformTerm(UniformTerm)>&)> walk =
        [&](const UniformTerm& s, const std::function<UniformTerm(UniformTerm)>& rebuild) {
          for (const auto& c : s.children) next.push_back(rebuild(c));
          for (std::size_t i = 0; i < s.children.size(); ++i) {
            walk(s.children[i], [&, i](UniformTerm r) {
              UniformTerm copy = s;
              copy.children[i] = std::move(r);
              return rebuild(std::move(copy));
            });
          }
        };
    walk(cur, [](UniformTerm r) { return r; });
    for (auto& n : next)
      if (seen.insert(n.to_string()).second) queue.push_back(std::move(n));
  }
  return seen;
}

// Strictness probe. For each definition, find parameter values from a small
// pool under which the body evaluates to a value, then replace each strict
// parameter in turn by a divergent term: evaluation must run out of fuel.
struct StrictnessProbe {
  std::size_t checked = 0;
  std::size_t skipped = 0;  // definitions with no value-producing closure
  std::vector<std::string> counterexamples;
};

inline ExprPtr divergent_term() {
  static const ExprPtr d = parse_expression("letrec bottom n = bottom n in bottom 0", {});
  return d;
}

inline void probe_strictness(const Program& p, StrictnessProbe& out, std::uint64_t fuel = 20000) {
  static const std::vector<std::string> pool_text{
      "0", "2", "[]", "[1, 2]", "Leaf 1", "Branch (Leaf 1) (Leaf 2)", "\\v -> v", "\\a b -> a * b"};
  std::vector<ExprPtr> pool;
  for (const auto& t : pool_text) pool.push_back(parse_expression(t, {}));
  Globals globals = p.globals();
  for (const auto& d : p.defs) {
    LambdaView v = lambda_view(d.value);
    NameSet strict = strict_vars(v.body);
    std::vector<std::string> params;
    for (const auto& x : v.params)
      if (free_vars(v.body).count(x) != 0U) params.push_back(x);
    if (strict.empty()) continue;
    if (params.size() > 3 || !std::includes(NameSet(params.begin(), params.end()).begin(),
                                            NameSet(params.begin(), params.end()).end(),
                                            strict.begin(), strict.end())) {
      ++out.skipped;
      continue;
    }
    std::size_t combos = 1;
    for (std::size_t i = 0; i < params.size(); ++i) combos *= pool.size();
    bool found = false;
    for (std::size_t c = 0; c < combos && !found; ++c) {
      Substitution s;
      std::size_t k = c;
      for (const auto& x : params) {
        s[x] = pool[k % pool.size()];
        k /= pool.size();
      }
      if (!eval(substitute(s, v.body), globals, fuel).is_value()) continue;
      found = true;
      for (const auto& x : strict) {
        Substitution bad = s;
        bad[x] = divergent_term();
        ++out.checked;
        EvalOutcome o = eval(substitute(bad, v.body), globals, fuel);
        if (o.kind != EvalOutcome::Kind::OutOfFuel)
          out.counterexamples.push_back(d.name + ": " + x + " is not demanded");
      }
    }
    if (!found) ++out.skipped;
  }
}

}  // namespace scp::testing
