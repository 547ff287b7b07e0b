#include "scp/generalize.hpp"

#include <algorithm>
#include <optional>

namespace scp {

// ---------------------------------------------------------------------------
// Uniform terms

std::size_t UniformTerm::size() const {
  std::size_t n = 1;
  for (const auto& c : children) n += c.size();
  return n;
}

std::string UniformTerm::to_string() const {
  std::string head;
  switch (kind) {
    case Kind::Fun:
    case Kind::Ctor:
      head = name;
      break;
    case Kind::CaseOf:
      head = "caseof";
      break;
    case Kind::Let:
      head = "let";
      break;
    case Kind::Letrec:
      head = "letrec";
      break;
    case Kind::PrimOp:
      head = "primop";
      break;
    case Kind::Lambda:
      head = "lambda";
      break;
    case Kind::Apply:
      head = "apply";
      break;
    case Kind::VarAtom:
      return "var";
    case Kind::IntAtom:
      return "int";
  }
  if (children.empty()) return head;
  std::string s = head + "(";
  for (std::size_t i = 0; i < children.size(); ++i) {
    if (i > 0) s += ", ";
    s += children[i].to_string();
  }
  return s + ")";
}

UniformTerm to_uniform(const ExprPtr& e) {
  using K = UniformTerm::Kind;
  return std::visit(
      [&](const auto& n) -> UniformTerm {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, IntLit>) {
          return {K::IntAtom, {}, {}};
        } else if constexpr (std::is_same_v<T, Var>) {
          return {K::VarAtom, {}, {}};
        } else if constexpr (std::is_same_v<T, Global>) {
          return {K::Fun, n.name, {}};
        } else if constexpr (std::is_same_v<T, App>) {
          Spine sp = spine_of(e);
          UniformTerm t{K::Apply, {}, {}};
          t.children.push_back(to_uniform(sp.head));
          for (const auto& a : sp.args) t.children.push_back(to_uniform(a));
          return t;
        } else if constexpr (std::is_same_v<T, Lambda>) {
          return {K::Lambda, {}, {to_uniform(n.body)}};
        } else if constexpr (std::is_same_v<T, CtorApp>) {
          UniformTerm t{K::Ctor, n.ctor, {}};
          for (const auto& a : n.args) t.children.push_back(to_uniform(a));
          return t;
        } else if constexpr (std::is_same_v<T, PrimOp>) {
          return {K::PrimOp, {}, {to_uniform(n.lhs), to_uniform(n.rhs)}};
        } else if constexpr (std::is_same_v<T, Case>) {
          UniformTerm t{K::CaseOf, {}, {to_uniform(n.scrutinee)}};
          for (const auto& alt : n.alts) t.children.push_back(to_uniform(alt.body));
          return t;
        } else if constexpr (std::is_same_v<T, Let>) {
          return {K::Let, {}, {to_uniform(n.bound), to_uniform(n.body)}};
        } else if constexpr (std::is_same_v<T, Letrec>) {
          return {K::Letrec, {}, {to_uniform(n.rhs), to_uniform(n.body)}};
        } else {
          return to_uniform(n.term);
        }
      },
      e->node());
}

namespace {

// Post-order flattening: children always precede their parent.
struct Flat {
  std::vector<const UniformTerm*> nodes;
  std::vector<std::vector<std::size_t>> kids;

  std::size_t add(const UniformTerm& t) {
    std::vector<std::size_t> ks;
    ks.reserve(t.children.size());
    for (const auto& c : t.children) ks.push_back(add(c));
    nodes.push_back(&t);
    kids.push_back(std::move(ks));
    return nodes.size() - 1;
  }
};

}  // namespace

bool embeds(const UniformTerm& e, const UniformTerm& f) {
  using K = UniformTerm::Kind;
  Flat fe;
  Flat ff;
  std::size_t re = fe.add(e);
  std::size_t rf = ff.add(f);
  const std::size_t m = ff.nodes.size();
  std::vector<char> table(fe.nodes.size() * m, 0);
  auto at = [&](std::size_t i, std::size_t j) -> char& { return table[i * m + j]; };
  for (std::size_t i = 0; i < fe.nodes.size(); ++i) {
    const UniformTerm& a = *fe.nodes[i];
    for (std::size_t j = 0; j < m; ++j) {
      const UniformTerm& b = *ff.nodes[j];
      bool ok = false;
      if ((a.kind == K::VarAtom && b.kind == K::VarAtom) ||
          (a.kind == K::IntAtom && b.kind == K::IntAtom)) {
        ok = true;
      }
      if (!ok) {
        for (std::size_t c : ff.kids[j])
          if (at(i, c) != 0) {
            ok = true;
            break;
          }
      }
      if (!ok && a.kind != K::VarAtom && a.kind != K::IntAtom && a.same_symbol(b)) {
        ok = true;
        for (std::size_t k = 0; k < fe.kids[i].size() && ok; ++k)
          ok = at(fe.kids[i][k], ff.kids[j][k]) != 0;
      }
      at(i, j) = ok ? 1 : 0;
    }
  }
  return at(re, rf) != 0;
}

bool embeds(const ExprPtr& e, const ExprPtr& f) { return embeds(to_uniform(e), to_uniform(f)); }

Substitution to_substitution(const Bindings& b) {
  Substitution s;
  for (const auto& [x, e] : b) s.emplace(x, e);
  return s;
}

// ---------------------------------------------------------------------------
// msg

namespace {

using Env = std::vector<std::pair<std::string, std::string>>;

std::ptrdiff_t find_left(const Env& env, const std::string& x) {
  for (auto i = static_cast<std::ptrdiff_t>(env.size()) - 1; i >= 0; --i)
    if (env[static_cast<std::size_t>(i)].first == x) return i;
  return -1;
}
std::ptrdiff_t find_right(const Env& env, const std::string& x) {
  for (auto i = static_cast<std::ptrdiff_t>(env.size()) - 1; i >= 0; --i)
    if (env[static_cast<std::size_t>(i)].second == x) return i;
  return -1;
}

class AntiUnifier {
 public:
  AntiUnifier(NameSupply& supply, Generalization& out) : supply_(supply), out_(out) {}

  std::optional<ExprPtr> run(const ExprPtr& a, const ExprPtr& b) {
    std::size_t mark = out_.theta1.size();
    if (auto r = structural(a, b)) return r;
    out_.theta1.resize(mark);
    out_.theta2.resize(mark);
    return generalize(a, b);
  }

 private:
  NameSupply& supply_;
  Generalization& out_;
  Env vars_;
  Env funs_;

  bool mentions_bound(const ExprPtr& a, const ExprPtr& b) const {
    for (const auto& [l, r] : vars_)
      if (a->free_vars().count(l) != 0U || b->free_vars().count(r) != 0U) return true;
    if (!funs_.empty()) {
      NameSet fa = fun_names(a);
      NameSet fb = fun_names(b);
      for (const auto& [l, r] : funs_)
        if (fa.count(l) != 0U || fb.count(r) != 0U) return true;
    }
    return false;
  }

  std::optional<ExprPtr> generalize(const ExprPtr& a, const ExprPtr& b) {
    if (mentions_bound(a, b)) return std::nullopt;
    for (std::size_t i = 0; i < out_.theta1.size(); ++i) {
      if (alpha_eq(out_.theta1[i].second, a) && alpha_eq(out_.theta2[i].second, b))
        return mk::var(out_.theta1[i].first, true);
    }
    std::string hint = "x";
    if (const auto* v = a->as<Var>()) hint = v->name;
    std::string x = supply_.fresh_name(hint);
    out_.theta1.emplace_back(x, a);
    out_.theta2.emplace_back(x, b);
    return mk::var(x, true);
  }

  template <typename F>
  std::optional<ExprPtr> under(Env& env, const std::vector<std::string>& ls,
                               const std::vector<std::string>& rs, F&& body) {
    for (std::size_t i = 0; i < ls.size(); ++i) env.emplace_back(ls[i], rs[i]);
    auto r = body();
    env.resize(env.size() - ls.size());
    return r;
  }

  std::optional<ExprPtr> structural(const ExprPtr& a, const ExprPtr& b) {
    if (a->node().index() != b->node().index()) return std::nullopt;
    return std::visit(
        [&](const auto& x) -> std::optional<ExprPtr> {
          using T = std::decay_t<decltype(x)>;
          const auto& y = *b->as<T>();
          if constexpr (std::is_same_v<T, IntLit>) {
            if (x.value == y.value) return a;
            return std::nullopt;
          } else if constexpr (std::is_same_v<T, Var>) {
            auto ia = find_left(vars_, x.name);
            auto ib = find_right(vars_, y.name);
            if (ia >= 0 || ib >= 0) {
              if (ia == ib) return a;
              return std::nullopt;
            }
            if (x.name == y.name) return a;
            return std::nullopt;
          } else if constexpr (std::is_same_v<T, Global>) {
            auto ia = find_left(funs_, x.name);
            auto ib = find_right(funs_, y.name);
            if (ia >= 0 || ib >= 0) {
              if (ia == ib) return a;
              return std::nullopt;
            }
            if (x.name == y.name) return a;
            return std::nullopt;
          } else if constexpr (std::is_same_v<T, App>) {
            Spine sa = spine_of(a);
            Spine sb = spine_of(b);
            if (sa.args.size() != sb.args.size()) return std::nullopt;
            auto head = run(sa.head, sb.head);
            if (!head) return std::nullopt;
            std::vector<ExprPtr> args;
            for (std::size_t i = 0; i < sa.args.size(); ++i) {
              auto r = run(sa.args[i], sb.args[i]);
              if (!r) return std::nullopt;
              args.push_back(*r);
            }
            return mk::apps(*head, args);
          } else if constexpr (std::is_same_v<T, Lambda>) {
            auto body = under(vars_, {x.param}, {y.param}, [&] { return run(x.body, y.body); });
            if (!body) return std::nullopt;
            return mk::lambda(x.param, *body);
          } else if constexpr (std::is_same_v<T, CtorApp>) {
            if (x.ctor != y.ctor || x.args.size() != y.args.size()) return std::nullopt;
            std::vector<ExprPtr> args;
            for (std::size_t i = 0; i < x.args.size(); ++i) {
              auto r = run(x.args[i], y.args[i]);
              if (!r) return std::nullopt;
              args.push_back(*r);
            }
            return mk::ctor(x.ctor, std::move(args));
          } else if constexpr (std::is_same_v<T, PrimOp>) {
            if (x.op != y.op) return std::nullopt;
            auto l = run(x.lhs, y.lhs);
            if (!l) return std::nullopt;
            auto r = run(x.rhs, y.rhs);
            if (!r) return std::nullopt;
            return mk::prim(x.op, *l, *r);
          } else if constexpr (std::is_same_v<T, Case>) {
            if (x.alts.size() != y.alts.size()) return std::nullopt;
            for (std::size_t i = 0; i < x.alts.size(); ++i)
              if (!x.alts[i].pattern.same_shape(y.alts[i].pattern)) return std::nullopt;
            auto scrut = run(x.scrutinee, y.scrutinee);
            if (!scrut) return std::nullopt;
            std::vector<Alt> alts;
            for (std::size_t i = 0; i < x.alts.size(); ++i) {
              auto body = under(vars_, x.alts[i].pattern.vars, y.alts[i].pattern.vars,
                                [&] { return run(x.alts[i].body, y.alts[i].body); });
              if (!body) return std::nullopt;
              alts.push_back(Alt{x.alts[i].pattern, *body});
            }
            return mk::case_of(*scrut, std::move(alts));
          } else if constexpr (std::is_same_v<T, Let>) {
            auto bound = run(x.bound, y.bound);
            if (!bound) return std::nullopt;
            auto body = under(vars_, {x.binder}, {y.binder}, [&] { return run(x.body, y.body); });
            if (!body) return std::nullopt;
            return mk::let(x.binder, *bound, *body);
          } else if constexpr (std::is_same_v<T, Letrec>) {
            funs_.emplace_back(x.name, y.name);
            auto rhs = run(x.rhs, y.rhs);
            auto body = rhs ? run(x.body, y.body) : std::nullopt;
            funs_.pop_back();
            if (!rhs || !body) return std::nullopt;
            return mk::letrec(x.name, *rhs, *body);
          } else {
            if (x.owner != y.owner) return std::nullopt;
            auto t = run(x.term, y.term);
            if (!t) return std::nullopt;
            return mk::marker(x.owner, *t);
          }
        },
        a->node());
  }
};

}  // namespace

Generalization msg(const ExprPtr& e, const ExprPtr& f, NameSupply& supply) {
  Generalization g;
  AntiUnifier au(supply, g);
  // At the root nothing is bound, so generalization cannot fail.
  g.common = *au.run(e, f);
  return g;
}

// ---------------------------------------------------------------------------
// split

namespace {

class Extractor {
 public:
  explicit Extractor(NameSupply& supply) : supply_(supply) {}
  SplitResult result;

  ExprPtr hole(const ExprPtr& part) {
    std::string hint = "x";
    if (const auto* v = part->as<Var>()) hint = v->name;
    std::string x = supply_.fresh_name(hint);
    result.parts.push_back(part);
    result.holes.push_back(x);
    return mk::var(x, true);
  }

  ExprPtr run(const ExprPtr& t) {
    return std::visit(
        [&](const auto& n) -> ExprPtr {
          using T = std::decay_t<decltype(n)>;
          if constexpr (std::is_same_v<T, App>) {
            Spine sp = spine_of(t);
            ExprPtr head = sp.head->template is<Global>() ? sp.head : hole(sp.head);
            std::vector<ExprPtr> args;
            for (const auto& a : sp.args) args.push_back(hole(a));
            return mk::apps(head, args);
          } else if constexpr (std::is_same_v<T, Lambda>) {
            if (n.body->free_vars().count(n.param) != 0U) return t;
            return mk::lambda(n.param, hole(n.body));
          } else if constexpr (std::is_same_v<T, CtorApp>) {
            std::vector<ExprPtr> args;
            for (const auto& a : n.args) args.push_back(hole(a));
            return mk::ctor(n.ctor, std::move(args));
          } else if constexpr (std::is_same_v<T, PrimOp>) {
            ExprPtr l = hole(n.lhs);
            return mk::prim(n.op, l, hole(n.rhs));
          } else if constexpr (std::is_same_v<T, Case>) {
            ExprPtr scrut = hole(n.scrutinee);
            std::vector<Alt> alts;
            for (const auto& alt : n.alts) {
              bool binds = std::any_of(alt.pattern.vars.begin(), alt.pattern.vars.end(),
                                       [&](const std::string& x) {
                                         return alt.body->free_vars().count(x) != 0U;
                                       });
              alts.push_back(Alt{alt.pattern, binds ? alt.body : hole(alt.body)});
            }
            return mk::case_of(scrut, std::move(alts));
          } else if constexpr (std::is_same_v<T, Let>) {
            ExprPtr bound = hole(n.bound);
            bool uses = n.body->free_vars().count(n.binder) != 0U;
            return mk::let(n.binder, bound, uses ? n.body : hole(n.body));
          } else if constexpr (std::is_same_v<T, Letrec>) {
            if (fun_names(n.body).count(n.name) != 0U) return t;
            return mk::letrec(n.name, n.rhs, hole(n.body));
          } else {
            return t;
          }
        },
        t->node());
  }

 private:
  NameSupply& supply_;
};

bool is_fresh_hole(const Generalization& g) {
  const auto* v = g.common->as<Var>();
  if (v == nullptr) return false;
  return std::any_of(g.theta1.begin(), g.theta1.end(),
                     [&](const auto& b) { return b.first == v->name; });
}

}  // namespace

SplitResult split(const ExprPtr& t1, const ExprPtr& t2, NameSupply& supply) {
  UniformTerm u1 = to_uniform(t1);
  UniformTerm u2 = to_uniform(t2);
  if (u1.same_symbol(u2)) {
    Generalization g = msg(t1, t2, supply);
    if (!is_fresh_hole(g)) {
      SplitResult r;
      r.common = g.common;
      for (const auto& [x, e] : g.theta1) {
        r.holes.push_back(x);
        r.parts.push_back(e);
      }
      return r;
    }
  }
  Extractor ex(supply);
  ExprPtr common = ex.run(t1);
  ex.result.common = common;
  return ex.result;
}

}  // namespace scp
