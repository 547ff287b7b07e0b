#include "scp/syntax.hpp"

#include <algorithm>
#include <deque>
#include <functional>

namespace scp {

const char* op_symbol(Op op) {
  switch (op) {
    case Op::Add:
      return "+";
    case Op::Sub:
      return "-";
    case Op::Mul:
      return "*";
  }
  return "?";
}

Integer apply_op(Op op, const Integer& lhs, const Integer& rhs) {
  switch (op) {
    case Op::Add:
      return lhs + rhs;
    case Op::Sub:
      return lhs - rhs;
    case Op::Mul:
      return lhs * rhs;
  }
  return 0;
}

// ---------------------------------------------------------------------------
// Patterns

Pattern Pattern::integer(Integer n) {
  Pattern p;
  p.kind = Kind::Int;
  p.value = std::move(n);
  return p;
}

Pattern Pattern::constructor(std::string k, std::vector<std::string> vars,
                             std::vector<bool> fresh) {
  Pattern p;
  p.kind = Kind::Ctor;
  p.ctor = std::move(k);
  p.vars = std::move(vars);
  p.fresh = std::move(fresh);
  return p;
}

Pattern Pattern::wildcard() { return Pattern{}; }

std::optional<ExprPtr> Pattern::as_expr() const {
  switch (kind) {
    case Kind::Int:
      return mk::integer(value);
    case Kind::Ctor: {
      std::vector<ExprPtr> args;
      for (std::size_t i = 0; i < vars.size(); ++i)
        args.push_back(mk::var(vars[i], var_fresh(i)));
      return mk::ctor(ctor, std::move(args));
    }
    case Kind::Default:
      break;
  }
  return std::nullopt;
}

bool Pattern::binds(const std::string& x) const {
  return std::find(vars.begin(), vars.end(), x) != vars.end();
}

bool Pattern::same_shape(const Pattern& other) const {
  if (kind != other.kind) return false;
  switch (kind) {
    case Kind::Int:
      return value == other.value;
    case Kind::Ctor:
      return ctor == other.ctor && vars.size() == other.vars.size();
    case Kind::Default:
      return true;
  }
  return false;
}

// ---------------------------------------------------------------------------
// Expr

namespace {

void add_all(NameSet& into, const NameSet& from) {
  into.insert(from.begin(), from.end());
}

void add_except(NameSet& into, const NameSet& from,
                const std::vector<std::string>& bound) {
  for (const auto& x : from)
    if (std::find(bound.begin(), bound.end(), x) == bound.end()) into.insert(x);
}

}  // namespace

Expr::Expr(Node node) : node_(std::move(node)) {
  std::visit(
      [this](const auto& n) {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, IntLit>) {
          value_ = true;
        } else if constexpr (std::is_same_v<T, Var>) {
          fv_.insert(n.name);
        } else if constexpr (std::is_same_v<T, App>) {
          add_all(fv_, n.fun->free_vars());
          add_all(fv_, n.arg->free_vars());
        } else if constexpr (std::is_same_v<T, Lambda>) {
          value_ = true;
          add_except(fv_, n.body->free_vars(), {n.param});
        } else if constexpr (std::is_same_v<T, CtorApp>) {
          value_ = true;
          for (const auto& a : n.args) {
            value_ = value_ && a->is_value();
            add_all(fv_, a->free_vars());
          }
        } else if constexpr (std::is_same_v<T, PrimOp>) {
          add_all(fv_, n.lhs->free_vars());
          add_all(fv_, n.rhs->free_vars());
        } else if constexpr (std::is_same_v<T, Case>) {
          add_all(fv_, n.scrutinee->free_vars());
          for (const auto& alt : n.alts)
            add_except(fv_, alt.body->free_vars(), alt.pattern.vars);
        } else if constexpr (std::is_same_v<T, Let>) {
          add_all(fv_, n.bound->free_vars());
          add_except(fv_, n.body->free_vars(), {n.binder});
        } else if constexpr (std::is_same_v<T, Letrec>) {
          add_all(fv_, n.rhs->free_vars());
          add_all(fv_, n.body->free_vars());
        }
        // Global and Marker: no free variables, not values.
      },
      node_);
}

namespace mk {
ExprPtr integer(Integer n) {
  return std::make_shared<const Expr>(IntLit{std::move(n)});
}
ExprPtr var(std::string name, bool fresh) {
  return std::make_shared<const Expr>(Var{std::move(name), fresh});
}
ExprPtr global(std::string name) {
  return std::make_shared<const Expr>(Global{std::move(name)});
}
ExprPtr app(ExprPtr fun, ExprPtr arg) {
  return std::make_shared<const Expr>(App{std::move(fun), std::move(arg)});
}
ExprPtr apps(ExprPtr fun, const std::vector<ExprPtr>& args) {
  for (const auto& a : args) fun = app(std::move(fun), a);
  return fun;
}
ExprPtr lambda(std::string param, ExprPtr body) {
  return std::make_shared<const Expr>(Lambda{std::move(param), std::move(body)});
}
ExprPtr lambdas(const std::vector<std::string>& params, ExprPtr body) {
  for (auto it = params.rbegin(); it != params.rend(); ++it)
    body = lambda(*it, std::move(body));
  return body;
}
ExprPtr ctor(std::string k, std::vector<ExprPtr> args) {
  return std::make_shared<const Expr>(CtorApp{std::move(k), std::move(args)});
}
ExprPtr prim(Op op, ExprPtr lhs, ExprPtr rhs) {
  return std::make_shared<const Expr>(PrimOp{op, std::move(lhs), std::move(rhs)});
}
ExprPtr case_of(ExprPtr scrutinee, std::vector<Alt> alts) {
  return std::make_shared<const Expr>(Case{std::move(scrutinee), std::move(alts)});
}
ExprPtr let(std::string x, ExprPtr bound, ExprPtr body) {
  return std::make_shared<const Expr>(Let{std::move(x), std::move(bound), std::move(body)});
}
ExprPtr letrec(std::string g, ExprPtr rhs, ExprPtr body) {
  return std::make_shared<const Expr>(Letrec{std::move(g), std::move(rhs), std::move(body)});
}
ExprPtr marker(std::string owner, ExprPtr term) {
  return std::make_shared<const Expr>(Marker{std::move(owner), std::move(term)});
}
ExprPtr nil() { return ctor(kNilCtor); }
ExprPtr cons(ExprPtr head, ExprPtr tail) {
  return ctor(kConsCtor, {std::move(head), std::move(tail)});
}
ExprPtr list(const std::vector<ExprPtr>& items) {
  ExprPtr result = nil();
  for (auto it = items.rbegin(); it != items.rend(); ++it) result = cons(*it, result);
  return result;
}
}  // namespace mk

Spine spine_of(const ExprPtr& e) {
  Spine s;
  ExprPtr cur = e;
  while (const auto* a = cur->as<App>()) {
    s.args.push_back(a->arg);
    cur = a->fun;
  }
  std::reverse(s.args.begin(), s.args.end());
  s.head = cur;
  return s;
}

LambdaView lambda_view(const ExprPtr& e) {
  LambdaView v;
  ExprPtr cur = e;
  while (const auto* l = cur->as<Lambda>()) {
    v.params.push_back(l->param);
    cur = l->body;
  }
  v.body = cur;
  return v;
}

NameSet free_vars(const ExprPtr& e) { return e->free_vars(); }

NameSet fun_names(const ExprPtr& e) {
  NameSet out;
  std::visit(
      [&](const auto& n) {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, Global>) {
          out.insert(n.name);
        } else if constexpr (std::is_same_v<T, App>) {
          add_all(out, fun_names(n.fun));
          add_all(out, fun_names(n.arg));
        } else if constexpr (std::is_same_v<T, Lambda>) {
          out = fun_names(n.body);
        } else if constexpr (std::is_same_v<T, CtorApp>) {
          for (const auto& a : n.args) add_all(out, fun_names(a));
        } else if constexpr (std::is_same_v<T, PrimOp>) {
          add_all(out, fun_names(n.lhs));
          add_all(out, fun_names(n.rhs));
        } else if constexpr (std::is_same_v<T, Case>) {
          add_all(out, fun_names(n.scrutinee));
          for (const auto& alt : n.alts) add_all(out, fun_names(alt.body));
        } else if constexpr (std::is_same_v<T, Let>) {
          add_all(out, fun_names(n.bound));
          add_all(out, fun_names(n.body));
        } else if constexpr (std::is_same_v<T, Letrec>) {
          add_all(out, fun_names(n.rhs));
          add_all(out, fun_names(n.body));
          out.erase(n.name);
        }
      },
      e->node());
  return out;
}

namespace {

void ordered_fv(const ExprPtr& e, std::vector<std::string>& bound,
                std::vector<std::string>& out) {
  if (e->free_vars().empty()) return;
  std::visit(
      [&](const auto& n) {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, Var>) {
          if (std::find(bound.begin(), bound.end(), n.name) == bound.end() &&
              std::find(out.begin(), out.end(), n.name) == out.end())
            out.push_back(n.name);
        } else if constexpr (std::is_same_v<T, App>) {
          ordered_fv(n.fun, bound, out);
          ordered_fv(n.arg, bound, out);
        } else if constexpr (std::is_same_v<T, Lambda>) {
          bound.push_back(n.param);
          ordered_fv(n.body, bound, out);
          bound.pop_back();
        } else if constexpr (std::is_same_v<T, CtorApp>) {
          for (const auto& a : n.args) ordered_fv(a, bound, out);
        } else if constexpr (std::is_same_v<T, PrimOp>) {
          ordered_fv(n.lhs, bound, out);
          ordered_fv(n.rhs, bound, out);
        } else if constexpr (std::is_same_v<T, Case>) {
          ordered_fv(n.scrutinee, bound, out);
          for (const auto& alt : n.alts) {
            bound.insert(bound.end(), alt.pattern.vars.begin(), alt.pattern.vars.end());
            ordered_fv(alt.body, bound, out);
            bound.resize(bound.size() - alt.pattern.vars.size());
          }
        } else if constexpr (std::is_same_v<T, Let>) {
          ordered_fv(n.bound, bound, out);
          bound.push_back(n.binder);
          ordered_fv(n.body, bound, out);
          bound.pop_back();
        } else if constexpr (std::is_same_v<T, Letrec>) {
          ordered_fv(n.rhs, bound, out);
          ordered_fv(n.body, bound, out);
        }
      },
      e->node());
}

}  // namespace

std::vector<std::string> free_vars_ordered(const ExprPtr& e) {
  std::vector<std::string> bound, out;
  ordered_fv(e, bound, out);
  return out;
}

void collect_var_names(const ExprPtr& e, NameSet& out) {
  std::visit(
      [&](const auto& n) {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, Var>) {
          out.insert(n.name);
        } else if constexpr (std::is_same_v<T, App>) {
          collect_var_names(n.fun, out);
          collect_var_names(n.arg, out);
        } else if constexpr (std::is_same_v<T, Lambda>) {
          out.insert(n.param);
          collect_var_names(n.body, out);
        } else if constexpr (std::is_same_v<T, CtorApp>) {
          for (const auto& a : n.args) collect_var_names(a, out);
        } else if constexpr (std::is_same_v<T, PrimOp>) {
          collect_var_names(n.lhs, out);
          collect_var_names(n.rhs, out);
        } else if constexpr (std::is_same_v<T, Case>) {
          collect_var_names(n.scrutinee, out);
          for (const auto& alt : n.alts) {
            out.insert(alt.pattern.vars.begin(), alt.pattern.vars.end());
            collect_var_names(alt.body, out);
          }
        } else if constexpr (std::is_same_v<T, Let>) {
          out.insert(n.binder);
          collect_var_names(n.bound, out);
          collect_var_names(n.body, out);
        } else if constexpr (std::is_same_v<T, Letrec>) {
          collect_var_names(n.rhs, out);
          collect_var_names(n.body, out);
        } else if constexpr (std::is_same_v<T, Marker>) {
          collect_var_names(n.term, out);
        }
      },
      e->node());
}

bool contains_marker(const ExprPtr& e) {
  return std::visit(
      [&](const auto& n) -> bool {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, Marker>) {
          return true;
        } else if constexpr (std::is_same_v<T, App>) {
          return contains_marker(n.fun) || contains_marker(n.arg);
        } else if constexpr (std::is_same_v<T, Lambda>) {
          return contains_marker(n.body);
        } else if constexpr (std::is_same_v<T, CtorApp>) {
          return std::any_of(n.args.begin(), n.args.end(), contains_marker);
        } else if constexpr (std::is_same_v<T, PrimOp>) {
          return contains_marker(n.lhs) || contains_marker(n.rhs);
        } else if constexpr (std::is_same_v<T, Case>) {
          if (contains_marker(n.scrutinee)) return true;
          return std::any_of(n.alts.begin(), n.alts.end(),
                             [](const Alt& a) { return contains_marker(a.body); });
        } else if constexpr (std::is_same_v<T, Let>) {
          return contains_marker(n.bound) || contains_marker(n.body);
        } else if constexpr (std::is_same_v<T, Letrec>) {
          return contains_marker(n.rhs) || contains_marker(n.body);
        } else {
          return false;
        }
      },
      e->node());
}

std::size_t size_of(const ExprPtr& e) {
  return std::visit(
      [&](const auto& n) -> std::size_t {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, App>) {
          return 1 + size_of(n.fun) + size_of(n.arg);
        } else if constexpr (std::is_same_v<T, Lambda>) {
          return 1 + size_of(n.body);
        } else if constexpr (std::is_same_v<T, CtorApp>) {
          std::size_t s = 1;
          for (const auto& a : n.args) s += size_of(a);
          return s;
        } else if constexpr (std::is_same_v<T, PrimOp>) {
          return 1 + size_of(n.lhs) + size_of(n.rhs);
        } else if constexpr (std::is_same_v<T, Case>) {
          std::size_t s = 1 + size_of(n.scrutinee);
          for (const auto& alt : n.alts) s += size_of(alt.body);
          return s;
        } else if constexpr (std::is_same_v<T, Let>) {
          return 1 + size_of(n.bound) + size_of(n.body);
        } else if constexpr (std::is_same_v<T, Letrec>) {
          return 1 + size_of(n.rhs) + size_of(n.body);
        } else if constexpr (std::is_same_v<T, Marker>) {
          return 1 + size_of(n.term);
        } else {
          return 1;
        }
      },
      e->node());
}

// ---------------------------------------------------------------------------
// Names

void NameSupply::reserve_all(const NameSet& names) {
  taken_.insert(names.begin(), names.end());
}

std::string NameSupply::issue(std::string base) {
  auto& counter = counters_[base];
  for (;;) {
    std::string candidate = base + std::to_string(++counter);
    if (taken_.insert(candidate).second) return candidate;
  }
}

std::string NameSupply::fresh_name(const std::string& hint) {
  std::string base = hint.empty() ? "x" : hint;
  // Strip a previously issued "_N" suffix so names do not grow.
  auto pos = base.rfind('_');
  if (pos != std::string::npos && pos > 0 && pos + 1 < base.size() &&
      std::all_of(base.begin() + static_cast<std::ptrdiff_t>(pos) + 1, base.end(),
                  [](unsigned char c) { return std::isdigit(c); }))
    base.erase(pos);
  return issue(base + "_");
}

std::string NameSupply::fresh_fun(const std::string& hint) {
  return issue(hint.empty() ? "h" : hint);
}

ExprPtr NameSupply::fresh_var(const std::string& hint) {
  return mk::var(fresh_name(hint), true);
}

// ---------------------------------------------------------------------------
// Substitution

namespace {

struct Substituter {
  NameSupply* supply;

  std::string rename(const std::string& x, const NameSet& avoid) {
    if (supply != nullptr) return supply->fresh_name(x);
    std::string candidate = x + "'";
    while (avoid.count(candidate) != 0U) candidate += "'";
    return candidate;
  }

  // Keeps only bindings whose variable is free in `e`.
  static Substitution relevant(const Substitution& s, const ExprPtr& e) {
    Substitution out;
    const auto& fv = e->free_vars();
    for (const auto& [k, v] : s)
      if (fv.count(k) != 0U) out.emplace(k, v);
    return out;
  }

  // Handles a scope introducing `binders` over `body`. Renames binders that
  // would capture a free variable of some replacement.
  std::pair<std::vector<std::string>, ExprPtr> under(
      const Substitution& s, std::vector<std::string> binders,
      const ExprPtr& body, std::vector<bool>* fresh_flags = nullptr) {
    Substitution inner = s;
    for (const auto& b : binders) inner.erase(b);
    inner = relevant(inner, body);
    if (inner.empty()) return {std::move(binders), body};
    NameSet incoming;
    for (const auto& [k, v] : inner) add_all(incoming, v->free_vars());
    NameSet avoid = incoming;
    add_all(avoid, body->free_vars());
    avoid.insert(binders.begin(), binders.end());
    for (std::size_t i = 0; i < binders.size(); ++i) {
      if (incoming.count(binders[i]) == 0U) continue;
      std::string renamed = rename(binders[i], avoid);
      avoid.insert(renamed);
      inner[binders[i]] = mk::var(renamed, true);
      binders[i] = renamed;
      if (fresh_flags != nullptr) {
        fresh_flags->resize(binders.size(), false);
        (*fresh_flags)[i] = true;
      }
    }
    return {std::move(binders), run(inner, body)};
  }

  ExprPtr run(const Substitution& s, const ExprPtr& e) {
    bool any = false;
    for (const auto& [k, v] : s) {
      if (e->free_vars().count(k) != 0U) {
        any = true;
        break;
      }
    }
    if (!any) return e;
    return std::visit(
        [&](const auto& n) -> ExprPtr {
          using T = std::decay_t<decltype(n)>;
          if constexpr (std::is_same_v<T, Var>) {
            auto it = s.find(n.name);
            return it == s.end() ? e : it->second;
          } else if constexpr (std::is_same_v<T, App>) {
            return mk::app(run(s, n.fun), run(s, n.arg));
          } else if constexpr (std::is_same_v<T, Lambda>) {
            auto [bs, body] = under(s, {n.param}, n.body);
            return mk::lambda(bs[0], body);
          } else if constexpr (std::is_same_v<T, CtorApp>) {
            std::vector<ExprPtr> args;
            args.reserve(n.args.size());
            for (const auto& a : n.args) args.push_back(run(s, a));
            return mk::ctor(n.ctor, std::move(args));
          } else if constexpr (std::is_same_v<T, PrimOp>) {
            return mk::prim(n.op, run(s, n.lhs), run(s, n.rhs));
          } else if constexpr (std::is_same_v<T, Case>) {
            std::vector<Alt> alts;
            for (const auto& alt : n.alts) {
              Pattern p = alt.pattern;
              auto [bs, body] = under(s, p.vars, alt.body, &p.fresh);
              p.vars = std::move(bs);
              alts.push_back(Alt{std::move(p), body});
            }
            return mk::case_of(run(s, n.scrutinee), std::move(alts));
          } else if constexpr (std::is_same_v<T, Let>) {
            auto bound = run(s, n.bound);
            auto [bs, body] = under(s, {n.binder}, n.body);
            return mk::let(bs[0], bound, body);
          } else if constexpr (std::is_same_v<T, Letrec>) {
            return mk::letrec(n.name, run(s, n.rhs), run(s, n.body));
          } else {
            return e;
          }
        },
        e->node());
  }
};

}  // namespace

ExprPtr substitute(const Substitution& bindings, const ExprPtr& e,
                   NameSupply* supply) {
  Substituter sub{supply};
  return sub.run(bindings, e);
}

ExprPtr substitute1(const std::string& x, const ExprPtr& value,
                    const ExprPtr& e, NameSupply* supply) {
  return substitute(Substitution{{x, value}}, e, supply);
}

ExprPtr rename_global(const ExprPtr& e, const std::string& from,
                      const ExprPtr& to) {
  return std::visit(
      [&](const auto& n) -> ExprPtr {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, Global>) {
          return n.name == from ? to : e;
        } else if constexpr (std::is_same_v<T, App>) {
          return mk::app(rename_global(n.fun, from, to), rename_global(n.arg, from, to));
        } else if constexpr (std::is_same_v<T, Lambda>) {
          return mk::lambda(n.param, rename_global(n.body, from, to));
        } else if constexpr (std::is_same_v<T, CtorApp>) {
          std::vector<ExprPtr> args;
          for (const auto& a : n.args) args.push_back(rename_global(a, from, to));
          return mk::ctor(n.ctor, std::move(args));
        } else if constexpr (std::is_same_v<T, PrimOp>) {
          return mk::prim(n.op, rename_global(n.lhs, from, to), rename_global(n.rhs, from, to));
        } else if constexpr (std::is_same_v<T, Case>) {
          std::vector<Alt> alts;
          for (const auto& alt : n.alts)
            alts.push_back(Alt{alt.pattern, rename_global(alt.body, from, to)});
          return mk::case_of(rename_global(n.scrutinee, from, to), std::move(alts));
        } else if constexpr (std::is_same_v<T, Let>) {
          return mk::let(n.binder, rename_global(n.bound, from, to),
                         rename_global(n.body, from, to));
        } else if constexpr (std::is_same_v<T, Letrec>) {
          if (n.name == from) return e;
          return mk::letrec(n.name, rename_global(n.rhs, from, to),
                            rename_global(n.body, from, to));
        } else {
          return e;
        }
      },
      e->node());
}

// ---------------------------------------------------------------------------
// Linearity

namespace {

int occurrences(const ExprPtr& e, const std::string& x) {
  if (e->free_vars().count(x) == 0U) return 0;
  return std::visit(
      [&](const auto& n) -> int {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, Var>) {
          return 1;
        } else if constexpr (std::is_same_v<T, App>) {
          return std::min(2, occurrences(n.fun, x) + occurrences(n.arg, x));
        } else if constexpr (std::is_same_v<T, Lambda>) {
          return occurrences(n.body, x);
        } else if constexpr (std::is_same_v<T, CtorApp>) {
          int total = 0;
          for (const auto& a : n.args) total += occurrences(a, x);
          return std::min(2, total);
        } else if constexpr (std::is_same_v<T, PrimOp>) {
          return std::min(2, occurrences(n.lhs, x) + occurrences(n.rhs, x));
        } else if constexpr (std::is_same_v<T, Case>) {
          int head = occurrences(n.scrutinee, x);
          int branches = 0;
          for (const auto& alt : n.alts)
            if (!alt.pattern.binds(x))
              branches = std::max(branches, occurrences(alt.body, x));
          if (head > 0 && branches > 0) return 2;
          return std::min(2, head + branches);
        } else if constexpr (std::is_same_v<T, Let>) {
          return std::min(2, occurrences(n.bound, x) +
                                 (n.binder == x ? 0 : occurrences(n.body, x)));
        } else if constexpr (std::is_same_v<T, Letrec>) {
          return std::min(2, occurrences(n.rhs, x) + occurrences(n.body, x));
        } else {
          return 0;
        }
      },
      e->node());
}

}  // namespace

bool is_linear(const ExprPtr& e, const std::string& x) {
  return occurrences(e, x) <= 1;
}

// ---------------------------------------------------------------------------
// α-equivalence and renaming match

namespace {

using GlobalHook = std::function<bool(const std::string&, const std::string&)>;

struct AlphaComparer {
  std::vector<std::pair<std::string, std::string>> vars;
  std::vector<std::pair<std::string, std::string>> funs;
  const GlobalHook* free_globals = nullptr;

  static std::ptrdiff_t find_left(const std::vector<std::pair<std::string, std::string>>& env,
                                  const std::string& x) {
    for (auto i = static_cast<std::ptrdiff_t>(env.size()) - 1; i >= 0; --i)
      if (env[static_cast<std::size_t>(i)].first == x) return i;
    return -1;
  }
  static std::ptrdiff_t find_right(const std::vector<std::pair<std::string, std::string>>& env,
                                   const std::string& x) {
    for (auto i = static_cast<std::ptrdiff_t>(env.size()) - 1; i >= 0; --i)
      if (env[static_cast<std::size_t>(i)].second == x) return i;
    return -1;
  }

  bool same_name(const std::vector<std::pair<std::string, std::string>>& env,
                 const std::string& a, const std::string& b, bool global) {
    auto ia = find_left(env, a);
    auto ib = find_right(env, b);
    if (ia >= 0 || ib >= 0) return ia == ib;
    if (global && free_globals != nullptr) return (*free_globals)(a, b);
    return a == b;
  }

  bool eq(const ExprPtr& a, const ExprPtr& b) {
    if (a == b && vars.empty() && funs.empty()) return true;
    if (a->node().index() != b->node().index()) return false;
    return std::visit(
        [&](const auto& x) -> bool {
          using T = std::decay_t<decltype(x)>;
          const auto& y = *b->as<T>();
          if constexpr (std::is_same_v<T, IntLit>) {
            return x.value == y.value;
          } else if constexpr (std::is_same_v<T, Var>) {
            return same_name(vars, x.name, y.name, false);
          } else if constexpr (std::is_same_v<T, Global>) {
            return same_name(funs, x.name, y.name, true);
          } else if constexpr (std::is_same_v<T, App>) {
            return eq(x.fun, y.fun) && eq(x.arg, y.arg);
          } else if constexpr (std::is_same_v<T, Lambda>) {
            vars.emplace_back(x.param, y.param);
            bool r = eq(x.body, y.body);
            vars.pop_back();
            return r;
          } else if constexpr (std::is_same_v<T, CtorApp>) {
            if (x.ctor != y.ctor || x.args.size() != y.args.size()) return false;
            for (std::size_t i = 0; i < x.args.size(); ++i)
              if (!eq(x.args[i], y.args[i])) return false;
            return true;
          } else if constexpr (std::is_same_v<T, PrimOp>) {
            return x.op == y.op && eq(x.lhs, y.lhs) && eq(x.rhs, y.rhs);
          } else if constexpr (std::is_same_v<T, Case>) {
            if (x.alts.size() != y.alts.size() || !eq(x.scrutinee, y.scrutinee)) return false;
            for (std::size_t i = 0; i < x.alts.size(); ++i) {
              const auto& pa = x.alts[i].pattern;
              const auto& pb = y.alts[i].pattern;
              if (!pa.same_shape(pb)) return false;
              for (std::size_t j = 0; j < pa.vars.size(); ++j)
                vars.emplace_back(pa.vars[j], pb.vars[j]);
              bool r = eq(x.alts[i].body, y.alts[i].body);
              vars.resize(vars.size() - pa.vars.size());
              if (!r) return false;
            }
            return true;
          } else if constexpr (std::is_same_v<T, Let>) {
            if (!eq(x.bound, y.bound)) return false;
            vars.emplace_back(x.binder, y.binder);
            bool r = eq(x.body, y.body);
            vars.pop_back();
            return r;
          } else if constexpr (std::is_same_v<T, Letrec>) {
            funs.emplace_back(x.name, y.name);
            bool r = eq(x.rhs, y.rhs) && eq(x.body, y.body);
            funs.pop_back();
            return r;
          } else {
            return x.owner == y.owner && eq(x.term, y.term);
          }
        },
        a->node());
  }
};

struct RenamingMatcher {
  std::vector<std::pair<std::string, std::string>> vars;
  std::vector<std::pair<std::string, std::string>> funs;
  Renaming sigma;

  bool bound_right(const std::string& y) const {
    return AlphaComparer::find_right(vars, y) >= 0;
  }

  bool match(const ExprPtr& p, const ExprPtr& s) {
    if (const auto* pv = p->as<Var>()) {
      auto ip = AlphaComparer::find_left(vars, pv->name);
      const auto* sv = s->as<Var>();
      if (sv == nullptr) return false;
      if (ip >= 0) return AlphaComparer::find_right(vars, sv->name) == ip;
      if (bound_right(sv->name)) return false;
      auto [it, inserted] = sigma.emplace(pv->name, sv->name);
      return inserted || it->second == sv->name;
    }
    if (p->node().index() != s->node().index()) return false;
    return std::visit(
        [&](const auto& x) -> bool {
          using T = std::decay_t<decltype(x)>;
          const auto& y = *s->as<T>();
          if constexpr (std::is_same_v<T, IntLit>) {
            return x.value == y.value;
          } else if constexpr (std::is_same_v<T, Var>) {
            return false;  // handled above
          } else if constexpr (std::is_same_v<T, Global>) {
            auto ia = AlphaComparer::find_left(funs, x.name);
            auto ib = AlphaComparer::find_right(funs, y.name);
            if (ia >= 0 || ib >= 0) return ia == ib;
            return x.name == y.name;
          } else if constexpr (std::is_same_v<T, App>) {
            return match(x.fun, y.fun) && match(x.arg, y.arg);
          } else if constexpr (std::is_same_v<T, Lambda>) {
            vars.emplace_back(x.param, y.param);
            bool r = match(x.body, y.body);
            vars.pop_back();
            return r;
          } else if constexpr (std::is_same_v<T, CtorApp>) {
            if (x.ctor != y.ctor || x.args.size() != y.args.size()) return false;
            for (std::size_t i = 0; i < x.args.size(); ++i)
              if (!match(x.args[i], y.args[i])) return false;
            return true;
          } else if constexpr (std::is_same_v<T, PrimOp>) {
            return x.op == y.op && match(x.lhs, y.lhs) && match(x.rhs, y.rhs);
          } else if constexpr (std::is_same_v<T, Case>) {
            if (x.alts.size() != y.alts.size() || !match(x.scrutinee, y.scrutinee)) return false;
            for (std::size_t i = 0; i < x.alts.size(); ++i) {
              const auto& pa = x.alts[i].pattern;
              const auto& pb = y.alts[i].pattern;
              if (!pa.same_shape(pb)) return false;
              for (std::size_t j = 0; j < pa.vars.size(); ++j)
                vars.emplace_back(pa.vars[j], pb.vars[j]);
              bool r = match(x.alts[i].body, y.alts[i].body);
              vars.resize(vars.size() - pa.vars.size());
              if (!r) return false;
            }
            return true;
          } else if constexpr (std::is_same_v<T, Let>) {
            if (!match(x.bound, y.bound)) return false;
            vars.emplace_back(x.binder, y.binder);
            bool r = match(x.body, y.body);
            vars.pop_back();
            return r;
          } else if constexpr (std::is_same_v<T, Letrec>) {
            funs.emplace_back(x.name, y.name);
            bool r = match(x.rhs, y.rhs) && match(x.body, y.body);
            funs.pop_back();
            return r;
          } else {
            return false;
          }
        },
        p->node());
  }
};

}  // namespace

bool alpha_eq(const ExprPtr& a, const ExprPtr& b) {
  AlphaComparer cmp;
  return cmp.eq(a, b);
}

std::optional<Renaming> match_renaming(const ExprPtr& pattern,
                                       const ExprPtr& subject) {
  RenamingMatcher m;
  if (!m.match(pattern, subject)) return std::nullopt;
  return std::move(m.sigma);
}

// ---------------------------------------------------------------------------
// Weight

std::uint64_t weight(const ExprPtr& e, const NameSet& initial_vars) {
  return std::visit(
      [&](const auto& n) -> std::uint64_t {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, Var>) {
          return (n.fresh && initial_vars.count(n.name) == 0U) ? 1 : 2;
        } else if constexpr (std::is_same_v<T, IntLit> || std::is_same_v<T, Global>) {
          return 2;
        } else if constexpr (std::is_same_v<T, App>) {
          Spine sp = spine_of(e);
          std::uint64_t w = 1 + weight(sp.head, initial_vars);
          for (const auto& a : sp.args) w += weight(a, initial_vars);
          return w;
        } else if constexpr (std::is_same_v<T, Lambda>) {
          return 1 + weight(n.body, initial_vars);
        } else if constexpr (std::is_same_v<T, CtorApp>) {
          if (n.args.empty()) return 2;
          std::uint64_t w = 1;
          for (const auto& a : n.args) w += weight(a, initial_vars);
          return w;
        } else if constexpr (std::is_same_v<T, PrimOp>) {
          return 1 + weight(n.lhs, initial_vars) + weight(n.rhs, initial_vars);
        } else if constexpr (std::is_same_v<T, Case>) {
          std::uint64_t w = 1 + weight(n.scrutinee, initial_vars);
          for (const auto& alt : n.alts) w += weight(alt.body, initial_vars);
          return w;
        } else if constexpr (std::is_same_v<T, Let>) {
          return 1 + weight(n.bound, initial_vars) + weight(n.body, initial_vars);
        } else if constexpr (std::is_same_v<T, Letrec>) {
          return 1 + weight(n.rhs, initial_vars) + weight(n.body, initial_vars);
        } else {
          return 1 + weight(n.term, initial_vars);
        }
      },
      e->node());
}

// ---------------------------------------------------------------------------
// letrec encoding

ExprPtr fix_definition() {
  // fix = λf.f (λn.fix f n)
  auto f = mk::var("f");
  auto n = mk::var("n");
  return mk::lambda(
      "f", mk::app(f, mk::lambda("n", mk::apps(mk::global(kFixName), {f, n}))));
}

ExprPtr desugar_letrec(const std::string& g, const ExprPtr& rhs,
                       const ExprPtr& body) {
  if (!rhs->is<Lambda>())
    throw LetrecError("letrec " + g + ": right-hand side must be a lambda");
  if (!rhs->free_vars().empty())
    throw LetrecError("letrec " + g + ": right-hand side has free variables");
  NameSet names;
  collect_var_names(rhs, names);
  collect_var_names(body, names);
  std::string h = g;
  while (names.count(h) != 0U) h += "'";
  std::string y = "y";
  while (names.count(y) != 0U || y == h) y += "'";
  auto hv = mk::var(h);
  auto rhs_v = rename_global(rhs, g, hv);
  auto body_v = rename_global(body, g, hv);
  // (λh.e′)(λy.fix (λh.λx̄.e) y)
  auto knot = mk::lambda(
      y, mk::apps(mk::global(kFixName), {mk::lambda(h, rhs_v), mk::var(y)}));
  return mk::app(mk::lambda(h, body_v), knot);
}

// ---------------------------------------------------------------------------
// Programs

const Definition* Program::find(const std::string& name) const {
  for (const auto& d : defs)
    if (d.name == name) return &d;
  return nullptr;
}

void Program::set(const std::string& name, ExprPtr value) {
  for (auto& d : defs) {
    if (d.name == name) {
      d.value = std::move(value);
      return;
    }
  }
  defs.push_back(Definition{name, std::move(value)});
}

Globals Program::globals() const {
  Globals g;
  for (const auto& d : defs) g[d.name] = d.value;
  return g;
}

bool alpha_eq(const Program& a, const Program& b) {
  if (a.entry != b.entry) return false;
  const Definition* ea = a.find(a.entry);
  const Definition* eb = b.find(b.entry);
  if (ea == nullptr || eb == nullptr) return ea == eb;

  std::map<std::string, std::string> ab, ba;
  std::deque<std::pair<std::string, std::string>> pending;
  ab[a.entry] = b.entry;
  ba[b.entry] = a.entry;
  pending.emplace_back(a.entry, b.entry);

  GlobalHook hook = [&](const std::string& x, const std::string& y) {
    auto it = ab.find(x);
    if (it != ab.end()) return it->second == y;
    if (ba.count(y) != 0U) return false;
    bool dx = a.find(x) != nullptr;
    bool dy = b.find(y) != nullptr;
    if (!dx && !dy) return x == y;
    if (dx != dy) return false;
    ab[x] = y;
    ba[y] = x;
    pending.emplace_back(x, y);
    return true;
  };

  while (!pending.empty()) {
    auto [x, y] = pending.front();
    pending.pop_front();
    AlphaComparer cmp;
    cmp.free_globals = &hook;
    if (!cmp.eq(a.find(x)->value, b.find(y)->value)) return false;
  }
  return true;
}

}  // namespace scp
