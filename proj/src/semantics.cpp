#include "scp/semantics.hpp"

#include "scp/parser.hpp"

#include <sstream>
#include <unordered_set>

namespace scp {

const char* rule_name(Rule r) {
  switch (r) {
    case Rule::Global:
      return "Global";
    case Rule::App:
      return "App";
    case Rule::Let:
      return "Let";
    case Rule::KCase:
      return "KCase";
    case Rule::NCase:
      return "NCase";
    case Rule::Arith:
      return "Arith";
    case Rule::Letrec:
      return "Letrec";
  }
  return "?";
}

const char* outcome_name(EvalOutcome::Kind kind) {
  switch (kind) {
    case EvalOutcome::Kind::Value:
      return "value";
    case EvalOutcome::Kind::OutOfFuel:
      return "out-of-fuel";
    case EvalOutcome::Kind::Stuck:
      return "stuck";
  }
  return "?";
}

namespace {

ExprPtr plug_frame(const Frame& f, ExprPtr e) {
  switch (f.kind) {
    case Frame::Kind::AppFun:
      return mk::app(std::move(e), f.expr);
    case Frame::Kind::AppArg:
      return mk::app(f.expr, std::move(e));
    case Frame::Kind::CtorArg: {
      std::vector<ExprPtr> args = f.before;
      args.push_back(std::move(e));
      args.insert(args.end(), f.after.begin(), f.after.end());
      return mk::ctor(f.name, std::move(args));
    }
    case Frame::Kind::PrimLeft:
      return mk::prim(f.op, std::move(e), f.expr);
    case Frame::Kind::PrimRight:
      return mk::prim(f.op, f.expr, std::move(e));
    case Frame::Kind::CaseScrut:
      return mk::case_of(std::move(e), f.alts);
    case Frame::Kind::LetBound:
      return mk::let(f.name, std::move(e), f.expr);
  }
  return e;
}

Frame app_fun(ExprPtr arg) {
  Frame f{Frame::Kind::AppFun, std::move(arg), {}, {}, {}, Op::Add, {}};
  return f;
}

// Pushes the frame that descends into the first unevaluated position of a
// non-value, non-redex expression and returns that position's expression.
ExprPtr descend(const ExprPtr& e, ReductionContext& ctx) {
  if (const auto* a = e->as<App>()) {
    ctx.push_back(app_fun(a->arg));
    return a->fun;
  }
  if (const auto* c = e->as<CtorApp>()) {
    std::size_t i = 0;
    while (c->args[i]->is_value()) ++i;
    Frame f{Frame::Kind::CtorArg, nullptr, {}, {}, c->ctor, Op::Add, {}};
    f.before.assign(c->args.begin(), c->args.begin() + static_cast<std::ptrdiff_t>(i));
    f.after.assign(c->args.begin() + static_cast<std::ptrdiff_t>(i) + 1, c->args.end());
    ctx.push_back(std::move(f));
    return c->args[i];
  }
  if (const auto* p = e->as<PrimOp>()) {
    ctx.push_back(Frame{Frame::Kind::PrimLeft, p->rhs, {}, {}, {}, p->op, {}});
    return p->lhs;
  }
  if (const auto* k = e->as<Case>()) {
    ctx.push_back(Frame{Frame::Kind::CaseScrut, nullptr, {}, {}, {}, Op::Add, k->alts});
    return k->scrutinee;
  }
  if (const auto* l = e->as<Let>()) {
    ctx.push_back(Frame{Frame::Kind::LetBound, l->body, {}, {}, l->binder, Op::Add, {}});
    return l->bound;
  }
  return nullptr;
}

ExprPtr lookup_global(const std::string& g, const Globals& globals) {
  auto it = globals.find(g);
  if (it != globals.end()) return it->second;
  if (g == kFixName) {
    static const ExprPtr fix = fix_definition();
    return fix;
  }
  throw StuckError("undefined function '" + g + "'");
}

ExprPtr select_alt(const ExprPtr& v, const std::vector<Alt>& alts, Rule& rule) {
  const Alt* fallback = nullptr;
  for (const auto& alt : alts) {
    const Pattern& p = alt.pattern;
    if (p.kind == Pattern::Kind::Default) {
      if (fallback == nullptr) fallback = &alt;
      continue;
    }
    if (const auto* n = v->as<IntLit>()) {
      if (p.kind == Pattern::Kind::Int && p.value == n->value) {
        rule = Rule::NCase;
        return alt.body;
      }
    } else if (const auto* c = v->as<CtorApp>()) {
      if (p.kind == Pattern::Kind::Ctor && p.ctor == c->ctor && p.vars.size() == c->args.size()) {
        rule = Rule::KCase;
        Substitution s;
        for (std::size_t i = 0; i < p.vars.size(); ++i) s[p.vars[i]] = c->args[i];
        return substitute(s, alt.body);
      }
    }
  }
  if (fallback != nullptr) {
    rule = v->is<IntLit>() ? Rule::NCase : Rule::KCase;
    return fallback->body;
  }
  throw StuckError("no case alternative matches " + pretty(v));
}

// Contracts the redex at the top of a decomposition.
StepResult contract(const ExprPtr& redex, const Globals& globals) {
  if (const auto* g = redex->as<Global>()) return {lookup_global(g->name, globals), Rule::Global};
  if (const auto* lr = redex->as<Letrec>())
    return {desugar_letrec(lr->name, lr->rhs, lr->body), Rule::Letrec};
  if (const auto* a = redex->as<App>()) {
    const auto* lam = a->fun->as<Lambda>();
    return {substitute1(lam->param, a->arg, lam->body), Rule::App};
  }
  if (const auto* l = redex->as<Let>()) return {substitute1(l->binder, l->bound, l->body), Rule::Let};
  if (const auto* p = redex->as<PrimOp>()) {
    return {mk::integer(apply_op(p->op, p->lhs->as<IntLit>()->value, p->rhs->as<IntLit>()->value)),
            Rule::Arith};
  }
  if (const auto* k = redex->as<Case>()) {
    Rule rule = Rule::KCase;
    ExprPtr body = select_alt(k->scrutinee, k->alts, rule);
    return {body, rule};
  }
  throw StuckError("not a redex: " + pretty(redex));
}

}  // namespace

ExprPtr plug(const ReductionContext& context, ExprPtr e) {
  for (auto it = context.rbegin(); it != context.rend(); ++it) e = plug_frame(*it, std::move(e));
  return e;
}

Decomposition decompose(const ExprPtr& e) {
  Decomposition d;
  if (e->is_value()) {
    d.is_value = true;
    return d;
  }
  ExprPtr cur = e;
  for (;;) {
    if (cur->is<Global>() || cur->is<Letrec>()) break;
    if (const auto* v = cur->as<Var>()) throw StuckError("free variable '" + v->name + "'");
    if (cur->is<Marker>()) throw StuckError("generalization marker in evaluated term");
    // Redexes whose immediate subterms are values.
    if (const auto* a = cur->as<App>()) {
      if (a->fun->is_value()) {
        if (!a->fun->is<Lambda>()) throw StuckError("application of non-function " + pretty(a->fun));
        if (a->arg->is_value()) break;
        d.context.push_back(Frame{Frame::Kind::AppArg, a->fun, {}, {}, {}, Op::Add, {}});
        cur = a->arg;
        continue;
      }
    } else if (const auto* p = cur->as<PrimOp>()) {
      if (p->lhs->is_value()) {
        if (!p->lhs->is<IntLit>()) throw StuckError("non-integer operand " + pretty(p->lhs));
        if (p->rhs->is_value()) {
          if (!p->rhs->is<IntLit>()) throw StuckError("non-integer operand " + pretty(p->rhs));
          break;
        }
        d.context.push_back(Frame{Frame::Kind::PrimRight, p->lhs, {}, {}, {}, p->op, {}});
        cur = p->rhs;
        continue;
      }
    } else if (const auto* k = cur->as<Case>()) {
      if (k->scrutinee->is_value()) break;
    } else if (const auto* l = cur->as<Let>()) {
      if (l->bound->is_value()) break;
    }
    cur = descend(cur, d.context);
  }
  d.redex = cur;
  return d;
}

std::optional<StepResult> step(const ExprPtr& e, const Globals& globals) {
  Decomposition d = decompose(e);
  if (d.is_value) return std::nullopt;
  StepResult r = contract(d.redex, globals);
  r.expr = plug(d.context, r.expr);
  return r;
}

namespace {

class Machine {
 public:
  Machine(const Globals& globals, std::uint64_t fuel) : globals_(globals), fuel_(fuel) {}

  void premark(const ExprPtr& e) {
    if (const auto* c = e->as<CtorApp>()) {
      if (e->is_value()) {
        seen_.insert(e.get());
        keep_.push_back(e);
      }
      for (const auto& a : c->args) premark(a);
      return;
    }
    std::visit(
        [&](const auto& n) {
          using T = std::decay_t<decltype(n)>;
          if constexpr (std::is_same_v<T, App>) {
            premark(n.fun);
            premark(n.arg);
          } else if constexpr (std::is_same_v<T, PrimOp>) {
            premark(n.lhs);
            premark(n.rhs);
          } else if constexpr (std::is_same_v<T, Let>) {
            premark(n.bound);
            premark(n.body);
          } else if constexpr (std::is_same_v<T, Case>) {
            premark(n.scrutinee);
          }
        },
        e->node());
  }

  EvalOutcome run(ExprPtr focus) {
    EvalOutcome out;
    ReductionContext ctx;
    try {
      for (;;) {
        if (focus->is_value()) {
          account(focus);
          if (ctx.empty()) {
            out.kind = EvalOutcome::Kind::Value;
            out.value = focus;
            break;
          }
          Frame f = std::move(ctx.back());
          ctx.pop_back();
          switch (f.kind) {
            case Frame::Kind::AppFun:
              if (!focus->is<Lambda>())
                throw StuckError("application of non-function " + pretty(focus));
              ctx.push_back(Frame{Frame::Kind::AppArg, focus, {}, {}, {}, Op::Add, {}});
              focus = f.expr;
              continue;
            case Frame::Kind::AppArg: {
              if (!tick()) return out_of_fuel(out);
              ++stats_.calls;
              const auto* lam = f.expr->as<Lambda>();
              focus = substitute1(lam->param, focus, lam->body);
              continue;
            }
            case Frame::Kind::CtorArg:
              f.before.push_back(focus);
              if (f.after.empty()) {
                focus = mk::ctor(f.name, std::move(f.before));
              } else {
                focus = f.after.front();
                f.after.erase(f.after.begin());
                ctx.push_back(std::move(f));
              }
              continue;
            case Frame::Kind::PrimLeft:
              if (!focus->is<IntLit>()) throw StuckError("non-integer operand " + pretty(focus));
              ctx.push_back(Frame{Frame::Kind::PrimRight, focus, {}, {}, {}, f.op, {}});
              focus = f.expr;
              continue;
            case Frame::Kind::PrimRight:
              if (!focus->is<IntLit>()) throw StuckError("non-integer operand " + pretty(focus));
              if (!tick()) return out_of_fuel(out);
              focus = mk::integer(apply_op(f.op, f.expr->as<IntLit>()->value, focus->as<IntLit>()->value));
              continue;
            case Frame::Kind::CaseScrut: {
              if (!tick()) return out_of_fuel(out);
              Rule rule = Rule::KCase;
              focus = select_alt(focus, f.alts, rule);
              continue;
            }
            case Frame::Kind::LetBound:
              if (!tick()) return out_of_fuel(out);
              focus = substitute1(f.name, focus, f.expr);
              continue;
          }
        }
        if (const auto* g = focus->as<Global>()) {
          if (!tick()) return out_of_fuel(out);
          ++stats_.calls;
          focus = lookup_global(g->name, globals_);
          continue;
        }
        if (const auto* lr = focus->as<Letrec>()) {
          focus = desugar_letrec(lr->name, lr->rhs, lr->body);
          continue;
        }
        if (const auto* v = focus->as<Var>()) throw StuckError("free variable '" + v->name + "'");
        if (focus->is<Marker>()) throw StuckError("generalization marker in evaluated term");
        focus = descend(focus, ctx);
      }
    } catch (const StuckError& err) {
      out.kind = EvalOutcome::Kind::Stuck;
      out.reason = err.what();
    } catch (const LetrecError& err) {
      out.kind = EvalOutcome::Kind::Stuck;
      out.reason = err.what();
    }
    out.stats = stats_;
    return out;
  }

 private:
  const Globals& globals_;
  std::uint64_t fuel_;
  EvalStats stats_;
  std::unordered_set<const Expr*> seen_;
  std::vector<ExprPtr> keep_;

  bool tick() {
    if (stats_.steps >= fuel_) return false;
    ++stats_.steps;
    return true;
  }

  EvalOutcome& out_of_fuel(EvalOutcome& out) {
    out.kind = EvalOutcome::Kind::OutOfFuel;
    out.stats = stats_;
    return out;
  }

  // Counts constructor values not seen before.
  void account(const ExprPtr& v) {
    const auto* c = v->as<CtorApp>();
    if (c == nullptr || !seen_.insert(v.get()).second) return;
    keep_.push_back(v);
    ++stats_.allocs;
    ++stats_.allocs_by_ctor[c->ctor];
    for (const auto& a : c->args) account(a);
  }
};

}  // namespace

EvalOutcome eval(const ExprPtr& e, const Globals& globals, std::uint64_t fuel,
                 const EvalOptions& options) {
  Machine m(globals, fuel);
  if (!options.count_initial_ctors) m.premark(e);
  return m.run(e);
}

std::string render_stats(const EvalOutcome& outcome) {
  std::ostringstream s;
  s << "outcome=" << outcome_name(outcome.kind) << "\n";
  s << "calls=" << outcome.stats.calls << "\n";
  s << "allocs=" << outcome.stats.allocs << "\n";
  s << "steps=" << outcome.stats.steps << "\n";
  for (const auto& [k, n] : outcome.stats.allocs_by_ctor) s << "allocs." << k << "=" << n << "\n";
  return s.str();
}

}  // namespace scp
