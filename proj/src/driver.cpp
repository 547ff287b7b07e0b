#include "scp/driver.hpp"

#include "scp/analysis.hpp"
#include "scp/generalize.hpp"
#include "scp/parser.hpp"

#include <algorithm>
#include <deque>
#include <functional>
#include <optional>
#include <sstream>

namespace scp {

ExprPtr plug(const DrivingContext& context, ExprPtr e) {
  for (auto it = context.rbegin(); it != context.rend(); ++it) {
    switch (it->kind) {
      case DFrame::Kind::AppArg:
        e = mk::app(std::move(e), it->expr);
        break;
      case DFrame::Kind::CaseScrut:
        e = mk::case_of(std::move(e), it->alts);
        break;
      case DFrame::Kind::PrimLeft:
        e = mk::prim(it->op, std::move(e), it->expr);
        break;
      case DFrame::Kind::PrimRight:
        e = mk::prim(it->op, it->expr, std::move(e));
        break;
    }
  }
  return e;
}

NameSet context_free_vars(const DrivingContext& context) {
  NameSet out;
  for (const auto& f : context) {
    if (f.kind == DFrame::Kind::CaseScrut) {
      for (const auto& alt : f.alts)
        for (const auto& x : alt.body->free_vars())
          if (!alt.pattern.binds(x)) out.insert(x);
    } else {
      out.insert(f.expr->free_vars().begin(), f.expr->free_vars().end());
    }
  }
  return out;
}

namespace {

// Rebuilds `e` with `f` applied to every immediate subexpression.
ExprPtr map_children(const ExprPtr& e, const std::function<ExprPtr(const ExprPtr&)>& f) {
  return std::visit(
      [&](const auto& n) -> ExprPtr {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, App>) {
          return mk::app(f(n.fun), f(n.arg));
        } else if constexpr (std::is_same_v<T, Lambda>) {
          return mk::lambda(n.param, f(n.body));
        } else if constexpr (std::is_same_v<T, CtorApp>) {
          std::vector<ExprPtr> args;
          for (const auto& a : n.args) args.push_back(f(a));
          return mk::ctor(n.ctor, std::move(args));
        } else if constexpr (std::is_same_v<T, PrimOp>) {
          return mk::prim(n.op, f(n.lhs), f(n.rhs));
        } else if constexpr (std::is_same_v<T, Case>) {
          std::vector<Alt> alts;
          for (const auto& alt : n.alts) alts.push_back(Alt{alt.pattern, f(alt.body)});
          return mk::case_of(f(n.scrutinee), std::move(alts));
        } else if constexpr (std::is_same_v<T, Let>) {
          return mk::let(n.binder, f(n.bound), f(n.body));
        } else if constexpr (std::is_same_v<T, Letrec>) {
          return mk::letrec(n.name, f(n.rhs), f(n.body));
        } else if constexpr (std::is_same_v<T, Marker>) {
          return mk::marker(n.owner, f(n.term));
        } else {
          return e;
        }
      },
      e->node());
}

ExprPtr find_marker(const ExprPtr& e, const std::string& owner) {
  if (const auto* m = e->as<Marker>()) {
    if (m->owner == owner) return e;
    return nullptr;
  }
  ExprPtr found;
  map_children(e, [&](const ExprPtr& c) {
    if (!found) found = find_marker(c, owner);
    return c;
  });
  return found;
}

ExprPtr strip_markers(const ExprPtr& e, const std::string& owner) {
  if (!contains_marker(e)) return e;
  if (const auto* m = e->as<Marker>())
    if (m->owner == owner) return m->term;
  return map_children(e, [&](const ExprPtr& c) { return strip_markers(c, owner); });
}

ExprPtr rename_globals(const ExprPtr& e, const std::map<std::string, std::string>& names) {
  if (const auto* g = e->as<Global>()) {
    auto it = names.find(g->name);
    return it == names.end() ? e : mk::global(it->second);
  }
  if (const auto* lr = e->as<Letrec>()) {
    auto it = names.find(lr->name);
    std::string name = it == names.end() ? lr->name : it->second;
    return mk::letrec(name, rename_globals(lr->rhs, names), rename_globals(lr->body, names));
  }
  return map_children(e, [&](const ExprPtr& c) { return rename_globals(c, names); });
}

// Variable nodes of `e` by name, keeping their fresh flags.
void var_nodes(const ExprPtr& e, std::map<std::string, ExprPtr>& out) {
  if (const auto* v = e->as<Var>()) {
    out.emplace(v->name, e);
    return;
  }
  if (const auto* c = e->as<Case>()) {
    var_nodes(c->scrutinee, out);
    for (const auto& alt : c->alts) var_nodes(alt.body, out);
    return;
  }
  map_children(e, [&](const ExprPtr& c) {
    var_nodes(c, out);
    return c;
  });
}

bool is_renaming_of(const ExprPtr& candidate, const ExprPtr& term) {
  auto sigma = match_renaming(candidate, term);
  if (!sigma) return false;
  NameSet targets;
  for (const auto& [from, to] : *sigma)
    if (!targets.insert(to).second) return false;
  return true;
}

struct Measure {
  std::size_t rho = 0;
  std::uint64_t whole = 0;
  std::uint64_t focus = 0;

  std::string str() const {
    std::ostringstream s;
    s << "(" << rho << ", " << whole << ", " << focus << ")";
    return s.str();
  }
};

bool decreases(const Measure& parent, const Measure& child) {
  if (child.rho != parent.rho) return child.rho > parent.rho;
  if (child.whole != parent.whole) return child.whole < parent.whole;
  return child.focus < parent.focus;
}

class Driver {
 public:
  Driver(NameSupply& supply, const DriveOptions& options, DriveReport& report, NameSet initial)
      : supply_(supply), options_(options), report_(report), initial_(std::move(initial)) {}

  Globals local_defs;

  ExprPtr drive(const ExprPtr& e, const DrivingContext& R, const MemoList& rho, const Globals& G,
                const Measure* parent, const char* via) {
    if (++report_.drive_calls > options_.max_drive_calls)
      throw DriverError("driving budget of " + std::to_string(options_.max_drive_calls) +
                        " steps exhausted");
    Measure me;
    if (options_.assert_measure || options_.trace != nullptr) {
      me.rho = rho.size();
      me.focus = weight(e, initial_);
      me.whole = R.empty() ? me.focus : weight(plug(R, e), initial_);
      if (options_.assert_measure && parent != nullptr && !decreases(*parent, me))
        report_.measure_violations.push_back(std::string(via) + ": " + parent->str() + " -> " +
                                             me.str());
    }
    return rules(e, R, rho, G, me);
  }

 private:
  NameSupply& supply_;
  const DriveOptions& options_;
  DriveReport& report_;
  NameSet initial_;

  // Letrecs met so far; meeting the same one again reuses its name so that
  // later calls can fold.
  struct SeenLetrec {
    std::string name;
    ExprPtr rhs;
    std::string assigned;
  };
  std::vector<SeenLetrec> letrecs_;

  void note(const char* rule, const Measure& me, std::size_t depth) {
    ++report_.rule_counts[rule];
    if (options_.trace != nullptr)
      *options_.trace << rule << " w=" << me.focus << " rho=" << me.rho << " depth=" << depth
                      << "\n";
  }

  ExprPtr D(const ExprPtr& e, const MemoList& rho, const Globals& G, const Measure& me,
            const char* via) {
    return drive(e, {}, rho, G, &me, via);
  }

  static DrivingContext extend(const DrivingContext& R, DFrame f) {
    DrivingContext out = R;
    out.push_back(std::move(f));
    return out;
  }

  // Renames binders in `vars` that occur in `avoid`, applying the renaming
  // to `body`.
  ExprPtr freshen(std::vector<std::string>& vars, const NameSet& avoid, const ExprPtr& body) {
    Substitution s;
    for (auto& x : vars) {
      if (avoid.count(x) == 0U) continue;
      std::string y = supply_.fresh_name(x);
      s[x] = mk::var(y);
      x = y;
    }
    return s.empty() ? body : substitute(s, body, &supply_);
  }

  ExprPtr rules(const ExprPtr& e, const DrivingContext& R, const MemoList& rho, const Globals& G,
                const Measure& me) {
    const std::size_t depth = R.size();

    // R1, R2
    if (e->is<IntLit>()) {
      note("R1", me, depth);
      return plug(R, e);
    }
    if (e->is<Var>()) {
      note("R2", me, depth);
      return plug(R, e);
    }
    // R3
    if (const auto* g = e->as<Global>()) {
      note("R3", me, depth);
      return drive_app(g->name, R, rho, G, me);
    }
    // R4
    if (const auto* c = e->as<CtorApp>(); c != nullptr && R.empty()) {
      note("R4", me, depth);
      std::vector<ExprPtr> args;
      for (const auto& a : c->args) args.push_back(D(a, rho, G, me, "R4"));
      return mk::ctor(c->ctor, std::move(args));
    }
    if (e->is<App>()) {
      Spine sp = spine_of(e);
      // R5
      if (sp.head->is<Var>()) {
        note("R5", me, depth);
        std::vector<ExprPtr> args;
        for (const auto& a : sp.args) args.push_back(D(a, rho, G, me, "R5"));
        return plug(R, mk::apps(sp.head, args));
      }
    }
    // R6
    if (e->is<Lambda>() && R.empty()) {
      note("R6", me, depth);
      LambdaView v = lambda_view(e);
      return mk::lambdas(v.params, D(v.body, rho, G, me, "R6"));
    }
    if (const auto* p = e->as<PrimOp>()) {
      const auto* n1 = p->lhs->as<IntLit>();
      const auto* n2 = p->rhs->as<IntLit>();
      // R7
      if (n1 != nullptr && n2 != nullptr) {
        note("R7", me, depth);
        return drive(plug(R, mk::integer(apply_op(p->op, n1->value, n2->value))), {}, rho, G, &me,
                     "R7");
      }
      // R8
      note("R8", me, depth);
      if (is_annoying(e)) {
        ExprPtr l = D(p->lhs, rho, G, me, "R8");
        ExprPtr r = D(p->rhs, rho, G, me, "R8");
        return plug(R, mk::prim(p->op, l, r));
      }
      if (n1 != nullptr || is_annoying(p->lhs))
        return drive(p->rhs, extend(R, DFrame{DFrame::Kind::PrimRight, p->lhs, p->op, {}}), rho, G,
                     &me, "R8");
      return drive(p->lhs, extend(R, DFrame{DFrame::Kind::PrimLeft, p->rhs, p->op, {}}), rho, G,
                   &me, "R8");
    }
    if (const auto* a = e->as<App>()) {
      Spine sp = spine_of(e);
      // R9
      if (sp.head->is<Lambda>()) {
        note("R9", me, depth);
        return drive(beta_to_lets(sp), R, rho, G, &me, "R9");
      }
      // R10
      note("R10", me, depth);
      return drive(a->fun, extend(R, DFrame{DFrame::Kind::AppArg, a->arg, Op::Add, {}}), rho, G,
                   &me, "R10");
    }
    if (const auto* l = e->as<Let>()) {
      // R11
      if (l->bound->is<IntLit>()) {
        note("R11", me, depth);
        return drive(plug(R, substitute1(l->binder, l->bound, l->body, &supply_)), {}, rho, G, &me,
                     "R11");
      }
      // R12, also for function names
      const auto* y = l->bound->as<Var>();
      if ((y != nullptr && !y->fresh) || l->bound->is<Global>()) {
        note("R12", me, depth);
        return drive(plug(R, substitute1(l->binder, l->bound, l->body, &supply_)), {}, rho, G, &me,
                     "R12");
      }
      // R13
      note("R13", me, depth);
      NameSet strict = strict_vars(l->body);
      bool is_strict = strict.count(l->binder) != 0U;
      bool linear = is_linear(l->body, l->binder);
      if (options_.explain_strict != nullptr) {
        *options_.explain_strict << "let " << l->binder << ": strict = {";
        bool first = true;
        for (const auto& x : strict) {
          *options_.explain_strict << (first ? "" : ", ") << x;
          first = false;
        }
        *options_.explain_strict << "} linear=" << (linear ? "yes" : "no") << " -> "
                                 << (is_strict && linear ? "substitute" : "keep let") << "\n";
      }
      if (is_strict && linear)
        return drive(plug(R, substitute1(l->binder, l->bound, l->body, &supply_)), {}, rho, G, &me,
                     "R13");
      std::vector<std::string> binder{l->binder};
      ExprPtr body = freshen(binder, context_free_vars(R), l->body);
      ExprPtr bound = D(l->bound, rho, G, me, "R13");
      return mk::let(binder[0], bound, D(plug(R, body), rho, G, me, "R13"));
    }
    // R14
    if (const auto* lr = e->as<Letrec>()) {
      note("R14", me, depth);
      std::string g = lr->name;
      ExprPtr rhs = lr->rhs;
      ExprPtr body = lr->body;
      NameSet outer_fns;
      for (const auto& f : R) {
        NameSet fs = fun_names(f.kind == DFrame::Kind::CaseScrut ? mk::case_of(mk::integer(0), f.alts)
                                                                 : f.expr);
        outer_fns.insert(fs.begin(), fs.end());
      }
      std::string assigned;
      for (const auto& seen : letrecs_)
        if (seen.name == g && alpha_eq(seen.rhs, rhs)) assigned = seen.assigned;
      if (assigned.empty()) {
        bool clash = G.count(g) != 0U || outer_fns.count(g) != 0U || local_defs.count(g) != 0U;
        assigned = clash ? supply_.fresh_fun(g) : g;
        letrecs_.push_back(SeenLetrec{g, rhs, assigned});
      }
      if (assigned != g) {
        std::string fresh = assigned;
        ExprPtr ref = mk::global(fresh);
        rhs = rename_global(rhs, g, ref);
        body = rename_global(body, g, ref);
        g = fresh;
      }
      Globals extended = G;
      extended[g] = rhs;
      local_defs[g] = rhs;
      return drive(plug(R, body), {}, rho, extended, &me, "R14");
    }
    if (const auto* k = e->as<Case>()) {
      // R15
      if (const auto* x = k->scrutinee->as<Var>()) {
        note("R15", me, depth);
        NameSet avoid = context_free_vars(R);
        avoid.insert(x->name);
        std::vector<Alt> alts;
        for (const auto& alt : k->alts) {
          Pattern p = alt.pattern;
          ExprPtr body = freshen(p.vars, avoid, alt.body);
          ExprPtr inner = plug(R, body);
          if (auto pe = p.as_expr()) inner = substitute1(x->name, *pe, inner, &supply_);
          alts.push_back(Alt{p, D(inner, rho, G, me, "R15")});
        }
        return mk::case_of(k->scrutinee, std::move(alts));
      }
      // R16
      if (const auto* c = k->scrutinee->as<CtorApp>()) {
        if (auto r = known_constructor(*c, k->alts, R, rho, G, me)) return *r;
      }
      // R17
      if (const auto* n = k->scrutinee->as<IntLit>()) {
        const Alt* chosen = nullptr;
        for (const auto& alt : k->alts)
          if (alt.pattern.kind == Pattern::Kind::Int && alt.pattern.value == n->value) {
            chosen = &alt;
            break;
          }
        if (chosen == nullptr)
          for (const auto& alt : k->alts)
            if (alt.pattern.kind == Pattern::Kind::Default) {
              chosen = &alt;
              break;
            }
        if (chosen != nullptr) {
          note("R17", me, depth);
          return drive(plug(R, chosen->body), {}, rho, G, &me, "R17");
        }
      }
      // R18
      if (is_annoying(k->scrutinee)) {
        note("R18", me, depth);
        NameSet avoid = context_free_vars(R);
        ExprPtr scrut = D(k->scrutinee, rho, G, me, "R18");
        std::vector<Alt> alts;
        for (const auto& alt : k->alts) {
          Pattern p = alt.pattern;
          ExprPtr body = freshen(p.vars, avoid, alt.body);
          alts.push_back(Alt{p, D(plug(R, body), rho, G, me, "R18")});
        }
        return mk::case_of(scrut, std::move(alts));
      }
      // R19
      if (!k->scrutinee->is<CtorApp>() && !k->scrutinee->is<IntLit>()) {
        note("R19", me, depth);
        return drive(k->scrutinee,
                     extend(R, DFrame{DFrame::Kind::CaseScrut, nullptr, Op::Add, k->alts}), rho, G,
                     &me, "R19");
      }
    }
    // R20
    note("R20", me, depth);
    return plug(R, e);
  }

  // (λx̄.f) ē as nested lets; surplus parameters stay abstracted and surplus
  // arguments stay applied.
  ExprPtr beta_to_lets(const Spine& sp) {
    LambdaView v = lambda_view(sp.head);
    std::size_t k = std::min(v.params.size(), sp.args.size());
    std::vector<std::string> params = v.params;
    ExprPtr body = v.body;
    // A binder must not capture free variables of later arguments.
    NameSet later;
    for (std::size_t i = k; i-- > 0;) {
      if (later.count(params[i]) != 0U) {
        std::vector<std::string> one{params[i]};
        NameSet avoid = later;
        std::vector<std::string> rest(params.begin() + static_cast<std::ptrdiff_t>(i) + 1,
                                      params.end());
        avoid.insert(rest.begin(), rest.end());
        body = freshen(one, avoid, mk::lambdas(rest, body));
        body = lambda_view(body).body;
        params[i] = one[0];
      }
      later.insert(sp.args[i]->free_vars().begin(), sp.args[i]->free_vars().end());
    }
    std::vector<std::string> surplus(params.begin() + static_cast<std::ptrdiff_t>(k), params.end());
    ExprPtr result = mk::lambdas(surplus, body);
    for (std::size_t i = k; i-- > 0;) result = mk::let(params[i], sp.args[i], result);
    std::vector<ExprPtr> extra(sp.args.begin() + static_cast<std::ptrdiff_t>(k), sp.args.end());
    return mk::apps(result, extra);
  }

  std::optional<ExprPtr> known_constructor(const CtorApp& c, const std::vector<Alt>& alts,
                                           const DrivingContext& R, const MemoList& rho,
                                           const Globals& G, const Measure& me) {
    const Alt* chosen = nullptr;
    for (const auto& alt : alts)
      if (alt.pattern.kind == Pattern::Kind::Ctor && alt.pattern.ctor == c.ctor &&
          alt.pattern.vars.size() == c.args.size()) {
        chosen = &alt;
        break;
      }
    NameSet avoid = context_free_vars(R);
    for (const auto& a : c.args) avoid.insert(a->free_vars().begin(), a->free_vars().end());
    std::vector<std::string> vars;
    std::vector<ExprPtr> bound;
    ExprPtr body;
    if (chosen != nullptr) {
      vars = chosen->pattern.vars;
      body = freshen(vars, avoid, chosen->body);
      bound = c.args;
    } else {
      for (const auto& alt : alts)
        if (alt.pattern.kind == Pattern::Kind::Default) {
          chosen = &alt;
          break;
        }
      if (chosen == nullptr) return std::nullopt;
      body = chosen->body;
      // Non-value arguments are still evaluated under call-by-value.
      for (const auto& a : c.args) {
        if (a->is_value() || a->is<Var>()) continue;
        vars.push_back(supply_.fresh_name("w"));
        bound.push_back(a);
      }
    }
    note("R16", me, R.size());
    ExprPtr lets = body;
    for (std::size_t i = vars.size(); i-- > 0;) lets = mk::let(vars[i], bound[i], lets);
    return drive(plug(R, lets), {}, rho, G, &me, "R16");
  }

  ExprPtr call_of(const MemoEntry& entry, const ExprPtr& term, const Renaming& sigma = {}) {
    std::map<std::string, ExprPtr> nodes;
    var_nodes(term, nodes);
    std::vector<ExprPtr> args;
    for (const auto& p : entry.params) {
      auto s = sigma.find(p);
      const std::string& x = s == sigma.end() ? p : s->second;
      auto it = nodes.find(x);
      args.push_back(it != nodes.end() ? it->second : mk::var(x));
    }
    return mk::apps(mk::global(entry.h), args);
  }

  // [D⟦f̄⟧/ȳ] D⟦f_g⟧, or nullopt when the split makes no progress.
  std::optional<ExprPtr> drive_split(const ExprPtr& term, const ExprPtr& other, const MemoList& rho,
                                     const Globals& G, const Measure& me, const char* via) {
    SplitResult s = split(term, other, supply_);
    if (s.parts.empty() || is_renaming_of(s.common, term)) return std::nullopt;
    ++report_.generalizations;
    Substitution driven;
    for (std::size_t i = 0; i < s.parts.size(); ++i)
      driven[s.holes[i]] = D(s.parts[i], rho, G, me, via);
    ExprPtr skeleton = D(s.common, rho, G, me, via);
    return substitute(driven, skeleton, &supply_);
  }

  ExprPtr drive_app(const std::string& g, const DrivingContext& R, const MemoList& rho,
                    const Globals& G, const Measure& me) {
    ExprPtr term = plug(R, mk::global(g));
    auto def = G.find(g);
    if (def == G.end()) {
      note("R3/undefined", me, R.size());
      return term;
    }
    // (1) fold against a renaming
    for (auto it = rho.rbegin(); it != rho.rend(); ++it) {
      if (auto sigma = match_renaming(it->term, term)) {
        note("R3/1", me, R.size());
        ++report_.folds;
        return call_of(*it, term, *sigma);
      }
    }
    // (2) mutual embedding: request generalization at the owning activation
    for (auto it = rho.rbegin(); it != rho.rend(); ++it) {
      if (embeds(it->term, term) && embeds(term, it->term)) {
        note("R3/2", me, R.size());
        return mk::marker(it->h, term);
      }
    }
    // (3) downwards generalization
    for (auto it = rho.rbegin(); it != rho.rend(); ++it) {
      if (embeds(it->term, term)) {
        note("R3/3", me, R.size());
        if (auto r = drive_split(term, it->term, rho, G, me, "R3/3")) return *r;
        // The split would only rename the term; keep the call residual.
        note("R3/3-residual", me, R.size());
        return term;
      }
    }
    // (4) memoize and unfold
    MemoEntry entry{supply_.fresh_fun("h"), term, free_vars_ordered(term)};
    for (const auto& old : rho)
      if (embeds(old.term, term))
        report_.memo_violations.push_back(pretty(old.term) + " embeds into " + pretty(term));
    ++report_.memo_entries;
    MemoList extended = rho;
    extended.push_back(entry);
    ExprPtr e = drive(plug(R, def->second), {}, extended, G, &me, "R3/4");
    if (ExprPtr m = find_marker(e, entry.h)) {
      note("R3/4a", me, R.size());
      if (auto r = drive_split(term, m->as<Marker>()->term, rho, G, me, "R3/4a")) return *r;
      e = strip_markers(e, entry.h);
    }
    if (fun_names(e).count(entry.h) != 0U) {
      note("R3/4b", me, R.size());
      return mk::letrec(entry.h, mk::lambdas(entry.params, e), call_of(entry, term));
    }
    note("R3/4c", me, R.size());
    return e;
  }
};

// let x = y in e with y a variable becomes [y/x]e.
ExprPtr inline_renaming_lets(const ExprPtr& e, NameSupply& supply) {
  if (const auto* l = e->as<Let>(); l != nullptr && l->bound->is<Var>())
    return substitute1(l->binder, l->bound, inline_renaming_lets(l->body, supply), &supply);
  return map_children(e, [&](const ExprPtr& c) { return inline_renaming_lets(c, supply); });
}

ExprPtr lift(const ExprPtr& e, std::vector<Definition>& defs) {
  if (const auto* lr = e->as<Letrec>()) {
    defs.push_back(Definition{lr->name, lift(lr->rhs, defs)});
    return lift(lr->body, defs);
  }
  return map_children(e, [&](const ExprPtr& c) { return lift(c, defs); });
}

void ordered_globals(const ExprPtr& e, std::vector<std::string>& out) {
  if (const auto* g = e->as<Global>()) {
    if (std::find(out.begin(), out.end(), g->name) == out.end()) out.push_back(g->name);
    return;
  }
  if (const auto* c = e->as<Case>()) {
    ordered_globals(c->scrutinee, out);
    for (const auto& alt : c->alts) ordered_globals(alt.body, out);
    return;
  }
  map_children(e, [&](const ExprPtr& c) {
    ordered_globals(c, out);
    return c;
  });
}

}  // namespace

ExprPtr drive_expression(const ExprPtr& e, const Globals& globals, NameSupply& supply,
                         const DriveOptions& options, DriveReport* report,
                         Globals* local_globals) {
  DriveReport scratch;
  DriveReport& rep = report != nullptr ? *report : scratch;
  NameSet initial;
  collect_var_names(e, initial);
  for (const auto& [g, v] : globals) collect_var_names(v, initial);
  Driver d(supply, options, rep, initial);
  ExprPtr out = d.drive(e, {}, {}, globals, nullptr, "top");
  if (contains_marker(out)) throw DriverError("generalization marker escaped its owner");
  if (local_globals != nullptr) *local_globals = d.local_defs;
  return out;
}

Program lift_letrecs(const std::string& entry, const ExprPtr& entry_value) {
  Program p;
  p.entry = entry;
  std::vector<Definition> defs;
  ExprPtr main = lift(entry_value, defs);
  p.defs = std::move(defs);
  p.defs.push_back(Definition{entry, main});
  return p;
}

Program supercompile(const Program& p, const DriveOptions& options, DriveReport* report) {
  const Definition* entry = p.find(p.entry);
  if (entry == nullptr) throw DriverError("entry definition '" + p.entry + "' not found");
  Globals G = p.globals();
  NameSet taken;
  for (const auto& d : p.defs) {
    taken.insert(d.name);
    collect_var_names(d.value, taken);
  }
  taken.insert(kFixName);
  NameSupply supply(taken);

  LambdaView view = lambda_view(entry->value);
  Globals locals;
  ExprPtr body = drive_expression(view.body, G, supply, options, report, &locals);
  ExprPtr value = mk::lambdas(view.params, inline_renaming_lets(body, supply));

  Program out;
  out.entry = p.entry;
  if (options.lift) {
    out = lift_letrecs(p.entry, value);
  } else {
    out.defs.push_back(Definition{p.entry, value});
  }

  // Pull in definitions the residual still refers to.
  std::deque<std::string> work;
  for (const auto& d : out.defs)
    for (const auto& g : fun_names(d.value)) work.push_back(g);
  while (!work.empty()) {
    std::string g = work.front();
    work.pop_front();
    if (out.find(g) != nullptr || g == kFixName) continue;
    ExprPtr v;
    if (auto it = locals.find(g); it != locals.end()) {
      v = it->second;
    } else if (const Definition* d = p.find(g)) {
      v = d->value;
    } else {
      continue;
    }
    if (options.lift) {
      std::vector<Definition> extra;
      v = lift(v, extra);
      for (auto& d : extra) {
        for (const auto& f : fun_names(d.value)) work.push_back(f);
        out.defs.insert(out.defs.begin(), d);
      }
    }
    out.defs.insert(out.defs.end() - 1, Definition{g, v});
    for (const auto& f : fun_names(v)) work.push_back(f);
  }

  // Canonical names h1, h2, ... for generated functions, by first use.
  NameSet reserved;
  for (const auto& d : p.defs) reserved.insert(d.name);
  for (const auto& [g, v] : locals) reserved.insert(g);
  std::vector<std::string> order;
  std::vector<std::string> queue{p.entry};
  NameSet visited;
  while (!queue.empty()) {
    std::string g = queue.front();
    queue.erase(queue.begin());
    if (!visited.insert(g).second) continue;
    const Definition* d = out.find(g);
    if (d == nullptr) continue;
    std::vector<std::string> refs;
    ordered_globals(d->value, refs);
    for (const auto& r : refs) {
      if (reserved.count(r) == 0U && std::find(order.begin(), order.end(), r) == order.end())
        order.push_back(r);
      queue.push_back(r);
    }
  }
  std::map<std::string, std::string> names;
  std::size_t counter = 0;
  for (const auto& g : order) {
    std::string candidate;
    do {
      candidate = "h" + std::to_string(++counter);
    } while (reserved.count(candidate) != 0U);
    names[g] = candidate;
  }
  Program renamed;
  renamed.entry = out.entry;
  for (const auto& g : order) {
    const Definition* d = out.find(g);
    if (d != nullptr) renamed.defs.push_back(Definition{names[g], rename_globals(d->value, names)});
  }
  for (const auto& d : out.defs) {
    if (names.count(d.name) != 0U) continue;
    if (d.name == out.entry) continue;
    renamed.defs.push_back(Definition{d.name, rename_globals(d.value, names)});
  }
  for (const auto& d : out.defs)
    if (d.name == out.entry) renamed.defs.push_back(Definition{d.name, rename_globals(d.value, names)});
  return renamed;
}

}  // namespace scp
