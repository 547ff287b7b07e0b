#include "scp/analysis.hpp"

#include <algorithm>
#include <iterator>

namespace scp {

NameSet strict_vars(const ExprPtr& e) {
  return std::visit(
      [&](const auto& n) -> NameSet {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, Var>) {
          return {n.name};
        } else if constexpr (std::is_same_v<T, App>) {
          NameSet s = strict_vars(n.fun);
          NameSet a = strict_vars(n.arg);
          s.insert(a.begin(), a.end());
          return s;
        } else if constexpr (std::is_same_v<T, CtorApp>) {
          NameSet s;
          for (const auto& a : n.args) {
            NameSet sa = strict_vars(a);
            s.insert(sa.begin(), sa.end());
          }
          return s;
        } else if constexpr (std::is_same_v<T, PrimOp>) {
          NameSet s = strict_vars(n.lhs);
          NameSet r = strict_vars(n.rhs);
          s.insert(r.begin(), r.end());
          return s;
        } else if constexpr (std::is_same_v<T, Let>) {
          NameSet s = strict_vars(n.bound);
          NameSet b = strict_vars(n.body);
          b.erase(n.binder);
          s.insert(b.begin(), b.end());
          return s;
        } else if constexpr (std::is_same_v<T, Letrec>) {
          return strict_vars(n.body);
        } else if constexpr (std::is_same_v<T, Case>) {
          NameSet s = strict_vars(n.scrutinee);
          NameSet common;
          bool first = true;
          for (const auto& alt : n.alts) {
            NameSet b = strict_vars(alt.body);
            for (const auto& x : alt.pattern.vars) b.erase(x);
            if (first) {
              common = std::move(b);
              first = false;
            } else {
              NameSet meet;
              std::set_intersection(common.begin(), common.end(), b.begin(), b.end(),
                                    std::inserter(meet, meet.begin()));
              common = std::move(meet);
            }
          }
          s.insert(common.begin(), common.end());
          return s;
        } else {
          // Integers, globals, lambdas and markers.
          return {};
        }
      },
      e->node());
}

bool is_annoying(const ExprPtr& e) {
  if (e->is<Var>()) return true;
  if (const auto* p = e->as<PrimOp>()) {
    bool l = p->lhs->is<IntLit>() || is_annoying(p->lhs);
    bool r = p->rhs->is<IntLit>() || is_annoying(p->rhs);
    return l && r && !(p->lhs->is<IntLit>() && p->rhs->is<IntLit>());
  }
  if (e->is<App>()) {
    ExprPtr head = spine_of(e).head;
    return is_annoying(head);
  }
  return false;
}

}  // namespace scp
