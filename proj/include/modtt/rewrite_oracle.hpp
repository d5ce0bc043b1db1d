#pragma once

// Reference equality by rewriting: terms are reduced to β-normal form with
// substitution, using the computation equations directly as rewrite rules
// (bind β, throw propagation, bind associativity, if/case/fold β, the
// partial-function iso). Shares no code with the normalizer; intended for
// small terms in tests. No η rules: for closed terms at Dyn(bool) and
// ○Dyn(bool), β-normal forms are already canonical.

#include <cstdint>
#include <stdexcept>

#include "modtt/syntax.hpp"

namespace modtt {

struct OracleTimeout : std::runtime_error {
  using std::runtime_error::runtime_error;
};

class RewriteOracle {
 public:
  explicit RewriteOracle(std::uint64_t max_steps = 200'000) : budget_(max_steps) {}

  ValPtr normalize(const ValPtr& v) {
    using namespace build;
    return std::visit(
        overloaded{
            [&](const val::App& x) {
              auto f = normalize(x.fn);
              auto a = normalize(x.arg);
              if (auto* l = std::get_if<val::Lam>(&f->node)) {
                tick();
                return normalize(subst(l->body, a));
              }
              return app(f, a);
            },
            [&](const val::Fst& x) {
              auto p = normalize(x.pair);
              if (auto* q = std::get_if<val::Pair>(&p->node)) {
                tick();
                return q->fst;
              }
              return fst(p);
            },
            [&](const val::Snd& x) {
              auto p = normalize(x.pair);
              if (auto* q = std::get_if<val::Pair>(&p->node)) {
                tick();
                return q->snd;
              }
              return snd(p);
            },
            [&](const val::OutExt& x) {
              auto e = normalize(x.ext);
              if (auto* i = std::get_if<val::InExt>(&e->node)) {
                tick();
                return i->payload;
              }
              return out_ext(e);
            },
            [&](const val::Lam& x) { return lam(normalize(x.body)); },
            [&](const val::Pair& x) { return pair(normalize(x.fst), normalize(x.snd)); },
            [&](const val::InExt& x) { return in_ext(normalize(x.static_part), normalize(x.payload)); },
            [&](const val::Susp& x) { return susp(normalize(x.body), x.ann); },
            [&](const val::PFun& x) { return pfun(normalize(x.body)); },
            [&](const val::Cons& x) { return cons(normalize(x.head), normalize(x.tail)); },
            [&](const val::TypeCode& x) {
              return std::visit(overloaded{
                                    [&](const tc::Bool&) { return v; },
                                    [&](const tc::Arrow& a) { return arrow(normalize(a.dom), normalize(a.cod)); },
                                    [&](const tc::List& l) { return list_ty(normalize(l.elem)); },
                                    [&](const tc::Prod& p) { return prod(normalize(p.left), normalize(p.right)); },
                                },
                                x.code);
            },
            [&](const auto&) { return v; },
        },
        v->node);
  }

  CmpPtr normalize(const CmpPtr& m) {
    using namespace build;
    return std::visit(
        overloaded{
            [&](const cmp::Ret& x) { return ret(normalize(x.value)); },
            [&](const cmp::Bind& x) {
              auto s = normalize(x.scrutinee);
              if (auto* su = std::get_if<val::Susp>(&s->node)) {
                const auto& inner = su->body->node;
                if (auto* r = std::get_if<cmp::Ret>(&inner)) {
                  tick();
                  return normalize(subst(x.body, r->value));
                }
                if (std::holds_alternative<cmp::Throw>(inner)) {
                  tick();
                  return throw_();
                }
                if (auto* b = std::get_if<cmp::Bind>(&inner)) {
                  tick();
                  return normalize(bind(b->scrutinee, bind(susp(b->body, su->ann), shift(x.body, 1, 1))));
                }
              }
              return bind(s, normalize(x.body));
            },
            [&](const cmp::If& x) {
              auto c = normalize(x.cond);
              if (std::holds_alternative<val::Tt>(c->node)) {
                tick();
                return normalize(x.then_branch);
              }
              if (std::holds_alternative<val::Ff>(c->node)) {
                tick();
                return normalize(x.else_branch);
              }
              return if_(c, normalize(x.then_branch), normalize(x.else_branch));
            },
            [&](const cmp::CaseList& x) {
              auto s = normalize(x.scrutinee);
              if (std::holds_alternative<val::Nil>(s->node)) {
                tick();
                return normalize(x.nil_branch);
              }
              if (auto* c = std::get_if<val::Cons>(&s->node)) {
                tick();
                return normalize(subst_many(x.cons_branch, {c->tail, c->head}));
              }
              return case_list(s, normalize(x.nil_branch), normalize(x.cons_branch));
            },
            [&](const cmp::AppP& x) {
              auto f = normalize(x.fn);
              auto a = normalize(x.arg);
              if (auto* p = std::get_if<val::PFun>(&f->node)) {
                tick();
                return normalize(subst(p->body, a));
              }
              return app_p(f, a);
            },
            [&](const cmp::Fold& x) {
              auto s = normalize(x.scrutinee);
              auto init = normalize(x.init);
              if (std::holds_alternative<val::Nil>(s->node)) {
                tick();
                return ret(init);
              }
              if (auto* c = std::get_if<val::Cons>(&s->node)) {
                tick();
                auto first = susp(subst_many(x.step, {c->head, init}), x.ann);
                auto rest = fold(shift(c->tail, 1), var(0), shift(x.step, 1, 2), x.ann);
                return normalize(bind(first, rest));
              }
              return fold(s, init, normalize(x.step), x.ann);
            },
            [&](const auto&) { return m; },
        },
        m->node);
  }

 private:
  std::uint64_t budget_;

  void tick() {
    if (budget_ == 0) throw OracleTimeout("rewrite oracle exceeded its step budget");
    --budget_;
  }
};

/// True iff `a` and `b` have the same normal form under rewriting; at the
/// static phase the statically connected sorts are identified outright.
inline bool rewrite_oracle_equal(const Context& ctx, const ValPtr& a, const ValPtr& b, const SigPtr& s,
                                 std::uint64_t max_steps = 200'000) {
  if (phase_of(ctx) == Phase::Static &&
      (std::holds_alternative<sig::Dyn>(s->node) || std::holds_alternative<sig::Cmp>(s->node)))
    return true;
  RewriteOracle o(max_steps);
  return same(o.normalize(a), o.normalize(b));
}

inline bool rewrite_oracle_equal(const Context& ctx, const CmpPtr& a, const CmpPtr& b, const SigPtr& s,
                                 std::uint64_t max_steps = 200'000) {
  (void)s;
  if (phase_of(ctx) == Phase::Static) return true;
  RewriteOracle o(max_steps);
  return same(o.normalize(a), o.normalize(b));
}

}  // namespace modtt
