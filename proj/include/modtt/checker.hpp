#pragma once

// Bidirectional type checking. Introduction forms are checked, elimination
// forms synthesize. Checking also annotates: every Susp and Fold in the
// output carries its signature, which the normalizer needs to read back
// stuck computations in bind position.

#include <optional>
#include <utility>

#include "modtt/diagnostics.hpp"
#include "modtt/nbe.hpp"
#include "modtt/print.hpp"
#include "modtt/syntax.hpp"

namespace modtt {

namespace checker_detail {

inline bool is_dyn_sort(const SigPtr& s) {
  return std::holds_alternative<sig::Dyn>(s->node) || std::holds_alternative<sig::Cmp>(s->node);
}

template <class C>
const C* code_as(const ValPtr& nf) {
  if (auto* t = std::get_if<val::TypeCode>(&nf->node)) return std::get_if<C>(&t->code);
  return nullptr;
}

class Checker {
 public:
  // ---- signatures --------------------------------------------------------

  SigPtr sig(const Context& ctx, const SigPtr& s) {
    using namespace build;
    return std::visit(
        overloaded{
            [&](const sig::Type&) { return s; },
            [&](const sig::Dyn& d) { return dyn(check(ctx, d.type, sig_type())); },
            [&](const sig::Pi& p) {
              auto a = sig(ctx, p.dom);
              return pi(a, sig(ctx.extend(a), p.cod));
            },
            [&](const sig::Sigma& p) {
              auto a = sig(ctx, p.fst);
              return sigma(a, sig(ctx.extend(a), p.snd));
            },
            [&](const sig::Ext& e) {
              auto base = sig(ctx, e.base);
              return ext(base, static_position(ctx.open_static(), e.static_val, base));
            },
            [&](const sig::Cmp& c) { return cmp_sig(sig(ctx, c.body)); },
        },
        s->node);
  }

  // ---- values ------------------------------------------------------------

  ValPtr check(const Context& ctx, const ValPtr& v, const SigPtr& s) {
    if (phase_of(ctx) == Phase::Static && is_dyn_sort(s)) {
      // Under the static open every Dyn/○ sort is a singleton: any term of
      // some such sort is accepted.
      if (std::holds_alternative<val::Star>(v->node)) return v;
      try {
        return check_inner(ctx, v, s);
      } catch (const TypeErrorException&) {
        if (auto r = dyn_sorted(ctx, v)) return *r;
        throw;
      }
    }
    return check_inner(ctx, v, s);
  }

  std::pair<ValPtr, SigPtr> synth(const Context& ctx, const ValPtr& v) {
    using namespace build;
    return std::visit(
        overloaded{
            [&](const val::Var& x) -> std::pair<ValPtr, SigPtr> {
              try {
                return {v, lookup(ctx, x.index)};
              } catch (const ScopeError& e) {
                fail(ErrorKind::Scope, e.what());
              }
            },
            [&](const val::App& x) -> std::pair<ValPtr, SigPtr> {
              auto [f, fs] = synth(ctx, x.fn);
              auto* p = std::get_if<sig::Pi>(&fs->node);
              if (!p) fail(ErrorKind::NotAFunction, "applied value is not a module function", "(Pi _ _)", to_string(fs));
              auto a = check(ctx, x.arg, p->dom);
              return {app(f, a), subst(p->cod, a)};
            },
            [&](const val::Fst& x) -> std::pair<ValPtr, SigPtr> {
              auto [p, ps] = synth(ctx, x.pair);
              if (auto* s = std::get_if<sig::Sigma>(&ps->node)) return {fst(p), s->fst};
              auto [l, r] = prod_parts(ctx, ps);
              return {fst(p), dyn(l)};
            },
            [&](const val::Snd& x) -> std::pair<ValPtr, SigPtr> {
              auto [p, ps] = synth(ctx, x.pair);
              if (auto* s = std::get_if<sig::Sigma>(&ps->node)) return {snd(p), subst(s->snd, fst(p))};
              auto [l, r] = prod_parts(ctx, ps);
              return {snd(p), dyn(r)};
            },
            [&](const val::OutExt& x) -> std::pair<ValPtr, SigPtr> {
              auto [e, es] = synth(ctx, x.ext);
              auto* ex = std::get_if<sig::Ext>(&es->node);
              if (!ex) fail(ErrorKind::Mismatch, "extent elimination on a value without an extent signature",
                            "(Ext _ _)", to_string(es));
              return {out_ext(e), ex->base};
            },
            [&](const val::Susp& x) -> std::pair<ValPtr, SigPtr> {
              if (x.ann) {
                auto a = sig(ctx, x.ann);
                return {susp(check(ctx, x.body, a), a), cmp_sig(a)};
              }
              auto [m, ms] = synth(ctx, x.body);
              return {susp(m, ms), cmp_sig(ms)};
            },
            [&](const val::Tt&) -> std::pair<ValPtr, SigPtr> { return {v, dyn_bool()}; },
            [&](const val::Ff&) -> std::pair<ValPtr, SigPtr> { return {v, dyn_bool()}; },
            [&](const val::Cons& x) -> std::pair<ValPtr, SigPtr> {
              auto [h, hs] = synth(ctx, x.head);
              auto* d = std::get_if<sig::Dyn>(&hs->node);
              if (!d) fail(ErrorKind::Mismatch, "list element is not a program", "(Dyn _)", to_string(hs));
              auto ls = dyn(list_ty(d->type));
              return {cons(h, check(ctx, x.tail, ls)), ls};
            },
            [&](const val::TypeCode&) -> std::pair<ValPtr, SigPtr> {
              return {check(ctx, v, sig_type()), sig_type()};
            },
            [&](const auto&) -> std::pair<ValPtr, SigPtr> {
              fail(ErrorKind::NeedsAnnotation, "cannot synthesize a signature for " + to_string(v));
            },
        },
        v->node);
  }

  // ---- computations ------------------------------------------------------

  CmpPtr check(const Context& ctx, const CmpPtr& m, const SigPtr& s) {
    if (phase_of(ctx) == Phase::Static) {
      if (std::holds_alternative<cmp::Star>(m->node)) return m;
      try {
        return check_inner(ctx, m, s);
      } catch (const TypeErrorException&) {
        try {
          return synth(ctx, m).first;
        } catch (const TypeErrorException&) {
        }
        throw;
      }
    }
    return check_inner(ctx, m, s);
  }

  std::pair<CmpPtr, SigPtr> synth(const Context& ctx, const CmpPtr& m) {
    using namespace build;
    return std::visit(
        overloaded{
            [&](const cmp::Ret& x) -> std::pair<CmpPtr, SigPtr> {
              auto [v, s] = synth(ctx, x.value);
              return {ret(v), s};
            },
            [&](const cmp::Bind& x) -> std::pair<CmpPtr, SigPtr> {
              auto [v, inner] = bind_scrutinee(ctx, x.scrutinee);
              auto ext_ctx = ctx.extend(inner);
              auto [body, bs] = synth(ext_ctx, x.body);
              return {bind(v, body), strengthen(ext_ctx, bs, 1)};
            },
            [&](const cmp::If& x) -> std::pair<CmpPtr, SigPtr> {
              auto c = check(ctx, x.cond, dyn_bool());
              try {
                auto [t, ts] = synth(ctx, x.then_branch);
                return {if_(c, t, check(ctx, x.else_branch, ts)), ts};
              } catch (const TypeErrorException& e) {
                if (e.error.kind != ErrorKind::NeedsAnnotation) throw;
              }
              auto [e, es] = synth(ctx, x.else_branch);
              return {if_(c, check(ctx, x.then_branch, es), e), es};
            },
            [&](const cmp::CaseList& x) -> std::pair<CmpPtr, SigPtr> {
              auto [sv, elem] = list_scrutinee(ctx, x.scrutinee);
              auto cons_ctx = ctx.extend(dyn(elem)).extend(dyn(list_ty(shift(elem, 1))));
              try {
                auto [n, ns] = synth(ctx, x.nil_branch);
                return {case_list(sv, n, check(cons_ctx, x.cons_branch, shift(ns, 2))), ns};
              } catch (const TypeErrorException& e) {
                if (e.error.kind != ErrorKind::NeedsAnnotation) throw;
              }
              auto [c, cs] = synth(cons_ctx, x.cons_branch);
              auto s = strengthen(cons_ctx, cs, 2);
              return {case_list(sv, check(ctx, x.nil_branch, s), c), s};
            },
            [&](const cmp::AppP& x) -> std::pair<CmpPtr, SigPtr> {
              auto [f, fs] = synth(ctx, x.fn);
              auto* d = std::get_if<sig::Dyn>(&fs->node);
              if (!d) fail(ErrorKind::NotAFunction, "applied value is not a program", "(Dyn (arrow _ _))", to_string(fs));
              auto nf = nbe::normal_type(ctx, d->type);
              auto* a = code_as<tc::Arrow>(nf);
              if (!a) fail(ErrorKind::NotAFunction, "applied program is not a partial function", "(arrow _ _)",
                           to_string(nf));
              return {app_p(f, check(ctx, x.arg, dyn(a->dom))), dyn(a->cod)};
            },
            [&](const cmp::Fold& x) -> std::pair<CmpPtr, SigPtr> {
              auto [sv, elem] = list_scrutinee(ctx, x.scrutinee);
              SigPtr acc;
              ValPtr init;
              if (x.ann) {
                acc = sig(ctx, x.ann);
                init = check(ctx, x.init, acc);
              } else {
                std::tie(init, acc) = synth(ctx, x.init);
              }
              auto step_ctx = ctx.extend(acc).extend(dyn(shift(elem, 1)));
              auto step = check(step_ctx, x.step, shift(acc, 2));
              return {fold(sv, init, step, acc), acc};
            },
            [&](const auto&) -> std::pair<CmpPtr, SigPtr> {
              fail(ErrorKind::NeedsAnnotation, "cannot synthesize a signature for " + to_string(m));
            },
        },
        m->node);
  }

 private:
  ValPtr check_inner(const Context& ctx, const ValPtr& v, const SigPtr& s) {
    using namespace build;
    auto mismatch = [&](const std::string& what) -> ValPtr {
      fail(ErrorKind::Mismatch, what + " checked against an incompatible signature", to_string(s), to_string(v));
    };
    return std::visit(
        overloaded{
            [&](const val::Lam& x) -> ValPtr {
              auto* p = std::get_if<sig::Pi>(&s->node);
              if (!p) return mismatch("lambda");
              return lam(check(ctx.extend(p->dom), x.body, p->cod));
            },
            [&](const val::Pair& x) -> ValPtr {
              if (auto* p = std::get_if<sig::Sigma>(&s->node)) {
                auto a = check(ctx, x.fst, p->fst);
                return pair(a, check(ctx, x.snd, subst(p->snd, a)));
              }
              if (auto* d = std::get_if<sig::Dyn>(&s->node)) {
                auto nf = nbe::normal_type(ctx, d->type);
                if (auto* pr = code_as<tc::Prod>(nf))
                  return pair(check(ctx, x.fst, dyn(pr->left)), check(ctx, x.snd, dyn(pr->right)));
              }
              return mismatch("pair");
            },
            [&](const val::InExt& x) -> ValPtr {
              auto* e = std::get_if<sig::Ext>(&s->node);
              if (!e) return mismatch("extent introduction");
              auto st = ctx.open_static();
              auto sp = check(st, x.static_part, e->base);
              auto payload = check(ctx, x.payload, e->base);
              if (!nbe::conv_val(st, sp, e->static_val, e->base))
                fail(ErrorKind::ExtentSideCondition, "declared static part disagrees with the extent",
                     to_string(nbe::normal_val(st, e->static_val, e->base)), to_string(nbe::normal_val(st, sp, e->base)));
              if (!nbe::conv_val(st, payload, e->static_val, e->base))
                fail(ErrorKind::ExtentSideCondition, "static part of the module disagrees with the extent",
                     to_string(nbe::normal_val(st, e->static_val, e->base)),
                     to_string(nbe::normal_val(st, payload, e->base)));
              return in_ext(sp, payload);
            },
            [&](const val::Susp& x) -> ValPtr {
              auto* c = std::get_if<sig::Cmp>(&s->node);
              if (!c) return mismatch("suspension");
              if (x.ann) {
                auto a = sig(ctx, x.ann);
                if (!nbe::conv_sig(ctx, a, c->body))
                  fail(ErrorKind::Mismatch, "suspension annotation disagrees with the expected signature",
                       to_string(c->body), to_string(a));
              }
              return susp(check(ctx, x.body, c->body), c->body);
            },
            [&](const val::Tt&) -> ValPtr { return expect_code<tc::Bool>(ctx, v, s, "(Dyn bool)"); },
            [&](const val::Ff&) -> ValPtr { return expect_code<tc::Bool>(ctx, v, s, "(Dyn bool)"); },
            [&](const val::Nil&) -> ValPtr { return expect_code<tc::List>(ctx, v, s, "(Dyn (list _))"); },
            [&](const val::PFun& x) -> ValPtr {
              auto* d = std::get_if<sig::Dyn>(&s->node);
              if (!d) return mismatch("partial function");
              auto nf = nbe::normal_type(ctx, d->type);
              auto* a = code_as<tc::Arrow>(nf);
              if (!a) return mismatch("partial function");
              return pfun(check(ctx.extend(dyn(a->dom)), x.body, dyn(shift(a->cod, 1))));
            },
            [&](const val::Cons& x) -> ValPtr {
              auto* d = std::get_if<sig::Dyn>(&s->node);
              if (!d) return mismatch("list");
              auto nf = nbe::normal_type(ctx, d->type);
              auto* l = code_as<tc::List>(nf);
              if (!l) return mismatch("list");
              return cons(check(ctx, x.head, dyn(l->elem)), check(ctx, x.tail, s));
            },
            [&](const val::OutExt& x) -> ValPtr {
              // A literal introduction names its own static part.
              if (auto* i = std::get_if<val::InExt>(&x.ext->node))
                return out_ext(check(ctx, x.ext, ext(s, i->static_part)));
              auto [t, ts] = synth(ctx, v);
              if (!nbe::conv_sig(ctx, ts, s))
                fail(ErrorKind::Mismatch, "signature mismatch", to_string(nbe::normal_sig(ctx, s)),
                     to_string(nbe::normal_sig(ctx, ts)));
              return t;
            },
            [&](const val::Star&) -> ValPtr {
              fail(ErrorKind::PhaseViolation, "the connectivity point * exists only under the static open at Dyn/Cmp sorts",
                   to_string(s), "*");
            },
            [&](const val::TypeCode& x) -> ValPtr {
              if (!std::holds_alternative<sig::Type>(s->node)) return mismatch("type code");
              auto ty = sig_type();
              return std::visit(overloaded{
                                    [&](const tc::Bool&) { return v; },
                                    [&](const tc::Arrow& a) {
                                      return arrow(check(ctx, a.dom, ty), check(ctx, a.cod, ty));
                                    },
                                    [&](const tc::List& l) { return list_ty(check(ctx, l.elem, ty)); },
                                    [&](const tc::Prod& p) {
                                      return prod(check(ctx, p.left, ty), check(ctx, p.right, ty));
                                    },
                                },
                                x.code);
            },
            [&](const auto&) -> ValPtr {
              auto [t, ts] = synth(ctx, v);
              if (!nbe::conv_sig(ctx, ts, s))
                fail(ErrorKind::Mismatch, "signature mismatch", to_string(nbe::normal_sig(ctx, s)),
                     to_string(nbe::normal_sig(ctx, ts)));
              return t;
            },
        },
        v->node);
  }

  CmpPtr check_inner(const Context& ctx, const CmpPtr& m, const SigPtr& s) {
    using namespace build;
    return std::visit(
        overloaded{
            [&](const cmp::Ret& x) { return ret(check(ctx, x.value, s)); },
            [&](const cmp::Bind& x) {
              auto [v, inner] = bind_scrutinee(ctx, x.scrutinee);
              return bind(v, check(ctx.extend(inner), x.body, shift(s, 1)));
            },
            [&](const cmp::Throw&) { return m; },
            [&](const cmp::If& x) {
              auto c = check(ctx, x.cond, dyn_bool());
              return if_(c, check(ctx, x.then_branch, s), check(ctx, x.else_branch, s));
            },
            [&](const cmp::CaseList& x) {
              auto [sv, elem] = list_scrutinee(ctx, x.scrutinee);
              auto cons_ctx = ctx.extend(dyn(elem)).extend(dyn(list_ty(shift(elem, 1))));
              return case_list(sv, check(ctx, x.nil_branch, s), check(cons_ctx, x.cons_branch, shift(s, 2)));
            },
            [&](const cmp::Star&) -> CmpPtr {
              fail(ErrorKind::PhaseViolation, "the connectivity point * exists only under the static open",
                   to_string(s), "*");
            },
            [&](const auto&) -> CmpPtr {
              auto [t, ts] = synth(ctx, m);
              if (!nbe::conv_sig(ctx, ts, s))
                fail(ErrorKind::Mismatch, "signature mismatch", to_string(nbe::normal_sig(ctx, s)),
                     to_string(nbe::normal_sig(ctx, ts)));
              return t;
            },
        },
        m->node);
  }

  template <class C>
  ValPtr expect_code(const Context& ctx, const ValPtr& v, const SigPtr& s, const char* expected) {
    auto* d = std::get_if<sig::Dyn>(&s->node);
    if (d && code_as<C>(nbe::normal_type(ctx, d->type))) return v;
    fail(ErrorKind::Mismatch, to_string(v) + " does not have the expected signature", to_string(s),
         std::string(expected));
  }

  std::pair<ValPtr, ValPtr> prod_parts(const Context& ctx, const SigPtr& s) {
    auto* d = std::get_if<sig::Dyn>(&s->node);
    if (d) {
      auto nf = nbe::normal_type(ctx, d->type);
      if (auto* p = code_as<tc::Prod>(nf)) return {p->left, p->right};
    }
    fail(ErrorKind::NotAPair, "projection from a value that is not a pair", "(Sigma _ _)", to_string(s));
  }

  std::pair<ValPtr, SigPtr> bind_scrutinee(const Context& ctx, const ValPtr& v) {
    auto [t, ts] = synth(ctx, v);
    auto* c = std::get_if<sig::Cmp>(&ts->node);
    if (!c) fail(ErrorKind::Mismatch, "bind scrutinee is not a computation", "(Cmp _)", to_string(ts));
    return {t, c->body};
  }

  std::pair<ValPtr, ValPtr> list_scrutinee(const Context& ctx, const ValPtr& v) {
    auto [t, ts] = synth(ctx, v);
    if (auto* d = std::get_if<sig::Dyn>(&ts->node)) {
      auto nf = nbe::normal_type(ctx, d->type);
      if (auto* l = code_as<tc::List>(nf)) return {t, l->elem};
    }
    fail(ErrorKind::Mismatch, "scrutinee is not a list", "(Dyn (list _))", to_string(ts));
  }

  // Moves a signature out from under `by` binders; normalizes first if a
  // bound variable occurs syntactically.
  SigPtr strengthen(const Context& inner, const SigPtr& s, std::size_t by) {
    try {
      return unshift(s, by);
    } catch (const InternalError&) {
    }
    try {
      return unshift(nbe::normal_sig(inner, s), by);
    } catch (const InternalError&) {
      fail(ErrorKind::NeedsAnnotation, "result signature depends on a locally bound module", {}, to_string(s));
    }
  }

  // A value in a static position (a type code or an extent's static part);
  // a program there is reported as dynamic-in-static.
  ValPtr static_position(const Context& ctx, const ValPtr& v, const SigPtr& s) {
    try {
      return check(ctx, v, s);
    } catch (const TypeErrorException& e) {
      if (!is_dyn_sort(s)) {
        std::optional<SigPtr> got;
        try {
          got = synth(ctx, v).second;
        } catch (const TypeErrorException&) {
        }
        if (got && is_dyn_sort(*got))
          fail(ErrorKind::DynamicInStatic, "a program or computation is used where static content is required",
               to_string(s), to_string(*got));
      }
      throw;
    }
  }

  std::optional<ValPtr> dyn_sorted(const Context& ctx, const ValPtr& v) {
    if (std::holds_alternative<val::Tt>(v->node) || std::holds_alternative<val::Ff>(v->node) ||
        std::holds_alternative<val::Nil>(v->node))
      return v;
    try {
      auto [t, ts] = synth(ctx, v);
      if (is_dyn_sort(ts)) return t;
    } catch (const TypeErrorException&) {
    }
    return std::nullopt;
  }
};

template <class F>
std::optional<TypeError> capture(F&& f) {
  try {
    f();
    return std::nullopt;
  } catch (const TypeErrorException& e) {
    return e.error;
  }
}

}  // namespace checker_detail

// ---------------------------------------------------------------------------
// Throwing, annotating entry points (TypeErrorException on failure).

inline SigPtr annotate_sig(const Context& ctx, const SigPtr& s) { return checker_detail::Checker{}.sig(ctx, s); }

inline ValPtr annotate_val(const Context& ctx, const ValPtr& v, const SigPtr& s) {
  checker_detail::Checker c;
  return c.check(ctx, v, c.sig(ctx, s));
}

inline CmpPtr annotate_cmp(const Context& ctx, const CmpPtr& m, const SigPtr& s) {
  checker_detail::Checker c;
  return c.check(ctx, m, c.sig(ctx, s));
}

inline std::pair<ValPtr, SigPtr> annotate_synth_val(const Context& ctx, const ValPtr& v) {
  return checker_detail::Checker{}.synth(ctx, v);
}

inline std::pair<CmpPtr, SigPtr> annotate_synth_cmp(const Context& ctx, const CmpPtr& m) {
  return checker_detail::Checker{}.synth(ctx, m);
}

// ---------------------------------------------------------------------------
// Reporting entry points.

inline std::optional<TypeError> check_sig(const Context& ctx, const SigPtr& s) {
  return checker_detail::capture([&] { annotate_sig(ctx, s); });
}

inline std::optional<TypeError> check_val(const Context& ctx, const ValPtr& v, const SigPtr& s) {
  return checker_detail::capture([&] { annotate_val(ctx, v, s); });
}

inline std::optional<TypeError> check_cmp(const Context& ctx, const CmpPtr& m, const SigPtr& s) {
  return checker_detail::capture([&] { annotate_cmp(ctx, m, s); });
}

inline Result<SigPtr> synth_val(const Context& ctx, const ValPtr& v) {
  try {
    return annotate_synth_val(ctx, v).second;
  } catch (const TypeErrorException& e) {
    return e.error;
  }
}

inline Result<SigPtr> synth_cmp(const Context& ctx, const CmpPtr& m) {
  try {
    return annotate_synth_cmp(ctx, m).second;
  } catch (const TypeErrorException& e) {
    return e.error;
  }
}

}  // namespace modtt
