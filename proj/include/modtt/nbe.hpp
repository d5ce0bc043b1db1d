#pragma once

// Normalization by evaluation.
//
// Evaluation is untyped and phase-independent: closures are host functions,
// extent introduction/elimination are the identity on semantic values, and
// computations evaluate to right-nested bind spines (monad β, throw
// propagation and bind associativity are applied eagerly).
//
// Read-back is typed and phase-sensitive. At the static phase every value of
// a Dyn(t) or Cmp(σ) sort reads back as the connectivity point `*`, and a
// neutral whose type is an extent Ext(σ, W) is replaced by W. The sort Type
// is a kind: type codes are always compared statically, so Dyn(t) ≡ Dyn(t')
// holds whenever t and t' agree under the static open.

#include <functional>
#include <memory>
#include <optional>
#include <utility>
#include <variant>
#include <vector>

#include "modtt/print.hpp"
#include "modtt/syntax.hpp"

namespace modtt::nbe {

struct SemNode;
struct SemCmpNode;
struct SemSigNode;
struct NeNode;
using SemVal = std::shared_ptr<const SemNode>;
using SemCmp = std::shared_ptr<const SemCmpNode>;
using SemSig = std::shared_ptr<const SemSigNode>;
using Neutral = std::shared_ptr<const NeNode>;

namespace ne {
struct Var { std::size_t level; };
struct App { Neutral fn; SemVal arg; };
struct Fst { Neutral pair; };
struct Snd { Neutral pair; };
}  // namespace ne

struct NeNode {
  std::variant<ne::Var, ne::App, ne::Fst, ne::Snd> node;
};

namespace sv {
struct Lam { std::function<SemVal(const SemVal&)> fn; };
struct Pair { SemVal fst, snd; };
/// `sig` is null when the suspension carried no annotation.
struct Susp { std::function<SemCmp()> force; SemSig sig; };
struct PFun { std::function<SemCmp(const SemVal&)> fn; };
struct Tt {};
struct Ff {};
struct Nil {};
struct Cons { SemVal head, tail; };
struct TyBool {};
struct TyArrow { SemVal dom, cod; };
struct TyList { SemVal elem; };
struct TyProd { SemVal left, right; };
struct Star {};
struct Neu { Neutral ne; };
}  // namespace sv

struct SemNode {
  std::variant<sv::Lam, sv::Pair, sv::Susp, sv::PFun, sv::Tt, sv::Ff, sv::Nil, sv::Cons, sv::TyBool,
               sv::TyArrow, sv::TyList, sv::TyProd, sv::Star, sv::Neu>
      node;
};

// Heads of stuck computations.
namespace ch {
struct Force { SemVal scrutinee; };
struct If { SemVal cond; std::function<SemCmp()> then_branch, else_branch; };
struct Case {
  SemVal scrutinee;
  std::function<SemCmp()> nil_branch;
  std::function<SemCmp(const SemVal&, const SemVal&)> cons_branch;  // (head, tail)
};
struct AppP { SemVal fn, arg; };
struct Fold {
  SemVal scrutinee, init;
  std::function<SemCmp(const SemVal&, const SemVal&)> step;  // (acc, elem)
  SemSig acc_sig;
};
}  // namespace ch

using CmpHead = std::variant<ch::Force, ch::If, ch::Case, ch::AppP, ch::Fold>;

namespace sc {
struct Ret { SemVal value; };
struct Throw {};
struct Star {};
/// A stuck head followed by a continuation. `bound` is the signature of the
/// value the head produces when known from an annotation.
struct Bind { CmpHead head; std::function<SemCmp(const SemVal&)> k; SemSig bound; };
struct Ne { CmpHead head; };
}  // namespace sc

struct SemCmpNode {
  std::variant<sc::Ret, sc::Throw, sc::Star, sc::Bind, sc::Ne> node;
};

namespace ss {
struct Type {};
struct Dyn { SemVal type; };
struct Pi { SemSig dom; std::function<SemSig(const SemVal&)> cod; };
struct Sigma { SemSig fst; std::function<SemSig(const SemVal&)> snd; };
struct Ext { SemSig base; SemVal static_val; };
struct Cmp { SemSig body; };
}  // namespace ss

struct SemSigNode {
  std::variant<ss::Type, ss::Dyn, ss::Pi, ss::Sigma, ss::Ext, ss::Cmp> node;
};

inline SemVal mk(decltype(SemNode::node) n) { return std::make_shared<const SemNode>(SemNode{std::move(n)}); }
inline SemCmp mkc(decltype(SemCmpNode::node) n) {
  return std::make_shared<const SemCmpNode>(SemCmpNode{std::move(n)});
}
inline SemSig mks(decltype(SemSigNode::node) n) {
  return std::make_shared<const SemSigNode>(SemSigNode{std::move(n)});
}
inline Neutral mkne(decltype(NeNode::node) n) { return std::make_shared<const NeNode>(NeNode{std::move(n)}); }
inline SemVal neu(Neutral n) { return mk(sv::Neu{std::move(n)}); }
inline SemVal var_at(std::size_t level) { return neu(mkne(ne::Var{level})); }

/// Persistent evaluation environment; index 0 is the innermost binding.
class Env {
 public:
  Env() = default;
  Env extend(SemVal v) const {
    Env e;
    e.node_ = std::make_shared<const Node>(Node{std::move(v), node_});
    e.size_ = size_ + 1;
    return e;
  }
  const SemVal& at(std::size_t i) const {
    const Node* n = node_.get();
    for (; n && i > 0; --i) n = n->tail.get();
    if (!n) throw InternalError("evaluation environment too short");
    return n->head;
  }
  std::size_t size() const { return size_; }

 private:
  struct Node {
    SemVal head;
    std::shared_ptr<const Node> tail;
  };
  std::shared_ptr<const Node> node_;
  std::size_t size_ = 0;
};

// ---------------------------------------------------------------------------
// Semantic eliminations.

inline SemVal vapp(const SemVal& f, const SemVal& a) {
  return std::visit(overloaded{
                        [&](const sv::Lam& l) { return l.fn(a); },
                        [&](const sv::Neu& n) { return neu(mkne(ne::App{n.ne, a})); },
                        [&](const sv::Star&) { return f; },
                        [&](const auto&) -> SemVal { throw InternalError("application of a non-function"); },
                    },
                    f->node);
}

inline SemVal vfst(const SemVal& p) {
  return std::visit(overloaded{
                        [&](const sv::Pair& x) { return x.fst; },
                        [&](const sv::Neu& n) { return neu(mkne(ne::Fst{n.ne})); },
                        [&](const sv::Star&) { return p; },
                        [&](const auto&) -> SemVal { throw InternalError("projection from a non-pair"); },
                    },
                    p->node);
}

inline SemVal vsnd(const SemVal& p) {
  return std::visit(overloaded{
                        [&](const sv::Pair& x) { return x.snd; },
                        [&](const sv::Neu& n) { return neu(mkne(ne::Snd{n.ne})); },
                        [&](const sv::Star&) { return p; },
                        [&](const auto&) -> SemVal { throw InternalError("projection from a non-pair"); },
                    },
                    p->node);
}

/// Sequencing on semantic computations: monad β, throw propagation, and
/// re-association of stuck binds. `bound` is the signature of `c`.
inline SemCmp bind_sem(const SemCmp& c, std::function<SemCmp(const SemVal&)> k, const SemSig& bound) {
  return std::visit(
      overloaded{
          [&](const sc::Ret& r) { return k(r.value); },
          [&](const sc::Throw&) { return c; },
          [&](const sc::Star&) { return c; },
          [&](const sc::Bind& b) {
            auto inner = b.k;
            auto outer = k;
            auto bnd = bound;
            return mkc(sc::Bind{b.head,
                                [inner, outer, bnd](const SemVal& x) { return bind_sem(inner(x), outer, bnd); },
                                b.bound});
          },
          [&](const sc::Ne& n) { return mkc(sc::Bind{n.head, std::move(k), bound}); },
      },
      c->node);
}

inline SemCmp vapp_p(const SemVal& f, const SemVal& a) {
  return std::visit(overloaded{
                        [&](const sv::PFun& p) { return p.fn(a); },
                        [&](const sv::Neu&) { return mkc(sc::Ne{ch::AppP{f, a}}); },
                        [&](const sv::Star&) { return mkc(sc::Star{}); },
                        [&](const auto&) -> SemCmp { throw InternalError("partial application of a non-function"); },
                    },
                    f->node);
}

inline SemCmp fold_sem(const SemVal& scrut, const SemVal& init,
                       const std::function<SemCmp(const SemVal&, const SemVal&)>& step, const SemSig& acc_sig) {
  return std::visit(
      overloaded{
          [&](const sv::Nil&) { return mkc(sc::Ret{init}); },
          [&](const sv::Cons& c) {
            auto tail = c.tail;
            return bind_sem(
                step(init, c.head),
                [tail, step, acc_sig](const SemVal& acc) { return fold_sem(tail, acc, step, acc_sig); },
                acc_sig);
          },
          [&](const sv::Neu&) { return mkc(sc::Ne{ch::Fold{scrut, init, step, acc_sig}}); },
          [&](const sv::Star&) { return mkc(sc::Star{}); },
          [&](const auto&) -> SemCmp { throw InternalError("fold over a non-list"); },
      },
      scrut->node);
}

// ---------------------------------------------------------------------------
// Evaluation.

SemVal eval(const Env& env, const ValPtr& v);
SemCmp eval(const Env& env, const CmpPtr& m);
SemSig eval(const Env& env, const SigPtr& s);

inline SemSig eval(const Env& env, const SigPtr& s) {
  return std::visit(overloaded{
                        [&](const sig::Type&) { return mks(ss::Type{}); },
                        [&](const sig::Dyn& x) { return mks(ss::Dyn{eval(env, x.type)}); },
                        [&](const sig::Pi& x) {
                          auto cod = x.cod;
                          return mks(ss::Pi{eval(env, x.dom),
                                            [env, cod](const SemVal& a) { return eval(env.extend(a), cod); }});
                        },
                        [&](const sig::Sigma& x) {
                          auto snd = x.snd;
                          return mks(ss::Sigma{eval(env, x.fst),
                                               [env, snd](const SemVal& a) { return eval(env.extend(a), snd); }});
                        },
                        [&](const sig::Ext& x) { return mks(ss::Ext{eval(env, x.base), eval(env, x.static_val)}); },
                        [&](const sig::Cmp& x) { return mks(ss::Cmp{eval(env, x.body)}); },
                    },
                    s->node);
}

inline SemVal eval(const Env& env, const ValPtr& v) {
  return std::visit(
      overloaded{
          [&](const val::Var& x) { return env.at(x.index); },
          [&](const val::Lam& x) {
            auto body = x.body;
            return mk(sv::Lam{[env, body](const SemVal& a) { return eval(env.extend(a), body); }});
          },
          [&](const val::App& x) { return vapp(eval(env, x.fn), eval(env, x.arg)); },
          [&](const val::Pair& x) { return mk(sv::Pair{eval(env, x.fst), eval(env, x.snd)}); },
          [&](const val::Fst& x) { return vfst(eval(env, x.pair)); },
          [&](const val::Snd& x) { return vsnd(eval(env, x.pair)); },
          [&](const val::InExt& x) { return eval(env, x.payload); },
          [&](const val::OutExt& x) { return eval(env, x.ext); },
          [&](const val::Susp& x) {
            auto body = x.body;
            return mk(sv::Susp{[env, body]() { return eval(env, body); }, x.ann ? eval(env, x.ann) : nullptr});
          },
          [&](const val::Tt&) { return mk(sv::Tt{}); },
          [&](const val::Ff&) { return mk(sv::Ff{}); },
          [&](const val::PFun& x) {
            auto body = x.body;
            return mk(sv::PFun{[env, body](const SemVal& a) { return eval(env.extend(a), body); }});
          },
          [&](const val::Nil&) { return mk(sv::Nil{}); },
          [&](const val::Cons& x) { return mk(sv::Cons{eval(env, x.head), eval(env, x.tail)}); },
          [&](const val::TypeCode& x) {
            return std::visit(overloaded{
                                  [&](const tc::Bool&) { return mk(sv::TyBool{}); },
                                  [&](const tc::Arrow& a) { return mk(sv::TyArrow{eval(env, a.dom), eval(env, a.cod)}); },
                                  [&](const tc::List& l) { return mk(sv::TyList{eval(env, l.elem)}); },
                                  [&](const tc::Prod& p) { return mk(sv::TyProd{eval(env, p.left), eval(env, p.right)}); },
                              },
                              x.code);
          },
          [&](const val::Star&) { return mk(sv::Star{}); },
      },
      v->node);
}

inline SemCmp eval(const Env& env, const CmpPtr& m) {
  return std::visit(
      overloaded{
          [&](const cmp::Ret& x) { return mkc(sc::Ret{eval(env, x.value)}); },
          [&](const cmp::Bind& x) -> SemCmp {
            auto body = x.body;
            std::function<SemCmp(const SemVal&)> k = [env, body](const SemVal& a) {
              return eval(env.extend(a), body);
            };
            auto scrut = eval(env, x.scrutinee);
            if (auto* s = std::get_if<sv::Susp>(&scrut->node)) return bind_sem(s->force(), k, s->sig);
            if (std::holds_alternative<sv::Star>(scrut->node)) return mkc(sc::Star{});
            return mkc(sc::Bind{ch::Force{scrut}, k, nullptr});
          },
          [&](const cmp::Throw&) { return mkc(sc::Throw{}); },
          [&](const cmp::If& x) -> SemCmp {
            auto c = eval(env, x.cond);
            if (std::holds_alternative<sv::Tt>(c->node)) return eval(env, x.then_branch);
            if (std::holds_alternative<sv::Ff>(c->node)) return eval(env, x.else_branch);
            if (std::holds_alternative<sv::Star>(c->node)) return mkc(sc::Star{});
            auto t = x.then_branch;
            auto e = x.else_branch;
            return mkc(sc::Ne{ch::If{c, [env, t]() { return eval(env, t); }, [env, e]() { return eval(env, e); }}});
          },
          [&](const cmp::CaseList& x) -> SemCmp {
            auto s = eval(env, x.scrutinee);
            if (std::holds_alternative<sv::Nil>(s->node)) return eval(env, x.nil_branch);
            if (auto* c = std::get_if<sv::Cons>(&s->node))
              return eval(env.extend(c->head).extend(c->tail), x.cons_branch);
            if (std::holds_alternative<sv::Star>(s->node)) return mkc(sc::Star{});
            auto n = x.nil_branch;
            auto cb = x.cons_branch;
            return mkc(sc::Ne{ch::Case{s, [env, n]() { return eval(env, n); },
                                       [env, cb](const SemVal& h, const SemVal& t) {
                                         return eval(env.extend(h).extend(t), cb);
                                       }}});
          },
          [&](const cmp::AppP& x) { return vapp_p(eval(env, x.fn), eval(env, x.arg)); },
          [&](const cmp::Fold& x) {
            auto step_body = x.step;
            std::function<SemCmp(const SemVal&, const SemVal&)> step = [env, step_body](const SemVal& acc,
                                                                                         const SemVal& el) {
              return eval(env.extend(acc).extend(el), step_body);
            };
            return fold_sem(eval(env, x.scrutinee), eval(env, x.init), step, x.ann ? eval(env, x.ann) : nullptr);
          },
          [&](const cmp::Star&) { return mkc(sc::Star{}); },
      },
      m->node);
}

// ---------------------------------------------------------------------------
// Read-back.

/// Typed read-back relative to a stack of variable signatures (indexed by
/// de Bruijn level).
class Quoter {
 public:
  explicit Quoter(std::vector<SemSig> types = {}) : types_(std::move(types)) {}

  std::size_t depth() const { return types_.size(); }

  ValPtr quote_val(const SemVal& v, const SemSig& s, Phase ph) {
    return std::visit(
        overloaded{
            [&](const ss::Type&) { return quote_type(v); },
            [&](const ss::Dyn& d) -> ValPtr {
              if (ph == Phase::Static) return build::star();
              return quote_dyn(v, d.type);
            },
            [&](const ss::Cmp& c) -> ValPtr {
              if (ph == Phase::Static) return build::star();
              if (auto* s = std::get_if<sv::Susp>(&v->node))
                return build::susp(quote_cmp(s->force(), c.body, Phase::Dynamic));
              if (std::holds_alternative<sv::Star>(v->node)) return build::star();
              return quote_neutral_base(v);
            },
            [&](const ss::Pi& p) {
              auto x = push(p.dom);
              auto body = quote_val(vapp(v, x), p.cod(x), ph);
              pop();
              return build::lam(body);
            },
            [&](const ss::Sigma& p) {
              auto a = vfst(v);
              auto qa = quote_val(a, p.fst, ph);
              return build::pair(qa, quote_val(vsnd(v), p.snd(a), ph));
            },
            [&](const ss::Ext& e) {
              auto w = quote_val(e.static_val, e.base, Phase::Static);
              return build::in_ext(w, quote_val(v, e.base, ph));
            },
        },
        s->node);
  }

  CmpPtr quote_cmp(const SemCmp& c, const SemSig& s, Phase ph) {
    if (ph == Phase::Static) return build::cmp_star();
    return std::visit(overloaded{
                          [&](const sc::Ret& r) { return build::ret(quote_val(r.value, s, ph)); },
                          [&](const sc::Throw&) { return build::throw_(); },
                          [&](const sc::Star&) { return build::cmp_star(); },
                          [&](const sc::Ne& n) { return quote_head_tail(n.head, s); },
                          [&](const sc::Bind& b) {
                            auto [scrut, bound] = quote_head_scrutinee(b.head, b.bound);
                            auto x = push(bound);
                            auto body = quote_cmp(b.k(x), s, ph);
                            pop();
                            return build::bind(scrut, body);
                          },
                      },
                      c->node);
  }

  SigPtr quote_sig(const SemSig& s) {
    return std::visit(overloaded{
                          [&](const ss::Type&) { return build::sig_type(); },
                          [&](const ss::Dyn& d) { return build::dyn(quote_type(d.type)); },
                          [&](const ss::Pi& p) {
                            auto a = quote_sig(p.dom);
                            auto x = push(p.dom);
                            auto b = quote_sig(p.cod(x));
                            pop();
                            return build::pi(a, b);
                          },
                          [&](const ss::Sigma& p) {
                            auto a = quote_sig(p.fst);
                            auto x = push(p.fst);
                            auto b = quote_sig(p.snd(x));
                            pop();
                            return build::sigma(a, b);
                          },
                          [&](const ss::Ext& e) {
                            return build::ext(quote_sig(e.base), quote_val(e.static_val, e.base, Phase::Static));
                          },
                          [&](const ss::Cmp& c) { return build::cmp_sig(quote_sig(c.body)); },
                      },
                      s->node);
  }

  /// Static normal form of a type code.
  ValPtr quote_type(const SemVal& v) {
    using namespace build;
    return std::visit(
        overloaded{
            [&](const sv::TyBool&) { return bool_ty(); },
            [&](const sv::TyArrow& a) { return arrow(quote_type(a.dom), quote_type(a.cod)); },
            [&](const sv::TyList& l) { return list_ty(quote_type(l.elem)); },
            [&](const sv::TyProd& p) { return prod(quote_type(p.left), quote_type(p.right)); },
            [&](const sv::Star&) { return star(); },
            [&](const sv::Neu& n) -> ValPtr {
              if (auto unfolded = static_unfold(n.ne)) return quote_type(*unfolded);
              return quote_ne(n.ne, Phase::Static).first;
            },
            [&](const auto&) -> ValPtr { throw InternalError("expected a type code during read-back"); },
        },
        v->node);
  }

  /// Weak head normal form of a type code: neutral types whose head has an
  /// extent signature are replaced by their static part.
  SemVal whnf_type(SemVal t) {
    while (auto* n = std::get_if<sv::Neu>(&t->node)) {
      auto unfolded = static_unfold(n->ne);
      if (!unfolded) break;
      t = *unfolded;
    }
    return t;
  }

  /// Signature of a neutral together with its read-back (dynamic reading:
  /// extent eliminations are made explicit).
  std::pair<ValPtr, SemSig> quote_ne(const Neutral& n, Phase ph) {
    return std::visit(
        overloaded{
            [&](const ne::Var& x) -> std::pair<ValPtr, SemSig> {
              if (x.level >= types_.size()) throw InternalError("neutral variable out of scope");
              return {build::var(types_.size() - x.level - 1), types_[x.level]};
            },
            [&](const ne::App& x) -> std::pair<ValPtr, SemSig> {
              auto [f, t] = peel_ext(quote_ne(x.fn, ph));
              auto* p = std::get_if<ss::Pi>(&t->node);
              if (!p) throw InternalError("neutral application at a non-Π signature");
              auto arg = quote_val(x.arg, p->dom, ph);
              return {build::app(f, arg), p->cod(x.arg)};
            },
            [&](const ne::Fst& x) -> std::pair<ValPtr, SemSig> {
              auto [p, t] = peel_ext(quote_ne(x.pair, ph));
              if (auto* s = std::get_if<ss::Sigma>(&t->node)) return {build::fst(p), s->fst};
              auto [l, r] = prod_parts(t);
              return {build::fst(p), mks(ss::Dyn{l})};
            },
            [&](const ne::Snd& x) -> std::pair<ValPtr, SemSig> {
              auto [p, t] = peel_ext(quote_ne(x.pair, ph));
              if (auto* s = std::get_if<ss::Sigma>(&t->node))
                return {build::snd(p), s->snd(neu(mkne(ne::Fst{x.pair})))};
              auto [l, r] = prod_parts(t);
              return {build::snd(p), mks(ss::Dyn{r})};
            },
        },
        n->node);
  }

  /// Signature of a neutral value.
  SemSig type_of(const Neutral& n) { return quote_ne(n, Phase::Dynamic).second; }

  SemVal push(const SemSig& s) {
    types_.push_back(s);
    return var_at(types_.size() - 1);
  }
  void pop() { types_.pop_back(); }

 private:
  std::vector<SemSig> types_;

  static std::pair<ValPtr, SemSig> peel_ext(std::pair<ValPtr, SemSig> p) {
    while (auto* e = std::get_if<ss::Ext>(&p.second->node)) {
      p.first = build::out_ext(p.first);
      p.second = e->base;
    }
    return p;
  }

  std::pair<SemVal, SemVal> prod_parts(const SemSig& t) {
    auto* d = std::get_if<ss::Dyn>(&t->node);
    if (!d) throw InternalError("projection at a non-pair signature");
    auto ty = whnf_type(d->type);
    auto* p = std::get_if<sv::TyProd>(&ty->node);
    if (!p) throw InternalError("projection at a non-product type");
    return {p->left, p->right};
  }

  // Re-evaluates a neutral with every extent-typed prefix replaced by its
  // static part. Returns nullopt when no prefix has an extent signature.
  std::optional<SemVal> static_unfold(const Neutral& n) {
    bool changed = false;
    auto [v, t] = static_walk(n, changed);
    unfold_ext(v, t, changed);
    if (!changed) return std::nullopt;
    return v;
  }

  static void unfold_ext(SemVal& v, SemSig& t, bool& changed) {
    while (auto* e = std::get_if<ss::Ext>(&t->node)) {
      v = e->static_val;
      t = e->base;
      changed = true;
    }
  }

  std::pair<SemVal, SemSig> static_walk(const Neutral& n, bool& changed) {
    return std::visit(
        overloaded{
            [&](const ne::Var& x) -> std::pair<SemVal, SemSig> {
              if (x.level >= types_.size()) throw InternalError("neutral variable out of scope");
              return {neu(n), types_[x.level]};
            },
            [&](const ne::App& x) -> std::pair<SemVal, SemSig> {
              auto [f, t] = static_walk(x.fn, changed);
              unfold_ext(f, t, changed);
              auto* p = std::get_if<ss::Pi>(&t->node);
              if (!p) throw InternalError("neutral application at a non-Π signature");
              return {vapp(f, x.arg), p->cod(x.arg)};
            },
            [&](const ne::Fst& x) -> std::pair<SemVal, SemSig> {
              auto [p, t] = static_walk(x.pair, changed);
              unfold_ext(p, t, changed);
              if (auto* s = std::get_if<ss::Sigma>(&t->node)) return {vfst(p), s->fst};
              auto [l, r] = prod_parts(t);
              return {vfst(p), mks(ss::Dyn{l})};
            },
            [&](const ne::Snd& x) -> std::pair<SemVal, SemSig> {
              auto [p, t] = static_walk(x.pair, changed);
              unfold_ext(p, t, changed);
              if (auto* s = std::get_if<ss::Sigma>(&t->node)) return {vsnd(p), s->snd(vfst(p))};
              auto [l, r] = prod_parts(t);
              return {vsnd(p), mks(ss::Dyn{r})};
            },
        },
        n->node);
  }

  ValPtr quote_neutral_base(const SemVal& v) {
    auto* n = std::get_if<sv::Neu>(&v->node);
    if (!n) throw InternalError("expected a neutral value during read-back");
    return peel_ext(quote_ne(n->ne, Phase::Dynamic)).first;
  }

  ValPtr quote_dyn(const SemVal& v, const SemVal& type) {
    using namespace build;
    auto t = whnf_type(type);
    if (std::holds_alternative<sv::Star>(v->node)) return star();
    return std::visit(
        overloaded{
            [&](const sv::TyBool&) -> ValPtr {
              if (std::holds_alternative<sv::Tt>(v->node)) return tt();
              if (std::holds_alternative<sv::Ff>(v->node)) return ff();
              return quote_neutral_base(v);
            },
            [&](const sv::TyArrow& a) -> ValPtr {
              auto x = push(mks(ss::Dyn{a.dom}));
              auto body = quote_cmp(vapp_p(v, x), mks(ss::Dyn{a.cod}), Phase::Dynamic);
              pop();
              return pfun(body);
            },
            [&](const sv::TyList&) -> ValPtr {
              if (std::holds_alternative<sv::Nil>(v->node)) return nil();
              if (auto* c = std::get_if<sv::Cons>(&v->node)) {
                auto elem = std::get<sv::TyList>(t->node).elem;
                return cons(quote_dyn(c->head, elem), quote_dyn(c->tail, t));
              }
              return quote_neutral_base(v);
            },
            [&](const sv::TyProd& p) -> ValPtr {
              return pair(quote_dyn(vfst(v), p.left), quote_dyn(vsnd(v), p.right));
            },
            [&](const auto&) -> ValPtr { return quote_neutral_base(v); },
        },
        t->node);
  }

  SemVal list_elem(const SemVal& scrut) {
    auto* n = std::get_if<sv::Neu>(&scrut->node);
    if (!n) throw InternalError("stuck case on a non-neutral");
    auto t = type_of(n->ne);
    while (auto* e = std::get_if<ss::Ext>(&t->node)) t = e->base;
    auto* d = std::get_if<ss::Dyn>(&t->node);
    if (!d) throw InternalError("case scrutinee is not a list");
    auto ty = whnf_type(d->type);
    auto* l = std::get_if<sv::TyList>(&ty->node);
    if (!l) throw InternalError("case scrutinee is not a list");
    return l->elem;
  }

  CmpPtr quote_head_tail(const CmpHead& h, const SemSig& s) {
    using namespace build;
    return std::visit(
        overloaded{
            [&](const ch::Force&) -> CmpPtr {
              auto [scrut, bound] = quote_head_scrutinee(h, nullptr);
              auto x = push(bound);
              auto body = ret(quote_val(x, bound, Phase::Dynamic));
              pop();
              return bind(scrut, body);
            },
            [&](const ch::If& x) -> CmpPtr {
              return if_(quote_dyn(x.cond, mk(sv::TyBool{})), quote_cmp(x.then_branch(), s, Phase::Dynamic),
                         quote_cmp(x.else_branch(), s, Phase::Dynamic));
            },
            [&](const ch::Case& x) -> CmpPtr {
              auto elem = list_elem(x.scrutinee);
              auto scrut = quote_neutral_base(x.scrutinee);
              auto nil_b = quote_cmp(x.nil_branch(), s, Phase::Dynamic);
              auto hd = push(mks(ss::Dyn{elem}));
              auto tl = push(mks(ss::Dyn{mk(sv::TyList{elem})}));
              auto cons_b = quote_cmp(x.cons_branch(hd, tl), s, Phase::Dynamic);
              pop();
              pop();
              return case_list(scrut, nil_b, cons_b);
            },
            [&](const ch::AppP& x) -> CmpPtr {
              auto* n = std::get_if<sv::Neu>(&x.fn->node);
              if (!n) throw InternalError("stuck partial application on a non-neutral");
              auto [f, t] = peel_ext(quote_ne(n->ne, Phase::Dynamic));
              auto* d = std::get_if<ss::Dyn>(&t->node);
              if (!d) throw InternalError("partial application at a non-Dyn signature");
              auto ty = whnf_type(d->type);
              auto* a = std::get_if<sv::TyArrow>(&ty->node);
              if (!a) throw InternalError("partial application at a non-arrow type");
              return app_p(f, quote_dyn(x.arg, a->dom));
            },
            [&](const ch::Fold& x) -> CmpPtr {
              auto elem = list_elem(x.scrutinee);
              auto scrut = quote_neutral_base(x.scrutinee);
              auto acc_sig = x.acc_sig ? x.acc_sig : s;
              auto init = quote_val(x.init, acc_sig, Phase::Dynamic);
              auto ann = quote_sig(acc_sig);
              auto acc = push(acc_sig);
              auto el = push(mks(ss::Dyn{elem}));
              auto step = quote_cmp(x.step(acc, el), acc_sig, Phase::Dynamic);
              pop();
              pop();
              return fold(scrut, init, step, ann);
            },
        },
        h);
  }

  std::pair<ValPtr, SemSig> quote_head_scrutinee(const CmpHead& h, const SemSig& bound) {
    using namespace build;
    if (auto* f = std::get_if<ch::Force>(&h)) {
      auto* n = std::get_if<sv::Neu>(&f->scrutinee->node);
      if (!n) throw InternalError("stuck bind on a non-neutral");
      auto [t, s] = peel_ext(quote_ne(n->ne, Phase::Dynamic));
      auto* c = std::get_if<ss::Cmp>(&s->node);
      if (!c) throw InternalError("bind scrutinee is not a computation");
      return {t, c->body};
    }
    if (auto* a = std::get_if<ch::AppP>(&h)) {
      auto* n = std::get_if<sv::Neu>(&a->fn->node);
      if (!n) throw InternalError("stuck partial application on a non-neutral");
      auto t = peel_ext(quote_ne(n->ne, Phase::Dynamic)).second;
      auto ty = whnf_type(std::get<ss::Dyn>(t->node).type);
      auto cod = mks(ss::Dyn{std::get<sv::TyArrow>(ty->node).cod});
      return {susp(quote_head_tail(h, cod)), cod};
    }
    SemSig s = bound;
    if (!s)
      if (auto* f = std::get_if<ch::Fold>(&h)) s = f->acc_sig;
    if (!s) throw InternalError("stuck computation in bind position without a signature annotation");
    return {susp(quote_head_tail(h, s), quote_sig(s)), s};
  }
};

// ---------------------------------------------------------------------------
// Contexts.

/// Evaluation environment and read-back stack for a typing context: every
/// variable is a fresh neutral at its de Bruijn level.
struct SemContext {
  Env env;
  std::vector<SemSig> types;
  Phase phase = Phase::Dynamic;

  static SemContext of(const Context& ctx) {
    SemContext sc;
    sc.phase = phase_of(ctx);
    for (auto& s : ctx.telescope()) {
      sc.types.push_back(eval(sc.env, s));
      sc.env = sc.env.extend(var_at(sc.types.size() - 1));
    }
    return sc;
  }

  Quoter quoter() const { return Quoter(types); }
};

/// Normal forms relative to a context. Inputs must carry the annotations the
/// checker inserts (see `annotate_*`); the public entry points in
/// equality.hpp take care of that.
inline ValPtr normal_val(const Context& ctx, const ValPtr& v, const SigPtr& s) {
  auto sc = SemContext::of(ctx);
  auto q = sc.quoter();
  return q.quote_val(eval(sc.env, v), eval(sc.env, s), sc.phase);
}

inline CmpPtr normal_cmp(const Context& ctx, const CmpPtr& m, const SigPtr& s) {
  auto sc = SemContext::of(ctx);
  auto q = sc.quoter();
  return q.quote_cmp(eval(sc.env, m), eval(sc.env, s), sc.phase);
}

inline SigPtr normal_sig(const Context& ctx, const SigPtr& s) {
  auto sc = SemContext::of(ctx);
  auto q = sc.quoter();
  return q.quote_sig(eval(sc.env, s));
}

/// Static normal form of a type code.
inline ValPtr normal_type(const Context& ctx, const ValPtr& t) {
  auto sc = SemContext::of(ctx);
  auto q = sc.quoter();
  return q.quote_type(eval(sc.env, t));
}

inline bool conv_val(const Context& ctx, const ValPtr& a, const ValPtr& b, const SigPtr& s) {
  return same(normal_val(ctx, a, s), normal_val(ctx, b, s));
}
inline bool conv_cmp(const Context& ctx, const CmpPtr& a, const CmpPtr& b, const SigPtr& s) {
  return same(normal_cmp(ctx, a, s), normal_cmp(ctx, b, s));
}
inline bool conv_sig(const Context& ctx, const SigPtr& a, const SigPtr& b) {
  return same(normal_sig(ctx, a), normal_sig(ctx, b));
}

}  // namespace modtt::nbe
