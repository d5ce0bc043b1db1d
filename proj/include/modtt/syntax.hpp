#pragma once

// Core abstract syntax: signatures, module values, computations and typing
// contexts. All nodes are immutable and shared through shared_ptr<const T>;
// variables are de Bruijn indices.

#include <algorithm>
#include <cstddef>
#include <memory>
#include <stdexcept>
#include <string>
#include <type_traits>
#include <utility>
#include <variant>
#include <vector>

namespace modtt {

struct Sig;
struct Val;
struct Cmp;
using SigPtr = std::shared_ptr<const Sig>;
using ValPtr = std::shared_ptr<const Val>;
using CmpPtr = std::shared_ptr<const Cmp>;

/// Raised on violations of internal invariants (ill-scoped input and the like).
struct InternalError : std::logic_error {
  using std::logic_error::logic_error;
};

namespace sig {
struct Type {};
struct Dyn { ValPtr type; };
/// Dependent product; `cod` binds one value variable.
struct Pi { SigPtr dom, cod; };
/// Dependent sum; `snd` binds one value variable.
struct Sigma { SigPtr fst, snd; };
/// Static extent: modules of `base` whose static part is `static_val`.
/// `static_val` lives in the ambient context extended by the static open.
struct Ext { SigPtr base; ValPtr static_val; };
/// The lax modality.
struct Cmp { SigPtr body; };
}  // namespace sig

struct Sig {
  using Node = std::variant<sig::Type, sig::Dyn, sig::Pi, sig::Sigma, sig::Ext, sig::Cmp>;
  Node node;
};

namespace tc {
struct Bool {};
struct Arrow { ValPtr dom, cod; };
struct List { ValPtr elem; };
struct Prod { ValPtr left, right; };
}  // namespace tc

using TypeConstructor = std::variant<tc::Bool, tc::Arrow, tc::List, tc::Prod>;

namespace val {
struct Var { std::size_t index; };
struct Lam { ValPtr body; };
struct App { ValPtr fn, arg; };
struct Pair { ValPtr fst, snd; };
struct Fst { ValPtr pair; };
struct Snd { ValPtr pair; };
struct InExt { ValPtr static_part, payload; };
struct OutExt { ValPtr ext; };
/// Introduction form of the lax modality. `ann` (nullable) records the
/// signature of the suspended computation.
struct Susp { CmpPtr body; SigPtr ann; };
struct Tt {};
struct Ff {};
/// Partial function; `body` binds the argument.
struct PFun { CmpPtr body; };
struct Nil {};
struct Cons { ValPtr head, tail; };
struct TypeCode { TypeConstructor code; };
/// The point of a statically connected sort; only well typed under the static open.
struct Star {};
}  // namespace val

struct Val {
  using Node = std::variant<val::Var, val::Lam, val::App, val::Pair, val::Fst, val::Snd,
                            val::InExt, val::OutExt, val::Susp, val::Tt, val::Ff, val::PFun,
                            val::Nil, val::Cons, val::TypeCode, val::Star>;
  Node node;
};

namespace cmp {
struct Ret { ValPtr value; };
/// `body` binds the value produced by `scrutinee`, a value of some `Cmp` signature.
struct Bind { ValPtr scrutinee; CmpPtr body; };
struct Throw {};
struct If { ValPtr cond; CmpPtr then_branch, else_branch; };
/// `cons_branch` binds head (index 1) and tail (index 0).
struct CaseList { ValPtr scrutinee; CmpPtr nil_branch, cons_branch; };
struct AppP { ValPtr fn, arg; };
/// Left fold over a list: `step` binds the accumulator (index 1) and the
/// element (index 0). `ann` (nullable) is the accumulator signature.
struct Fold { ValPtr scrutinee, init; CmpPtr step; SigPtr ann; };
/// The point of Cmp(σ) under the static open.
struct Star {};
}  // namespace cmp

struct Cmp {
  using Node = std::variant<cmp::Ret, cmp::Bind, cmp::Throw, cmp::If, cmp::CaseList, cmp::AppP,
                            cmp::Fold, cmp::Star>;
  Node node;
};

template <class... Fs>
struct overloaded : Fs... {
  using Fs::operator()...;
};
template <class... Fs>
overloaded(Fs...) -> overloaded<Fs...>;

// ---------------------------------------------------------------------------
// Smart constructors.

namespace build {

inline SigPtr sig_type() { return std::make_shared<const Sig>(Sig{sig::Type{}}); }
inline SigPtr dyn(ValPtr t) { return std::make_shared<const Sig>(Sig{sig::Dyn{std::move(t)}}); }
inline SigPtr pi(SigPtr a, SigPtr b) {
  return std::make_shared<const Sig>(Sig{sig::Pi{std::move(a), std::move(b)}});
}
inline SigPtr sigma(SigPtr a, SigPtr b) {
  return std::make_shared<const Sig>(Sig{sig::Sigma{std::move(a), std::move(b)}});
}
inline SigPtr ext(SigPtr s, ValPtr v) {
  return std::make_shared<const Sig>(Sig{sig::Ext{std::move(s), std::move(v)}});
}
inline SigPtr cmp_sig(SigPtr s) { return std::make_shared<const Sig>(Sig{sig::Cmp{std::move(s)}}); }

inline ValPtr mkval(Val::Node n) { return std::make_shared<const Val>(Val{std::move(n)}); }
inline ValPtr var(std::size_t i) { return mkval(val::Var{i}); }
inline ValPtr lam(ValPtr b) { return mkval(val::Lam{std::move(b)}); }
inline ValPtr app(ValPtr f, ValPtr a) { return mkval(val::App{std::move(f), std::move(a)}); }
inline ValPtr pair(ValPtr a, ValPtr b) { return mkval(val::Pair{std::move(a), std::move(b)}); }
inline ValPtr fst(ValPtr p) { return mkval(val::Fst{std::move(p)}); }
inline ValPtr snd(ValPtr p) { return mkval(val::Snd{std::move(p)}); }
inline ValPtr in_ext(ValPtr st, ValPtr w) { return mkval(val::InExt{std::move(st), std::move(w)}); }
inline ValPtr out_ext(ValPtr v) { return mkval(val::OutExt{std::move(v)}); }
inline ValPtr susp(CmpPtr m, SigPtr ann = nullptr) {
  return mkval(val::Susp{std::move(m), std::move(ann)});
}
inline ValPtr tt() { return mkval(val::Tt{}); }
inline ValPtr ff() { return mkval(val::Ff{}); }
inline ValPtr pfun(CmpPtr body) { return mkval(val::PFun{std::move(body)}); }
inline ValPtr nil() { return mkval(val::Nil{}); }
inline ValPtr cons(ValPtr h, ValPtr t) { return mkval(val::Cons{std::move(h), std::move(t)}); }
inline ValPtr star() { return mkval(val::Star{}); }
inline ValPtr type_code(TypeConstructor c) { return mkval(val::TypeCode{std::move(c)}); }
inline ValPtr bool_ty() { return type_code(tc::Bool{}); }
inline ValPtr arrow(ValPtr s, ValPtr t) { return type_code(tc::Arrow{std::move(s), std::move(t)}); }
inline ValPtr list_ty(ValPtr e) { return type_code(tc::List{std::move(e)}); }
inline ValPtr prod(ValPtr l, ValPtr r) { return type_code(tc::Prod{std::move(l), std::move(r)}); }

inline CmpPtr mkcmp(Cmp::Node n) { return std::make_shared<const Cmp>(Cmp{std::move(n)}); }
inline CmpPtr ret(ValPtr v) { return mkcmp(cmp::Ret{std::move(v)}); }
inline CmpPtr bind(ValPtr v, CmpPtr body) { return mkcmp(cmp::Bind{std::move(v), std::move(body)}); }
inline CmpPtr throw_() { return mkcmp(cmp::Throw{}); }
inline CmpPtr if_(ValPtr c, CmpPtr m, CmpPtr n) {
  return mkcmp(cmp::If{std::move(c), std::move(m), std::move(n)});
}
inline CmpPtr case_list(ValPtr s, CmpPtr n, CmpPtr c) {
  return mkcmp(cmp::CaseList{std::move(s), std::move(n), std::move(c)});
}
inline CmpPtr app_p(ValPtr f, ValPtr a) { return mkcmp(cmp::AppP{std::move(f), std::move(a)}); }
inline CmpPtr fold(ValPtr s, ValPtr init, CmpPtr step, SigPtr ann = nullptr) {
  return mkcmp(cmp::Fold{std::move(s), std::move(init), std::move(step), std::move(ann)});
}
inline CmpPtr cmp_star() { return mkcmp(cmp::Star{}); }

/// Dyn(bool), the observable sort.
inline SigPtr dyn_bool() { return dyn(bool_ty()); }

}  // namespace build

// ---------------------------------------------------------------------------
// Generic variable traversal. `on_var(depth, index)` receives every variable
// occurrence along with the number of binders crossed to reach it.

namespace detail {

template <class OnVar>
struct VarMap {
  OnVar& on_var;

  SigPtr sig(const SigPtr& s, std::size_t d) const {
    using namespace build;
    return std::visit(
        overloaded{
            [&](const sig::Type&) { return s; },
            [&](const sig::Dyn& x) { return dyn(val(x.type, d)); },
            [&](const sig::Pi& x) { return pi(sig(x.dom, d), sig(x.cod, d + 1)); },
            [&](const sig::Sigma& x) { return sigma(sig(x.fst, d), sig(x.snd, d + 1)); },
            [&](const sig::Ext& x) { return ext(sig(x.base, d), val(x.static_val, d)); },
            [&](const sig::Cmp& x) { return cmp_sig(sig(x.body, d)); },
        },
        s->node);
  }

  ValPtr val(const ValPtr& v, std::size_t d) const {
    using namespace build;
    return std::visit(
        overloaded{
            [&](const val::Var& x) -> ValPtr { return on_var(d, x.index); },
            [&](const val::Lam& x) { return lam(val(x.body, d + 1)); },
            [&](const val::App& x) { return app(val(x.fn, d), val(x.arg, d)); },
            [&](const val::Pair& x) { return pair(val(x.fst, d), val(x.snd, d)); },
            [&](const val::Fst& x) { return fst(val(x.pair, d)); },
            [&](const val::Snd& x) { return snd(val(x.pair, d)); },
            [&](const val::InExt& x) { return in_ext(val(x.static_part, d), val(x.payload, d)); },
            [&](const val::OutExt& x) { return out_ext(val(x.ext, d)); },
            [&](const val::Susp& x) {
              return susp(cmp(x.body, d), x.ann ? sig(x.ann, d) : nullptr);
            },
            [&](const val::PFun& x) { return pfun(cmp(x.body, d + 1)); },
            [&](const val::Cons& x) { return cons(val(x.head, d), val(x.tail, d)); },
            [&](const val::TypeCode& x) {
              return std::visit(
                  overloaded{
                      [&](const tc::Bool&) { return v; },
                      [&](const tc::Arrow& a) { return arrow(val(a.dom, d), val(a.cod, d)); },
                      [&](const tc::List& l) { return list_ty(val(l.elem, d)); },
                      [&](const tc::Prod& p) { return prod(val(p.left, d), val(p.right, d)); },
                  },
                  x.code);
            },
            [&](const auto&) { return v; },  // closed leaves
        },
        v->node);
  }

  CmpPtr cmp(const CmpPtr& m, std::size_t d) const {
    using namespace build;
    return std::visit(
        overloaded{
            [&](const cmp::Ret& x) { return ret(val(x.value, d)); },
            [&](const cmp::Bind& x) { return bind(val(x.scrutinee, d), cmp(x.body, d + 1)); },
            [&](const cmp::If& x) {
              return if_(val(x.cond, d), cmp(x.then_branch, d), cmp(x.else_branch, d));
            },
            [&](const cmp::CaseList& x) {
              return case_list(val(x.scrutinee, d), cmp(x.nil_branch, d), cmp(x.cons_branch, d + 2));
            },
            [&](const cmp::AppP& x) { return app_p(val(x.fn, d), val(x.arg, d)); },
            [&](const cmp::Fold& x) {
              return fold(val(x.scrutinee, d), val(x.init, d), cmp(x.step, d + 2),
                          x.ann ? sig(x.ann, d) : nullptr);
            },
            [&](const auto&) { return m; },
        },
        m->node);
  }
};

template <class OnVar>
VarMap(OnVar&) -> VarMap<OnVar>;

}  // namespace detail

// ---------------------------------------------------------------------------
// Shifting and substitution.

/// Adds `by` to every free variable with index >= `cutoff`.
template <class T>
std::shared_ptr<const T> shift(const std::shared_ptr<const T>& t, std::size_t by, std::size_t cutoff = 0) {
  if (by == 0) return t;
  auto on_var = [&](std::size_t d, std::size_t k) {
    return build::var(k >= cutoff + d ? k + by : k);
  };
  detail::VarMap m{on_var};
  if constexpr (std::is_same_v<T, Sig>) return m.sig(t, 0);
  else if constexpr (std::is_same_v<T, Val>) return m.val(t, 0);
  else return m.cmp(t, 0);
}

/// Subtracts `by` from every free variable with index >= `cutoff`; throws if a
/// variable in [cutoff, cutoff+by) occurs (the term mentions a dropped binder).
template <class T>
std::shared_ptr<const T> unshift(const std::shared_ptr<const T>& t, std::size_t by, std::size_t cutoff = 0) {
  if (by == 0) return t;
  auto on_var = [&](std::size_t d, std::size_t k) {
    if (k < cutoff + d) return build::var(k);
    if (k < cutoff + d + by) throw InternalError("unshift: variable escapes its scope");
    return build::var(k - by);
  };
  detail::VarMap m{on_var};
  if constexpr (std::is_same_v<T, Sig>) return m.sig(t, 0);
  else if constexpr (std::is_same_v<T, Val>) return m.val(t, 0);
  else return m.cmp(t, 0);
}

/// Replaces variable `index` by `replacement` and closes the gap left behind.
/// `replacement` is interpreted in the context with `index` removed.
template <class T>
std::shared_ptr<const T> subst(const std::shared_ptr<const T>& t, const ValPtr& replacement,
                               std::size_t index = 0) {
  auto on_var = [&](std::size_t d, std::size_t k) -> ValPtr {
    if (k < d) return build::var(k);
    if (k == index + d) return shift(replacement, d);
    if (k > index + d) return build::var(k - 1);
    return build::var(k);
  };
  detail::VarMap m{on_var};
  if constexpr (std::is_same_v<T, Sig>) return m.sig(t, 0);
  else if constexpr (std::is_same_v<T, Val>) return m.val(t, 0);
  else return m.cmp(t, 0);
}

/// Simultaneous substitution: free variable i < map.size() becomes map[i];
/// free variables beyond the map are lowered by map.size().
template <class T>
std::shared_ptr<const T> subst_many(const std::shared_ptr<const T>& t, const std::vector<ValPtr>& map) {
  auto on_var = [&](std::size_t d, std::size_t k) -> ValPtr {
    if (k < d) return build::var(k);
    std::size_t i = k - d;
    if (i < map.size()) return shift(map[i], d);
    return build::var(k - map.size());
  };
  detail::VarMap m{on_var};
  if constexpr (std::is_same_v<T, Sig>) return m.sig(t, 0);
  else if constexpr (std::is_same_v<T, Val>) return m.val(t, 0);
  else return m.cmp(t, 0);
}

/// Largest free variable index + 1 (0 for closed terms).
template <class T>
std::size_t free_bound(const std::shared_ptr<const T>& t) {
  std::size_t bound = 0;
  auto on_var = [&](std::size_t d, std::size_t k) {
    if (k >= d) bound = std::max(bound, k - d + 1);
    return build::var(k);
  };
  detail::VarMap m{on_var};
  if constexpr (std::is_same_v<T, Sig>) m.sig(t, 0);
  else if constexpr (std::is_same_v<T, Val>) m.val(t, 0);
  else m.cmp(t, 0);
  return bound;
}

// ---------------------------------------------------------------------------
// Syntactic (alpha) equality. Annotations on Susp/Fold are ignored.

bool same(const SigPtr& a, const SigPtr& b);
bool same(const ValPtr& a, const ValPtr& b);
bool same(const CmpPtr& a, const CmpPtr& b);

inline bool same(const SigPtr& a, const SigPtr& b) {
  if (a == b) return true;
  if (a->node.index() != b->node.index()) return false;
  return std::visit(
      overloaded{
          [&](const sig::Type&) { return true; },
          [&](const sig::Dyn& x) { return same(x.type, std::get<sig::Dyn>(b->node).type); },
          [&](const sig::Pi& x) {
            auto& y = std::get<sig::Pi>(b->node);
            return same(x.dom, y.dom) && same(x.cod, y.cod);
          },
          [&](const sig::Sigma& x) {
            auto& y = std::get<sig::Sigma>(b->node);
            return same(x.fst, y.fst) && same(x.snd, y.snd);
          },
          [&](const sig::Ext& x) {
            auto& y = std::get<sig::Ext>(b->node);
            return same(x.base, y.base) && same(x.static_val, y.static_val);
          },
          [&](const sig::Cmp& x) { return same(x.body, std::get<sig::Cmp>(b->node).body); },
      },
      a->node);
}

inline bool same(const ValPtr& a, const ValPtr& b) {
  if (a == b) return true;
  if (a->node.index() != b->node.index()) return false;
  return std::visit(
      overloaded{
          [&](const val::Var& x) { return x.index == std::get<val::Var>(b->node).index; },
          [&](const val::Lam& x) { return same(x.body, std::get<val::Lam>(b->node).body); },
          [&](const val::App& x) {
            auto& y = std::get<val::App>(b->node);
            return same(x.fn, y.fn) && same(x.arg, y.arg);
          },
          [&](const val::Pair& x) {
            auto& y = std::get<val::Pair>(b->node);
            return same(x.fst, y.fst) && same(x.snd, y.snd);
          },
          [&](const val::Fst& x) { return same(x.pair, std::get<val::Fst>(b->node).pair); },
          [&](const val::Snd& x) { return same(x.pair, std::get<val::Snd>(b->node).pair); },
          [&](const val::InExt& x) {
            auto& y = std::get<val::InExt>(b->node);
            return same(x.static_part, y.static_part) && same(x.payload, y.payload);
          },
          [&](const val::OutExt& x) { return same(x.ext, std::get<val::OutExt>(b->node).ext); },
          [&](const val::Susp& x) { return same(x.body, std::get<val::Susp>(b->node).body); },
          [&](const val::PFun& x) { return same(x.body, std::get<val::PFun>(b->node).body); },
          [&](const val::Cons& x) {
            auto& y = std::get<val::Cons>(b->node);
            return same(x.head, y.head) && same(x.tail, y.tail);
          },
          [&](const val::TypeCode& x) {
            auto& y = std::get<val::TypeCode>(b->node);
            if (x.code.index() != y.code.index()) return false;
            return std::visit(
                overloaded{
                    [&](const tc::Bool&) { return true; },
                    [&](const tc::Arrow& p) {
                      auto& q = std::get<tc::Arrow>(y.code);
                      return same(p.dom, q.dom) && same(p.cod, q.cod);
                    },
                    [&](const tc::List& p) { return same(p.elem, std::get<tc::List>(y.code).elem); },
                    [&](const tc::Prod& p) {
                      auto& q = std::get<tc::Prod>(y.code);
                      return same(p.left, q.left) && same(p.right, q.right);
                    },
                },
                x.code);
          },
          [&](const auto&) { return true; },
      },
      a->node);
}

inline bool same(const CmpPtr& a, const CmpPtr& b) {
  if (a == b) return true;
  if (a->node.index() != b->node.index()) return false;
  return std::visit(
      overloaded{
          [&](const cmp::Ret& x) { return same(x.value, std::get<cmp::Ret>(b->node).value); },
          [&](const cmp::Bind& x) {
            auto& y = std::get<cmp::Bind>(b->node);
            return same(x.scrutinee, y.scrutinee) && same(x.body, y.body);
          },
          [&](const cmp::If& x) {
            auto& y = std::get<cmp::If>(b->node);
            return same(x.cond, y.cond) && same(x.then_branch, y.then_branch) &&
                   same(x.else_branch, y.else_branch);
          },
          [&](const cmp::CaseList& x) {
            auto& y = std::get<cmp::CaseList>(b->node);
            return same(x.scrutinee, y.scrutinee) && same(x.nil_branch, y.nil_branch) &&
                   same(x.cons_branch, y.cons_branch);
          },
          [&](const cmp::AppP& x) {
            auto& y = std::get<cmp::AppP>(b->node);
            return same(x.fn, y.fn) && same(x.arg, y.arg);
          },
          [&](const cmp::Fold& x) {
            auto& y = std::get<cmp::Fold>(b->node);
            return same(x.scrutinee, y.scrutinee) && same(x.init, y.init) && same(x.step, y.step);
          },
          [&](const auto&) { return true; },
      },
      a->node);
}

/// Node count, used by generators and the rewriting oracle's size bound.
std::size_t term_size(const SigPtr& s);
std::size_t term_size(const ValPtr& v);
std::size_t term_size(const CmpPtr& m);

inline std::size_t term_size(const SigPtr& s) {
  return std::visit(overloaded{
                        [](const sig::Type&) -> std::size_t { return 1; },
                        [](const sig::Dyn& x) { return 1 + term_size(x.type); },
                        [](const sig::Pi& x) { return 1 + term_size(x.dom) + term_size(x.cod); },
                        [](const sig::Sigma& x) { return 1 + term_size(x.fst) + term_size(x.snd); },
                        [](const sig::Ext& x) { return 1 + term_size(x.base) + term_size(x.static_val); },
                        [](const sig::Cmp& x) { return 1 + term_size(x.body); },
                    },
                    s->node);
}

inline std::size_t term_size(const ValPtr& v) {
  return std::visit(
      overloaded{
          [](const val::Lam& x) { return 1 + term_size(x.body); },
          [](const val::App& x) { return 1 + term_size(x.fn) + term_size(x.arg); },
          [](const val::Pair& x) { return 1 + term_size(x.fst) + term_size(x.snd); },
          [](const val::Fst& x) { return 1 + term_size(x.pair); },
          [](const val::Snd& x) { return 1 + term_size(x.pair); },
          [](const val::InExt& x) { return 1 + term_size(x.static_part) + term_size(x.payload); },
          [](const val::OutExt& x) { return 1 + term_size(x.ext); },
          [](const val::Susp& x) { return 1 + term_size(x.body); },
          [](const val::PFun& x) { return 1 + term_size(x.body); },
          [](const val::Cons& x) { return 1 + term_size(x.head) + term_size(x.tail); },
          [](const val::TypeCode& x) {
            return std::visit(overloaded{
                                  [](const tc::Bool&) -> std::size_t { return 1; },
                                  [](const tc::Arrow& a) { return 1 + term_size(a.dom) + term_size(a.cod); },
                                  [](const tc::List& l) { return 1 + term_size(l.elem); },
                                  [](const tc::Prod& p) { return 1 + term_size(p.left) + term_size(p.right); },
                              },
                              x.code);
          },
          [](const auto&) -> std::size_t { return 1; },
      },
      v->node);
}

inline std::size_t term_size(const CmpPtr& m) {
  return std::visit(
      overloaded{
          [](const cmp::Ret& x) { return 1 + term_size(x.value); },
          [](const cmp::Bind& x) { return 1 + term_size(x.scrutinee) + term_size(x.body); },
          [](const cmp::If& x) {
            return 1 + term_size(x.cond) + term_size(x.then_branch) + term_size(x.else_branch);
          },
          [](const cmp::CaseList& x) {
            return 1 + term_size(x.scrutinee) + term_size(x.nil_branch) + term_size(x.cons_branch);
          },
          [](const cmp::AppP& x) { return 1 + term_size(x.fn) + term_size(x.arg); },
          [](const cmp::Fold& x) {
            return 1 + term_size(x.scrutinee) + term_size(x.init) + term_size(x.step);
          },
          [](const auto&) -> std::size_t { return 1; },
      },
      m->node);
}

// ---------------------------------------------------------------------------
// Contexts.

enum class Phase { Dynamic, Static };

struct VarEntry { SigPtr sig; };
struct StaticOpen {};
using ContextEntry = std::variant<VarEntry, StaticOpen>;

/// Telescope of typed variables interleaved with static-open markers. Markers
/// do not consume a de Bruijn index.
class Context {
 public:
  Context() = default;
  explicit Context(std::vector<ContextEntry> entries) : entries_(std::move(entries)) {}

  Context extend(SigPtr s) const {
    Context c = *this;
    c.entries_.push_back(VarEntry{std::move(s)});
    return c;
  }
  Context open_static() const {
    Context c = *this;
    c.entries_.push_back(StaticOpen{});
    return c;
  }

  const std::vector<ContextEntry>& entries() const { return entries_; }

  /// Number of variables (static opens excluded).
  std::size_t depth() const {
    std::size_t n = 0;
    for (auto& e : entries_) n += std::holds_alternative<VarEntry>(e);
    return n;
  }

  /// Signatures of the variables in binding order (level 0 first), each in
  /// its own prefix context.
  std::vector<SigPtr> telescope() const {
    std::vector<SigPtr> out;
    for (auto& e : entries_)
      if (auto* v = std::get_if<VarEntry>(&e)) out.push_back(v->sig);
    return out;
  }

 private:
  std::vector<ContextEntry> entries_;
};

/// Static iff the context contains a static open.
inline Phase phase_of(const Context& ctx) {
  for (auto& e : ctx.entries())
    if (std::holds_alternative<StaticOpen>(e)) return Phase::Static;
  return Phase::Dynamic;
}

/// Thrown by `lookup` when the index does not address a variable.
struct ScopeError : std::out_of_range {
  using std::out_of_range::out_of_range;
};

/// Signature of variable `index`, weakened to the full context.
inline SigPtr lookup(const Context& ctx, std::size_t index) {
  auto tele = ctx.telescope();
  if (index >= tele.size())
    throw ScopeError("variable #" + std::to_string(index) + " out of scope (depth " +
                     std::to_string(tele.size()) + ")");
  return shift(tele[tele.size() - 1 - index], index + 1);
}

}  // namespace modtt
