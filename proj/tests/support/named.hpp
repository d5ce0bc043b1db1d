#pragma once

// Named-variable reference for substitution. Core terms are converted to a
// generic tree whose children record how many binders they introduce; all
// variables become strings, substitution renames binders that would capture,
// and the result is converted back with an explicit name environment.

#include <algorithm>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "modtt/syntax.hpp"

namespace modtt::testing {

struct Tree {
  std::string tag;
  std::string name;                // variables only
  std::vector<std::string> bound;  // names bound by this node, applying to `scoped` children
  std::vector<Tree> kids;
  std::vector<bool> scoped;        // parallel to kids
};

namespace named_detail {

class ToTree {
 public:
  // env.back() is de Bruijn index 0.
  std::vector<std::string> env;
  int counter = 0;

  std::string fresh() { return "b" + std::to_string(counter++); }

  std::string name_of(std::size_t index) const {
    if (index < env.size()) return env[env.size() - 1 - index];
    return "x" + std::to_string(index - env.size());
  }

  Tree node(std::string tag, std::vector<Tree> kids) {
    Tree t{std::move(tag), {}, {}, std::move(kids), {}};
    t.scoped.assign(t.kids.size(), false);
    return t;
  }

  template <class F>
  Tree binder(std::string tag, std::size_t n, std::vector<Tree> outer, F&& inner) {
    Tree t{std::move(tag), {}, {}, std::move(outer), {}};
    t.scoped.assign(t.kids.size(), false);
    for (std::size_t i = 0; i < n; ++i) t.bound.push_back(fresh());
    for (auto& b : t.bound) env.push_back(b);
    t.kids.push_back(inner());
    t.scoped.push_back(true);
    env.resize(env.size() - n);
    return t;
  }

  Tree sig(const SigPtr& s) {
    return std::visit(overloaded{
                          [&](const sig::Type&) { return node("Type", {}); },
                          [&](const sig::Dyn& x) { return node("Dyn", {val(x.type)}); },
                          [&](const sig::Pi& x) { return binder("Pi", 1, {sig(x.dom)}, [&] { return sig(x.cod); }); },
                          [&](const sig::Sigma& x) {
                            return binder("Sigma", 1, {sig(x.fst)}, [&] { return sig(x.snd); });
                          },
                          [&](const sig::Ext& x) { return node("Ext", {sig(x.base), val(x.static_val)}); },
                          [&](const sig::Cmp& x) { return node("Cmp", {sig(x.body)}); },
                      },
                      s->node);
  }

  Tree val(const ValPtr& v) {
    return std::visit(
        overloaded{
            [&](const val::Var& x) {
              Tree t{"var", name_of(x.index), {}, {}, {}};
              return t;
            },
            [&](const val::Lam& x) { return binder("lam", 1, {}, [&] { return val(x.body); }); },
            [&](const val::App& x) { return node("app", {val(x.fn), val(x.arg)}); },
            [&](const val::Pair& x) { return node("pair", {val(x.fst), val(x.snd)}); },
            [&](const val::Fst& x) { return node("fst", {val(x.pair)}); },
            [&](const val::Snd& x) { return node("snd", {val(x.pair)}); },
            [&](const val::InExt& x) { return node("in", {val(x.static_part), val(x.payload)}); },
            [&](const val::OutExt& x) { return node("out", {val(x.ext)}); },
            [&](const val::Susp& x) {
              std::vector<Tree> kids{cmp(x.body)};
              if (x.ann) kids.push_back(sig(x.ann));
              return node("susp", std::move(kids));
            },
            [&](const val::Tt&) { return node("tt", {}); },
            [&](const val::Ff&) { return node("ff", {}); },
            [&](const val::PFun& x) { return binder("pfun", 1, {}, [&] { return cmp(x.body); }); },
            [&](const val::Nil&) { return node("nil", {}); },
            [&](const val::Cons& x) { return node("cons", {val(x.head), val(x.tail)}); },
            [&](const val::Star&) { return node("*", {}); },
            [&](const val::TypeCode& x) {
              return std::visit(overloaded{
                                    [&](const tc::Bool&) { return node("bool", {}); },
                                    [&](const tc::Arrow& a) { return node("arrow", {val(a.dom), val(a.cod)}); },
                                    [&](const tc::List& l) { return node("list", {val(l.elem)}); },
                                    [&](const tc::Prod& p) { return node("prod", {val(p.left), val(p.right)}); },
                                },
                                x.code);
            },
        },
        v->node);
  }

  Tree cmp(const CmpPtr& m) {
    return std::visit(
        overloaded{
            [&](const cmp::Ret& x) { return node("ret", {val(x.value)}); },
            [&](const cmp::Bind& x) { return binder("bind", 1, {val(x.scrutinee)}, [&] { return cmp(x.body); }); },
            [&](const cmp::Throw&) { return node("throw", {}); },
            [&](const cmp::If& x) { return node("if", {val(x.cond), cmp(x.then_branch), cmp(x.else_branch)}); },
            [&](const cmp::CaseList& x) {
              // cons branch binds head then tail (tail is index 0)
              return binder("case", 2, {val(x.scrutinee), cmp(x.nil_branch)}, [&] { return cmp(x.cons_branch); });
            },
            [&](const cmp::AppP& x) { return node("appp", {val(x.fn), val(x.arg)}); },
            [&](const cmp::Fold& x) {
              std::vector<Tree> outer{val(x.scrutinee), val(x.init)};
              if (x.ann) outer.push_back(sig(x.ann));
              return binder(x.ann ? "fold:" : "fold", 2, std::move(outer), [&] { return cmp(x.step); });
            },
            [&](const cmp::Star&) { return node("*c", {}); },
        },
        m->node);
  }
};

inline void free_names(const Tree& t, std::set<std::string>& out, std::set<std::string>& bound) {
  if (t.tag == "var") {
    if (!bound.count(t.name)) out.insert(t.name);
    return;
  }
  for (std::size_t i = 0; i < t.kids.size(); ++i) {
    if (!t.scoped[i]) {
      free_names(t.kids[i], out, bound);
      continue;
    }
    std::set<std::string> b = bound;
    b.insert(t.bound.begin(), t.bound.end());
    free_names(t.kids[i], out, b);
  }
}

inline std::set<std::string> free_names(const Tree& t) {
  std::set<std::string> out, bound;
  free_names(t, out, bound);
  return out;
}

inline Tree rename(const Tree& t, const std::string& from, const std::string& to);

/// Capture-avoiding t[x := u].
inline Tree substitute(const Tree& t, const std::string& x, const Tree& u, int& counter) {
  if (t.tag == "var") return t.name == x ? u : t;
  Tree out = t;
  auto fu = free_names(u);
  for (std::size_t i = 0; i < t.kids.size(); ++i) {
    if (!t.scoped[i]) out.kids[i] = substitute(t.kids[i], x, u, counter);
  }
  if (std::find(t.bound.begin(), t.bound.end(), x) != t.bound.end()) return out;  // x shadowed below
  for (std::size_t i = 0; i < t.kids.size(); ++i) {
    if (!t.scoped[i]) continue;
    Tree body = t.kids[i];
    for (auto& b : out.bound) {
      if (!fu.count(b)) continue;
      std::string nb = "r" + std::to_string(counter++);
      body = rename(body, b, nb);
      b = nb;
    }
    out.kids[i] = substitute(body, x, u, counter);
  }
  return out;
}

inline Tree rename(const Tree& t, const std::string& from, const std::string& to) {
  Tree v{"var", to, {}, {}, {}};
  int unused = 0;
  return substitute(t, from, v, unused);
}

class FromTree {
 public:
  std::vector<std::string> env;  // back() is index 0
  // Free names "x<k>" map to index k + offset.
  long offset = 0;

  ValPtr var(const std::string& n) const {
    for (std::size_t i = 0; i < env.size(); ++i)
      if (env[env.size() - 1 - i] == n) return build::var(i);
    if (n.empty() || n[0] != 'x') throw InternalError("unbound name in named term: " + n);
    long k = std::stol(n.substr(1)) + offset;
    if (k < 0) throw InternalError("named term refers to a removed variable: " + n);
    return build::var(env.size() + static_cast<std::size_t>(k));
  }

  template <class F>
  auto scoped(const Tree& t, F&& f) {
    for (auto& b : t.bound) env.push_back(b);
    auto r = f();
    env.resize(env.size() - t.bound.size());
    return r;
  }

  SigPtr sig(const Tree& t) {
    using namespace build;
    if (t.tag == "Type") return sig_type();
    if (t.tag == "Dyn") return dyn(val(t.kids[0]));
    if (t.tag == "Pi") return pi(sig(t.kids[0]), scoped(t, [&] { return sig(t.kids[1]); }));
    if (t.tag == "Sigma") return sigma(sig(t.kids[0]), scoped(t, [&] { return sig(t.kids[1]); }));
    if (t.tag == "Ext") return ext(sig(t.kids[0]), val(t.kids[1]));
    if (t.tag == "Cmp") return cmp_sig(sig(t.kids[0]));
    throw InternalError("not a signature tree: " + t.tag);
  }

  ValPtr val(const Tree& t) {
    using namespace build;
    auto& k = t.kids;
    if (t.tag == "var") return var(t.name);
    if (t.tag == "lam") return lam(scoped(t, [&] { return val(k[0]); }));
    if (t.tag == "app") return app(val(k[0]), val(k[1]));
    if (t.tag == "pair") return pair(val(k[0]), val(k[1]));
    if (t.tag == "fst") return fst(val(k[0]));
    if (t.tag == "snd") return snd(val(k[0]));
    if (t.tag == "in") return in_ext(val(k[0]), val(k[1]));
    if (t.tag == "out") return out_ext(val(k[0]));
    if (t.tag == "susp") return susp(cmp(k[0]), k.size() > 1 ? sig(k[1]) : nullptr);
    if (t.tag == "tt") return tt();
    if (t.tag == "ff") return ff();
    if (t.tag == "pfun") return pfun(scoped(t, [&] { return cmp(k[0]); }));
    if (t.tag == "nil") return nil();
    if (t.tag == "cons") return cons(val(k[0]), val(k[1]));
    if (t.tag == "*") return star();
    if (t.tag == "bool") return bool_ty();
    if (t.tag == "arrow") return arrow(val(k[0]), val(k[1]));
    if (t.tag == "list") return list_ty(val(k[0]));
    if (t.tag == "prod") return prod(val(k[0]), val(k[1]));
    throw InternalError("not a value tree: " + t.tag);
  }

  CmpPtr cmp(const Tree& t) {
    using namespace build;
    auto& k = t.kids;
    if (t.tag == "ret") return ret(val(k[0]));
    if (t.tag == "bind") return bind(val(k[0]), scoped(t, [&] { return cmp(k[1]); }));
    if (t.tag == "throw") return throw_();
    if (t.tag == "if") return if_(val(k[0]), cmp(k[1]), cmp(k[2]));
    if (t.tag == "case") return case_list(val(k[0]), cmp(k[1]), scoped(t, [&] { return cmp(k[2]); }));
    if (t.tag == "appp") return app_p(val(k[0]), val(k[1]));
    if (t.tag == "fold") return fold(val(k[0]), val(k[1]), scoped(t, [&] { return cmp(k[2]); }));
    if (t.tag == "fold:") return fold(val(k[0]), val(k[1]), scoped(t, [&] { return cmp(k[3]); }), sig(k[2]));
    if (t.tag == "*c") return cmp_star();
    throw InternalError("not a computation tree: " + t.tag);
  }
};

template <class T>
Tree to_tree(const std::shared_ptr<const T>& t, ToTree& conv) {
  if constexpr (std::is_same_v<T, Sig>) return conv.sig(t);
  else if constexpr (std::is_same_v<T, Val>) return conv.val(t);
  else return conv.cmp(t);
}

template <class T>
std::shared_ptr<const T> from_tree(const Tree& t, FromTree& conv) {
  if constexpr (std::is_same_v<T, Sig>) return conv.sig(t);
  else if constexpr (std::is_same_v<T, Val>) return conv.val(t);
  else return conv.cmp(t);
}

}  // namespace named_detail

/// subst(t, u, 0) computed with names: free variable k of t is "x<k>",
/// free variable j of u is "x<j+1>", and x0 is replaced.
template <class T>
std::shared_ptr<const T> named_subst0(const std::shared_ptr<const T>& t, const ValPtr& u) {
  using namespace named_detail;
  ToTree tt;
  auto tree = to_tree(t, tt);
  ToTree tu;
  tu.counter = tt.counter;
  auto utree = to_tree(u, tu);
  // u's free names are one lower than in t's context: rename x<j> to x<j+1>,
  // highest first so renamings do not collide.
  auto fu = free_names(utree);
  std::vector<long> idx;
  for (auto& n : fu) idx.push_back(std::stol(n.substr(1)));
  std::sort(idx.rbegin(), idx.rend());
  for (long j : idx) utree = rename(utree, "x" + std::to_string(j), "x" + std::to_string(j + 1));
  int counter = 0;
  auto out = substitute(tree, "x0", utree, counter);
  FromTree back;
  back.offset = -1;
  return from_tree<T>(out, back);
}

/// De Bruijn -> names -> de Bruijn, no substitution.
template <class T>
std::shared_ptr<const T> named_roundtrip(const std::shared_ptr<const T>& t) {
  using namespace named_detail;
  ToTree to;
  auto tree = to_tree(t, to);
  FromTree back;
  return from_tree<T>(tree, back);
}

}  // namespace modtt::testing
