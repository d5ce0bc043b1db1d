#pragma once

// Elaboration of the surface language into the core: named components become
// Σ projections, `where type` becomes an extent, functors become Π into ○,
// and ascription inserts coercions. Every top-level declaration becomes one
// context variable; bound declarations (`<-`) are monadic.

#include <algorithm>
#include <functional>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "modtt/checker.hpp"
#include "modtt/coerce.hpp"
#include "modtt/diagnostics.hpp"
#include "modtt/equality.hpp"
#include "modtt/phase.hpp"
#include "modtt/print.hpp"
#include "modtt/surface/ast.hpp"
#include "modtt/surface/parser.hpp"
#include "modtt/syntax.hpp"

namespace modtt {

struct ElabItem {
  std::string name;
  std::string kind;  // type, val, fun, structure, functor
  SigPtr sig;
  LayoutPtr layout;
  ValPtr def;        // pure item, in the context of the earlier items
  ValPtr scrutinee;  // bound item: a value of ○sig
  std::size_t level = 0;
  Span span;

  bool bound() const { return scrutinee != nullptr; }
};

struct NamedSignature {
  std::string name;
  SigPtr sig;  // in the context of the first `depth` items
  LayoutPtr layout;
  std::size_t depth = 0;
};

/// Elaborated file: one context entry per top-level item.
class Program {
 public:
  std::vector<ElabItem> items;
  std::vector<NamedSignature> signatures;

  Context context(std::size_t depth) const {
    Context c;
    for (std::size_t i = 0; i < depth; ++i) c = c.extend(items[i].sig);
    return c;
  }
  Context context() const { return context(items.size()); }

  const ElabItem* find(const std::string& name) const {
    for (auto it = items.rbegin(); it != items.rend(); ++it)
      if (it->name == name) return &*it;
    return nullptr;
  }
  const NamedSignature* find_signature(const std::string& name) const {
    for (auto it = signatures.rbegin(); it != signatures.rend(); ++it)
      if (it->name == name) return &*it;
    return nullptr;
  }

  /// The item's definition with every earlier pure item substituted away.
  ValPtr closed_value(const std::string& name) const {
    auto& it = require(name);
    if (it.bound()) fail(ErrorKind::Elab, "'" + name + "' is bound by a computation; run it instead");
    return close(it.def, it.level, name);
  }

  SigPtr closed_sig(const std::string& name) const {
    auto& it = require(name);
    return close(it.sig, it.level, name);
  }

  SigPtr closed_signature(const std::string& name) const {
    auto* s = find_signature(name);
    if (!s) fail(ErrorKind::Unbound, "no signature named '" + name + "'");
    return close(s->sig, s->depth, name);
  }

  /// Closed computation producing the item: every item up to it is bound
  /// in order (pure ones through a trivial suspension, so the result stays
  /// checkable); a computation-valued item is run as well.
  CmpPtr closed_run(const std::string& name) const {
    using namespace build;
    auto& it = require(name);
    CmpPtr c = std::holds_alternative<sig::Cmp>(it.sig->node) ? bind(var(0), ret(var(0))) : ret(var(0));
    for (std::size_t j = it.level + 1; j-- > 0;) {
      auto& item = items[j];
      c = bind(item.bound() ? item.scrutinee : susp(ret(item.def), item.sig), c);
    }
    return c;
  }

  /// Signature of closed_run's result; fails when it mentions a bound item
  /// (an abstract type generated at run time).
  SigPtr closed_run_sig(const std::string& name) const {
    return annotate_synth_cmp(Context{}, closed_run(name)).second;
  }

  /// Human-readable core dump, one item per line.
  std::string emit_core() const {
    std::ostringstream os;
    for (auto& s : signatures) os << "signature " << s.name << " : " << to_string(s.sig) << "\n";
    for (auto& it : items) {
      os << it.kind << " " << it.name << " : " << to_string(it.sig);
      if (it.bound()) os << " <- " << to_string(it.scrutinee) << "\n";
      else os << " = " << to_string(it.def) << "\n";
    }
    return os.str();
  }

 private:
  const ElabItem& require(const std::string& name) const {
    auto* it = find(name);
    if (!it) fail(ErrorKind::Unbound, "no top-level item named '" + name + "'");
    return *it;
  }

  template <class T>
  std::shared_ptr<const T> close(std::shared_ptr<const T> t, std::size_t depth, const std::string& name) const {
    for (std::size_t j = depth; j-- > 0;) {
      auto& item = items[j];
      if (!item.bound()) {
        t = subst(t, item.def);
        continue;
      }
      try {
        t = unshift(t, 1);
      } catch (const InternalError&) {
        fail(ErrorKind::Elab, "'" + name + "' depends on the bound item '" + item.name + "'");
      }
    }
    return t;
  }
};

namespace elab_detail {

namespace s = surface;

struct Binding {
  enum class Kind { Module, Local, Signature };
  std::string name;
  Kind kind = Kind::Module;
  ValPtr term;  // Module, Local
  SigPtr sig;   // Module, Signature
  LayoutPtr layout;
  std::size_t depth = 0;
};

struct Resolved {
  ValPtr term;
  SigPtr sig;  // null for expression locals
  LayoutPtr layout;
};

struct ModResult {
  ValPtr value;  // exactly one of value / comp
  CmpPtr comp;
  SigPtr sig;
  LayoutPtr layout;
};

struct Frame {
  std::size_t start = 0;
  std::size_t scope_start = 0;
  std::vector<ElabItem> items;
  std::optional<std::pair<SigPtr, LayoutPtr>> target;  // at depth `start`
};

struct Expected {
  SigPtr sig;
  LayoutPtr layout;
};

template <class F>
auto at_span(const Span& span, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (TypeErrorException& e) {
    if (e.error.span.valid()) throw;
    e.error.span = span;
    throw TypeErrorException(e.error);
  }
}

class Elaborator {
 public:
  Program file(const std::vector<s::Decl>& decls) {
    Frame top;
    frames_.push_back(&top);
    Program p;
    for (auto& d : decls) {
      at_span(d.span, [&] { declaration(d); });
      if (auto* sg = std::get_if<s::decl::Signature>(&d.node)) {
        auto& b = scope_.back();
        p.signatures.push_back({sg->name, b.sig, b.layout, b.depth});
      }
    }
    frames_.pop_back();
    p.items = std::move(top.items);
    return p;
  }

 private:
  std::vector<SigPtr> tele_;  // null entries are expression binders
  std::vector<Binding> scope_;
  std::vector<Frame*> frames_;

  std::size_t depth() const { return tele_.size(); }

  Context ctx() const {
    Context c;
    for (auto& s : tele_) {
      if (!s) throw InternalError("elaborator: module context requested under an expression binder");
      c = c.extend(s);
    }
    return c;
  }

  template <class T>
  std::shared_ptr<const T> here(const std::shared_ptr<const T>& t, std::size_t from) const {
    return shift(t, depth() - from);
  }

  void truncate(std::size_t tele, std::size_t scope) {
    tele_.resize(tele);
    scope_.resize(scope);
  }

  const Binding* lookup_name(const std::string& name) const {
    for (auto it = scope_.rbegin(); it != scope_.rend(); ++it)
      if (it->name == name) return &*it;
    return nullptr;
  }

  // ---- paths -----------------------------------------------------------------

  Resolved resolve(const s::Path& path) {
    auto* b = lookup_name(path[0]);
    if (!b) fail(ErrorKind::Unbound, "unbound name '" + path[0] + "'");
    if (b->kind == Binding::Kind::Signature) fail(ErrorKind::Elab, "'" + path[0] + "' is a signature, not a module");
    Resolved r{here(b->term, b->depth), b->sig ? here(b->sig, b->depth) : nullptr, or_leaf(b->layout)};
    for (std::size_t i = 1; i < path.size(); ++i) {
      if (!r.sig || r.layout->kind != Layout::Kind::Record)
        fail(ErrorKind::Unbound, "'" + s::join({path.begin(), path.begin() + i}) + "' has no components");
      bool found = false;
      for (auto& f : fields_of(r.term, r.sig, r.layout)) {
        if (f.name == path[i]) {
          r = {f.term, f.sig, f.layout};
          found = true;
        }
      }
      if (!found) fail(ErrorKind::Unbound, "unbound component '" + s::join(path) + "'");
    }
    return r;
  }

  // ---- types -----------------------------------------------------------------

  ValPtr type(const s::Ty& t) {
    using namespace build;
    return at_span(t->span, [&]() -> ValPtr {
      return std::visit(
          overloaded{
              [&](const s::ty::Bool&) { return bool_ty(); },
              [&](const s::ty::String&) { return list_ty(bool_ty()); },
              [&](const s::ty::List& x) { return list_ty(type(x.elem)); },
              [&](const s::ty::Prod& x) { return prod(type(x.left), type(x.right)); },
              [&](const s::ty::Arrow& x) { return arrow(type(x.dom), type(x.cod)); },
              [&](const s::ty::Named& x) -> ValPtr {
                auto r = resolve(x.path);
                if (!r.sig) fail(ErrorKind::Mismatch, "'" + s::join(x.path) + "' is a value, not a type");
                auto [v, sg] = strip_ext(r.term, r.sig);
                if (!std::holds_alternative<sig::Type>(sg->node))
                  fail(ErrorKind::Mismatch, "'" + s::join(x.path) + "' is not a type", "Type", to_string(sg));
                return v;
              },
          },
          t->node);
    });
  }

  // ---- signatures ------------------------------------------------------------

  std::pair<SigPtr, LayoutPtr> signature(const s::SigExpr& se) {
    return at_span(se->span, [&]() -> std::pair<SigPtr, LayoutPtr> {
      if (auto* n = std::get_if<s::se::Name>(&se->node)) {
        auto* b = lookup_name(n->name);
        if (!b || b->kind != Binding::Kind::Signature) fail(ErrorKind::Unbound, "unbound signature '" + n->name + "'");
        return {here(b->sig, b->depth), b->layout};
      }
      if (auto* w = std::get_if<s::se::Where>(&se->node)) {
        auto [base, layout] = signature(w->base);
        auto t = type(w->type);
        return {where_type(base, layout, w->path, t), layout};
      }
      return body(resolve_sharing(std::get<s::se::Body>(se->node).specs));
    });
  }

  std::pair<SigPtr, LayoutPtr> body(const std::vector<s::Spec>& specs) {
    using namespace build;
    auto t0 = tele_.size(), s0 = scope_.size();
    std::vector<SigPtr> tele;
    std::vector<std::pair<std::string, LayoutPtr>> fields;
    for (auto& sp : specs) {
      at_span(sp.span, [&] {
        std::string name;
        SigPtr sg;
        LayoutPtr layout = Layout::leaf();
        if (auto* t = std::get_if<s::spec::Type>(&sp.node)) {
          name = t->name;
          sg = t->def ? ext(sig_type(), type(t->def)) : sig_type();
        } else if (auto* v = std::get_if<s::spec::Val>(&sp.node)) {
          name = v->name;
          sg = dyn(type(v->type));
        } else if (auto* m = std::get_if<s::spec::Structure>(&sp.node)) {
          name = m->name;
          std::tie(sg, layout) = signature(m->sig);
        } else {
          throw InternalError("sharing constraint survived resolution");
        }
        for (auto& f : fields)
          if (f.first == name) fail(ErrorKind::Elab, "duplicate specification of '" + name + "'");
        sg = annotate_sig(ctx(), sg);
        tele.push_back(sg);
        fields.emplace_back(name, layout);
        scope_.push_back({name, Binding::Kind::Module, var(0), sg, layout, depth() + 1});
        tele_.push_back(sg);
      });
    }
    truncate(t0, s0);
    return {record_sig(tele), Layout::record(std::move(fields))};
  }

  // `sharing type A.t = B.t` becomes `where type` (or a type definition) on
  // whichever side is specified later.
  std::vector<s::Spec> resolve_sharing(const std::vector<s::Spec>& specs) {
    std::vector<s::Spec> out;
    auto index_of = [&](const std::string& root) -> int {
      for (std::size_t i = 0; i < out.size(); ++i) {
        auto& n = out[i].node;
        if (auto* t = std::get_if<s::spec::Type>(&n); t && t->name == root) return static_cast<int>(i);
        if (auto* v = std::get_if<s::spec::Val>(&n); v && v->name == root) return static_cast<int>(i);
        if (auto* m = std::get_if<s::spec::Structure>(&n); m && m->name == root) return static_cast<int>(i);
      }
      return -1;
    };
    for (auto& sp : specs) {
      auto* sh = std::get_if<s::spec::Sharing>(&sp.node);
      if (!sh) {
        out.push_back(sp);
        continue;
      }
      at_span(sp.span, [&] {
        int li = index_of(sh->left[0]), ri = index_of(sh->right[0]);
        if (li == ri)
          fail(ErrorKind::Elab, "cannot orient sharing constraint between " + s::join(sh->left) + " and " +
                                    s::join(sh->right));
        const auto& tgt = li > ri ? sh->left : sh->right;
        const auto& src = li > ri ? sh->right : sh->left;
        auto ti = std::max(li, ri);
        auto src_ty = std::make_shared<const s::TyNode>(s::TyNode{s::ty::Named{src}, sp.span});
        auto& n = out[ti].node;
        if (auto* t = std::get_if<s::spec::Type>(&n)) {
          if (tgt.size() != 1 || t->def) fail(ErrorKind::Elab, "sharing constraint on a defined type");
          out[ti].node = s::spec::Type{t->name, src_ty};
        } else if (auto* m = std::get_if<s::spec::Structure>(&n)) {
          if (tgt.size() < 2) fail(ErrorKind::Elab, "sharing constraint must name a type component");
          auto w = std::make_shared<const s::SigExprNode>(
              s::SigExprNode{s::se::Where{m->sig, s::Path(tgt.begin() + 1, tgt.end()), src_ty}, sp.span});
          out[ti].node = s::spec::Structure{m->name, w};
        } else {
          fail(ErrorKind::Elab, "sharing constraint must name a type component");
        }
      });
    }
    return out;
  }

  // Whole-signature extent when the static part is then fully determined;
  // otherwise the named type field is rewritten in place.
  SigPtr where_type(const SigPtr& base, const LayoutPtr& layout, const s::Path& path, const ValPtr& t) {
    using namespace build;
    if (std::holds_alternative<sig::Ext>(base->node))
      fail(ErrorKind::Elab, "the static part of this signature is already fixed");
    check_path(base, layout, path);
    bool found = false;
    if (auto v = static_value(base, layout, &path, t, found)) return ext(base, *v);
    return rewrite_field(ctx(), base, layout, path, 0, t);
  }

  void check_path(const SigPtr& base, const LayoutPtr& layout, const s::Path& path) {
    SigPtr sg = base;
    LayoutPtr l = layout;
    ValPtr v = build::var(0);  // only for shape; never checked
    for (auto& name : path) {
      if (l->kind != Layout::Kind::Record) fail(ErrorKind::Unbound, "no type component '" + s::join(path) + "'");
      bool found = false;
      for (auto& f : fields_of(v, sg, l)) {
        if (f.name == name) {
          sg = f.sig;
          l = f.layout;
          v = f.term;
          found = true;
        }
      }
      if (!found) fail(ErrorKind::Unbound, "no type component '" + s::join(path) + "'");
    }
    if (auto* e = std::get_if<sig::Ext>(&sg->node)) {
      (void)e;
      fail(ErrorKind::Elab, "type '" + s::join(path) + "' is already defined");
    }
    if (!std::holds_alternative<sig::Type>(sg->node))
      fail(ErrorKind::Elab, "'" + s::join(path) + "' is not a type component");
  }

  // Static value of `sg` with the type at `path` set to `t`, if every other
  // static component is already determined.
  std::optional<ValPtr> static_value(const SigPtr& sg, const LayoutPtr& l, const s::Path* path, const ValPtr& t,
                                     bool& used) {
    using namespace build;
    if (path && path->empty()) {
      used = true;
      return t;
    }
    if (std::holds_alternative<sig::Dyn>(sg->node) || std::holds_alternative<sig::Cmp>(sg->node)) return star();
    if (auto* e = std::get_if<sig::Ext>(&sg->node)) return in_ext(e->static_val, e->static_val);
    if (std::holds_alternative<sig::Type>(sg->node) || std::holds_alternative<sig::Pi>(sg->node)) return std::nullopt;
    if (l->kind != Layout::Kind::Record) return std::nullopt;
    std::vector<ValPtr> comps;
    SigPtr cur = sg;
    auto n = l->fields.size();
    for (std::size_t k = 0; k < n; ++k) {
      SigPtr a = cur, rest;
      if (k + 1 < n) {
        auto* sgm = std::get_if<sig::Sigma>(&cur->node);
        if (!sgm) return std::nullopt;
        a = sgm->fst;
        rest = sgm->snd;
      }
      s::Path sub;
      const s::Path* p = nullptr;
      if (path && (*path)[0] == l->fields[k].first) {
        sub.assign(path->begin() + 1, path->end());
        p = &sub;
      }
      auto c = static_value(a, or_leaf(l->fields[k].second), p, t, used);
      if (!c) return std::nullopt;
      comps.push_back(*c);
      if (rest) cur = subst(rest, *c);
    }
    return record_val(comps);
  }

  // The field's new signature is a refinement of its old one; the rest of
  // the telescope sees the field through the coercion back to the old one.
  SigPtr rewrite_field(const Context& ctx, const SigPtr& sg, const LayoutPtr& l, const s::Path& path, std::size_t k0,
                       const ValPtr& t) {
    using namespace build;
    if (k0 == path.size()) return ext(sig_type(), t);
    auto n = l->fields.size();
    auto idx = static_cast<std::size_t>(l->index_of(path[k0]));
    std::function<SigPtr(const Context&, const SigPtr&, std::size_t, const ValPtr&)> go =
        [&](const Context& c, const SigPtr& cur, std::size_t k, const ValPtr& tk) -> SigPtr {
      auto sub = or_leaf(l->fields[k].second);
      if (k + 1 == n) return k == idx ? rewrite_field(c, cur, sub, path, k0 + 1, tk) : cur;
      auto* sgm = std::get_if<sig::Sigma>(&cur->node);
      if (k != idx) return sigma(sgm->fst, go(c.extend(sgm->fst), sgm->snd, k + 1, shift(tk, 1)));
      auto refined = rewrite_field(c, sgm->fst, sub, path, k0 + 1, tk);
      auto inner = c.extend(refined);
      auto back = coerce(inner, var(0), shift(refined, 1), shift(sgm->fst, 1), sub, sub);
      return sigma(refined, subst(shift(sgm->snd, 1, 1), back));
    };
    return go(ctx, sg, 0, t);
  }

  // ---- modules ---------------------------------------------------------------

  ModResult module(const s::ModExpr& m, const std::optional<Expected>& target) {
    return at_span(m->span, [&]() -> ModResult {
      using namespace build;
      if (auto* n = std::get_if<s::me::Name>(&m->node)) {
        auto r = resolve(n->path);
        if (!r.sig) fail(ErrorKind::Mismatch, "'" + s::join(n->path) + "' is not a module");
        return {r.term, nullptr, r.sig, r.layout};
      }
      if (auto* st = std::get_if<s::me::Struct>(&m->node)) {
        Frame f = open_frame(target);
        frames_.push_back(&f);
        for (auto& d : st->decls) at_span(d.span, [&] { declaration(d); });
        std::vector<ValPtr> vars;
        std::vector<SigPtr> tele;
        std::vector<std::pair<std::string, LayoutPtr>> fields;
        auto n = f.items.size();
        for (std::size_t i = 0; i < n; ++i) {
          vars.push_back(var(n - 1 - i));
          tele.push_back(f.items[i].sig);
          fields.emplace_back(f.items[i].name, f.items[i].layout);
        }
        ModResult r{record_val(vars), nullptr, record_sig(tele), Layout::record(std::move(fields))};
        return close_frame(f, r, false);
      }
      if (auto* ap = std::get_if<s::me::Apply>(&m->node)) {
        auto fr = resolve(ap->functor);
        if (!fr.sig) fail(ErrorKind::NotAFunction, "'" + s::join(ap->functor) + "' is not a functor");
        auto [f, fs] = strip_ext(fr.term, fr.sig);
        auto layout = fr.layout;
        for (auto& arg : ap->args) {
          auto* p = std::get_if<sig::Pi>(&fs->node);
          if (!p) fail(ErrorKind::NotAFunction, "'" + s::join(ap->functor) + "' is applied to too many arguments");
          auto pl = layout->kind == Layout::Kind::Functor && !layout->params.empty() ? or_leaf(layout->params[0])
                                                                                   : Layout::leaf();
          auto a = module(arg, Expected{p->dom, pl});
          if (a.comp) fail(ErrorKind::Elab, "functor argument performs a computation; bind it first");
          auto coerced = at_span(arg->span, [&] { return coerce(ctx(), a.value, a.sig, p->dom, a.layout, pl); });
          f = app(f, coerced);
          fs = subst(p->cod, coerced);
          layout = layout->kind == Layout::Kind::Functor ? layout->applied() : Layout::leaf();
        }
        if (!std::holds_alternative<sig::Cmp>(fs->node))
          fail(ErrorKind::Elab, "'" + s::join(ap->functor) + "' is applied to too few arguments");
        return {f, nullptr, fs, layout};
      }
      if (auto* as = std::get_if<s::me::Ascribe>(&m->node)) {
        auto [sg, layout] = signature(as->asc.sig);
        auto r = module(as->mod, Expected{sg, layout});
        return ascribe(r, sg, layout, as->asc.opaque);
      }
      auto& lt = std::get<s::me::Let>(m->node);
      Frame f = open_frame(std::nullopt);
      frames_.push_back(&f);
      for (auto& d : lt.decls) at_span(d.span, [&] { declaration(d); });
      std::optional<Expected> inner;
      if (target) inner = Expected{here(target->sig, f.start), target->layout};
      auto r = module(lt.body, inner);
      return close_frame(f, r, true);
    });
  }

  Frame open_frame(const std::optional<Expected>& target) {
    Frame f;
    f.start = depth();
    f.scope_start = scope_.size();
    if (target) f.target = std::make_pair(target->sig, target->layout);
    return f;
  }

  // Pops the frame's items off the context, substituting pure definitions
  // and binding monadic ones. `sig_inside` says whether r.sig lives under
  // the frame's items (let) or already at the frame's start (struct).
  ModResult close_frame(Frame& f, ModResult r, bool sig_inside) {
    using namespace build;
    frames_.pop_back();
    bool monadic = r.comp != nullptr;
    for (auto& it : f.items) monadic = monadic || it.bound();
    SigPtr sg = r.sig;
    if (!monadic) {
      ValPtr v = r.value;
      for (std::size_t j = f.items.size(); j-- > 0;) {
        v = subst(v, f.items[j].def);
        if (sig_inside) sg = subst(sg, f.items[j].def);
      }
      truncate(f.start, f.scope_start);
      return {v, nullptr, sg, r.layout};
    }
    CmpPtr c = r.comp ? r.comp : ret(r.value);
    for (std::size_t j = f.items.size(); j-- > 0;) {
      auto& it = f.items[j];
      if (!it.bound()) {
        c = subst(c, it.def);
        if (sig_inside) sg = subst(sg, it.def);
        continue;
      }
      c = bind(it.scrutinee, c);
      if (sig_inside) {
        try {
          sg = unshift(sg, 1);
        } catch (const InternalError&) {
          Context inner = ctx();
          inner = Context(std::vector<ContextEntry>(inner.entries().begin(),
                                                    inner.entries().begin() + static_cast<long>(f.start + j + 1)));
          try {
            sg = unshift(nbe::normal_sig(inner, sg), 1);
          } catch (const InternalError&) {
            fail(ErrorKind::NeedsAnnotation,
                 "the signature of this module depends on the locally bound '" + it.name + "'; ascribe it");
          }
        }
      }
    }
    truncate(f.start, f.scope_start);
    return {nullptr, c, sg, r.layout};
  }

  ModResult ascribe(const ModResult& r, const SigPtr& sg, const LayoutPtr& layout, bool opaque) {
    using namespace build;
    auto c = ctx();
    if (r.comp) {
      // Computations only admit the opaque reading: the static part of the
      // result is not known before running.
      auto inner = c.extend(r.sig);
      auto body = coerce(inner, var(0), shift(r.sig, 1), shift(sg, 1), r.layout, layout);
      return {nullptr, bind(susp(r.comp, r.sig), ret(body)), sg, layout};
    }
    auto v = coerce(c, r.value, r.sig, sg, r.layout, layout);
    if (opaque) return {v, nullptr, sg, layout};
    if (std::holds_alternative<sig::Ext>(sg->node)) return {v, nullptr, sg, layout};
    auto st = static_part_val(c, v, sg);
    return {in_ext(st, v), nullptr, ext(sg, st), layout};
  }

  // ---- declarations ----------------------------------------------------------

  std::optional<Expected> expectation(const std::string& name) {
    Frame& f = *frames_.back();
    if (!f.target || f.target->second->kind != Layout::Kind::Record) return std::nullopt;
    auto [sg0, layout] = *f.target;
    SigPtr cur = here(sg0, f.start);
    while (auto* e = std::get_if<sig::Ext>(&cur->node)) cur = e->base;
    auto n = layout->fields.size();
    for (std::size_t k = 0; k < n; ++k) {
      const auto& [fname, fl] = layout->fields[k];
      SigPtr a = cur, rest;
      if (k + 1 < n) {
        auto* sgm = std::get_if<sig::Sigma>(&cur->node);
        if (!sgm) return std::nullopt;
        a = sgm->fst;
        rest = sgm->snd;
      }
      if (fname == name) return Expected{a, or_leaf(fl)};
      if (!rest) return std::nullopt;
      const ElabItem* item = nullptr;
      for (auto& it : f.items)
        if (it.name == fname) item = &it;
      if (!item) return std::nullopt;
      try {
        auto v = coerce(ctx(), here(build::var(0), f.start + item->level + 1), here(item->sig, f.start + item->level),
                        a, item->layout, or_leaf(fl));
        cur = subst(rest, v);
      } catch (const TypeErrorException&) {
        return std::nullopt;
      }
    }
    return std::nullopt;
  }

  void push_item(ElabItem item) {
    using namespace build;
    Frame& f = *frames_.back();
    for (auto& it : f.items)
      if (it.name == item.name) fail(ErrorKind::Elab, "duplicate definition of '" + item.name + "'");
    item.level = f.items.size();
    item.sig = annotate_sig(ctx(), item.sig);
    if (item.def) item.def = annotate_val(ctx(), item.def, item.sig);
    if (item.scrutinee) item.scrutinee = annotate_val(ctx(), item.scrutinee, cmp_sig(item.sig));
    tele_.push_back(item.sig);
    scope_.push_back({item.name, Binding::Kind::Module, var(0), item.sig, item.layout, depth()});
    f.items.push_back(std::move(item));
  }

  void declaration(const s::Decl& d) {
    using namespace build;
    std::visit(
        overloaded{
            [&](const s::decl::Signature& x) {
              auto [sg, layout] = signature(x.sig);
              scope_.push_back({x.name, Binding::Kind::Signature, nullptr, sg, layout, depth()});
            },
            [&](const s::decl::Type& x) {
              auto t = type(x.def);
              push_item({x.name, "type", ext(sig_type(), t), Layout::leaf(), in_ext(t, t), nullptr, 0, d.span});
            },
            [&](const s::decl::Val& x) { val_decl(x, d.span); },
            [&](const s::decl::Fun& x) { fun_decl(x, d.span); },
            [&](const s::decl::Structure& x) { structure_decl(x, d.span); },
            [&](const s::decl::Functor& x) { functor_decl(x, d.span); },
        },
        d.node);
  }

  void val_decl(const s::decl::Val& x, const Span& span) {
    using namespace build;
    std::optional<Expected> e;
    if (x.ann) e = Expected{dyn(type(x.ann)), Layout::leaf()};
    else e = expectation(x.name);
    auto c0 = ctx();
    if (x.bind) {
      SigPtr inner = e ? e->sig : nullptr;  // the bound result
      ValPtr scrut;
      if (is_cmp(x.body)) {
        scrut = susp(computation(x.body, inner), inner);
      } else {
        scrut = value(x.body, inner ? cmp_sig(inner) : nullptr);
      }
      SigPtr sg = inner;
      if (!sg) {
        auto [a, s] = annotate_synth_val(c0, scrut);
        auto* cs = std::get_if<sig::Cmp>(&s->node);
        if (!cs) fail(ErrorKind::Mismatch, "'" + x.name + "' is bound to something that is not a computation",
                      "(Cmp _)", to_string(s));
        scrut = a;
        sg = cs->body;
      }
      push_item({x.name, "val", sg, Layout::leaf(), nullptr, scrut, 0, span});
      return;
    }
    if (is_cmp(x.body)) {
      SigPtr inner;
      if (x.ann) inner = e->sig;
      else if (e) {
        auto* cs = std::get_if<sig::Cmp>(&e->sig->node);
        if (!cs) fail(ErrorKind::Mismatch, "'" + x.name + "' is specified as a value but defined by a computation",
                      to_string(e->sig), "(Cmp _)");
        inner = cs->body;
      }
      auto def = susp(computation(x.body, inner), inner);
      SigPtr sg = inner ? cmp_sig(inner) : annotate_synth_val(c0, def).second;
      push_item({x.name, "val", sg, Layout::leaf(), def, nullptr, 0, span});
      return;
    }
    auto def = value(x.body, e ? e->sig : nullptr);
    SigPtr sg = e ? e->sig : annotate_synth_val(c0, def).second;
    push_item({x.name, "val", sg, e ? e->layout : Layout::leaf(), def, nullptr, 0, span});
  }

  void fun_decl(const s::decl::Fun& x, const Span& span) {
    using namespace build;
    SigPtr sg;
    if (auto e = expectation(x.name)) sg = e->sig;
    auto* pv = std::get_if<s::pat::Var>(&x.param->node);
    if (!sg && pv && pv->ann && x.result) sg = dyn(arrow(type(pv->ann), type(x.result)));
    auto c0 = ctx();
    auto t0 = tele_.size(), s0 = scope_.size();
    if (!sg && pv && pv->ann) {
      // Result signature synthesized from the body.
      auto dom = type(pv->ann);
      tele_.push_back(dyn(dom));
      bind_pattern(x.param, var(0));
      auto body = computation(x.body, nullptr);
      auto [ab, bs] = annotate_synth_cmp(ctx(), body);
      truncate(t0, s0);
      auto* d = std::get_if<sig::Dyn>(&bs->node);
      if (!d) fail(ErrorKind::Mismatch, "body of '" + x.name + "' does not return a program", "(Dyn _)", to_string(bs));
      ValPtr cod;
      try {
        cod = unshift(nbe::normal_type(c0.extend(dyn(dom)), d->type), 1);
      } catch (const InternalError&) {
        fail(ErrorKind::NeedsAnnotation, "result type of '" + x.name + "' mentions its argument");
      }
      push_item({x.name, "fun", dyn(arrow(dom, cod)), Layout::leaf(), pfun(ab), nullptr, 0, span});
      return;
    }
    if (!sg)
      fail(ErrorKind::NeedsAnnotation, "cannot infer the type of '" + x.name + "'; annotate the parameter and result");
    auto* d = std::get_if<sig::Dyn>(&sg->node);
    ValPtr nf = d ? nbe::normal_type(c0, d->type) : nullptr;
    auto* tcode = nf ? std::get_if<val::TypeCode>(&nf->node) : nullptr;
    auto* ar = tcode ? std::get_if<tc::Arrow>(&tcode->code) : nullptr;
    if (!ar) fail(ErrorKind::Mismatch, "'" + x.name + "' is specified as something other than a function",
                  "(Dyn (arrow _ _))", to_string(sg));
    tele_.push_back(dyn(ar->dom));
    bind_pattern(x.param, var(0));
    auto body = computation(x.body, dyn(shift(ar->cod, 1)));
    truncate(t0, s0);
    push_item({x.name, "fun", sg, Layout::leaf(), pfun(body), nullptr, 0, span});
  }

  void structure_decl(const s::decl::Structure& x, const Span& span) {
    using namespace build;
    std::optional<Expected> target;
    std::optional<std::pair<SigPtr, LayoutPtr>> asc;
    if (x.asc) {
      asc = signature(x.asc->sig);
      target = Expected{asc->first, asc->second};
    } else {
      target = expectation(x.name);
    }
    auto r = module(x.mod, target);
    if (asc) r = ascribe(r, asc->first, asc->second, x.asc->opaque);
    if (x.bind) {
      if (r.comp) {
        push_item({x.name, "structure", r.sig, r.layout, nullptr, susp(r.comp, r.sig), 0, span});
        return;
      }
      auto* cs = std::get_if<sig::Cmp>(&r.sig->node);
      if (!cs) fail(ErrorKind::Elab, "'" + x.name + "' is bound with <- to a module that is not a computation");
      push_item({x.name, "structure", cs->body, r.layout, nullptr, r.value, 0, span});
      return;
    }
    if (r.comp) fail(ErrorKind::Elab, "the definition of '" + x.name + "' performs computations; bind it with <-");
    if (std::holds_alternative<sig::Cmp>(r.sig->node) && std::holds_alternative<s::me::Apply>(x.mod->node))
      fail(ErrorKind::Elab, "functor application is generative; bind '" + x.name + "' with <-");
    if (!asc && std::holds_alternative<s::me::Name>(x.mod->node) && !std::holds_alternative<sig::Ext>(r.sig->node)) {
      // An alias keeps the identity of what it names.
      auto st = static_part_val(ctx(), r.value, r.sig);
      push_item({x.name, "structure", ext(r.sig, st), r.layout, in_ext(st, r.value), nullptr, 0, span});
      return;
    }
    push_item({x.name, "structure", r.sig, r.layout, r.value, nullptr, 0, span});
  }

  void functor_decl(const s::decl::Functor& x, const Span& span) {
    using namespace build;
    auto t0 = tele_.size(), s0 = scope_.size();
    std::vector<SigPtr> params;
    std::vector<LayoutPtr> layouts;
    for (auto& [name, se] : x.params) {
      auto [sg, layout] = signature(se);
      sg = annotate_sig(ctx(), sg);
      params.push_back(sg);
      layouts.push_back(layout);
      tele_.push_back(sg);
      scope_.push_back({name, Binding::Kind::Module, var(0), sg, layout, depth()});
    }
    std::optional<Expected> target;
    std::optional<std::pair<SigPtr, LayoutPtr>> res;
    if (x.result) {
      res = signature(x.result->sig);
      target = Expected{res->first, res->second};
    }
    auto r = module(x.body, target);
    if (res) r = ascribe(r, res->first, res->second, x.result->opaque);
    CmpPtr body = r.comp ? r.comp : ret(r.value);
    ValPtr def = susp(body, r.sig);
    SigPtr sg = cmp_sig(r.sig);
    for (std::size_t i = params.size(); i-- > 0;) {
      def = lam(def);
      sg = pi(params[i], sg);
    }
    truncate(t0, s0);
    push_item({x.name, "functor", sg, Layout::functor(layouts, r.layout), def, nullptr, 0, span});
  }

  // ---- expressions -----------------------------------------------------------

  static bool is_cmp(const s::Expr& e) {
    return std::visit(overloaded{
                          [](const s::ex::Ret&) { return true; },
                          [](const s::ex::Throw&) { return true; },
                          [](const s::ex::Bind&) { return true; },
                          [](const s::ex::Case&) { return true; },
                          [](const s::ex::If&) { return true; },
                          [](const s::ex::Fold&) { return true; },
                          [](const s::ex::Apply&) { return true; },
                          [](const s::ex::Let& x) { return is_cmp(x.body); },
                          [](const s::ex::Annot& x) { return is_cmp(x.expr); },
                          [](const auto&) { return false; },
                      },
                      e->node);
  }

  void local(const std::string& name, const ValPtr& term) {
    scope_.push_back({name, Binding::Kind::Local, term, nullptr, nullptr, depth()});
  }

  // Irrefutable patterns over `term` (a value at the current depth).
  void bind_pattern(const s::Pat& p, const ValPtr& term) {
    using namespace build;
    at_span(p->span, [&] {
      std::visit(overloaded{
                     [&](const s::pat::Var& x) { local(x.name, term); },
                     [&](const s::pat::Wild&) {},
                     [&](const s::pat::Tuple& x) {
                       ValPtr cur = term;
                       for (std::size_t i = 0; i < x.elems.size(); ++i) {
                         if (i + 1 == x.elems.size()) {
                           bind_pattern(x.elems[i], cur);
                         } else {
                           bind_pattern(x.elems[i], fst(cur));
                           cur = snd(cur);
                         }
                       }
                     },
                     [&](const auto&) { fail(ErrorKind::Elab, "refutable pattern outside of case"); },
                 },
                 p->node);
    });
  }

  ValPtr value(const s::Expr& e, const SigPtr& expected) {
    using namespace build;
    return at_span(e->span, [&]() -> ValPtr {
      return std::visit(
          overloaded{
              [&](const s::ex::Name& x) -> ValPtr {
                auto r = resolve(x.path);
                if (!r.sig) return r.term;
                return strip_ext(r.term, r.sig).first;
              },
              [&](const s::ex::Tt&) { return tt(); },
              [&](const s::ex::Ff&) { return ff(); },
              [&](const s::ex::Nil&) { return nil(); },
              [&](const s::ex::Cons& x) { return cons(value(x.head, nullptr), value(x.tail, nullptr)); },
              [&](const s::ex::Tuple& x) {
                std::vector<ValPtr> vs;
                for (auto& el : x.elems) vs.push_back(value(el, nullptr));
                ValPtr out = vs.back();
                for (std::size_t i = vs.size() - 1; i-- > 0;) out = pair(vs[i], out);
                return out;
              },
              [&](const s::ex::Annot& x) { return value(x.expr, dyn(type(x.type))); },
              [&](const s::ex::Let& x) {
                auto rhs = value(x.rhs, nullptr);
                auto s0 = scope_.size();
                bind_pattern(x.pat, rhs);
                auto out = value(x.body, expected);
                scope_.resize(s0);
                return out;
              },
              [&](const auto&) -> ValPtr {
                fail(ErrorKind::Elab, "a computation is used where a value is expected");
              },
          },
          e->node);
    });
  }

  void push_binders(std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) tele_.push_back(nullptr);
  }

  CmpPtr computation(const s::Expr& e, const SigPtr& expected) {
    using namespace build;
    return at_span(e->span, [&]() -> CmpPtr {
      if (!is_cmp(e)) return ret(value(e, expected));
      auto t0 = tele_.size(), s0 = scope_.size();
      auto under = [&](std::size_t n) { return expected ? shift(expected, n) : nullptr; };
      return std::visit(
          overloaded{
              [&](const s::ex::Ret& x) { return ret(value(x.value, expected)); },
              [&](const s::ex::Throw&) { return throw_(); },
              [&](const s::ex::Bind& x) {
                auto scrut = is_cmp(x.rhs) ? susp(computation(x.rhs, nullptr)) : value(x.rhs, nullptr);
                push_binders(1);
                bind_pattern(x.pat, var(0));
                auto body = computation(x.body, under(1));
                truncate(t0, s0);
                return bind(scrut, body);
              },
              [&](const s::ex::Let& x) {
                auto rhs = value(x.rhs, nullptr);
                bind_pattern(x.pat, rhs);
                auto body = computation(x.body, expected);
                truncate(t0, s0);
                return body;
              },
              [&](const s::ex::Annot& x) { return computation(x.expr, dyn(type(x.type))); },
              [&](const s::ex::If& x) {
                return if_(value(x.cond, nullptr), computation(x.then_branch, expected),
                           computation(x.else_branch, expected));
              },
              [&](const s::ex::Apply& x) { return app_p(value(x.fn, nullptr), value(x.arg, nullptr)); },
              [&](const s::ex::Fold& x) {
                auto scrut = value(x.scrutinee, nullptr);
                auto init = value(x.init, nullptr);
                push_binders(2);
                local(x.acc, var(1));
                local(x.elem, var(0));
                auto step = computation(x.step, under(2));
                truncate(t0, s0);
                SigPtr ann = expected;
                if (auto* a = std::get_if<s::ex::Annot>(&x.init->node); a && !ann) ann = dyn(type(a->type));
                return fold(scrut, init, step, ann);
              },
              [&](const s::ex::Case& x) { return case_expr(x, expected); },
              [&](const auto&) -> CmpPtr { throw InternalError("unreachable expression form"); },
          },
          e->node);
    });
  }

  CmpPtr case_expr(const s::ex::Case& x, const SigPtr& expected) {
    using namespace build;
    auto scrut = value(x.scrutinee, nullptr);
    auto t0 = tele_.size(), s0 = scope_.size();
    auto kind_of = [](const s::Pat& p) -> int {
      if (std::holds_alternative<s::pat::Tt>(p->node) || std::holds_alternative<s::pat::Ff>(p->node)) return 1;
      if (std::holds_alternative<s::pat::Nil>(p->node) || std::holds_alternative<s::pat::Cons>(p->node)) return 2;
      return 0;
    };
    int kind = 0;
    for (auto& [p, _] : x.rules) {
      int k = kind_of(p);
      if (k && kind && k != kind) fail(ErrorKind::Elab, "case mixes boolean and list patterns");
      if (k) kind = k;
    }
    // A catch-all rule binding the whole scrutinee (shifted by `n` binders).
    auto fallback = [&](std::size_t n) -> std::optional<CmpPtr> {
      for (auto& [p, body] : x.rules) {
        if (kind_of(p) != 0) continue;
        push_binders(n);
        bind_pattern(p, shift(scrut, n));
        auto out = computation(body, expected ? shift(expected, n) : nullptr);
        truncate(t0, s0);
        return out;
      }
      return std::nullopt;
    };
    auto first_rule = [&](auto pred) -> const std::pair<s::Pat, s::Expr>* {
      for (auto& r : x.rules) {
        if (kind_of(r.first) == 0) return nullptr;  // catch-all reached first
        if (pred(r.first)) return &r;
      }
      return nullptr;
    };
    auto need = [&](std::optional<CmpPtr> c, const char* what) {
      if (!c) fail(ErrorKind::Elab, std::string("case is not exhaustive: missing ") + what);
      return *c;
    };
    if (kind == 0) {
      if (x.rules.size() != 1) fail(ErrorKind::Elab, "redundant case rules");
      return *fallback(0);
    }
    if (kind == 1) {
      auto branch = [&](bool want) -> std::optional<CmpPtr> {
        auto* r = first_rule([&](const s::Pat& p) {
          return want ? std::holds_alternative<s::pat::Tt>(p->node) : std::holds_alternative<s::pat::Ff>(p->node);
        });
        if (r) return computation(r->second, expected);
        return fallback(0);
      };
      auto t = need(branch(true), "tt");
      auto f = need(branch(false), "ff");
      return if_(scrut, t, f);
    }
    std::optional<CmpPtr> nil_branch, cons_branch;
    if (auto* r = first_rule([](const s::Pat& p) { return std::holds_alternative<s::pat::Nil>(p->node); }))
      nil_branch = computation(r->second, expected);
    else
      nil_branch = fallback(0);
    if (auto* r = first_rule([](const s::Pat& p) { return std::holds_alternative<s::pat::Cons>(p->node); })) {
      auto& c = std::get<s::pat::Cons>(r->first->node);
      push_binders(2);
      bind_pattern(c.head, var(1));
      bind_pattern(c.tail, var(0));
      cons_branch = computation(r->second, expected ? shift(expected, 2) : nullptr);
      truncate(t0, s0);
    } else {
      cons_branch = fallback(2);
    }
    return case_list(scrut, need(nil_branch, "nil"), need(cons_branch, "::"));
  }
};

}  // namespace elab_detail

/// Parses and elaborates a whole file; throws TypeErrorException.
inline Program elaborate_file(std::string_view source) {
  auto decls = surface::parse(source);
  return elab_detail::Elaborator{}.file(decls);
}

inline Result<Program> try_elaborate(std::string_view source) {
  try {
    return elaborate_file(source);
  } catch (const TypeErrorException& e) {
    return e.error;
  }
}

}  // namespace modtt
