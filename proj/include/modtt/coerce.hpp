#pragma once

// Records with named fields over right-nested Σ, and the η-guided coercion
// used for signature matching (sealing, transparent ascription, functor
// arguments).

#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "modtt/checker.hpp"
#include "modtt/diagnostics.hpp"
#include "modtt/nbe.hpp"
#include "modtt/print.hpp"
#include "modtt/syntax.hpp"

namespace modtt {

struct Layout;
using LayoutPtr = std::shared_ptr<const Layout>;

/// Field names of a module signature. Leaves are types, programs and
/// computations; records are Σ telescopes; functors are Π chains into ○.
struct Layout {
  enum class Kind { Leaf, Record, Functor };
  Kind kind = Kind::Leaf;
  std::vector<std::pair<std::string, LayoutPtr>> fields;  // Record
  std::vector<LayoutPtr> params;                           // Functor
  LayoutPtr result;                                        // Functor

  static LayoutPtr leaf() {
    static const LayoutPtr l = std::make_shared<const Layout>();
    return l;
  }
  static LayoutPtr record(std::vector<std::pair<std::string, LayoutPtr>> fields) {
    Layout l;
    l.kind = Kind::Record;
    l.fields = std::move(fields);
    return std::make_shared<const Layout>(std::move(l));
  }
  static LayoutPtr functor(std::vector<LayoutPtr> params, LayoutPtr result) {
    Layout l;
    l.kind = Kind::Functor;
    l.params = std::move(params);
    l.result = std::move(result);
    return std::make_shared<const Layout>(std::move(l));
  }

  int index_of(const std::string& name) const {
    for (std::size_t i = 0; i < fields.size(); ++i)
      if (fields[i].first == name) return static_cast<int>(i);
    return -1;
  }

  /// Layout after supplying one functor argument.
  LayoutPtr applied() const {
    if (params.size() <= 1) return result ? result : leaf();
    return functor(std::vector<LayoutPtr>(params.begin() + 1, params.end()), result);
  }
};

inline LayoutPtr or_leaf(const LayoutPtr& l) { return l ? l : Layout::leaf(); }

/// The empty record: a trivially determined type.
inline SigPtr unit_sig() { return build::ext(build::sig_type(), build::bool_ty()); }
inline ValPtr unit_val() { return build::in_ext(build::bool_ty(), build::bool_ty()); }

/// Right-nested Σ over a telescope (entry k lives under the k earlier ones).
inline SigPtr record_sig(const std::vector<SigPtr>& tele, std::size_t from = 0) {
  if (tele.size() == from) return unit_sig();
  if (tele.size() == from + 1) return tele[from];
  return build::sigma(tele[from], record_sig(tele, from + 1));
}

inline ValPtr record_val(const std::vector<ValPtr>& comps, std::size_t from = 0) {
  if (comps.size() == from) return unit_val();
  if (comps.size() == from + 1) return comps[from];
  return build::pair(comps[from], record_val(comps, from + 1));
}

// Eliminations that reduce on literal introductions, so coercions of
// literal modules stay checkable (a projection out of a bare pair does not
// synthesize).
inline ValPtr proj_fst(const ValPtr& v) {
  if (auto* p = std::get_if<val::Pair>(&v->node)) return p->fst;
  return build::fst(v);
}
inline ValPtr proj_snd(const ValPtr& v) {
  if (auto* p = std::get_if<val::Pair>(&v->node)) return p->snd;
  return build::snd(v);
}
inline ValPtr proj_out(const ValPtr& v) {
  if (auto* i = std::get_if<val::InExt>(&v->node)) return i->payload;
  return build::out_ext(v);
}
inline ValPtr apply_val(const ValPtr& f, const ValPtr& a) {
  if (auto* l = std::get_if<val::Lam>(&f->node)) return subst(l->body, a);
  return build::app(f, a);
}

/// Removes outer extents, inserting the eliminations.
inline std::pair<ValPtr, SigPtr> strip_ext(ValPtr v, SigPtr s) {
  while (auto* e = std::get_if<sig::Ext>(&s->node)) {
    v = proj_out(v);
    s = e->base;
  }
  return {v, s};
}

struct Field {
  std::string name;
  ValPtr term;
  SigPtr sig;
  LayoutPtr layout;
};

/// Projections of every field of a record-shaped module.
inline std::vector<Field> fields_of(const ValPtr& v0, const SigPtr& s0, const LayoutPtr& layout) {
  std::vector<Field> out;
  auto n = layout->fields.size();
  if (n == 0) return out;
  auto [v, s] = strip_ext(v0, s0);
  for (std::size_t k = 0; k + 1 < n; ++k) {
    auto [cv, cs] = strip_ext(v, s);
    auto* sg = std::get_if<sig::Sigma>(&cs->node);
    if (!sg) throw InternalError("record layout does not match its signature: " + to_string(cs));
    auto head = proj_fst(cv);
    out.push_back({layout->fields[k].first, head, sg->fst, or_leaf(layout->fields[k].second)});
    v = proj_snd(cv);
    s = subst(sg->snd, head);
  }
  out.push_back({layout->fields[n - 1].first, v, s, or_leaf(layout->fields[n - 1].second)});
  return out;
}

/// Field names agree wherever both layouts have records.
inline bool same_names(const LayoutPtr& a, const LayoutPtr& b) {
  if (!a || !b || a->kind != b->kind) return true;
  if (a->kind == Layout::Kind::Functor) {
    for (std::size_t i = 0; i < std::min(a->params.size(), b->params.size()); ++i)
      if (!same_names(a->params[i], b->params[i])) return false;
    return same_names(a->result, b->result);
  }
  if (a->fields.size() != b->fields.size()) return false;
  for (std::size_t i = 0; i < a->fields.size(); ++i)
    if (a->fields[i].first != b->fields[i].first || !same_names(a->fields[i].second, b->fields[i].second))
      return false;
  return true;
}

/// Coerces `v : from` to `to`, following record field names where both
/// sides have them and positions otherwise.
class Coercer {
 public:
  ValPtr run(const Context& ctx, const ValPtr& v, const SigPtr& from, const SigPtr& to, const LayoutPtr& lf,
             const LayoutPtr& lt) {
    using namespace build;
    if (same_names(lf, lt) && nbe::conv_sig(ctx, from, to)) return v;
    if (lt->kind == Layout::Kind::Record && lt->fields.empty()) return unit_val();
    if (auto* e = std::get_if<sig::Ext>(&to->node)) {
      auto w = run(ctx, v, from, e->base, lf, lt);
      auto out = in_ext(e->static_val, w);
      annotate_val(ctx, out, to);  // reports extent-side-condition
      return out;
    }
    if (auto* e = std::get_if<sig::Ext>(&from->node)) return run(ctx, proj_out(v), e->base, to, lf, lt);

    if (lt->kind == Layout::Kind::Record && lf->kind == Layout::Kind::Record) return record(ctx, v, from, to, lf, lt);

    if (auto* a = std::get_if<sig::Sigma>(&to->node)) {
      auto* b = std::get_if<sig::Sigma>(&from->node);
      if (!b) mismatch(ctx, from, to);
      auto c1 = run(ctx, proj_fst(v), b->fst, a->fst, Layout::leaf(), Layout::leaf());
      auto c2 = run(ctx, proj_snd(v), subst(b->snd, proj_fst(v)), subst(a->snd, c1), Layout::leaf(), Layout::leaf());
      return pair(c1, c2);
    }
    if (auto* a = std::get_if<sig::Pi>(&to->node)) {
      auto* b = std::get_if<sig::Pi>(&from->node);
      if (!b) mismatch(ctx, from, to);
      auto inner = ctx.extend(a->dom);
      auto pf = lf->kind == Layout::Kind::Functor && !lf->params.empty() ? or_leaf(lf->params[0]) : Layout::leaf();
      auto pt = lt->kind == Layout::Kind::Functor && !lt->params.empty() ? or_leaf(lt->params[0]) : Layout::leaf();
      auto arg = run(inner, var(0), shift(a->dom, 1), shift(b->dom, 1), pt, pf);
      auto rf = lf->kind == Layout::Kind::Functor ? lf->applied() : Layout::leaf();
      auto rt = lt->kind == Layout::Kind::Functor ? lt->applied() : Layout::leaf();
      auto body = run(inner, apply_val(shift(v, 1), arg), subst(shift(b->cod, 1, 1), arg), a->cod, rf, rt);
      return lam(body);
    }
    if (auto* a = std::get_if<sig::Cmp>(&to->node)) {
      auto* b = std::get_if<sig::Cmp>(&from->node);
      if (!b) mismatch(ctx, from, to);
      auto inner = ctx.extend(b->body);
      auto r = run(inner, var(0), shift(b->body, 1), shift(a->body, 1), lf, lt);
      return susp(bind(v, ret(r)), a->body);
    }
    mismatch(ctx, from, to);
  }

 private:
  ValPtr record(const Context& ctx, const ValPtr& v, const SigPtr& from, const SigPtr& to, const LayoutPtr& lf,
                const LayoutPtr& lt) {
    using namespace build;
    auto source = fields_of(v, from, lf);
    std::vector<ValPtr> comps;
    auto s = to;
    auto n = lt->fields.size();
    for (std::size_t k = 0; k < n; ++k) {
      const auto& [name, fl] = lt->fields[k];
      SigPtr want = s;
      SigPtr rest;
      if (k + 1 < n) {
        auto* sg = std::get_if<sig::Sigma>(&s->node);
        if (!sg) throw InternalError("record layout does not match its signature: " + to_string(s));
        want = sg->fst;
        rest = sg->snd;
      }
      const Field* src = nullptr;
      for (auto& f : source)
        if (f.name == name) src = &f;
      if (!src) fail(ErrorKind::Mismatch, "structure has no component '" + name + "'", to_string(to), to_string(from));
      ValPtr c;
      try {
        c = run(ctx, src->term, src->sig, want, src->layout, or_leaf(fl));
      } catch (TypeErrorException& e) {
        e.error.message = "component '" + name + "': " + e.error.message;
        throw TypeErrorException(e.error);
      }
      comps.push_back(c);
      if (rest) s = subst(rest, c);
    }
    return record_val(comps);
  }

  [[noreturn]] static void mismatch(const Context& ctx, const SigPtr& from, const SigPtr& to) {
    fail(ErrorKind::Mismatch, "module does not match the signature", to_string(nbe::normal_sig(ctx, to)),
         to_string(nbe::normal_sig(ctx, from)));
  }
};

inline ValPtr coerce(const Context& ctx, const ValPtr& v, const SigPtr& from, const SigPtr& to,
                     const LayoutPtr& lf = Layout::leaf(), const LayoutPtr& lt = Layout::leaf()) {
  return Coercer{}.run(ctx, v, from, to, or_leaf(lf), or_leaf(lt));
}

/// Opaque ascription: the coercion, keeping only the target signature.
inline ValPtr seal(const Context& ctx, const ValPtr& v, const SigPtr& from, const SigPtr& to,
                   const LayoutPtr& lf = Layout::leaf(), const LayoutPtr& lt = Layout::leaf()) {
  return coerce(ctx, v, from, to, lf, lt);
}

}  // namespace modtt
