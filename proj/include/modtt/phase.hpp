#pragma once

// Static parts of signatures and modules, computed by normalizing under an
// appended static open.

#include <memory>
#include <sstream>
#include <string>
#include <variant>

#include "modtt/equality.hpp"

namespace modtt {

struct SkelNode;
using Skeleton = std::shared_ptr<const SkelNode>;

namespace sk {
struct Type {};
/// A statically connected position (Dyn or Cmp): the singleton.
struct Unit {};
struct Pi { Skeleton dom, cod; };
struct Sigma { Skeleton fst, snd; };
struct Ext { Skeleton base; ValPtr static_val; };
}  // namespace sk

struct SkelNode {
  std::variant<sk::Type, sk::Unit, sk::Pi, sk::Sigma, sk::Ext> node;
};

namespace phase_detail {

inline Skeleton mk(decltype(SkelNode::node) n) { return std::make_shared<const SkelNode>(SkelNode{std::move(n)}); }

// `s` is a normal signature.
inline Skeleton skeleton_of(const SigPtr& s) {
  return std::visit(overloaded{
                        [](const sig::Type&) { return mk(sk::Type{}); },
                        [](const sig::Dyn&) { return mk(sk::Unit{}); },
                        [](const sig::Cmp&) { return mk(sk::Unit{}); },
                        [](const sig::Pi& p) { return mk(sk::Pi{skeleton_of(p.dom), skeleton_of(p.cod)}); },
                        [](const sig::Sigma& p) { return mk(sk::Sigma{skeleton_of(p.fst), skeleton_of(p.snd)}); },
                        [](const sig::Ext& e) {
                          auto base = skeleton_of(e.base);
                          if (std::holds_alternative<sk::Unit>(base->node)) return base;
                          return mk(sk::Ext{base, e.static_val});
                        },
                    },
                    s->node);
}

}  // namespace phase_detail

inline bool same(const Skeleton& a, const Skeleton& b) {
  if (a->node.index() != b->node.index()) return false;
  return std::visit(overloaded{
                        [&](const sk::Pi& x) {
                          auto& y = std::get<sk::Pi>(b->node);
                          return same(x.dom, y.dom) && same(x.cod, y.cod);
                        },
                        [&](const sk::Sigma& x) {
                          auto& y = std::get<sk::Sigma>(b->node);
                          return same(x.fst, y.fst) && same(x.snd, y.snd);
                        },
                        [&](const sk::Ext& x) {
                          auto& y = std::get<sk::Ext>(b->node);
                          return same(x.base, y.base) && same(x.static_val, y.static_val);
                        },
                        [](const auto&) { return true; },
                    },
                    a->node);
}

inline std::string to_string(const Skeleton& s) {
  return std::visit(overloaded{
                        [](const sk::Type&) { return std::string("Type"); },
                        [](const sk::Unit&) { return std::string("*"); },
                        [](const sk::Pi& p) { return "(Pi " + to_string(p.dom) + " " + to_string(p.cod) + ")"; },
                        [](const sk::Sigma& p) {
                          return "(Sigma " + to_string(p.fst) + " " + to_string(p.snd) + ")";
                        },
                        [](const sk::Ext& e) {
                          return "(Ext " + to_string(e.base) + " " + modtt::to_string(e.static_val) + ")";
                        },
                    },
                    s->node);
}

/// A signature with the given skeleton; singleton positions become Dyn(bool).
inline SigPtr to_signature(const Skeleton& s) {
  using namespace build;
  return std::visit(overloaded{
                        [](const sk::Type&) { return sig_type(); },
                        [](const sk::Unit&) { return dyn_bool(); },
                        [](const sk::Pi& p) { return pi(to_signature(p.dom), to_signature(p.cod)); },
                        [](const sk::Sigma& p) { return sigma(to_signature(p.fst), to_signature(p.snd)); },
                        [](const sk::Ext& e) { return ext(to_signature(e.base), e.static_val); },
                    },
                    s->node);
}

inline Skeleton static_part_sig(const Context& ctx, const SigPtr& s) {
  return phase_detail::skeleton_of(normalize_sig(ctx.open_static(), s));
}

inline Skeleton static_part_sig(const Context& ctx, const Skeleton& s) { return static_part_sig(ctx, to_signature(s)); }

inline ValPtr static_part_val(const Context& ctx, const ValPtr& v, const SigPtr& s) {
  return normalize_val(ctx.open_static(), v, s);
}

/// ⊙(Π σ. τ) against Π ⊙σ. ⊙τ, where the codomain on the right is projected
/// with the argument under the static open.
inline bool check_static_iso_arrow(const Context& ctx, const SigPtr& dom, const SigPtr& cod) {
  auto whole = static_part_sig(ctx, build::pi(dom, cod));
  auto split = phase_detail::mk(
      sk::Pi{static_part_sig(ctx, dom), static_part_sig(ctx.open_static().extend(dom), cod)});
  return same(whole, split);
}

}  // namespace modtt
