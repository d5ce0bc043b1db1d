#pragma once

// Judgmental equality at the phase of the context. Inputs are checked (and
// annotated) first; ill-typed input raises TypeErrorException.

#include "modtt/checker.hpp"
#include "modtt/nbe.hpp"

namespace modtt {

inline bool equal_sig(const Context& ctx, const SigPtr& a, const SigPtr& b) {
  return nbe::conv_sig(ctx, annotate_sig(ctx, a), annotate_sig(ctx, b));
}

inline bool equal_val(const Context& ctx, const ValPtr& a, const ValPtr& b, const SigPtr& s) {
  auto sa = annotate_sig(ctx, s);
  return nbe::conv_val(ctx, annotate_val(ctx, a, sa), annotate_val(ctx, b, sa), sa);
}

inline bool equal_cmp(const Context& ctx, const CmpPtr& a, const CmpPtr& b, const SigPtr& s) {
  auto sa = annotate_sig(ctx, s);
  return nbe::conv_cmp(ctx, annotate_cmp(ctx, a, sa), annotate_cmp(ctx, b, sa), sa);
}

/// β-normal η-long form of a value at the phase of `ctx`.
inline ValPtr normalize_val(const Context& ctx, const ValPtr& v, const SigPtr& s) {
  auto sa = annotate_sig(ctx, s);
  return nbe::normal_val(ctx, annotate_val(ctx, v, sa), sa);
}

inline CmpPtr normalize_cmp(const Context& ctx, const CmpPtr& m, const SigPtr& s) {
  auto sa = annotate_sig(ctx, s);
  return nbe::normal_cmp(ctx, annotate_cmp(ctx, m, sa), sa);
}

inline SigPtr normalize_sig(const Context& ctx, const SigPtr& s) {
  return nbe::normal_sig(ctx, annotate_sig(ctx, s));
}

/// Semantic value of a closed-over-`ctx` term at a given phase: at the static
/// phase the statically connected sorts collapse to the point.
inline nbe::SemVal eval_at(const Context& ctx, const ValPtr& v, const SigPtr& s, Phase phase) {
  if (phase == Phase::Static &&
      (std::holds_alternative<sig::Dyn>(s->node) || std::holds_alternative<sig::Cmp>(s->node)))
    return nbe::mk(nbe::sv::Star{});
  auto sc = nbe::SemContext::of(ctx);
  return nbe::eval(sc.env, annotate_val(ctx, v, s));
}

inline nbe::SemCmp eval_at(const Context& ctx, const CmpPtr& m, const SigPtr& s, Phase phase) {
  if (phase == Phase::Static) return nbe::mkc(nbe::sc::Star{});
  auto sc = nbe::SemContext::of(ctx);
  return nbe::eval(sc.env, annotate_cmp(ctx, m, s));
}

}  // namespace modtt
