#pragma once

// Random instances of the equational laws and of the static-connectivity
// pairs, all well-typed in (extensions of) the ambient context.

#include <string>
#include <variant>
#include <vector>

#include "modtt/equality.hpp"
#include "support/gen.hpp"

namespace modtt::testing {

struct LawInstance {
  Context ctx;
  std::variant<std::pair<ValPtr, ValPtr>, std::pair<CmpPtr, CmpPtr>> sides;
  SigPtr sig;

  bool holds() const {
    if (auto* v = std::get_if<0>(&sides)) return equal_val(ctx, v->first, v->second, sig);
    auto& c = std::get<1>(sides);
    return equal_cmp(ctx, c.first, c.second, sig);
  }

  std::string str() const {
    if (auto* v = std::get_if<0>(&sides)) return to_string(v->first) + "  =  " + to_string(v->second);
    auto& c = std::get<1>(sides);
    return to_string(c.first) + "  =  " + to_string(c.second);
  }
};

enum class Law { MonadBeta, BindAssoc, ExtentBeta, ExtentEta, ExtentInversion, IfTrue, IfFalse, PiEta, SigmaEta };

inline const std::vector<std::pair<Law, std::string>>& all_laws() {
  static const std::vector<std::pair<Law, std::string>> laws{
      {Law::MonadBeta, "monad beta"},     {Law::BindAssoc, "bind associativity"},
      {Law::ExtentBeta, "extent beta"},   {Law::ExtentEta, "extent eta"},
      {Law::ExtentInversion, "extent inversion"}, {Law::IfTrue, "if beta (tt)"},
      {Law::IfFalse, "if beta (ff)"},     {Law::PiEta, "Pi eta"},
      {Law::SigmaEta, "Sigma eta"}};
  return laws;
}

class LawGen {
 public:
  explicit LawGen(std::uint64_t seed) : g_(seed) {}

  LawInstance make(Law law) {
    using namespace build;
    using Scope = TypedGen::Scope;
    Scope sc;
    auto ctx = Ambient::context();
    switch (law) {
      case Law::MonadBeta: {
        auto d1 = g_.data(), d2 = g_.data();
        auto v = g_.synth_val(sc, d1, 6);
        Scope inner{{d1}};
        auto m = g_.cmp(inner, d2, 12);
        return {ctx, std::pair{bind(susp(ret(v), data_sig(d1)), m), subst(m, v)}, data_sig(d2)};
      }
      case Law::BindAssoc: {
        auto da = g_.data(), db = g_.data(), dc = g_.data();
        auto s = g_.susp_val(sc, da, 8);
        auto m1 = g_.cmp(Scope{{da}}, db, 8);
        auto m2 = g_.cmp(Scope{{db}}, dc, 8);
        auto lhs = bind(susp(bind(s, m1), data_sig(db)), m2);
        auto rhs = bind(s, bind(susp(m1, data_sig(db)), shift(m2, 1, 1)));
        return {ctx, std::pair{lhs, rhs}, data_sig(dc)};
      }
      case Law::ExtentBeta: {
        if (pick(g_.rng(), 2) == 0) {
          auto d = g_.data();
          auto w = g_.val(sc, d, 8);
          auto v = g_.val(sc, d, 4);  // any static part: the sort is connected
          return {ctx, std::pair{out_ext(in_ext(v, w)), w}, data_sig(d)};
        }
        // Σ t:Type. Dyn t with a known type component
        auto s = sigma(sig_type(), dyn(var(0)));
        auto w = pair(bool_ty(), g_.val(sc, Data::Bool, 8));
        auto v = pair(bool_ty(), g_.val(sc, Data::Bool, 3));
        return {ctx, std::pair{out_ext(in_ext(v, w)), w}, s};
      }
      case Law::ExtentEta: {
        auto [base, st] = extent_target();
        auto x = ctx.extend(ext(base, st));
        auto s = shift(ext(base, st), 1);
        return {x, std::pair{var(0), in_ext(shift(st, 1), out_ext(var(0)))}, s};
      }
      case Law::ExtentInversion: {
        auto [base, st] = extent_target();
        auto x = ctx.extend(ext(base, st)).open_static();
        return {x, std::pair{out_ext(var(0)), shift(st, 1)}, shift(base, 1)};
      }
      case Law::IfTrue:
      case Law::IfFalse: {
        auto d = g_.data();
        auto m = g_.cmp(sc, d, 10);
        auto n = g_.cmp(sc, d, 10);
        auto c = law == Law::IfTrue ? tt() : ff();
        return {ctx, std::pair{if_(c, m, n), law == Law::IfTrue ? m : n}, data_sig(d)};
      }
      case Law::PiEta: {
        auto f = function_sig();
        auto x = ctx.extend(f);
        return {x, std::pair{var(0), lam(app(var(1), var(0)))}, shift(f, 1)};
      }
      case Law::SigmaEta: {
        auto p = pair_sig();
        auto x = ctx.extend(p);
        return {x, std::pair{var(0), pair(fst(var(0)), snd(var(0)))}, shift(p, 1)};
      }
    }
    throw std::logic_error("unknown law");
  }

  /// Two values of one statically connected sort, and the sort. `ctx` is the
  /// dynamic ambient context; callers add the static open themselves.
  struct Pair {
    ValPtr a, b;
    SigPtr sig;
  };

  Pair dyn_pair() {
    auto d = g_.data();
    return {g_.val({}, d, 8), g_.val({}, d, 8), data_sig(d)};
  }

  Pair cmp_pair() {
    auto d = g_.data();
    return {g_.susp_val({}, d, 12), g_.susp_val({}, d, 12), build::cmp_sig(data_sig(d))};
  }

  TypedGen& gen() { return g_; }

 private:
  TypedGen g_;

  std::pair<SigPtr, ValPtr> extent_target() {
    using namespace build;
    switch (pick(g_.rng(), 3)) {
      case 0: return {sig_type(), g_.type_code(4)};
      case 1: {
        auto d = g_.data();
        return {data_sig(d), g_.val({}, d, 4)};
      }
      default:
        return {sigma(sig_type(), dyn(var(0))), pair(g_.type_code(3), star())};
    }
  }

  SigPtr function_sig() {
    using namespace build;
    switch (pick(g_.rng(), 4)) {
      case 0: return pi(data_sig(g_.data()), data_sig(g_.data()));
      case 1: return pi(sig_type(), dyn(var(0)));
      case 2: return pi(data_sig(g_.data()), cmp_sig(data_sig(g_.data())));
      default: return pi(sig_type(), pi(dyn(var(0)), sigma(sig_type(), dyn(var(0)))));
    }
  }

  SigPtr pair_sig() {
    using namespace build;
    switch (pick(g_.rng(), 4)) {
      case 0: return sigma(data_sig(g_.data()), data_sig(g_.data()));
      case 1: return sigma(sig_type(), dyn(var(0)));
      case 2: return sigma(sig_type(), sigma(dyn(var(0)), cmp_sig(dyn(var(1)))));
      default: return sigma(ext(sig_type(), g_.type_code(3)), dyn(out_ext(var(0))));
    }
  }
};

}  // namespace modtt::testing
