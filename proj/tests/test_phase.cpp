#include <gtest/gtest.h>

#include "modtt/elaborate.hpp"
#include "modtt/phase.hpp"
#include "support/corpus.hpp"
#include "support/laws.hpp"

using namespace modtt;
using namespace modtt::build;
using namespace modtt::testing;

namespace {

SigPtr show_sig() { return sigma(sig_type(), dyn(arrow(var(0), list_ty(bool_ty())))); }

SigPtr queue_sig() {
  return sigma(sig_type(),
               sigma(dyn(var(0)), sigma(dyn(arrow(prod(bool_ty(), var(1)), var(1))),
                                        dyn(arrow(var(2), prod(bool_ty(), var(2)))))));
}

// Well-formed signatures over a scope of Type, Ext(Type, c) and other binders.
class SigGen {
 public:
  enum Kind { TypeVar, ExtVar, Other };
  explicit SigGen(std::uint64_t seed) : rng_(seed) {}

  ValPtr code(const std::vector<Kind>& sc, int budget) {
    std::vector<ValPtr> leaves{bool_ty()};
    for (std::size_t lvl = 0; lvl < sc.size(); ++lvl) {
      auto ix = sc.size() - 1 - lvl;
      if (sc[lvl] == TypeVar) leaves.push_back(var(ix));
      if (sc[lvl] == ExtVar) leaves.push_back(out_ext(var(ix)));
    }
    if (budget <= 1) return leaves[pick(rng_, leaves.size())];
    switch (pick(rng_, 4)) {
      case 0: return leaves[pick(rng_, leaves.size())];
      case 1: return list_ty(code(sc, budget - 1));
      case 2: return prod(code(sc, budget / 2), code(sc, budget / 2));
      default: return arrow(code(sc, budget / 2), code(sc, budget / 2));
    }
  }

  SigPtr sig(const std::vector<Kind>& sc, int budget, bool allow_dyn) {
    int n = allow_dyn ? 6 : 4;
    if (budget <= 1) return allow_dyn && pick(rng_, 2) ? dyn(code(sc, 1)) : sig_type();
    switch (pick(rng_, n)) {
      case 0: return sig_type();
      case 1: return ext(sig_type(), code(sc, budget - 1));
      case 2:
      case 3: {
        auto a = sig(sc, budget / 2, allow_dyn);
        auto inner = sc;
        inner.push_back(kind_of(a));
        auto b = sig(inner, budget / 2, allow_dyn);
        return pick(rng_, 2) ? pi(a, b) : sigma(a, b);
      }
      case 4: return dyn(code(sc, budget - 1));
      default: return cmp_sig(sig(sc, budget - 1, allow_dyn));
    }
  }

  Rng& rng() { return rng_; }

 private:
  Rng rng_;

  static Kind kind_of(const SigPtr& s) {
    if (std::holds_alternative<sig::Type>(s->node)) return TypeVar;
    if (auto* e = std::get_if<sig::Ext>(&s->node); e && std::holds_alternative<sig::Type>(e->base->node)) return ExtVar;
    return Other;
  }
};

std::vector<std::pair<Context, SigPtr>> corpus_signatures() {
  std::vector<std::pair<Context, SigPtr>> out;
  for (auto& f : good_files()) {
    auto p = elaborate_file(corpus_file(f));
    for (auto& s : p.signatures) out.emplace_back(p.context(s.depth), s.sig);
    for (std::size_t i = 0; i < p.items.size(); ++i) out.emplace_back(p.context(i), p.items[i].sig);
  }
  return out;
}

}  // namespace

TEST(StaticPartSig, ShowKeepsOnlyTheType) {
  EXPECT_EQ(to_string(static_part_sig(Context{}, show_sig())), "(Sigma Type *)");
}

TEST(StaticPartSig, TypeIsFixed) { EXPECT_EQ(to_string(static_part_sig(Context{}, sig_type())), "Type"); }

TEST(StaticPartSig, ComputationCollapses) {
  EXPECT_EQ(to_string(static_part_sig(Context{}, cmp_sig(dyn_bool()))), "*");
}

TEST(StaticPartSig, ExtentOverDynamicCollapses) {
  EXPECT_EQ(to_string(static_part_sig(Context{}, ext(dyn_bool(), tt()))), "*");
  EXPECT_EQ(to_string(static_part_sig(Context{}, ext(show_sig(), pair(bool_ty(), star())))),
            "(Ext (Sigma Type *) (pair bool *))");
}

TEST(StaticPartVal, ShowImplementation) {
  auto impl = pair(bool_ty(), pfun(if_(var(0), ret(cons(tt(), nil())), ret(nil()))));
  EXPECT_EQ(to_string(static_part_val(Context{}, impl, show_sig())), "(pair bool *)");
}

TEST(StaticPartVal, TypeCode) {
  EXPECT_EQ(to_string(static_part_val(Context{}, bool_ty(), sig_type())), "bool");
}

TEST(StaticPartVal, QueueImplementation) {
  auto p = elaborate_file(corpus_file("queues.mtt"));
  auto ctx = p.context();
  auto& q0 = *p.find("Q0");
  auto x = var(p.items.size() - 1 - q0.level);
  EXPECT_EQ(to_string(static_part_val(ctx, out_ext(x), queue_sig())), "(pair (list bool) (pair * (pair * *)))");
  // straight from the definition as well
  EXPECT_EQ(to_string(static_part_val(p.context(q0.level), proj_out(q0.def), queue_sig())),
            "(pair (list bool) (pair * (pair * *)))");
}

TEST(StaticIsoArrow, Examples) {
  EXPECT_TRUE(check_static_iso_arrow(Context{}, show_sig(), shift(show_sig(), 1)));
  EXPECT_TRUE(check_static_iso_arrow(Context{}, sig_type(), sig_type()));
  EXPECT_TRUE(check_static_iso_arrow(Context{}, dyn_bool(), shift(queue_sig(), 1)));
}

TEST(StaticIsoArrow, DependentCodomain) {
  // Π (t : Type). Ext(Type, t × bool): the codomain refers to the argument
  EXPECT_TRUE(check_static_iso_arrow(Context{}, sig_type(), ext(sig_type(), prod(var(0), bool_ty()))));
}

TEST(StaticIsoArrow, GeneratedSignatures) {
  SigGen g(3);
  for (int i = 0; i < 300; ++i) {
    auto a = g.sig({}, 8, true);
    auto b = g.sig({SigGen::Other}, 8, true);
    ASSERT_TRUE(check_static_iso_arrow(Context{}, a, b)) << to_string(a) << " -> " << to_string(b);
  }
}

TEST(Idempotence, CorpusSignatures) {
  for (auto& [ctx, s] : corpus_signatures()) {
    auto once = static_part_sig(ctx, s);
    auto twice = static_part_sig(ctx, once);
    ASSERT_TRUE(same(once, twice)) << to_string(once) << " vs " << to_string(twice);
  }
}

TEST(Idempotence, GeneratedSignatures) {
  SigGen g(5);
  auto ctx = Context{}.extend(sig_type());
  for (int i = 0; i < 500; ++i) {
    auto s = g.sig({SigGen::TypeVar}, 14, true);
    auto once = static_part_sig(ctx, s);
    ASSERT_TRUE(same(once, static_part_sig(ctx, once))) << to_string(s);
  }
}

TEST(PurelyStatic, IsAFixedPoint) {
  SigGen g(7);
  auto ctx = Context{}.extend(sig_type());
  for (int i = 0; i < 500; ++i) {
    auto s = g.sig({SigGen::TypeVar}, 14, false);
    auto whole = phase_detail::skeleton_of(normalize_sig(ctx, s));
    ASSERT_TRUE(same(static_part_sig(ctx, s), whole)) << to_string(s);
  }
}

TEST(Naturality, CommutesWithSubstitution) {
  SigGen g(9);
  TypedGen codes(10);
  for (int i = 0; i < 500; ++i) {
    auto s = g.sig({SigGen::TypeVar}, 14, true);
    auto u = codes.type_code(5);
    auto direct = static_part_sig(Context{}, subst(s, u));
    auto projected = to_signature(static_part_sig(Context{}.extend(sig_type()), s));
    auto after = static_part_sig(Context{}, subst(projected, u));
    ASSERT_TRUE(same(direct, after)) << to_string(s) << " [" << to_string(u) << "]";
  }
}

TEST(StaticPartVal, DependsOnlyOnTheStaticClass) {
  LawGen g(21);
  auto ctx = Ambient::context();
  for (int i = 0; i < 200; ++i) {
    auto p = i % 2 ? g.dyn_pair() : g.cmp_pair();
    ASSERT_TRUE(equal_val(ctx.open_static(), p.a, p.b, p.sig));
    ASSERT_EQ(to_string(static_part_val(ctx, p.a, p.sig)), to_string(static_part_val(ctx, p.b, p.sig)));
  }
  // a type component survives, the program next to it does not
  auto s = sigma(sig_type(), dyn(var(0)));
  EXPECT_EQ(to_string(static_part_val(Context{}, pair(bool_ty(), tt()), s)),
            to_string(static_part_val(Context{}, pair(bool_ty(), ff()), s)));
  EXPECT_NE(to_string(static_part_val(Context{}, pair(bool_ty(), tt()), s)),
            to_string(static_part_val(Context{}, pair(list_ty(bool_ty()), nil()), s)));
}
