#include <gtest/gtest.h>

#include "modtt/coerce.hpp"
#include "modtt/elaborate.hpp"
#include "modtt/runtime.hpp"
#include "support/corpus.hpp"
#include "support/gen.hpp"

using namespace modtt;
using namespace modtt::build;
using namespace modtt::testing;

namespace {

const char* kShow = "signature SHOW = sig type t val show : t ~> string end\n";

SigPtr show_sig() { return sigma(sig_type(), dyn(arrow(var(0), list_ty(bool_ty())))); }

SigPtr queue_sig() {
  return sigma(sig_type(),
               sigma(dyn(var(0)), sigma(dyn(arrow(prod(bool_ty(), var(1)), var(1))),
                                        dyn(arrow(var(2), prod(bool_ty(), var(2)))))));
}

ValPtr show_bool() { return pfun(if_(var(0), ret(cons(tt(), nil())), ret(cons(ff(), nil())))); }

std::size_t index_of(const Program& p, const std::string& name) {
  for (std::size_t i = 0; i < p.items.size(); ++i)
    if (p.items[i].name == name) return p.items.size() - 1 - i;
  throw std::runtime_error("no item " + name);
}

LayoutPtr fields(std::initializer_list<const char*> names) {
  std::vector<std::pair<std::string, LayoutPtr>> fs;
  for (auto* n : names) fs.emplace_back(n, Layout::leaf());
  return Layout::record(fs);
}

}  // namespace

TEST(Parse, ShowSignature) {
  auto ds = surface::parse(kShow);
  ASSERT_EQ(ds.size(), 1u);
  auto* s = std::get_if<surface::decl::Signature>(&ds[0].node);
  ASSERT_TRUE(s);
  EXPECT_EQ(s->name, "SHOW");
}

TEST(Parse, EmptyFile) {
  EXPECT_TRUE(surface::parse("").empty());
  EXPECT_TRUE(surface::parse("(* only a comment *)\n").empty());
}

TEST(Parse, QueueStructureHasFourFields) {
  auto ds = surface::parse(corpus_file("queues.mtt"));
  const surface::decl::Structure* q0 = nullptr;
  for (auto& d : ds)
    if (auto* s = std::get_if<surface::decl::Structure>(&d.node); s && s->name == "Q0") q0 = s;
  ASSERT_TRUE(q0);
  ASSERT_TRUE(q0->asc);
  EXPECT_FALSE(q0->asc->opaque);
  auto* body = std::get_if<surface::me::Struct>(&q0->mod->node);
  ASSERT_TRUE(body);
  EXPECT_EQ(body->decls.size(), 4u);
}

TEST(Parse, ErrorsCarryPosition) {
  auto r = try_elaborate("structure = struct end");
  ASSERT_FALSE(r);
  EXPECT_EQ(r.error().kind, ErrorKind::Parse);
  EXPECT_EQ(r.error().span.line, 1);
}

TEST(ElabSig, QueueIsARightNestedSigma) {
  auto p = elaborate_file(corpus_file("queues.mtt"));
  auto* q = p.find_signature("QUEUE");
  ASSERT_TRUE(q);
  EXPECT_TRUE(equal_sig(p.context(q->depth), q->sig, queue_sig()));
  ASSERT_EQ(q->layout->kind, Layout::Kind::Record);
  std::vector<std::string> names;
  for (auto& [n, l] : q->layout->fields) names.push_back(n);
  EXPECT_EQ(names, (std::vector<std::string>{"t", "emp", "ins", "rem"}));
}

TEST(ElabSig, WhereTypeIsAnExtent) {
  auto p = elaborate_file(std::string(kShow) + "signature B = SHOW where type t = bool\n");
  EXPECT_EQ(to_string(p.closed_signature("B")), to_string(ext(show_sig(), pair(bool_ty(), star()))));
}

TEST(ElabSig, EmptySignatureIsTheStaticSingleton) {
  auto p = elaborate_file("signature E = sig end\n");
  EXPECT_EQ(to_string(p.closed_signature("E")), "(Ext Type bool)");
}

TEST(ElabSig, UnknownWherePathIsRejected) {
  auto r = try_elaborate(std::string(kShow) + "signature B = SHOW where type u = bool\n");
  ASSERT_FALSE(r);
}

TEST(ElabSig, WherePathMustBeStatic) {
  auto r = try_elaborate(std::string(kShow) + "signature B = SHOW where type show = bool\n");
  ASSERT_FALSE(r);
}

TEST(ElabMod, QueueImplementationsCheck) {
  auto p = elaborate_file(corpus_file("queues.mtt"));
  for (auto* name : {"Q0", "Q1", "Q1_negated", "Q1_norev", "Q1_swapped"}) {
    auto& it = *p.find(name);
    EXPECT_FALSE(check_val(p.context(it.level), it.def, it.sig)) << name;
    // transparent ascription keeps the type component visible
    auto* e = std::get_if<sig::Ext>(&it.sig->node);
    ASSERT_TRUE(e) << name;
    EXPECT_TRUE(equal_sig(p.context(it.level), e->base, queue_sig()));
  }
}

TEST(ElabMod, PathsBecomeProjections) {
  auto p = elaborate_file(corpus_file("good/show.mtt"));
  auto s = to_string(p.find("ShowProd")->sig);
  // S1.t and S2.t under the two functor parameters
  EXPECT_NE(s.find("(prod (fst #1) (fst #0))"), std::string::npos) << s;
}

TEST(ElabMod, FunctorApplicationsAreBound) {
  auto p = elaborate_file(corpus_file("good/namespace.mtt"));
  auto& ns1 = *p.find("NS1");
  auto& ns2 = *p.find("NS2");
  ASSERT_TRUE(ns1.bound());
  ASSERT_TRUE(ns2.bound());
  EXPECT_EQ(to_string(ns1.scrutinee), "(app #0 (out #1))");
  EXPECT_EQ(to_string(ns2.scrutinee), "(app #1 (out #2))");
  auto ctx = p.context();
  EXPECT_FALSE(equal_val(ctx, fst(var(index_of(p, "NS1"))), fst(var(index_of(p, "NS2"))), sig_type()));
}

TEST(ElabMod, UnboundFunctorApplicationIsRejected) {
  auto r = try_elaborate(corpus_file("bad/functor-unbound-app.mtt"));
  ASSERT_FALSE(r);
  EXPECT_EQ(r.error().kind, ErrorKind::Elab);
}

TEST(Soundness, EveryCorpusItemRechecks) {
  for (auto& f : good_files()) {
    auto p = elaborate_file(corpus_file(f));
    EXPECT_EQ(recheck(p), "") << f;
  }
}

TEST(Soundness, BadCorpusFailsWithTheExpectedKind) {
  for (auto& f : bad_files()) {
    auto r = try_elaborate(corpus_file(f + ".mtt"));
    ASSERT_FALSE(r) << f;
    auto expect = corpus_file(f + ".expect");
    expect.erase(expect.find_last_not_of(" \n\r\t") + 1);
    EXPECT_EQ(kind_name(r.error().kind), expect) << f << ": " << r.error().message;
  }
}

TEST(Coerce, ForgettingAnExtentIsOut) {
  auto e = ext(show_sig(), pair(bool_ty(), star()));
  auto ctx = Context{}.extend(e);
  auto r = coerce(ctx, var(0), shift(e, 1), shift(show_sig(), 1));
  EXPECT_EQ(to_string(r), "(out #0)");
}

TEST(Coerce, SelfificationIntroducesTheExtent) {
  auto v = pair(bool_ty(), show_bool());
  auto r = coerce(Context{}, v, show_sig(), ext(show_sig(), pair(bool_ty(), star())));
  EXPECT_EQ(to_string(r), to_string(in_ext(pair(bool_ty(), star()), v)));
}

TEST(Coerce, StaticMismatchIsReported) {
  auto v = pair(list_ty(bool_ty()), pfun(ret(var(0))));
  try {
    coerce(Context{}, v, show_sig(), ext(show_sig(), pair(bool_ty(), star())));
    FAIL() << "coercion should fail";
  } catch (const TypeErrorException& e) {
    EXPECT_EQ(e.error.kind, ErrorKind::ExtentSideCondition);
  }
}

TEST(Coerce, SwapsFieldsOfEqualSignatures) {
  auto s = sigma(dyn_bool(), dyn_bool());
  auto r = coerce(Context{}, pair(tt(), ff()), s, s, fields({"a", "b"}), fields({"b", "a"}));
  EXPECT_EQ(to_string(r), "(pair ff tt)");
}

TEST(Coerce, MissingFieldIsReported) {
  auto from = sigma(dyn_bool(), dyn_bool());
  auto to = sigma(dyn_bool(), dyn_bool());
  try {
    coerce(Context{}, pair(tt(), ff()), from, to, fields({"a", "b"}), fields({"a", "c"}));
    FAIL() << "coercion should fail";
  } catch (const TypeErrorException& e) {
    EXPECT_EQ(e.error.kind, ErrorKind::Mismatch);
  }
}

TEST(Coerce, PermutedWidthRoundTrip) {
  TypedGen g(31);
  auto ctx = Ambient::context();
  const char* names[] = {"a", "b", "c"};
  for (int i = 0; i < 200; ++i) {
    Data d[3] = {g.data(), g.data(), g.data()};
    ValPtr v[3] = {g.val({}, d[0], 6), g.val({}, d[1], 6), g.val({}, d[2], 6)};
    auto from = sigma(data_sig(d[0]), sigma(data_sig(d[1]), data_sig(d[2])));
    auto value = pair(v[0], pair(v[1], v[2]));
    // pick two distinct fields in either order
    int x = pick(g.rng(), 3), y = (x + 1 + pick(g.rng(), 2)) % 3;
    auto to = sigma(data_sig(d[x]), data_sig(d[y]));
    auto r = coerce(ctx, value, from, to, fields({"a", "b", "c"}), fields({names[x], names[y]}));
    ASSERT_FALSE(check_val(ctx, r, to));
    ASSERT_TRUE(equal_val(ctx, proj_fst(r), v[x], data_sig(d[x])));
    ASSERT_TRUE(equal_val(ctx, proj_snd(r), v[y], data_sig(d[y])));
  }
}

TEST(Coerce, Coherence) {
  TypedGen g(37);
  auto ctx = Ambient::context();
  for (int i = 0; i < 200; ++i) {
    Data d[3] = {g.data(), g.data(), g.data()};
    auto from = sigma(data_sig(d[0]), sigma(data_sig(d[1]), data_sig(d[2])));
    auto value = pair(g.val({}, d[0], 6), pair(g.val({}, d[1], 6), g.val({}, d[2], 6)));
    auto lf = fields({"a", "b", "c"});
    // τ drops b and swaps; σ' keeps only a
    auto tau = sigma(data_sig(d[2]), data_sig(d[0]));
    auto lt = fields({"c", "a"});
    auto last = data_sig(d[0]);
    auto ll = fields({"a"});
    auto two_step = coerce(ctx, coerce(ctx, value, from, tau, lf, lt), tau, last, lt, ll);
    auto direct = coerce(ctx, value, from, last, lf, ll);
    ASSERT_TRUE(equal_val(ctx, two_step, direct, last));
  }
}

TEST(Coerce, CoherenceOnCorpusModules) {
  auto p = elaborate_file(corpus_file("queues.mtt"));
  auto& q = *p.find("Q0");
  auto ctx = p.context();
  auto v = var(index_of(p, "Q0"));
  auto s = shift(q.sig, p.items.size() - q.level);
  auto queue = queue_sig();
  auto once = coerce(ctx, v, s, queue, q.layout, q.layout);
  auto twice = coerce(ctx, coerce(ctx, v, s, queue, q.layout, q.layout), queue, queue, q.layout, q.layout);
  EXPECT_TRUE(equal_val(ctx, once, twice, queue));
  EXPECT_TRUE(equal_val(ctx, once, out_ext(v), queue));
}

TEST(Seal, QueueAscriptionDropsOnlyTheExtent) {
  auto p = elaborate_file(corpus_file("queues.mtt"));
  auto& q = *p.find("Q0");
  auto ctx = p.context();
  auto v = var(index_of(p, "Q0"));
  auto s = shift(q.sig, p.items.size() - q.level);
  auto sealed = seal(ctx, v, s, queue_sig(), q.layout, q.layout);
  EXPECT_EQ(to_string(sealed), to_string(out_ext(v)));
  EXPECT_FALSE(check_val(ctx, sealed, queue_sig()));
}

TEST(Seal, TransparentShowBecomesOut) {
  auto e = ext(show_sig(), pair(bool_ty(), star()));
  auto ctx = Context{}.extend(e);
  EXPECT_EQ(to_string(seal(ctx, var(0), shift(e, 1), show_sig())), "(out #0)");
  // on a literal the elimination is already reduced
  auto v = in_ext(pair(bool_ty(), star()), pair(bool_ty(), show_bool()));
  auto r = seal(Context{}, v, e, show_sig());
  EXPECT_TRUE(equal_val(Context{}, r, out_ext(v), show_sig()));
}

TEST(Seal, IdentityIsUnchanged) {
  auto v = pair(bool_ty(), show_bool());
  EXPECT_TRUE(same(seal(Context{}, v, show_sig(), show_sig()), v));
}

TEST(Layout, ProjectionsReturnFieldDefinitions) {
  auto p = elaborate_file(corpus_file("queues.mtt"));
  auto& q0 = *p.find("Q0");
  auto fs = fields_of(p.closed_value("Q0"), p.closed_sig("Q0"), q0.layout);
  ASSERT_EQ(fs.size(), 4u);
  EXPECT_EQ(fs[0].name, "t");
  EXPECT_TRUE(equal_val(Context{}, fs[0].term, list_ty(bool_ty()), sig_type()));
  EXPECT_EQ(fs[1].name, "emp");
  EXPECT_TRUE(equal_val(Context{}, fs[1].term, nil(), dyn(list_ty(bool_ty()))));
  // ins (x, q) = ret (x :: q)
  EXPECT_EQ(fs[2].name, "ins");
  auto ins = pfun(ret(cons(fst(var(0)), snd(var(0)))));
  EXPECT_TRUE(equal_val(Context{}, fs[2].term, ins, dyn(arrow(prod(bool_ty(), list_ty(bool_ty())), list_ty(bool_ty())))));

  auto& q1 = *p.find("Q1");
  auto gs = fields_of(p.closed_value("Q1"), p.closed_sig("Q1"), q1.layout);
  ASSERT_EQ(gs.size(), 4u);
  auto lb = list_ty(bool_ty());
  EXPECT_TRUE(equal_val(Context{}, gs[0].term, prod(lb, lb), sig_type()));
  EXPECT_TRUE(equal_val(Context{}, gs[1].term, pair(nil(), nil()), dyn(prod(lb, lb))));
}

TEST(Layout, NestedStructureFieldsResolve) {
  auto p = elaborate_file(corpus_file("good/where-type.mtt"));
  auto& two = *p.find("Two");
  ASSERT_EQ(two.layout->kind, Layout::Kind::Record);
  EXPECT_EQ(two.layout->index_of("A"), 0);
  EXPECT_EQ(two.layout->index_of("B"), 1);
  auto ctx = p.context();
  auto fs = fields_of(var(index_of(p, "Two")), shift(two.sig, p.items.size() - two.level), two.layout);
  ASSERT_EQ(fs.size(), 2u);
  auto inner = fields_of(fs[0].term, fs[0].sig, fs[0].layout);
  ASSERT_EQ(inner.size(), 2u);
  EXPECT_TRUE(equal_val(ctx, inner[0].term, bool_ty(), sig_type()));
  // sharing: B.t is A.t
  auto other = fields_of(fs[1].term, fs[1].sig, fs[1].layout);
  EXPECT_TRUE(equal_val(ctx, other[0].term, inner[0].term, sig_type()));
}

TEST(LetAbstraction, SealedCopiesAreDistinctTransparentCopiesShare) {
  auto p = elaborate_file(corpus_file("good/debruijn.mtt"));
  auto ctx = p.context();
  auto ty = [&](const char* n, bool transparent) {
    auto x = var(index_of(p, n));
    return fst(transparent ? out_ext(x) : x);
  };
  EXPECT_FALSE(equal_val(ctx, ty("Level", false), ty("Index", false), sig_type()));
  EXPECT_TRUE(equal_val(ctx, ty("LevelT", true), ty("IndexT", true), sig_type()));
  EXPECT_TRUE(equal_val(ctx, ty("LevelT", true), bool_ty(), sig_type()));

  // all four copies compute the same equality test
  auto eq_of = [&](const char* n) { return snd(strip_ext(p.closed_value(n), p.closed_sig(n)).first); };
  for (auto a : {tt(), ff()})
    for (auto b : {tt(), ff()}) {
      auto base = run_cmp(app_p(eq_of("BoolEq"), pair(a, b)));
      for (auto* n : {"Level", "Index", "LevelT", "IndexT"})
        EXPECT_TRUE(observe_eq(base, run_cmp(app_p(eq_of(n), pair(a, b))))) << n;
    }
}

TEST(Emit, CoreDumpMentionsEveryItem) {
  auto p = elaborate_file(corpus_file("good/namespace.mtt"));
  auto dump = p.emit_core();
  for (auto& it : p.items) EXPECT_NE(dump.find(it.kind + " " + it.name + " : "), std::string::npos) << it.name;
}
