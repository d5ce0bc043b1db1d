#pragma once

// Client-agreement testing for queue-shaped modules: scripts of ins/rem
// operations are compiled to closed clients f : Π(X : σ). ○Dyn(bool), run
// against two implementations, and the boolean observations compared.

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <optional>
#include <random>
#include <string>
#include <thread>
#include <variant>
#include <vector>

#include "modtt/checker.hpp"
#include "modtt/coerce.hpp"
#include "modtt/elaborate.hpp"
#include "modtt/print.hpp"
#include "modtt/runtime.hpp"
#include "modtt/syntax.hpp"

namespace modtt {

struct Ins { bool bit = false; };
struct Rem {};
using Op = std::variant<Ins, Rem>;

enum class FoldMode { LastBit, Xor, ObserveThrow };

inline std::string mode_name(FoldMode m) {
  switch (m) {
    case FoldMode::LastBit: return "last-bit";
    case FoldMode::Xor: return "xor";
    case FoldMode::ObserveThrow: return "observe-throw";
  }
  return "?";
}

struct OpScript {
  std::vector<Op> ops;
  FoldMode mode = FoldMode::LastBit;

  std::string str() const {
    std::string out = mode_name(mode) + ":";
    for (auto& op : ops) {
      if (auto* i = std::get_if<Ins>(&op)) out += i->bit ? " ins tt;" : " ins ff;";
      else out += " rem;";
    }
    if (!ops.empty()) out.pop_back();
    return out;
  }
};

inline bool operator==(const OpScript& a, const OpScript& b) {
  if (a.mode != b.mode || a.ops.size() != b.ops.size()) return false;
  for (std::size_t i = 0; i < a.ops.size(); ++i) {
    if (a.ops[i].index() != b.ops[i].index()) return false;
    if (auto* x = std::get_if<Ins>(&a.ops[i]); x && x->bit != std::get<Ins>(b.ops[i]).bit) return false;
  }
  return true;
}

/// Length 1 + r % max_len, then the mode, then each operation: Ins with
/// probability 6/10 (bit from the low bit of the next draw), else Rem.
inline OpScript gen_script(std::uint64_t seed, std::size_t max_len) {
  if (max_len == 0) throw std::invalid_argument("gen_script: max_len must be at least 1");
  std::mt19937_64 rng(seed);
  OpScript s;
  auto len = 1 + rng() % max_len;
  s.mode = static_cast<FoldMode>(rng() % 3);
  for (std::size_t i = 0; i < len; ++i) {
    if (rng() % 10 < 6) s.ops.push_back(Ins{(rng() & 1) == 1});
    else s.ops.push_back(Rem{});
  }
  return s;
}

/// Where a QUEUE-shaped signature keeps its operations.
struct QueueShape {
  SigPtr sig;  // closed, no outer extent
  LayoutPtr layout;
};

struct ClientProgram {
  ValPtr term;  // closed, of signature Π(X : σ). ○Dyn(bool)
  std::string source;
};

namespace paramtest_detail {

struct Ops {
  ValPtr emp, ins, rem;  // projections of variable 0 (the client's argument)
};

inline Ops queue_ops(const QueueShape& q) {
  Ops out;
  auto fields = fields_of(build::var(0), shift(q.sig, 1), q.layout);
  for (auto& f : fields) {
    if (f.name == "emp") out.emp = f.term;
    if (f.name == "ins") out.ins = f.term;
    if (f.name == "rem") out.rem = f.term;
  }
  if (!out.emp || !out.ins || !out.rem)
    fail(ErrorKind::Elab, "signature has no emp/ins/rem components; it is not queue-shaped");
  return out;
}

}  // namespace paramtest_detail

/// Builds λX. ⟨…⟩ running the script from X.emp. Every operation is bound,
/// so a throwing rem aborts the whole client.
inline ClientProgram compile_script(const OpScript& s, const QueueShape& shape) {
  using namespace build;
  auto ops = paramtest_detail::queue_ops(shape);

  std::size_t cut = s.ops.size();
  bool underflow = false;
  if (s.mode == FoldMode::ObserveThrow) {
    long balance = 0;
    for (std::size_t i = 0; i < s.ops.size(); ++i) {
      if (std::holds_alternative<Ins>(s.ops[i])) {
        ++balance;
      } else if (balance == 0) {
        cut = i;
        underflow = true;
        break;
      } else {
        --balance;
      }
    }
  }

  // Built back to front: `k(depth, q, acc)` closes the remaining script.
  std::function<CmpPtr(std::size_t, std::size_t, ValPtr, ValPtr)> go = [&](std::size_t i, std::size_t depth,
                                                                          ValPtr q, ValPtr acc) -> CmpPtr {
    if (i == cut) {
      if (s.mode == FoldMode::ObserveThrow) return ret(underflow ? tt() : ff());
      return ret(acc);
    }
    if (auto* in = std::get_if<Ins>(&s.ops[i])) {
      auto call = susp(app_p(shift(ops.ins, depth), pair(in->bit ? tt() : ff(), q)));
      return bind(call, go(i + 1, depth + 1, var(0), shift(acc, 1)));
    }
    auto call = susp(app_p(shift(ops.rem, depth), q));
    auto bit = fst(var(0));
    auto rest_q = snd(var(0));
    if (s.mode == FoldMode::Xor) {
      auto a = shift(acc, 1);
      auto x = susp(if_(a, if_(bit, ret(ff()), ret(tt())), ret(bit)));
      return bind(call, bind(x, go(i + 1, depth + 2, shift(rest_q, 1), var(0))));
    }
    auto next_acc = s.mode == FoldMode::LastBit ? bit : shift(acc, 1);
    return bind(call, go(i + 1, depth + 1, rest_q, next_acc));
  };
  auto body = go(0, 0, ops.emp, ff());
  auto f = lam(susp(body, dyn_bool()));
  f = annotate_val(Context{}, f, pi(shape.sig, cmp_sig(dyn_bool())));
  return {f, s.str()};
}

struct Agree {};
struct Disagree {
  RunResult left, right;
};
struct Inconclusive {
  std::string reason;
};
using Verdict = std::variant<Agree, Disagree, Inconclusive>;

inline CmpPtr apply_client(const ValPtr& f, const ValPtr& m) {
  using namespace build;
  return bind(app(f, m), ret(var(0)));
}

inline Verdict relate(const ClientProgram& f, const ValPtr& m0, const ValPtr& m1, std::uint64_t fuel = kDefaultFuel) {
  auto a = run_cmp(apply_client(f.term, m0), fuel);
  auto b = run_cmp(apply_client(f.term, m1), fuel);
  if (std::holds_alternative<FuelExhausted>(a) || std::holds_alternative<FuelExhausted>(b))
    return Inconclusive{"fuel exhausted"};
  try {
    if (observe_eq(a, b)) return Agree{};
  } catch (const ObservationError& e) {
    return Inconclusive{e.what()};
  }
  return Disagree{a, b};
}

/// A closed implementation: the module value obtained by running the
/// elaborated program up to the item, whose signature (once its extent is
/// dropped) must be the shared one.
struct Implementation {
  std::string name;
  ValPtr value;
};

inline QueueShape queue_shape(const Program& p, const std::string& sig_name) {
  auto* s = p.find_signature(sig_name);
  if (!s) fail(ErrorKind::Unbound, "no signature named '" + sig_name + "'");
  auto sg = strip_ext(build::var(0), p.closed_signature(sig_name)).second;
  return {sg, s->layout};
}

inline Implementation implementation(const Program& p, const std::string& name, const QueueShape& shape) {
  auto produced = strip_ext(build::var(0), p.closed_run_sig(name)).second;
  if (!nbe::conv_sig(Context{}, produced, shape.sig))
    fail(ErrorKind::Mismatch, "'" + name + "' does not have the shared signature", to_string(shape.sig),
         to_string(produced));
  auto r = run_cmp(p.closed_run(name));
  auto* v = std::get_if<Returned>(&r);
  if (!v) fail(ErrorKind::Elab, "running '" + name + "' did not produce a module (" + describe(r) + ")");
  return {name, v->value};
}

struct Counterexample {
  std::uint64_t seed = 0;
  OpScript script;
  OpScript shrunk;
  RunResult left, right;
};

struct CampaignReport {
  std::size_t clients = 0;
  std::size_t agree = 0;
  std::size_t disagree = 0;
  std::size_t inconclusive = 0;
  std::optional<Counterexample> first;  // lowest seed that disagreed
};

/// Drops operations (one at a time, greedily) while the disagreement persists.
inline OpScript shrink(const OpScript& s, const QueueShape& shape, const ValPtr& m0, const ValPtr& m1,
                       std::uint64_t fuel = kDefaultFuel) {
  auto fails = [&](const OpScript& t) {
    return std::holds_alternative<Disagree>(relate(compile_script(t, shape), m0, m1, fuel));
  };
  OpScript cur = s;
  bool progress = true;
  while (progress) {
    progress = false;
    for (std::size_t i = 0; i < cur.ops.size(); ++i) {
      OpScript t = cur;
      t.ops.erase(t.ops.begin() + static_cast<long>(i));
      if (fails(t)) {
        cur = std::move(t);
        progress = true;
        break;
      }
    }
  }
  return cur;
}

/// Client i uses seed seed0 + i. Workers claim indices from a shared
/// counter; the report only depends on (seed0, n_clients).
inline CampaignReport campaign(const Implementation& m0, const Implementation& m1, const QueueShape& shape,
                               std::size_t n_clients, std::size_t max_len, std::uint64_t seed0,
                               std::uint64_t fuel = kDefaultFuel, unsigned workers = 0) {
  std::vector<int> verdicts(n_clients, 0);  // 0 agree, 1 disagree, 2 inconclusive
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i; (i = next.fetch_add(1)) < n_clients;) {
      auto script = gen_script(seed0 + i, max_len);
      auto v = relate(compile_script(script, shape), m0.value, m1.value, fuel);
      verdicts[i] = static_cast<int>(v.index());
    }
  };
  if (workers == 0) workers = std::max(1u, std::thread::hardware_concurrency());
  workers = static_cast<unsigned>(std::min<std::size_t>(workers, std::max<std::size_t>(n_clients, 1)));
  std::vector<std::thread> pool;
  for (unsigned w = 1; w < workers; ++w) pool.emplace_back(work);
  work();
  for (auto& t : pool) t.join();

  CampaignReport r;
  r.clients = n_clients;
  for (std::size_t i = 0; i < n_clients; ++i) {
    if (verdicts[i] == 0) ++r.agree;
    if (verdicts[i] == 2) ++r.inconclusive;
    if (verdicts[i] != 1) continue;
    ++r.disagree;
    if (r.first) continue;
    auto script = gen_script(seed0 + i, max_len);
    auto small = shrink(script, shape, m0.value, m1.value, fuel);
    auto d = std::get<Disagree>(relate(compile_script(small, shape), m0.value, m1.value, fuel));
    r.first = Counterexample{seed0 + i, script, small, d.left, d.right};
  }
  return r;
}

/// Every script over {ins tt, ins ff, rem} of length ≤ max_len, in each mode.
inline std::vector<OpScript> all_scripts(std::size_t max_len) {
  std::vector<OpScript> out;
  std::vector<std::vector<Op>> layer{{}};
  for (std::size_t len = 0; len <= max_len; ++len) {
    for (auto& ops : layer)
      for (auto m : {FoldMode::LastBit, FoldMode::Xor, FoldMode::ObserveThrow}) out.push_back({ops, m});
    std::vector<std::vector<Op>> next;
    for (auto& ops : layer) {
      for (Op op : {Op{Ins{true}}, Op{Ins{false}}, Op{Rem{}}}) {
        auto o = ops;
        o.push_back(op);
        next.push_back(std::move(o));
      }
    }
    layer = std::move(next);
  }
  return out;
}

}  // namespace modtt
