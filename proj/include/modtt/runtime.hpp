#pragma once

// Environment-based big-step evaluator for closed terms with the exception
// effect. Extent introduction and elimination are erased; type codes are
// carried as closures so results can be read back as closed core values.

#include <cstdint>
#include <memory>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "modtt/print.hpp"
#include "modtt/syntax.hpp"

namespace modtt {

inline constexpr std::uint64_t kDefaultFuel = 1'000'000;

struct Returned { ValPtr value; };
struct Threw {};
struct FuelExhausted {};

using Outcome = std::variant<Returned, Threw>;
using RunResult = std::variant<Returned, Threw, FuelExhausted>;

/// Observing something other than a boolean or a throw.
struct ObservationError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

namespace rt {

struct Node;
using Value = std::shared_ptr<const Node>;

class Env {
 public:
  Env extend(Value v) const {
    Env e;
    e.cell_ = std::make_shared<const Cell>(Cell{std::move(v), cell_});
    e.size_ = size_ + 1;
    return e;
  }
  const Value& at(std::size_t i) const {
    const Cell* c = cell_.get();
    for (; c && i > 0; --i) c = c->next.get();
    if (!c) throw InternalError("runtime: unbound variable (term is not closed)");
    return c->head;
  }
  std::size_t size() const { return size_; }

 private:
  struct Cell {
    Value head;
    std::shared_ptr<const Cell> next;
  };
  std::shared_ptr<const Cell> cell_;
  std::size_t size_ = 0;
};

struct Lam { Env env; ValPtr body; };
struct PFun { Env env; CmpPtr body; };
struct Susp { Env env; CmpPtr body; };
struct Code { Env env; ValPtr code; };
struct Pair { Value fst, snd; };
struct Cons { Value head, tail; };
struct Tt {};
struct Ff {};
struct Nil {};

struct Node {
  std::variant<Lam, PFun, Susp, Code, Pair, Cons, Tt, Ff, Nil> node;
};

inline Value mk(decltype(Node::node) n) { return std::make_shared<const Node>(Node{std::move(n)}); }

struct OutOfFuel {};

class Machine {
 public:
  explicit Machine(std::uint64_t fuel) : fuel_(fuel) {}

  Value eval(const Env& env, const ValPtr& v) {
    tick();
    return std::visit(
        overloaded{
            [&](const val::Var& x) { return env.at(x.index); },
            [&](const val::Lam& x) { return mk(Lam{env, x.body}); },
            [&](const val::App& x) {
              auto f = eval(env, x.fn);
              auto a = eval(env, x.arg);
              auto* l = std::get_if<Lam>(&f->node);
              if (!l) throw InternalError("runtime: application of a non-function");
              return eval(l->env.extend(a), l->body);
            },
            [&](const val::Pair& x) { return mk(Pair{eval(env, x.fst), eval(env, x.snd)}); },
            [&](const val::Fst& x) { return as_pair(eval(env, x.pair)).fst; },
            [&](const val::Snd& x) { return as_pair(eval(env, x.pair)).snd; },
            [&](const val::InExt& x) { return eval(env, x.payload); },
            [&](const val::OutExt& x) { return eval(env, x.ext); },
            [&](const val::Susp& x) { return mk(Susp{env, x.body}); },
            [&](const val::Tt&) { return mk(Tt{}); },
            [&](const val::Ff&) { return mk(Ff{}); },
            [&](const val::PFun& x) { return mk(PFun{env, x.body}); },
            [&](const val::Nil&) { return mk(Nil{}); },
            [&](const val::Cons& x) { return mk(Cons{eval(env, x.head), eval(env, x.tail)}); },
            [&](const val::TypeCode&) { return mk(Code{env, v}); },
            [&](const val::Star&) -> Value { throw InternalError("runtime: * has no dynamic content"); },
        },
        v->node);
  }

  /// Returns null when the computation throws.
  Value run(Env env, CmpPtr m) {
    for (;;) {
      tick();
      const auto& n = m->node;
      if (auto* x = std::get_if<cmp::Ret>(&n)) return eval(env, x->value);
      if (std::holds_alternative<cmp::Throw>(n)) return nullptr;
      if (auto* x = std::get_if<cmp::Bind>(&n)) {
        auto s = eval(env, x->scrutinee);
        auto* su = std::get_if<Susp>(&s->node);
        if (!su) throw InternalError("runtime: bind on a non-suspension");
        auto r = run(su->env, su->body);
        if (!r) return nullptr;
        env = env.extend(r);
        m = x->body;
        continue;
      }
      if (auto* x = std::get_if<cmp::If>(&n)) {
        auto c = eval(env, x->cond);
        if (std::holds_alternative<Tt>(c->node)) m = x->then_branch;
        else if (std::holds_alternative<Ff>(c->node)) m = x->else_branch;
        else throw InternalError("runtime: if on a non-boolean");
        continue;
      }
      if (auto* x = std::get_if<cmp::CaseList>(&n)) {
        auto s = eval(env, x->scrutinee);
        if (std::holds_alternative<Nil>(s->node)) {
          m = x->nil_branch;
        } else if (auto* c = std::get_if<Cons>(&s->node)) {
          env = env.extend(c->head).extend(c->tail);
          m = x->cons_branch;
        } else {
          throw InternalError("runtime: case on a non-list");
        }
        continue;
      }
      if (auto* x = std::get_if<cmp::AppP>(&n)) {
        auto f = eval(env, x->fn);
        auto a = eval(env, x->arg);
        auto* p = std::get_if<PFun>(&f->node);
        if (!p) throw InternalError("runtime: partial application of a non-function");
        env = p->env.extend(a);
        m = p->body;
        continue;
      }
      if (auto* x = std::get_if<cmp::Fold>(&n)) {
        auto list = eval(env, x->scrutinee);
        auto acc = eval(env, x->init);
        while (auto* c = std::get_if<Cons>(&list->node)) {
          acc = run(env.extend(acc).extend(c->head), x->step);
          if (!acc) return nullptr;
          list = c->tail;
        }
        if (!std::holds_alternative<Nil>(list->node)) throw InternalError("runtime: fold over a non-list");
        return acc;
      }
      throw InternalError("runtime: * has no dynamic content");
    }
  }

 private:
  std::uint64_t fuel_;

  void tick() {
    if (fuel_ == 0) throw OutOfFuel{};
    --fuel_;
  }

  static const Pair& as_pair(const Value& v) {
    auto* p = std::get_if<Pair>(&v->node);
    if (!p) throw InternalError("runtime: projection from a non-pair");
    return *p;
  }
};

// Closed core value for an environment prefix; only the variables a body
// actually mentions are read back.
inline ValPtr readback(const Value& v);

inline std::vector<ValPtr> readback_env(const Env& env, std::size_t count, std::size_t bound_first) {
  std::vector<ValPtr> map;
  for (std::size_t i = 0; i < bound_first; ++i) map.push_back(build::var(i));
  for (std::size_t i = 0; i + bound_first < count; ++i) map.push_back(shift(readback(env.at(i)), bound_first));
  return map;
}

inline ValPtr readback(const Value& v) {
  using namespace build;
  return std::visit(overloaded{
                        [](const Lam& x) {
                          return lam(subst_many(x.body, readback_env(x.env, free_bound(x.body), 1)));
                        },
                        [](const PFun& x) {
                          return pfun(subst_many(x.body, readback_env(x.env, free_bound(x.body), 1)));
                        },
                        [](const Susp& x) {
                          return susp(subst_many(x.body, readback_env(x.env, free_bound(x.body), 0)));
                        },
                        [](const Code& x) {
                          return subst_many(x.code, readback_env(x.env, free_bound(x.code), 0));
                        },
                        [](const Pair& x) { return pair(readback(x.fst), readback(x.snd)); },
                        [](const Cons& x) { return cons(readback(x.head), readback(x.tail)); },
                        [](const Tt&) { return tt(); },
                        [](const Ff&) { return ff(); },
                        [](const Nil&) { return nil(); },
                    },
                    v->node);
}

}  // namespace rt

inline RunResult run_cmp(const CmpPtr& m, std::uint64_t fuel = kDefaultFuel) {
  rt::Machine machine(fuel);
  try {
    auto r = machine.run(rt::Env{}, m);
    if (!r) return Threw{};
    return Returned{rt::readback(r)};
  } catch (const rt::OutOfFuel&) {
    return FuelExhausted{};
  }
}

inline ValPtr eval_closed_val(const ValPtr& v, std::uint64_t fuel = kDefaultFuel) {
  rt::Machine machine(fuel);
  try {
    return rt::readback(machine.eval(rt::Env{}, v));
  } catch (const rt::OutOfFuel&) {
    throw std::runtime_error("fuel exhausted while evaluating a closed value");
  }
}

inline bool is_bool_literal(const ValPtr& v) {
  return std::holds_alternative<val::Tt>(v->node) || std::holds_alternative<val::Ff>(v->node);
}

/// Observational agreement at Dyn(bool): equal literals, or both threw.
inline bool observe_eq(const RunResult& a, const RunResult& b) {
  auto check = [](const RunResult& r) {
    if (std::holds_alternative<FuelExhausted>(r)) throw ObservationError("cannot observe an exhausted run");
    if (auto* x = std::get_if<Returned>(&r))
      if (!is_bool_literal(x->value)) throw ObservationError("observed value is not a boolean: " + to_string(x->value));
  };
  check(a);
  check(b);
  if (std::holds_alternative<Threw>(a) || std::holds_alternative<Threw>(b))
    return std::holds_alternative<Threw>(a) && std::holds_alternative<Threw>(b);
  return same(std::get<Returned>(a).value, std::get<Returned>(b).value);
}

inline bool observe_eq(const Outcome& a, const Outcome& b) {
  auto lift = [](const Outcome& o) -> RunResult {
    if (auto* r = std::get_if<Returned>(&o)) return *r;
    return Threw{};
  };
  return observe_eq(lift(a), lift(b));
}

inline std::string describe(const RunResult& r) {
  if (auto* x = std::get_if<Returned>(&r)) return to_string(x->value);
  if (std::holds_alternative<Threw>(r)) return "throw";
  return "fuel-exhausted";
}

}  // namespace modtt
