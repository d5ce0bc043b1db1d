#pragma once

#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "modtt/diagnostics.hpp"

namespace modtt::surface {

using Path = std::vector<std::string>;

inline std::string join(const Path& p) {
  std::string out;
  for (auto& s : p) out += (out.empty() ? "" : ".") + s;
  return out;
}

// ---- types -----------------------------------------------------------------

struct TyNode;
using Ty = std::shared_ptr<const TyNode>;

namespace ty {
struct Bool {};
struct String {};
struct Named { Path path; };
struct List { Ty elem; };
struct Prod { Ty left, right; };
struct Arrow { Ty dom, cod; };
}  // namespace ty

struct TyNode {
  std::variant<ty::Bool, ty::String, ty::Named, ty::List, ty::Prod, ty::Arrow> node;
  Span span;
};

// ---- patterns and expressions ---------------------------------------------

struct PatNode;
using Pat = std::shared_ptr<const PatNode>;

namespace pat {
struct Var { std::string name; Ty ann; };  // ann may be null
struct Wild {};
struct Tuple { std::vector<Pat> elems; };  // right-nested pairs
struct Nil {};
struct Cons { Pat head, tail; };
struct Tt {};
struct Ff {};
}  // namespace pat

struct PatNode {
  std::variant<pat::Var, pat::Wild, pat::Tuple, pat::Nil, pat::Cons, pat::Tt, pat::Ff> node;
  Span span;
};

struct ExprNode;
using Expr = std::shared_ptr<const ExprNode>;

namespace ex {
struct Name { Path path; };
struct Tt {};
struct Ff {};
struct Nil {};
struct Cons { Expr head, tail; };
struct Tuple { std::vector<Expr> elems; };  // right-nested pairs
struct Apply { Expr fn, arg; };             // partial application
struct Ret { Expr value; };
struct Throw {};
struct Bind { Pat pat; Expr rhs, body; };
struct Case { Expr scrutinee; std::vector<std::pair<Pat, Expr>> rules; };
struct If { Expr cond, then_branch, else_branch; };
struct Fold { Expr scrutinee, init; std::string acc, elem; Expr step; };
struct Let { Pat pat; Expr rhs, body; };
struct Annot { Expr expr; Ty type; };
}  // namespace ex

struct ExprNode {
  std::variant<ex::Name, ex::Tt, ex::Ff, ex::Nil, ex::Cons, ex::Tuple, ex::Apply, ex::Ret, ex::Throw, ex::Bind,
               ex::Case, ex::If, ex::Fold, ex::Let, ex::Annot>
      node;
  Span span;
};

// ---- signatures ------------------------------------------------------------

struct SigExprNode;
using SigExpr = std::shared_ptr<const SigExprNode>;

namespace spec {
struct Type { std::string name; Ty def; };  // def may be null (abstract)
struct Val { std::string name; Ty type; };
struct Structure { std::string name; SigExpr sig; };
struct Sharing { Path left, right; };
}  // namespace spec

struct Spec {
  std::variant<spec::Type, spec::Val, spec::Structure, spec::Sharing> node;
  Span span;
};

namespace se {
struct Name { std::string name; };
struct Body { std::vector<Spec> specs; };
struct Where { SigExpr base; Path path; Ty type; };
}  // namespace se

struct SigExprNode {
  std::variant<se::Name, se::Body, se::Where> node;
  Span span;
};

// ---- modules and declarations ---------------------------------------------

struct ModExprNode;
using ModExpr = std::shared_ptr<const ModExprNode>;

struct Decl;

struct Ascription {
  SigExpr sig;
  bool opaque = false;  // `:>` rather than `:`
};

namespace me {
struct Name { Path path; };
struct Struct { std::vector<Decl> decls; };
struct Apply { Path functor; std::vector<ModExpr> args; };
struct Ascribe { ModExpr mod; Ascription asc; };
struct Let { std::vector<Decl> decls; ModExpr body; };
}  // namespace me

struct ModExprNode {
  std::variant<me::Name, me::Struct, me::Apply, me::Ascribe, me::Let> node;
  Span span;
};

namespace decl {
struct Signature { std::string name; SigExpr sig; };
/// `structure X [asc] = M`, or `structure X [asc] <- M` when `bind` is set.
struct Structure { std::string name; std::optional<Ascription> asc; ModExpr mod; bool bind = false; };
struct Functor {
  std::string name;
  std::vector<std::pair<std::string, SigExpr>> params;
  std::optional<Ascription> result;
  ModExpr body;
};
/// `val x [: ty] = e`, or `val x [: ty] <- e` when `bind` is set.
struct Val { std::string name; Ty ann; Expr body; bool bind = false; };
struct Fun { std::string name; Pat param; Ty result; Expr body; };
struct Type { std::string name; Ty def; };
}  // namespace decl

struct Decl {
  std::variant<decl::Signature, decl::Structure, decl::Functor, decl::Val, decl::Fun, decl::Type> node;
  Span span;
};

}  // namespace modtt::surface
