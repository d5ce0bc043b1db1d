#pragma once

// Recursive-descent parser for .mtt files. Grammar: docs/grammar.md.

#include <algorithm>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "modtt/surface/ast.hpp"
#include "modtt/surface/lexer.hpp"

namespace modtt::surface {

class Parser {
 public:
  explicit Parser(std::string_view src) : toks_(lex(src)) {}

  std::vector<Decl> file() {
    auto decls = decl_list();
    if (peek().kind != Tok::End) error("expected a declaration");
    return decls;
  }

  Ty type() {
    auto start = peek().span;
    auto dom = prod_type();
    if (accept("~>")) {
      auto cod = type();
      return mk_ty(ty::Arrow{dom, cod}, start);
    }
    return dom;
  }

  Expr expr() {
    auto start = peek().span;
    if (accept_kw("ret")) return mk_ex(ex::Ret{cons_expr()}, start);
    if (accept_kw("throw")) return mk_ex(ex::Throw{}, start);
    if (accept_kw("bind")) {
      accept_kw("val");
      auto p = pattern();
      expect("<-");
      auto rhs = expr();
      expect_kw("in");
      return mk_ex(ex::Bind{p, rhs, expr()}, start);
    }
    if (accept_kw("let")) {
      accept_kw("val");
      auto p = pattern();
      expect("=");
      auto rhs = expr();
      expect_kw("in");
      return mk_ex(ex::Let{p, rhs, expr()}, start);
    }
    if (accept_kw("case")) {
      auto scrut = expr();
      expect_kw("of");
      accept("|");
      std::vector<std::pair<Pat, Expr>> rules;
      do {
        auto p = pattern();
        expect("=>");
        rules.emplace_back(p, expr());
      } while (accept("|"));
      return mk_ex(ex::Case{scrut, std::move(rules)}, start);
    }
    if (accept_kw("if")) {
      auto c = expr();
      expect_kw("then");
      auto t = expr();
      expect_kw("else");
      return mk_ex(ex::If{c, t, expr()}, start);
    }
    if (accept_kw("fold")) {
      auto scrut = expr();
      expect_kw("from");
      auto init = expr();
      expect_kw("with");
      expect("(");
      auto acc = ident();
      expect(",");
      auto elem = ident();
      expect(")");
      expect("=>");
      return mk_ex(ex::Fold{scrut, init, acc, elem, expr()}, start);
    }
    return cons_expr();
  }

 private:
  std::vector<Token> toks_;
  std::size_t pos_ = 0;

  const Token& peek(std::size_t ahead = 0) const {
    return toks_[std::min(pos_ + ahead, toks_.size() - 1)];
  }
  const Token& next() {
    const Token& t = toks_[pos_];
    if (pos_ + 1 < toks_.size()) ++pos_;
    return t;
  }
  bool is(std::string_view sym, std::size_t ahead = 0) const {
    auto& t = peek(ahead);
    return t.kind == Tok::Symbol && t.text == sym;
  }
  bool is_kw(std::string_view kw, std::size_t ahead = 0) const {
    auto& t = peek(ahead);
    return t.kind == Tok::Keyword && t.text == kw;
  }
  bool accept(std::string_view sym) {
    if (!is(sym)) return false;
    next();
    return true;
  }
  bool accept_kw(std::string_view kw) {
    if (!is_kw(kw)) return false;
    next();
    return true;
  }
  [[noreturn]] void error(const std::string& what) const {
    auto& t = peek();
    std::string got = t.kind == Tok::End ? "end of input" : "'" + t.text + "'";
    throw TypeErrorException(parse_error(t.span, what + ", got " + got));
  }
  void expect(std::string_view sym) {
    if (!accept(sym)) error("expected '" + std::string(sym) + "'");
  }
  void expect_kw(std::string_view kw) {
    if (!accept_kw(kw)) error("expected '" + std::string(kw) + "'");
  }
  std::string ident() {
    if (peek().kind != Tok::Ident) error("expected an identifier");
    return next().text;
  }
  Path path() {
    Path p{ident()};
    while (is(".") && peek(1).kind == Tok::Ident) {
      next();
      p.push_back(next().text);
    }
    return p;
  }
  Span from(const Span& start) const {
    auto& last = toks_[pos_ == 0 ? 0 : pos_ - 1].span;
    return Span{start.line, start.col, last.end_line, last.end_col};
  }
  template <class N>
  Ty mk_ty(N n, const Span& s) { return std::make_shared<const TyNode>(TyNode{std::move(n), from(s)}); }
  template <class N>
  Expr mk_ex(N n, const Span& s) { return std::make_shared<const ExprNode>(ExprNode{std::move(n), from(s)}); }
  template <class N>
  Pat mk_pat(N n, const Span& s) { return std::make_shared<const PatNode>(PatNode{std::move(n), from(s)}); }
  template <class N>
  SigExpr mk_sig(N n, const Span& s) {
    return std::make_shared<const SigExprNode>(SigExprNode{std::move(n), from(s)});
  }
  template <class N>
  ModExpr mk_mod(N n, const Span& s) {
    return std::make_shared<const ModExprNode>(ModExprNode{std::move(n), from(s)});
  }

  // ---- declarations ----------------------------------------------------------

  bool at_decl_start() const {
    return is_kw("signature") || is_kw("structure") || is_kw("functor") || is_kw("val") || is_kw("fun") ||
           is_kw("type") || (peek().kind == Tok::Ident && is("<-", 1));
  }

  std::vector<Decl> decl_list() {
    std::vector<Decl> out;
    for (;;) {
      while (accept(";")) {
      }
      if (!at_decl_start()) return out;
      out.push_back(declaration());
    }
  }

  std::optional<Ascription> ascription() {
    if (accept(":")) return Ascription{sig_expr(), false};
    if (accept(":>")) return Ascription{sig_expr(), true};
    return std::nullopt;
  }

  Decl declaration() {
    auto start = peek().span;
    auto done = [&](auto n) { return Decl{std::move(n), from(start)}; };
    if (accept_kw("signature")) {
      auto name = ident();
      expect("=");
      return done(decl::Signature{name, sig_expr()});
    }
    if (peek().kind == Tok::Ident) {  // `X <- M`
      auto name = ident();
      expect("<-");
      return done(decl::Structure{name, std::nullopt, mod_expr(), true});
    }
    if (accept_kw("structure")) {
      auto name = ident();
      auto asc = ascription();
      bool bind = accept("<-");
      if (!bind) expect("=");
      return done(decl::Structure{name, asc, mod_expr(), bind});
    }
    if (accept_kw("functor")) {
      auto name = ident();
      std::vector<std::pair<std::string, SigExpr>> params;
      while (accept("(")) {
        auto x = ident();
        expect(":");
        params.emplace_back(x, sig_expr());
        expect(")");
      }
      if (params.empty()) error("expected a functor parameter");
      auto result = ascription();
      expect("=");
      return done(decl::Functor{name, std::move(params), result, mod_expr()});
    }
    if (accept_kw("val")) {
      auto name = ident();
      Ty ann = accept(":") ? type() : nullptr;
      bool bind = accept("<-");
      if (!bind) expect("=");
      return done(decl::Val{name, ann, expr(), bind});
    }
    if (accept_kw("fun")) {
      auto name = ident();
      auto param = atomic_pattern();
      Ty result = accept(":") ? type() : nullptr;
      expect("=");
      return done(decl::Fun{name, param, result, expr()});
    }
    if (accept_kw("type")) {
      auto name = ident();
      expect("=");
      return done(decl::Type{name, type()});
    }
    error("expected a declaration");
  }

  // ---- signatures ------------------------------------------------------------

  SigExpr sig_expr() {
    auto start = peek().span;
    SigExpr s;
    if (accept_kw("sig")) {
      std::vector<Spec> specs;
      while (!accept_kw("end")) {
        while (accept(";")) {
        }
        if (accept_kw("end")) break;
        specs.push_back(specification());
      }
      s = mk_sig(se::Body{std::move(specs)}, start);
    } else if (accept("(")) {
      s = sig_expr();
      expect(")");
    } else {
      s = mk_sig(se::Name{ident()}, start);
    }
    while (accept_kw("where")) {
      expect_kw("type");
      auto p = path();
      expect("=");
      s = mk_sig(se::Where{s, p, type()}, start);
    }
    return s;
  }

  Spec specification() {
    auto start = peek().span;
    auto done = [&](auto n) { return Spec{std::move(n), from(start)}; };
    if (accept_kw("type")) {
      auto name = ident();
      Ty def = accept("=") ? type() : nullptr;
      return done(spec::Type{name, def});
    }
    if (accept_kw("val")) {
      auto name = ident();
      expect(":");
      return done(spec::Val{name, type()});
    }
    if (accept_kw("structure")) {
      auto name = ident();
      expect(":");
      return done(spec::Structure{name, sig_expr()});
    }
    if (accept_kw("sharing")) {
      expect_kw("type");
      auto l = path();
      expect("=");
      return done(spec::Sharing{l, path()});
    }
    error("expected a specification");
  }

  // ---- modules ---------------------------------------------------------------

  ModExpr mod_expr() {
    auto start = peek().span;
    ModExpr m;
    if (accept_kw("struct")) {
      auto decls = decl_list();
      expect_kw("end");
      m = mk_mod(me::Struct{std::move(decls)}, start);
    } else if (accept_kw("let")) {
      auto decls = decl_list();
      expect_kw("in");
      auto body = mod_expr();
      expect_kw("end");
      m = mk_mod(me::Let{std::move(decls), body}, start);
    } else if (accept("(")) {
      m = mod_expr();
      expect(")");
    } else {
      auto p = path();
      if (is("(")) {
        std::vector<ModExpr> args;
        while (accept("(")) {
          args.push_back(mod_expr());
          expect(")");
        }
        m = mk_mod(me::Apply{p, std::move(args)}, start);
      } else {
        m = mk_mod(me::Name{p}, start);
      }
    }
    while (is(":") || is(":>")) {
      auto asc = ascription();
      m = mk_mod(me::Ascribe{m, *asc}, start);
    }
    return m;
  }

  // ---- types -----------------------------------------------------------------

  Ty prod_type() {
    auto start = peek().span;
    auto left = postfix_type();
    if (accept("*")) return mk_ty(ty::Prod{left, prod_type()}, start);
    return left;
  }

  Ty postfix_type() {
    auto start = peek().span;
    auto t = atomic_type();
    while (accept_kw("list")) t = mk_ty(ty::List{t}, start);
    return t;
  }

  Ty atomic_type() {
    auto start = peek().span;
    if (accept_kw("bool")) return mk_ty(ty::Bool{}, start);
    if (accept_kw("string")) return mk_ty(ty::String{}, start);
    if (accept("(")) {
      auto t = type();
      expect(")");
      return t;
    }
    if (peek().kind == Tok::Ident) return mk_ty(ty::Named{path()}, start);
    error("expected a type");
  }

  // ---- patterns --------------------------------------------------------------

  Pat pattern() {
    auto start = peek().span;
    auto head = atomic_pattern();
    if (accept("::")) return mk_pat(pat::Cons{head, pattern()}, start);
    return head;
  }

  Pat atomic_pattern() {
    auto start = peek().span;
    if (accept_kw("nil")) return mk_pat(pat::Nil{}, start);
    if (accept_kw("tt")) return mk_pat(pat::Tt{}, start);
    if (accept_kw("ff")) return mk_pat(pat::Ff{}, start);
    if (accept("(")) {
      std::vector<Pat> elems{pattern()};
      if (accept(":")) {
        auto t = type();
        expect(")");
        auto* v = std::get_if<pat::Var>(&elems[0]->node);
        if (!v) throw TypeErrorException(parse_error(start, "only variables can carry a type annotation"));
        return mk_pat(pat::Var{v->name, t}, start);
      }
      while (accept(",")) elems.push_back(pattern());
      expect(")");
      if (elems.size() == 1) return elems[0];
      return mk_pat(pat::Tuple{std::move(elems)}, start);
    }
    auto name = ident();
    if (name == "_") return mk_pat(pat::Wild{}, start);
    return mk_pat(pat::Var{name, nullptr}, start);
  }

  // ---- expressions -----------------------------------------------------------

  Expr cons_expr() {
    auto start = peek().span;
    auto head = app_expr();
    if (accept("::")) return mk_ex(ex::Cons{head, cons_expr()}, start);
    return head;
  }

  bool at_atom() const {
    return (peek().kind == Tok::Ident && !is("<-", 1)) || is_kw("tt") || is_kw("ff") || is_kw("nil") || is("(");
  }

  Expr app_expr() {
    auto start = peek().span;
    auto e = atomic_expr();
    while (at_atom()) e = mk_ex(ex::Apply{e, atomic_expr()}, start);
    return e;
  }

  Expr atomic_expr() {
    auto start = peek().span;
    if (accept_kw("tt")) return mk_ex(ex::Tt{}, start);
    if (accept_kw("ff")) return mk_ex(ex::Ff{}, start);
    if (accept_kw("nil")) return mk_ex(ex::Nil{}, start);
    if (accept("(")) {
      std::vector<Expr> elems{expr()};
      if (accept(":")) {
        auto t = type();
        expect(")");
        return mk_ex(ex::Annot{elems[0], t}, start);
      }
      while (accept(",")) elems.push_back(expr());
      expect(")");
      if (elems.size() == 1) return elems[0];
      return mk_ex(ex::Tuple{std::move(elems)}, start);
    }
    if (peek().kind == Tok::Ident) return mk_ex(ex::Name{path()}, start);
    error("expected an expression");
  }
};

inline std::vector<Decl> parse(std::string_view src) { return Parser(src).file(); }

}  // namespace modtt::surface
