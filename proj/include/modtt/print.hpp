#pragma once

// Core text format: a small s-expression language, stable across releases
// and used by golden tests and diagnostics.
//
//   sig ::= Type | (Dyn v) | (Pi sig sig) | (Sigma sig sig) | (Ext sig v) | (Cmp sig)
//   v   ::= #n | (lam v) | (app v v) | (pair v v) | (fst v) | (snd v) | (in v v)
//         | (out v) | (susp c) | (susp c sig) | tt | ff | (pfun c) | nil | (cons v v)
//         | bool | (arrow v v) | (list v) | (prod v v) | *
//   c   ::= (ret v) | (bind v c) | throw | (if v c c) | (case v c c) | (appp v v)
//         | (fold v v c) | (fold v v c sig) | *

#include <cctype>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "modtt/syntax.hpp"

namespace modtt {

namespace detail {

inline void print_to(std::ostream& os, const SigPtr& s);
inline void print_to(std::ostream& os, const ValPtr& v);
inline void print_to(std::ostream& os, const CmpPtr& m);

template <class... Ts>
void print_form(std::ostream& os, std::string_view head, const Ts&... args) {
  os << '(' << head;
  ((os << ' ', print_to(os, args)), ...);
  os << ')';
}

inline void print_to(std::ostream& os, const SigPtr& s) {
  std::visit(overloaded{
                 [&](const sig::Type&) { os << "Type"; },
                 [&](const sig::Dyn& x) { print_form(os, "Dyn", x.type); },
                 [&](const sig::Pi& x) { print_form(os, "Pi", x.dom, x.cod); },
                 [&](const sig::Sigma& x) { print_form(os, "Sigma", x.fst, x.snd); },
                 [&](const sig::Ext& x) { print_form(os, "Ext", x.base, x.static_val); },
                 [&](const sig::Cmp& x) { print_form(os, "Cmp", x.body); },
             },
             s->node);
}

inline void print_to(std::ostream& os, const ValPtr& v) {
  std::visit(
      overloaded{
          [&](const val::Var& x) { os << '#' << x.index; },
          [&](const val::Lam& x) { print_form(os, "lam", x.body); },
          [&](const val::App& x) { print_form(os, "app", x.fn, x.arg); },
          [&](const val::Pair& x) { print_form(os, "pair", x.fst, x.snd); },
          [&](const val::Fst& x) { print_form(os, "fst", x.pair); },
          [&](const val::Snd& x) { print_form(os, "snd", x.pair); },
          [&](const val::InExt& x) { print_form(os, "in", x.static_part, x.payload); },
          [&](const val::OutExt& x) { print_form(os, "out", x.ext); },
          [&](const val::Susp& x) {
            if (x.ann) print_form(os, "susp", x.body, x.ann);
            else print_form(os, "susp", x.body);
          },
          [&](const val::Tt&) { os << "tt"; },
          [&](const val::Ff&) { os << "ff"; },
          [&](const val::PFun& x) { print_form(os, "pfun", x.body); },
          [&](const val::Nil&) { os << "nil"; },
          [&](const val::Cons& x) { print_form(os, "cons", x.head, x.tail); },
          [&](const val::TypeCode& x) {
            std::visit(overloaded{
                           [&](const tc::Bool&) { os << "bool"; },
                           [&](const tc::Arrow& a) { print_form(os, "arrow", a.dom, a.cod); },
                           [&](const tc::List& l) { print_form(os, "list", l.elem); },
                           [&](const tc::Prod& p) { print_form(os, "prod", p.left, p.right); },
                       },
                       x.code);
          },
          [&](const val::Star&) { os << '*'; },
      },
      v->node);
}

inline void print_to(std::ostream& os, const CmpPtr& m) {
  std::visit(overloaded{
                 [&](const cmp::Ret& x) { print_form(os, "ret", x.value); },
                 [&](const cmp::Bind& x) { print_form(os, "bind", x.scrutinee, x.body); },
                 [&](const cmp::Throw&) { os << "throw"; },
                 [&](const cmp::If& x) { print_form(os, "if", x.cond, x.then_branch, x.else_branch); },
                 [&](const cmp::CaseList& x) {
                   print_form(os, "case", x.scrutinee, x.nil_branch, x.cons_branch);
                 },
                 [&](const cmp::AppP& x) { print_form(os, "appp", x.fn, x.arg); },
                 [&](const cmp::Fold& x) {
                   if (x.ann) print_form(os, "fold", x.scrutinee, x.init, x.step, x.ann);
                   else print_form(os, "fold", x.scrutinee, x.init, x.step);
                 },
                 [&](const cmp::Star&) { os << '*'; },
             },
             m->node);
}

}  // namespace detail

template <class T>
std::string to_string(const std::shared_ptr<const T>& t) {
  std::ostringstream os;
  detail::print_to(os, t);
  return os.str();
}

// ---------------------------------------------------------------------------
// Reader.

struct CoreParseError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

class CoreReader {
 public:
  explicit CoreReader(std::string_view text) { tokenize(text); }

  SigPtr sig() {
    auto t = next();
    if (t == "Type") return build::sig_type();
    if (t != "(") fail("signature", t);
    auto head = next();
    SigPtr out;
    if (head == "Dyn") out = build::dyn(val());
    else if (head == "Pi") { auto a = sig(); out = build::pi(a, sig()); }
    else if (head == "Sigma") { auto a = sig(); out = build::sigma(a, sig()); }
    else if (head == "Ext") { auto a = sig(); out = build::ext(a, val()); }
    else if (head == "Cmp") out = build::cmp_sig(sig());
    else fail("signature former", head);
    expect(")");
    return out;
  }

  ValPtr val() {
    using namespace build;
    auto t = next();
    if (t == "tt") return tt();
    if (t == "ff") return ff();
    if (t == "nil") return nil();
    if (t == "bool") return bool_ty();
    if (t == "*") return star();
    if (t.size() > 1 && t[0] == '#') return var(std::stoul(std::string(t.substr(1))));
    if (t != "(") fail("value", t);
    auto head = next();
    ValPtr out;
    if (head == "lam") out = lam(val());
    else if (head == "app") { auto f = val(); out = app(f, val()); }
    else if (head == "pair") { auto a = val(); out = pair(a, val()); }
    else if (head == "fst") out = fst(val());
    else if (head == "snd") out = snd(val());
    else if (head == "in") { auto a = val(); out = in_ext(a, val()); }
    else if (head == "out") out = out_ext(val());
    else if (head == "susp") {
      auto m = cmp();
      SigPtr ann = peek() == ")" ? nullptr : sig();
      out = susp(m, ann);
    } else if (head == "pfun") out = pfun(cmp());
    else if (head == "cons") { auto h = val(); out = cons(h, val()); }
    else if (head == "arrow") { auto a = val(); out = arrow(a, val()); }
    else if (head == "list") out = list_ty(val());
    else if (head == "prod") { auto a = val(); out = prod(a, val()); }
    else fail("value former", head);
    expect(")");
    return out;
  }

  CmpPtr cmp() {
    using namespace build;
    auto t = next();
    if (t == "throw") return throw_();
    if (t == "*") return cmp_star();
    if (t != "(") fail("computation", t);
    auto head = next();
    CmpPtr out;
    if (head == "ret") out = ret(val());
    else if (head == "bind") { auto v = val(); out = bind(v, cmp()); }
    else if (head == "if") {
      auto c = val();
      auto m = cmp();
      out = if_(c, m, cmp());
    } else if (head == "case") {
      auto s = val();
      auto n = cmp();
      out = case_list(s, n, cmp());
    } else if (head == "appp") { auto f = val(); out = app_p(f, val()); }
    else if (head == "fold") {
      auto s = val();
      auto i = val();
      auto st = cmp();
      SigPtr ann = peek() == ")" ? nullptr : sig();
      out = fold(s, i, st, ann);
    } else fail("computation former", head);
    expect(")");
    return out;
  }

  bool at_end() const { return pos_ == toks_.size(); }

 private:
  std::vector<std::string> toks_;
  std::size_t pos_ = 0;

  void tokenize(std::string_view text) {
    std::size_t i = 0;
    while (i < text.size()) {
      char c = text[i];
      if (std::isspace(static_cast<unsigned char>(c))) { ++i; continue; }
      if (c == '(' || c == ')') { toks_.emplace_back(1, c); ++i; continue; }
      std::size_t j = i;
      while (j < text.size() && !std::isspace(static_cast<unsigned char>(text[j])) && text[j] != '(' &&
             text[j] != ')')
        ++j;
      toks_.emplace_back(text.substr(i, j - i));
      i = j;
    }
  }
  std::string_view peek() const { return pos_ < toks_.size() ? std::string_view(toks_[pos_]) : ""; }
  std::string_view next() {
    if (pos_ >= toks_.size()) throw CoreParseError("unexpected end of core term");
    return toks_[pos_++];
  }
  void expect(std::string_view t) {
    auto got = next();
    if (got != t) fail(std::string("'") + std::string(t) + "'", got);
  }
  [[noreturn]] void fail(const std::string& what, std::string_view got) const {
    throw CoreParseError("expected " + what + ", got '" + std::string(got) + "'");
  }
};

inline SigPtr parse_sig(std::string_view text) {
  CoreReader r(text);
  auto s = r.sig();
  if (!r.at_end()) throw CoreParseError("trailing input after signature");
  return s;
}
inline ValPtr parse_val(std::string_view text) {
  CoreReader r(text);
  auto v = r.val();
  if (!r.at_end()) throw CoreParseError("trailing input after value");
  return v;
}
inline CmpPtr parse_cmp(std::string_view text) {
  CoreReader r(text);
  auto m = r.cmp();
  if (!r.at_end()) throw CoreParseError("trailing input after computation");
  return m;
}

}  // namespace modtt
