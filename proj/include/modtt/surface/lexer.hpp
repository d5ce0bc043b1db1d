#pragma once

#include <cctype>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include "modtt/diagnostics.hpp"

namespace modtt::surface {

enum class Tok { Ident, Keyword, Symbol, End };

struct Token {
  Tok kind = Tok::End;
  std::string text;
  Span span;
};

inline const std::unordered_set<std::string>& keywords() {
  static const std::unordered_set<std::string> k = {
      "signature", "structure", "functor", "sig",  "struct", "end",  "type", "val",   "fun",  "where",
      "let",       "in",        "bind",    "ret",  "case",   "of",   "throw", "if",   "then", "else",
      "nil",       "tt",        "ff",      "fold", "from",   "with", "sharing", "bool", "string", "list",
  };
  return k;
}

inline TypeError parse_error(const Span& at, std::string message) {
  return TypeError{ErrorKind::Parse, at, {}, {}, std::move(message)};
}

/// Splits source text into tokens. The Unicode arrows ⇀ ← ⇒ are read as
/// their ASCII spellings ~> <- =>.
inline std::vector<Token> lex(std::string_view src) {
  std::vector<Token> out;
  int line = 1, col = 1;
  std::size_t i = 0;
  auto advance = [&](std::size_t n) {
    for (std::size_t k = 0; k < n && i < src.size(); ++k, ++i) {
      if (src[i] == '\n') {
        ++line;
        col = 1;
      } else if ((static_cast<unsigned char>(src[i]) & 0xC0) != 0x80) {
        ++col;
      }
    }
  };
  auto starts = [&](std::string_view s) { return src.substr(i, s.size()) == s; };
  auto push = [&](Tok kind, std::string text, int l, int c) {
    out.push_back(Token{kind, std::move(text), Span{l, c, line, col}});
  };

  static const std::pair<std::string_view, std::string_view> unicode[] = {
      {"⇀", "~>"}, {"←", "<-"}, {"⇒", "=>"}};
  static const std::string_view symbols[] = {":>", "<-", "=>", "~>", "::", "(", ")", ",", ":", "=", "*", "|",
                                             ".",  ";"};

  while (i < src.size()) {
    char c = src[i];
    if (c == ' ' || c == '\t' || c == '\r' || c == '\n') {
      advance(1);
      continue;
    }
    if (starts("(*")) {
      int l = line, cl = col, depth = 0;
      do {
        if (starts("(*")) {
          ++depth;
          advance(2);
        } else if (starts("*)")) {
          --depth;
          advance(2);
        } else if (i >= src.size()) {
          throw TypeErrorException(parse_error(Span{l, cl, l, cl}, "unterminated comment"));
        } else {
          advance(1);
        }
      } while (depth > 0);
      continue;
    }
    int l = line, cl = col;
    bool matched = false;
    for (auto& [u, ascii] : unicode) {
      if (starts(u)) {
        advance(u.size());
        push(Tok::Symbol, std::string(ascii), l, cl);
        matched = true;
        break;
      }
    }
    if (matched) continue;
    for (auto s : symbols) {
      if (starts(s)) {
        advance(s.size());
        push(Tok::Symbol, std::string(s), l, cl);
        matched = true;
        break;
      }
    }
    if (matched) continue;
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::size_t j = i;
      while (j < src.size() && (std::isalnum(static_cast<unsigned char>(src[j])) || src[j] == '_' || src[j] == '\''))
        ++j;
      std::string word(src.substr(i, j - i));
      advance(j - i);
      push(keywords().count(word) ? Tok::Keyword : Tok::Ident, word, l, cl);
      continue;
    }
    throw TypeErrorException(parse_error(Span{l, cl, l, cl + 1}, "unexpected character '" + std::string(1, c) + "'"));
  }
  out.push_back(Token{Tok::End, "", Span{line, col, line, col}});
  return out;
}

}  // namespace modtt::surface
