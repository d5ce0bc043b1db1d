#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace modtt {

/// Source range, 1-based; a zero line means "no source location".
struct Span {
  int line = 0;
  int col = 0;
  int end_line = 0;
  int end_col = 0;

  bool valid() const { return line > 0; }
  std::string str() const {
    if (!valid()) return "<core>";
    return std::to_string(line) + ":" + std::to_string(col);
  }
};

enum class ErrorKind {
  Mismatch,
  NotAFunction,
  NotAPair,
  ExtentSideCondition,
  Scope,
  PhaseViolation,
  DynamicInStatic,
  NeedsAnnotation,
  Parse,
  Unbound,
  Elab,
};

inline std::string_view kind_name(ErrorKind k) {
  switch (k) {
    case ErrorKind::Mismatch: return "mismatch";
    case ErrorKind::NotAFunction: return "not-a-function";
    case ErrorKind::NotAPair: return "not-a-pair";
    case ErrorKind::ExtentSideCondition: return "extent-side-condition";
    case ErrorKind::Scope: return "scope";
    case ErrorKind::PhaseViolation: return "phase-violation";
    case ErrorKind::DynamicInStatic: return "dynamic-in-static";
    case ErrorKind::NeedsAnnotation: return "needs-annotation";
    case ErrorKind::Parse: return "parse";
    case ErrorKind::Unbound: return "unbound";
    case ErrorKind::Elab: return "elab";
  }
  return "unknown";
}

struct TypeError {
  ErrorKind kind = ErrorKind::Mismatch;
  Span span;
  std::string expected;  // printed forms, empty when not applicable
  std::string actual;
  std::string message;

  std::string str() const {
    std::string out = span.str() + ": " + std::string(kind_name(kind)) + ": " + message;
    if (!expected.empty()) out += "\n  expected: " + expected;
    if (!actual.empty()) out += "\n  actual:   " + actual;
    return out;
  }
};

/// Exception wrapper used internally and by throwing entry points.
struct TypeErrorException : std::runtime_error {
  TypeError error;
  explicit TypeErrorException(TypeError e) : std::runtime_error(e.str()), error(std::move(e)) {}
};

[[noreturn]] inline void fail(ErrorKind kind, std::string message, std::string expected = {},
                              std::string actual = {}) {
  throw TypeErrorException(TypeError{kind, {}, std::move(expected), std::move(actual), std::move(message)});
}


/// Either a value or a type error.
template <class T>
class Result {
 public:
  Result(T value) : value_(std::move(value)) {}
  Result(TypeError error) : error_(std::move(error)), has_error_(true) {}

  bool ok() const { return !has_error_; }
  explicit operator bool() const { return ok(); }
  const T& value() const {
    if (has_error_) throw TypeErrorException(error_);
    return value_;
  }
  const TypeError& error() const { return error_; }

 private:
  T value_{};
  TypeError error_{};
  bool has_error_ = false;
};

}  // namespace modtt
