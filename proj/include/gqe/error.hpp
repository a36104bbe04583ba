#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <variant>

namespace gqe {

enum class Errc {
  domain,
  unbound_variable,
  syntax,
  unknown_identifier,
  invalid_argument,
  out_of_range,
  singular,
  not_converged,
  check_failed,
};

inline const char* errc_name(Errc e) {
  switch (e) {
    case Errc::domain: return "domain";
    case Errc::unbound_variable: return "unbound_variable";
    case Errc::syntax: return "syntax";
    case Errc::unknown_identifier: return "unknown_identifier";
    case Errc::invalid_argument: return "invalid_argument";
    case Errc::out_of_range: return "out_of_range";
    case Errc::singular: return "singular";
    case Errc::not_converged: return "not_converged";
    case Errc::check_failed: return "check_failed";
  }
  return "unknown";
}

struct ErrorInfo {
  Errc code;
  std::string message;
};

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& msg)
      : std::runtime_error(std::string(errc_name(code)) + ": " + msg), code_(code) {}
  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

// Raised by parse(); offset is the byte position of the offending token.
class ParseError : public Error {
 public:
  ParseError(Errc code, const std::string& msg, std::size_t offset)
      : Error(code, msg + " at offset " + std::to_string(offset)), offset_(offset) {}
  std::size_t offset() const noexcept { return offset_; }

 private:
  std::size_t offset_;
};

template <class T>
class Expected {
 public:
  Expected(T value) : v_(std::move(value)) {}
  Expected(ErrorInfo err) : v_(std::move(err)) {}

  bool has_value() const noexcept { return v_.index() == 0; }
  explicit operator bool() const noexcept { return has_value(); }

  const T& value() const {
    if (!has_value()) {
      const auto& e = std::get<1>(v_);
      throw Error(e.code, e.message);
    }
    return std::get<0>(v_);
  }
  const T& operator*() const { return value(); }
  const ErrorInfo& error() const { return std::get<1>(v_); }
  T value_or(T fallback) const { return has_value() ? std::get<0>(v_) : fallback; }

 private:
  std::variant<T, ErrorInfo> v_;
};

[[noreturn]] inline void fail(Errc code, const std::string& msg) { throw Error(code, msg); }

inline void require(bool cond, Errc code, const std::string& msg) {
  if (!cond) fail(code, msg);
}

}  // namespace gqe
