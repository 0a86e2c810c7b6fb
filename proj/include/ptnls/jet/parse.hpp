#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>

#include "ptnls/jet/expr.hpp"

namespace ptnls::jet {

class ParseError : public std::runtime_error {
 public:
  enum class Kind { Syntax, UnknownIdentifier, JetOrder };

  ParseError(Kind kind, std::size_t offset, const std::string& what);

  Kind kind() const { return kind_; }
  /// Byte offset into the input where the problem was detected.
  std::size_t offset() const { return offset_; }

 private:
  Kind kind_;
  std::size_t offset_;
};

/// Parses infix text over `t x u v u_t v_xx ...`, `eps mu sigma alpha g`,
/// `pi`, `exp() erf() sqrt()` and `+ - * / ^`. `^` binds tightest and is
/// right-associative; its exponent must fold to an exact rational.
/// Integer literals are exact, decimal literals are doubles.
Expr parse_expr(std::string_view text);

}  // namespace ptnls::jet
