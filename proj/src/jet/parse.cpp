#include "ptnls/jet/parse.hpp"

#include <cctype>
#include <charconv>
#include <cstdlib>

namespace ptnls::jet {

ParseError::ParseError(Kind kind, std::size_t offset, const std::string& what)
    : std::runtime_error(what + " at offset " + std::to_string(offset)), kind_(kind), offset_(offset) {}

namespace {

class Parser {
 public:
  explicit Parser(std::string_view text) : s_(text) {}

  Expr run() {
    Expr e = expression();
    skip_ws();
    if (pos_ != s_.size()) fail("unexpected '" + std::string(1, s_[pos_]) + "'");
    return e;
  }

 private:
  [[noreturn]] void fail(const std::string& msg, ParseError::Kind kind = ParseError::Kind::Syntax) const {
    throw ParseError(kind, pos_, msg);
  }

  void skip_ws() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }

  bool accept(char c) {
    skip_ws();
    if (pos_ < s_.size() && s_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  void expect(char c) {
    if (!accept(c)) {
      fail(pos_ < s_.size() ? "expected '" + std::string(1, c) + "'"
                            : "expected '" + std::string(1, c) + "' before end of input");
    }
  }

  Expr expression() {
    Expr lhs = term();
    for (;;) {
      if (accept('+')) {
        lhs = lhs + term();
      } else if (accept('-')) {
        lhs = lhs - term();
      } else {
        return lhs;
      }
    }
  }

  Expr term() {
    Expr lhs = unary();
    for (;;) {
      if (accept('*')) {
        lhs = lhs * unary();
      } else if (accept('/')) {
        lhs = lhs / unary();
      } else {
        return lhs;
      }
    }
  }

  Expr unary() {
    if (accept('-')) return -unary();
    if (accept('+')) return unary();
    return power();
  }

  Expr power() {
    Expr base = primary();
    if (!accept('^')) return base;
    const std::size_t at = pos_;
    Expr exponent = unary();
    auto n = exponent.number();
    if (!n || !n->exact()) {
      throw ParseError(ParseError::Kind::Syntax, at, "exponent must be an exact rational constant");
    }
    return pow(base, n->rational());
  }

  Expr primary() {
    skip_ws();
    if (pos_ >= s_.size()) fail("unexpected end of input");
    const char c = s_[pos_];
    if (c == '(') {
      ++pos_;
      Expr e = expression();
      expect(')');
      return e;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return identifier();
    fail("unexpected '" + std::string(1, c) + "'");
  }

  Expr number() {
    const std::size_t start = pos_;
    bool decimal = false;
    while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) ++pos_;
    if (pos_ < s_.size() && s_[pos_] == '.') {
      decimal = true;
      ++pos_;
      while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) ++pos_;
    }
    if (pos_ < s_.size() && (s_[pos_] == 'e' || s_[pos_] == 'E')) {
      std::size_t p = pos_ + 1;
      if (p < s_.size() && (s_[p] == '+' || s_[p] == '-')) ++p;
      if (p < s_.size() && std::isdigit(static_cast<unsigned char>(s_[p]))) {
        decimal = true;
        pos_ = p;
        while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) ++pos_;
      }
    }
    const std::string_view lit = s_.substr(start, pos_ - start);
    if (lit == ".") {
      pos_ = start;
      fail("malformed number");
    }
    if (!decimal) {
      std::int64_t v = 0;
      auto [ptr, ec] = std::from_chars(lit.data(), lit.data() + lit.size(), v);
      if (ec == std::errc()) return Expr(Rational(v));
    }
    const std::string copy(lit);
    return Expr(std::strtod(copy.c_str(), nullptr));
  }

  Expr identifier() {
    const std::size_t start = pos_;
    while (pos_ < s_.size() &&
           (std::isalnum(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_')) {
      ++pos_;
    }
    const std::string_view id = s_.substr(start, pos_ - start);

    if (id == "exp" || id == "erf" || id == "sqrt") {
      if (!accept('(')) fail("expected '(' after " + std::string(id));
      Expr arg = expression();
      expect(')');
      if (id == "exp") return exp(arg);
      if (id == "erf") return erf(arg);
      return sqrt(arg);
    }
    if (id == "pi") return Expr::pi();
    if (id == "t") return Expr(Indep::T);
    if (id == "x") return Expr(Indep::X);
    if (auto p = param_from_name(id)) return Expr(*p);
    if (auto c = JetCoord::from_name(id)) {
      if (c->order() > kMaxJetOrder) {
        throw ParseError(ParseError::Kind::JetOrder, start,
                         "jet coordinate '" + std::string(id) + "' exceeds maximum order " +
                             std::to_string(kMaxJetOrder));
      }
      return Expr(*c);
    }
    throw ParseError(ParseError::Kind::UnknownIdentifier, start, "unknown identifier '" + std::string(id) + "'");
  }

  std::string_view s_;
  std::size_t pos_ = 0;
};

}  // namespace

Expr parse_expr(std::string_view text) { return Parser(text).run(); }

}  // namespace ptnls::jet
