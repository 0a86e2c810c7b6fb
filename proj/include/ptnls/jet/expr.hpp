#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <ostream>
#include <string>
#include <variant>

#include "ptnls/jet/coord.hpp"

namespace ptnls::jet {

/// Exact rational with 64-bit parts; arithmetic reports overflow as nullopt.
class Rational {
 public:
  constexpr Rational() = default;
  Rational(std::int64_t num, std::int64_t den = 1);

  std::int64_t num() const { return num_; }
  std::int64_t den() const { return den_; }
  bool is_integer() const { return den_ == 1; }
  double to_double() const { return static_cast<double>(num_) / static_cast<double>(den_); }

  static std::optional<Rational> add(const Rational& a, const Rational& b);
  static std::optional<Rational> mul(const Rational& a, const Rational& b);
  static std::optional<Rational> div(const Rational& a, const Rational& b);
  static std::optional<Rational> pow(const Rational& base, std::int64_t exponent);
  Rational operator-() const { return Rational(-num_, den_); }

  friend bool operator==(const Rational&, const Rational&) = default;

 private:
  std::int64_t num_ = 0;
  std::int64_t den_ = 1;
};

/// Literal constant: exact rational, or a floating literal.
struct Number {
  std::variant<Rational, double> value;

  bool exact() const { return std::holds_alternative<Rational>(value); }
  const Rational& rational() const { return std::get<Rational>(value); }
  double to_double() const;

  friend bool operator==(const Number&, const Number&) = default;
};

enum class Op : std::uint8_t {
  Number,
  Pi,
  Param,
  Indep,
  Jet,
  Neg,
  Exp,
  Erf,
  Sqrt,
  Add,
  Sub,
  Mul,
  Div,
  Pow,
};

using Symbol = std::variant<JetCoord, Indep, Param>;

/// Bit of `sym` in Expr::symbols().
std::uint64_t symbol_bit(const Symbol& sym);
std::uint64_t jet_bits(Dep dep);
std::string symbol_name(const Symbol& sym);

struct Node;

/// Immutable expression tree over jet coordinates, independent variables
/// and parameters. Copies share structure.
class Expr {
 public:
  /// The constant 0.
  Expr();
  Expr(int value);  // NOLINT: integer literals read naturally in builders
  Expr(Rational value);  // NOLINT
  explicit Expr(double value);
  Expr(JetCoord c);  // NOLINT
  Expr(Indep s);  // NOLINT
  Expr(Param p);  // NOLINT

  static Expr pi();

  Op op() const;
  const Node& node() const { return *node_; }
  const Expr& lhs() const;
  const Expr& rhs() const;

  std::size_t hash() const;
  /// Union of symbol_bit() over all symbols in the tree.
  std::uint64_t symbols() const;
  int jet_order() const;
  std::size_t size() const;

  bool depends_on(const Symbol& sym) const { return (symbols() & symbol_bit(sym)) != 0; }

  std::optional<Number> number() const;
  bool is_number(double v) const;
  bool is_zero() const { return is_number(0.0); }
  bool is_one() const { return is_number(1.0); }

  /// Node identity; two equal pointers imply structural equality.
  const void* id() const { return node_.get(); }

  friend bool structurally_equal(const Expr& a, const Expr& b);

 private:
  explicit Expr(std::shared_ptr<const Node> n) : node_(std::move(n)) {}
  std::shared_ptr<const Node> node_;

  friend class NodeFactory;
};

bool structurally_equal(const Expr& a, const Expr& b);

struct Node {
  Op op = Op::Number;
  Number number{Rational(0)};
  Rational exponent;  // Op::Pow
  Param param = Param::Eps;
  Indep indep = Indep::T;
  JetCoord jet;
  std::optional<Expr> a;
  std::optional<Expr> b;

  std::size_t hash = 0;
  std::uint64_t symbols = 0;
  int jet_order = 0;
  std::size_t size = 1;
};

// Builders. They fold constants, 0 and 1 operands, double negation and
// x - x; nothing more.
Expr operator-(const Expr& a);
Expr operator+(const Expr& a, const Expr& b);
Expr operator-(const Expr& a, const Expr& b);
Expr operator*(const Expr& a, const Expr& b);
Expr operator/(const Expr& a, const Expr& b);
Expr pow(const Expr& base, Rational exponent);
Expr exp(const Expr& a);
Expr erf(const Expr& a);
Expr sqrt(const Expr& a);

struct ExprHash {
  std::size_t operator()(const Expr& e) const { return e.hash(); }
};
struct ExprEqual {
  bool operator()(const Expr& a, const Expr& b) const { return structurally_equal(a, b); }
};

/// Grammar-compatible text; parse_expr(to_string(e)) is structurally equal to e.
std::string to_string(const Expr& e);
std::ostream& operator<<(std::ostream& os, const Expr& e);

/// Every jet coordinate appearing in e, in index order.
template <typename F>
void for_each_jet(std::uint64_t symbols, F&& f) {
  for (int i = 0; i < kJetCoordCount; ++i) {
    if (symbols & (std::uint64_t{1} << i)) f(JetCoord::from_index(i));
  }
}

/// Largest t-order among the jet coordinates of e (0 when none).
int max_t_order(const Expr& e);

}  // namespace ptnls::jet
