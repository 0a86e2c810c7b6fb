#pragma once

#include <array>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "ptnls/jet/expr.hpp"

namespace ptnls::jet {

class EvalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Numerical values of the model parameters.
struct ParamValues {
  double eps = 0.05;
  double mu = 1.0;
  double sigma = 1.0;
  double alpha = 0.5;
  double g = 1.0;

  double get(Param p) const;
  void set(Param p, double v);

  friend bool operator==(const ParamValues&, const ParamValues&) = default;
};

/// Real values for t, x and a set of jet coordinates. The point is complete
/// up to `order()`; coordinates above that order may also be present.
/// Looking up a coordinate that was never set throws.
class JetPoint {
 public:
  JetPoint() = default;
  JetPoint(double t, double x) : t_(t), x_(x) {}

  double t() const { return t_; }
  double x() const { return x_; }
  void set_t(double t) { t_ = t; }
  void set_x(double x) { x_ = x; }

  void set(JetCoord c, double value);
  bool has(JetCoord c) const { return (present_ >> c.index()) & 1U; }
  double get(JetCoord c) const;

  /// Highest order n such that every coordinate of order <= n is present.
  int order() const;

  std::string describe() const;

 private:
  double t_ = 0.0;
  double x_ = 0.0;
  std::array<double, kJetCoordCount> values_{};
  std::uint64_t present_ = 0;
};

/// Linearised form of an expression for repeated evaluation. Shared
/// subtrees are evaluated once. Safe to call from several threads.
class CompiledExpr {
 public:
  explicit CompiledExpr(const Expr& e);

  double operator()(const JetPoint& p, const ParamValues& params) const;

  std::size_t instruction_count() const { return code_.size(); }

 private:
  struct Instr {
    Op op;
    int a = -1;
    int b = -1;
    double value = 0.0;      // Number; Pow exponent
    int int_exponent = 0;    // Pow with integer exponent
    bool integer_pow = false;
    int slot = 0;            // Param / Indep / Jet index
  };
  std::vector<Instr> code_;
};

/// One-shot evaluation in double precision.
double eval(const Expr& e, const JetPoint& p, const ParamValues& params);

}  // namespace ptnls::jet
