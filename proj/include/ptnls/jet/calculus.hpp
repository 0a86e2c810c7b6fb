#pragma once

#include <stdexcept>
#include <utility>
#include <vector>

#include "ptnls/jet/expr.hpp"

namespace ptnls::jet {

/// Raised when an operation would produce a jet coordinate above kMaxJetOrder.
class JetOrderError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class SubstitutionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Partial derivative treating every jet coordinate as an independent variable.
Expr partial(const Expr& e, const Symbol& wrt);

/// Total derivative D_t or D_x on the jet space:
///   D_s e = de/ds + sum_J w_{J+s} de/dw_J   over w in {u, v}.
Expr total_derivative(const Expr& e, Indep dir);

/// D_t^i D_x^j e.
Expr total_derivative(const Expr& e, int t_times, int x_times);

/// Variational derivatives (delta e/delta u, delta e/delta v) with
///   delta/delta w = sum_J (-1)^|J| D_J d/dw_J
/// summed over every mixed multi-index J present in e.
std::pair<Expr, Expr> euler_operator(const Expr& e);

struct Binding {
  Symbol key;
  Expr value;
};

/// Simultaneous substitution. A binding set whose keys reach themselves
/// through the replacement expressions (u -> v, v -> u, or u_t -> u_t + 1)
/// is rejected as cyclic.
Expr substitute(const Expr& e, const std::vector<Binding>& bindings);

}  // namespace ptnls::jet
