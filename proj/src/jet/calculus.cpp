#include "ptnls/jet/calculus.hpp"

#include <functional>
#include <unordered_map>

namespace ptnls::jet {

namespace {

using Memo = std::unordered_map<const void*, Expr>;

/// Rebuilds e's operation on new operands through the folding builders.
Expr rebuild(const Expr& e, const Expr& a, const Expr& b) {
  switch (e.op()) {
    case Op::Neg:
      return -a;
    case Op::Exp:
      return exp(a);
    case Op::Erf:
      return erf(a);
    case Op::Sqrt:
      return sqrt(a);
    case Op::Add:
      return a + b;
    case Op::Sub:
      return a - b;
    case Op::Mul:
      return a * b;
    case Op::Div:
      return a / b;
    case Op::Pow:
      return pow(a, e.node().exponent);
    default:
      return e;
  }
}

/// Chain rule shared by partial and total derivatives; `leaf` handles
/// symbols, `skip` reports subtrees known to have zero derivative.
class Differentiator {
 public:
  Differentiator(std::function<Expr(const Expr&)> leaf, std::function<bool(const Expr&)> skip)
      : leaf_(std::move(leaf)), skip_(std::move(skip)) {}

  Expr operator()(const Expr& e) {
    if (skip_(e)) return Expr(0);
    if (auto it = memo_.find(e.id()); it != memo_.end()) return it->second;
    Expr r = compute(e);
    memo_.emplace(e.id(), r);
    return r;
  }

 private:
  Expr compute(const Expr& e) {
    switch (e.op()) {
      case Op::Number:
      case Op::Pi:
        return Expr(0);
      case Op::Param:
      case Op::Indep:
      case Op::Jet:
        return leaf_(e);
      case Op::Neg:
        return -(*this)(e.lhs());
      case Op::Exp:
        return e * (*this)(e.lhs());
      case Op::Erf: {
        const Expr& a = e.lhs();
        return Expr(2) / sqrt(Expr::pi()) * exp(-pow(a, Rational(2))) * (*this)(a);
      }
      case Op::Sqrt:
        return (*this)(e.lhs()) / (Expr(2) * e);
      case Op::Add:
        return (*this)(e.lhs()) + (*this)(e.rhs());
      case Op::Sub:
        return (*this)(e.lhs()) - (*this)(e.rhs());
      case Op::Mul:
        return (*this)(e.lhs()) * e.rhs() + e.lhs() * (*this)(e.rhs());
      case Op::Div: {
        const Expr& a = e.lhs();
        const Expr& b = e.rhs();
        return (*this)(a) / b - a * (*this)(b) / pow(b, Rational(2));
      }
      case Op::Pow: {
        const Rational& r = e.node().exponent;
        auto rm1 = Rational::add(r, Rational(-1));
        if (!rm1) throw std::overflow_error("exponent overflow in derivative");
        return Expr(r) * pow(e.lhs(), *rm1) * (*this)(e.lhs());
      }
    }
    return Expr(0);
  }

  std::function<Expr(const Expr&)> leaf_;
  std::function<bool(const Expr&)> skip_;
  Memo memo_;
};

}  // namespace

Expr partial(const Expr& e, const Symbol& wrt) {
  const std::uint64_t bit = symbol_bit(wrt);
  Differentiator d([](const Expr&) { return Expr(1); },
                   [bit](const Expr& s) { return (s.symbols() & bit) == 0; });
  return d(e);
}

Expr total_derivative(const Expr& e, Indep dir) {
  if (e.jet_order() + 1 > kMaxJetOrder) {
    throw JetOrderError("total derivative of an order-" + std::to_string(e.jet_order()) +
                        " expression exceeds maximum jet order " + std::to_string(kMaxJetOrder));
  }
  const std::uint64_t relevant = jet_bits(Dep::U) | jet_bits(Dep::V) | symbol_bit(dir);
  Differentiator d(
      [dir](const Expr& s) -> Expr {
        const Node& n = s.node();
        if (n.op == Op::Indep) return Expr(n.indep == dir ? 1 : 0);
        if (n.op == Op::Jet) return Expr(n.jet.raised(dir));
        return Expr(0);
      },
      [relevant](const Expr& s) { return (s.symbols() & relevant) == 0; });
  return d(e);
}

Expr total_derivative(const Expr& e, int t_times, int x_times) {
  Expr r = e;
  for (int i = 0; i < x_times; ++i) r = total_derivative(r, Indep::X);
  for (int i = 0; i < t_times; ++i) r = total_derivative(r, Indep::T);
  return r;
}

std::pair<Expr, Expr> euler_operator(const Expr& e) {
  if (2 * e.jet_order() > kMaxJetOrder) {
    throw JetOrderError("Euler operator of an order-" + std::to_string(e.jet_order()) +
                        " expression exceeds maximum jet order " + std::to_string(kMaxJetOrder));
  }
  auto component = [&](Dep dep) {
    Expr sum(0);
    for_each_jet(e.symbols() & jet_bits(dep), [&](JetCoord c) {
      Expr term = total_derivative(partial(e, c), c.t_order, c.x_order);
      sum = c.order() % 2 == 0 ? sum + term : sum - term;
    });
    return sum;
  };
  return {component(Dep::U), component(Dep::V)};
}

Expr substitute(const Expr& e, const std::vector<Binding>& bindings) {
  std::uint64_t keys = 0;
  for (const auto& b : bindings) {
    const std::uint64_t bit = symbol_bit(b.key);
    if (keys & bit) throw SubstitutionError("duplicate binding for " + symbol_name(b.key));
    keys |= bit;
  }

  // Cycle check over the key graph (edge k -> k' when value(k) mentions k').
  const std::size_t n = bindings.size();
  std::vector<int> state(n, 0);  // 0 new, 1 on stack, 2 done
  std::function<void(std::size_t)> visit = [&](std::size_t i) {
    state[i] = 1;
    for (std::size_t j = 0; j < n; ++j) {
      if (!bindings[i].value.depends_on(bindings[j].key)) continue;
      if (state[j] == 1) {
        throw SubstitutionError("cyclic binding through " + symbol_name(bindings[j].key));
      }
      if (state[j] == 0) visit(j);
    }
    state[i] = 2;
  };
  for (std::size_t i = 0; i < n; ++i) {
    if (state[i] == 0) visit(i);
  }

  Memo memo;
  std::function<Expr(const Expr&)> go = [&](const Expr& s) -> Expr {
    if ((s.symbols() & keys) == 0) return s;
    if (auto it = memo.find(s.id()); it != memo.end()) return it->second;
    Expr r;
    const Node& node = s.node();
    if (node.op == Op::Param || node.op == Op::Indep || node.op == Op::Jet) {
      const std::uint64_t bit = node.symbols;
      r = s;
      for (const auto& b : bindings) {
        if (symbol_bit(b.key) == bit) {
          r = b.value;
          break;
        }
      }
    } else {
      Expr a = node.a ? go(*node.a) : Expr(0);
      Expr b = node.b ? go(*node.b) : Expr(0);
      r = rebuild(s, a, b);
    }
    memo.emplace(s.id(), r);
    return r;
  };
  return go(e);
}

}  // namespace ptnls::jet
