#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "ptnls/jet/expr.hpp"

namespace ptnls::testing {

struct RandomExprOptions {
  int max_jet_order = 2;
  int max_depth = 3;
  // exp/erf/sqrt and bounded quotients
  bool transcendental = true;
  bool params = true;
  // decimal literals alongside exact rationals
  bool decimals = false;
};

/// Hand-rolled generator of smooth expressions on the sampler domain.
/// Quotients and roots only ever see (2 + w^2)-style arguments.
class RandomExprGen {
 public:
  explicit RandomExprGen(std::uint64_t seed, RandomExprOptions opts = {}) : rng_(seed), opts_(opts) {}

  jet::Expr next() { return node(opts_.max_depth); }

  /// Polynomial in jet coordinates times an e^{-x^2} factor.
  jet::Expr weighted_polynomial() {
    jet::Expr sum;
    const int terms = uniform(1, 3);
    for (int i = 0; i < terms; ++i) {
      jet::Expr mono = small_rational();
      const int factors = uniform(1, 3);
      for (int k = 0; k < factors; ++k) mono = mono * jet_leaf();
      if (uniform(0, 1) == 1) mono = mono * jet::Expr(jet::Indep::X);
      sum = sum + mono;
    }
    const jet::Expr x = jet::Indep::X;
    return sum * jet::exp(-(x * x));
  }

  jet::JetCoord random_coord() {
    const int order = uniform(0, opts_.max_jet_order);
    const int t = uniform(0, order);
    return {uniform(0, 1) ? jet::Dep::U : jet::Dep::V, t, order - t};
  }

  jet::Expr jet_leaf() { return jet::Expr(random_coord()); }

  jet::Expr small_rational() {
    const int num = uniform(-4, 4);
    const int den = uniform(1, 3);
    return jet::Expr(jet::Rational(num == 0 ? 1 : num, den));
  }

  int uniform(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng_); }

 private:
  jet::Expr leaf() {
    const int pick = uniform(0, 9);
    if (pick <= 4) return jet_leaf();
    if (pick == 5) return jet::Expr(jet::Indep::X);
    if (pick == 6) return jet::Expr(jet::Indep::T);
    if (pick == 7 && opts_.params) return jet::Expr(static_cast<jet::Param>(uniform(0, jet::kParamCount - 1)));
    if (pick == 8 && opts_.decimals) return jet::Expr(std::uniform_real_distribution<double>(-3, 3)(rng_));
    return small_rational();
  }

  jet::Expr node(int depth) {
    if (depth == 0) return leaf();
    const int top = opts_.transcendental ? 9 : 4;
    const int op = uniform(0, top);
    const jet::Expr a = node(depth - 1);
    if (op == 4) return jet::pow(a, jet::Rational(uniform(2, 3)));
    if (op == 5) return jet::exp(jet::Expr(jet::Rational(-1, 2)) * square(a));
    if (op == 6) return jet::erf(a);
    if (op == 8) return jet::sqrt(jet::Expr(1) + square(a));
    if (op == 9) return -a;
    const jet::Expr b = node(depth - 1);
    switch (op) {
      case 0: return a + b;
      case 1: return a - b;
      case 7: return a / (jet::Expr(2) + square(b));
      default: return a * b;
    }
  }

  static jet::Expr square(const jet::Expr& e) { return jet::pow(e, jet::Rational(2)); }

  std::mt19937_64 rng_;
  RandomExprOptions opts_;
};

}  // namespace ptnls::testing
