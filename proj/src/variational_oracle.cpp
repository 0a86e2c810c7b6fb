#include <Eigen/Dense>
#include <array>
#include <boost/math/quadrature/gauss.hpp>
#include <cmath>
#include <random>

#include "ptnls/verify.hpp"

namespace ptnls {

using jet::CompiledExpr;
using jet::Dep;
using jet::JetCoord;

namespace {

constexpr int kTaylorDegree = 4;
constexpr int kFieldOrder = 2;
constexpr int kMoments = 6;
using Gauss = boost::math::quadrature::gauss<double, 16>;

double factorial(int n) {
  double f = 1.0;
  for (int i = 2; i <= n; ++i) f *= i;
  return f;
}

/// Degree-4 polynomial fields u, v matching the jet at the centre point.
class TaylorField {
 public:
  explicit TaylorField(const JetPoint& p) {
    for (int d = 0; d < 2; ++d) {
      for (int a = 0; a <= kTaylorDegree; ++a) {
        for (int b = 0; a + b <= kTaylorDegree; ++b) {
          coef_[d][a][b] = p.get(JetCoord{d == 0 ? Dep::U : Dep::V, a, b}) / (factorial(a) * factorial(b));
        }
      }
    }
  }

  /// d^i/dtau^i d^j/dxi^j of field d at offset (tau, xi).
  double derivative(int d, int i, int j, double tau, double xi) const {
    double s = 0.0;
    for (int a = i; a <= kTaylorDegree; ++a) {
      for (int b = j; a + b <= kTaylorDegree; ++b) {
        const double fa = factorial(a) / factorial(a - i);
        const double fb = factorial(b) / factorial(b - j);
        s += coef_[d][a][b] * fa * fb * std::pow(tau, a - i) * std::pow(xi, b - j);
      }
    }
    return s;
  }

 private:
  double coef_[2][kTaylorDegree + 1][kTaylorDegree + 1] = {};
};

/// (1 - z^2)^m on [-1, 1] and its first two derivatives.
std::array<double, 3> bump1d(int m, double z) {
  const double w = 1.0 - z * z;
  if (w <= 0.0) return {0.0, 0.0, 0.0};
  const double f = std::pow(w, m);
  const double d1 = -2.0 * m * z * std::pow(w, m - 1);
  const double d2 = -2.0 * m * std::pow(w, m - 1) + 4.0 * m * (m - 1) * z * z * std::pow(w, m - 2);
  return {f, d1, d2};
}

struct Bump {
  int m = 5;
  double rt = 0.1;
  double rx = 0.1;
  // derivatives up to order 2 stay O(1)
  double amp = 1.0;

  Bump(int m_, double rt_, double rx_) : m(m_), rt(rt_), rx(rx_) {
    const double r = std::min(rt, rx);
    amp = 1.0 / std::max(1.0, 2.0 * m / (r * r));
  }

  /// d^i/dtau^i d^j/dxi^j of amp B(tau/rt) B(xi/rx), i + j <= 2.
  double derivative(int i, int j, double tau, double xi) const {
    const auto bt = bump1d(m, tau / rt);
    const auto bx = bump1d(m, xi / rx);
    return amp * bt[i] / std::pow(rt, i) * bx[j] / std::pow(rx, j);
  }
};

template <typename F>
double integrate_box(double rt, double rx, F&& f) {
  return Gauss::integrate(
      [&](double tau) { return Gauss::integrate([&](double xi) { return f(tau, xi); }, -rx, rx); }, -rt, rt);
}

}  // namespace

std::pair<double, double> independent_variational_check(const Expr& e, const JetPoint& p,
                                                        const ParamValues& params,
                                                        const OracleOptions& opts) {
  if (e.jet_order() > kFieldOrder) throw OracleError("oracle needs jet order <= 2");
  if (p.order() < kTaylorDegree) throw OracleError("oracle needs the point's jet to order 4");

  const TaylorField field(p);
  const CompiledExpr f(e);
  std::mt19937_64 rng(opts.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_int_distribution<int> pick_m(5, 7);

  std::vector<Bump> bumps;
  for (int k = 0; k < opts.bumps; ++k) {
    const int m = pick_m(rng);
    const double rt = opts.radius * (0.5 + 0.5 * unit(rng));
    const double rx = opts.radius * (0.5 + 0.5 * unit(rng));
    bumps.emplace_back(m, rt, rx);
  }

  const double R = opts.radius;
  auto monomial = [R](int j, double tau, double xi) {
    const double a = tau / R;
    const double b = xi / R;
    switch (j) {
      case 0: return 1.0;
      case 1: return a * a;
      case 2: return b * b;
      case 3: return a * a * a * a;
      case 4: return a * a * b * b;
      default: return b * b * b * b;
    }
  };

  double result[2] = {0.0, 0.0};
  for (int dep = 0; dep < 2; ++dep) {
    Eigen::MatrixXd A(opts.bumps, kMoments);
    Eigen::VectorXd y(opts.bumps);
    for (int k = 0; k < opts.bumps; ++k) {
      const Bump& bump = bumps[k];
      for (int j = 0; j < kMoments; ++j) {
        A(k, j) = integrate_box(bump.rt, bump.rx, [&](double tau, double xi) {
          return monomial(j, tau, xi) * bump.derivative(0, 0, tau, xi);
        });
      }

      auto functional = [&](double s) {
        return integrate_box(bump.rt, bump.rx, [&](double tau, double xi) {
          JetPoint q(p.t() + tau, p.x() + xi);
          for (int d = 0; d < 2; ++d) {
            for (int n = 0; n <= kFieldOrder; ++n) {
              for (int i = 0; i <= n; ++i) {
                const int j = n - i;
                double val = field.derivative(d, i, j, tau, xi);
                if (d == dep) val += s * bump.derivative(i, j, tau, xi);
                q.set(JetCoord{d == 0 ? Dep::U : Dep::V, i, j}, val);
              }
            }
          }
          return f(q, params);
        });
      };
      const double h = opts.h;
      y(k) = (functional(-2 * h) - 8 * functional(-h) + 8 * functional(h) - functional(2 * h)) / (12 * h);
    }
    // rows scaled to unit constant moment
    for (int k = 0; k < opts.bumps; ++k) {
      const double s = A(k, 0);
      A.row(k) /= s;
      y(k) /= s;
    }
    if (!A.allFinite() || !y.allFinite()) throw OracleError("quadrature produced non-finite values");
    const Eigen::VectorXd c = A.colPivHouseholderQr().solve(y);
    if (!c.allFinite()) throw OracleError("moment fit failed");
    result[dep] = c(0);
  }
  return {result[0], result[1]};
}

}  // namespace ptnls
