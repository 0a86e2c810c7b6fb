#include "ptnls/jet/equiv.hpp"

#include <algorithm>
#include <cmath>

namespace ptnls::jet {

JetSampler::JetSampler(std::uint64_t seed, ParamValues params, Domain domain)
    : rng_(seed), params_(params), domain_(domain) {}

JetPoint JetSampler::next() {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double t = domain_.t_min + (domain_.t_max - domain_.t_min) * unit(rng_);
  const double mag = domain_.x_inner + (domain_.x_outer - domain_.x_inner) * unit(rng_);
  const double x = unit(rng_) < 0.5 ? -mag : mag;
  JetPoint p(t, x);
  for (int i = 0; i < kJetCoordCount; ++i) {
    p.set(JetCoord::from_index(i), domain_.jet_abs * (2.0 * unit(rng_) - 1.0));
  }
  return p;
}

std::vector<JetPoint> JetSampler::draw(std::size_t n) {
  std::vector<JetPoint> pts;
  pts.reserve(n);
  for (std::size_t i = 0; i < n; ++i) pts.push_back(next());
  return pts;
}

EquivResult expr_equiv(const Expr& e1, const Expr& e2, const std::vector<JetPoint>& points,
                       const ParamValues& params, double tol) {
  const CompiledExpr f1(e1);
  const CompiledExpr f2(e2);
  EquivResult res;
  res.equivalent = true;
  for (const JetPoint& p : points) {
    double a = 0.0;
    double b = 0.0;
    try {
      a = f1(p, params);
      b = f2(p, params);
    } catch (const EvalError& err) {
      throw EvalError(std::string(err.what()) + " [equivalence sample " + p.describe() + "]");
    }
    const double scale = std::max({1.0, std::abs(a), std::abs(b)});
    const double rel = std::abs(a - b) / scale;
    const bool ok = rel <= tol;
    if (!ok && res.equivalent) {
      res.equivalent = false;
      res.witness = EquivWitness{p, a, b};
    }
    if (rel > res.max_rel_error || !res.witness) {
      res.max_rel_error = std::max(res.max_rel_error, rel);
      if (res.equivalent) res.witness = EquivWitness{p, a, b};
    }
    if (std::isnan(rel)) {
      res.equivalent = false;
      res.max_rel_error = rel;
    }
  }
  return res;
}

EquivResult expr_equiv(const Expr& e1, const Expr& e2, std::size_t n, double tol, JetSampler& sampler) {
  return expr_equiv(e1, e2, sampler.draw(n), sampler.params(), tol);
}

}  // namespace ptnls::jet
