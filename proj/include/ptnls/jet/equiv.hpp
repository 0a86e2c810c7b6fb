#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <vector>

#include "ptnls/jet/eval.hpp"
#include "ptnls/jet/expr.hpp"

namespace ptnls::jet {

/// Draws random jet points for identity testing:
///   t in [0.1, 2], x in [-2, -0.4] u [0.4, 2], every jet coordinate up to
///   kMaxJetOrder
///   uniform in [-2, 2].
/// Deterministic for a given seed.
struct SamplerDomain {
  double t_min = 0.1;
  double t_max = 2.0;
  double x_inner = 0.4;
  double x_outer = 2.0;
  double jet_abs = 2.0;
};

class JetSampler {
 public:
  using Domain = SamplerDomain;

  explicit JetSampler(std::uint64_t seed, ParamValues params = {}, Domain domain = {});

  JetPoint next();
  std::vector<JetPoint> draw(std::size_t n);

  const ParamValues& params() const { return params_; }
  void set_params(const ParamValues& p) { params_ = p; }

 private:
  std::mt19937_64 rng_;
  ParamValues params_;
  Domain domain_;
};

struct EquivWitness {
  JetPoint point;
  double lhs = 0.0;
  double rhs = 0.0;
};

struct EquivResult {
  bool equivalent = false;
  /// Largest |lhs - rhs| / max(1, |lhs|, |rhs|) over the sample.
  double max_rel_error = 0.0;
  /// First failing point, or the worst point when all pass.
  std::optional<EquivWitness> witness;

  explicit operator bool() const { return equivalent; }
};

inline constexpr std::size_t kEquivPoints = 100;
inline constexpr double kEquivTol = 1e-10;

/// Randomised identity test: equivalent iff
///   |e1(p) - e2(p)| <= tol * max(1, |e1(p)|, |e2(p)|)
/// at every sampled point. Evaluation errors are rethrown with the point.
EquivResult expr_equiv(const Expr& e1, const Expr& e2, std::size_t n, double tol, JetSampler& sampler);

/// Same test on a fixed point set.
EquivResult expr_equiv(const Expr& e1, const Expr& e2, const std::vector<JetPoint>& points,
                       const ParamValues& params, double tol);

}  // namespace ptnls::jet
