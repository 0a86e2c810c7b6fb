#include "ptnls/verify.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <sstream>

#include "ptnls/analysis.hpp"
#include "ptnls/jet/calculus.hpp"

namespace ptnls {

using jet::CompiledExpr;
using jet::Dep;
using jet::Indep;
using jet::JetCoord;
using jet::JetSampler;

namespace {

constexpr double kEps0ResidualTol = 1e-12;
constexpr double kDivergenceTol = 1e-9;
constexpr std::size_t kMaxWitnesses = 5;

ParamValues with_eps(ParamValues p, double eps) {
  p.eps = eps;
  return p;
}

/// Max over points of max(|f|, |g|) for each eps of the grid, then a
/// log-log fit over the positive entries.
struct EpsScan {
  std::vector<std::pair<double, double>> curve;
  double slope = std::numeric_limits<double>::quiet_NaN();
  double residual = std::numeric_limits<double>::quiet_NaN();
  bool all_zero = true;
};

EpsScan scan_eps(const std::vector<const CompiledExpr*>& fs, const std::vector<JetPoint>& pts,
                 const ParamValues& base, const std::vector<double>& grid) {
  EpsScan s;
  std::vector<double> xs, ys;
  for (double eps : grid) {
    const ParamValues pv = with_eps(base, eps);
    double m = 0.0;
    for (const auto& p : pts) {
      for (const auto* f : fs) m = std::max(m, std::abs((*f)(p, pv)));
    }
    s.curve.emplace_back(eps, m);
    if (m > 0.0) {
      s.all_zero = false;
      xs.push_back(eps);
      ys.push_back(m);
    }
  }
  if (xs.size() >= 2) {
    const LogLogFit fit = fit_loglog_slope(xs, ys);
    s.slope = fit.slope;
    s.residual = fit.residual;
  }
  return s;
}

Expr multiplier_product(const Multiplier& m, const PdeSystem& sys) { return m.Q1 * sys.E1 + m.Q2 * sys.E2; }

}  // namespace

std::vector<double> log_grid(double lo, double hi, int n) {
  std::vector<double> g;
  if (n <= 0) return g;
  if (n == 1) return {lo};
  const double a = std::log10(lo);
  const double b = std::log10(hi);
  for (int i = 0; i < n; ++i) g.push_back(std::pow(10.0, a + (b - a) * i / (n - 1)));
  g.front() = lo;
  g.back() = hi;
  return g;
}

std::vector<double> default_eps_grid() { return log_grid(1e-3, 1e-1, 7); }

std::pair<Expr, Expr> euler_residual(const CaseSpec& cs, const Multiplier& m) {
  return jet::euler_operator(multiplier_product(m, build_system(cs)));
}

std::pair<Expr, Expr> euler_residual(const CaseSpec& cs, Kind kind) {
  return euler_residual(cs, multiplier(kind));
}

std::pair<Expr, Expr> euler_residual(const CaseSpec& cs, Kind kind, const ParamValues& params) {
  auto [ru, rv] = euler_residual(cs, kind);
  return {bind_params(ru, params), bind_params(rv, params)};
}

ResidualReport check_residual(CaseId c, Kind k, const VerifyOptions& opts) {
  const Catalog& cat = Catalog::builtin();
  ResidualReport rep;
  rep.case_id = c;
  rep.kind = k;
  rep.reading = opts.reading;

  const CaseSpec cs = cat.case_spec(c);
  const Multiplier m = cat.multiplier(c, k, opts.reading);
  const auto [ru, rv] = euler_residual(cs, m);

  auto target = cat.residual_target(c, k, opts.reading);
  if (!target) {
    target = cat.derived_residual(c, k);
    rep.target_derived = target.has_value();
  }
  rep.target_available = target.has_value();

  JetSampler sampler(opts.seed, opts.params);
  const auto pts = sampler.draw(opts.points);
  if (target) {
    const auto eu = jet::expr_equiv(ru, target->Ru, pts, opts.params, opts.tol);
    const auto ev = jet::expr_equiv(rv, target->Rv, pts, opts.params, opts.tol);
    rep.match = eu.equivalent && ev.equivalent;
    const auto& worse = (!eu.equivalent || (ev.equivalent && eu.max_rel_error >= ev.max_rel_error)) ? eu : ev;
    rep.worst_rel_error = std::max(eu.max_rel_error, ev.max_rel_error);
    if (worse.witness) rep.worst_point = worse.witness->point;
  }

  const CompiledExpr cru(ru), crv(rv);
  JetSampler slope_sampler(opts.seed + 1, opts.params);
  const auto spts = slope_sampler.draw(opts.slope_points);
  const EpsScan scan = scan_eps({&cru, &crv}, spts, opts.params, opts.eps_grid);
  rep.eps_curve = scan.curve;
  rep.epsilon_slope = scan.slope;
  rep.slope_fit_residual = scan.residual;

  const CompiledExpr cqe(multiplier_product(m, build_system(cs)));
  const ParamValues p0 = with_eps(opts.params, 0.0);
  double worst0 = 0.0;
  for (const auto& p : pts) {
    const double r = std::max(std::abs(cru(p, p0)), std::abs(crv(p, p0)));
    worst0 = std::max(worst0, r / std::max(1.0, std::abs(cqe(p, p0))));
  }
  rep.eps0_max_rel = worst0;
  rep.eps0_zero = worst0 <= kEps0ResidualTol;
  return rep;
}

Expr divergence_expr(const ConservedVector& cv, const PdeSystem& sys, const Multiplier& m) {
  if (!cv.Tx) throw std::invalid_argument("divergence needs a flux");
  const Expr div = jet::total_derivative(cv.Tt, Indep::T) + jet::total_derivative(*cv.Tx, Indep::X);
  return div - Expr(cv.kappa) * multiplier_product(m, sys);
}

DivergenceReport divergence_residual(CaseId c, Kind k, const ParamValues& params,
                                     const VerifyOptions& opts) {
  const Catalog& cat = Catalog::builtin();
  DivergenceReport rep;
  rep.case_id = c;
  rep.kind = k;
  rep.reading = opts.reading;

  const auto cv = cat.conserved_vector(c, k, opts.reading);
  if (!cv) {
    rep.unavailable_reason = std::string("flux not published for case ") + case_name(c) +
                             ": no conserved vector is printed, only Euler residuals";
    return rep;
  }
  if (!cv->Tx) {
    rep.unavailable_reason = std::string("flux not published for case ") + case_name(c) +
                             ": only the conserved density is printed";
    return rep;
  }
  rep.checkable = true;
  rep.kappa = cv->kappa;

  const CaseSpec cs = cat.case_spec(c);
  const PdeSystem sys = build_system(cs);
  const Multiplier m = cat.multiplier(c, k, Reading::Corrected);
  const Expr div = jet::total_derivative(cv->Tt, Indep::T) + jet::total_derivative(*cv->Tx, Indep::X);
  const Expr qe = multiplier_product(m, sys);
  const Expr r = div - Expr(cv->kappa) * qe;

  const CompiledExpr cr(r), cdiv(div), cqe(qe);
  const ParamValues p0 = with_eps(params, 0.0);
  JetSampler sampler(opts.seed, p0);
  const auto pts = sampler.draw(opts.points);

  double worst = -1.0;
  DivergenceWitness worst_w;
  for (const auto& p : pts) {
    const double val = cr(p, p0);
    const double scale = std::max({1.0, std::abs(cdiv(p, p0)), std::abs(cqe(p, p0))});
    const double rel = std::abs(val) / scale;
    if (rel > kDivergenceTol && rep.discrepancy_terms.size() < kMaxWitnesses) {
      rep.discrepancy_terms.push_back({p, val});
    }
    if (rel > worst) {
      worst = rel;
      worst_w = {p, val};
    }
  }
  rep.eps0_max_rel = worst;
  rep.zero_at_eps0 = worst <= kDivergenceTol;
  if (rep.discrepancy_terms.empty()) rep.discrepancy_terms.push_back(worst_w);

  JetSampler slope_sampler(opts.seed + 1, params);
  const auto spts = slope_sampler.draw(opts.slope_points);
  const EpsScan scan = scan_eps({&cr}, spts, params, opts.eps_grid);
  rep.eps_curve = scan.curve;
  rep.leading_order = scan.all_zero ? std::numeric_limits<double>::infinity() : scan.slope;
  rep.leading_fit_residual = scan.all_zero ? 0.0 : scan.residual;

  const CompiledExpr con(on_solution(div, cs));
  double worst_on = 0.0;
  for (const auto& p : pts) {
    const double scale = std::max(1.0, std::abs(cdiv(p, p0)));
    worst_on = std::max(worst_on, std::abs(con(p, p0)) / scale);
  }
  rep.on_solution_eps0_max_rel = worst_on;
  rep.on_solution_zero_at_eps0 = worst_on <= kDivergenceTol;
  return rep;
}

Expr on_solution(const Expr& e, const CaseSpec& cs) {
  using jet::u_;
  using jet::v_;
  const Expr u(u_()), v(v_());
  const Expr eps(jet::Param::Eps), mu(jet::Param::Mu);
  const Expr half(jet::Rational(1, 2));
  const Expr nl = jet::pow(mu, 2) * cs.nonlinearity_coeff * (jet::pow(u, 2) + jet::pow(v, 2));
  // E1 = 0 and E2 = 0 solved for u_t and v_t.
  const Expr ut = -(half * Expr(v_(0, 2))) + eps * cs.b * u + cs.a * v - nl * v;
  const Expr vt = half * Expr(u_(0, 2)) - cs.a * u + eps * cs.b * v + nl * u;

  std::map<JetCoord, Expr> cache;
  auto replacement = [&](JetCoord c) {
    if (auto it = cache.find(c); it != cache.end()) return it->second;
    const Expr& base = c.dep == Dep::U ? ut : vt;
    Expr r = jet::total_derivative(base, c.t_order - 1, c.x_order);
    cache.emplace(c, r);
    return r;
  };

  Expr r = e;
  for (int iter = 0; iter <= jet::kMaxJetOrder; ++iter) {
    if (jet::max_t_order(r) == 0) return r;
    std::vector<jet::Binding> b;
    jet::for_each_jet(r.symbols(), [&](JetCoord c) {
      if (c.t_order >= 1) b.push_back({c, replacement(c)});
    });
    r = jet::substitute(r, b);
  }
  throw jet::JetOrderError("on-solution elimination did not terminate");
}

Expr rotation_defect(const Expr& e) {
  Expr sum(0);
  jet::for_each_jet(e.symbols(), [&](JetCoord c) {
    JetCoord other = c;
    other.dep = c.dep == Dep::U ? Dep::V : Dep::U;
    const Expr d = jet::partial(e, c);
    sum = c.dep == Dep::U ? sum - Expr(other) * d : sum + Expr(other) * d;
  });
  return sum;
}

namespace {

jet::EquivResult zero_check(const Expr& e, const VerifyOptions& opts) {
  JetSampler s(opts.seed, opts.params);
  return jet::expr_equiv(e, Expr(0), opts.points, opts.tol, s);
}

std::string fmt_err(double raw, double corrected) {
  std::ostringstream os;
  os.precision(3);
  os << "max rel err raw=" << raw << " corrected=" << corrected;
  return os.str();
}

AuditLine audit_one(const Catalog& cat, const Correction& corr, const VerifyOptions& opts) {
  AuditLine line{corr.case_key, corr.kind_key, corr.slot, "", false, false, ""};
  const CaseId c = *case_from_name(corr.case_key);
  const Kind k = *kind_from_name(corr.kind_key);
  VerifyOptions raw = opts;
  raw.reading = Reading::Raw;
  VerifyOptions fixed = opts;
  fixed.reading = Reading::Corrected;

  if (corr.slot == "Ru" || corr.slot == "Rv" || corr.slot == "Q1" || corr.slot == "Q2") {
    line.check = "euler-residual";
    const auto r = check_residual(c, k, raw);
    const auto f = check_residual(c, k, fixed);
    line.raw_pass = r.match;
    line.corrected_pass = f.match;
    line.detail = fmt_err(r.worst_rel_error, f.worst_rel_error);
  } else if (corr.slot == "kappa") {
    line.check = "divergence-eps0";
    const auto r = divergence_residual(c, k, opts.params, raw);
    const auto f = divergence_residual(c, k, opts.params, fixed);
    line.raw_pass = r.zero_at_eps0;
    line.corrected_pass = f.zero_at_eps0;
    line.detail = fmt_err(r.eps0_max_rel, f.eps0_max_rel);
  } else if (corr.slot == "Tt" || corr.slot == "Tx") {
    line.check = "rotation-invariance";
    const auto* re = cat.find(corr.case_key, corr.kind_key, corr.slot, "raw");
    const auto* fe = cat.find(corr.case_key, corr.kind_key, corr.slot);
    const auto r = zero_check(rotation_defect(re->expr), opts);
    const auto f = zero_check(rotation_defect(fe->expr), opts);
    line.raw_pass = r.equivalent;
    line.corrected_pass = f.equivalent;
    line.detail = fmt_err(r.max_rel_error, f.max_rel_error);
  } else if (corr.slot == "PhiT") {
    line.check = "complex-form";
    const auto raw_cv = cat.conserved_vector(c, k, Reading::Raw);
    const auto cv = cat.conserved_vector(c, k, Reading::Corrected);
    JetSampler s1(opts.seed, opts.params), s2(opts.seed, opts.params);
    const auto r = jet::expr_equiv(*raw_cv->complex_density, cv->Tt, opts.points, opts.tol, s1);
    const auto f = jet::expr_equiv(*cv->complex_density, cv->Tt, opts.points, opts.tol, s2);
    line.raw_pass = r.equivalent;
    line.corrected_pass = f.equivalent;
    line.detail = fmt_err(r.max_rel_error, f.max_rel_error);
  } else {
    line.check = "none";
    line.detail = "no discriminating check for this slot";
  }
  return line;
}

std::vector<AuditLine> audit_impl(const VerifyOptions& opts, const std::vector<Correction>& corrections) {
  const Catalog& cat = Catalog::builtin();
  std::vector<AuditLine> out;
  for (const auto& corr : corrections) {
    const bool shared_check = corr.slot == "Ru" || corr.slot == "Rv" || corr.slot == "Q1" || corr.slot == "Q2";
    if (shared_check) {
      const bool dup = std::any_of(out.begin(), out.end(), [&](const AuditLine& l) {
        return l.case_key == corr.case_key && l.kind_key == corr.kind_key && l.check == "euler-residual";
      });
      if (dup) {
        for (auto& l : out) {
          if (l.case_key == corr.case_key && l.kind_key == corr.kind_key && l.check == "euler-residual") {
            l.slot += "," + corr.slot;
          }
        }
        continue;
      }
    }
    out.push_back(audit_one(cat, corr, opts));
  }
  return out;
}

}  // namespace

std::vector<AuditLine> audit_corrections(const VerifyOptions& opts) {
  return audit_impl(opts, Catalog::builtin().corrections());
}

std::vector<AuditLine> audit_corrections(CaseId c, Kind k, const VerifyOptions& opts) {
  return audit_impl(opts, Catalog::builtin().corrections(c, k));
}

}  // namespace ptnls
