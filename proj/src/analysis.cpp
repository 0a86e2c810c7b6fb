#include "ptnls/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <thread>

namespace ptnls {

using jet::JetCoord;

LogLogFit fit_loglog_slope(const std::vector<double>& xs, const std::vector<double>& ys) {
  if (xs.size() != ys.size()) throw std::invalid_argument("fit_loglog_slope: length mismatch");
  if (xs.size() < 2) throw std::invalid_argument("fit_loglog_slope: need at least two points");
  const std::size_t n = xs.size();
  std::vector<double> lx(n), ly(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (!(xs[i] > 0.0) || !(ys[i] > 0.0)) throw std::invalid_argument("fit_loglog_slope: non-positive value");
    lx[i] = std::log(xs[i]);
    ly[i] = std::log(ys[i]);
  }
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += lx[i];
    my += ly[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (lx[i] - mx) * (lx[i] - mx);
    sxy += (lx[i] - mx) * (ly[i] - my);
  }
  if (sxx == 0.0) throw std::invalid_argument("fit_loglog_slope: all x values equal");
  LogLogFit f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  double ss = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double r = ly[i] - (f.slope * lx[i] + f.intercept);
    ss += r * r;
  }
  f.residual = std::sqrt(ss / n);
  return f;
}

namespace {

bool supplied(JetCoord c) { return (c.t_order == 0 && c.x_order <= 4) || (c.t_order == 1 && c.x_order <= 2) || (c.t_order == 2 && c.x_order == 0); }

void check_supplied(const Expr& density) {
  jet::for_each_jet(density.symbols(), [](JetCoord c) {
    if (!supplied(c)) {
      throw std::invalid_argument("density needs " + c.name() + ", which the solver does not supply");
    }
  });
}

Expr pick_density(CaseId c, Kind k, DensityForm form, Reading reading) {
  const auto cv = conserved_vector(c, k, reading);
  if (!cv) {
    throw std::invalid_argument(std::string("no conserved density printed for case ") + case_name(c) + " " +
                                kind_name(k));
  }
  if (form == DensityForm::Tt) return cv->Tt;
  if (!cv->complex_density) {
    throw std::invalid_argument(std::string("no complex-form density printed for case ") + case_name(c) + " " +
                                kind_name(k));
  }
  return *cv->complex_density;
}

}  // namespace

double integrate_density(const FieldState& s, Stepper& stepper, const Expr& density) {
  check_supplied(density);
  const jet::CompiledExpr f(density);
  const auto pts = jet_points(s, stepper);
  const ParamValues& params = stepper.config().params;
  double sum = 0.0;
  for (const auto& p : pts) sum += f(p, params);
  return sum * s.grid.dx();
}

DensityTimeseries density_timeseries(const Trajectory& traj, const Expr& density) {
  check_supplied(density);
  DensityTimeseries ts;
  Stepper stepper(traj.config);
  for (const auto& s : traj.snapshots) {
    ts.times.push_back(s.t);
    ts.Q.push_back(integrate_density(s, stepper, density));
  }
  return ts;
}

DensityTimeseries density_timeseries(const Trajectory& traj, CaseId c, Kind k, DensityForm form,
                                     Reading reading) {
  DensityTimeseries ts = density_timeseries(traj, pick_density(c, k, form, reading));
  ts.case_id = c;
  ts.kind = k;
  ts.form = form;
  return ts;
}

std::pair<double, double> drift_of(const DensityTimeseries& ts) {
  if (ts.Q.empty()) return {0.0, 0.0};
  double d = 0.0;
  for (double q : ts.Q) d = std::max(d, std::abs(q - ts.Q.front()));
  return {d, d / std::max(std::abs(ts.Q.front()), kDriftNormFloor)};
}

void finalize_drift(DriftReport& rep, const DriftOptions& opts) {
  rep.floor = 0.0;
  for (const auto& m : rep.members) {
    if (m.eps == 0.0 && m.ok) rep.floor = std::max(rep.floor, m.drift_rel);
  }
  std::vector<double> xs, ys;
  for (const auto& m : rep.members) {
    if (m.eps <= 0.0 || !m.ok) continue;
    if (m.drift_rel > opts.floor_factor * rep.floor && m.drift_rel > 0.0) {
      xs.push_back(m.eps);
      ys.push_back(m.drift_rel);
    }
  }
  rep.above_floor = static_cast<int>(xs.size());
  rep.slope_reported = rep.above_floor >= opts.min_members;
  rep.fit = {};
  rep.leave_one_out_change = 0.0;
  if (!rep.slope_reported) return;
  rep.fit = fit_loglog_slope(xs, ys);
  for (std::size_t skip = 0; skip < xs.size(); ++skip) {
    std::vector<double> x2, y2;
    for (std::size_t i = 0; i < xs.size(); ++i) {
      if (i == skip) continue;
      x2.push_back(xs[i]);
      y2.push_back(ys[i]);
    }
    const double s = fit_loglog_slope(x2, y2).slope;
    rep.leave_one_out_change = std::max(rep.leave_one_out_change, std::abs(s - rep.fit.slope));
  }
}

DriftReport drift_scan(CaseId c, Kind k, const std::vector<double>& eps_list, const SolverConfig& cfg,
                       const DriftOptions& opts) {
  if (eps_list.size() < static_cast<std::size_t>(opts.min_members)) {
    throw std::invalid_argument("drift scan needs at least " + std::to_string(opts.min_members) + " eps values");
  }
  if (!std::is_sorted(eps_list.begin(), eps_list.end())) throw std::invalid_argument("eps list must be sorted");
  if (eps_list.front() <= 0.0) throw std::invalid_argument("eps values must be positive");
  cfg.validate();
  const Expr density = pick_density(c, k, DensityForm::Tt, Reading::Corrected);
  check_supplied(density);

  DriftReport rep;
  rep.case_id = c;
  rep.kind = k;
  rep.base = cfg;
  std::vector<double> all{0.0};
  all.insert(all.end(), eps_list.begin(), eps_list.end());
  rep.members.resize(all.size());

  auto work = [&](std::size_t i) {
    DriftMember& m = rep.members[i];
    m.eps = all[i];
    SolverConfig sc = cfg;
    sc.params.eps = all[i];
    try {
      const Trajectory tr = run(sc, opts.sample_every);
      m.series = density_timeseries(tr, density);
      m.series.case_id = c;
      m.series.kind = k;
      m.Q0 = m.series.Q.front();
      std::tie(m.drift_abs, m.drift_rel) = drift_of(m.series);
      m.ok = std::isfinite(m.drift_rel);
      if (!m.ok) m.error = "non-finite drift";
    } catch (const SolverError& e) {
      m.ok = false;
      m.error = e.what();
    }
  };

  const std::size_t jobs = static_cast<std::size_t>(std::max(1, opts.jobs));
  if (jobs == 1) {
    for (std::size_t i = 0; i < all.size(); ++i) work(i);
  } else {
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < std::min(jobs, all.size()); ++w) {
      pool.emplace_back([&, w] {
        for (std::size_t i = w; i < all.size(); i += jobs) work(i);
      });
    }
    for (auto& t : pool) t.join();
  }

  // Sensitivity of Q(0) to grid refinement.
  SolverConfig fine = cfg;
  fine.params.eps = 0.0;
  fine.grid.N *= 2;
  SolverConfig coarse = cfg;
  coarse.params.eps = 0.0;
  Stepper sc(coarse), sf(fine);
  const double q0c = integrate_density(initial_condition(coarse), sc, density);
  const double q0f = integrate_density(initial_condition(fine), sf, density);
  rep.q0_refinement = std::abs(q0f - q0c) / std::max(std::abs(q0c), kDriftNormFloor);

  finalize_drift(rep, opts);
  return rep;
}

}  // namespace ptnls
