#include <gtest/gtest.h>

#include <cmath>

#include "ptnls/analysis.hpp"
#include "ptnls/jet/parse.hpp"

using namespace ptnls;

namespace {

SolverConfig short_run(CaseId c, double eps, double T = 1.0) {
  SolverConfig cfg;
  cfg.case_id = c;
  cfg.params.eps = eps;
  cfg.T_final = T;
  return cfg;
}

double max_rel_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double worst = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    worst = std::max(worst, std::abs(a[i] - b[i]) / std::max(std::abs(b[i]), 1e-300));
  }
  return worst;
}

}  // namespace

TEST(Fit, PowerLaws) {
  const std::vector<double> xs{1.0, 2.0, 4.0, 8.0};
  std::vector<double> sq, lin;
  for (double x : xs) {
    sq.push_back(x * x);
    lin.push_back(3.0 * x);
  }
  const auto f2 = fit_loglog_slope(xs, sq);
  EXPECT_NEAR(f2.slope, 2.0, 1e-12);
  EXPECT_NEAR(f2.intercept, 0.0, 1e-12);
  EXPECT_NEAR(f2.residual, 0.0, 1e-12);
  const auto f1 = fit_loglog_slope(xs, lin);
  EXPECT_NEAR(f1.slope, 1.0, 1e-12);
  EXPECT_NEAR(f1.intercept, std::log(3.0), 1e-12);
}

TEST(Fit, BadInput) {
  EXPECT_THROW(fit_loglog_slope({1.0}, {1.0}), std::invalid_argument);
  EXPECT_THROW(fit_loglog_slope({1.0, 2.0}, {1.0}), std::invalid_argument);
  EXPECT_THROW(fit_loglog_slope({1.0, 2.0}, {1.0, 0.0}), std::invalid_argument);
  EXPECT_THROW(fit_loglog_slope({-1.0, 2.0}, {1.0, 1.0}), std::invalid_argument);
  EXPECT_THROW(fit_loglog_slope({2.0, 2.0}, {1.0, 3.0}), std::invalid_argument);
}

TEST(Drift, OfTimeseries) {
  DensityTimeseries ts;
  ts.Q = {2.0, 2.5, 1.0, 2.2};
  const auto [abs, rel] = drift_of(ts);
  EXPECT_DOUBLE_EQ(abs, 1.0);
  EXPECT_DOUBLE_EQ(rel, 0.5);
  ts.Q = {0.0, 1e-20};
  EXPECT_DOUBLE_EQ(drift_of(ts).second, 1e-20 / kDriftNormFloor);
}

TEST(Drift, SyntheticLinearInEps) {
  DriftReport rep;
  DriftMember floor;
  floor.eps = 0.0;
  floor.ok = true;
  floor.drift_rel = 1e-14;
  rep.members.push_back(floor);
  const double c = 0.37;
  for (double eps : {1e-3, 2e-3, 5e-3, 1e-2, 2e-2, 5e-2, 1e-1}) {
    DriftMember m;
    m.eps = eps;
    m.ok = true;
    m.drift_rel = c * eps;
    rep.members.push_back(m);
  }
  finalize_drift(rep);
  EXPECT_TRUE(rep.slope_reported);
  EXPECT_EQ(rep.above_floor, 7);
  EXPECT_NEAR(rep.fit.slope, 1.0, 1e-10);
  EXPECT_NEAR(rep.fit.intercept, std::log(c), 1e-10);
  EXPECT_LT(rep.leave_one_out_change, 1e-10);
  EXPECT_DOUBLE_EQ(rep.floor, 1e-14);
}

TEST(Drift, MembersNearFloorAndFailuresLeftOut) {
  DriftReport rep;
  DriftMember floor;
  floor.eps = 0.0;
  floor.ok = true;
  floor.drift_rel = 1e-4;
  rep.members.push_back(floor);
  for (double eps : {1e-4, 1e-3, 1e-2, 1e-1, 1.0, 2.0}) {
    DriftMember m;
    m.eps = eps;
    m.ok = eps < 2.0;
    m.drift_rel = eps;
    rep.members.push_back(m);
  }
  finalize_drift(rep);
  // 1e-4 and 1e-3 sit within 10x the floor, 2.0 failed
  EXPECT_EQ(rep.above_floor, 3);
  EXPECT_FALSE(rep.slope_reported);
  rep.members[1].drift_rel = 1e-2;
  rep.members[1].eps = 1e-2;
  finalize_drift(rep);
  EXPECT_EQ(rep.above_floor, 4);
  EXPECT_TRUE(rep.slope_reported);
}

TEST(Density, GroundStateQuadrature) {
  SolverConfig cfg;
  cfg.initial = GroundStateInit{};
  Stepper st(cfg);
  const double q = integrate_density(initial_condition(cfg), st, jet::parse_expr("u^2 + v^2"));
  EXPECT_NEAR(q, 1.0, 1e-10);
  EXPECT_NEAR(charge(initial_condition(cfg)), 1.0, 1e-10);
}

TEST(Density, ZeroFieldGivesZero) {
  SolverConfig cfg = short_run(CaseId::Case1a, 0.05, 0.1);
  cfg.initial = GaussianInit{0.0, 1.0, 0.0};
  const Trajectory tr = run(cfg, 10);
  for (Kind k : {Kind::Energy, Kind::Charge}) {
    const auto ts = density_timeseries(tr, CaseId::Case1a, k);
    for (double q : ts.Q) EXPECT_EQ(q, 0.0);
  }
}

TEST(Density, Case1aChargeAtZeroEps) {
  const Trajectory tr = run(short_run(CaseId::Case1a, 0.0, 2.0), 50);
  const auto ts = density_timeseries(tr, CaseId::Case1a, Kind::Charge);
  ASSERT_EQ(ts.Q.size(), tr.snapshots.size());
  for (std::size_t i = 0; i < ts.Q.size(); ++i) {
    EXPECT_NEAR(ts.Q[i], -0.5 * charge(tr.snapshots[i]), 1e-12);
  }
  EXPECT_LT(drift_of(ts).second, 1e-6);
}

TEST(Density, FormsAgree) {
  const std::pair<CaseId, Kind> pairs[] = {
      {CaseId::Case1a, Kind::Energy}, {CaseId::Case1a, Kind::Charge}, {CaseId::Case2, Kind::Charge}};
  for (const auto& [c, k] : pairs) {
    const Trajectory tr = run(short_run(c, 0.05, 0.5), 50);
    const auto a = density_timeseries(tr, c, k, DensityForm::Tt);
    const auto b = density_timeseries(tr, c, k, DensityForm::Complex);
    ASSERT_EQ(a.Q.size(), b.Q.size());
    EXPECT_LT(max_rel_diff(a.Q, b.Q), 1e-10) << case_name(c) << " " << kind_name(k);
  }
}

TEST(Density, ErrorsAreReported) {
  const Trajectory tr = run(short_run(CaseId::Case1a, 0.0, 0.01), 10);
  EXPECT_THROW(density_timeseries(tr, jet::parse_expr("u_xxxxx")), std::invalid_argument);
  EXPECT_THROW(density_timeseries(tr, jet::parse_expr("u_ttx")), std::invalid_argument);
  EXPECT_NO_THROW(density_timeseries(tr, jet::parse_expr("u_tt + v_txx + u_xxxx")));
  EXPECT_THROW(density_timeseries(tr, CaseId::Case1c, Kind::Charge), std::invalid_argument);
  EXPECT_THROW(density_timeseries(tr, CaseId::Case2, Kind::Energy, DensityForm::Complex), std::invalid_argument);
}

TEST(Scan, ArgumentChecks) {
  const SolverConfig cfg = short_run(CaseId::Case1a, 0.0, 0.01);
  EXPECT_THROW(drift_scan(CaseId::Case1a, Kind::Charge, {1e-3, 1e-2}, cfg), std::invalid_argument);
  EXPECT_THROW(drift_scan(CaseId::Case1a, Kind::Charge, {1e-2, 1e-3, 1e-1, 1.0}, cfg), std::invalid_argument);
  EXPECT_THROW(drift_scan(CaseId::Case1a, Kind::Charge, {0.0, 1e-3, 1e-1, 1.0}, cfg), std::invalid_argument);
  EXPECT_THROW(drift_scan(CaseId::Case1c, Kind::Energy, {1e-3, 1e-2, 1e-1, 1.0}, cfg), std::invalid_argument);
}

TEST(Scan, OffsetDataDriftsLinearly) {
  SolverConfig cfg = short_run(CaseId::Case1a, 0.0, 1.0);
  cfg.grid.N = 256;
  cfg.initial = GaussianInit{1.0, 1.0, 1.0};
  DriftOptions opts;
  opts.jobs = 2;
  const auto rep = drift_scan(CaseId::Case1a, Kind::Charge, {1e-3, 3e-3, 1e-2, 3e-2, 1e-1}, cfg, opts);
  ASSERT_EQ(rep.members.size(), 6u);
  EXPECT_EQ(rep.members[0].eps, 0.0);
  ASSERT_TRUE(rep.slope_reported);
  EXPECT_NEAR(rep.fit.slope, 1.0, 0.3);
  EXPECT_LT(rep.q0_refinement, 1e-8);
  // drift grows with eps
  for (std::size_t i = 2; i < rep.members.size(); ++i) {
    EXPECT_GT(rep.members[i].drift_rel, rep.members[i - 1].drift_rel);
  }
  EXPECT_LE(rep.members[0].drift_rel, rep.floor);
}

TEST(Scan, SymmetricDataDriftsQuadratically) {
  SolverConfig cfg = short_run(CaseId::Case1a, 0.0, 1.0);
  cfg.grid.N = 256;
  const auto rep = drift_scan(CaseId::Case1a, Kind::Charge, {1e-3, 3e-3, 1e-2, 3e-2, 1e-1}, cfg);
  ASSERT_TRUE(rep.slope_reported);
  EXPECT_NEAR(rep.fit.slope, 2.0, 0.3);
}

TEST(Scan, BlowUpMemberIsFlagged) {
  SolverConfig cfg = short_run(CaseId::Case1a, 0.0, 0.5);
  cfg.grid.N = 128;
  cfg.initial = GaussianInit{1.0, 1.0, 1.0};
  const auto rep = drift_scan(CaseId::Case1a, Kind::Charge, {1e-3, 1e-2, 1e-1, 0.5, 200.0}, cfg);
  const auto& last = rep.members.back();
  EXPECT_FALSE(last.ok);
  EXPECT_FALSE(last.error.empty());
  EXPECT_TRUE(rep.members.front().ok);
}
