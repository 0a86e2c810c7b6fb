#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "ptnls/jet/parse.hpp"
#include "ptnls/solver.hpp"

using namespace ptnls;

namespace {

SolverConfig linear_oscillator() {
  SolverConfig cfg;
  cfg.case_id = CaseId::Case1a;
  cfg.params.eps = 0.0;
  cfg.params.mu = 0.0;
  cfg.initial = GroundStateInit{};
  return cfg;
}

double l2(const std::vector<cplx>& a, double dx) {
  double s = 0.0;
  for (const auto& z : a) s += std::norm(z);
  return std::sqrt(s * dx);
}

double l2_diff(const std::vector<cplx>& a, const std::vector<cplx>& b, double dx) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += std::norm(a[i] - b[i]);
  return std::sqrt(s * dx);
}

FieldState final_state(const SolverConfig& cfg) {
  Stepper st(cfg);
  FieldState s = initial_condition(cfg);
  for (long n = 0; n < cfg.steps(); ++n) st.step(s);
  return s;
}

/// Trigonometric interpolation of a periodic grid function onto other nodes.
std::vector<cplx> interpolate(const FieldState& s, const std::vector<double>& xs) {
  const int N = s.grid.N;
  const auto k = s.grid.wavenumbers();
  std::vector<cplx> c(N);
  for (int m = 0; m < N; ++m) {
    cplx acc = 0.0;
    for (int j = 0; j < N; ++j) acc += s.q[j] * std::polar(1.0, -k[m] * s.grid.x(j));
    c[m] = acc / double(N);
  }
  c[N / 2] = 0.0;  // Nyquist is ambiguous; negligible for resolved data
  std::vector<cplx> out(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i) {
    cplx acc = 0.0;
    for (int m = 0; m < N; ++m) acc += c[m] * std::polar(1.0, k[m] * xs[i]);
    out[i] = acc;
  }
  return out;
}

}  // namespace

TEST(Grid, NodesAndWavenumbers) {
  Grid g{10.0, 64};
  EXPECT_DOUBLE_EQ(g.dx(), 20.0 / 64);
  EXPECT_DOUBLE_EQ(g.x(0), -10.0 + 0.5 * g.dx());
  EXPECT_DOUBLE_EQ(g.x(63), 10.0 - 0.5 * g.dx());
  const auto k = g.wavenumbers();
  EXPECT_DOUBLE_EQ(k[0], 0.0);
  EXPECT_DOUBLE_EQ(k[1], std::numbers::pi / 10.0);
  EXPECT_DOUBLE_EQ(k[63], -std::numbers::pi / 10.0);
  EXPECT_THROW((Grid{10.0, 100}).validate(), ConfigError);
  EXPECT_THROW((Grid{10.0, 32}).validate(), ConfigError);
  EXPECT_THROW((Grid{0.0, 64}).validate(), ConfigError);
}

TEST(Config, Validation) {
  SolverConfig cfg;
  cfg.dt = 3e-3;
  cfg.T_final = 1.0;
  EXPECT_THROW(cfg.validate(), ConfigError);
  cfg.dt = -1e-3;
  EXPECT_THROW(cfg.validate(), ConfigError);
  cfg.dt = 1e-3;
  cfg.T_final = -1.0;
  EXPECT_THROW(cfg.validate(), ConfigError);
  cfg.T_final = 1.0;
  EXPECT_NO_THROW(cfg.validate());
  EXPECT_EQ(cfg.steps(), 1000);
  SolverConfig bad;
  bad.grid.N = 100;
  EXPECT_THROW(Stepper{bad}, ConfigError);
}

TEST(InitialCondition, Gaussian) {
  SolverConfig cfg;
  const FieldState s = initial_condition(cfg);
  const double dx = cfg.grid.dx();
  const int mid = cfg.grid.N / 2;
  EXPECT_NEAR(s.q[mid].real(), std::exp(-dx * dx / 8), 1e-15);
  EXPECT_NEAR(s.q[mid - 1].real(), std::exp(-dx * dx / 8), 1e-15);
  EXPECT_EQ(s.q[mid].imag(), 0.0);
  EXPECT_EQ(s.t, 0.0);

  cfg.initial = GaussianInit{2.0, 0.5, 1.0};
  const FieldState g = initial_condition(cfg);
  for (int j = 0; j < cfg.grid.N; j += 17) {
    const double x = cfg.grid.x(j);
    EXPECT_NEAR(g.q[j].real(), 2.0 * std::exp(-(x - 1.0) * (x - 1.0) / (2 * 0.25)), 1e-14);
  }
}

TEST(InitialCondition, GroundStateIsNormalised) {
  const FieldState s = initial_condition(linear_oscillator());
  EXPECT_NEAR(charge(s), 1.0, 1e-10);
}

TEST(InitialCondition, ZeroAmplitudeStaysZero) {
  SolverConfig cfg;
  cfg.initial = GaussianInit{0.0, 1.0, 0.0};
  cfg.T_final = 0.1;
  const Trajectory tr = run(cfg, 10);
  for (const auto& s : tr.snapshots) {
    for (const auto& z : s.q) EXPECT_EQ(z, cplx(0.0));
  }
}

TEST(Step, FreeFourierModeGetsExactPhase) {
  SolverConfig cfg;
  cfg.params.eps = 0.0;
  cfg.params.mu = 0.0;
  cfg.a_override = Expr(0);
  cfg.dt = 0.01;
  Stepper st(cfg);
  for (int n : {1, 5, 40, -17}) {
    const double k = std::numbers::pi * n / cfg.grid.L;
    FieldState s{0.0, {}, cfg.grid};
    for (int j = 0; j < cfg.grid.N; ++j) s.q.push_back(std::polar(1.0, k * cfg.grid.x(j)));
    const FieldState s0 = s;
    st.step(s);
    EXPECT_DOUBLE_EQ(s.t, cfg.dt);
    const cplx phase = std::polar(1.0, -k * k * cfg.dt / 2);
    double err = 0.0;
    for (int j = 0; j < cfg.grid.N; ++j) err = std::max(err, std::abs(s.q[j] - s0.q[j] * phase));
    EXPECT_LT(err, 1e-12) << "mode " << n;
  }
}

TEST(Step, GroundStateModulusPerStep) {
  const SolverConfig cfg = linear_oscillator();
  Stepper st(cfg);
  FieldState s = initial_condition(cfg);
  const FieldState s0 = s;
  st.step(s);
  double dev = 0.0;
  for (int j = 0; j < cfg.grid.N; ++j) dev = std::max(dev, std::abs(std::abs(s.q[j]) - std::abs(s0.q[j])));
  EXPECT_LT(dev, 1e-8);
}

TEST(Run, GroundStateStaysStationary) {
  const SolverConfig cfg = linear_oscillator();
  const Trajectory tr = run(cfg, 100);
  ASSERT_EQ(tr.snapshots.size(), 51U);
  double dev = 0.0, phase_err = 0.0;
  for (const auto& s : tr.snapshots) {
    for (int j = 0; j < cfg.grid.N; ++j) {
      const double x = cfg.grid.x(j);
      const double ref = std::pow(std::numbers::pi, -0.25) * std::exp(-x * x / 2);
      dev = std::max(dev, std::abs(std::abs(s.q[j]) - ref));
      phase_err = std::max(phase_err, std::abs(s.q[j] - ref * std::polar(1.0, -s.t / 2)));
    }
  }
  EXPECT_LT(dev, 1e-6);
  EXPECT_LT(phase_err, 1e-5);
}

TEST(Step, NormChangesAtGainLossRate) {
  SolverConfig cfg;
  cfg.params.eps = 0.05;
  cfg.initial = GaussianInit{1.0, 1.0, 1.0};
  cfg.dt = 1e-5;
  Stepper st(cfg);
  FieldState s = initial_condition(cfg);
  double rate = 0.0;
  for (int j = 0; j < cfg.grid.N; ++j) rate += 2 * cfg.params.eps * cfg.grid.x(j) * std::norm(s.q[j]);
  rate *= cfg.grid.dx();
  const double n0 = charge(s);
  st.step(s);
  const double measured = (charge(s) - n0) / cfg.dt;
  EXPECT_NEAR(measured, rate, 1e-3 * std::abs(rate));
  EXPECT_GT(rate, 0.0);
}

TEST(Step, SpectralResolution) {
  SolverConfig coarse;
  coarse.params.eps = 0.05;
  coarse.grid.N = 512;
  coarse.T_final = 1.0;
  SolverConfig fine = coarse;
  fine.grid.N = 1024;
  const FieldState a = final_state(coarse);
  const FieldState b = final_state(fine);
  const auto on_fine = interpolate(a, fine.grid.nodes());
  const double rel = l2_diff(on_fine, b.q, fine.grid.dx()) / l2(b.q, fine.grid.dx());
  EXPECT_LT(rel, 1e-10);
}

TEST(Step, SecondOrderInTime) {
  SolverConfig cfg;
  cfg.params.eps = 0.05;
  cfg.T_final = 1.0;
  std::vector<FieldState> finals;
  for (double dt : {1e-2, 5e-3, 2.5e-3}) {
    cfg.dt = dt;
    finals.push_back(final_state(cfg));
  }
  const double dx = cfg.grid.dx();
  const double e1 = l2_diff(finals[0].q, finals[1].q, dx);
  const double e2 = l2_diff(finals[1].q, finals[2].q, dx);
  const double order = std::log2(e1 / e2);
  EXPECT_NEAR(order, 2.0, 0.2);
  EXPECT_NEAR(e1 / e2, 4.0, 0.6);
}

TEST(Step, LocalIntegratorsAgree) {
  SolverConfig cfg;
  cfg.params.eps = 0.05;
  cfg.T_final = 0.5;
  const FieldState exact = final_state(cfg);
  cfg.local = LocalStep::RK4;
  const FieldState rk4 = final_state(cfg);
  EXPECT_LT(l2_diff(exact.q, rk4.q, cfg.grid.dx()), 1e-8);
}

TEST(Run, ChargeAndEnergyConservedWithoutGainLoss) {
  for (double sigma : {1.0, -1.0}) {
    SolverConfig cfg;
    cfg.params.eps = 0.0;
    cfg.params.sigma = sigma;
    cfg.T_final = 5.0;
    const Trajectory tr = run(cfg, 100);
    Stepper st(cfg);
    const double c0 = charge(tr.snapshots.front());
    const double h0 = hamiltonian(tr.snapshots.front(), st);
    double dc = 0.0, dh = 0.0;
    for (const auto& s : tr.snapshots) {
      dc = std::max(dc, std::abs(charge(s) - c0));
      dh = std::max(dh, std::abs(hamiltonian(s, st) - h0));
    }
    EXPECT_LT(dc / c0, 1e-6) << "sigma " << sigma;
    EXPECT_LT(dh, 1e-5) << "sigma " << sigma;
  }
}

TEST(Run, TrajectoryShape) {
  SolverConfig cfg;
  cfg.T_final = 0.1;
  const Trajectory tr = run(cfg, 30);
  // 0, 30, 60, 90 and the final step
  ASSERT_EQ(tr.snapshots.size(), 5U);
  EXPECT_DOUBLE_EQ(tr.snapshots[1].t, 30 * cfg.dt);
  EXPECT_DOUBLE_EQ(tr.snapshots.back().t, 0.1);
  EXPECT_THROW(run(cfg, 0), ConfigError);
}

TEST(Run, ZeroFinalTimeIsIdentity) {
  SolverConfig cfg;
  cfg.T_final = 0.0;
  const Trajectory tr = run(cfg, 10);
  ASSERT_EQ(tr.snapshots.size(), 1U);
  EXPECT_EQ(tr.snapshots[0].q, initial_condition(cfg).q);
}

TEST(Run, Deterministic) {
  SolverConfig cfg;
  cfg.params.eps = 0.03;
  cfg.T_final = 0.5;
  const Trajectory a = run(cfg, 50);
  const Trajectory b = run(cfg, 50);
  ASSERT_EQ(a.snapshots.size(), b.snapshots.size());
  for (std::size_t i = 0; i < a.snapshots.size(); ++i) EXPECT_EQ(a.snapshots[i].q, b.snapshots[i].q);
}

TEST(Run, BlowUpReportsTime) {
  SolverConfig cfg;
  cfg.params.eps = 100.0;
  cfg.T_final = 1.0;
  try {
    run(cfg, 1000);
    FAIL() << "expected BlowUpError";
  } catch (const BlowUpError& e) {
    EXPECT_GT(e.time(), 0.0);
    EXPECT_LT(e.time(), 1.0);
  }
}

TEST(Run, BoundaryContamination) {
  SolverConfig cfg;
  cfg.initial = GaussianInit{1.0, 1.0, 18.5};
  cfg.T_final = 0.01;
  EXPECT_THROW(run(cfg, 1), BoundaryError);
  cfg.initial = GaussianInit{1.0, 1.0, 14.5};
  const Trajectory tr = run(cfg, 1);
  EXPECT_FALSE(tr.warnings.empty());
}

TEST(Spectral, DerivativesOfGaussian) {
  SolverConfig cfg;
  Stepper st(cfg);
  const FieldState s = initial_condition(cfg);
  const auto d1 = st.derivative(s.q, 1);
  const auto d2 = st.derivative(s.q, 2);
  for (int j = 0; j < cfg.grid.N; ++j) {
    const double x = cfg.grid.x(j);
    const double g = std::exp(-x * x / 2);
    EXPECT_NEAR(d1[j].real(), -x * g, 1e-12);
    EXPECT_NEAR(d2[j].real(), (x * x - 1) * g, 1e-12);
  }
}

TEST(Spectral, TimeDerivativeMatchesShortStep) {
  SolverConfig cfg;
  cfg.params.eps = 0.05;
  cfg.initial = GaussianInit{1.0, 1.0, 0.7};
  cfg.dt = 1e-6;
  Stepper st(cfg);
  FieldState s = initial_condition(cfg);
  const auto qt = st.time_derivative(s);
  const FieldState s0 = s;
  st.step(s);
  double err = 0.0, scale = 0.0;
  for (int j = 0; j < cfg.grid.N; ++j) {
    err = std::max(err, std::abs((s.q[j] - s0.q[j]) / cfg.dt - qt[j]));
    scale = std::max(scale, std::abs(qt[j]));
  }
  EXPECT_LT(err, 1e-4 * scale);
}

TEST(Spectral, JetPointsCarryEquationValues) {
  SolverConfig cfg;
  cfg.params.eps = 0.05;
  cfg.initial = GaussianInit{1.0, 1.0, 0.7};
  Stepper st(cfg);
  const FieldState s = initial_condition(cfg);
  const auto pts = jet_points(s, st);
  const auto qt = st.time_derivative(s);
  ASSERT_EQ(pts.size(), static_cast<std::size_t>(cfg.grid.N));
  // E1 = E2 = 0 at every node
  const PdeSystem sys = build_system(case_spec(cfg.case_id), cfg.params);
  for (int j = 0; j < cfg.grid.N; j += 7) {
    EXPECT_DOUBLE_EQ(pts[j].x(), cfg.grid.x(j));
    EXPECT_NEAR(pts[j].get(jet::u_(1, 0)), qt[j].real(), 1e-13);
    EXPECT_NEAR(pts[j].get(jet::v_(1, 0)), qt[j].imag(), 1e-13);
    EXPECT_NEAR(jet::eval(sys.E1, pts[j], cfg.params), 0.0, 1e-11);
    EXPECT_NEAR(jet::eval(sys.E2, pts[j], cfg.params), 0.0, 1e-11);
    EXPECT_TRUE(pts[j].has(jet::u_(2, 0)));
    EXPECT_TRUE(pts[j].has(jet::v_(1, 2)));
  }
}
