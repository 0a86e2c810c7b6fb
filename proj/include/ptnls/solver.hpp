#pragma once

#include <complex>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "ptnls/catalog.hpp"
#include "ptnls/jet/eval.hpp"

namespace ptnls {

using cplx = std::complex<double>;

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class SolverError : public std::runtime_error {
 public:
  SolverError(const std::string& what, double t) : std::runtime_error(what), t_(t) {}
  /// Simulation time at which the failure was detected.
  double time() const { return t_; }

 private:
  double t_;
};

/// Non-finite field values.
class BlowUpError : public SolverError {
 public:
  using SolverError::SolverError;
};

/// Field too large in the outermost cells.
class BoundaryError : public SolverError {
 public:
  using SolverError::SolverError;
};

/// Periodic grid on [-L, L) with nodes x_j = -L + (j + 1/2) dx.
struct Grid {
  double L = 20.0;
  int N = 512;

  double dx() const { return 2.0 * L / N; }
  double x(int j) const { return -L + (j + 0.5) * dx(); }
  std::vector<double> nodes() const;
  /// Angular wavenumbers in FFT order.
  std::vector<double> wavenumbers() const;
  /// N a power of two, N >= 64, L > 0.
  void validate() const;
};

struct FieldState {
  double t = 0.0;
  std::vector<cplx> q;
  Grid grid;
};

struct GaussianInit {
  double amplitude = 1.0;
  double width = 1.0;
  double center = 0.0;
};

/// pi^{-1/4} exp(-x^2/2).
struct GroundStateInit {};

using InitialData = std::variant<GaussianInit, GroundStateInit>;

/// Integrator for the pointwise potential + nonlinear substep.
enum class LocalStep { Exact, RK4 };

struct SolverConfig {
  Grid grid;
  double dt = 1e-3;
  double T_final = 5.0;
  CaseId case_id = CaseId::Case1a;
  ParamValues params;
  InitialData initial = GaussianInit{};
  LocalStep local = LocalStep::Exact;
  /// Replace the case's a(x) or b(x) (expressions in x and parameters).
  std::optional<Expr> a_override;
  std::optional<Expr> b_override;
  /// Outer-cell magnitude relative to max |q| that raises a warning.
  double boundary_warn = 1e-8;
  /// ... and that aborts the run.
  double boundary_fail = 1e-4;

  /// T_final / dt, which must be an integer.
  long steps() const;
  void validate() const;
};

FieldState initial_condition(const SolverConfig& cfg);

/// Strang split-step Fourier integrator:
///   i q_t = -q_xx/2 + (a + i eps b) q - G |q|^2 q,   G = 2 mu^2 sigma exp(-alpha x^2),
/// the complex form of the real system (E1, E2). Kinetic half steps are
/// exact in Fourier space; the pointwise substep
///   q_t = (eps b - i a + i G |q|^2) q
/// is integrated in closed form (|q|^2 grows as exp(2 eps b t)) or by RK4.
class Stepper {
 public:
  explicit Stepper(const SolverConfig& cfg);
  ~Stepper();
  Stepper(const Stepper&) = delete;
  Stepper& operator=(const Stepper&) = delete;

  void step(FieldState& s);

  const SolverConfig& config() const { return cfg_; }
  const std::vector<double>& a() const { return a_; }
  const std::vector<double>& b() const { return b_; }
  /// G(x_j) = 2 mu^2 sigma exp(-alpha x_j^2).
  const std::vector<double>& nonlinearity() const { return g_; }

  /// d^order q / dx^order by FFT.
  std::vector<cplx> derivative(const std::vector<cplx>& q, int order);
  /// Right-hand side q_t of the complex equation.
  std::vector<cplx> time_derivative(const FieldState& s);

 private:
  void local_step(std::vector<cplx>& q, double h) const;

  SolverConfig cfg_;
  std::vector<double> a_, b_, g_, k_;
  std::vector<cplx> half_kinetic_;
  struct Fft;
  std::unique_ptr<Fft> fft_;
};

/// One Strang step; convenience wrapper building a Stepper.
FieldState step(const FieldState& s, const SolverConfig& cfg);

struct Trajectory {
  SolverConfig config;
  std::vector<FieldState> snapshots;
  std::vector<std::string> warnings;
};

/// Snapshots at t = 0, sample_every dt, ..., T_final (the final state is
/// always included). Throws BlowUpError / BoundaryError.
Trajectory run(const SolverConfig& cfg, long sample_every);

/// Jet values at every node: q and x-derivatives to order 4, q_t and its
/// x-derivatives to order 2, and q_tt, all from the equation and spectral
/// differentiation.
std::vector<jet::JetPoint> jet_points(const FieldState& s, Stepper& stepper);

/// Trapezoid sum of |q|^2 dx (equal to the rectangle sum on a periodic grid).
double charge(const FieldState& s);

/// Sum of |q_x|^2/2 + a |q|^2 - G |q|^4 / 2 over the grid, times dx.
double hamiltonian(const FieldState& s, Stepper& stepper);

/// Largest |q| over the outermost two cells at each end, divided by max |q|.
double boundary_ratio(const FieldState& s);

}  // namespace ptnls
