#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "ptnls/catalog.hpp"
#include "ptnls/jet/equiv.hpp"

namespace ptnls {

using jet::JetPoint;

/// n values log-spaced over [lo, hi], endpoints included.
std::vector<double> log_grid(double lo, double hi, int n);
/// {1e-3, ..., 1e-1}, 7 values.
std::vector<double> default_eps_grid();

inline constexpr std::uint64_t kDefaultSeed = 20230917;

struct VerifyOptions {
  std::uint64_t seed = kDefaultSeed;
  ParamValues params;
  std::size_t points = jet::kEquivPoints;
  double tol = jet::kEquivTol;
  std::size_t slope_points = 50;
  std::vector<double> eps_grid = default_eps_grid();
  Reading reading = Reading::Corrected;
};

/// euler_operator(Q1 E1 + Q2 E2) for the case's system.
std::pair<Expr, Expr> euler_residual(const CaseSpec& cs, const Multiplier& m);
std::pair<Expr, Expr> euler_residual(const CaseSpec& cs, Kind kind);
std::pair<Expr, Expr> euler_residual(const CaseSpec& cs, Kind kind, const ParamValues& params);

struct ResidualReport {
  CaseId case_id = CaseId::Case1a;
  Kind kind = Kind::Energy;
  Reading reading = Reading::Corrected;
  bool target_available = false;
  /// Compared against the stored engine-derived form (no printed target).
  bool target_derived = false;
  bool match = false;
  JetPoint worst_point;
  double worst_rel_error = 0.0;
  /// Log-log slope of max |residual| over the eps grid, with its fit residual.
  double epsilon_slope = 0.0;
  double slope_fit_residual = 0.0;
  std::vector<std::pair<double, double>> eps_curve;
  /// Residual at eps = 0 below 1e-12 * max(1, |Q.E|) on the sample.
  bool eps0_zero = false;
  double eps0_max_rel = 0.0;
};

ResidualReport check_residual(CaseId c, Kind k, const VerifyOptions& opts = {});

struct DivergenceWitness {
  JetPoint point;
  double value = 0.0;
};

struct DivergenceReport {
  CaseId case_id = CaseId::Case1a;
  Kind kind = Kind::Energy;
  Reading reading = Reading::Corrected;
  bool checkable = false;
  std::string unavailable_reason;
  int kappa = 1;
  /// |D_t Tt + D_x Tx - kappa Q.E| <= 1e-9 * scale at eps = 0.
  bool zero_at_eps0 = false;
  double eps0_max_rel = 0.0;
  /// Log-log slope of max |R| over the eps grid; +inf when R vanishes
  /// on the whole grid.
  double leading_order = 0.0;
  double leading_fit_residual = 0.0;
  std::vector<std::pair<double, double>> eps_curve;
  /// Failing points at eps = 0 (or the worst point when none fail).
  std::vector<DivergenceWitness> discrepancy_terms;
  /// Same check with u_t, v_t (and their derivatives) eliminated through
  /// E1 = E2 = 0 instead of subtracting Q.E.
  bool on_solution_zero_at_eps0 = false;
  double on_solution_eps0_max_rel = 0.0;
};

/// D_t Tt + D_x Tx - kappa (Q1 E1 + Q2 E2); requires Tx.
Expr divergence_expr(const ConservedVector& cv, const PdeSystem& sys, const Multiplier& m);

DivergenceReport divergence_residual(CaseId c, Kind k, const ParamValues& params,
                                     const VerifyOptions& opts = {});

/// Rewrites e on solutions of E1 = E2 = 0: every u_{t^i x^j}, v_{t^i x^j}
/// with i >= 1 is replaced by x-derivatives only.
Expr on_solution(const Expr& e, const CaseSpec& cs);

/// Prolongation of the charge rotation u d_v - v d_u applied to e.
Expr rotation_defect(const Expr& e);

/// One line of the raw-vs-corrected transcription audit.
struct AuditLine {
  std::string case_key;
  std::string kind_key;
  std::string slot;
  std::string check;
  bool raw_pass = false;
  bool corrected_pass = false;
  std::string detail;
};

/// Runs, for every raw reading kept in the catalog, the check that
/// discriminates it from the corrected reading.
std::vector<AuditLine> audit_corrections(const VerifyOptions& opts = {});
std::vector<AuditLine> audit_corrections(CaseId c, Kind k, const VerifyOptions& opts = {});

class OracleError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct OracleOptions {
  std::uint64_t seed = kDefaultSeed;
  int bumps = 20;
  /// Half-width of the test box around the point.
  double radius = 0.1;
  /// Step of the central difference in the variation parameter.
  double h = 1e-2;
};

/// Variational derivatives of e at p computed without the Euler operator:
/// the fields are the degree-4 Taylor polynomials of p's jet, each is
/// perturbed by compactly supported bumps phi, d/ds of the integral of e is
/// taken by finite differences, and the pointwise value is recovered by a
/// least-squares moment fit. Needs jet_order(e) <= 2 and p complete to order 4.
std::pair<double, double> independent_variational_check(const Expr& e, const JetPoint& p,
                                                        const ParamValues& params,
                                                        const OracleOptions& opts = {});

}  // namespace ptnls
