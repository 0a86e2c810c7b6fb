#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "ptnls/catalog.hpp"
#include "ptnls/solver.hpp"

namespace ptnls {

struct LogLogFit {
  double slope = 0.0;
  double intercept = 0.0;
  /// Root-mean-square residual of the fit in log space.
  double residual = 0.0;
};

/// Least squares on (log x, log y). Throws std::invalid_argument for fewer
/// than two points, mismatched lengths or non-positive values.
LogLogFit fit_loglog_slope(const std::vector<double>& xs, const std::vector<double>& ys);

/// Which printed density to integrate.
enum class DensityForm { Tt, Complex };

struct DensityTimeseries {
  CaseId case_id = CaseId::Case1a;
  Kind kind = Kind::Energy;
  DensityForm form = DensityForm::Tt;
  std::vector<double> times;
  /// Sum over the grid of the density times dx.
  std::vector<double> Q;
};

/// Integrates a density along the trajectory. t-derivatives come from the
/// equation, x-derivatives from the FFT (see jet_points). Throws
/// std::invalid_argument when the density is not printed or needs a jet
/// coordinate jet_points does not supply.
DensityTimeseries density_timeseries(const Trajectory& traj, CaseId c, Kind k,
                                     DensityForm form = DensityForm::Tt,
                                     Reading reading = Reading::Corrected);
DensityTimeseries density_timeseries(const Trajectory& traj, const Expr& density);

/// Integral of a density over a single state.
double integrate_density(const FieldState& s, Stepper& stepper, const Expr& density);

/// Lower bound in the relative drift normalisation.
inline constexpr double kDriftNormFloor = 1e-12;

struct DriftMember {
  double eps = 0.0;
  bool ok = false;
  std::string error;
  double Q0 = 0.0;
  double drift_abs = 0.0;
  double drift_rel = 0.0;
  DensityTimeseries series;
};

struct DriftReport {
  CaseId case_id = CaseId::Case1a;
  Kind kind = Kind::Charge;
  SolverConfig base;
  /// The eps = 0 floor run first, then the scan values in order.
  std::vector<DriftMember> members;
  double floor = 0.0;
  int above_floor = 0;
  bool slope_reported = false;
  LogLogFit fit;
  /// Largest change of the slope when one member is left out.
  double leave_one_out_change = 0.0;
  /// |Q0(2N) - Q0(N)| / max(|Q0(N)|, 1e-12) for the floor configuration.
  double q0_refinement = 0.0;
};

struct DriftOptions {
  long sample_every = 10;
  int jobs = 1;
  /// A member counts when its drift exceeds this multiple of the floor.
  double floor_factor = 10.0;
  int min_members = 4;
};

/// max_t |Q(t) - Q(0)| and that divided by max(|Q(0)|, 1e-12).
std::pair<double, double> drift_of(const DensityTimeseries& ts);

/// Fills floor, above_floor, fit and the leave-one-out spread from members.
void finalize_drift(DriftReport& rep, const DriftOptions& opts = {});

/// Runs the solver for eps = 0 and every value of eps_list (other settings
/// from cfg), integrates the density and fits log D against log eps.
/// A member that blows up is flagged and left out of the fit.
DriftReport drift_scan(CaseId c, Kind k, const std::vector<double>& eps_list, const SolverConfig& cfg,
                       const DriftOptions& opts = {});

}  // namespace ptnls
