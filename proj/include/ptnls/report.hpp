#pragma once

#include <filesystem>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "ptnls/analysis.hpp"
#include "ptnls/solver.hpp"

namespace ptnls {

inline constexpr const char* kToolVersion = PTNLS_VERSION;

inline constexpr const char* kDriftCsvHeader =
    "case,kind,eps,mu,sigma,alpha,g,N,L,dt,T_final,Q0,drift_abs,drift_rel";
inline constexpr const char* kSlopeCsvHeader = "case,kind,slope,intercept,fit_residual,floor";

/// Ordered key=value pairs describing a resolved run configuration.
using ConfigLines = std::vector<std::pair<std::string, std::string>>;

/// Shortest round-trip decimal for a double (17 significant digits).
std::string format_double(double v);

ConfigLines describe_config(const SolverConfig& cfg);

/// "# ptnls <version>" followed by "# key=value" per entry.
void write_comment_header(std::ostream& os, const ConfigLines& meta);

/// One row per member of every report (the eps = 0 floor run included).
void write_drift_csv(std::ostream& os, const std::vector<DriftReport>& reports, const ConfigLines& meta);
/// One row per report; slope and intercept are "nan" when not reported.
void write_slope_csv(std::ostream& os, const std::vector<DriftReport>& reports, const ConfigLines& meta);
/// Rows x, Re q, Im q at 17 significant digits after a t, N, L, params header.
void write_trajectory_csv(std::ostream& os, const FieldState& s, const ConfigLines& meta);
/// Rows t,Q for a density timeseries.
void write_timeseries_csv(std::ostream& os, const DensityTimeseries& ts, const ConfigLines& meta);

struct SvgSeries {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
};

struct SvgPlot {
  std::string title;
  std::string x_label;
  std::string y_label;
  bool log_x = false;
  bool log_y = false;
  std::vector<SvgSeries> series;
};

inline constexpr int kSvgWidth = 800;
inline constexpr int kSvgHeight = 500;

/// Line chart, 800 x 500, with the configuration in a <metadata> element.
void write_svg(std::ostream& os, const SvgPlot& plot, const ConfigLines& meta);

/// Q(t) per eps and the log-log drift plot of one report.
SvgPlot timeseries_plot(const DriftReport& rep);
SvgPlot drift_plot(const DriftReport& rep);

enum class ReportFormat { Csv, Svg };

/// Writes <stem>_drift.csv and <stem>_slope.csv, or one SVG pair per
/// report; returns the paths written. Throws std::runtime_error on I/O failure.
std::vector<std::filesystem::path> emit_report(const std::vector<DriftReport>& reports, ReportFormat format,
                                               const std::filesystem::path& dir, const std::string& stem,
                                               const ConfigLines& meta);

}  // namespace ptnls
