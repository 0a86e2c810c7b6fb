#include "ptnls/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace ptnls {

namespace {

std::string xml_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      case '\'': out += "&apos;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string fixed(double v, int digits = 2) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

std::string tick_label(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

std::ofstream open_out(const std::filesystem::path& p) {
  std::ofstream f(p, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write " + p.string());
  return f;
}

void close_out(std::ofstream& f, const std::filesystem::path& p) {
  f.flush();
  if (!f) throw std::runtime_error("write failed for " + p.string());
}

}  // namespace

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

ConfigLines describe_config(const SolverConfig& cfg) {
  ConfigLines c;
  c.emplace_back("case", case_name(cfg.case_id));
  c.emplace_back("eps", format_double(cfg.params.eps));
  c.emplace_back("mu", format_double(cfg.params.mu));
  c.emplace_back("sigma", format_double(cfg.params.sigma));
  c.emplace_back("alpha", format_double(cfg.params.alpha));
  c.emplace_back("g", format_double(cfg.params.g));
  c.emplace_back("N", std::to_string(cfg.grid.N));
  c.emplace_back("L", format_double(cfg.grid.L));
  c.emplace_back("dt", format_double(cfg.dt));
  c.emplace_back("T_final", format_double(cfg.T_final));
  if (const auto* g = std::get_if<GaussianInit>(&cfg.initial)) {
    c.emplace_back("initial", "gaussian");
    c.emplace_back("amplitude", format_double(g->amplitude));
    c.emplace_back("width", format_double(g->width));
    c.emplace_back("x0", format_double(g->center));
  } else {
    c.emplace_back("initial", "ground");
  }
  c.emplace_back("local_step", cfg.local == LocalStep::Exact ? "exact" : "rk4");
  if (cfg.a_override) c.emplace_back("a", jet::to_string(*cfg.a_override));
  if (cfg.b_override) c.emplace_back("b", jet::to_string(*cfg.b_override));
  return c;
}

void write_comment_header(std::ostream& os, const ConfigLines& meta) {
  os << "# ptnls " << kToolVersion << "\n";
  for (const auto& [k, v] : meta) os << "# " << k << "=" << v << "\n";
}

void write_drift_csv(std::ostream& os, const std::vector<DriftReport>& reports, const ConfigLines& meta) {
  write_comment_header(os, meta);
  os << kDriftCsvHeader << "\n";
  for (const auto& r : reports) {
    for (const auto& m : r.members) {
      const auto& b = r.base;
      const auto& p = b.params;
      os << case_name(r.case_id) << ',' << kind_name(r.kind) << ',' << format_double(m.eps) << ','
         << format_double(p.mu) << ',' << format_double(p.sigma) << ',' << format_double(p.alpha) << ','
         << format_double(p.g) << ',' << b.grid.N << ',' << format_double(b.grid.L) << ','
         << format_double(b.dt) << ',' << format_double(b.T_final) << ','
         << format_double(m.ok ? m.Q0 : NAN) << ',' << format_double(m.ok ? m.drift_abs : NAN) << ','
         << format_double(m.ok ? m.drift_rel : NAN) << "\n";
    }
  }
}

void write_slope_csv(std::ostream& os, const std::vector<DriftReport>& reports, const ConfigLines& meta) {
  write_comment_header(os, meta);
  os << kSlopeCsvHeader << "\n";
  for (const auto& r : reports) {
    const bool ok = r.slope_reported;
    os << case_name(r.case_id) << ',' << kind_name(r.kind) << ',' << format_double(ok ? r.fit.slope : NAN) << ','
       << format_double(ok ? r.fit.intercept : NAN) << ',' << format_double(ok ? r.fit.residual : NAN) << ','
       << format_double(r.floor) << "\n";
  }
}

void write_trajectory_csv(std::ostream& os, const FieldState& s, const ConfigLines& meta) {
  write_comment_header(os, meta);
  os << "# t=" << format_double(s.t) << "\n";
  os << "x,re_q,im_q\n";
  for (int j = 0; j < s.grid.N; ++j) {
    os << format_double(s.grid.x(j)) << ',' << format_double(s.q[j].real()) << ','
       << format_double(s.q[j].imag()) << "\n";
  }
}

void write_timeseries_csv(std::ostream& os, const DensityTimeseries& ts, const ConfigLines& meta) {
  write_comment_header(os, meta);
  os << "t,Q\n";
  for (std::size_t i = 0; i < ts.times.size(); ++i) {
    os << format_double(ts.times[i]) << ',' << format_double(ts.Q[i]) << "\n";
  }
}

void write_svg(std::ostream& os, const SvgPlot& plot, const ConfigLines& meta) {
  const double left = 90, right = 180, top = 50, bottom = 60;
  const double pw = kSvgWidth - left - right;
  const double ph = kSvgHeight - top - bottom;

  auto tx = [&](double v) { return plot.log_x ? std::log10(v) : v; };
  auto ty = [&](double v) { return plot.log_y ? std::log10(v) : v; };
  auto usable = [&](double x, double y) {
    return std::isfinite(x) && std::isfinite(y) && (!plot.log_x || x > 0) && (!plot.log_y || y > 0);
  };

  double x0 = INFINITY, x1 = -INFINITY, y0 = INFINITY, y1 = -INFINITY;
  for (const auto& s : plot.series) {
    for (std::size_t i = 0; i < s.x.size() && i < s.y.size(); ++i) {
      if (!usable(s.x[i], s.y[i])) continue;
      x0 = std::min(x0, tx(s.x[i]));
      x1 = std::max(x1, tx(s.x[i]));
      y0 = std::min(y0, ty(s.y[i]));
      y1 = std::max(y1, ty(s.y[i]));
    }
  }
  if (!(x0 <= x1)) x0 = 0, x1 = 1;
  if (!(y0 <= y1)) y0 = 0, y1 = 1;
  if (x1 - x0 == 0) x0 -= 0.5, x1 += 0.5;
  if (y1 - y0 == 0) {
    const double pad = std::max(std::abs(y0) * 1e-3, 1e-12);
    y0 -= pad, y1 += pad;
  }
  auto px = [&](double v) { return left + (tx(v) - x0) / (x1 - x0) * pw; };
  auto py = [&](double v) { return top + ph - (ty(v) - y0) / (y1 - y0) * ph; };

  static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f"};

  os << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kSvgWidth << "\" height=\"" << kSvgHeight
     << "\" viewBox=\"0 0 " << kSvgWidth << ' ' << kSvgHeight << "\">\n";
  os << "<metadata>ptnls " << xml_escape(kToolVersion);
  for (const auto& [k, v] : meta) os << "; " << xml_escape(k) << '=' << xml_escape(v);
  os << "</metadata>\n";
  os << "<rect x=\"0\" y=\"0\" width=\"" << kSvgWidth << "\" height=\"" << kSvgHeight << "\" fill=\"white\"/>\n";
  os << "<text x=\"" << kSvgWidth / 2 << "\" y=\"28\" text-anchor=\"middle\" font-size=\"16\">"
     << xml_escape(plot.title) << "</text>\n";
  os << "<rect x=\"" << left << "\" y=\"" << top << "\" width=\"" << pw << "\" height=\"" << ph
     << "\" fill=\"none\" stroke=\"black\"/>\n";

  // Ticks: five per axis, at decades when logarithmic.
  for (int i = 0; i <= 4; ++i) {
    const double fx = x0 + (x1 - x0) * i / 4.0;
    const double vx = plot.log_x ? std::pow(10.0, fx) : fx;
    const double sx = left + pw * i / 4.0;
    os << "<line x1=\"" << fixed(sx) << "\" y1=\"" << top + ph << "\" x2=\"" << fixed(sx) << "\" y2=\""
       << top + ph + 5 << "\" stroke=\"black\"/>\n";
    os << "<text x=\"" << fixed(sx) << "\" y=\"" << top + ph + 20 << "\" text-anchor=\"middle\" font-size=\"11\">"
       << xml_escape(tick_label(vx)) << "</text>\n";
    const double fy = y0 + (y1 - y0) * i / 4.0;
    const double vy = plot.log_y ? std::pow(10.0, fy) : fy;
    const double sy = top + ph - ph * i / 4.0;
    os << "<line x1=\"" << left - 5 << "\" y1=\"" << fixed(sy) << "\" x2=\"" << left << "\" y2=\"" << fixed(sy)
       << "\" stroke=\"black\"/>\n";
    os << "<text x=\"" << left - 8 << "\" y=\"" << fixed(sy + 4) << "\" text-anchor=\"end\" font-size=\"11\">"
       << xml_escape(tick_label(vy)) << "</text>\n";
  }
  os << "<text x=\"" << fixed(left + pw / 2) << "\" y=\"" << kSvgHeight - 15
     << "\" text-anchor=\"middle\" font-size=\"13\">" << xml_escape(plot.x_label)
     << (plot.log_x ? " (log)" : "") << "</text>\n";
  os << "<text x=\"20\" y=\"" << fixed(top + ph / 2) << "\" text-anchor=\"middle\" font-size=\"13\" transform=\"rotate(-90 20 "
     << fixed(top + ph / 2) << ")\">" << xml_escape(plot.y_label) << (plot.log_y ? " (log)" : "") << "</text>\n";

  for (std::size_t si = 0; si < plot.series.size(); ++si) {
    const auto& s = plot.series[si];
    const char* color = colors[si % 8];
    std::ostringstream pts;
    for (std::size_t i = 0; i < s.x.size() && i < s.y.size(); ++i) {
      if (!usable(s.x[i], s.y[i])) continue;
      pts << fixed(px(s.x[i])) << ',' << fixed(py(s.y[i])) << ' ';
    }
    os << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"" << pts.str()
       << "\"/>\n";
    const double ly = top + 15 + 18.0 * si;
    os << "<line x1=\"" << left + pw + 15 << "\" y1=\"" << fixed(ly) << "\" x2=\"" << left + pw + 35 << "\" y2=\""
       << fixed(ly) << "\" stroke=\"" << color << "\" stroke-width=\"2\"/>\n";
    os << "<text x=\"" << left + pw + 40 << "\" y=\"" << fixed(ly + 4) << "\" font-size=\"11\">" << xml_escape(s.label)
       << "</text>\n";
  }
  os << "</svg>\n";
}

SvgPlot timeseries_plot(const DriftReport& rep) {
  SvgPlot p;
  p.title = std::string("Q(t), case ") + case_name(rep.case_id) + " " + kind_name(rep.kind);
  p.x_label = "t";
  p.y_label = "Q";
  for (const auto& m : rep.members) {
    if (!m.ok) continue;
    p.series.push_back({"eps=" + tick_label(m.eps), m.series.times, m.series.Q});
  }
  return p;
}

SvgPlot drift_plot(const DriftReport& rep) {
  SvgPlot p;
  p.title = std::string("relative drift, case ") + case_name(rep.case_id) + " " + kind_name(rep.kind);
  p.x_label = "eps";
  p.y_label = "D(eps)";
  p.log_x = true;
  p.log_y = true;
  SvgSeries measured{"measured", {}, {}};
  for (const auto& m : rep.members) {
    if (!m.ok || m.eps <= 0.0) continue;
    measured.x.push_back(m.eps);
    measured.y.push_back(m.drift_rel);
  }
  p.series.push_back(measured);
  if (rep.slope_reported && !measured.x.empty()) {
    SvgSeries fit{"fit slope " + tick_label(rep.fit.slope), {}, {}};
    for (double e : {measured.x.front(), measured.x.back()}) {
      fit.x.push_back(e);
      fit.y.push_back(std::exp(rep.fit.intercept) * std::pow(e, rep.fit.slope));
    }
    p.series.push_back(fit);
  }
  if (rep.floor > 0.0 && !measured.x.empty()) {
    p.series.push_back({"eps=0 floor", {measured.x.front(), measured.x.back()}, {rep.floor, rep.floor}});
  }
  return p;
}

std::vector<std::filesystem::path> emit_report(const std::vector<DriftReport>& reports, ReportFormat format,
                                               const std::filesystem::path& dir, const std::string& stem,
                                               const ConfigLines& meta) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw std::runtime_error("cannot create " + dir.string() + ": " + ec.message());
  std::vector<std::filesystem::path> out;
  if (format == ReportFormat::Csv) {
    const auto drift = dir / (stem + "_drift.csv");
    const auto slope = dir / (stem + "_slope.csv");
    auto f1 = open_out(drift);
    write_drift_csv(f1, reports, meta);
    close_out(f1, drift);
    auto f2 = open_out(slope);
    write_slope_csv(f2, reports, meta);
    close_out(f2, slope);
    return {drift, slope};
  }
  for (const auto& r : reports) {
    const std::string tag = stem + "_" + case_name(r.case_id) + "_" + kind_name(r.kind);
    const auto ts = dir / (tag + "_timeseries.svg");
    const auto dr = dir / (tag + "_drift.svg");
    auto f1 = open_out(ts);
    write_svg(f1, timeseries_plot(r), meta);
    close_out(f1, ts);
    auto f2 = open_out(dr);
    write_svg(f2, drift_plot(r), meta);
    close_out(f2, dr);
    out.push_back(ts);
    out.push_back(dr);
  }
  return out;
}

}  // namespace ptnls
