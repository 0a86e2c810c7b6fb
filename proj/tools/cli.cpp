#include "cli.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <future>
#include <sstream>

#include "ptnls/analysis.hpp"
#include "ptnls/jet/calculus.hpp"
#include "ptnls/jet/parse.hpp"
#include "ptnls/report.hpp"
#include "ptnls/verify.hpp"

namespace ptnls::cli {

namespace fs = std::filesystem;

namespace {

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Options {
  std::string subcommand;
  std::string seed_text;
  int jobs = 1;
  std::string out;
  ParamValues params;

  std::string case_text = "all";
  std::string kind_text = "all";
  std::string reading_text = "corrected";
  std::size_t points = jet::kEquivPoints;

  int N = 512;
  double L = 20.0;
  double dt = 1e-3;
  double T = 5.0;
  std::string initial = "gaussian";
  double amplitude = 1.0;
  double width = 1.0;
  double x0 = 0.0;
  std::string local = "exact";
  long sample_every = 10;
  double max_drift = -1.0;

  std::string eps_grid = "1e-3:1e-1:7";
  double expect_slope = 1.0;
  double slope_tol = 0.3;
  std::string formats = "csv,svg";

  std::string expression;
  std::string at;
  std::string derive;
  bool euler = false;
};

std::string trim(std::string s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

/// Splices `--key value` pairs from a key=value file right after the
/// subcommand, so flags given on the command line take precedence.
std::vector<std::string> expand_config(const std::vector<std::string>& args) {
  std::vector<std::string> rest;
  std::string path;
  bool have = false;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config") {
      if (i + 1 >= args.size()) throw UsageError("--config needs a file name");
      path = args[++i];
      have = true;
    } else if (args[i].rfind("--config=", 0) == 0) {
      path = args[i].substr(9);
      have = true;
    } else {
      rest.push_back(args[i]);
    }
  }
  if (!have) return rest;
  std::ifstream in(path);
  if (!in) throw UsageError("cannot read config file '" + path + "'");
  std::vector<std::string> injected;
  std::string line;
  int no = 0;
  while (std::getline(in, line)) {
    ++no;
    line = trim(line);
    if (line.empty() || line[0] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw UsageError(path + ":" + std::to_string(no) + ": expected key=value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty() || key == "config") throw UsageError(path + ":" + std::to_string(no) + ": bad key");
    injected.push_back("--" + key);
    injected.push_back(value);
  }
  if (rest.empty()) return injected;
  std::vector<std::string> out{rest.front()};
  out.insert(out.end(), injected.begin(), injected.end());
  out.insert(out.end(), rest.begin() + 1, rest.end());
  return out;
}

std::uint64_t resolve_seed(const Options& o) {
  std::string text = o.seed_text;
  if (text.empty()) {
    if (const char* env = std::getenv("PTNLS_SEED"); env && *env) text = env;
  }
  if (text.empty()) return kDefaultSeed;
  try {
    std::size_t used = 0;
    const unsigned long long v = std::stoull(text, &used);
    if (used != text.size() || text[0] == '-' || text[0] == '+') throw std::invalid_argument(text);
    return v;
  } catch (const std::exception&) {
    throw UsageError("invalid seed '" + text + "'");
  }
}

std::vector<CaseId> parse_cases(const std::string& s) {
  if (s == "all") return {kAllCases.begin(), kAllCases.end()};
  const auto c = case_from_name(s);
  if (!c) throw UsageError("unknown case '" + s + "' (expected 1a, 1b, 1c, 2 or all)");
  return {*c};
}

std::vector<Kind> parse_kinds(const std::string& s) {
  if (s == "all") return {kAllKinds.begin(), kAllKinds.end()};
  const auto k = kind_from_name(s);
  if (!k) throw UsageError("unknown kind '" + s + "' (expected energy, charge or all)");
  return {*k};
}

Reading parse_reading(const std::string& s) {
  if (s == "corrected") return Reading::Corrected;
  if (s == "raw") return Reading::Raw;
  throw UsageError("unknown reading '" + s + "' (expected corrected or raw)");
}

std::vector<double> parse_eps_grid(const std::string& s) {
  std::vector<double> v;
  try {
    if (s.find(':') != std::string::npos) {
      std::stringstream ss(s);
      std::string a, b, n;
      std::getline(ss, a, ':');
      std::getline(ss, b, ':');
      std::getline(ss, n, ':');
      const double lo = std::stod(a), hi = std::stod(b);
      const int cnt = std::stoi(n);
      if (!(lo > 0) || !(hi > lo) || cnt < 2) throw std::invalid_argument(s);
      return log_grid(lo, hi, cnt);
    }
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) v.push_back(std::stod(item));
  } catch (const std::exception&) {
    throw UsageError("invalid eps grid '" + s + "' (expected lo:hi:n or a comma list)");
  }
  return v;
}

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(6);
  os << v;
  return os.str();
}

const char* yes(bool b) { return b ? "true" : "false"; }

ConfigLines verify_meta(const Options& o, std::uint64_t seed) {
  ConfigLines m{{"subcommand", o.subcommand}, {"case", o.case_text}, {"kind", o.kind_text},
                {"reading", o.reading_text}, {"seed", std::to_string(seed)}, {"points", std::to_string(o.points)}};
  m.emplace_back("eps", format_double(o.params.eps));
  m.emplace_back("mu", format_double(o.params.mu));
  m.emplace_back("sigma", format_double(o.params.sigma));
  m.emplace_back("alpha", format_double(o.params.alpha));
  m.emplace_back("g", format_double(o.params.g));
  return m;
}

SolverConfig solver_config(const Options& o, CaseId c) {
  SolverConfig cfg;
  cfg.case_id = c;
  cfg.params = o.params;
  cfg.grid.N = o.N;
  cfg.grid.L = o.L;
  cfg.dt = o.dt;
  cfg.T_final = o.T;
  if (o.initial == "gaussian") {
    cfg.initial = GaussianInit{o.amplitude, o.width, o.x0};
  } else if (o.initial == "ground") {
    cfg.initial = GroundStateInit{};
  } else {
    throw UsageError("unknown initial data '" + o.initial + "' (expected gaussian or ground)");
  }
  if (o.local == "exact") {
    cfg.local = LocalStep::Exact;
  } else if (o.local == "rk4") {
    cfg.local = LocalStep::RK4;
  } else {
    throw UsageError("unknown local step '" + o.local + "' (expected exact or rk4)");
  }
  if (o.sample_every <= 0) throw UsageError("sample-every must be positive");
  try {
    cfg.validate();
  } catch (const ConfigError& e) {
    throw UsageError(e.what());
  }
  return cfg;
}

fs::path out_dir(const Options& o) { return o.out.empty() ? fs::path("ptnls_out") : fs::path(o.out); }

template <typename T, typename F>
std::vector<T> parallel_map(std::size_t n, int jobs, F&& f) {
  std::vector<T> out(n);
  if (jobs <= 1 || n <= 1) {
    for (std::size_t i = 0; i < n; ++i) out[i] = f(i);
    return out;
  }
  const std::size_t workers = std::min<std::size_t>(static_cast<std::size_t>(jobs), n);
  std::vector<std::future<void>> fut;
  for (std::size_t w = 0; w < workers; ++w) {
    fut.push_back(std::async(std::launch::async, [&, w] {
      for (std::size_t i = w; i < n; i += workers) out[i] = f(i);
    }));
  }
  for (auto& x : fut) x.get();
  return out;
}

void print_audit(std::ostream& out, const std::vector<AuditLine>& lines) {
  const Catalog& cat = Catalog::builtin();
  for (const auto& l : lines) {
    out << "ledger case=" << l.case_key << " kind=" << l.kind_key << " slot=" << l.slot << " check=" << l.check
        << " raw=" << (l.raw_pass ? "pass" : "fail") << " corrected=" << (l.corrected_pass ? "pass" : "fail") << " ("
        << l.detail << ")\n";
    std::stringstream slots(l.slot);
    std::string slot;
    while (std::getline(slots, slot, ',')) {
      if (const auto* e = cat.find(l.case_key, l.kind_key, slot, "raw")) {
        out << "  raw " << slot << ": " << e->text << "\n";
        const auto* fixed = cat.find(l.case_key, l.kind_key, slot);
        if (!fixed) fixed = cat.find("*", l.kind_key, slot);
        if (fixed) out << "  corrected " << slot << ": " << fixed->text << "\n";
      }
    }
  }
}

int cmd_verify_euler(const Options& o, std::ostream& out) {
  const auto cases = parse_cases(o.case_text);
  const auto kinds = parse_kinds(o.kind_text);
  const Reading reading = parse_reading(o.reading_text);
  const std::uint64_t seed = resolve_seed(o);
  const Catalog& cat = Catalog::builtin();

  std::vector<std::pair<CaseId, Kind>> jobs;
  for (CaseId c : cases) {
    for (Kind k : kinds) {
      if (cat.residual_target(c, k) || cat.derived_residual(c, k)) jobs.emplace_back(c, k);
    }
  }
  VerifyOptions vo;
  vo.seed = seed;
  vo.params = o.params;
  vo.points = o.points;
  vo.reading = reading;
  const auto reports = parallel_map<ResidualReport>(jobs.size(), o.jobs, [&](std::size_t i) {
    return check_residual(jobs[i].first, jobs[i].second, vo);
  });

  bool all = !reports.empty();
  for (const auto& r : reports) {
    out << "verify-euler case=" << case_name(r.case_id) << " kind=" << kind_name(r.kind)
        << " reading=" << reading_name(r.reading) << " target=" << (r.target_derived ? "derived" : "printed")
        << " match=" << yes(r.match) << " worst_rel_error=" << fmt(r.worst_rel_error)
        << " epsilon_slope=" << fmt(r.epsilon_slope) << " slope_fit_residual=" << fmt(r.slope_fit_residual)
        << " eps0_zero=" << yes(r.eps0_zero) << "\n";
    if (!r.match) out << "  witness t=" << fmt(r.worst_point.t()) << " x=" << fmt(r.worst_point.x()) << "\n";
    all = all && r.match;
    print_audit(out, audit_corrections(r.case_id, r.kind, vo));
  }

  if (!o.out.empty()) {
    fs::create_directories(out_dir(o));
    std::ofstream f(out_dir(o) / "verify_euler.csv", std::ios::binary);
    if (!f) throw std::runtime_error("cannot write verify_euler.csv");
    write_comment_header(f, verify_meta(o, seed));
    f << "case,kind,reading,target,match,worst_rel_error,epsilon_slope,slope_fit_residual,eps0_max_rel\n";
    for (const auto& r : reports) {
      f << case_name(r.case_id) << ',' << kind_name(r.kind) << ',' << reading_name(r.reading) << ','
        << (r.target_derived ? "derived" : "printed") << ',' << yes(r.match) << ',' << format_double(r.worst_rel_error)
        << ',' << format_double(r.epsilon_slope) << ',' << format_double(r.slope_fit_residual) << ','
        << format_double(r.eps0_max_rel) << "\n";
    }
  }
  return all ? kExitOk : kExitCheckFailed;
}

void print_divergence(std::ostream& out, const DivergenceReport& d) {
  out << "verify-divergence case=" << case_name(d.case_id) << " kind=" << kind_name(d.kind)
      << " reading=" << reading_name(d.reading) << " kappa=" << d.kappa << " zero_at_eps0=" << yes(d.zero_at_eps0)
      << " eps0_max_rel=" << fmt(d.eps0_max_rel) << " leading_order=" << fmt(d.leading_order)
      << " on_solution_zero_at_eps0=" << yes(d.on_solution_zero_at_eps0) << "\n";
  if (!d.zero_at_eps0) {
    std::size_t shown = 0;
    for (const auto& w : d.discrepancy_terms) {
      if (shown++ == 2) break;
      out << "  discrepancy " << fmt(w.value) << " at t=" << fmt(w.point.t()) << " x=" << fmt(w.point.x()) << "\n";
    }
  }
}

int cmd_verify_divergence(const Options& o, std::ostream& out, std::ostream& err) {
  const auto cases = parse_cases(o.case_text);
  const auto kinds = parse_kinds(o.kind_text);
  const Reading reading = parse_reading(o.reading_text);
  const std::uint64_t seed = resolve_seed(o);
  const bool explicit_case = o.case_text != "all";

  VerifyOptions vo;
  vo.seed = seed;
  vo.params = o.params;
  vo.points = o.points;
  vo.reading = reading;
  VerifyOptions raw = vo;
  raw.reading = Reading::Raw;

  std::vector<std::pair<CaseId, Kind>> jobs;
  for (CaseId c : cases) {
    for (Kind k : kinds) jobs.emplace_back(c, k);
  }
  struct Pair {
    DivergenceReport chosen;
    std::optional<DivergenceReport> raw;
  };
  const Catalog& cat = Catalog::builtin();
  const auto results = parallel_map<Pair>(jobs.size(), o.jobs, [&](std::size_t i) {
    const auto [c, k] = jobs[i];
    Pair p{divergence_residual(c, k, o.params, vo), std::nullopt};
    if (reading == Reading::Corrected && p.chosen.checkable) {
      bool has_raw = false;
      for (const char* slot : {"Tt", "Tx", "kappa"}) has_raw = has_raw || cat.find(case_name(c), kind_name(k), slot, "raw");
      if (has_raw) p.raw = divergence_residual(c, k, o.params, raw);
    }
    return p;
  });

  bool all = true;
  int checked = 0;
  int unavailable = 0;
  for (const auto& r : results) {
    const auto& d = r.chosen;
    if (!d.checkable) {
      ++unavailable;
      out << "verify-divergence case=" << case_name(d.case_id) << " kind=" << kind_name(d.kind)
          << " unavailable: " << d.unavailable_reason << "\n";
      if (explicit_case) err << d.unavailable_reason << "\n";
      continue;
    }
    ++checked;
    print_divergence(out, d);
    if (r.raw) {
      out << "  raw reading: ";
      print_divergence(out, *r.raw);
      out << "  diff zero_at_eps0 corrected=" << yes(d.zero_at_eps0) << " raw=" << yes(r.raw->zero_at_eps0)
          << " eps0_max_rel corrected=" << fmt(d.eps0_max_rel) << " raw=" << fmt(r.raw->eps0_max_rel) << "\n";
    }
    all = all && d.zero_at_eps0;
  }

  if (!o.out.empty()) {
    fs::create_directories(out_dir(o));
    std::ofstream f(out_dir(o) / "verify_divergence.csv", std::ios::binary);
    if (!f) throw std::runtime_error("cannot write verify_divergence.csv");
    write_comment_header(f, verify_meta(o, seed));
    f << "case,kind,reading,kappa,zero_at_eps0,eps0_max_rel,leading_order,on_solution_zero_at_eps0\n";
    for (const auto& r : results) {
      for (const DivergenceReport* d : {&r.chosen, r.raw ? &*r.raw : nullptr}) {
        if (!d || !d->checkable) continue;
        f << case_name(d->case_id) << ',' << kind_name(d->kind) << ',' << reading_name(d->reading) << ',' << d->kappa
          << ',' << yes(d->zero_at_eps0) << ',' << format_double(d->eps0_max_rel) << ','
          << format_double(d->leading_order) << ',' << yes(d->on_solution_zero_at_eps0) << "\n";
      }
    }
  }

  if (checked == 0 && unavailable > 0) return kExitUnavailable;
  if (explicit_case && unavailable > 0) return kExitUnavailable;
  return all ? kExitOk : kExitCheckFailed;
}

int cmd_simulate(const Options& o, std::ostream& out) {
  const auto cases = parse_cases(o.case_text == "all" ? "1a" : o.case_text);
  const auto kinds = parse_kinds(o.kind_text == "all" ? "charge" : o.kind_text);
  const CaseId c = cases.front();
  const Kind k = kinds.front();
  const SolverConfig cfg = solver_config(o, c);
  const std::uint64_t seed = resolve_seed(o);
  if (!conserved_vector(c, k)) {
    throw UsageError(std::string("no conserved density printed for case ") + case_name(c) + " " + kind_name(k));
  }

  const Trajectory tr = run(cfg, o.sample_every);
  for (const auto& w : tr.warnings) out << "warning: " << w << "\n";
  const DensityTimeseries ts = density_timeseries(tr, c, k);
  const auto [dabs, drel] = drift_of(ts);

  ConfigLines meta = describe_config(cfg);
  meta.insert(meta.begin(), {"subcommand", "simulate"});
  meta.emplace_back("kind", kind_name(k));
  meta.emplace_back("sample_every", std::to_string(o.sample_every));
  meta.emplace_back("seed", std::to_string(seed));

  const fs::path dir = out_dir(o);
  fs::create_directories(dir);
  {
    std::ofstream f(dir / "trajectory_final.csv", std::ios::binary);
    if (!f) throw std::runtime_error("cannot write trajectory_final.csv");
    write_trajectory_csv(f, tr.snapshots.back(), meta);
  }
  {
    std::ofstream f(dir / "density_timeseries.csv", std::ios::binary);
    if (!f) throw std::runtime_error("cannot write density_timeseries.csv");
    write_timeseries_csv(f, ts, meta);
  }
  {
    std::ofstream f(dir / "density_timeseries.svg", std::ios::binary);
    if (!f) throw std::runtime_error("cannot write density_timeseries.svg");
    SvgPlot p;
    p.title = std::string("Q(t), case ") + case_name(c) + " " + kind_name(k);
    p.x_label = "t";
    p.y_label = "Q";
    p.series.push_back({"eps=" + fmt(cfg.params.eps), ts.times, ts.Q});
    write_svg(f, p, meta);
  }

  out << "simulate case=" << case_name(c) << " kind=" << kind_name(k) << " eps=" << fmt(cfg.params.eps)
      << " snapshots=" << tr.snapshots.size() << " Q0=" << fmt(ts.Q.front()) << " drift_abs=" << fmt(dabs)
      << " drift_rel=" << fmt(drel) << " out=" << dir.string() << "\n";
  if (o.max_drift >= 0.0 && !(drel <= o.max_drift)) {
    out << "drift " << fmt(drel) << " exceeds --max-drift " << fmt(o.max_drift) << "\n";
    return kExitCheckFailed;
  }
  return kExitOk;
}

int cmd_drift_scan(const Options& o, std::ostream& out) {
  const auto cases = parse_cases(o.case_text == "all" ? "1a" : o.case_text);
  const auto kinds = parse_kinds(o.kind_text == "all" ? "charge" : o.kind_text);
  const CaseId c = cases.front();
  const Kind k = kinds.front();
  const auto grid = parse_eps_grid(o.eps_grid);
  const SolverConfig cfg = solver_config(o, c);
  const std::uint64_t seed = resolve_seed(o);
  if (!conserved_vector(c, k)) {
    throw UsageError(std::string("no conserved density printed for case ") + case_name(c) + " " + kind_name(k));
  }
  bool want_csv = false, want_svg = false;
  {
    std::stringstream ss(o.formats);
    std::string f;
    while (std::getline(ss, f, ',')) {
      if (f == "csv") want_csv = true;
      else if (f == "svg") want_svg = true;
      else throw UsageError("unknown format '" + f + "' (expected csv, svg)");
    }
  }

  DriftOptions dopts;
  dopts.sample_every = o.sample_every;
  dopts.jobs = o.jobs;
  DriftReport rep;
  try {
    rep = drift_scan(c, k, grid, cfg, dopts);
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }

  ConfigLines meta = describe_config(cfg);
  meta.insert(meta.begin(), {"subcommand", "drift-scan"});
  meta.emplace_back("kind", kind_name(k));
  meta.emplace_back("eps_grid", o.eps_grid);
  meta.emplace_back("sample_every", std::to_string(o.sample_every));
  meta.emplace_back("seed", std::to_string(seed));
  const fs::path dir = out_dir(o);
  std::vector<fs::path> written;
  if (want_csv) {
    auto w = emit_report({rep}, ReportFormat::Csv, dir, "scan", meta);
    written.insert(written.end(), w.begin(), w.end());
  }
  if (want_svg) {
    auto w = emit_report({rep}, ReportFormat::Svg, dir, "scan", meta);
    written.insert(written.end(), w.begin(), w.end());
  }

  for (const auto& m : rep.members) {
    out << "member eps=" << fmt(m.eps) << " ok=" << yes(m.ok);
    if (m.ok) out << " Q0=" << fmt(m.Q0) << " drift_rel=" << fmt(m.drift_rel);
    else out << " error=\"" << m.error << "\"";
    out << "\n";
  }
  out << "drift-scan case=" << case_name(c) << " kind=" << kind_name(k) << " floor=" << fmt(rep.floor)
      << " above_floor=" << rep.above_floor << " slope_reported=" << yes(rep.slope_reported);
  if (rep.slope_reported) {
    out << " slope=" << fmt(rep.fit.slope) << " intercept=" << fmt(rep.fit.intercept)
        << " fit_residual=" << fmt(rep.fit.residual) << " leave_one_out_change=" << fmt(rep.leave_one_out_change);
  }
  out << " q0_refinement=" << fmt(rep.q0_refinement) << "\n";
  for (const auto& p : written) out << "wrote " << p.string() << "\n";

  if (rep.members.empty() || !rep.members.front().ok) {
    throw SolverError("eps=0 floor run failed: " + (rep.members.empty() ? std::string("no members") : rep.members.front().error),
                      0.0);
  }
  if (!rep.slope_reported) return kExitCheckFailed;
  const bool ok = std::abs(rep.fit.slope - o.expect_slope) <= o.slope_tol;
  out << "slope check " << (ok ? "passed" : "failed") << ": " << fmt(rep.fit.slope) << " vs " << fmt(o.expect_slope)
      << " +- " << fmt(o.slope_tol) << "\n";
  return ok ? kExitOk : kExitCheckFailed;
}

std::string tree(const Expr& e) {
  const auto& n = e.node();
  switch (e.op()) {
    case jet::Op::Number:
    case jet::Op::Pi:
    case jet::Op::Param:
    case jet::Op::Indep:
    case jet::Op::Jet:
      return jet::to_string(e);
    case jet::Op::Neg: return "Neg(" + tree(e.lhs()) + ")";
    case jet::Op::Exp: return "Exp(" + tree(e.lhs()) + ")";
    case jet::Op::Erf: return "Erf(" + tree(e.lhs()) + ")";
    case jet::Op::Sqrt: return "Sqrt(" + tree(e.lhs()) + ")";
    case jet::Op::Add: return "Add(" + tree(e.lhs()) + ", " + tree(e.rhs()) + ")";
    case jet::Op::Sub: return "Sub(" + tree(e.lhs()) + ", " + tree(e.rhs()) + ")";
    case jet::Op::Mul: return "Mul(" + tree(e.lhs()) + ", " + tree(e.rhs()) + ")";
    case jet::Op::Div: return "Div(" + tree(e.lhs()) + ", " + tree(e.rhs()) + ")";
    case jet::Op::Pow: {
      const auto& r = n.exponent;
      return "Pow(" + tree(e.lhs()) + ", " + std::to_string(r.num()) + (r.is_integer() ? "" : "/" + std::to_string(r.den())) + ")";
    }
  }
  return "?";
}

int cmd_parse_expr(const Options& o, std::ostream& out) {
  Expr e;
  try {
    e = jet::parse_expr(o.expression);
  } catch (const jet::ParseError& pe) {
    throw UsageError(std::string("parse error: ") + pe.what());
  }
  out << "expr: " << e << "\n";
  out << "tree: " << tree(e) << "\n";
  out << "jet_order: " << e.jet_order() << "\n";
  try {
    if (!o.derive.empty()) {
      if (o.derive != "t" && o.derive != "x") throw UsageError("--derive expects t or x");
      out << "D_" << o.derive << ": " << jet::total_derivative(e, o.derive == "t" ? jet::Indep::T : jet::Indep::X) << "\n";
    }
    if (o.euler) {
      const auto [du, dv] = jet::euler_operator(e);
      out << "delta/delta u: " << du << "\n";
      out << "delta/delta v: " << dv << "\n";
    }
  } catch (const jet::JetOrderError& je) {
    throw UsageError(je.what());
  }
  if (!o.at.empty()) {
    jet::JetPoint p;
    std::stringstream ss(o.at);
    std::string item;
    while (std::getline(ss, item, ',')) {
      const auto eq = item.find('=');
      if (eq == std::string::npos) throw UsageError("--at expects name=value pairs");
      const std::string name = trim(item.substr(0, eq));
      double value = 0.0;
      try {
        value = std::stod(item.substr(eq + 1));
      } catch (const std::exception&) {
        throw UsageError("bad value in --at for '" + name + "'");
      }
      if (name == "t") {
        p.set_t(value);
      } else if (name == "x") {
        p.set_x(value);
      } else if (const auto c = jet::JetCoord::from_name(name); c && c->valid()) {
        p.set(*c, value);
      } else {
        throw UsageError("unknown coordinate '" + name + "' in --at");
      }
    }
    try {
      out << "value: " << format_double(jet::eval(e, p, o.params)) << "\n";
    } catch (const jet::EvalError& ee) {
      throw UsageError(std::string("evaluation error: ") + ee.what());
    }
  }
  return kExitOk;
}

void add_params(CLI::App* sub, Options& o) {
  sub->add_option("--eps", o.params.eps, "gain/loss strength");
  sub->add_option("--mu", o.params.mu, "nonlinearity amplitude");
  sub->add_option("--sigma", o.params.sigma, "nonlinearity sign/scale");
  sub->add_option("--alpha", o.params.alpha, "nonlinearity width");
  sub->add_option("--g", o.params.g, "double-well depth (case 2)");
}

void add_common(CLI::App* sub, Options& o) {
  sub->add_option("--seed", o.seed_text, "sampling seed (default: $PTNLS_SEED or built-in)");
  sub->add_option("--jobs", o.jobs, "worker threads")->check(CLI::PositiveNumber);
  sub->add_option("--out", o.out, "output directory");
  // Accepted here for --help only; expand_config consumes it.
  sub->add_option("--config", "key=value file; flags override it");
  add_params(sub, o);
}

void add_solver(CLI::App* sub, Options& o) {
  sub->add_option("--N", o.N, "grid points (power of two >= 64)");
  sub->add_option("--L", o.L, "half-width of the periodic domain");
  sub->add_option("--dt", o.dt, "time step");
  sub->add_option("--T", o.T, "final time");
  sub->add_option("--initial", o.initial, "gaussian or ground");
  sub->add_option("--amplitude", o.amplitude, "Gaussian amplitude");
  sub->add_option("--width", o.width, "Gaussian width");
  sub->add_option("--x0", o.x0, "Gaussian centre");
  sub->add_option("--local", o.local, "pointwise substep: exact or rk4");
  sub->add_option("--sample-every", o.sample_every, "steps between snapshots");
}

}  // namespace

int run(const std::vector<std::string>& args_in, std::ostream& out, std::ostream& err) {
  Options o;
  CLI::App app{"ptnls: multiplier-method verification and split-step simulation of a PT-symmetric NLS"};
  app.name("ptnls");
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  app.set_version_flag("--version", std::string("ptnls ") + kToolVersion);
  app.require_subcommand(1);

  auto* ve = app.add_subcommand("verify-euler", "compare Euler residuals of Q.E with the catalog");
  auto* vd = app.add_subcommand("verify-divergence", "check D_t Tt + D_x Tx against Q.E");
  auto* sim = app.add_subcommand("simulate", "integrate one configuration and track a density");
  auto* ds = app.add_subcommand("drift-scan", "density drift against eps and its log-log slope");
  auto* pe = app.add_subcommand("parse-expr", "parse, print and evaluate an expression");

  for (auto* s : {ve, vd}) {
    add_common(s, o);
    s->add_option("--case", o.case_text, "1a, 1b, 1c, 2 or all");
    s->add_option("--kind", o.kind_text, "energy, charge or all");
    s->add_option("--reading", o.reading_text, "corrected or raw");
    s->add_option("--points", o.points, "random jet points")->check(CLI::PositiveNumber);
  }
  for (auto* s : {sim, ds}) {
    add_common(s, o);
    add_solver(s, o);
    s->add_option("--case", o.case_text, "1a, 1b, 1c or 2");
    s->add_option("--kind", o.kind_text, "energy or charge");
  }
  sim->add_option("--max-drift", o.max_drift, "fail when the relative drift exceeds this");
  ds->add_option("--eps-grid", o.eps_grid, "lo:hi:n (log-spaced) or a comma list");
  ds->add_option("--expect-slope", o.expect_slope, "expected log-log slope");
  ds->add_option("--slope-tol", o.slope_tol, "allowed deviation from the expected slope");
  ds->add_option("--formats", o.formats, "csv, svg or csv,svg");
  add_common(pe, o);
  pe->add_option("expression", o.expression, "expression text")->required();
  pe->add_option("--at", o.at, "t=..,x=..,u_x=.. evaluation point");
  pe->add_option("--derive", o.derive, "print the total derivative in t or x");
  pe->add_flag("--euler", o.euler, "print the Euler operator");

  // drift scans default to an off-centre Gaussian
  const bool drift = !args_in.empty() && args_in.front() == "drift-scan";
  if (drift) o.x0 = 1.0;

  try {
    std::vector<std::string> args = expand_config(args_in);
    std::vector<std::string> rev(args.rbegin(), args.rend());
    app.parse(rev);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::CallForVersion&) {
    out << "ptnls " << kToolVersion << "\n";
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n";
    return kExitConfig;
  }

  for (auto* s : app.get_subcommands()) o.subcommand = s->get_name();
  try {
    if (o.subcommand == "verify-euler") return cmd_verify_euler(o, out);
    if (o.subcommand == "verify-divergence") return cmd_verify_divergence(o, out, err);
    if (o.subcommand == "simulate") return cmd_simulate(o, out);
    if (o.subcommand == "drift-scan") return cmd_drift_scan(o, out);
    if (o.subcommand == "parse-expr") return cmd_parse_expr(o, out);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const SolverError& e) {
    err << "numerical failure at t=" << e.time() << ": " << e.what() << "\n";
    return kExitNumerical;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitConfig;
  }
  return kExitConfig;
}

}  // namespace ptnls::cli
