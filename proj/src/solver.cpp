#include "ptnls/solver.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <mutex>
#include <numbers>
#include <sstream>

namespace ptnls {

namespace {

/// FFTW's planner is not thread-safe.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

bool all_finite(const std::vector<cplx>& q) {
  return std::all_of(q.begin(), q.end(), [](const cplx& z) { return std::isfinite(z.real()) && std::isfinite(z.imag()); });
}

std::vector<double> sample(const Expr& e, const Grid& g, const ParamValues& params) {
  const jet::CompiledExpr f(e);
  std::vector<double> out(g.N);
  for (int j = 0; j < g.N; ++j) out[j] = f(jet::JetPoint(0.0, g.x(j)), params);
  return out;
}

}  // namespace

struct Stepper::Fft {
  explicit Fft(int n) : n(n) {
    buf = fftw_alloc_complex(n);
    std::lock_guard<std::mutex> lock(planner_mutex());
    // FFTW_ESTIMATE: same plan every run
    fwd = fftw_plan_dft_1d(n, buf, buf, FFTW_FORWARD, FFTW_ESTIMATE);
    bwd = fftw_plan_dft_1d(n, buf, buf, FFTW_BACKWARD, FFTW_ESTIMATE);
  }
  ~Fft() {
    std::lock_guard<std::mutex> lock(planner_mutex());
    fftw_destroy_plan(fwd);
    fftw_destroy_plan(bwd);
    fftw_free(buf);
  }
  void load(const std::vector<cplx>& q) { std::memcpy(buf, q.data(), sizeof(fftw_complex) * n); }
  void store(std::vector<cplx>& q) const { std::copy_n(reinterpret_cast<const cplx*>(buf), n, q.data()); }
  cplx* data() { return reinterpret_cast<cplx*>(buf); }

  int n;
  fftw_complex* buf = nullptr;
  fftw_plan fwd = nullptr;
  fftw_plan bwd = nullptr;
};

std::vector<double> Grid::nodes() const {
  std::vector<double> x(N);
  for (int j = 0; j < N; ++j) x[j] = this->x(j);
  return x;
}

std::vector<double> Grid::wavenumbers() const {
  std::vector<double> k(N);
  const double base = std::numbers::pi / L;
  for (int j = 0; j < N; ++j) k[j] = base * (j < N / 2 ? j : j - N);
  return k;
}

void Grid::validate() const {
  if (N < 64 || (N & (N - 1)) != 0) throw ConfigError("grid N must be a power of two >= 64");
  if (!(L > 0.0) || !std::isfinite(L)) throw ConfigError("grid L must be positive");
}

long SolverConfig::steps() const {
  const double r = T_final / dt;
  const double n = std::round(r);
  if (std::abs(r - n) > 1e-9 * std::max(1.0, r)) throw ConfigError("T_final / dt must be an integer");
  return static_cast<long>(n);
}

void SolverConfig::validate() const {
  grid.validate();
  if (!(dt > 0.0) || !std::isfinite(dt)) throw ConfigError("dt must be positive");
  if (!(T_final >= 0.0) || !std::isfinite(T_final)) throw ConfigError("T_final must be non-negative");
  (void)steps();
  if (const auto* gi = std::get_if<GaussianInit>(&initial); gi && !(gi->width > 0.0)) {
    throw ConfigError("Gaussian width must be positive");
  }
}

FieldState initial_condition(const SolverConfig& cfg) {
  cfg.grid.validate();
  FieldState s;
  s.grid = cfg.grid;
  s.q.resize(cfg.grid.N);
  for (int j = 0; j < cfg.grid.N; ++j) {
    const double x = cfg.grid.x(j);
    if (const auto* g = std::get_if<GaussianInit>(&cfg.initial)) {
      const double d = x - g->center;
      s.q[j] = g->amplitude * std::exp(-d * d / (2.0 * g->width * g->width));
    } else {
      s.q[j] = std::pow(std::numbers::pi, -0.25) * std::exp(-x * x / 2.0);
    }
  }
  return s;
}

Stepper::Stepper(const SolverConfig& cfg) : cfg_((cfg.validate(), cfg)), fft_(std::make_unique<Fft>(cfg.grid.N)) {
  const CaseSpec cs = case_spec(cfg.case_id);
  a_ = sample(cfg.a_override.value_or(cs.a), cfg.grid, cfg.params);
  b_ = sample(cfg.b_override.value_or(cs.b), cfg.grid, cfg.params);
  g_ = sample(Expr(jet::Param::Mu) * Expr(jet::Param::Mu) * cs.nonlinearity_coeff, cfg.grid, cfg.params);
  k_ = cfg.grid.wavenumbers();
  half_kinetic_.resize(cfg.grid.N);
  for (int j = 0; j < cfg.grid.N; ++j) {
    half_kinetic_[j] = std::polar(1.0, -k_[j] * k_[j] * cfg.dt / 4.0);
  }
}

Stepper::~Stepper() = default;

void Stepper::local_step(std::vector<cplx>& q, double h) const {
  const double eps = cfg_.params.eps;
  const int n = static_cast<int>(q.size());
  if (cfg_.local == LocalStep::Exact) {
    for (int j = 0; j < n; ++j) {
      const double r2 = std::norm(q[j]);
      const double z = 2.0 * eps * b_[j] * h;
      const double ramp = z == 0.0 ? 1.0 : std::expm1(z) / z;
      const double phase = -a_[j] * h + g_[j] * r2 * h * ramp;
      q[j] *= std::exp(eps * b_[j] * h) * std::polar(1.0, phase);
    }
    return;
  }
  for (int j = 0; j < n; ++j) {
    auto f = [&](cplx w) { return cplx(eps * b_[j], -a_[j] + g_[j] * std::norm(w)) * w; };
    const cplx k1 = f(q[j]);
    const cplx k2 = f(q[j] + 0.5 * h * k1);
    const cplx k3 = f(q[j] + 0.5 * h * k2);
    const cplx k4 = f(q[j] + h * k3);
    q[j] += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  }
}

void Stepper::step(FieldState& s) {
  const int n = cfg_.grid.N;
  const double inv = 1.0 / n;
  auto kinetic = [&] {
    fft_->load(s.q);
    fftw_execute(fft_->fwd);
    cplx* d = fft_->data();
    for (int j = 0; j < n; ++j) d[j] *= half_kinetic_[j] * inv;
    fftw_execute(fft_->bwd);
    fft_->store(s.q);
  };
  kinetic();
  local_step(s.q, cfg_.dt);
  kinetic();
  s.t += cfg_.dt;
}

std::vector<cplx> Stepper::derivative(const std::vector<cplx>& q, int order) {
  const int n = cfg_.grid.N;
  if (order == 0) return q;
  fft_->load(q);
  fftw_execute(fft_->fwd);
  cplx* d = fft_->data();
  for (int j = 0; j < n; ++j) {
    // The Nyquist mode has no consistent odd derivative on a real grid.
    if (j == n / 2 && order % 2 == 1) {
      d[j] = 0.0;
      continue;
    }
    d[j] *= std::pow(cplx(0.0, k_[j]), order) / static_cast<double>(n);
  }
  fftw_execute(fft_->bwd);
  std::vector<cplx> out(n);
  fft_->store(out);
  return out;
}

std::vector<cplx> Stepper::time_derivative(const FieldState& s) {
  const auto qxx = derivative(s.q, 2);
  const double eps = cfg_.params.eps;
  std::vector<cplx> qt(s.q.size());
  for (std::size_t j = 0; j < s.q.size(); ++j) {
    qt[j] = cplx(0.0, 0.5) * qxx[j] + cplx(eps * b_[j], -a_[j] + g_[j] * std::norm(s.q[j])) * s.q[j];
  }
  return qt;
}

FieldState step(const FieldState& s, const SolverConfig& cfg) {
  Stepper st(cfg);
  FieldState out = s;
  st.step(out);
  return out;
}

double boundary_ratio(const FieldState& s) {
  const int n = static_cast<int>(s.q.size());
  double peak = 0.0;
  for (const auto& z : s.q) peak = std::max(peak, std::abs(z));
  if (peak == 0.0) return 0.0;
  double edge = 0.0;
  for (int j : {0, 1, n - 2, n - 1}) edge = std::max(edge, std::abs(s.q[j]));
  return edge / peak;
}

Trajectory run(const SolverConfig& cfg, long sample_every) {
  if (sample_every <= 0) throw ConfigError("sample_every must be positive");
  cfg.validate();
  Trajectory tr;
  tr.config = cfg;
  Stepper stepper(cfg);
  FieldState s = initial_condition(cfg);
  const long steps = cfg.steps();

  auto monitor = [&](const FieldState& st) {
    const double r = boundary_ratio(st);
    if (r > cfg.boundary_fail) {
      std::ostringstream os;
      os << "boundary contamination at t=" << st.t << ": edge/max |q| = " << r;
      throw BoundaryError(os.str(), st.t);
    }
    if (r > cfg.boundary_warn && tr.warnings.size() < 8) {
      std::ostringstream os;
      os << "boundary amplitude " << r << " of max |q| at t=" << st.t;
      tr.warnings.push_back(os.str());
    }
  };

  monitor(s);
  tr.snapshots.push_back(s);
  for (long n = 1; n <= steps; ++n) {
    stepper.step(s);
    s.t = static_cast<double>(n) * cfg.dt;
    if (!all_finite(s.q)) {
      std::ostringstream os;
      os << "non-finite field at t=" << s.t;
      throw BlowUpError(os.str(), s.t);
    }
    if (n % sample_every == 0 || n == steps) {
      monitor(s);
      tr.snapshots.push_back(s);
    }
  }
  return tr;
}

std::vector<jet::JetPoint> jet_points(const FieldState& s, Stepper& stepper) {
  using jet::JetCoord;
  const int n = s.grid.N;
  std::vector<std::vector<cplx>> dx(5);
  dx[0] = s.q;
  for (int j = 1; j <= 4; ++j) dx[j] = stepper.derivative(s.q, j);
  const auto qt = stepper.time_derivative(s);
  std::vector<std::vector<cplx>> dtx(3);
  dtx[0] = qt;
  for (int j = 1; j <= 2; ++j) dtx[j] = stepper.derivative(qt, j);

  // q_tt = (i/2) D_xx q_t + (eps b - i a + i G |q|^2) q_t + i G 2 Re(conj(q) q_t) q
  const double eps = stepper.config().params.eps;
  const auto& a = stepper.a();
  const auto& b = stepper.b();
  const auto& g = stepper.nonlinearity();
  std::vector<cplx> qtt(n);
  for (int j = 0; j < n; ++j) {
    const cplx lin(eps * b[j], -a[j] + g[j] * std::norm(s.q[j]));
    const double dn = 2.0 * std::real(std::conj(s.q[j]) * qt[j]);
    qtt[j] = cplx(0.0, 0.5) * dtx[2][j] + lin * qt[j] + cplx(0.0, g[j] * dn) * s.q[j];
  }

  std::vector<jet::JetPoint> pts;
  pts.reserve(n);
  auto put = [](jet::JetPoint& p, int ti, int xi, cplx z) {
    p.set(JetCoord{jet::Dep::U, ti, xi}, z.real());
    p.set(JetCoord{jet::Dep::V, ti, xi}, z.imag());
  };
  for (int j = 0; j < n; ++j) {
    jet::JetPoint p(s.t, s.grid.x(j));
    for (int k = 0; k <= 4; ++k) put(p, 0, k, dx[k][j]);
    for (int k = 0; k <= 2; ++k) put(p, 1, k, dtx[k][j]);
    put(p, 2, 0, qtt[j]);
    pts.push_back(p);
  }
  return pts;
}

double charge(const FieldState& s) {
  double sum = 0.0;
  for (const auto& z : s.q) sum += std::norm(z);
  return sum * s.grid.dx();
}

double hamiltonian(const FieldState& s, Stepper& stepper) {
  const auto qx = stepper.derivative(s.q, 1);
  const auto& a = stepper.a();
  const auto& g = stepper.nonlinearity();
  double sum = 0.0;
  for (std::size_t j = 0; j < s.q.size(); ++j) {
    const double r2 = std::norm(s.q[j]);
    sum += 0.5 * std::norm(qx[j]) + a[j] * r2 - 0.5 * g[j] * r2 * r2;
  }
  return sum * s.grid.dx();
}

}  // namespace ptnls
