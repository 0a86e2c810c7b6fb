#include "ptnls/jet/eval.hpp"

#include <cmath>
#include <sstream>
#include <unordered_map>

namespace ptnls::jet {

double ParamValues::get(Param p) const {
  switch (p) {
    case Param::Eps:
      return eps;
    case Param::Mu:
      return mu;
    case Param::Sigma:
      return sigma;
    case Param::Alpha:
      return alpha;
    case Param::G:
      return g;
  }
  return 0.0;
}

void ParamValues::set(Param p, double v) {
  switch (p) {
    case Param::Eps:
      eps = v;
      break;
    case Param::Mu:
      mu = v;
      break;
    case Param::Sigma:
      sigma = v;
      break;
    case Param::Alpha:
      alpha = v;
      break;
    case Param::G:
      g = v;
      break;
  }
}

void JetPoint::set(JetCoord c, double value) {
  if (!c.valid()) throw EvalError("jet coordinate " + c.name() + " out of range");
  values_[static_cast<std::size_t>(c.index())] = value;
  present_ |= std::uint64_t{1} << c.index();
}

double JetPoint::get(JetCoord c) const {
  if (!c.valid() || !has(c)) throw EvalError("missing jet coordinate " + c.name() + " at " + describe());
  return values_[static_cast<std::size_t>(c.index())];
}

int JetPoint::order() const {
  for (int n = 0; n <= kMaxJetOrder; ++n) {
    for (int i = 0; i <= n; ++i) {
      if (!has(u_(i, n - i)) || !has(v_(i, n - i))) return n - 1;
    }
  }
  return kMaxJetOrder;
}

std::string JetPoint::describe() const {
  std::ostringstream os;
  os.precision(17);
  os << "{t=" << t_ << ", x=" << x_;
  for (int i = 0; i < kJetCoordCount; ++i) {
    if ((present_ >> i) & 1U) os << ", " << JetCoord::from_index(i).name() << '=' << values_[static_cast<std::size_t>(i)];
  }
  os << '}';
  return os.str();
}

CompiledExpr::CompiledExpr(const Expr& root) {
  std::unordered_map<const void*, int> seen;
  // Iterative post-order so very deep trees do not exhaust the stack.
  struct Frame {
    const Expr* e;
    bool expanded;
  };
  std::vector<Frame> stack{{&root, false}};
  while (!stack.empty()) {
    Frame f = stack.back();
    stack.pop_back();
    if (seen.count(f.e->id())) continue;
    const Node& n = f.e->node();
    if (!f.expanded) {
      stack.push_back({f.e, true});
      if (n.b) stack.push_back({&*n.b, false});
      if (n.a) stack.push_back({&*n.a, false});
      continue;
    }
    Instr in;
    in.op = n.op;
    if (n.a) in.a = seen.at(n.a->id());
    if (n.b) in.b = seen.at(n.b->id());
    switch (n.op) {
      case Op::Number:
        in.value = n.number.to_double();
        break;
      case Op::Pi:
        in.value = M_PI;
        break;
      case Op::Param:
        in.slot = static_cast<int>(n.param);
        break;
      case Op::Indep:
        in.slot = static_cast<int>(n.indep);
        break;
      case Op::Jet:
        in.slot = n.jet.index();
        break;
      case Op::Pow:
        in.value = n.exponent.to_double();
        in.integer_pow = n.exponent.is_integer();
        in.int_exponent = static_cast<int>(n.exponent.num());
        break;
      default:
        break;
    }
    seen.emplace(f.e->id(), static_cast<int>(code_.size()));
    code_.push_back(in);
  }
}

namespace {

double int_pow(double b, int n) {
  if (n < 0) return 1.0 / int_pow(b, -n);
  if (n > 16) return std::pow(b, n);
  double r = 1.0;
  for (int i = 0; i < n; ++i) r *= b;
  return r;
}

}  // namespace

double CompiledExpr::operator()(const JetPoint& p, const ParamValues& params) const {
  thread_local std::vector<double> r;
  r.resize(code_.size());
  for (std::size_t i = 0; i < code_.size(); ++i) {
    const Instr& in = code_[i];
    double v = 0.0;
    switch (in.op) {
      case Op::Number:
      case Op::Pi:
        v = in.value;
        break;
      case Op::Param:
        v = params.get(static_cast<Param>(in.slot));
        break;
      case Op::Indep:
        v = in.slot == 0 ? p.t() : p.x();
        break;
      case Op::Jet:
        v = p.get(JetCoord::from_index(in.slot));
        break;
      case Op::Neg:
        v = -r[in.a];
        break;
      case Op::Exp:
        v = std::exp(r[in.a]);
        break;
      case Op::Erf:
        v = std::erf(r[in.a]);
        break;
      case Op::Sqrt:
        if (r[in.a] < 0.0) throw EvalError("sqrt of negative value at " + p.describe());
        v = std::sqrt(r[in.a]);
        break;
      case Op::Add:
        v = r[in.a] + r[in.b];
        break;
      case Op::Sub:
        v = r[in.a] - r[in.b];
        break;
      case Op::Mul:
        v = r[in.a] * r[in.b];
        break;
      case Op::Div:
        if (r[in.b] == 0.0) throw EvalError("division by zero at " + p.describe());
        v = r[in.a] / r[in.b];
        break;
      case Op::Pow: {
        const double base = r[in.a];
        if (in.integer_pow) {
          if (base == 0.0 && in.int_exponent < 0) throw EvalError("division by zero in power at " + p.describe());
          v = int_pow(base, in.int_exponent);
        } else {
          if (base < 0.0) throw EvalError("negative base with fractional exponent at " + p.describe());
          if (base == 0.0 && in.value < 0.0) throw EvalError("division by zero in power at " + p.describe());
          v = std::pow(base, in.value);
        }
        break;
      }
    }
    r[i] = v;
  }
  return r.back();
}

double eval(const Expr& e, const JetPoint& p, const ParamValues& params) { return CompiledExpr(e)(p, params); }

}  // namespace ptnls::jet
