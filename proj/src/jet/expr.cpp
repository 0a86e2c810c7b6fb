#include "ptnls/jet/expr.hpp"

#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace ptnls::jet {

// ---------------------------------------------------------------- Rational

namespace {

std::optional<std::int64_t> narrow(__int128 v) {
  if (v > std::numeric_limits<std::int64_t>::max() || v < -std::numeric_limits<std::int64_t>::max()) {
    return std::nullopt;
  }
  return static_cast<std::int64_t>(v);
}

std::optional<Rational> make_rational(__int128 num, __int128 den) {
  if (den == 0) return std::nullopt;
  if (den < 0) {
    num = -num;
    den = -den;
  }
  __int128 a = num < 0 ? -num : num;
  __int128 b = den;
  while (b != 0) {
    __int128 r = a % b;
    a = b;
    b = r;
  }
  if (a > 1) {
    num /= a;
    den /= a;
  }
  auto n = narrow(num);
  auto d = narrow(den);
  if (!n || !d) return std::nullopt;
  return Rational(*n, *d);
}

}  // namespace

Rational::Rational(std::int64_t num, std::int64_t den) {
  if (den == 0) throw std::invalid_argument("rational with zero denominator");
  if (den < 0) {
    num = -num;
    den = -den;
  }
  const std::int64_t g = std::gcd(num, den);
  num_ = g > 1 ? num / g : num;
  den_ = g > 1 ? den / g : den;
}

std::optional<Rational> Rational::add(const Rational& a, const Rational& b) {
  return make_rational(static_cast<__int128>(a.num_) * b.den_ + static_cast<__int128>(b.num_) * a.den_,
                       static_cast<__int128>(a.den_) * b.den_);
}

std::optional<Rational> Rational::mul(const Rational& a, const Rational& b) {
  return make_rational(static_cast<__int128>(a.num_) * b.num_, static_cast<__int128>(a.den_) * b.den_);
}

std::optional<Rational> Rational::div(const Rational& a, const Rational& b) {
  if (b.num_ == 0) return std::nullopt;
  return make_rational(static_cast<__int128>(a.num_) * b.den_, static_cast<__int128>(a.den_) * b.num_);
}

std::optional<Rational> Rational::pow(const Rational& base, std::int64_t exponent) {
  if (exponent < 0) {
    if (base.num_ == 0) return std::nullopt;
    auto inv = div(Rational(1), base);
    if (!inv) return std::nullopt;
    return pow(*inv, -exponent);
  }
  Rational acc(1);
  for (std::int64_t i = 0; i < exponent; ++i) {
    auto next = mul(acc, base);
    if (!next) return std::nullopt;
    acc = *next;
  }
  return acc;
}

double Number::to_double() const {
  return exact() ? rational().to_double() : std::get<double>(value);
}

// ------------------------------------------------------------------ symbols

namespace {
constexpr int kIndepBit = kJetCoordCount;          // t, x
constexpr int kParamBit = kJetCoordCount + 2;      // eps..g
static_assert(kParamBit + kParamCount <= 64, "symbol mask exceeds 64 bits");
}  // namespace

std::uint64_t symbol_bit(const Symbol& sym) {
  return std::visit(
      [](const auto& s) -> std::uint64_t {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, JetCoord>) {
          return std::uint64_t{1} << s.index();
        } else if constexpr (std::is_same_v<T, Indep>) {
          return std::uint64_t{1} << (kIndepBit + static_cast<int>(s));
        } else {
          return std::uint64_t{1} << (kParamBit + static_cast<int>(s));
        }
      },
      sym);
}

std::uint64_t jet_bits(Dep dep) {
  const std::uint64_t block = (std::uint64_t{1} << JetCoord::kPerDep) - 1;
  return dep == Dep::U ? block : block << JetCoord::kPerDep;
}

std::string symbol_name(const Symbol& sym) {
  return std::visit(
      [](const auto& s) -> std::string {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, JetCoord>) {
          return s.name();
        } else if constexpr (std::is_same_v<T, Indep>) {
          return s == Indep::T ? "t" : "x";
        } else {
          return param_name(s);
        }
      },
      sym);
}

// ------------------------------------------------------------- node factory

namespace {

std::size_t mix(std::size_t h, std::size_t v) {
  return h ^ (v + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2));
}

std::size_t hash_number(const Number& n) {
  if (n.exact()) {
    return mix(std::hash<std::int64_t>{}(n.rational().num()), std::hash<std::int64_t>{}(n.rational().den()));
  }
  return mix(0x5bd1e995, std::hash<double>{}(std::get<double>(n.value)));
}

}  // namespace

class NodeFactory {
 public:
  static Expr make(Node n) {
    std::size_t h = std::hash<int>{}(static_cast<int>(n.op));
    switch (n.op) {
      case Op::Number:
        h = mix(h, hash_number(n.number));
        break;
      case Op::Param:
        h = mix(h, static_cast<std::size_t>(n.param));
        n.symbols = symbol_bit(n.param);
        break;
      case Op::Indep:
        h = mix(h, static_cast<std::size_t>(n.indep));
        n.symbols = symbol_bit(n.indep);
        break;
      case Op::Jet:
        h = mix(h, static_cast<std::size_t>(n.jet.index()));
        n.symbols = symbol_bit(n.jet);
        n.jet_order = n.jet.order();
        break;
      case Op::Pow:
        h = mix(h, hash_number(Number{n.exponent}));
        break;
      default:
        break;
    }
    for (const auto* child : {&n.a, &n.b}) {
      if (!*child) continue;
      const Node& c = (*child)->node();
      h = mix(h, c.hash);
      n.symbols |= c.symbols;
      n.jet_order = std::max(n.jet_order, c.jet_order);
      n.size = n.size + c.size;
    }
    n.hash = h;
    return Expr(std::make_shared<const Node>(std::move(n)));
  }

  static Expr number(Number v) {
    Node n;
    n.op = Op::Number;
    n.number = v;
    return make(std::move(n));
  }

  static Expr unary(Op op, const Expr& a) {
    Node n;
    n.op = op;
    n.a = a;
    return make(std::move(n));
  }

  static Expr binary(Op op, const Expr& a, const Expr& b) {
    Node n;
    n.op = op;
    n.a = a;
    n.b = b;
    return make(std::move(n));
  }

  static Expr power(const Expr& base, Rational exponent) {
    Node n;
    n.op = Op::Pow;
    n.a = base;
    n.exponent = exponent;
    return make(std::move(n));
  }

  static Expr leaf(Op op, Param p, Indep s, JetCoord c) {
    Node n;
    n.op = op;
    n.param = p;
    n.indep = s;
    n.jet = c;
    return make(std::move(n));
  }
};

// --------------------------------------------------------------------- Expr

Expr::Expr() : Expr(Rational(0)) {}
Expr::Expr(int value) : Expr(Rational(value)) {}
Expr::Expr(Rational value) : Expr(NodeFactory::number(Number{value})) {}
Expr::Expr(double value) : Expr(NodeFactory::number(Number{value})) {}

Expr::Expr(JetCoord c) {
  if (!c.valid()) throw std::out_of_range("jet coordinate " + c.name() + " exceeds the maximum jet order");
  *this = NodeFactory::leaf(Op::Jet, Param::Eps, Indep::T, c);
}

Expr::Expr(Indep s) : Expr(NodeFactory::leaf(Op::Indep, Param::Eps, s, JetCoord{})) {}
Expr::Expr(Param p) : Expr(NodeFactory::leaf(Op::Param, p, Indep::T, JetCoord{})) {}

Expr Expr::pi() { return NodeFactory::leaf(Op::Pi, Param::Eps, Indep::T, JetCoord{}); }

Op Expr::op() const { return node_->op; }
const Expr& Expr::lhs() const { return *node_->a; }
const Expr& Expr::rhs() const { return *node_->b; }
std::size_t Expr::hash() const { return node_->hash; }
std::uint64_t Expr::symbols() const { return node_->symbols; }
int Expr::jet_order() const { return node_->jet_order; }
std::size_t Expr::size() const { return node_->size; }

std::optional<Number> Expr::number() const {
  if (node_->op != Op::Number) return std::nullopt;
  return node_->number;
}

bool Expr::is_number(double v) const { return node_->op == Op::Number && node_->number.to_double() == v; }

bool structurally_equal(const Expr& a, const Expr& b) {
  if (a.node_ == b.node_) return true;
  const Node& x = *a.node_;
  const Node& y = *b.node_;
  if (x.hash != y.hash || x.op != y.op || x.size != y.size) return false;
  switch (x.op) {
    case Op::Number:
      return x.number == y.number;
    case Op::Pi:
      return true;
    case Op::Param:
      return x.param == y.param;
    case Op::Indep:
      return x.indep == y.indep;
    case Op::Jet:
      return x.jet == y.jet;
    case Op::Pow:
      if (!(x.exponent == y.exponent)) return false;
      break;
    default:
      break;
  }
  if (x.a && !structurally_equal(*x.a, *y.a)) return false;
  if (x.b && !structurally_equal(*x.b, *y.b)) return false;
  return true;
}

int max_t_order(const Expr& e) {
  int m = 0;
  for_each_jet(e.symbols(), [&](JetCoord c) { m = std::max(m, c.t_order); });
  return m;
}

// ----------------------------------------------------------------- builders

namespace {

std::optional<Number> fold(Op op, const Number& x, const Number& y) {
  if (x.exact() && y.exact()) {
    std::optional<Rational> r;
    switch (op) {
      case Op::Add:
        r = Rational::add(x.rational(), y.rational());
        break;
      case Op::Sub:
        r = Rational::add(x.rational(), -y.rational());
        break;
      case Op::Mul:
        r = Rational::mul(x.rational(), y.rational());
        break;
      case Op::Div:
        if (y.rational().num() == 0) return std::nullopt;
        r = Rational::div(x.rational(), y.rational());
        break;
      default:
        return std::nullopt;
    }
    if (r) return Number{*r};
  }
  const double a = x.to_double();
  const double b = y.to_double();
  switch (op) {
    case Op::Add:
      return Number{a + b};
    case Op::Sub:
      return Number{a - b};
    case Op::Mul:
      return Number{a * b};
    case Op::Div:
      if (b == 0.0) return std::nullopt;
      return Number{a / b};
    default:
      return std::nullopt;
  }
}

bool negation_of(const Expr& maybe_neg, const Expr& other) {
  return maybe_neg.op() == Op::Neg && structurally_equal(maybe_neg.lhs(), other);
}

}  // namespace

Expr operator-(const Expr& a) {
  if (auto n = a.number()) {
    if (n->exact()) return Expr(-n->rational());
    return Expr(-std::get<double>(n->value));
  }
  if (a.op() == Op::Neg) return a.lhs();
  return NodeFactory::unary(Op::Neg, a);
}

Expr operator+(const Expr& a, const Expr& b) {
  auto na = a.number();
  auto nb = b.number();
  if (na && nb) {
    if (auto r = fold(Op::Add, *na, *nb)) return NodeFactory::number(*r);
  }
  if (a.is_zero()) return b;
  if (b.is_zero()) return a;
  if (negation_of(b, a) || negation_of(a, b)) return Expr(0);
  return NodeFactory::binary(Op::Add, a, b);
}

Expr operator-(const Expr& a, const Expr& b) {
  auto na = a.number();
  auto nb = b.number();
  if (na && nb) {
    if (auto r = fold(Op::Sub, *na, *nb)) return NodeFactory::number(*r);
  }
  if (b.is_zero()) return a;
  if (a.is_zero()) return -b;
  if (structurally_equal(a, b)) return Expr(0);
  return NodeFactory::binary(Op::Sub, a, b);
}

Expr operator*(const Expr& a, const Expr& b) {
  auto na = a.number();
  auto nb = b.number();
  if (na && nb) {
    if (auto r = fold(Op::Mul, *na, *nb)) return NodeFactory::number(*r);
  }
  if (a.is_zero() || b.is_zero()) return Expr(0);
  if (a.is_one()) return b;
  if (b.is_one()) return a;
  if (a.is_number(-1.0)) return -b;
  if (b.is_number(-1.0)) return -a;
  return NodeFactory::binary(Op::Mul, a, b);
}

Expr operator/(const Expr& a, const Expr& b) {
  auto na = a.number();
  auto nb = b.number();
  if (na && nb) {
    if (auto r = fold(Op::Div, *na, *nb)) return NodeFactory::number(*r);
  }
  if (b.is_one()) return a;
  if (a.is_zero() && nb && !b.is_zero()) return Expr(0);
  return NodeFactory::binary(Op::Div, a, b);
}

Expr pow(const Expr& base, Rational exponent) {
  if (exponent.num() == 0) return Expr(1);
  if (exponent == Rational(1)) return base;
  if (auto n = base.number(); n && exponent.is_integer()) {
    if (n->exact()) {
      if (auto r = Rational::pow(n->rational(), exponent.num())) return Expr(*r);
    } else if (n->to_double() != 0.0 || exponent.num() > 0) {
      return Expr(std::pow(n->to_double(), static_cast<double>(exponent.num())));
    }
  }
  return NodeFactory::power(base, exponent);
}

Expr exp(const Expr& a) {
  if (a.is_zero()) return Expr(1);
  return NodeFactory::unary(Op::Exp, a);
}

Expr erf(const Expr& a) {
  if (a.is_zero()) return Expr(0);
  return NodeFactory::unary(Op::Erf, a);
}

Expr sqrt(const Expr& a) {
  if (auto n = a.number(); n && n->exact() && n->rational().num() >= 0) {
    const auto root = [](std::int64_t v) -> std::optional<std::int64_t> {
      auto r = static_cast<std::int64_t>(std::llround(std::sqrt(static_cast<double>(v))));
      if (r * r == v) return r;
      return std::nullopt;
    };
    auto rn = root(n->rational().num());
    auto rd = root(n->rational().den());
    if (rn && rd) return Expr(Rational(*rn, *rd));
  }
  return NodeFactory::unary(Op::Sqrt, a);
}

// ----------------------------------------------------------------- printing

namespace {

constexpr int kAtom = 5;

int precedence(const Expr& e) {
  switch (e.op()) {
    case Op::Add:
    case Op::Sub:
      return 1;
    case Op::Mul:
    case Op::Div:
      return 2;
    case Op::Neg:
      return 3;
    case Op::Pow:
      return 4;
    default:
      return kAtom;
  }
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  std::string s = buf;
  if (s.find_first_of(".eEn") == std::string::npos) s += ".0";
  return s;
}

std::string format_number(const Number& n) {
  if (n.exact()) {
    const Rational& r = n.rational();
    if (r.is_integer()) {
      if (r.num() >= 0) return std::to_string(r.num());
      return "(" + std::to_string(r.num()) + ")";
    }
    return "(" + std::to_string(r.num()) + "/" + std::to_string(r.den()) + ")";
  }
  const double v = std::get<double>(n.value);
  if (v < 0 || std::signbit(v)) return "(" + format_double(v) + ")";
  return format_double(v);
}

void print(std::ostream& os, const Expr& e);

void print_child(std::ostream& os, const Expr& child, bool parens) {
  if (parens) os << '(';
  print(os, child);
  if (parens) os << ')';
}

void print(std::ostream& os, const Expr& e) {
  const Node& n = e.node();
  switch (n.op) {
    case Op::Number:
      os << format_number(n.number);
      return;
    case Op::Pi:
      os << "pi";
      return;
    case Op::Param:
      os << param_name(n.param);
      return;
    case Op::Indep:
      os << (n.indep == Indep::T ? 't' : 'x');
      return;
    case Op::Jet:
      os << n.jet.name();
      return;
    case Op::Neg:
      os << '-';
      print_child(os, e.lhs(), precedence(e.lhs()) < 3);
      return;
    case Op::Exp:
    case Op::Erf:
    case Op::Sqrt:
      os << (n.op == Op::Exp ? "exp(" : n.op == Op::Erf ? "erf(" : "sqrt(");
      print(os, e.lhs());
      os << ')';
      return;
    case Op::Add:
    case Op::Sub:
    case Op::Mul:
    case Op::Div: {
      const int p = precedence(e);
      print_child(os, e.lhs(), precedence(e.lhs()) < p);
      switch (n.op) {
        case Op::Add:
          os << " + ";
          break;
        case Op::Sub:
          os << " - ";
          break;
        case Op::Mul:
          os << '*';
          break;
        default:
          os << '/';
          break;
      }
      print_child(os, e.rhs(), precedence(e.rhs()) <= p);
      return;
    }
    case Op::Pow:
      print_child(os, e.lhs(), precedence(e.lhs()) <= 4);
      os << '^' << format_number(Number{n.exponent});
      return;
  }
}

}  // namespace

std::string to_string(const Expr& e) {
  std::ostringstream os;
  print(os, e);
  return os.str();
}

std::ostream& operator<<(std::ostream& os, const Expr& e) {
  print(os, e);
  return os;
}

}  // namespace ptnls::jet
