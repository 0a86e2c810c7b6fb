#include "ptnls/catalog.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "ptnls/jet/calculus.hpp"
#include "ptnls/jet/parse.hpp"

namespace ptnls {

using jet::Binding;
using jet::Indep;
using jet::Param;

namespace {

constexpr std::string_view kBuiltinText =
#include "catalog_data.inc"
    ;

const std::set<std::string, std::less<>> kSlots{"a",  "b",  "E1", "E2", "Q1", "Q2",   "Tt",
                                                 "Tx", "PhiT", "Ru", "Rv", "kappa"};

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

std::string lower(std::string_view s) {
  std::string r(s);
  for (char& c : r) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return r;
}

[[noreturn]] void fail(const std::string& source, int line, const std::string& msg) {
  throw CatalogError(source + ":" + std::to_string(line) + ": " + msg);
}

CatalogEntry parse_record(std::string_view rec, const std::string& source, int line) {
  std::array<std::string_view, 5> f;
  for (int i = 0; i < 4; ++i) {
    const auto bar = rec.find('|');
    if (bar == std::string_view::npos) fail(source, line, "expected 5 '|'-separated fields");
    f[i] = trim(rec.substr(0, bar));
    rec.remove_prefix(bar + 1);
  }
  f[4] = trim(rec);

  CatalogEntry e;
  e.line = line;
  e.case_key = std::string(f[0]);
  e.kind_key = std::string(f[1]);
  if (e.case_key != "*" && !case_from_name(e.case_key)) fail(source, line, "unknown case '" + e.case_key + "'");
  if (e.kind_key != "-" && !kind_from_name(e.kind_key)) fail(source, line, "unknown kind '" + e.kind_key + "'");

  std::string_view slot = f[2];
  if (const auto colon = slot.find(':'); colon != std::string_view::npos) {
    e.variant = std::string(slot.substr(colon + 1));
    slot = slot.substr(0, colon);
    if (e.variant != "raw" && e.variant != "derived") {
      fail(source, line, "unknown variant '" + e.variant + "'");
    }
  }
  e.slot = std::string(slot);
  if (!kSlots.count(e.slot)) fail(source, line, "unknown slot '" + e.slot + "'");

  const bool case_level = e.slot == "a" || e.slot == "b" || e.slot == "E1" || e.slot == "E2";
  if (case_level != (e.kind_key == "-")) {
    fail(source, line, "slot '" + e.slot + "' " + (case_level ? "takes kind '-'" : "needs a kind"));
  }

  e.text = std::string(f[3]);
  e.anchor = std::string(f[4]);
  if (e.text.empty()) fail(source, line, "empty expression");
  try {
    e.expr = jet::parse_expr(e.text);
  } catch (const jet::ParseError& err) {
    fail(source, line, std::string("expression: ") + err.what());
  }

  if (e.slot == "a" || e.slot == "b") {
    if ((e.expr.symbols() & (jet::jet_bits(jet::Dep::U) | jet::jet_bits(jet::Dep::V) |
                             jet::symbol_bit(Indep::T))) != 0) {
      fail(source, line, "a and b may depend on x and parameters only");
    }
  }
  if (e.slot == "kappa" && !e.expr.number()) fail(source, line, "kappa must be a constant");
  return e;
}

int kappa_value(const CatalogEntry* e) {
  if (!e) return 1;
  return static_cast<int>(std::lround(e->expr.number()->to_double()));
}

}  // namespace

const char* case_name(CaseId c) {
  switch (c) {
    case CaseId::Case1a: return "1a";
    case CaseId::Case1b: return "1b";
    case CaseId::Case1c: return "1c";
    case CaseId::Case2: return "2";
  }
  return "?";
}

std::optional<CaseId> case_from_name(std::string_view s) {
  std::string k = lower(trim(s));
  if (k.rfind("case", 0) == 0) k = k.substr(4);
  for (CaseId c : kAllCases) {
    if (k == case_name(c)) return c;
  }
  return std::nullopt;
}

const char* kind_name(Kind k) { return k == Kind::Energy ? "energy" : "charge"; }

std::optional<Kind> kind_from_name(std::string_view s) {
  const std::string k = lower(trim(s));
  if (k == "energy") return Kind::Energy;
  if (k == "charge") return Kind::Charge;
  return std::nullopt;
}

const char* reading_name(Reading r) { return r == Reading::Corrected ? "corrected" : "raw"; }

Catalog Catalog::parse(std::string_view text, const std::string& source) {
  Catalog cat;
  std::string pending;
  int pending_line = 0;
  int line_no = 0;
  std::set<std::string> seen;

  auto flush = [&] {
    if (pending.empty()) return;
    CatalogEntry e = parse_record(pending, source, pending_line);
    const std::string key = e.case_key + "|" + e.kind_key + "|" + e.slot + ":" + e.variant;
    if (!seen.insert(key).second) fail(source, pending_line, "duplicate record " + key);
    cat.entries_.push_back(std::move(e));
    pending.clear();
  };

  std::size_t pos = 0;
  while (pos <= text.size()) {
    auto nl = text.find('\n', pos);
    if (nl == std::string_view::npos) nl = text.size();
    std::string_view raw = text.substr(pos, nl - pos);
    pos = nl + 1;
    ++line_no;
    if (!raw.empty() && raw.back() == '\r') raw.remove_suffix(1);

    const std::string_view t = trim(raw);
    const bool continuing = !pending.empty();
    if (!continuing && (t.empty() || t.front() == '#')) continue;
    if (continuing && t.empty()) {
      fail(source, line_no, pos > text.size() ? "continuation at end of file" : "blank line inside a continued record");
    }

    if (!continuing) pending_line = line_no;
    if (!t.empty() && t.back() == '\\') {
      pending.append(t.substr(0, t.size() - 1));
      pending.push_back(' ');
      if (pos > text.size()) fail(source, line_no, "continuation at end of file");
      continue;
    }
    pending.append(t);
    flush();
  }
  return cat;
}

Catalog Catalog::load_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CatalogError("cannot open catalog file " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse(ss.str(), path.string());
}

const Catalog& Catalog::builtin() {
  static const Catalog cat = parse(kBuiltinText, "catalog.txt");
  return cat;
}

const CatalogEntry* Catalog::find(std::string_view case_key, std::string_view kind_key,
                                  std::string_view slot, std::string_view variant) const {
  for (const auto& e : entries_) {
    if (e.case_key == case_key && e.kind_key == kind_key && e.slot == slot && e.variant == variant) {
      return &e;
    }
  }
  return nullptr;
}

const CatalogEntry* Catalog::pick(CaseId c, std::string_view kind_key, std::string_view slot,
                                  Reading r) const {
  const char* ck = case_name(c);
  if (r == Reading::Raw) {
    if (const auto* e = find(ck, kind_key, slot, "raw")) return e;
  }
  return find(ck, kind_key, slot);
}

CaseSpec Catalog::case_spec(CaseId c) const {
  const auto* a = find(case_name(c), "-", "a");
  const auto* b = find(case_name(c), "-", "b");
  if (!a || !b) throw CatalogError(std::string("catalog lacks a/b for case ") + case_name(c));
  CaseSpec cs;
  cs.id = c;
  cs.a = a->expr;
  cs.b = b->expr;
  const Expr x(Indep::X);
  cs.nonlinearity_coeff = Expr(2) * Expr(Param::Sigma) * jet::exp(-(Expr(Param::Alpha) * jet::pow(x, 2)));
  return cs;
}

PdeSystem Catalog::transcribed_system(CaseId c) const {
  const auto* e1 = find(case_name(c), "-", "E1");
  const auto* e2 = find(case_name(c), "-", "E2");
  if (!e1 || !e2) throw CatalogError(std::string("catalog lacks E1/E2 for case ") + case_name(c));
  return {e1->expr, e2->expr};
}

Multiplier Catalog::multiplier(CaseId c, Kind k, Reading r) const {
  const char* kk = kind_name(k);
  const CatalogEntry* q1 = r == Reading::Raw ? find(case_name(c), kk, "Q1", "raw") : nullptr;
  const CatalogEntry* q2 = r == Reading::Raw ? find(case_name(c), kk, "Q2", "raw") : nullptr;
  if (!q1) q1 = find("*", kk, "Q1");
  if (!q2) q2 = find("*", kk, "Q2");
  if (!q1 || !q2) throw CatalogError(std::string("catalog lacks multiplier for ") + kk);
  return {k, q1->expr, q2->expr};
}

std::optional<ConservedVector> Catalog::conserved_vector(CaseId c, Kind k, Reading r) const {
  const char* kk = kind_name(k);
  const auto* tt = pick(c, kk, "Tt", r);
  if (!tt) return std::nullopt;
  ConservedVector cv;
  cv.case_id = c;
  cv.kind = k;
  cv.Tt = tt->expr;
  if (const auto* tx = pick(c, kk, "Tx", r)) cv.Tx = tx->expr;
  if (const auto* ph = pick(c, kk, "PhiT", r)) cv.complex_density = ph->expr;
  cv.kappa = kappa_value(pick(c, kk, "kappa", r));
  return cv;
}

std::optional<EulerResidualTarget> Catalog::residual_target(CaseId c, Kind k, Reading r) const {
  const char* kk = kind_name(k);
  const auto* ru = pick(c, kk, "Ru", r);
  const auto* rv = pick(c, kk, "Rv", r);
  if (!ru || !rv) return std::nullopt;
  return EulerResidualTarget{c, k, ru->expr, rv->expr, false};
}

std::optional<EulerResidualTarget> Catalog::derived_residual(CaseId c, Kind k) const {
  const char* kk = kind_name(k);
  const auto* ru = find(case_name(c), kk, "Ru", "derived");
  const auto* rv = find(case_name(c), kk, "Rv", "derived");
  if (!ru || !rv) return std::nullopt;
  return EulerResidualTarget{c, k, ru->expr, rv->expr, true};
}

std::vector<Correction> Catalog::corrections() const {
  std::vector<Correction> out;
  for (const auto& e : entries_) {
    if (e.variant != "raw") continue;
    Correction c{e.case_key, e.kind_key, e.slot, e.text, "", e.anchor};
    if (const auto* main = find(e.case_key, e.kind_key, e.slot)) {
      c.corrected_text = main->text;
    } else if (const auto* shared = find("*", e.kind_key, e.slot)) {
      c.corrected_text = shared->text;
    }
    out.push_back(std::move(c));
  }
  return out;
}

std::vector<Correction> Catalog::corrections(CaseId c, Kind k) const {
  std::vector<Correction> out;
  for (auto& corr : corrections()) {
    if (corr.case_key == case_name(c) && corr.kind_key == kind_name(k)) out.push_back(std::move(corr));
  }
  return out;
}

CaseSpec case_spec(CaseId c) { return Catalog::builtin().case_spec(c); }

Multiplier multiplier(Kind k) {
  // The shared entries; the case id is irrelevant without a raw reading.
  return Catalog::builtin().multiplier(CaseId::Case1a, k, Reading::Corrected);
}

std::optional<ConservedVector> conserved_vector(CaseId c, Kind k, Reading r) {
  return Catalog::builtin().conserved_vector(c, k, r);
}

std::optional<EulerResidualTarget> residual_target(CaseId c, Kind k, Reading r) {
  return Catalog::builtin().residual_target(c, k, r);
}

PdeSystem build_system(const CaseSpec& cs) {
  using jet::u_;
  using jet::v_;
  const Expr u(u_()), v(v_());
  const Expr eps(Param::Eps), mu(Param::Mu);
  const Expr half = Expr(jet::Rational(1, 2));
  const Expr nl = jet::pow(mu, 2) * cs.nonlinearity_coeff * (jet::pow(u, 2) + jet::pow(v, 2));
  PdeSystem s;
  s.E1 = Expr(u_(1, 0)) + half * Expr(v_(0, 2)) - eps * cs.b * u - cs.a * v + nl * v;
  s.E2 = -Expr(v_(1, 0)) + half * Expr(u_(0, 2)) - cs.a * u + eps * cs.b * v + nl * u;
  return s;
}

PdeSystem build_system(const CaseSpec& cs, const ParamValues& params) {
  PdeSystem s = build_system(cs);
  return {bind_params(s.E1, params), bind_params(s.E2, params)};
}

Expr bind_params(const Expr& e, const ParamValues& params) {
  std::vector<Binding> b;
  for (int i = 0; i < jet::kParamCount; ++i) {
    const auto p = static_cast<Param>(i);
    const double v = params.get(p);
    const double r = std::nearbyint(v);
    Expr val = (r == v && std::abs(v) < 1e15) ? Expr(jet::Rational(static_cast<std::int64_t>(r)))
                                              : Expr(v);
    b.push_back({p, val});
  }
  return jet::substitute(e, b);
}

}  // namespace ptnls
