#pragma once

#include <array>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "ptnls/jet/eval.hpp"
#include "ptnls/jet/expr.hpp"

namespace ptnls {

using jet::Expr;
using jet::ParamValues;

enum class CaseId { Case1a, Case1b, Case1c, Case2 };
enum class Kind { Energy, Charge };

inline constexpr std::array<CaseId, 4> kAllCases{CaseId::Case1a, CaseId::Case1b, CaseId::Case1c,
                                                 CaseId::Case2};
inline constexpr std::array<Kind, 2> kAllKinds{Kind::Energy, Kind::Charge};

/// "1a", "1b", "1c", "2".
const char* case_name(CaseId c);
/// Accepts "1a" or "Case1a" (case-insensitive prefix).
std::optional<CaseId> case_from_name(std::string_view s);
/// "energy", "charge".
const char* kind_name(Kind k);
std::optional<Kind> kind_from_name(std::string_view s);

/// Which transcription to use where the catalog keeps two.
enum class Reading { Corrected, Raw };
const char* reading_name(Reading r);

struct CaseSpec {
  CaseId id = CaseId::Case1a;
  Expr a;
  Expr b;
  /// 2 sigma exp(-alpha x^2); the system multiplies it by mu^2 |q|^2.
  Expr nonlinearity_coeff;
};

struct PdeSystem {
  Expr E1;
  Expr E2;
};

struct Multiplier {
  Kind kind = Kind::Energy;
  Expr Q1;
  Expr Q2;
};

struct ConservedVector {
  CaseId case_id = CaseId::Case1a;
  Kind kind = Kind::Energy;
  Expr Tt;
  std::optional<Expr> Tx;
  std::optional<Expr> complex_density;
  /// D_t Tt + D_x Tx = kappa (Q1 E1 + Q2 E2) + O(eps).
  int kappa = 1;
};

struct EulerResidualTarget {
  CaseId case_id = CaseId::Case1a;
  Kind kind = Kind::Energy;
  Expr Ru;
  Expr Rv;
  /// Engine-computed; no printed counterpart.
  bool derived = false;
};

class CatalogError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct CatalogEntry {
  std::string case_key;  // 1a 1b 1c 2 *
  std::string kind_key;  // energy charge -
  std::string slot;
  std::string variant;   // "" raw derived
  std::string text;
  std::string anchor;
  int line = 0;
  Expr expr;
};

/// A place where the catalog keeps a raw reading next to the one used.
struct Correction {
  std::string case_key;
  std::string kind_key;
  std::string slot;
  std::string raw_text;
  std::string corrected_text;
  std::string anchor;
};

/// Line-oriented transcription store:
///   case | kind | slot[:variant] | expression | anchor
/// `#` starts a comment line; a trailing backslash continues a record.
class Catalog {
 public:
  static Catalog parse(std::string_view text, const std::string& source = "<catalog>");
  static Catalog load_file(const std::filesystem::path& path);
  /// The catalog compiled into the library.
  static const Catalog& builtin();

  const std::vector<CatalogEntry>& entries() const { return entries_; }
  const CatalogEntry* find(std::string_view case_key, std::string_view kind_key,
                           std::string_view slot, std::string_view variant = "") const;

  CaseSpec case_spec(CaseId c) const;
  /// E1, E2 as transcribed (not built from a, b).
  PdeSystem transcribed_system(CaseId c) const;
  /// Raw reading returns the multiplier printed in the case block header
  /// when it differs from the kind's multiplier.
  Multiplier multiplier(CaseId c, Kind k, Reading r = Reading::Corrected) const;
  std::optional<ConservedVector> conserved_vector(CaseId c, Kind k,
                                                  Reading r = Reading::Corrected) const;
  std::optional<EulerResidualTarget> residual_target(CaseId c, Kind k,
                                                     Reading r = Reading::Corrected) const;
  std::optional<EulerResidualTarget> derived_residual(CaseId c, Kind k) const;

  std::vector<Correction> corrections() const;
  std::vector<Correction> corrections(CaseId c, Kind k) const;

 private:
  const CatalogEntry* pick(CaseId c, std::string_view kind_key, std::string_view slot,
                           Reading r) const;
  std::vector<CatalogEntry> entries_;
};

// Lookups against the built-in catalog.
CaseSpec case_spec(CaseId c);
Multiplier multiplier(Kind k);
std::optional<ConservedVector> conserved_vector(CaseId c, Kind k, Reading r = Reading::Corrected);
std::optional<EulerResidualTarget> residual_target(CaseId c, Kind k,
                                                   Reading r = Reading::Corrected);

/// E1 = u_t + v_xx/2 - eps b u - a v + mu^2 N (u^2 + v^2) v
/// E2 = -v_t + u_xx/2 - a u + eps b v + mu^2 N (u^2 + v^2) u
/// with N the case's nonlinearity coefficient.
PdeSystem build_system(const CaseSpec& cs);
/// Same with the parameters replaced by their numerical values.
PdeSystem build_system(const CaseSpec& cs, const ParamValues& params);

/// Replaces eps, mu, sigma, alpha, g by numbers (integers stay exact).
Expr bind_params(const Expr& e, const ParamValues& params);

}  // namespace ptnls
