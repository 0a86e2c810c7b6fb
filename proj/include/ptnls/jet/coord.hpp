#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace ptnls::jet {

/// Highest total derivative order a jet coordinate may carry.
///
/// Expressions in the catalog reach order 2; the Euler operator of an
/// order-k expression needs order 2k, and the divergence property suite
/// feeds it D_x f with f of order 2.
inline constexpr int kMaxJetOrder = 6;

enum class Dep : std::uint8_t { U, V };

enum class Indep : std::uint8_t { T, X };

enum class Param : std::uint8_t { Eps, Mu, Sigma, Alpha, G };

inline constexpr int kParamCount = 5;

/// A derivative coordinate w_{t^i x^j} of the jet space.
struct JetCoord {
  Dep dep = Dep::U;
  int t_order = 0;
  int x_order = 0;

  constexpr int order() const { return t_order + x_order; }

  constexpr JetCoord raised(Indep dir) const {
    return dir == Indep::T ? JetCoord{dep, t_order + 1, x_order}
                           : JetCoord{dep, t_order, x_order + 1};
  }

  constexpr bool valid() const {
    return t_order >= 0 && x_order >= 0 && order() <= kMaxJetOrder;
  }

  /// Dense index in [0, kJetCoordCount); valid coordinates only.
  constexpr int index() const {
    const int n = order();
    const int base = n * (n + 1) / 2 + t_order;
    return dep == Dep::U ? base : base + kPerDep;
  }

  static constexpr int kPerDep = (kMaxJetOrder + 1) * (kMaxJetOrder + 2) / 2;

  static constexpr JetCoord from_index(int idx) {
    JetCoord c;
    if (idx >= kPerDep) {
      c.dep = Dep::V;
      idx -= kPerDep;
    }
    int n = 0;
    while ((n + 1) * (n + 2) / 2 <= idx) ++n;
    c.t_order = idx - n * (n + 1) / 2;
    c.x_order = n - c.t_order;
    return c;
  }

  /// Grammar spelling: `u`, `v_t`, `u_txx` (t letters before x letters).
  std::string name() const;

  /// Inverse of name(); nullopt for anything that is not a coordinate
  /// spelling. Orders above kMaxJetOrder are returned (caller checks).
  static std::optional<JetCoord> from_name(std::string_view s);

  friend constexpr bool operator==(const JetCoord&, const JetCoord&) = default;
  friend constexpr auto operator<=>(const JetCoord&, const JetCoord&) = default;
};

inline constexpr int kJetCoordCount = 2 * JetCoord::kPerDep;

inline constexpr JetCoord u_(int t = 0, int x = 0) { return {Dep::U, t, x}; }
inline constexpr JetCoord v_(int t = 0, int x = 0) { return {Dep::V, t, x}; }

const char* param_name(Param p);
std::optional<Param> param_from_name(std::string_view s);

}  // namespace ptnls::jet
