#include "ptnls/jet/coord.hpp"

#include <array>

namespace ptnls::jet {

std::string JetCoord::name() const {
  std::string s(1, dep == Dep::U ? 'u' : 'v');
  if (order() > 0) {
    s += '_';
    s.append(static_cast<std::size_t>(t_order), 't');
    s.append(static_cast<std::size_t>(x_order), 'x');
  }
  return s;
}

std::optional<JetCoord> JetCoord::from_name(std::string_view s) {
  if (s.empty() || (s[0] != 'u' && s[0] != 'v')) return std::nullopt;
  JetCoord c{s[0] == 'u' ? Dep::U : Dep::V, 0, 0};
  if (s.size() == 1) return c;
  if (s.size() < 3 || s[1] != '_') return std::nullopt;
  std::size_t i = 2;
  while (i < s.size() && s[i] == 't') {
    ++c.t_order;
    ++i;
  }
  while (i < s.size() && s[i] == 'x') {
    ++c.x_order;
    ++i;
  }
  if (i != s.size()) return std::nullopt;
  return c;
}

namespace {
constexpr std::array<const char*, kParamCount> kParamNames = {"eps", "mu", "sigma", "alpha", "g"};
}

const char* param_name(Param p) { return kParamNames[static_cast<std::size_t>(p)]; }

std::optional<Param> param_from_name(std::string_view s) {
  for (std::size_t i = 0; i < kParamNames.size(); ++i) {
    if (s == kParamNames[i]) return static_cast<Param>(i);
  }
  return std::nullopt;
}

}  // namespace ptnls::jet
