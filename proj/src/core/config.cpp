#include "panelforge/config.hpp"

#include <charconv>
#include <stdexcept>
#include <vector>

namespace panelforge {

void CacheConfig::validate() const {
  if (mc == 0 || nc == 0 || kc == 0 || mr == 0 || nr == 0 || b == 0) {
    throw std::invalid_argument("CacheConfig: all blocking parameters must be >= 1");
  }
  if (mr > mc) throw std::invalid_argument("CacheConfig: mr must not exceed mc");
  if (nr > nc) throw std::invalid_argument("CacheConfig: nr must not exceed nc");
}

CacheConfig parse_cache_spec(std::string_view text, CacheConfig base) {
  std::vector<std::size_t> values;
  while (!text.empty()) {
    const auto comma = text.find(',');
    const auto field = text.substr(0, comma);
    std::size_t v = 0;
    const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
    if (ec != std::errc{} || ptr != field.data() + field.size()) {
      throw std::invalid_argument("cache spec: expected unsigned integer, got '" + std::string(field) + "'");
    }
    values.push_back(v);
    if (comma == std::string_view::npos) break;
    text.remove_prefix(comma + 1);
  }
  if (values.size() != 5) throw std::invalid_argument("cache spec: expected mc,nc,kc,mr,nr");
  base.mc = values[0];
  base.nc = values[1];
  base.kc = values[2];
  base.mr = values[3];
  base.nr = values[4];
  base.validate();
  return base;
}

std::string to_string(const CacheConfig& c) {
  return "mc=" + std::to_string(c.mc) + " nc=" + std::to_string(c.nc) + " kc=" + std::to_string(c.kc) +
         " mr=" + std::to_string(c.mr) + " nr=" + std::to_string(c.nr) + " b=" + std::to_string(c.b);
}

}  // namespace panelforge
