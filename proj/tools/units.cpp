#include "units.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <utility>

#include "ose/error.hpp"

namespace ose::cli {
namespace {

struct Unit {
  std::string_view suffix;
  double scale;
};

constexpr Unit kLengthUnits[] = {{"nm", 1e-9}, {"um", 1e-6}, {"\xC2\xB5m", 1e-6}, {"mm", 1e-3}, {"cm", 1e-2}, {"m", 1.0}};
constexpr Unit kAngleUnits[] = {{"mrad", 1e-3}, {"rad", 1.0}, {"deg", std::numbers::pi / 180.0}};

template <std::size_t N>
double parse_with(std::string_view text, const Unit (&units)[N], const char* kind) {
  for (const auto& u : units) {
    if (text.size() <= u.suffix.size() || !text.ends_with(u.suffix)) continue;
    const std::string_view num = text.substr(0, text.size() - u.suffix.size());
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(num.data(), num.data() + num.size(), v);
    if (ec != std::errc{} || ptr != num.data() + num.size() || !std::isfinite(v)) break;
    return v * u.scale;
  }
  throw InvalidArgument(std::string("expected ") + kind + " with unit suffix, got '" + std::string(text) + "'");
}

}  // namespace

double parse_length(std::string_view text) {
  return parse_with(text, kLengthUnits, "a length (nm, um, mm, cm, m)");
}

double parse_angle(std::string_view text) { return parse_with(text, kAngleUnits, "an angle (deg, rad, mrad)"); }

std::string format_length(double meters, std::string_view unit) {
  for (const auto& u : kLengthUnits) {
    if (u.suffix != unit) continue;
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.10g", meters / u.scale);
    return std::string(buf) + std::string(unit);
  }
  throw InvalidArgument("unknown length unit '" + std::string(unit) + "'");
}

}  // namespace ose::cli
