#pragma once

#include <string>
#include <string_view>

namespace ose::cli {

/// "650nm", "5.9mm", "2.2265625um" -> meters. A unit suffix is required:
/// nm, um, mm, cm or m.
double parse_length(std::string_view text);

/// "0.25deg", "4.4mrad", "0.1rad" -> radians. A unit suffix is required.
double parse_angle(std::string_view text);

/// Shortest round-trip spelling of a length in the given unit, e.g. "650nm".
std::string format_length(double meters, std::string_view unit);

}  // namespace ose::cli
