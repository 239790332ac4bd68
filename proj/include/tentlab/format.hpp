#pragma once

#include <string>

namespace tentlab {

/// Shortest round-trip decimal form of x, '.' separator, no locale.
std::string format_double(double x);

/// Locale-independent parse of a whole string as a double; throws ParseError.
double parse_double(const std::string& text);

}  // namespace tentlab
