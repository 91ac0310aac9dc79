#pragma once

#include <string>
#include <string_view>

namespace tbpsa {

/// Shortest decimal that round-trips to the same double; "inf", "-inf", "nan" otherwise.
std::string format_double(double v);

/// Parses a full string as a double (accepts inf/-inf). Throws std::invalid_argument.
double parse_double(std::string_view s);

}  // namespace tbpsa
