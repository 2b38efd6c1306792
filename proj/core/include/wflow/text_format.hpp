#pragma once

#include <string>

namespace wflow {

/// Shortest "%.17g" rendering: round-trips any double exactly.
std::string format_double(double v);

}  // namespace wflow
