#pragma once

#include <string>

namespace panelfair {

/// Shortest decimal text that reads back to the same double.
std::string format_number(double value);

}  // namespace panelfair
