#include "panelfair/format.hpp"

#include <array>
#include <charconv>

namespace panelfair {

std::string format_number(double value) {
    if (value == 0.0) return "0";
    std::array<char, 64> buf{};
    auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), value);
    return std::string(buf.data(), end);
}

}  // namespace panelfair
