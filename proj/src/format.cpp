#include "shortfall/format.hpp"

#include <array>
#include <charconv>

namespace shortfall {

std::string format_number(double value) {
    std::array<char, 64> buf{};
    if (value == 0.0) value = 0.0;  // collapse -0
    auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), value);
    return std::string(buf.data(), ptr);
}

}  // namespace shortfall
