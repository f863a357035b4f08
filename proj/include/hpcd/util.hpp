#ifndef HPCD_UTIL_HPP_
#define HPCD_UTIL_HPP_

#include <cstdint>
#include <string>
#include <string_view>

namespace hpcd {

std::uint64_t fnv1a64(std::string_view bytes);
std::uint64_t fnv1a64_file(const std::string& path);
std::string hex64(std::uint64_t value);

/// Shortest decimal string that parses back to the identical double.
std::string format_double(double value);
double parse_double(std::string_view text);

}  // namespace hpcd

#endif  // HPCD_UTIL_HPP_
