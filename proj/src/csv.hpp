// SPDX-License-Identifier: Apache-2.0
//
// Locale-independent number formatting for the CSV writers.

#pragma once

#include <charconv>
#include <string>
#include <system_error>

namespace mcbf::detail {

/// Shortest round-trip representation, always with '.' as decimal point.
inline std::string fmt(double value)
{
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
    if (ec != std::errc{}) return "nan";
    return std::string(buf, ptr);
}

inline std::string fmt(long long value)
{
    return std::to_string(value);
}

inline std::string fmt(int value)
{
    return std::to_string(value);
}

} // namespace mcbf::detail
