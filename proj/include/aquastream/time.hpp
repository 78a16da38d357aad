#pragma once

#include <chrono>
#include <cstdint>
#include <string>
#include <string_view>

namespace aquastream {

// All instants are UTC with millisecond resolution.
using Duration = std::chrono::milliseconds;
using Instant = std::chrono::sys_time<Duration>;

constexpr Instant instant_ms(std::int64_t ms) { return Instant{Duration{ms}}; }
constexpr std::int64_t to_ms(Instant t) { return t.time_since_epoch().count(); }

constexpr Duration hours(std::int64_t h) { return std::chrono::duration_cast<Duration>(std::chrono::hours(h)); }
constexpr Duration minutes(std::int64_t m) { return std::chrono::duration_cast<Duration>(std::chrono::minutes(m)); }
constexpr Duration seconds(std::int64_t s) { return std::chrono::duration_cast<Duration>(std::chrono::seconds(s)); }

// Parses ISO-8601 timestamps: "2012-12-06T11:00:00Z", optional fractional
// seconds, offsets as Z / +HH:MM / +HHMM. Missing offset means UTC.
// Throws Error(parse_error) on malformed input.
Instant parse_instant(std::string_view text);

// Formats as "YYYY-MM-DDTHH:MM:SSZ", with ".mmm" when sub-second.
std::string format_instant(Instant t);

// "YYYYMMDD" + "HHMM" (the weather service request encoding) -> Instant.
Instant parse_compact_date_time(std::string_view yyyymmdd, std::string_view hhmm);

} // namespace aquastream
