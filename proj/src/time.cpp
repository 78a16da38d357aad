#include "aquastream/time.hpp"

#include "aquastream/error.hpp"

#include <array>
#include <charconv>
#include <cstdio>

namespace aquastream {

namespace {

// Civil-date conversions on the proleptic Gregorian calendar.
std::int64_t days_from_civil(int y, unsigned m, unsigned d) {
    y -= m <= 2;
    const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
    const unsigned yoe = static_cast<unsigned>(y - era * 400);
    const unsigned doy = (153 * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
    const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
    return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

void civil_from_days(std::int64_t z, int& y, unsigned& m, unsigned& d) {
    z += 719468;
    const std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
    const unsigned doe = static_cast<unsigned>(z - era * 146097);
    const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
    const std::int64_t yy = static_cast<std::int64_t>(yoe) + era * 400;
    const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    const unsigned mp = (5 * doy + 2) / 153;
    d = doy - (153 * mp + 2) / 5 + 1;
    m = mp + (mp < 10 ? 3 : -9);
    y = static_cast<int>(yy + (m <= 2));
}

bool parse_uint(std::string_view s, size_t pos, size_t len, int& out) {
    if (pos + len > s.size()) return false;
    int v = 0;
    for (size_t i = pos; i < pos + len; ++i) {
        char c = s[i];
        if (c < '0' || c > '9') return false;
        v = v * 10 + (c - '0');
    }
    out = v;
    return true;
}

[[noreturn]] void bad_timestamp(std::string_view text) {
    raise(Errc::parse_error, "bad timestamp '" + std::string(text) + "'");
}

} // namespace

Instant parse_instant(std::string_view text) {
    // YYYY-MM-DD
    int year, month, day, hour, minute, second;
    if (text.size() < 19) bad_timestamp(text);
    if (!parse_uint(text, 0, 4, year) || text[4] != '-' || !parse_uint(text, 5, 2, month) ||
        text[7] != '-' || !parse_uint(text, 8, 2, day))
        bad_timestamp(text);
    if (text[10] != 'T' && text[10] != 't' && text[10] != ' ') bad_timestamp(text);
    if (!parse_uint(text, 11, 2, hour) || text[13] != ':' || !parse_uint(text, 14, 2, minute) ||
        text[16] != ':' || !parse_uint(text, 17, 2, second))
        bad_timestamp(text);
    if (month < 1 || month > 12 || day < 1 || day > 31 || hour > 23 || minute > 59 || second > 60)
        bad_timestamp(text);

    size_t pos = 19;
    std::int64_t millis = 0;
    if (pos < text.size() && text[pos] == '.') {
        ++pos;
        size_t start = pos;
        std::int64_t frac = 0;
        int captured = 0;
        while (pos < text.size() && text[pos] >= '0' && text[pos] <= '9') {
            if (captured < 3) {
                frac = frac * 10 + (text[pos] - '0');
                ++captured;
            }
            ++pos;
        }
        if (pos == start) bad_timestamp(text);
        while (captured < 3) {
            frac *= 10;
            ++captured;
        }
        millis = frac;
    }

    std::int64_t offset_min = 0;
    if (pos < text.size()) {
        char c = text[pos];
        if (c == 'Z' || c == 'z') {
            ++pos;
        } else if (c == '+' || c == '-') {
            int oh = 0, om = 0;
            if (!parse_uint(text, pos + 1, 2, oh)) bad_timestamp(text);
            size_t mpos = pos + 3;
            if (mpos < text.size() && text[mpos] == ':') ++mpos;
            if (!parse_uint(text, mpos, 2, om)) bad_timestamp(text);
            offset_min = static_cast<std::int64_t>(oh) * 60 + om;
            if (c == '-') offset_min = -offset_min;
            pos = mpos + 2;
        }
    }
    if (pos != text.size()) bad_timestamp(text);

    std::int64_t days = days_from_civil(year, static_cast<unsigned>(month), static_cast<unsigned>(day));
    std::int64_t total_ms = ((days * 24 + hour) * 60 + minute) * 60000LL + second * 1000LL + millis;
    total_ms -= offset_min * 60000LL; // normalize to UTC
    return instant_ms(total_ms);
}

std::string format_instant(Instant t) {
    std::int64_t ms = to_ms(t);
    std::int64_t days = ms / 86400000LL;
    std::int64_t rem = ms % 86400000LL;
    if (rem < 0) {
        rem += 86400000LL;
        --days;
    }
    int year;
    unsigned month, day;
    civil_from_days(days, year, month, day);
    int hour = static_cast<int>(rem / 3600000LL);
    rem %= 3600000LL;
    int minute = static_cast<int>(rem / 60000LL);
    rem %= 60000LL;
    int second = static_cast<int>(rem / 1000LL);
    int millis = static_cast<int>(rem % 1000LL);

    std::array<char, 32> buf{};
    int n;
    if (millis == 0) {
        n = std::snprintf(buf.data(), buf.size(), "%04d-%02u-%02uT%02d:%02d:%02dZ", year, month, day,
                          hour, minute, second);
    } else {
        n = std::snprintf(buf.data(), buf.size(), "%04d-%02u-%02uT%02d:%02d:%02d.%03dZ", year, month,
                          day, hour, minute, second, millis);
    }
    return std::string(buf.data(), static_cast<size_t>(n));
}

Instant parse_compact_date_time(std::string_view yyyymmdd, std::string_view hhmm) {
    int year, month, day, hour, minute;
    if (yyyymmdd.size() != 8 || hhmm.size() != 4 || !parse_uint(yyyymmdd, 0, 4, year) ||
        !parse_uint(yyyymmdd, 4, 2, month) || !parse_uint(yyyymmdd, 6, 2, day) ||
        !parse_uint(hhmm, 0, 2, hour) || !parse_uint(hhmm, 2, 2, minute))
        raise(Errc::parse_error,
              "bad date/time '" + std::string(yyyymmdd) + "' '" + std::string(hhmm) + "'");
    if (month < 1 || month > 12 || day < 1 || day > 31 || hour > 23 || minute > 59)
        raise(Errc::parse_error,
              "bad date/time '" + std::string(yyyymmdd) + "' '" + std::string(hhmm) + "'");
    std::int64_t days = days_from_civil(year, static_cast<unsigned>(month), static_cast<unsigned>(day));
    return instant_ms(((days * 24 + hour) * 60 + minute) * 60000LL);
}

} // namespace aquastream
