#ifndef SGD_TIME_HPP
#define SGD_TIME_HPP

#include "sgd/error.hpp"

#include <charconv>
#include <chrono>
#include <cstdint>
#include <cstdio>
#include <numeric>
#include <string>
#include <string_view>

namespace sgd {

/// Positive rational number of seconds, always stored in lowest terms.
class step_seconds {
public:
    constexpr step_seconds() = default;

    step_seconds(std::int64_t num, std::int64_t den = 1) {
        if (num <= 0 || den <= 0)
            throw data_error("time step must be a positive rational number of seconds");
        const auto g = std::gcd(num, den);
        num_ = num / g;
        den_ = den / g;
    }

    /// Parses "1", "0.5", "2.25" exactly.
    static step_seconds parse(std::string_view text) {
        std::int64_t num = 0;
        std::int64_t den = 1;
        bool seen_dot = false;
        bool any_digit = false;
        for (char c : text) {
            if (c == '.' && !seen_dot) {
                seen_dot = true;
                continue;
            }
            if (c < '0' || c > '9' || den > 1'000'000'000'000LL || num > 1'000'000'000'000LL)
                throw data_error("invalid time step '" + std::string(text) + "'");
            any_digit = true;
            num = num * 10 + (c - '0');
            if (seen_dot)
                den *= 10;
        }
        if (!any_digit)
            throw data_error("invalid time step '" + std::string(text) + "'");
        return {num, den};
    }

    static step_seconds from_double(double seconds) {
        char buf[64];
        std::snprintf(buf, sizeof buf, "%.9f", seconds);
        return parse(buf);
    }

    constexpr std::int64_t num() const noexcept { return num_; }
    constexpr std::int64_t den() const noexcept { return den_; }
    constexpr double seconds() const noexcept {
        return static_cast<double>(num_) / static_cast<double>(den_);
    }

    friend constexpr bool operator==(const step_seconds&, const step_seconds&) = default;

    std::string to_string() const {
        if (den_ == 1)
            return std::to_string(num_);
        char buf[64];
        std::snprintf(buf, sizeof buf, "%.9g", seconds());
        return buf;
    }

private:
    std::int64_t num_ = 1;
    std::int64_t den_ = 1;
};

/// Uniform sampling grid: sample k sits at start_epoch + k * step.
struct time_grid {
    std::int64_t start_epoch = 0;
    step_seconds step{};
    std::size_t count = 0;

    friend bool operator==(const time_grid&, const time_grid&) = default;

    /// Whole seconds since the epoch of sample k (floor).
    std::int64_t instant_floor(std::size_t k) const noexcept {
        const __int128 t = static_cast<__int128>(start_epoch) * step.den() +
                           static_cast<__int128>(k) * step.num();
        __int128 q = t / step.den();
        if (t % step.den() < 0)
            --q;
        return static_cast<std::int64_t>(q);
    }

    /// Instant of sample k as exact fraction (numerator over step.den()).
    __int128 instant_ticks(std::size_t k) const noexcept {
        return static_cast<__int128>(start_epoch) * step.den() +
               static_cast<__int128>(k) * step.num();
    }

    /// First sample index whose instant is at or after `epoch_seconds`.
    std::size_t first_index_at_or_after(std::int64_t epoch_seconds) const noexcept {
        const __int128 delta = static_cast<__int128>(epoch_seconds - start_epoch) * step.den();
        if (delta <= 0)
            return 0;
        const __int128 k = (delta + step.num() - 1) / step.num();
        return k > static_cast<__int128>(count) ? count : static_cast<std::size_t>(k);
    }

    double duration_seconds(std::size_t samples) const noexcept {
        return static_cast<double>(samples) * step.seconds();
    }
};

inline constexpr std::int64_t seconds_per_day = 86400;

/// UTC day number (days since 1970-01-01) containing `epoch_seconds`.
inline std::int64_t utc_day(std::int64_t epoch_seconds) noexcept {
    std::int64_t d = epoch_seconds / seconds_per_day;
    if (epoch_seconds % seconds_per_day < 0)
        --d;
    return d;
}

inline std::string format_date(std::int64_t day) {
    using namespace std::chrono;
    const year_month_day ymd{sys_days{days{day}}};
    char buf[32];
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(ymd.year()),
                  static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()));
    return buf;
}

/// ISO-8601 UTC, e.g. 2018-05-24T13:02:07Z. Sub-second parts are written
/// only when present.
inline std::string format_utc(std::int64_t epoch_nanos) {
    std::int64_t secs = epoch_nanos / 1'000'000'000;
    std::int64_t frac = epoch_nanos % 1'000'000'000;
    if (frac < 0) {
        frac += 1'000'000'000;
        --secs;
    }
    const std::int64_t day = utc_day(secs);
    const std::int64_t sod = secs - day * seconds_per_day;
    char buf[64];
    const auto date = format_date(day);
    if (frac == 0) {
        std::snprintf(buf, sizeof buf, "%sT%02d:%02d:%02dZ", date.c_str(), static_cast<int>(sod / 3600),
                      static_cast<int>(sod / 60 % 60), static_cast<int>(sod % 60));
        return buf;
    }
    int digits = 9;
    while (frac % 10 == 0) {
        frac /= 10;
        --digits;
    }
    std::snprintf(buf, sizeof buf, "%sT%02d:%02d:%02d.%0*lldZ", date.c_str(), static_cast<int>(sod / 3600),
                  static_cast<int>(sod / 60 % 60), static_cast<int>(sod % 60), digits,
                  static_cast<long long>(frac));
    return buf;
}

/// Instant of grid sample k in ISO-8601 UTC.
inline std::string format_sample_utc(const time_grid& grid, std::size_t k) {
    const __int128 ticks = grid.instant_ticks(k);
    const __int128 nanos = ticks * 1'000'000'000 / grid.step.den();
    return format_utc(static_cast<std::int64_t>(nanos));
}

namespace detail {

inline bool parse_fixed_int(std::string_view s, std::size_t pos, std::size_t len, int& out) {
    if (pos + len > s.size())
        return false;
    const char* b = s.data() + pos;
    auto [p, ec] = std::from_chars(b, b + len, out);
    return ec == std::errc{} && p == b + len;
}

// Parses an optional ".ddd" fraction at s[pos...] into nanoseconds.
inline bool parse_fraction(std::string_view s, std::size_t& pos, std::int64_t& nanos) {
    nanos = 0;
    if (pos >= s.size() || s[pos] != '.')
        return true;
    ++pos;
    std::int64_t scale = 100'000'000;
    bool any = false;
    while (pos < s.size() && s[pos] >= '0' && s[pos] <= '9') {
        nanos += (s[pos] - '0') * scale;
        scale /= 10;
        ++pos;
        any = true;
    }
    return any;
}

} // namespace detail

/// Parses an ISO-8601 UTC timestamp ("2018-01-01T00:00:00Z", optional
/// fraction, optional "Z" or "+00:00", space accepted as separator) or a
/// plain epoch-seconds number ("1514764800", "1514764800.5").
/// Returns nanoseconds since the epoch; false on failure.
inline bool parse_timestamp(std::string_view s, std::int64_t& epoch_nanos) {
    if (s.empty())
        return false;
    const bool looks_iso = s.size() >= 10 && s[4] == '-' && s[7] == '-';
    if (!looks_iso) {
        std::size_t pos = 0;
        bool negative = false;
        if (s[0] == '-') {
            negative = true;
            pos = 1;
        }
        std::int64_t secs = 0;
        const char* b = s.data() + pos;
        const char* e = s.data() + s.size();
        auto [p, ec] = std::from_chars(b, e, secs);
        if (ec != std::errc{} || p == b)
            return false;
        pos = static_cast<std::size_t>(p - s.data());
        std::int64_t frac = 0;
        if (!detail::parse_fraction(s, pos, frac) || pos != s.size())
            return false;
        if (secs > 9'000'000'000LL)
            return false;
        epoch_nanos = (negative ? -1 : 1) * (secs * 1'000'000'000 + frac);
        return true;
    }

    int y = 0, mo = 0, d = 0, h = 0, mi = 0, sec = 0;
    if (!detail::parse_fixed_int(s, 0, 4, y) || !detail::parse_fixed_int(s, 5, 2, mo) ||
        !detail::parse_fixed_int(s, 8, 2, d))
        return false;
    std::size_t pos = 10;
    std::int64_t frac = 0;
    if (pos < s.size()) {
        if (s[pos] != 'T' && s[pos] != ' ')
            return false;
        if (!detail::parse_fixed_int(s, 11, 2, h) || s.size() < 19 || s[13] != ':' ||
            !detail::parse_fixed_int(s, 14, 2, mi) || s[16] != ':' ||
            !detail::parse_fixed_int(s, 17, 2, sec))
            return false;
        pos = 19;
        if (!detail::parse_fraction(s, pos, frac))
            return false;
        const auto rest = s.substr(pos);
        if (!(rest.empty() || rest == "Z" || rest == "+00:00" || rest == "+0000"))
            return false;
    }
    using namespace std::chrono;
    const year_month_day ymd{year{y}, month{static_cast<unsigned>(mo)}, day{static_cast<unsigned>(d)}};
    if (!ymd.ok() || h > 23 || mi > 59 || sec > 60)
        return false;
    const std::int64_t days_since = sys_days{ymd}.time_since_epoch().count();
    const std::int64_t secs = days_since * seconds_per_day + h * 3600 + mi * 60 + sec;
    epoch_nanos = secs * 1'000'000'000 + frac;
    return true;
}

} // namespace sgd

#endif
