#ifndef SGD_CSV_IO_HPP
#define SGD_CSV_IO_HPP

#include "sgd/error.hpp"
#include "sgd/time.hpp"
#include "sgd/timeseries.hpp"

#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <limits>
#include <numeric>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

namespace sgd {

inline constexpr std::string_view series_csv_header = "timestamp_utc,attenuation_db,valid";

namespace detail {

inline std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r'))
        s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
        s.remove_suffix(1);
    return s;
}

inline std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw data_error("cannot open '" + path.string() + "'");
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline bool parse_double(std::string_view s, double& out) {
    if (s.empty())
        return false;
    if (s.front() == '+')
        s.remove_prefix(1);
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
    return ec == std::errc{} && p == s.data() + s.size();
}

struct raw_row {
    std::int64_t t_ns;
    double value;
    bool valid;
};

} // namespace detail

/// Reads one site's attenuation CSV (`timestamp_utc,attenuation_db,valid`).
///
/// The native grid step is `native_step` when given (it must divide every
/// timestamp increment), otherwise the greatest common divisor of the
/// increments and 1 s, so a 1 Hz record with a missing row keeps its 1 s
/// grid. Grid positions without a row, rows whose value is empty,
/// `NaN` or unparsable, and rows flagged `valid=0` become invalid samples.
/// Rows whose timestamp cannot be parsed are dropped. Negative valid values
/// are clamped to 0 dB and counted in `native_series::clamped`.
inline native_series load_series(const std::filesystem::path& path, const site_meta& site,
                                 std::optional<step_seconds> native_step = std::nullopt) {
    if (!std::filesystem::exists(path))
        throw data_error("missing input file '" + path.string() + "'");
    const std::string text = detail::read_file(path);

    std::vector<detail::raw_row> rows;
    std::size_t pos = 0;
    bool header_seen = false;
    while (pos < text.size()) {
        std::size_t eol = text.find('\n', pos);
        if (eol == std::string::npos)
            eol = text.size();
        std::string_view line = detail::trim(std::string_view(text).substr(pos, eol - pos));
        pos = eol + 1;
        if (!header_seen) {
            if (line.substr(0, 3) == "\xEF\xBB\xBF")
                line.remove_prefix(3);
            if (line.empty())
                continue;
            std::string compact;
            for (char c : line)
                if (c != ' ' && c != '\t')
                    compact.push_back(c);
            if (compact != series_csv_header)
                throw format_error("'" + path.string() + "': expected header '" +
                                   std::string(series_csv_header) + "'");
            header_seen = true;
            continue;
        }
        if (line.empty())
            continue;

        const auto c1 = line.find(',');
        const auto c2 = c1 == std::string_view::npos ? c1 : line.find(',', c1 + 1);
        if (c2 == std::string_view::npos || line.find(',', c2 + 1) != std::string_view::npos)
            continue;
        const auto ts = detail::trim(line.substr(0, c1));
        const auto att = detail::trim(line.substr(c1 + 1, c2 - c1 - 1));
        const auto flag = detail::trim(line.substr(c2 + 1));

        detail::raw_row row{};
        if (!parse_timestamp(ts, row.t_ns))
            continue;
        double v = std::numeric_limits<double>::quiet_NaN();
        const bool parsed = detail::parse_double(att, v) && std::isfinite(v);
        row.value = parsed ? v : 0.0;
        row.valid = parsed && flag == "1";
        if (!rows.empty() && row.t_ns <= rows.back().t_ns)
            throw data_error("'" + path.string() + "': timestamps are not strictly increasing at '" +
                             std::string(ts) + "'");
        rows.push_back(row);
    }
    if (!header_seen)
        throw data_error("'" + path.string() + "' is empty");
    if (rows.empty())
        throw data_error("'" + path.string() + "' has no data rows");

    const std::int64_t t0 = rows.front().t_ns;
    if (t0 % 1'000'000'000 != 0)
        throw data_error("'" + path.string() + "': first timestamp must fall on a whole second");
    std::int64_t g = 1'000'000'000;
    if (native_step) {
        const __int128 ns = static_cast<__int128>(native_step->num()) * 1'000'000'000 / native_step->den();
        if (ns * native_step->den() != static_cast<__int128>(native_step->num()) * 1'000'000'000 ||
            ns > std::numeric_limits<std::int64_t>::max())
            throw data_error("'" + path.string() + "': native step is not a whole number of nanoseconds");
        g = static_cast<std::int64_t>(ns);
        for (std::size_t i = 1; i < rows.size(); ++i)
            if ((rows[i].t_ns - t0) % g != 0)
                throw data_error("'" + path.string() + "': timestamps are off the declared " +
                                 native_step->to_string() + " s grid");
    } else {
        for (std::size_t i = 1; i < rows.size(); ++i)
            g = std::gcd(g, rows[i].t_ns - rows[i - 1].t_ns);
    }
    const std::int64_t span = rows.back().t_ns - t0;
    const std::int64_t count = span / g + 1;
    if (count > std::int64_t{4'000'000'000})
        throw data_error("'" + path.string() + "': timestamps do not lie on a regular grid");

    native_series out;
    out.meta = site;
    out.grid = time_grid{t0 / 1'000'000'000, step_seconds(g, 1'000'000'000),
                         static_cast<std::size_t>(count)};
    out.series.site_id = site.site_id;
    out.series.values.assign(static_cast<std::size_t>(count), 0.0);
    out.series.valid.assign(static_cast<std::size_t>(count), 0);
    for (const auto& r : rows) {
        const auto k = static_cast<std::size_t>((r.t_ns - t0) / g);
        out.series.values[k] = r.value;
        out.series.valid[k] = r.valid ? 1 : 0;
    }
    out.clamped = sanitize(out.series);
    return out;
}

/// Writes one series in the ingestion format; attenuation with 4 decimals,
/// empty for invalid samples.
inline void write_series_csv(std::ostream& os, const time_grid& grid, const attenuation_series& s) {
    os << series_csv_header << '\n';
    char buf[64];
    for (std::size_t k = 0; k < s.size(); ++k) {
        os << format_sample_utc(grid, k) << ',';
        if (s.valid[k]) {
            auto [p, ec] = std::to_chars(buf, buf + sizeof buf, s.values[k], std::chars_format::fixed, 4);
            os.write(buf, p - buf);
            os << ",1\n";
        } else {
            os << ",0\n";
        }
    }
}

inline void write_series_csv(const std::filesystem::path& path, const time_grid& grid,
                             const attenuation_series& s) {
    if (path.has_parent_path())
        std::filesystem::create_directories(path.parent_path());
    std::ofstream os(path, std::ios::binary);
    if (!os)
        throw data_error("cannot write '" + path.string() + "'");
    write_series_csv(os, grid, s);
}

} // namespace sgd

#endif
