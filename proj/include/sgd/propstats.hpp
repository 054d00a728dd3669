#ifndef SGD_PROPSTATS_HPP
#define SGD_PROPSTATS_HPP

#include "sgd/error.hpp"
#include "sgd/time.hpp"
#include "sgd/timeseries.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace sgd {

// All statistics use strict exceedance: a sample exactly at the threshold
// does not exceed it. Invalid samples are excluded from the time base.

struct exceedance_curve {
    std::vector<double> thresholds_db;
    std::vector<double> fraction;
    std::vector<double> minutes;
    std::vector<std::size_t> exceeding_samples;
    std::size_t valid_samples = 0;
};

namespace detail {

inline void check_thresholds(std::span<const double> thresholds) {
    for (std::size_t i = 0; i < thresholds.size(); ++i) {
        if (!(thresholds[i] >= 0.0) || !std::isfinite(thresholds[i]))
            throw statistic_error("thresholds must be finite and non-negative");
        if (i > 0 && !(thresholds[i] > thresholds[i - 1]))
            throw statistic_error("thresholds must be strictly ascending");
    }
}

// For ascending thresholds, counts[j] = number of values v with v > thresholds[j].
// `feed` receives each value once.
class exceedance_counter {
public:
    explicit exceedance_counter(std::span<const double> thresholds)
        : thresholds_(thresholds), bucket_(thresholds.size() + 1, 0) {}

    void add(double v) noexcept {
        // Number of thresholds strictly below v.
        const auto idx = static_cast<std::size_t>(
            std::lower_bound(thresholds_.begin(), thresholds_.end(), v) - thresholds_.begin());
        ++bucket_[idx];
    }

    std::vector<std::size_t> counts() const {
        // v exceeds thresholds[0..idx-1]; suffix sum from idx = j + 1.
        std::vector<std::size_t> out(thresholds_.size(), 0);
        std::size_t acc = 0;
        for (std::size_t j = thresholds_.size(); j-- > 0;) {
            acc += bucket_[j + 1];
            out[j] = acc;
        }
        return out;
    }

private:
    std::span<const double> thresholds_;
    std::vector<std::size_t> bucket_;
};

} // namespace detail

/// Fraction and amount of valid time with attenuation above each threshold.
inline exceedance_curve exceedance(const attenuation_series& series, const time_grid& grid,
                                   std::span<const double> thresholds_db) {
    detail::check_thresholds(thresholds_db);
    detail::exceedance_counter counter(thresholds_db);
    std::size_t valid = 0;
    for (std::size_t k = 0; k < series.size(); ++k) {
        if (!series.valid[k])
            continue;
        ++valid;
        counter.add(series.values[k]);
    }
    if (valid == 0)
        throw statistic_error("series '" + series.site_id + "' has no valid samples");

    exceedance_curve c;
    c.thresholds_db.assign(thresholds_db.begin(), thresholds_db.end());
    c.exceeding_samples = counter.counts();
    c.valid_samples = valid;
    for (auto n : c.exceeding_samples) {
        c.fraction.push_back(static_cast<double>(n) / static_cast<double>(valid));
        c.minutes.push_back(grid.duration_seconds(n) / 60.0);
    }
    return c;
}

struct fade_event {
    std::size_t start_index = 0;
    std::size_t samples = 0;
    double duration_s = 0.0;
    double threshold_db = 0.0;
};

struct fade_summary {
    double threshold_db = 0.0;
    std::vector<fade_event> events;
    std::size_t fading_samples = 0;
    std::size_t valid_samples = 0;
    double fading_time_s = 0.0;
    /// Fading time over valid time, in percent.
    double fading_percent = 0.0;
    std::optional<double> mean_duration_s;

    std::size_t count() const noexcept { return events.size(); }
    double fading_minutes() const noexcept { return fading_time_s / 60.0; }
};

/// Maximal runs of consecutive valid samples above `threshold_db`. An invalid
/// sample ends a run; runs cut by the window edges keep their observed length.
inline fade_summary fade_events(const attenuation_series& series, const time_grid& grid,
                                double threshold_db) {
    if (!(threshold_db >= 0.0))
        throw statistic_error("fade threshold must be non-negative");
    fade_summary out;
    out.threshold_db = threshold_db;
    std::size_t run_start = 0;
    std::size_t run = 0;
    auto close_run = [&] {
        if (run == 0)
            return;
        out.events.push_back({run_start, run, grid.duration_seconds(run), threshold_db});
        out.fading_samples += run;
        run = 0;
    };
    for (std::size_t k = 0; k < series.size(); ++k) {
        if (!series.valid[k]) {
            close_run();
            continue;
        }
        ++out.valid_samples;
        if (series.values[k] > threshold_db) {
            if (run == 0)
                run_start = k;
            ++run;
        } else {
            close_run();
        }
    }
    close_run();
    if (out.valid_samples == 0)
        throw statistic_error("series '" + series.site_id + "' has no valid samples");
    out.fading_time_s = grid.duration_seconds(out.fading_samples);
    out.fading_percent =
        100.0 * static_cast<double>(out.fading_samples) / static_cast<double>(out.valid_samples);
    if (!out.events.empty())
        out.mean_duration_s = out.fading_time_s / static_cast<double>(out.events.size());
    return out;
}

/// For each duration d: share of the total fading time contributed by
/// events longer than d.
inline std::vector<double> fade_duration_distribution(std::span<const fade_event> events,
                                                      std::span<const double> durations_s) {
    if (events.empty())
        throw statistic_error("no fade events");
    std::size_t total = 0;
    for (const auto& e : events)
        total += e.samples;
    std::vector<double> out;
    out.reserve(durations_s.size());
    for (double d : durations_s) {
        std::size_t longer = 0;
        for (const auto& e : events)
            if (e.duration_s > d)
                longer += e.samples;
        out.push_back(static_cast<double>(longer) / static_cast<double>(total));
    }
    return out;
}

struct joint_exceedance_pair {
    std::string site_a;
    std::string site_b;
    std::vector<double> minutes;
    std::vector<std::size_t> samples;
};

struct joint_exceedance_table {
    std::vector<double> thresholds_db;
    std::vector<joint_exceedance_pair> pairs;
};

/// Time both members of every unordered site pair are valid and above each
/// threshold. Pairs follow set order: (0,1), (0,2), ..., (n-2,n-1).
inline joint_exceedance_table joint_exceedance(const series_set& set,
                                               std::span<const double> thresholds_db) {
    detail::check_thresholds(thresholds_db);
    if (set.size() < 2)
        throw statistic_error("joint exceedance needs at least two series");
    joint_exceedance_table t;
    t.thresholds_db.assign(thresholds_db.begin(), thresholds_db.end());
    const auto& grid = set.grid();
    for (std::size_t a = 0; a < set.size(); ++a) {
        for (std::size_t b = a + 1; b < set.size(); ++b) {
            const auto& sa = set[a].series;
            const auto& sb = set[b].series;
            detail::exceedance_counter counter(thresholds_db);
            for (std::size_t k = 0; k < grid.count; ++k)
                if (sa.valid[k] && sb.valid[k])
                    counter.add(std::min(sa.values[k], sb.values[k]));
            joint_exceedance_pair p{set[a].meta.site_id, set[b].meta.site_id, {}, counter.counts()};
            for (auto n : p.samples)
                p.minutes.push_back(grid.duration_seconds(n) / 60.0);
            t.pairs.push_back(std::move(p));
        }
    }
    return t;
}

// Frequency scaling of rain attenuation (ITU-R P.618, long-term statistics
// scaling between 7 and 55 GHz).

inline constexpr double scaling_min_ghz = 7.0;
inline constexpr double scaling_max_ghz = 55.0;

/// phi(f) = f^2 / (1 + 1e-4 f^2)
inline double scaling_phi(double f_ghz) noexcept {
    const double f2 = f_ghz * f_ghz;
    return f2 / (1.0 + 1e-4 * f2);
}

/// Attenuation at f2 given attenuation a1 (dB) at f1.
inline double scale_attenuation(double a1_db, double f1_ghz, double f2_ghz) noexcept {
    if (a1_db <= 0.0)
        return 0.0;
    if (f1_ghz == f2_ghz)
        return a1_db;
    const double ratio = scaling_phi(f2_ghz) / scaling_phi(f1_ghz);
    const double h = 1.12e-3 * std::sqrt(ratio) * std::pow(scaling_phi(f1_ghz) * a1_db, 0.55);
    return a1_db * std::pow(ratio, 1.0 - h);
}

struct scaling_options {
    /// Accept frequencies outside 7-55 GHz.
    bool allow_out_of_range = false;
};

inline attenuation_series frequency_scale(const attenuation_series& series, double f1_ghz, double f2_ghz,
                                          scaling_options opts = {}) {
    auto in_range = [](double f) { return f >= scaling_min_ghz && f <= scaling_max_ghz; };
    if (!(f1_ghz > 0.0) || !(f2_ghz > 0.0))
        throw domain_error("frequencies must be positive");
    if (!opts.allow_out_of_range && (!in_range(f1_ghz) || !in_range(f2_ghz)))
        throw domain_error("frequency scaling is defined for 7-55 GHz");
    attenuation_series out = series;
    for (std::size_t k = 0; k < out.size(); ++k)
        if (out.valid[k])
            out.values[k] = scale_attenuation(out.values[k], f1_ghz, f2_ghz);
    return out;
}

} // namespace sgd

#endif
