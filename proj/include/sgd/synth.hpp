#ifndef SGD_SYNTH_HPP
#define SGD_SYNTH_HPP

#include "sgd/error.hpp"
#include "sgd/random.hpp"
#include "sgd/time.hpp"
#include "sgd/timeseries.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

namespace sgd {

/// Event (on/off) rain-fade model of one site. Fade events arrive at
/// `rate_per_day`; each has a lognormal duration (seconds) and a lognormal
/// peak (dB), with a linear rise over `rise_fraction` of the duration and a
/// linear decay over the rest.
struct fade_site_model {
    site_meta meta;
    double rate_per_day = 0.0;
    double duration_mu = 4.0;     // ln seconds
    double duration_sigma = 1.0;
    double peak_mu = 1.5;         // ln dB
    double peak_sigma = 0.6;
    double rise_fraction = 0.5;
    // Optional outages of the receiver itself: invalid-data windows.
    double gap_rate_per_day = 0.0;
    double gap_duration_s = 0.0;
};

struct synth_spec {
    time_grid grid;
    /// Event start times are drawn per slot; at most one event per site and slot.
    double slot_seconds = 60.0;
    std::vector<fade_site_model> sites;
    /// Site-pair event correlation in [0, 1]; identity when empty.
    std::vector<std::vector<double>> correlation;
};

namespace detail {

/// Lower-triangular factor of a positive semidefinite matrix; zero pivots
/// are allowed. Throws spec_error when the matrix is not PSD.
inline std::vector<std::vector<double>> psd_cholesky(const std::vector<std::vector<double>>& c) {
    constexpr double tol = 1e-9;
    const std::size_t n = c.size();
    std::vector<std::vector<double>> l(n, std::vector<double>(n, 0.0));
    for (std::size_t j = 0; j < n; ++j) {
        double d = c[j][j];
        for (std::size_t k = 0; k < j; ++k)
            d -= l[j][k] * l[j][k];
        if (d < -tol)
            throw spec_error("correlation matrix is not positive semidefinite");
        const bool zero_pivot = d <= tol;
        l[j][j] = zero_pivot ? 0.0 : std::sqrt(d);
        for (std::size_t i = j + 1; i < n; ++i) {
            double s = c[i][j];
            for (std::size_t k = 0; k < j; ++k)
                s -= l[i][k] * l[j][k];
            if (zero_pivot) {
                if (std::abs(s) > tol)
                    throw spec_error("correlation matrix is not positive semidefinite");
                l[i][j] = 0.0;
            } else {
                l[i][j] = s / l[j][j];
            }
        }
    }
    return l;
}

inline void validate_synth_spec(const synth_spec& spec) {
    if (!(spec.slot_seconds > 0.0))
        throw spec_error("slot length must be positive");
    const std::size_t n = spec.sites.size();
    if (n == 0)
        throw spec_error("no sites to synthesize");
    for (const auto& s : spec.sites) {
        const auto& id = s.meta.site_id;
        if (!(s.rate_per_day >= 0.0) || !std::isfinite(s.rate_per_day))
            throw spec_error("site '" + id + "': fade rate must be non-negative");
        if (s.rate_per_day * spec.slot_seconds / seconds_per_day > 1.0)
            throw spec_error("site '" + id + "': fade rate exceeds one event per slot");
        if (!(s.duration_sigma >= 0.0) || !(s.peak_sigma >= 0.0) || !std::isfinite(s.duration_mu) ||
            !std::isfinite(s.peak_mu))
            throw spec_error("site '" + id + "': invalid lognormal parameters");
        if (!(s.rise_fraction >= 0.0 && s.rise_fraction <= 1.0))
            throw spec_error("site '" + id + "': rise fraction must be in [0, 1]");
        if (!(s.gap_rate_per_day >= 0.0) || !(s.gap_duration_s >= 0.0) ||
            s.gap_rate_per_day * spec.slot_seconds / seconds_per_day > 1.0)
            throw spec_error("site '" + id + "': invalid gap parameters");
    }
    if (spec.correlation.empty())
        return;
    if (spec.correlation.size() != n)
        throw spec_error("correlation matrix size does not match the number of sites");
    for (std::size_t i = 0; i < n; ++i) {
        if (spec.correlation[i].size() != n)
            throw spec_error("correlation matrix is not square");
        for (std::size_t j = 0; j < n; ++j) {
            const double r = spec.correlation[i][j];
            if (!(r >= 0.0 && r <= 1.0))
                throw spec_error("correlation entries must lie in [0, 1]");
            if (r != spec.correlation[j][i])
                throw spec_error("correlation matrix is not symmetric");
        }
        if (spec.correlation[i][i] != 1.0)
            throw spec_error("correlation matrix diagonal must be 1");
    }
}

} // namespace detail

/// Generates one series per site on `spec.grid`.
///
/// Per slot, three correlated standard-normal vectors (trigger, duration,
/// peak) are drawn through the factor of the correlation matrix, plus one
/// start offset shared by all sites. Site i starts an event when its trigger
/// deviate falls below the normal quantile of rate_i * slot / day. Sites
/// with correlation 1 and equal models therefore produce identical events.
/// Overlapping events combine by maximum.
inline series_set synthesize(const synth_spec& spec, std::uint64_t seed) {
    detail::validate_synth_spec(spec);
    const std::size_t n = spec.sites.size();
    const time_grid& grid = spec.grid;
    const double step = grid.step.seconds();
    const double span = grid.duration_seconds(grid.count);
    const double slot = spec.slot_seconds;
    const auto slots = static_cast<std::size_t>(std::ceil(span / slot));

    std::vector<std::vector<double>> corr = spec.correlation;
    if (corr.empty()) {
        corr.assign(n, std::vector<double>(n, 0.0));
        for (std::size_t i = 0; i < n; ++i)
            corr[i][i] = 1.0;
    }
    const auto factor = detail::psd_cholesky(corr);

    std::vector<double> trigger_q(n), gap_p(n);
    for (std::size_t i = 0; i < n; ++i) {
        trigger_q[i] = normal_quantile(spec.sites[i].rate_per_day * slot / seconds_per_day);
        gap_p[i] = spec.sites[i].gap_rate_per_day * slot / seconds_per_day;
    }

    std::vector<site_series> out(n);
    for (std::size_t i = 0; i < n; ++i) {
        out[i].meta = spec.sites[i].meta;
        out[i].series.site_id = spec.sites[i].meta.site_id;
        out[i].series.values.assign(grid.count, 0.0);
        out[i].series.valid.assign(grid.count, 1);
    }

    // Samples with relative instants in [from, to] seconds.
    auto sample_range = [&](double from, double to) {
        auto first = static_cast<std::int64_t>(std::ceil(from / step));
        auto last = static_cast<std::int64_t>(std::floor(to / step));
        first = std::max<std::int64_t>(first, 0);
        last = std::min<std::int64_t>(last, static_cast<std::int64_t>(grid.count) - 1);
        return std::pair{first, last};
    };

    auto paint_event = [&](attenuation_series& s, const fade_site_model& m, double t0, double duration,
                           double peak) {
        const auto [first, last] = sample_range(t0, t0 + duration);
        const double r = m.rise_fraction;
        for (std::int64_t k = first; k <= last; ++k) {
            const double x = (static_cast<double>(k) * step - t0) / duration;
            double shape;
            if (x < r)
                shape = x / r;
            else
                shape = r >= 1.0 ? 1.0 : (1.0 - x) / (1.0 - r);
            const double v = peak * std::clamp(shape, 0.0, 1.0);
            auto& cell = s.values[static_cast<std::size_t>(k)];
            cell = std::max(cell, v);
        }
    };

    rng events(derive_seed(seed, 1));
    rng gaps(derive_seed(seed, 2));
    std::vector<double> g(n), zt(n), zd(n), zp(n);
    auto correlate = [&](std::vector<double>& z) {
        for (std::size_t i = 0; i < n; ++i)
            g[i] = events.normal();
        for (std::size_t i = 0; i < n; ++i) {
            double acc = 0.0;
            for (std::size_t k = 0; k <= i; ++k)
                acc += factor[i][k] * g[k];
            z[i] = acc;
        }
    };

    for (std::size_t slot_index = 0; slot_index < slots; ++slot_index) {
        correlate(zt);
        correlate(zd);
        correlate(zp);
        const double t0 = (static_cast<double>(slot_index) + events.uniform()) * slot;
        for (std::size_t i = 0; i < n; ++i) {
            if (!(zt[i] < trigger_q[i]))
                continue;
            const auto& m = spec.sites[i];
            const double duration = std::exp(m.duration_mu + m.duration_sigma * zd[i]);
            const double peak = std::exp(m.peak_mu + m.peak_sigma * zp[i]);
            paint_event(out[i].series, m, t0, duration, peak);
        }
        for (std::size_t i = 0; i < n; ++i) {
            const double u = gaps.uniform();
            const double when = gaps.uniform();
            if (!(u < gap_p[i]) || spec.sites[i].gap_duration_s <= 0.0)
                continue;
            const double g0 = (static_cast<double>(slot_index) + when) * slot;
            auto [first, last] = sample_range(g0, g0 + spec.sites[i].gap_duration_s);
            for (std::int64_t k = first; k <= last; ++k)
                out[i].series.valid[static_cast<std::size_t>(k)] = 0;
        }
    }

    for (auto& s : out)
        for (std::size_t k = 0; k < grid.count; ++k)
            if (!s.series.valid[k])
                s.series.values[k] = 0.0;

    return series_set(grid, std::move(out));
}

} // namespace sgd

#endif
