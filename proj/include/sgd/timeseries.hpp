#ifndef SGD_TIMESERIES_HPP
#define SGD_TIMESERIES_HPP

#include "sgd/error.hpp"
#include "sgd/time.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <unordered_set>
#include <utility>
#include <vector>

namespace sgd {

/// Site description. `region_tag` is a free-form climatic-region label.
struct site_meta {
    std::string site_id;
    std::string region_tag;
    double latitude_deg = 0.0;
    double longitude_deg = 0.0;
    double elevation_deg = 90.0;
    double frequency_ghz = 40.0;

    void validate() const {
        if (site_id.empty())
            throw config_error("site id must not be empty");
        if (!(elevation_deg > 0.0 && elevation_deg <= 90.0))
            throw config_error("site '" + site_id + "': elevation angle must be in (0, 90] degrees");
        if (!(frequency_ghz > 0.0))
            throw config_error("site '" + site_id + "': frequency must be positive");
    }
};

/// Excess attenuation samples (dB) of one site with per-sample validity.
struct attenuation_series {
    std::string site_id;
    std::vector<double> values;
    std::vector<std::uint8_t> valid;

    std::size_t size() const noexcept { return values.size(); }
    bool is_valid(std::size_t k) const noexcept { return valid[k] != 0; }

    std::size_t valid_count() const noexcept {
        return static_cast<std::size_t>(std::count(valid.begin(), valid.end(), std::uint8_t{1}));
    }
};

/// Marks non-finite valid samples invalid and clamps negative ones to 0 dB.
/// Returns the number of clamped samples.
inline std::size_t sanitize(attenuation_series& s) {
    std::size_t clamped = 0;
    for (std::size_t k = 0; k < s.values.size(); ++k) {
        if (!s.valid[k])
            continue;
        double& v = s.values[k];
        if (!std::isfinite(v)) {
            s.valid[k] = 0;
        } else if (v < 0.0) {
            v = 0.0;
            ++clamped;
        }
    }
    return clamped;
}

struct site_series {
    site_meta meta;
    attenuation_series series;
};

/// Series of several sites sharing one grid.
class series_set {
public:
    series_set() = default;

    series_set(time_grid grid, std::vector<site_series> sites)
        : grid_(grid), sites_(std::move(sites)) {
        if (!(grid_.step.num() > 0))
            throw data_error("grid step must be positive");
        std::unordered_set<std::string> seen;
        for (auto& s : sites_) {
            if (s.series.site_id.empty())
                s.series.site_id = s.meta.site_id;
            if (s.series.site_id != s.meta.site_id)
                throw data_error("series id '" + s.series.site_id + "' does not match site '" +
                                 s.meta.site_id + "'");
            if (!seen.insert(s.meta.site_id).second)
                throw data_error("duplicate site id '" + s.meta.site_id + "'");
            if (s.series.values.size() != grid_.count || s.series.valid.size() != grid_.count)
                throw data_error("series '" + s.meta.site_id + "' does not conform to the grid");
            for (std::size_t k = 0; k < grid_.count; ++k) {
                if (s.series.valid[k] && !(std::isfinite(s.series.values[k]) && s.series.values[k] >= 0.0))
                    throw data_error("series '" + s.meta.site_id +
                                     "' has a valid sample that is negative or not finite");
            }
        }
    }

    const time_grid& grid() const noexcept { return grid_; }
    std::span<const site_series> sites() const noexcept { return sites_; }
    std::size_t size() const noexcept { return sites_.size(); }
    const site_series& operator[](std::size_t i) const { return sites_[i]; }

    std::optional<std::size_t> find(std::string_view site_id) const noexcept {
        for (std::size_t i = 0; i < sites_.size(); ++i)
            if (sites_[i].meta.site_id == site_id)
                return i;
        return std::nullopt;
    }

    const site_series& at(std::string_view site_id) const {
        auto i = find(site_id);
        if (!i)
            throw config_error("no series for site '" + std::string(site_id) + "'");
        return sites_[*i];
    }

    /// 1 where every series is valid.
    std::vector<std::uint8_t> concurrent_valid_mask() const {
        std::vector<std::uint8_t> mask(grid_.count, 1);
        for (const auto& s : sites_)
            for (std::size_t k = 0; k < grid_.count; ++k)
                mask[k] &= s.series.valid[k];
        return mask;
    }

    std::size_t concurrent_valid_count() const {
        const auto m = concurrent_valid_mask();
        return static_cast<std::size_t>(std::count(m.begin(), m.end(), std::uint8_t{1}));
    }

    double concurrent_validity_fraction() const {
        if (grid_.count == 0)
            return 0.0;
        return static_cast<double>(concurrent_valid_count()) / static_cast<double>(grid_.count);
    }

private:
    time_grid grid_;
    std::vector<site_series> sites_;
};

/// A site series on its own native grid, as produced by ingestion.
struct native_series {
    site_meta meta;
    attenuation_series series;
    time_grid grid;
    std::size_t clamped = 0;
};

/// How several native samples falling in one target bin are reduced.
enum class bin_reducer { mean, max };

namespace detail {

inline std::int64_t checked_mul(std::int64_t a, std::int64_t b) {
    std::int64_t r = 0;
    if (__builtin_mul_overflow(a, b, &r))
        throw span_error("time arithmetic overflow while resampling");
    return r;
}

} // namespace detail

/// Resamples every input onto one grid at `target_step` covering the
/// intersection of the input spans.
///
/// Coarser target: each target sample k summarises the native samples with
/// instants in [t_k, t_k + target_step); samples with no valid native
/// contribution are invalid. Finer target: sample k takes the latest native
/// sample at or before t_k, which is held for at most one native step.
inline series_set harmonize(std::span<const native_series> inputs, step_seconds target_step,
                            bin_reducer reducer = bin_reducer::mean) {
    if (inputs.empty())
        throw span_error("nothing to harmonize");

    // Work in integer ticks of 1/L seconds relative to the common start.
    std::int64_t L = target_step.den();
    for (const auto& in : inputs) {
        if (in.grid.count == 0)
            throw span_error("series '" + in.meta.site_id + "' is empty");
        L = std::lcm(L, in.grid.step.den());
    }
    std::int64_t lo = std::numeric_limits<std::int64_t>::min();
    for (const auto& in : inputs)
        lo = std::max(lo, in.grid.start_epoch);

    std::optional<std::int64_t> hi_rel;
    for (const auto& in : inputs) {
        const std::int64_t nt = detail::checked_mul(in.grid.step.num(), L / in.grid.step.den());
        const std::int64_t start_rel = detail::checked_mul(in.grid.start_epoch - lo, L);
        const std::int64_t last_rel =
            start_rel + detail::checked_mul(static_cast<std::int64_t>(in.grid.count - 1), nt);
        hi_rel = hi_rel ? std::min(*hi_rel, last_rel) : last_rel;
    }
    if (*hi_rel < 0)
        throw span_error("series spans do not overlap");

    const std::int64_t tt = detail::checked_mul(target_step.num(), L / target_step.den());
    const std::size_t count = static_cast<std::size_t>(*hi_rel / tt) + 1;
    const time_grid grid{lo, target_step, count};

    std::vector<site_series> out;
    out.reserve(inputs.size());
    for (const auto& in : inputs) {
        const std::int64_t nt = detail::checked_mul(in.grid.step.num(), L / in.grid.step.den());
        const std::int64_t start_rel = detail::checked_mul(in.grid.start_epoch - lo, L);
        const auto& src = in.series;
        const std::size_t n = in.grid.count;

        attenuation_series dst;
        dst.site_id = in.meta.site_id;
        dst.values.assign(count, 0.0);
        dst.valid.assign(count, 0);

        if (nt == tt && start_rel % tt == 0) {
            // Aligned, same step: plain copy of the overlapping window.
            const std::int64_t first = -start_rel / tt;
            for (std::size_t k = 0; k < count; ++k) {
                const std::size_t j = static_cast<std::size_t>(first + static_cast<std::int64_t>(k));
                if (j < n) {
                    dst.values[k] = src.values[j];
                    dst.valid[k] = src.valid[j];
                }
            }
        } else if (tt >= nt) {
            std::vector<double> acc(count, 0.0);
            std::vector<std::uint32_t> hits(count, 0);
            for (std::size_t j = 0; j < n; ++j) {
                const std::int64_t off = start_rel + static_cast<std::int64_t>(j) * nt;
                if (off < 0)
                    continue;
                const std::size_t bin = static_cast<std::size_t>(off / tt);
                if (bin >= count)
                    break;
                if (!src.valid[j])
                    continue;
                if (reducer == bin_reducer::mean)
                    acc[bin] += src.values[j];
                else
                    acc[bin] = hits[bin] == 0 ? src.values[j] : std::max(acc[bin], src.values[j]);
                ++hits[bin];
            }
            for (std::size_t k = 0; k < count; ++k) {
                if (hits[k] == 0)
                    continue;
                dst.valid[k] = 1;
                dst.values[k] = reducer == bin_reducer::mean ? acc[k] / hits[k] : acc[k];
            }
        } else {
            for (std::size_t k = 0; k < count; ++k) {
                const std::int64_t off = static_cast<std::int64_t>(k) * tt - start_rel;
                if (off < 0)
                    continue;
                const std::size_t j = static_cast<std::size_t>(off / nt);
                if (j < n && src.valid[j]) {
                    dst.values[k] = src.values[j];
                    dst.valid[k] = 1;
                }
            }
        }
        out.push_back({in.meta, std::move(dst)});
    }
    return series_set(grid, std::move(out));
}

/// Convenience overload: re-grids an existing set.
inline series_set harmonize(const series_set& set, step_seconds target_step,
                            bin_reducer reducer = bin_reducer::mean) {
    std::vector<native_series> in;
    in.reserve(set.size());
    for (const auto& s : set.sites())
        in.push_back({s.meta, s.series, set.grid(), 0});
    return harmonize(in, target_step, reducer);
}

} // namespace sgd

#endif
