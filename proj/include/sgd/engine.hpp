#ifndef SGD_ENGINE_HPP
#define SGD_ENGINE_HPP

#include "sgd/error.hpp"
#include "sgd/random.hpp"
#include "sgd/time.hpp"
#include "sgd/timeseries.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <unordered_set>
#include <vector>

namespace sgd {

struct gateway_config {
    std::string site_id;
    std::string region_tag;
    double fade_margin_db = 5.0;
    double switching_threshold_db = 5.0;
};

enum class selection_kind { uniform_random, first_in_order, round_robin };

struct selection_policy {
    selection_kind kind = selection_kind::uniform_random;
    std::uint64_t seed = 0;
};

inline const char* to_string(selection_kind k) noexcept {
    switch (k) {
    case selection_kind::uniform_random: return "uniform_random";
    case selection_kind::first_in_order: return "first_in_order";
    case selection_kind::round_robin: return "round_robin";
    }
    return "unknown";
}

/// Which gateways a handover freezes: the whole network (default) or only
/// the two gateways exchanging roles.
enum class freeze_scope { network, gateway };

struct network_config {
    std::vector<gateway_config> gateways;
    std::size_t active_count = 1;     // N
    std::size_t redundant_count = 0;  // P
    double switching_delay_s = 0.0;   // w
    selection_policy policy{};
    std::vector<std::string> initial_active;  // empty: first N in order
    freeze_scope freeze = freeze_scope::network;

    void validate() const {
        if (active_count < 1)
            throw config_error("a network needs at least one active gateway");
        if (gateways.size() != active_count + redundant_count)
            throw config_error("roster has " + std::to_string(gateways.size()) +
                               " gateways but N+P = " + std::to_string(active_count + redundant_count));
        std::unordered_set<std::string> ids;
        for (const auto& g : gateways) {
            if (!ids.insert(g.site_id).second)
                throw config_error("gateway '" + g.site_id + "' listed twice");
            if (!(g.switching_threshold_db > 0.0) || !(g.switching_threshold_db <= g.fade_margin_db))
                throw config_error("gateway '" + g.site_id + "': need 0 < SST <= FM");
        }
        if (!(switching_delay_s >= 0.0) || !std::isfinite(switching_delay_s))
            throw config_error("switching delay must be a non-negative number of seconds");
        if (!initial_active.empty()) {
            if (initial_active.size() != active_count)
                throw config_error("initial active list must name exactly N gateways");
            std::unordered_set<std::string> seen;
            for (const auto& id : initial_active) {
                if (!ids.count(id))
                    throw config_error("initial active gateway '" + id + "' is not in the roster");
                if (!seen.insert(id).second)
                    throw config_error("initial active gateway '" + id + "' listed twice");
            }
        }
    }

    std::optional<std::size_t> index_of(std::string_view id) const noexcept {
        for (std::size_t i = 0; i < gateways.size(); ++i)
            if (gateways[i].site_id == id)
                return i;
        return std::nullopt;
    }

    /// Roster indices of the initially active gateways, in roster order.
    std::vector<std::size_t> initial_active_indices() const {
        std::vector<std::size_t> out;
        if (initial_active.empty()) {
            for (std::size_t i = 0; i < active_count; ++i)
                out.push_back(i);
        } else {
            for (const auto& id : initial_active)
                out.push_back(*index_of(id));
            std::sort(out.begin(), out.end());
        }
        return out;
    }
};

struct switch_event {
    std::size_t time_index = 0;
    std::string from_gw;  // active -> standby
    std::string to_gw;    // standby -> active
};

struct daily_stats {
    std::int64_t day = 0;  // days since 1970-01-01 (UTC)
    std::size_t valid_samples = 0;
    std::size_t fade_outage_samples = 0;
    std::size_t switching_outage_samples = 0;
    std::size_t switches = 0;
    double valid_seconds = 0.0;
    double fade_outage_s = 0.0;
    double switching_outage_s = 0.0;
    std::optional<double> availability_percent;
};

struct emulation_result {
    time_grid grid;
    std::vector<std::string> gateway_ids;       // roster order
    std::vector<std::size_t> initial_active;    // roster indices
    std::vector<switch_event> switch_events;
    std::size_t network_switches = 0;
    std::vector<std::size_t> per_gw_switches;   // roster order

    std::size_t valid_samples = 0;
    std::size_t fade_outage_samples = 0;
    std::size_t delay_samples = 0;
    double requested_delay_s = 0.0;
    double delay_s = 0.0;  // effective, a whole number of samples
    double valid_time_s = 0.0;
    double fade_outage_s = 0.0;
    double switching_outage_s = 0.0;
    double availability_percent = 100.0;

    std::size_t network_fade_count = 0;
    std::optional<double> network_mean_fade_duration_s;
    std::vector<daily_stats> daily;
    /// Per gateway: share of valid time spent on standby with A < SST.
    std::vector<double> standby_margin_fraction;

    selection_policy policy{};
    std::vector<std::string> warnings;

    std::size_t switches_of(std::string_view id) const {
        for (std::size_t i = 0; i < gateway_ids.size(); ++i)
            if (gateway_ids[i] == id)
                return per_gw_switches[i];
        throw config_error("unknown gateway '" + std::string(id) + "'");
    }

    std::size_t switching_outage_samples() const noexcept { return network_switches * delay_samples; }
};

/// 100 * available / valid, with available = valid - unavailable samples.
inline double availability_from_samples(std::size_t valid, std::size_t unavailable) {
    if (valid == 0)
        throw statistic_error("no concurrently valid samples");
    const auto available = static_cast<double>(valid) - static_cast<double>(unavailable);
    return 100.0 * available / static_cast<double>(valid);
}

namespace detail {

struct gw_view {
    const double* values;
    double fm;
    double sst;
};

inline std::vector<gw_view> bind_gateways(const series_set& set, const network_config& config) {
    std::vector<gw_view> out;
    out.reserve(config.gateways.size());
    for (const auto& g : config.gateways) {
        const auto idx = set.find(g.site_id);
        if (!idx)
            throw config_error("no series for gateway '" + g.site_id + "'");
        out.push_back({set[*idx].series.values.data(), g.fade_margin_db, g.switching_threshold_db});
    }
    return out;
}

inline std::size_t delay_in_samples(double delay_s, const step_seconds& step, bool& rounded) {
    const double q = delay_s * static_cast<double>(step.den()) / static_cast<double>(step.num());
    const double nearest = std::round(q);
    rounded = std::abs(q - nearest) > 1e-9;
    return static_cast<std::size_t>(rounded ? std::ceil(q) : nearest);
}

// Maps grid samples to UTC days without per-sample division.
class day_cursor {
public:
    explicit day_cursor(const time_grid& grid) : grid_(grid) {
        if (grid.count > 0)
            reset_to(0);
    }

    std::int64_t first_day() const noexcept { return first_day_; }

    /// Day offset (from first_day) of sample k; k must be non-decreasing.
    std::size_t day_offset(std::size_t k) noexcept {
        while (k >= next_boundary_) {
            ++offset_;
            next_boundary_ =
                grid_.first_index_at_or_after((first_day_ + static_cast<std::int64_t>(offset_) + 1) *
                                              seconds_per_day);
        }
        return offset_;
    }

    std::size_t day_count() const noexcept {
        if (grid_.count == 0)
            return 0;
        return static_cast<std::size_t>(utc_day(grid_.instant_floor(grid_.count - 1)) - first_day_ + 1);
    }

private:
    void reset_to(std::size_t k) {
        first_day_ = utc_day(grid_.instant_floor(k));
        offset_ = 0;
        next_boundary_ = grid_.first_index_at_or_after((first_day_ + 1) * seconds_per_day);
    }

    time_grid grid_;
    std::int64_t first_day_ = 0;
    std::size_t offset_ = 0;
    std::size_t next_boundary_ = 0;
};

} // namespace detail

/// Runs the N+P switching state machine over the concurrently valid samples
/// of `set`.
///
/// At every sample outside a freeze, each active gateway above its SST (in
/// roster order) hands over to a standby at or below its own SST, chosen by
/// the selection policy. With w = 0 all such handovers happen at once and
/// the sample is judged with the new roles. With w > 0 one handover starts
/// and the network freezes for w, the frozen samples being switching outage;
/// the next decision is taken after the window. A sample outside a freeze is
/// fade outage when an active gateway is above its FM.
inline emulation_result emulate(const series_set& set, const network_config& config) {
    config.validate();
    const auto gws = detail::bind_gateways(set, config);
    const std::size_t n_gw = gws.size();
    const time_grid& grid = set.grid();
    const auto mask = set.concurrent_valid_mask();

    emulation_result r;
    r.grid = grid;
    r.policy = config.policy;
    for (const auto& g : config.gateways)
        r.gateway_ids.push_back(g.site_id);
    r.initial_active = config.initial_active_indices();
    r.per_gw_switches.assign(n_gw, 0);
    r.requested_delay_s = config.switching_delay_s;
    bool rounded = false;
    r.delay_samples = detail::delay_in_samples(config.switching_delay_s, grid.step, rounded);
    r.delay_s = grid.duration_seconds(r.delay_samples);
    if (rounded)
        r.warnings.push_back("switching delay " + std::to_string(config.switching_delay_s) +
                             " s is not a multiple of the grid step; rounded up to " +
                             std::to_string(r.delay_samples) + " samples");
    const std::size_t w = r.delay_samples;
    const bool per_gateway_freeze = config.freeze == freeze_scope::gateway;

    std::vector<std::uint8_t> active(n_gw, 0);
    for (auto i : r.initial_active)
        active[i] = 1;
    std::vector<std::size_t> frozen_left(n_gw, 0);  // per-gateway freeze, in valid samples
    std::vector<std::size_t> windows;               // remaining samples of open handover windows
    std::vector<std::size_t> standby_margin(n_gw, 0);
    std::vector<std::size_t> candidates;
    candidates.reserve(n_gw);

    rng chooser(derive_seed(config.policy.seed, 0x5e1ec7));
    std::size_t rr_cursor = 0;

    detail::day_cursor days(grid);
    r.daily.resize(days.day_count());
    for (std::size_t d = 0; d < r.daily.size(); ++d)
        r.daily[d].day = days.first_day() + static_cast<std::int64_t>(d);

    std::size_t charged = 0;
    std::size_t last_fade_index = 0;
    bool in_fade = false;

    auto pick_standby = [&](std::size_t k) -> std::optional<std::size_t> {
        candidates.clear();
        for (std::size_t j = 0; j < n_gw; ++j)
            if (!active[j] && frozen_left[j] == 0 && !(gws[j].values[k] > gws[j].sst))
                candidates.push_back(j);
        if (candidates.empty())
            return std::nullopt;
        switch (config.policy.kind) {
        case selection_kind::first_in_order:
            return candidates.front();
        case selection_kind::uniform_random:
            return candidates[chooser.below(candidates.size())];
        case selection_kind::round_robin: {
            std::size_t chosen = candidates.front();
            for (auto j : candidates)
                if (j >= rr_cursor) {
                    chosen = j;
                    break;
                }
            rr_cursor = (chosen + 1) % n_gw;
            return chosen;
        }
        }
        return std::nullopt;
    };

    for (std::size_t k = 0; k < grid.count; ++k) {
        if (!mask[k])
            continue;
        const std::size_t day = days.day_offset(k);
        auto& today = r.daily[day];
        ++today.valid_samples;
        ++r.valid_samples;

        const bool network_frozen = !per_gateway_freeze && !windows.empty();
        if (!network_frozen) {
            for (std::size_t i = 0; i < n_gw; ++i) {
                if (!active[i] || frozen_left[i] != 0 || !(gws[i].values[k] > gws[i].sst))
                    continue;
                const auto j = pick_standby(k);
                if (!j)
                    continue;
                active[i] = 0;
                active[*j] = 1;
                ++r.per_gw_switches[i];
                ++r.per_gw_switches[*j];
                ++r.network_switches;
                ++today.switches;
                r.switch_events.push_back({k, config.gateways[i].site_id, config.gateways[*j].site_id});
                if (w > 0) {
                    windows.push_back(w);
                    if (per_gateway_freeze) {
                        frozen_left[i] = w;
                        frozen_left[*j] = w;
                    } else {
                        break;  // the network is frozen from this sample on
                    }
                }
            }
        }

        const std::size_t charge = windows.size();
        if (charge > 0) {
            charged += charge;
            today.switching_outage_samples += charge;
            in_fade = false;
        } else {
            bool outage = false;
            for (std::size_t i = 0; i < n_gw; ++i)
                if (active[i] && gws[i].values[k] > gws[i].fm) {
                    outage = true;
                    break;
                }
            if (outage) {
                ++r.fade_outage_samples;
                ++today.fade_outage_samples;
                if (!(in_fade && last_fade_index + 1 == k))
                    ++r.network_fade_count;
                in_fade = true;
                last_fade_index = k;
            } else {
                in_fade = false;
            }
        }

        for (std::size_t i = 0; i < n_gw; ++i)
            if (!active[i] && gws[i].values[k] < gws[i].sst)
                ++standby_margin[i];

        if (!windows.empty()) {
            for (auto& left : windows)
                --left;
            std::erase(windows, std::size_t{0});
        }
        for (auto& left : frozen_left)
            if (left > 0)
                --left;
    }
    if (r.valid_samples == 0)
        throw data_error("no concurrently valid samples to emulate");

    // A window still open at the end is charged in full (whole-window accounting).
    std::size_t leftover = 0;
    for (auto left : windows)
        leftover += left;
    if (leftover > 0 && !r.daily.empty()) {
        auto last = std::find_if(r.daily.rbegin(), r.daily.rend(),
                                 [](const daily_stats& d) { return d.valid_samples > 0; });
        last->switching_outage_samples += leftover;
    }
    charged += leftover;

    std::size_t gw_sum = 0;
    for (auto s : r.per_gw_switches)
        gw_sum += s;
    if (gw_sum != 2 * r.network_switches)
        throw std::logic_error("per-gateway switch counts do not sum to twice the network switches");
    if (charged != r.network_switches * w)
        throw std::logic_error("switching outage does not equal switches times delay");

    r.valid_time_s = grid.duration_seconds(r.valid_samples);
    r.fade_outage_s = grid.duration_seconds(r.fade_outage_samples);
    r.switching_outage_s = static_cast<double>(r.network_switches) * r.delay_s;
    r.availability_percent =
        availability_from_samples(r.valid_samples, r.fade_outage_samples + r.switching_outage_samples());
    if (r.network_fade_count > 0)
        r.network_mean_fade_duration_s = r.fade_outage_s / static_cast<double>(r.network_fade_count);

    for (auto& d : r.daily) {
        d.valid_seconds = grid.duration_seconds(d.valid_samples);
        d.fade_outage_s = grid.duration_seconds(d.fade_outage_samples);
        d.switching_outage_s = grid.duration_seconds(d.switching_outage_samples);
        if (d.valid_samples > 0)
            d.availability_percent = availability_from_samples(
                d.valid_samples, d.fade_outage_samples + d.switching_outage_samples);
    }
    for (std::size_t i = 0; i < n_gw; ++i)
        r.standby_margin_fraction.push_back(static_cast<double>(standby_margin[i]) /
                                            static_cast<double>(r.valid_samples));
    return r;
}

/// Availability without diversity: share of concurrently valid samples at
/// which every gateway is within its fade margin.
inline double availability_no_sgd(const series_set& set, std::span<const gateway_config> gateways) {
    std::vector<detail::gw_view> gws;
    for (const auto& g : gateways) {
        const auto idx = set.find(g.site_id);
        if (!idx)
            throw config_error("no series for gateway '" + g.site_id + "'");
        gws.push_back({set[*idx].series.values.data(), g.fade_margin_db, g.switching_threshold_db});
    }
    const auto mask = set.concurrent_valid_mask();
    std::size_t valid = 0;
    std::size_t out = 0;
    for (std::size_t k = 0; k < mask.size(); ++k) {
        if (!mask[k])
            continue;
        ++valid;
        for (const auto& g : gws)
            if (g.values[k] > g.fm) {
                ++out;
                break;
            }
    }
    return availability_from_samples(valid, out);
}

/// Replays the role history of `result` and returns, per gateway, the share
/// of valid time it spent on standby with attenuation below its SST.
inline std::vector<double> standby_margin_time(const emulation_result& result, const series_set& set,
                                               const network_config& config) {
    config.validate();
    if (result.gateway_ids.size() != config.gateways.size())
        throw config_error("result does not belong to this configuration");
    for (std::size_t i = 0; i < config.gateways.size(); ++i)
        if (result.gateway_ids[i] != config.gateways[i].site_id)
            throw config_error("result does not belong to this configuration");
    if (!(result.grid == set.grid()))
        throw config_error("result grid does not match the series set");

    const auto gws = detail::bind_gateways(set, config);
    const std::size_t n_gw = gws.size();
    std::vector<std::uint8_t> active(n_gw, 0);
    for (auto i : result.initial_active) {
        if (i >= n_gw)
            throw config_error("result does not belong to this configuration");
        active[i] = 1;
    }

    const auto mask = set.concurrent_valid_mask();
    std::vector<std::size_t> margin(n_gw, 0);
    std::size_t valid = 0;
    std::size_t next = 0;
    const auto& events = result.switch_events;
    for (std::size_t k = 0; k < mask.size(); ++k) {
        while (next < events.size() && events[next].time_index == k) {
            const auto from = config.index_of(events[next].from_gw);
            const auto to = config.index_of(events[next].to_gw);
            if (!from || !to || !active[*from] || active[*to])
                throw config_error("switch history is inconsistent with the configuration");
            active[*from] = 0;
            active[*to] = 1;
            ++next;
        }
        if (!mask[k])
            continue;
        ++valid;
        for (std::size_t i = 0; i < n_gw; ++i)
            if (!active[i] && gws[i].values[k] < gws[i].sst)
                ++margin[i];
    }
    if (next != events.size())
        throw config_error("switch history is inconsistent with the series set");
    if (valid == 0)
        throw statistic_error("no concurrently valid samples");
    std::vector<double> out;
    for (auto m : margin)
        out.push_back(static_cast<double>(m) / static_cast<double>(valid));
    return out;
}

} // namespace sgd

#endif
