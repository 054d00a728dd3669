#ifndef SGD_SCENARIO_HPP
#define SGD_SCENARIO_HPP

#include "sgd/engine.hpp"
#include "sgd/error.hpp"
#include "sgd/timeseries.hpp"

#include <algorithm>
#include <functional>
#include <future>
#include <set>
#include <span>
#include <string>
#include <unordered_set>
#include <vector>

namespace sgd {

/// Calls f(0..n-1) and returns the results in index order, optionally on
/// separate threads.
template <class F>
auto ordered_map(std::size_t n, F&& f, bool parallel) {
    using R = std::invoke_result_t<F&, std::size_t>;
    std::vector<R> out;
    out.reserve(n);
    if (!parallel || n < 2) {
        for (std::size_t i = 0; i < n; ++i)
            out.push_back(f(i));
        return out;
    }
    std::vector<std::future<R>> jobs;
    jobs.reserve(n);
    for (std::size_t i = 0; i < n; ++i)
        jobs.push_back(std::async(std::launch::async, [&f, i] { return f(i); }));
    for (auto& j : jobs)
        out.push_back(j.get());
    return out;
}

inline std::size_t distinct_regions(std::span<const gateway_config> roster,
                                    std::span<const std::size_t> members) {
    std::set<std::string> regions;
    for (auto i : members)
        regions.insert(roster[i].region_tag);
    return regions.size();
}

/// All size-n subsets of the roster (as ascending roster indices, in
/// lexicographic order) covering at least `min_regions` distinct regions.
inline std::vector<std::vector<std::size_t>> enumerate_combinations(std::span<const gateway_config> roster,
                                                                    std::size_t n, std::size_t min_regions) {
    if (n > roster.size())
        throw config_error("subset size exceeds roster size");
    std::vector<std::vector<std::size_t>> out;
    std::vector<std::size_t> pick;
    std::function<void(std::size_t)> rec = [&](std::size_t from) {
        if (pick.size() == n) {
            if (distinct_regions(roster, pick) >= min_regions)
                out.push_back(pick);
            return;
        }
        for (std::size_t i = from; i + (n - pick.size()) <= roster.size(); ++i) {
            pick.push_back(i);
            rec(i + 1);
            pick.pop_back();
        }
    };
    rec(0);
    return out;
}

/// Disjoint sub-networks of one roster. Category 1: every sub-network has
/// members from distinct regions; category 2: some sub-network contains a
/// same-region pair.
class cluster_plan {
public:
    explicit cluster_plan(std::vector<network_config> sub_networks)
        : subs_(std::move(sub_networks)) {
        if (subs_.empty())
            throw plan_error("a cluster plan needs at least one sub-network");
        std::unordered_set<std::string> seen;
        category_ = 1;
        for (const auto& net : subs_) {
            std::set<std::string> regions;
            for (const auto& g : net.gateways) {
                if (!seen.insert(g.site_id).second)
                    throw plan_error("gateway '" + g.site_id + "' belongs to more than one sub-network");
                regions.insert(g.region_tag);
            }
            if (regions.size() != net.gateways.size())
                category_ = 2;
        }
    }

    /// Also checks that the sub-networks cover exactly `roster`.
    cluster_plan(std::vector<network_config> sub_networks, std::span<const gateway_config> roster)
        : cluster_plan(std::move(sub_networks)) {
        std::set<std::string> want, have;
        for (const auto& g : roster)
            want.insert(g.site_id);
        for (const auto& net : subs_)
            for (const auto& g : net.gateways)
                have.insert(g.site_id);
        if (want != have)
            throw plan_error("sub-networks do not partition the roster");
    }

    std::span<const network_config> sub_networks() const noexcept { return subs_; }
    int category() const noexcept { return category_; }

    std::string label() const {
        std::string s;
        for (std::size_t i = 0; i < subs_.size(); ++i) {
            if (i)
                s += " | ";
            for (std::size_t j = 0; j < subs_[i].gateways.size(); ++j) {
                if (j)
                    s += "-";
                s += subs_[i].gateways[j].site_id;
            }
        }
        return s;
    }

private:
    std::vector<network_config> subs_;
    int category_ = 1;
};

/// Every way to split `tmpl.gateways` into sub-networks of
/// `active + redundant` gateways each. The other fields of `tmpl` (delay,
/// policy, freeze) are copied into every sub-network. Order: groups keep
/// roster order; the first group always holds the first unassigned gateway.
inline std::vector<cluster_plan> enumerate_partitions(const network_config& tmpl, std::size_t active,
                                                      std::size_t redundant) {
    const auto& roster = tmpl.gateways;
    const std::size_t size = active + redundant;
    if (size == 0 || roster.size() % size != 0)
        throw plan_error("roster size is not a multiple of the sub-network size");

    std::vector<cluster_plan> out;
    std::vector<std::uint8_t> used(roster.size(), 0);
    std::vector<std::vector<std::size_t>> groups;
    std::vector<std::size_t> current;

    std::function<void()> next_group;
    std::function<void(std::size_t)> fill = [&](std::size_t from) {
        if (current.size() == size) {
            groups.push_back(current);
            auto saved = current;
            current.clear();
            next_group();
            current = saved;
            groups.pop_back();
            return;
        }
        for (std::size_t i = from; i < roster.size(); ++i) {
            if (used[i])
                continue;
            used[i] = 1;
            current.push_back(i);
            fill(i + 1);
            current.pop_back();
            used[i] = 0;
        }
    };
    next_group = [&] {
        const auto first = std::find(used.begin(), used.end(), std::uint8_t{0});
        if (first == used.end()) {
            std::vector<network_config> subs;
            for (const auto& grp : groups) {
                network_config net = tmpl;
                net.gateways.clear();
                net.initial_active.clear();
                net.active_count = active;
                net.redundant_count = redundant;
                for (auto i : grp)
                    net.gateways.push_back(roster[i]);
                subs.push_back(std::move(net));
            }
            out.emplace_back(std::move(subs), roster);
            return;
        }
        const auto i = static_cast<std::size_t>(first - used.begin());
        used[i] = 1;
        current.push_back(i);
        fill(i + 1);
        current.pop_back();
        used[i] = 0;
    };
    next_group();
    return out;
}

struct pair_result {
    std::vector<emulation_result> sub_results;
    /// Unweighted mean of the sub-network availabilities.
    double pair_availability = 100.0;
    std::size_t pair_switches = 0;
    int category = 1;
};

/// Pair metrics from independent sub-network runs.
inline pair_result aggregate_pair(std::vector<emulation_result> sub_results, int category) {
    if (sub_results.empty())
        throw plan_error("no sub-network results to aggregate");
    pair_result r;
    r.category = category;
    r.sub_results = std::move(sub_results);
    double sum = 0.0;
    for (const auto& s : r.sub_results) {
        sum += s.availability_percent;
        r.pair_switches += s.network_switches;
    }
    r.pair_availability = sum / static_cast<double>(r.sub_results.size());
    return r;
}

inline pair_result evaluate_cluster_plan(const series_set& set, const cluster_plan& plan,
                                         bool parallel = false) {
    const auto subs = plan.sub_networks();
    return aggregate_pair(
        ordered_map(subs.size(), [&](std::size_t i) { return emulate(set, subs[i]); }, parallel),
        plan.category());
}

struct sweep_point {
    double sst_db = 0.0;
    double availability_percent = 100.0;
    std::size_t network_switches = 0;
    double fade_outage_s = 0.0;
    double switching_outage_s = 0.0;
};

struct sweep_result {
    std::vector<sweep_point> points;
};

/// How a sweep applies the swept threshold to the gateways.
enum class sweep_mode {
    common_dimensioning,  // SST = FM = value for every gateway
    threshold_only,       // SST = value, FM kept (must stay >= SST)
};

/// One emulation per SST value, all with the template's seed.
inline sweep_result sst_sweep(const series_set& set, const network_config& tmpl,
                              std::span<const double> sst_values,
                              sweep_mode mode = sweep_mode::common_dimensioning, bool parallel = false) {
    for (std::size_t i = 1; i < sst_values.size(); ++i)
        if (!(sst_values[i] > sst_values[i - 1]))
            throw config_error("SST values must be strictly ascending");
    sweep_result out;
    auto results = ordered_map(
        sst_values.size(),
        [&](std::size_t i) {
            network_config cfg = tmpl;
            for (auto& g : cfg.gateways) {
                g.switching_threshold_db = sst_values[i];
                if (mode == sweep_mode::common_dimensioning)
                    g.fade_margin_db = sst_values[i];
            }
            const auto r = emulate(set, cfg);
            return sweep_point{sst_values[i], r.availability_percent, r.network_switches, r.fade_outage_s,
                               r.switching_outage_s};
        },
        parallel);
    out.points = std::move(results);
    return out;
}

struct histogram_bin {
    std::size_t lo = 0;  // inclusive
    std::size_t hi = 0;  // exclusive
    std::size_t days = 0;
};

struct daily_breakdown_result {
    std::vector<daily_stats> days;
    /// Days with at least one switch, binned {1}, [2,4), [4,6), ...
    std::vector<histogram_bin> histogram;
    std::size_t days_with_switches = 0;
    std::size_t days_with_outages = 0;
};

inline daily_breakdown_result daily_breakdown(const emulation_result& result) {
    daily_breakdown_result out;
    out.days = result.daily;
    std::size_t max_switches = 0;
    for (const auto& d : result.daily) {
        if (d.switches > 0)
            ++out.days_with_switches;
        if (d.fade_outage_samples + d.switching_outage_samples > 0)
            ++out.days_with_outages;
        max_switches = std::max(max_switches, d.switches);
    }
    if (max_switches == 0)
        return out;
    out.histogram.push_back({1, 2, 0});
    for (std::size_t lo = 2; lo <= max_switches; lo += 2)
        out.histogram.push_back({lo, lo + 2, 0});
    for (const auto& d : result.daily) {
        if (d.switches == 0)
            continue;
        const std::size_t bin = d.switches == 1 ? 0 : d.switches / 2;
        ++out.histogram[bin].days;
    }
    return out;
}

struct no_sgd_row {
    std::vector<std::size_t> members;  // roster indices
    std::vector<double> availability_percent;  // one per fade margin
};

/// Availability without diversity for every admissible N-subset of the
/// roster, at each fade margin (applied to all members).
inline std::vector<no_sgd_row> no_sgd_combinations(const series_set& set,
                                                   std::span<const gateway_config> roster, std::size_t n,
                                                   std::size_t min_regions,
                                                   std::span<const double> fade_margins_db) {
    std::vector<no_sgd_row> rows;
    for (auto& subset : enumerate_combinations(roster, n, min_regions)) {
        no_sgd_row row{subset, {}};
        for (double fm : fade_margins_db) {
            std::vector<gateway_config> gws;
            for (auto i : subset) {
                auto g = roster[i];
                g.fade_margin_db = fm;
                gws.push_back(g);
            }
            row.availability_percent.push_back(availability_no_sgd(set, gws));
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

} // namespace sgd

#endif
