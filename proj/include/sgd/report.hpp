#ifndef SGD_REPORT_HPP
#define SGD_REPORT_HPP

#include "sgd/engine.hpp"
#include "sgd/propstats.hpp"
#include "sgd/scenario.hpp"
#include "sgd/time.hpp"

#include <json.hpp>

#include <charconv>
#include <ostream>
#include <span>
#include <string>
#include <vector>

namespace sgd {

inline constexpr const char* tool_name = "sgdemu";
inline constexpr const char* tool_version = "0.1.0";
inline constexpr int schema_version = 1;

using json = nlohmann::ordered_json;

/// Fixed 4-decimal rendering used for every real number in CSV output.
inline std::string fixed4(double v) {
    char buf[64];
    auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::fixed, 4);
    std::string s(buf, p);
    if (s == "-0.0000")
        s = "0.0000";
    return s;
}

inline std::string csv_optional(const std::optional<double>& v) { return v ? fixed4(*v) : std::string{}; }

inline json optional_json(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

// ---- propagation statistics ----------------------------------------------

inline json to_json(const exceedance_curve& c) {
    return {{"thresholds_db", c.thresholds_db},
            {"exceedance_fraction", c.fraction},
            {"exceedance_minutes", c.minutes},
            {"valid_samples", c.valid_samples}};
}

inline json to_json(const fade_summary& f) {
    return {{"threshold_db", f.threshold_db},
            {"fading_percent", f.fading_percent},
            {"fade_minutes", f.fading_minutes()},
            {"fades", f.count()},
            {"mean_duration_s", optional_json(f.mean_duration_s)}};
}

inline json to_json(const joint_exceedance_table& t) {
    json pairs = json::array();
    for (const auto& p : t.pairs)
        pairs.push_back({{"site_a", p.site_a}, {"site_b", p.site_b}, {"joint_minutes", p.minutes}});
    return {{"thresholds_db", t.thresholds_db}, {"pairs", pairs}};
}

/// exceedance CSV: threshold_db,exceedance_percent,exceedance_minutes
inline void write_exceedance_csv(std::ostream& os, const exceedance_curve& c) {
    os << "threshold_db,exceedance_percent,exceedance_minutes\n";
    for (std::size_t i = 0; i < c.thresholds_db.size(); ++i)
        os << fixed4(c.thresholds_db[i]) << ',' << fixed4(100.0 * c.fraction[i]) << ','
           << fixed4(c.minutes[i]) << '\n';
}

struct site_fade_rows {
    std::string site_id;
    std::vector<fade_summary> summaries;
};

/// Fading-time table: one row per site and threshold.
inline void write_fade_table_csv(std::ostream& os, std::span<const site_fade_rows> rows) {
    os << "location,threshold_db,fading_time_percent,fade_time_minutes,fades,mean_duration_s\n";
    for (const auto& site : rows)
        for (const auto& f : site.summaries)
            os << site.site_id << ',' << fixed4(f.threshold_db) << ',' << fixed4(f.fading_percent) << ','
               << fixed4(f.fading_minutes()) << ',' << f.count() << ',' << csv_optional(f.mean_duration_s)
               << '\n';
}

struct fade_duration_curve {
    std::string site_id;
    double threshold_db = 0.0;
    std::vector<double> durations_s;
    std::vector<double> fraction;  // empty when the site has no fades
};

inline json to_json(const fade_duration_curve& c) {
    return {{"site", c.site_id},
            {"threshold_db", c.threshold_db},
            {"durations_s", c.durations_s},
            {"fading_time_fraction", c.fraction}};
}

/// Fade-duration plot data: duration_s,<site>... (empty cell: no fades)
inline void write_fade_duration_csv(std::ostream& os, std::span<const fade_duration_curve> curves) {
    if (curves.empty())
        return;
    os << "duration_s";
    for (const auto& c : curves)
        os << ',' << c.site_id;
    os << '\n';
    for (std::size_t i = 0; i < curves.front().durations_s.size(); ++i) {
        os << fixed4(curves.front().durations_s[i]);
        for (const auto& c : curves)
            os << ',' << (c.fraction.empty() ? std::string{} : fixed4(c.fraction[i]));
        os << '\n';
    }
}

/// Joint-exceedance table: gw_pair,<threshold columns in minutes>
inline void write_joint_exceedance_csv(std::ostream& os, const joint_exceedance_table& t) {
    os << "gw_pair";
    for (double th : t.thresholds_db)
        os << ",minutes_above_" << fixed4(th) << "_db";
    os << '\n';
    for (const auto& p : t.pairs) {
        os << p.site_a << '-' << p.site_b;
        for (double m : p.minutes)
            os << ',' << fixed4(m);
        os << '\n';
    }
}

// ---- emulation ------------------------------------------------------------

inline json to_json(const daily_stats& d) {
    return {{"date", format_date(d.day)},
            {"valid_seconds", d.valid_seconds},
            {"fade_outage_s", d.fade_outage_s},
            {"switching_outage_s", d.switching_outage_s},
            {"switches", d.switches},
            {"availability_percent", optional_json(d.availability_percent)}};
}

inline json to_json(const emulation_result& r, bool include_events = false) {
    json per_gw = json::object();
    json margin = json::object();
    for (std::size_t i = 0; i < r.gateway_ids.size(); ++i) {
        per_gw[r.gateway_ids[i]] = r.per_gw_switches[i];
        margin[r.gateway_ids[i]] = r.standby_margin_fraction[i];
    }
    json daily = json::array();
    for (const auto& d : r.daily)
        daily.push_back(to_json(d));
    json initial = json::array();
    for (auto i : r.initial_active)
        initial.push_back(r.gateway_ids[i]);
    json j = {{"gateways", r.gateway_ids},
              {"initial_active", initial},
              {"selection_policy", to_string(r.policy.kind)},
              {"requested_delay_s", r.requested_delay_s},
              {"delay_s", r.delay_s},
              {"valid_time_s", r.valid_time_s},
              {"availability_percent", r.availability_percent},
              {"fade_outage_s", r.fade_outage_s},
              {"switching_outage_s", r.switching_outage_s},
              {"network_fade_count", r.network_fade_count},
              {"network_mean_fade_duration_s", optional_json(r.network_mean_fade_duration_s)},
              {"network_switches", r.network_switches},
              {"per_gw_switches", per_gw},
              {"standby_margin_fraction", margin},
              {"daily", daily},
              {"warnings", r.warnings}};
    if (include_events) {
        json ev = json::array();
        for (const auto& e : r.switch_events)
            ev.push_back({{"time_utc", format_sample_utc(r.grid, e.time_index)},
                          {"from_gw", e.from_gw},
                          {"to_gw", e.to_gw}});
        j["switch_events"] = ev;
    }
    return j;
}

/// Switch-event log: time_utc,from_gw,to_gw
inline void write_switch_events_csv(std::ostream& os, const emulation_result& r) {
    os << "time_utc,from_gw,to_gw\n";
    for (const auto& e : r.switch_events)
        os << format_sample_utc(r.grid, e.time_index) << ',' << e.from_gw << ',' << e.to_gw << '\n';
}

struct labeled_run {
    double delay_s = 0.0;
    double sst_db = 0.0;
    emulation_result result;
};

/// Network performance table; one column per (delay, SST) run, one metric
/// per row.
inline void write_network_table_csv(std::ostream& os, std::span<const labeled_run> runs) {
    os << "metric";
    for (const auto& run : runs)
        os << ",w=" << fixed4(run.delay_s) << "s/sst=" << fixed4(run.sst_db) << "db";
    os << '\n';
    auto row = [&](const char* name, auto&& cell) {
        os << name;
        for (const auto& run : runs)
            os << ',' << cell(run.result);
        os << '\n';
    };
    row("network_availability_percent", [](const emulation_result& r) { return fixed4(r.availability_percent); });
    row("network_fade_outage_minutes", [](const emulation_result& r) { return fixed4(r.fade_outage_s / 60.0); });
    row("network_switching_outage_minutes",
        [](const emulation_result& r) { return fixed4(r.switching_outage_s / 60.0); });
    row("total_outage_minutes",
        [](const emulation_result& r) { return fixed4((r.fade_outage_s + r.switching_outage_s) / 60.0); });
    row("number_of_network_fades", [](const emulation_result& r) { return std::to_string(r.network_fade_count); });
    row("number_of_days_with_outages", [](const emulation_result& r) {
        return std::to_string(daily_breakdown(r).days_with_outages);
    });
    row("network_mean_fade_duration_s",
        [](const emulation_result& r) { return csv_optional(r.network_mean_fade_duration_s); });
    row("number_of_switches", [](const emulation_result& r) { return std::to_string(r.network_switches); });
    row("number_of_days_with_switches", [](const emulation_result& r) {
        return std::to_string(daily_breakdown(r).days_with_switches);
    });
}

/// Per-gateway switch counts; one column per run, plus total and network rows.
inline void write_gateway_switches_csv(std::ostream& os, std::span<const labeled_run> runs) {
    if (runs.empty())
        return;
    os << "location";
    for (const auto& run : runs)
        os << ",w=" << fixed4(run.delay_s) << "s/sst=" << fixed4(run.sst_db) << "db";
    os << '\n';
    const auto& ids = runs.front().result.gateway_ids;
    for (std::size_t i = 0; i < ids.size(); ++i) {
        os << ids[i];
        for (const auto& run : runs)
            os << ',' << run.result.per_gw_switches[i];
        os << '\n';
    }
    os << "total";
    for (const auto& run : runs)
        os << ',' << 2 * run.result.network_switches;
    os << "\nnetwork_switches";
    for (const auto& run : runs)
        os << ',' << run.result.network_switches;
    os << '\n';
}

inline json to_json(const daily_breakdown_result& d) {
    json bins = json::array();
    for (const auto& b : d.histogram)
        bins.push_back({{"lo", b.lo}, {"hi", b.hi}, {"days", b.days}});
    return {{"days_with_switches", d.days_with_switches},
            {"days_with_outages", d.days_with_outages},
            {"histogram", bins}};
}

/// Daily plot data: date,switches,availability_percent
inline void write_daily_csv(std::ostream& os, const daily_breakdown_result& d) {
    os << "date,switches,availability_percent\n";
    for (const auto& day : d.days)
        os << format_date(day.day) << ',' << day.switches << ',' << csv_optional(day.availability_percent)
           << '\n';
}

/// Days binned by switches per day: bin,lo,hi,days
inline void write_switch_histogram_csv(std::ostream& os, const daily_breakdown_result& d) {
    os << "bin,lo,hi,days\n";
    for (const auto& b : d.histogram) {
        if (b.lo == 1)
            os << "{1}";
        else
            os << '[' << b.lo << ';' << b.hi << ')';
        os << ',' << b.lo << ',' << b.hi << ',' << b.days << '\n';
    }
}

inline json to_json(const sweep_result& s) {
    json pts = json::array();
    for (const auto& p : s.points)
        pts.push_back({{"sst_db", p.sst_db},
                       {"availability_percent", p.availability_percent},
                       {"network_switches", p.network_switches},
                       {"fade_outage_s", p.fade_outage_s},
                       {"switching_outage_s", p.switching_outage_s}});
    return {{"points", pts}};
}

/// SST sweep plot data: sst_db,availability_percent,network_switches
inline void write_sweep_csv(std::ostream& os, const sweep_result& s) {
    os << "sst_db,availability_percent,network_switches\n";
    for (const auto& p : s.points)
        os << fixed4(p.sst_db) << ',' << fixed4(p.availability_percent) << ',' << p.network_switches << '\n';
}

struct labeled_pair {
    std::size_t index = 0;
    double sst_db = 0.0;
    cluster_plan plan;
    pair_result result;
};

inline json to_json(const labeled_pair& p) {
    json subs = json::array();
    const auto nets = p.plan.sub_networks();
    for (std::size_t i = 0; i < nets.size(); ++i) {
        json ids = json::array();
        for (const auto& g : nets[i].gateways)
            ids.push_back(g.site_id);
        subs.push_back({{"gateways", ids},
                        {"availability_percent", p.result.sub_results[i].availability_percent},
                        {"network_switches", p.result.sub_results[i].network_switches}});
    }
    return {{"pair", p.index},
            {"category", p.result.category},
            {"sst_db", p.sst_db},
            {"sub_networks", subs},
            {"pair_availability_percent", p.result.pair_availability},
            {"pair_switches", p.result.pair_switches}};
}

/// Sub-network pair table: one row per sub-network plus one pair row.
inline void write_cluster_table_csv(std::ostream& os, std::span<const labeled_pair> pairs) {
    os << "pair,category,sst_db,gw_locations,availability_percent,number_of_switches\n";
    for (const auto& p : pairs) {
        const auto nets = p.plan.sub_networks();
        for (std::size_t i = 0; i < nets.size(); ++i) {
            os << p.index << ',' << p.result.category << ',' << fixed4(p.sst_db) << ',';
            for (std::size_t j = 0; j < nets[i].gateways.size(); ++j)
                os << (j ? "-" : "") << nets[i].gateways[j].site_id;
            os << ',' << fixed4(p.result.sub_results[i].availability_percent) << ','
               << p.result.sub_results[i].network_switches << '\n';
        }
        os << p.index << ',' << p.result.category << ',' << fixed4(p.sst_db) << ",pair_performance,"
           << fixed4(p.result.pair_availability) << ',' << p.result.pair_switches << '\n';
    }
}

struct no_sgd_table {
    std::vector<double> fade_margins_db;
    std::vector<std::vector<std::string>> members;
    std::vector<std::vector<double>> availability_percent;
};

inline json to_json(const no_sgd_table& t) {
    json rows = json::array();
    for (std::size_t i = 0; i < t.members.size(); ++i)
        rows.push_back({{"gateways", t.members[i]}, {"availability_percent", t.availability_percent[i]}});
    return {{"fade_margins_db", t.fade_margins_db}, {"combinations", rows}};
}

/// Availability without diversity: gw_1..gw_n,<one column per FM>, plus an average row.
inline void write_no_sgd_csv(std::ostream& os, const no_sgd_table& t) {
    const std::size_t n = t.members.empty() ? 0 : t.members.front().size();
    for (std::size_t i = 0; i < n; ++i)
        os << "gw_" << (i + 1) << ',';
    os << "combination";
    for (double fm : t.fade_margins_db)
        os << ",availability_percent_fm_" << fixed4(fm) << "_db";
    os << '\n';
    std::vector<double> sums(t.fade_margins_db.size(), 0.0);
    for (std::size_t r = 0; r < t.members.size(); ++r) {
        for (const auto& id : t.members[r])
            os << id << ',';
        os << r + 1;
        for (std::size_t c = 0; c < t.fade_margins_db.size(); ++c) {
            os << ',' << fixed4(t.availability_percent[r][c]);
            sums[c] += t.availability_percent[r][c];
        }
        os << '\n';
    }
    if (t.members.empty())
        return;
    for (std::size_t i = 0; i < n; ++i)
        os << ',';
    os << "average";
    for (double s : sums)
        os << ',' << fixed4(s / static_cast<double>(t.members.size()));
    os << '\n';
}

} // namespace sgd

#endif
