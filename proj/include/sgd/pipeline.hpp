#ifndef SGD_PIPELINE_HPP
#define SGD_PIPELINE_HPP

#include "sgd/config.hpp"
#include "sgd/csv_io.hpp"
#include "sgd/engine.hpp"
#include "sgd/propstats.hpp"
#include "sgd/report.hpp"
#include "sgd/scenario.hpp"
#include "sgd/synth.hpp"

#include <filesystem>
#include <fstream>
#include <functional>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace sgd {

enum class output_format { json, csv, both };

/// Pipeline stages; a subcommand is a subset of them.
enum stage : unsigned {
    stage_stats = 1u << 0,
    stage_emulate = 1u << 1,
    stage_sweep = 1u << 2,
    stage_cluster = 1u << 3,
    stage_write_series = 1u << 4,
    stage_all = stage_stats | stage_emulate | stage_sweep | stage_cluster,
};

struct run_options {
    unsigned stages = stage_all;
    output_format format = output_format::both;
    std::filesystem::path out_dir;          // empty: from the configuration
    std::optional<double> delay_override;   // replaces the configured delay(s)
    bool parallel = true;
};

struct run_summary {
    std::filesystem::path out_dir;
    std::vector<std::filesystem::path> files;  // relative to out_dir
    json report;
};

struct loaded_inputs {
    series_set set;
    json info;
};

/// Synthesizes and/or loads every configured site, harmonizes them onto the
/// target grid, and applies the optional frequency scaling.
inline loaded_inputs load_inputs(const scenario_config& cfg, bool parallel = true) {
    std::vector<native_series> natives;
    std::optional<series_set> synthesized;
    bool any_csv = false;
    for (const auto& s : cfg.sites)
        any_csv = any_csv || s.csv.has_value();

    if (cfg.synth_grid && std::any_of(cfg.sites.begin(), cfg.sites.end(), [](auto& s) { return s.model; }))
        synthesized = synthesize(cfg.synthesis(), cfg.seed.value_or(0));

    json clamped = json::object();
    std::vector<const site_source*> csv_sites;
    for (const auto& s : cfg.sites)
        if (s.csv)
            csv_sites.push_back(&s);
    auto loaded = ordered_map(
        csv_sites.size(),
        [&](std::size_t i) {
            const auto& s = *csv_sites[i];
            return load_series(*s.csv, s.meta, s.csv_step);
        },
        parallel);
    for (const auto& l : loaded)
        clamped[l.meta.site_id] = l.clamped;

    series_set set;
    const bool synth_on_target = synthesized && synthesized->grid().step == cfg.target_step;
    if (!any_csv && synth_on_target) {
        set = std::move(*synthesized);
    } else {
        std::size_t next_csv = 0;
        for (const auto& s : cfg.sites) {
            if (s.csv) {
                natives.push_back(std::move(loaded[next_csv++]));
            } else {
                const auto& ss = synthesized->at(s.meta.site_id);
                natives.push_back({ss.meta, ss.series, synthesized->grid(), 0});
            }
        }
        set = harmonize(natives, cfg.target_step, cfg.reducer);
    }

    if (cfg.scale) {
        std::vector<site_series> scaled;
        for (const auto& s : set.sites()) {
            const double f1 = cfg.scale->f1_ghz.value_or(s.meta.frequency_ghz);
            site_series out{s.meta, frequency_scale(s.series, f1, cfg.scale->f2_ghz,
                                                    {cfg.scale->allow_out_of_range})};
            out.meta.frequency_ghz = cfg.scale->f2_ghz;
            scaled.push_back(std::move(out));
        }
        set = series_set(set.grid(), std::move(scaled));
    }

    json info = {{"grid",
                  {{"start_utc", format_sample_utc(set.grid(), 0)},
                   {"start_epoch", set.grid().start_epoch},
                   {"step_s", set.grid().step.seconds()},
                   {"count", set.grid().count}}},
                 {"sites", json::array()},
                 {"concurrent_validity_fraction", set.concurrent_validity_fraction()},
                 {"clamped_negative_samples", clamped}};
    for (const auto& s : set.sites())
        info["sites"].push_back({{"id", s.meta.site_id},
                                 {"region", s.meta.region_tag},
                                 {"frequency_ghz", s.meta.frequency_ghz},
                                 {"valid_samples", s.series.valid_count()}});
    return {std::move(set), std::move(info)};
}

namespace detail {

class bundle_writer {
public:
    bundle_writer(std::filesystem::path root, output_format fmt) : root_(std::move(root)), fmt_(fmt) {}

    bool csv() const noexcept { return fmt_ != output_format::json; }
    bool json_enabled() const noexcept { return fmt_ != output_format::csv; }

    void write(const std::filesystem::path& rel, const std::function<void(std::ostream&)>& body) {
        const auto path = root_ / rel;
        std::filesystem::create_directories(path.parent_path());
        std::ofstream os(path, std::ios::binary);
        if (!os)
            throw data_error("cannot write '" + path.string() + "'");
        body(os);
        if (!os)
            throw data_error("failed writing '" + path.string() + "'");
        files_.push_back(rel);
    }

    void csv_file(const std::filesystem::path& rel, const std::function<void(std::ostream&)>& body) {
        if (csv())
            write(rel, body);
    }

    std::vector<std::filesystem::path>& files() noexcept { return files_; }

private:
    std::filesystem::path root_;
    output_format fmt_;
    std::vector<std::filesystem::path> files_;
};

inline std::string file_token(double v) {
    std::string s = fixed4(v);
    while (!s.empty() && s.back() == '0')
        s.pop_back();
    if (!s.empty() && s.back() == '.')
        s.pop_back();
    for (auto& c : s)
        if (c == '.')
            c = 'p';
    return s;
}

inline network_config with_common_threshold(network_config cfg, std::optional<double> sst) {
    if (sst)
        for (auto& g : cfg.gateways) {
            g.switching_threshold_db = *sst;
            g.fade_margin_db = *sst;
        }
    return cfg;
}

} // namespace detail

/// Runs the configured stages and writes the report bundle.
inline run_summary run_pipeline(const scenario_config& cfg, const run_options& opts) {
    run_summary out;
    out.out_dir = opts.out_dir.empty() ? cfg.output_dir : opts.out_dir;
    detail::bundle_writer bundle(out.out_dir, opts.format);

    json embedded = cfg.document;
    if (opts.delay_override && embedded.contains("network")) {
        embedded["network"]["delay_s"] = *opts.delay_override;
        if (embedded["network"].contains("runs"))
            embedded["network"]["runs"].erase("delays_s");
    }

    json report = {{"tool", tool_name},
                   {"version", tool_version},
                   {"schema_version", schema_version},
                   {"seed", cfg.seed ? json(*cfg.seed) : json(nullptr)},
                   {"config", embedded}};

    auto inputs = load_inputs(cfg, opts.parallel);
    const series_set& set = inputs.set;
    report["inputs"] = inputs.info;

    if (opts.stages & stage_write_series) {
        for (const auto& s : set.sites())
            bundle.write(std::filesystem::path("series") / (s.meta.site_id + ".csv"),
                         [&](std::ostream& os) { write_series_csv(os, set.grid(), s.series); });
    }

    if ((opts.stages & stage_stats) && cfg.stats) {
        const auto& so = *cfg.stats;
        json sites = json::array();
        std::vector<site_fade_rows> fade_rows;
        std::vector<std::vector<fade_duration_curve>> duration_curves(so.fade_thresholds_db.size());
        auto per_site = ordered_map(
            set.size(),
            [&](std::size_t i) {
                const auto& s = set[i];
                auto curve = exceedance(s.series, set.grid(), so.thresholds_db);
                std::vector<fade_summary> fades;
                for (double th : so.fade_thresholds_db)
                    fades.push_back(fade_events(s.series, set.grid(), th));
                return std::pair{std::move(curve), std::move(fades)};
            },
            opts.parallel);
        for (std::size_t i = 0; i < set.size(); ++i) {
            const auto& id = set[i].meta.site_id;
            auto& [curve, fades] = per_site[i];
            json fj = json::array();
            json dj = json::array();
            for (std::size_t t = 0; t < fades.size(); ++t) {
                fj.push_back(to_json(fades[t]));
                fade_duration_curve c{id, fades[t].threshold_db, so.duration_bins_s, {}};
                if (!fades[t].events.empty())
                    c.fraction = fade_duration_distribution(fades[t].events, so.duration_bins_s);
                dj.push_back(to_json(c));
                duration_curves[t].push_back(std::move(c));
            }
            sites.push_back({{"site", id}, {"exceedance", to_json(curve)}, {"fades", fj}, {"fade_duration", dj}});
            bundle.csv_file(std::filesystem::path("stats") / ("exceedance_" + id + ".csv"),
                            [&](std::ostream& os) { write_exceedance_csv(os, curve); });
            for (auto& f : fades)
                f.events.clear();
            fade_rows.push_back({id, std::move(fades)});
        }
        json stats = {{"sites", sites}};
        bundle.csv_file("stats/fade_table.csv", [&](std::ostream& os) { write_fade_table_csv(os, fade_rows); });
        for (std::size_t t = 0; t < so.fade_thresholds_db.size(); ++t)
            bundle.csv_file(std::filesystem::path("stats") /
                                ("fade_duration_" + detail::file_token(so.fade_thresholds_db[t]) + "db.csv"),
                            [&](std::ostream& os) { write_fade_duration_csv(os, duration_curves[t]); });
        if (set.size() >= 2) {
            auto joint = joint_exceedance(set, so.joint_thresholds_db);
            stats["joint_exceedance"] = to_json(joint);
            bundle.csv_file("stats/joint_exceedance.csv",
                            [&](std::ostream& os) { write_joint_exceedance_csv(os, joint); });
        }
        report["stats"] = std::move(stats);
    }

    if ((opts.stages & stage_emulate) && cfg.network) {
        network_config base = *cfg.network;
        if (opts.delay_override)
            base.switching_delay_s = *opts.delay_override;
        std::vector<double> delays{base.switching_delay_s};
        if (cfg.runs && !cfg.runs->delays_s.empty() && !opts.delay_override)
            delays = cfg.runs->delays_s;
        std::vector<std::optional<double>> ssts{std::nullopt};
        if (cfg.runs && !cfg.runs->sst_db.empty()) {
            ssts.clear();
            for (double s : cfg.runs->sst_db)
                ssts.emplace_back(s);
        }
        std::vector<std::pair<double, std::optional<double>>> grid_points;
        for (double d : delays)
            for (const auto& s : ssts)
                grid_points.emplace_back(d, s);

        auto results = ordered_map(
            grid_points.size(),
            [&](std::size_t i) {
                auto net = detail::with_common_threshold(base, grid_points[i].second);
                net.switching_delay_s = grid_points[i].first;
                return labeled_run{grid_points[i].first,
                                   grid_points[i].second.value_or(net.gateways.front().switching_threshold_db),
                                   emulate(set, net)};
            },
            opts.parallel);

        json runs = json::array();
        for (std::size_t i = 0; i < results.size(); ++i) {
            const auto& run = results[i];
            const auto daily = daily_breakdown(run.result);
            json rj = to_json(run.result);
            rj["delay_s"] = run.delay_s;
            rj["sst_db"] = run.sst_db;
            rj["daily_summary"] = to_json(daily);
            runs.push_back(std::move(rj));
            const std::string stem = "emulation/run_" + std::to_string(i + 1);
            bundle.csv_file(stem + "_switch_events.csv",
                            [&](std::ostream& os) { write_switch_events_csv(os, run.result); });
            bundle.csv_file(stem + "_daily.csv", [&](std::ostream& os) { write_daily_csv(os, daily); });
            bundle.csv_file(stem + "_switch_histogram.csv",
                            [&](std::ostream& os) { write_switch_histogram_csv(os, daily); });
        }
        bundle.csv_file("emulation/network_table.csv",
                        [&](std::ostream& os) { write_network_table_csv(os, results); });
        bundle.csv_file("emulation/gateway_switches.csv",
                        [&](std::ostream& os) { write_gateway_switches_csv(os, results); });
        report["emulation"] = {{"runs", runs}};

        if (cfg.no_sgd) {
            const auto& o = *cfg.no_sgd;
            no_sgd_table table;
            table.fade_margins_db = o.fade_margins_db;
            for (auto& row : no_sgd_combinations(set, base.gateways, o.active, o.min_regions, o.fade_margins_db)) {
                std::vector<std::string> ids;
                for (auto i : row.members)
                    ids.push_back(base.gateways[i].site_id);
                table.members.push_back(std::move(ids));
                table.availability_percent.push_back(std::move(row.availability_percent));
            }
            report["no_sgd"] = to_json(table);
            bundle.csv_file("emulation/no_sgd.csv", [&](std::ostream& os) { write_no_sgd_csv(os, table); });
        }
    }

    if ((opts.stages & stage_sweep) && cfg.sweep && cfg.network) {
        network_config base = *cfg.network;
        if (opts.delay_override)
            base.switching_delay_s = *opts.delay_override;
        const auto sweep = sst_sweep(set, base, cfg.sweep->sst_db, cfg.sweep->mode, opts.parallel);
        report["sweep"] = to_json(sweep);
        bundle.csv_file("sweep/sst_sweep.csv", [&](std::ostream& os) { write_sweep_csv(os, sweep); });
    }

    if ((opts.stages & stage_cluster) && cfg.cluster && cfg.network) {
        network_config base = *cfg.network;
        if (opts.delay_override)
            base.switching_delay_s = *opts.delay_override;
        std::vector<cluster_plan> plans;
        if (cfg.cluster->enumerate) {
            plans = enumerate_partitions(base, cfg.cluster->enumerate->first, cfg.cluster->enumerate->second);
        } else {
            auto subs = cfg.cluster->sub_networks;
            for (auto& s : subs) {
                s.switching_delay_s = base.switching_delay_s;
                s.policy = base.policy;
                s.freeze = base.freeze;
            }
            plans.emplace_back(std::move(subs), base.gateways);
        }
        std::vector<std::optional<double>> ssts{std::nullopt};
        if (!cfg.cluster->sst_db.empty()) {
            ssts.clear();
            for (double s : cfg.cluster->sst_db)
                ssts.emplace_back(s);
        }
        std::vector<labeled_pair> pairs;
        std::size_t per_category[3] = {0, 0, 0};
        for (const auto& plan : plans) {
            const std::size_t index = ++per_category[plan.category()];
            for (const auto& sst : ssts) {
                std::vector<network_config> subs;
                for (const auto& s : plan.sub_networks())
                    subs.push_back(detail::with_common_threshold(s, sst));
                cluster_plan adjusted(std::move(subs));
                auto result = evaluate_cluster_plan(set, adjusted, opts.parallel);
                const double label =
                    sst.value_or(adjusted.sub_networks().front().gateways.front().switching_threshold_db);
                pairs.push_back({index, label, std::move(adjusted), std::move(result)});
            }
        }
        json pj = json::array();
        for (const auto& p : pairs)
            pj.push_back(to_json(p));
        report["cluster"] = {{"pairs", pj}};
        for (int category : {1, 2}) {
            std::vector<labeled_pair> subset;
            for (const auto& p : pairs)
                if (p.result.category == category)
                    subset.push_back(p);
            if (!subset.empty())
                bundle.csv_file("cluster/category_" + std::to_string(category) + ".csv",
                                [&](std::ostream& os) { write_cluster_table_csv(os, subset); });
        }
    }

    if (bundle.json_enabled())
        bundle.write("report.json", [&](std::ostream& os) { os << report.dump(2) << '\n'; });

    json manifest = {{"tool", tool_name},
                     {"version", tool_version},
                     {"schema_version", schema_version},
                     {"seed", report["seed"]},
                     {"config", embedded},
                     {"files", json::array()}};
    for (const auto& f : bundle.files())
        manifest["files"].push_back(f.generic_string());
    bundle.write("manifest.json", [&](std::ostream& os) { os << manifest.dump(2) << '\n'; });

    out.files = bundle.files();
    out.report = std::move(report);
    return out;
}

} // namespace sgd

#endif
