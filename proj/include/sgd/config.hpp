#ifndef SGD_CONFIG_HPP
#define SGD_CONFIG_HPP

#include "sgd/engine.hpp"
#include "sgd/propstats.hpp"
#include "sgd/scenario.hpp"
#include "sgd/synth.hpp"
#include "sgd/time.hpp"
#include "sgd/timeseries.hpp"

#include <json.hpp>

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace sgd {

/// One problem found while validating a scenario configuration; `path` is a
/// JSON pointer into the document.
struct config_issue {
    std::string path;
    std::string message;
};

/// Thrown with every issue found, not just the first.
class config_validation_error : public config_error {
public:
    explicit config_validation_error(std::vector<config_issue> issues)
        : config_error(summary(issues)), issues_(std::move(issues)) {}
    config_validation_error(std::string path, std::string message)
        : config_validation_error(std::vector<config_issue>{{std::move(path), std::move(message)}}) {}

    const std::vector<config_issue>& issues() const noexcept { return issues_; }

    nlohmann::ordered_json to_json() const {
        nlohmann::ordered_json arr = nlohmann::ordered_json::array();
        for (const auto& i : issues_)
            arr.push_back({{"path", i.path}, {"message", i.message}});
        return {{"errors", arr}};
    }

private:
    static std::string summary(const std::vector<config_issue>& issues) {
        if (issues.empty())
            return "invalid configuration";
        return issues.front().path + ": " + issues.front().message +
               (issues.size() > 1 ? " (+" + std::to_string(issues.size() - 1) + " more)" : "");
    }

    std::vector<config_issue> issues_;
};

struct site_source {
    site_meta meta;
    std::optional<std::filesystem::path> csv;
    std::optional<step_seconds> csv_step;  // declared native step of the CSV
    std::optional<fade_site_model> model;
};

struct stats_options {
    std::vector<double> thresholds_db;
    std::vector<double> fade_thresholds_db;
    std::vector<double> duration_bins_s;
    std::vector<double> joint_thresholds_db;
};

struct run_matrix {
    std::vector<double> delays_s;
    std::vector<double> sst_db;  // empty: keep the gateways' own thresholds
};

struct no_sgd_options {
    std::size_t active = 4;
    std::size_t min_regions = 1;
    std::vector<double> fade_margins_db;
};

struct sweep_options {
    std::vector<double> sst_db;
    sweep_mode mode = sweep_mode::common_dimensioning;
};

struct cluster_options {
    std::optional<std::pair<std::size_t, std::size_t>> enumerate;  // (N, P) per sub-network
    std::vector<network_config> sub_networks;
    std::vector<double> sst_db;  // empty: keep the gateways' own thresholds
};

struct scale_options {
    std::optional<double> f1_ghz;  // default: each site's frequency
    double f2_ghz = 50.0;
    bool allow_out_of_range = false;
};

struct scenario_config {
    nlohmann::ordered_json document;  // as given, with the effective seed filled in
    std::filesystem::path base_dir;
    std::optional<std::uint64_t> seed;
    std::filesystem::path output_dir = "sgd_out";
    step_seconds target_step{1};
    bin_reducer reducer = bin_reducer::mean;

    std::vector<site_source> sites;
    std::optional<time_grid> synth_grid;
    double synth_slot_s = 60.0;
    std::vector<std::vector<double>> synth_correlation;

    std::optional<scale_options> scale;
    std::optional<stats_options> stats;
    std::optional<network_config> network;
    std::optional<run_matrix> runs;
    std::optional<no_sgd_options> no_sgd;
    std::optional<sweep_options> sweep;
    std::optional<cluster_options> cluster;

    bool uses_randomness() const {
        if (network && network->policy.kind == selection_kind::uniform_random)
            return true;
        for (const auto& s : sites)
            if (s.model)
                return true;
        return false;
    }

    synth_spec synthesis() const {
        synth_spec spec;
        spec.grid = *synth_grid;
        spec.slot_seconds = synth_slot_s;
        for (const auto& s : sites)
            if (s.model)
                spec.sites.push_back(*s.model);
        spec.correlation = synth_correlation;
        return spec;
    }
};

namespace detail {

using ojson = nlohmann::ordered_json;

class config_reader {
public:
    std::vector<config_issue> issues;

    void fail(const std::string& path, const std::string& msg) { issues.push_back({path, msg}); }

    const ojson* member(const ojson& obj, const std::string& key) {
        if (!obj.is_object())
            return nullptr;
        auto it = obj.find(key);
        return it == obj.end() ? nullptr : &*it;
    }

    std::optional<double> number(const ojson& obj, const std::string& key, const std::string& path,
                                 bool required = false) {
        const auto* v = member(obj, key);
        if (!v) {
            if (required)
                fail(path + "/" + key, "required number is missing");
            return std::nullopt;
        }
        if (!v->is_number()) {
            fail(path + "/" + key, "must be a number");
            return std::nullopt;
        }
        return v->get<double>();
    }

    std::optional<std::string> text(const ojson& obj, const std::string& key, const std::string& path,
                                    bool required = false) {
        const auto* v = member(obj, key);
        if (!v) {
            if (required)
                fail(path + "/" + key, "required string is missing");
            return std::nullopt;
        }
        if (!v->is_string()) {
            fail(path + "/" + key, "must be a string");
            return std::nullopt;
        }
        return v->get<std::string>();
    }

    std::optional<std::size_t> count(const ojson& obj, const std::string& key, const std::string& path,
                                     bool required = false) {
        const auto* v = member(obj, key);
        if (!v) {
            if (required)
                fail(path + "/" + key, "required integer is missing");
            return std::nullopt;
        }
        if (!v->is_number_integer() || v->get<std::int64_t>() < 0) {
            fail(path + "/" + key, "must be a non-negative integer");
            return std::nullopt;
        }
        return v->get<std::size_t>();
    }

    std::vector<double> numbers(const ojson& obj, const std::string& key, const std::string& path,
                                bool ascending = false) {
        std::vector<double> out;
        const auto* v = member(obj, key);
        if (!v)
            return out;
        if (!v->is_array()) {
            fail(path + "/" + key, "must be an array of numbers");
            return out;
        }
        for (std::size_t i = 0; i < v->size(); ++i) {
            if (!(*v)[i].is_number()) {
                fail(path + "/" + key + "/" + std::to_string(i), "must be a number");
                continue;
            }
            out.push_back((*v)[i].get<double>());
        }
        if (ascending)
            for (std::size_t i = 1; i < out.size(); ++i)
                if (!(out[i] > out[i - 1])) {
                    fail(path + "/" + key, "values must be strictly ascending");
                    break;
                }
        return out;
    }

    std::vector<std::string> strings(const ojson& obj, const std::string& key, const std::string& path) {
        std::vector<std::string> out;
        const auto* v = member(obj, key);
        if (!v)
            return out;
        if (!v->is_array()) {
            fail(path + "/" + key, "must be an array of strings");
            return out;
        }
        for (std::size_t i = 0; i < v->size(); ++i) {
            if (!(*v)[i].is_string())
                fail(path + "/" + key + "/" + std::to_string(i), "must be a string");
            else
                out.push_back((*v)[i].get<std::string>());
        }
        return out;
    }
};

inline std::optional<selection_kind> parse_policy(const std::string& s) {
    if (s == "uniform_random" || s == "random")
        return selection_kind::uniform_random;
    if (s == "first_in_order")
        return selection_kind::first_in_order;
    if (s == "round_robin")
        return selection_kind::round_robin;
    return std::nullopt;
}

} // namespace detail

/// Parses and validates a scenario document. `base_dir` resolves relative
/// CSV paths; `seed_override` (e.g. from the command line) wins over the
/// document's seed. Throws config_validation_error listing every issue.
inline scenario_config parse_scenario(const nlohmann::ordered_json& doc, const std::filesystem::path& base_dir,
                                      std::optional<std::uint64_t> seed_override = std::nullopt) {
    using detail::ojson;
    detail::config_reader rd;
    scenario_config cfg;
    cfg.document = doc;
    cfg.base_dir = base_dir;

    if (!doc.is_object())
        throw config_validation_error("", "configuration must be a JSON object");

    if (const auto* s = rd.member(doc, "seed")) {
        if (!s->is_number_unsigned())
            rd.fail("/seed", "must be a non-negative integer");
        else
            cfg.seed = s->get<std::uint64_t>();
    }
    if (seed_override)
        cfg.seed = seed_override;
    if (cfg.seed)
        cfg.document["seed"] = *cfg.seed;

    if (auto out = rd.text(doc, "output_dir", ""))
        cfg.output_dir = *out;

    if (const auto* h = rd.member(doc, "harmonize")) {
        if (auto step = rd.number(*h, "step_s", "/harmonize")) {
            if (*step > 0.0)
                cfg.target_step = step_seconds::from_double(*step);
            else
                rd.fail("/harmonize/step_s", "must be positive");
        }
        if (auto red = rd.text(*h, "reducer", "/harmonize")) {
            if (*red == "mean")
                cfg.reducer = bin_reducer::mean;
            else if (*red == "max")
                cfg.reducer = bin_reducer::max;
            else
                rd.fail("/harmonize/reducer", "must be 'mean' or 'max'");
        }
    }

    // Sites.
    const auto* sites = rd.member(doc, "sites");
    if (!sites || !sites->is_array() || sites->empty()) {
        rd.fail("/sites", "a non-empty array of sites is required");
    } else {
        std::set<std::string> ids;
        for (std::size_t i = 0; i < sites->size(); ++i) {
            const auto& s = (*sites)[i];
            const std::string path = "/sites/" + std::to_string(i);
            site_source src;
            src.meta.site_id = rd.text(s, "id", path, true).value_or("");
            src.meta.region_tag = rd.text(s, "region", path).value_or(src.meta.site_id);
            src.meta.latitude_deg = rd.number(s, "latitude_deg", path).value_or(0.0);
            src.meta.longitude_deg = rd.number(s, "longitude_deg", path).value_or(0.0);
            src.meta.elevation_deg = rd.number(s, "elevation_deg", path).value_or(90.0);
            src.meta.frequency_ghz = rd.number(s, "frequency_ghz", path).value_or(40.0);
            if (!src.meta.site_id.empty() && !ids.insert(src.meta.site_id).second)
                rd.fail(path + "/id", "duplicate site id '" + src.meta.site_id + "'");
            if (!(src.meta.elevation_deg > 0.0 && src.meta.elevation_deg <= 90.0))
                rd.fail(path + "/elevation_deg", "must be in (0, 90]");
            if (!(src.meta.frequency_ghz > 0.0))
                rd.fail(path + "/frequency_ghz", "must be positive");
            if (auto csv = rd.text(s, "csv", path)) {
                std::filesystem::path p = *csv;
                src.csv = p.is_absolute() ? p : base_dir / p;
            }
            if (auto st = rd.number(s, "step_s", path)) {
                if (*st > 0.0)
                    src.csv_step = step_seconds::from_double(*st);
                else
                    rd.fail(path + "/step_s", "must be positive");
            }
            cfg.sites.push_back(std::move(src));
        }
    }

    // Synthesis models, keyed by site id.
    if (const auto* synth = rd.member(doc, "synth")) {
        const std::string path = "/synth";
        std::int64_t start = 0;
        if (const auto* st = rd.member(*synth, "start")) {
            std::int64_t ns = 0;
            if (st->is_number_integer())
                start = st->get<std::int64_t>();
            else if (st->is_string() && parse_timestamp(st->get<std::string>(), ns) && ns % 1'000'000'000 == 0)
                start = ns / 1'000'000'000;
            else
                rd.fail(path + "/start", "must be epoch seconds or an ISO-8601 UTC timestamp on a whole second");
        }
        step_seconds step{1};
        if (auto st = rd.number(*synth, "step_s", path)) {
            if (*st > 0.0)
                step = step_seconds::from_double(*st);
            else
                rd.fail(path + "/step_s", "must be positive");
        }
        std::optional<std::size_t> count = rd.count(*synth, "count", path);
        if (auto days = rd.number(*synth, "days", path)) {
            if (count)
                rd.fail(path + "/days", "give either 'count' or 'days', not both");
            else if (*days > 0.0)
                count = static_cast<std::size_t>(std::llround(*days * seconds_per_day / step.seconds()));
            else
                rd.fail(path + "/days", "must be positive");
        }
        if (!count)
            rd.fail(path, "grid length ('count' or 'days') is required");
        cfg.synth_grid = time_grid{start, step, count.value_or(0)};
        cfg.synth_slot_s = rd.number(*synth, "slot_s", path).value_or(60.0);

        const auto* models = rd.member(*synth, "models");
        if (!models || !models->is_object()) {
            rd.fail(path + "/models", "an object of per-site fade models is required");
        } else {
            for (auto it = models->begin(); it != models->end(); ++it) {
                const std::string mpath = path + "/models/" + it.key();
                auto site = std::find_if(cfg.sites.begin(), cfg.sites.end(),
                                         [&](const site_source& s) { return s.meta.site_id == it.key(); });
                if (site == cfg.sites.end()) {
                    rd.fail(mpath, "model for unknown site '" + it.key() + "'");
                    continue;
                }
                fade_site_model m;
                m.meta = site->meta;
                const auto& v = it.value();
                m.rate_per_day = rd.number(v, "rate_per_day", mpath, true).value_or(0.0);
                m.duration_mu = rd.number(v, "duration_mu", mpath).value_or(m.duration_mu);
                m.duration_sigma = rd.number(v, "duration_sigma", mpath).value_or(m.duration_sigma);
                m.peak_mu = rd.number(v, "peak_mu", mpath).value_or(m.peak_mu);
                m.peak_sigma = rd.number(v, "peak_sigma", mpath).value_or(m.peak_sigma);
                m.rise_fraction = rd.number(v, "rise_fraction", mpath).value_or(m.rise_fraction);
                m.gap_rate_per_day = rd.number(v, "gap_rate_per_day", mpath).value_or(0.0);
                m.gap_duration_s = rd.number(v, "gap_duration_s", mpath).value_or(0.0);
                site->model = m;
            }
        }
        if (const auto* corr = rd.member(*synth, "correlation")) {
            bool ok = corr->is_array();
            if (ok)
                for (const auto& row : *corr) {
                    if (!row.is_array()) {
                        ok = false;
                        break;
                    }
                    std::vector<double> r;
                    for (const auto& x : row) {
                        if (!x.is_number()) {
                            ok = false;
                            break;
                        }
                        r.push_back(x.get<double>());
                    }
                    cfg.synth_correlation.push_back(std::move(r));
                }
            if (!ok)
                rd.fail(path + "/correlation", "must be a matrix of numbers");
        }
        // Shape and PSD checks belong to the synthesizer.
        if (rd.issues.empty()) {
            try {
                auto spec = cfg.synthesis();
                detail::validate_synth_spec(spec);
                if (!spec.correlation.empty())
                    detail::psd_cholesky(spec.correlation);
            } catch (const error& e) {
                rd.fail(path, e.what());
            }
        }
    }

    for (std::size_t i = 0; i < cfg.sites.size(); ++i) {
        const auto& s = cfg.sites[i];
        const std::string path = "/sites/" + std::to_string(i);
        if (s.csv && s.model)
            rd.fail(path, "site '" + s.meta.site_id + "' has both a CSV source and a synthesis model");
        if (!s.csv && !s.model)
            rd.fail(path, "site '" + s.meta.site_id + "' has neither a CSV source nor a synthesis model");
    }

    auto has_site = [&](const std::string& id) {
        return std::any_of(cfg.sites.begin(), cfg.sites.end(),
                           [&](const site_source& s) { return s.meta.site_id == id; });
    };
    auto region_of = [&](const std::string& id) -> std::string {
        for (const auto& s : cfg.sites)
            if (s.meta.site_id == id)
                return s.meta.region_tag;
        return id;
    };

    if (const auto* sc = rd.member(doc, "scale")) {
        scale_options o;
        o.f1_ghz = rd.number(*sc, "f1_ghz", "/scale");
        o.f2_ghz = rd.number(*sc, "f2_ghz", "/scale", true).value_or(50.0);
        if (const auto* a = rd.member(*sc, "allow_out_of_range"))
            o.allow_out_of_range = a->is_boolean() && a->get<bool>();
        auto in_range = [](double f) { return f >= scaling_min_ghz && f <= scaling_max_ghz; };
        if (!o.allow_out_of_range) {
            if (o.f1_ghz && !in_range(*o.f1_ghz))
                rd.fail("/scale/f1_ghz", "outside 7-55 GHz (set allow_out_of_range to override)");
            if (!in_range(o.f2_ghz))
                rd.fail("/scale/f2_ghz", "outside 7-55 GHz (set allow_out_of_range to override)");
            if (!o.f1_ghz)
                for (const auto& s : cfg.sites)
                    if (!in_range(s.meta.frequency_ghz))
                        rd.fail("/scale", "site '" + s.meta.site_id + "' frequency outside 7-55 GHz");
        }
        cfg.scale = o;
    }

    if (const auto* st = rd.member(doc, "stats")) {
        stats_options o;
        o.thresholds_db = rd.numbers(*st, "thresholds_db", "/stats", true);
        o.fade_thresholds_db = rd.numbers(*st, "fade_thresholds_db", "/stats", true);
        o.duration_bins_s = rd.numbers(*st, "duration_bins_s", "/stats", true);
        o.joint_thresholds_db = rd.numbers(*st, "joint_thresholds_db", "/stats", true);
        if (o.thresholds_db.empty()) {
            for (int i = 0; i <= 30; ++i)
                o.thresholds_db.push_back(i);
        }
        if (o.fade_thresholds_db.empty())
            o.fade_thresholds_db = {5.0, 10.0};
        if (o.duration_bins_s.empty())
            o.duration_bins_s = {0, 10, 30, 60, 120, 300, 600, 1200, 1800, 3600};
        if (o.joint_thresholds_db.empty())
            o.joint_thresholds_db = {5.0, 10.0};
        for (const auto* v : {&o.thresholds_db, &o.fade_thresholds_db, &o.joint_thresholds_db})
            for (double x : *v)
                if (!(x >= 0.0))
                    rd.fail("/stats", "thresholds must be non-negative");
        cfg.stats = o;
    }

    auto parse_gateways = [&](const ojson& arr, const std::string& path, double fm_default, double sst_default) {
        std::vector<gateway_config> out;
        if (!arr.is_array()) {
            rd.fail(path, "must be an array of gateways");
            return out;
        }
        for (std::size_t i = 0; i < arr.size(); ++i) {
            const std::string gpath = path + "/" + std::to_string(i);
            gateway_config g;
            if (arr[i].is_string()) {
                g.site_id = arr[i].get<std::string>();
                g.fade_margin_db = fm_default;
                g.switching_threshold_db = sst_default;
            } else {
                g.site_id = rd.text(arr[i], "id", gpath, true).value_or("");
                g.fade_margin_db = rd.number(arr[i], "fm_db", gpath).value_or(fm_default);
                g.switching_threshold_db = rd.number(arr[i], "sst_db", gpath).value_or(sst_default);
            }
            if (!g.site_id.empty() && !has_site(g.site_id))
                rd.fail(gpath, "gateway '" + g.site_id + "' is not a configured site");
            if (!(g.switching_threshold_db > 0.0 && g.switching_threshold_db <= g.fade_margin_db))
                rd.fail(gpath, "need 0 < sst_db <= fm_db");
            g.region_tag = region_of(g.site_id);
            out.push_back(g);
        }
        return out;
    };

    if (const auto* net = rd.member(doc, "network")) {
        const std::string path = "/network";
        network_config n;
        const double fm = rd.number(*net, "fm_db", path).value_or(5.0);
        const double sst = rd.number(*net, "sst_db", path).value_or(fm);
        if (const auto* gws = rd.member(*net, "gateways"))
            n.gateways = parse_gateways(*gws, path + "/gateways", fm, sst);
        else
            rd.fail(path + "/gateways", "required");
        n.active_count = rd.count(*net, "N", path, true).value_or(1);
        n.redundant_count = rd.count(*net, "P", path, true).value_or(0);
        n.switching_delay_s = rd.number(*net, "delay_s", path).value_or(0.0);
        if (auto pol = rd.text(*net, "policy", path)) {
            if (auto k = detail::parse_policy(*pol))
                n.policy.kind = *k;
            else
                rd.fail(path + "/policy", "must be uniform_random, first_in_order or round_robin");
        }
        n.initial_active = rd.strings(*net, "initial_active", path);
        if (auto fr = rd.text(*net, "freeze", path)) {
            if (*fr == "network")
                n.freeze = freeze_scope::network;
            else if (*fr == "gateway")
                n.freeze = freeze_scope::gateway;
            else
                rd.fail(path + "/freeze", "must be 'network' or 'gateway'");
        }
        n.policy.seed = cfg.seed.value_or(0);
        try {
            n.validate();
        } catch (const config_error& e) {
            rd.fail(path, e.what());
        }
        cfg.network = n;

        if (const auto* runs = rd.member(*net, "runs")) {
            run_matrix m;
            m.delays_s = rd.numbers(*runs, "delays_s", path + "/runs");
            m.sst_db = rd.numbers(*runs, "sst_db", path + "/runs");
            for (double d : m.delays_s)
                if (!(d >= 0.0))
                    rd.fail(path + "/runs/delays_s", "delays must be non-negative");
            for (double s : m.sst_db)
                if (!(s > 0.0))
                    rd.fail(path + "/runs/sst_db", "thresholds must be positive");
            cfg.runs = m;
        }
    }

    auto require_network = [&](const char* what) {
        if (!cfg.network)
            rd.fail(std::string("/") + what, "requires a 'network' section");
    };

    if (const auto* ns = rd.member(doc, "no_sgd")) {
        require_network("no_sgd");
        no_sgd_options o;
        o.active = rd.count(*ns, "N", "/no_sgd", true).value_or(1);
        o.min_regions = rd.count(*ns, "min_regions", "/no_sgd").value_or(1);
        o.fade_margins_db = rd.numbers(*ns, "fm_db", "/no_sgd");
        if (o.fade_margins_db.empty())
            rd.fail("/no_sgd/fm_db", "at least one fade margin is required");
        if (cfg.network && o.active > cfg.network->gateways.size())
            rd.fail("/no_sgd/N", "exceeds the roster size");
        cfg.no_sgd = o;
    }

    if (const auto* sw = rd.member(doc, "sweep")) {
        require_network("sweep");
        sweep_options o;
        o.sst_db = rd.numbers(*sw, "sst_db", "/sweep", true);
        if (o.sst_db.empty())
            rd.fail("/sweep/sst_db", "at least one SST value is required");
        for (double s : o.sst_db)
            if (!(s > 0.0))
                rd.fail("/sweep/sst_db", "thresholds must be positive");
        if (auto mode = rd.text(*sw, "mode", "/sweep")) {
            if (*mode == "common")
                o.mode = sweep_mode::common_dimensioning;
            else if (*mode == "sst_only")
                o.mode = sweep_mode::threshold_only;
            else
                rd.fail("/sweep/mode", "must be 'common' or 'sst_only'");
        }
        if (o.mode == sweep_mode::threshold_only && cfg.network && !o.sst_db.empty()) {
            for (const auto& g : cfg.network->gateways)
                if (o.sst_db.back() > g.fade_margin_db)
                    rd.fail("/sweep/sst_db", "SST above the fade margin of '" + g.site_id + "'");
        }
        cfg.sweep = o;
    }

    if (const auto* cl = rd.member(doc, "cluster")) {
        require_network("cluster");
        cluster_options o;
        o.sst_db = rd.numbers(*cl, "sst_db", "/cluster", true);
        if (const auto* en = rd.member(*cl, "enumerate")) {
            const auto n = rd.count(*en, "N", "/cluster/enumerate", true).value_or(1);
            const auto p = rd.count(*en, "P", "/cluster/enumerate", true).value_or(0);
            if (cfg.network && (n + p == 0 || cfg.network->gateways.size() % (n + p) != 0))
                rd.fail("/cluster/enumerate", "roster size is not a multiple of N+P");
            o.enumerate = std::pair{n, p};
        }
        if (const auto* subs = rd.member(*cl, "sub_networks")) {
            if (!subs->is_array()) {
                rd.fail("/cluster/sub_networks", "must be an array");
            } else if (cfg.network) {
                for (std::size_t i = 0; i < subs->size(); ++i) {
                    const std::string path = "/cluster/sub_networks/" + std::to_string(i);
                    network_config n = *cfg.network;
                    n.initial_active.clear();
                    n.gateways.clear();
                    for (const auto& id : rd.strings((*subs)[i], "gateways", path)) {
                        auto idx = cfg.network->index_of(id);
                        if (!idx)
                            rd.fail(path + "/gateways", "'" + id + "' is not in the network roster");
                        else
                            n.gateways.push_back(cfg.network->gateways[*idx]);
                    }
                    n.active_count = rd.count((*subs)[i], "N", path, true).value_or(1);
                    n.redundant_count = rd.count((*subs)[i], "P", path, true).value_or(0);
                    try {
                        n.validate();
                    } catch (const config_error& e) {
                        rd.fail(path, e.what());
                    }
                    o.sub_networks.push_back(std::move(n));
                }
                if (rd.issues.empty()) {
                    try {
                        cluster_plan(o.sub_networks, cfg.network->gateways);
                    } catch (const plan_error& e) {
                        rd.fail("/cluster/sub_networks", e.what());
                    }
                }
            }
        }
        if (o.enumerate.has_value() == !o.sub_networks.empty())
            rd.fail("/cluster", "give exactly one of 'enumerate' or 'sub_networks'");
        cfg.cluster = o;
    }

    if (cfg.uses_randomness() && !cfg.seed)
        rd.fail("/seed", "a seed is required when synthesizing data or selecting gateways at random");

    if (!rd.issues.empty())
        throw config_validation_error(std::move(rd.issues));
    return cfg;
}

inline scenario_config load_scenario(const std::filesystem::path& path,
                                     std::optional<std::uint64_t> seed_override = std::nullopt) {
    std::ifstream in(path);
    if (!in)
        throw config_validation_error("", "cannot open configuration '" + path.string() + "'");
    nlohmann::ordered_json doc;
    try {
        doc = nlohmann::ordered_json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw config_validation_error("", std::string("not valid JSON: ") + e.what());
    }
    return parse_scenario(doc, path.has_parent_path() ? path.parent_path() : std::filesystem::path("."),
                          seed_override);
}

} // namespace sgd

#endif
