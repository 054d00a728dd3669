// sgdemu: command-line front end of the gateway diversity toolkit.
//
// Exit codes: 0 success, 2 invalid command line or configuration (errors as
// JSON on stderr), 3 data errors (missing/unreadable inputs, unusable data).

#include "sgd/sgd.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

namespace {

constexpr int exit_ok = 0;
constexpr int exit_invalid = 2;
constexpr int exit_data = 3;

struct shared_flags {
    std::string config;
    std::string out;
    std::optional<std::uint64_t> seed;
    std::string format = "both";
    std::optional<double> delay;
};

void add_shared(CLI::App* cmd, shared_flags& f, bool config_required = true) {
    auto* c = cmd->add_option("--config", f.config, "Scenario configuration (JSON)");
    if (config_required)
        c->required();
    cmd->add_option("--out", f.out, "Output directory (overrides $SGDEMU_OUT_DIR and the configuration)");
    cmd->add_option("--seed", f.seed, "Seed (overrides the configuration)");
    cmd->add_option("--format", f.format, "Report format")->check(CLI::IsMember({"json", "csv", "both"}));
}

sgd::output_format parse_format(const std::string& s) {
    if (s == "json")
        return sgd::output_format::json;
    if (s == "csv")
        return sgd::output_format::csv;
    return sgd::output_format::both;
}

std::filesystem::path resolve_out(const shared_flags& f) {
    if (!f.out.empty())
        return f.out;
    if (const char* env = std::getenv("SGDEMU_OUT_DIR"); env && *env)
        return env;
    return {};
}

void print_error(const sgd::error& e) {
    nlohmann::ordered_json j = {{"errors", {{{"kind", sgd::to_string(e.kind())}, {"message", e.what()}}}}};
    std::cerr << j.dump() << '\n';
}

int exit_code_for(const sgd::error& e) {
    switch (e.kind()) {
    case sgd::error_kind::config:
    case sgd::error_kind::spec:
    case sgd::error_kind::plan:
        return exit_invalid;
    default:
        return exit_data;
    }
}

int run_stages(const shared_flags& f, unsigned stages) {
    auto cfg = sgd::load_scenario(f.config, f.seed);
    sgd::run_options opts;
    opts.stages = stages;
    opts.format = parse_format(f.format);
    opts.out_dir = resolve_out(f);
    opts.delay_override = f.delay;
    const auto summary = sgd::run_pipeline(cfg, opts);
    std::cout << "wrote " << summary.files.size() << " file(s) to " << summary.out_dir.string() << '\n';
    return exit_ok;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Smart gateway diversity emulation toolkit"};
    app.set_version_flag("--version",
                         std::string(sgd::tool_name) + " " + sgd::tool_version +
                             " (report schema " + std::to_string(sgd::schema_version) + ")");
    app.require_subcommand(1);

    shared_flags run_f, stats_f, emulate_f, sweep_f, cluster_f, scale_f, synth_f;

    auto* run = app.add_subcommand("run", "Run every configured stage");
    add_shared(run, run_f);
    run->add_option("--delay", run_f.delay, "Switching process delay in seconds");

    auto* stats = app.add_subcommand("stats", "Propagation statistics only");
    add_shared(stats, stats_f);

    auto* emulate = app.add_subcommand("emulate", "Gateway switching emulation");
    add_shared(emulate, emulate_f);
    emulate->add_option("--delay", emulate_f.delay, "Switching process delay in seconds");

    auto* sweep = app.add_subcommand("sweep", "Availability and switches versus SST");
    add_shared(sweep, sweep_f);
    sweep->add_option("--delay", sweep_f.delay, "Switching process delay in seconds");

    auto* cluster = app.add_subcommand("cluster", "Sub-network (cluster) evaluation");
    add_shared(cluster, cluster_f);
    cluster->add_option("--delay", cluster_f.delay, "Switching process delay in seconds");

    auto* synth = app.add_subcommand("synth", "Write synthetic series as CSV");
    add_shared(synth, synth_f);

    auto* scale = app.add_subcommand("scale", "Frequency-scale attenuation series");
    add_shared(scale, scale_f, false);
    std::string scale_input;
    std::optional<double> f1, f2;
    bool allow_out_of_range = false;
    scale->add_option("--input", scale_input, "Series CSV to scale (instead of --config)");
    scale->add_option("--f1", f1, "Source frequency in GHz");
    scale->add_option("--f2", f2, "Target frequency in GHz");
    scale->add_flag("--allow-out-of-range", allow_out_of_range, "Accept frequencies outside 7-55 GHz");

    try {
        app.parse(argc, argv);
    } catch (const CLI::Success& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        nlohmann::ordered_json j = {{"errors", {{{"kind", "usage"}, {"message", e.what()}}}}};
        std::cerr << j.dump() << '\n';
        return exit_invalid;
    }

    try {
        if (*run)
            return run_stages(run_f, sgd::stage_all);
        if (*stats)
            return run_stages(stats_f, sgd::stage_stats);
        if (*emulate)
            return run_stages(emulate_f, sgd::stage_emulate);
        if (*sweep)
            return run_stages(sweep_f, sgd::stage_sweep);
        if (*cluster)
            return run_stages(cluster_f, sgd::stage_cluster);
        if (*synth)
            return run_stages(synth_f, sgd::stage_write_series);
        if (*scale) {
            if (!scale_input.empty()) {
                if (!f1 || !f2) {
                    std::cerr << R"({"errors":[{"kind":"usage","message":"--input needs --f1 and --f2"}]})" << '\n';
                    return exit_invalid;
                }
                sgd::site_meta meta;
                meta.site_id = std::filesystem::path(scale_input).stem().string();
                meta.frequency_ghz = *f1;
                const auto in = sgd::load_series(scale_input, meta);
                const auto scaled = sgd::frequency_scale(in.series, *f1, *f2, {allow_out_of_range});
                std::filesystem::path out = resolve_out(scale_f);
                if (out.empty())
                    out = ".";
                const auto path = out / (meta.site_id + "_scaled.csv");
                sgd::write_series_csv(path, in.grid, scaled);
                std::cout << "wrote " << path.string() << '\n';
                return exit_ok;
            }
            if (scale_f.config.empty()) {
                std::cerr << R"({"errors":[{"kind":"usage","message":"scale needs --config or --input"}]})" << '\n';
                return exit_invalid;
            }
            std::ifstream in(scale_f.config);
            if (!in)
                throw sgd::config_validation_error("", "cannot open configuration '" + scale_f.config + "'");
            nlohmann::ordered_json doc;
            try {
                doc = nlohmann::ordered_json::parse(in);
            } catch (const nlohmann::json::parse_error& e) {
                throw sgd::config_validation_error("", std::string("not valid JSON: ") + e.what());
            }
            if (f1 || f2 || allow_out_of_range) {
                auto& s = doc["scale"];
                if (f1)
                    s["f1_ghz"] = *f1;
                if (f2)
                    s["f2_ghz"] = *f2;
                if (allow_out_of_range)
                    s["allow_out_of_range"] = true;
            }
            const auto base = std::filesystem::path(scale_f.config).parent_path();
            auto cfg = sgd::parse_scenario(doc, base.empty() ? "." : base, scale_f.seed);
            if (!cfg.scale)
                throw sgd::config_validation_error("/scale", "no frequency scaling configured (use --f2)");
            sgd::run_options opts;
            opts.stages = sgd::stage_write_series;
            opts.format = parse_format(scale_f.format);
            opts.out_dir = resolve_out(scale_f);
            const auto summary = sgd::run_pipeline(cfg, opts);
            std::cout << "wrote " << summary.files.size() << " file(s) to " << summary.out_dir.string() << '\n';
            return exit_ok;
        }
    } catch (const sgd::config_validation_error& e) {
        std::cerr << e.to_json().dump() << '\n';
        return exit_invalid;
    } catch (const sgd::error& e) {
        print_error(e);
        return exit_code_for(e);
    } catch (const std::filesystem::filesystem_error& e) {
        nlohmann::ordered_json j = {{"errors", {{{"kind", "data"}, {"message", e.what()}}}}};
        std::cerr << j.dump() << '\n';
        return exit_data;
    }
    return exit_invalid;
}
