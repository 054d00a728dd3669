#include "test_support.hpp"

#include <catch2/catch_amalgamated.hpp>

using namespace sgd;
using sgd_test::read_text;
using sgd_test::scratch_dir;
using sgd_test::write_text;

namespace {

json minimal_doc() {
    return json::parse(R"({
        "seed": 7,
        "sites": [{"id": "A", "region": "north"}],
        "synth": {"start": "2024-01-01T00:00:00Z", "step_s": 1, "days": 1,
                  "models": {"A": {"rate_per_day": 8}}},
        "stats": {"thresholds_db": [0, 1, 5, 10]}
    })");
}

json network_doc() {
    auto doc = json::parse(R"({
        "seed": 11,
        "sites": [
            {"id": "G1", "region": "R1"}, {"id": "G2", "region": "R1"},
            {"id": "G3", "region": "R2"}, {"id": "G4", "region": "R2"},
            {"id": "G5", "region": "R3"}, {"id": "G6", "region": "R3"}
        ],
        "synth": {"start": 1704067200, "step_s": 1, "days": 3, "models": {}},
        "stats": {},
        "network": {"gateways": ["G1", "G2", "G3", "G4", "G5", "G6"], "N": 4, "P": 2, "fm_db": 5,
                    "runs": {"delays_s": [0, 2], "sst_db": [5, 10]}},
        "no_sgd": {"N": 4, "min_regions": 3, "fm_db": [5]},
        "sweep": {"sst_db": [5, 6, 7, 8, 9, 10, 11, 12, 13, 14]},
        "cluster": {"enumerate": {"N": 2, "P": 1}, "sst_db": [5]}
    })");
    for (int i = 1; i <= 6; ++i)
        doc["synth"]["models"]["G" + std::to_string(i)] = {{"rate_per_day", 6}, {"duration_mu", 5.5}};
    return doc;
}

run_options to(const std::filesystem::path& dir, unsigned stages = stage_all) {
    run_options o;
    o.out_dir = dir;
    o.stages = stages;
    return o;
}

} // namespace

TEST_CASE("minimal synthetic stats run") {
    const auto dir = scratch_dir("pipe_min");
    const auto cfg = parse_scenario(minimal_doc(), dir);
    const auto s = run_pipeline(cfg, to(dir / "out"));
    const auto report = json::parse(read_text(dir / "out" / "report.json"));
    CHECK(report["tool"] == "sgdemu");
    CHECK(report["seed"] == 7);
    const auto& ex = report["stats"]["sites"][0]["exceedance"];
    CHECK(ex["thresholds_db"].size() == 4);
    CHECK(ex["valid_samples"] == 86400);
    CHECK(std::filesystem::exists(dir / "out" / "stats" / "exceedance_A.csv"));
    CHECK(std::filesystem::exists(dir / "out" / "manifest.json"));
    CHECK_FALSE(report.contains("emulation"));
}

TEST_CASE("CSV sites are loaded relative to the configuration") {
    const auto dir = scratch_dir("pipe_csv");
    write_text(dir / "data" / "a.csv", "timestamp_utc,attenuation_db,valid\n0,6,1\n1,6,1\n2,0,1\n3,0,1\n");
    write_text(dir / "data" / "b.csv",
               "timestamp_utc,attenuation_db,valid\n0,0,1\n0.5,0,1\n1,0,1\n1.5,0,1\n2,8,1\n2.5,8,1\n3,0,1\n3.5,0,1\n");
    auto doc = json::parse(R"({
        "sites": [{"id": "A", "csv": "data/a.csv"}, {"id": "B", "csv": "data/b.csv"}],
        "stats": {"thresholds_db": [5]},
        "network": {"gateways": ["A", "B"], "N": 1, "P": 1, "policy": "first_in_order"}
    })");
    const auto cfg = parse_scenario(doc, dir);
    const auto s = run_pipeline(cfg, to(dir / "out"));
    CHECK(s.report["inputs"]["grid"]["count"] == 4);
    const auto& run = s.report["emulation"]["runs"][0];
    CHECK(run["network_switches"] == 2);
    CHECK(run["availability_percent"] == 100.0);
}

TEST_CASE("missing CSV names the path") {
    const auto dir = scratch_dir("pipe_missing");
    auto doc = json::parse(R"({"sites": [{"id": "A", "csv": "nowhere.csv"}], "stats": {}})");
    const auto cfg = parse_scenario(doc, dir);
    try {
        run_pipeline(cfg, to(dir / "out"));
        FAIL("expected a data error");
    } catch (const data_error& e) {
        CHECK(std::string(e.what()).find("nowhere.csv") != std::string::npos);
    }
}

TEST_CASE("validation collects every issue") {
    auto doc = json::parse(R"({
        "sites": [{"id": "A"}, {"id": "A", "elevation_deg": 0}],
        "synth": {"count": 10, "models": {"A": {"rate_per_day": 1}, "Z": {"rate_per_day": 1}}},
        "network": {"gateways": ["A", "Q"], "N": 1, "P": 1, "fm_db": 5, "sst_db": 6},
        "sweep": {"sst_db": [3, 2]}
    })");
    try {
        parse_scenario(doc, ".");
        FAIL("expected validation errors");
    } catch (const config_validation_error& e) {
        std::set<std::string> paths;
        for (const auto& i : e.issues())
            paths.insert(i.path);
        CHECK(paths.count("/sites/1/id"));
        CHECK(paths.count("/sites/1/elevation_deg"));
        CHECK(paths.count("/synth/models/Z"));
        CHECK(paths.count("/network/gateways/1"));
        CHECK(paths.count("/seed"));
        CHECK(e.to_json()["errors"].size() == e.issues().size());
    }
}

TEST_CASE("a seed is required only for randomness") {
    auto doc = minimal_doc();
    doc.erase("seed");
    CHECK_THROWS_AS(parse_scenario(doc, "."), config_validation_error);
    CHECK(parse_scenario(doc, ".", 5).seed == 5u);
}

TEST_CASE("non-PSD correlation is a validation error") {
    auto doc = network_doc();
    doc["synth"]["correlation"] = json::array();
    for (int i = 0; i < 6; ++i) {
        json row = json::array();
        for (int j = 0; j < 6; ++j)
            row.push_back(i == j ? 1.0 : 0.9);
        doc["synth"]["correlation"].push_back(row);
    }
    doc["synth"]["correlation"][0][5] = 0.0;
    doc["synth"]["correlation"][5][0] = 0.0;
    doc["synth"]["correlation"][1][4] = 0.0;
    doc["synth"]["correlation"][4][1] = 0.0;
    CHECK_THROWS_AS(parse_scenario(doc, "."), config_validation_error);
}

TEST_CASE("full 4+2 bundle") {
    const auto dir = scratch_dir("pipe_full");
    const auto cfg = parse_scenario(network_doc(), dir);
    const auto s = run_pipeline(cfg, to(dir / "out"));
    const auto out = dir / "out";
    for (const char* f : {"report.json", "manifest.json", "stats/fade_table.csv", "stats/joint_exceedance.csv",
                          "stats/fade_duration_5db.csv", "emulation/network_table.csv",
                          "emulation/gateway_switches.csv", "emulation/no_sgd.csv", "emulation/run_1_daily.csv",
                          "emulation/run_4_switch_histogram.csv", "sweep/sst_sweep.csv", "cluster/category_1.csv",
                          "cluster/category_2.csv"})
        CHECK(std::filesystem::exists(out / f));

    const auto& runs = s.report["emulation"]["runs"];
    REQUIRE(runs.size() == 4);
    for (const auto& r : runs) {
        CHECK(r["switching_outage_s"].get<double>() ==
              r["network_switches"].get<double>() * r["delay_s"].get<double>());
        std::size_t sum = 0;
        for (const auto& [id, n] : r["per_gw_switches"].items())
            sum += n.get<std::size_t>();
        CHECK(sum == 2 * r["network_switches"].get<std::size_t>());
    }
    CHECK(s.report["sweep"]["points"].size() == 10);
    CHECK(s.report["cluster"]["pairs"].size() == 10);
    CHECK(s.report["no_sgd"]["combinations"].size() == 12);

    const auto table = sgd_test::parse_csv(read_text(out / "emulation" / "network_table.csv"));
    CHECK(table[0].size() == 5);
    CHECK(table[1][1] == fixed4(runs[0]["availability_percent"].get<double>()));

    const auto manifest = json::parse(read_text(out / "manifest.json"));
    CHECK(manifest["files"].size() + 1 == s.files.size());  // the manifest does not list itself
}

TEST_CASE("reports regenerate from their embedded configuration") {
    const auto dir = scratch_dir("pipe_regen");
    const auto first = run_pipeline(parse_scenario(network_doc(), dir), to(dir / "a"));
    const auto manifest = json::parse(read_text(dir / "a" / "manifest.json"));
    const auto again = run_pipeline(parse_scenario(manifest["config"], dir), to(dir / "b"));
    REQUIRE(first.files == again.files);
    for (const auto& f : first.files)
        CHECK(read_text(dir / "a" / f) == read_text(dir / "b" / f));
}

TEST_CASE("format selection and delay override") {
    const auto dir = scratch_dir("pipe_fmt");
    const auto cfg = parse_scenario(network_doc(), dir);
    auto o = to(dir / "json", stage_emulate);
    o.format = output_format::json;
    o.delay_override = 2.0;
    const auto s = run_pipeline(cfg, o);
    CHECK(s.files.size() == 2);
    const auto& runs = s.report["emulation"]["runs"];
    REQUIRE(runs.size() == 2);  // one delay, two thresholds
    CHECK(runs[0]["delay_s"] == 2.0);
    CHECK(s.report["config"]["network"]["delay_s"] == 2.0);

    o = to(dir / "csv", stage_emulate);
    o.format = output_format::csv;
    const auto c = run_pipeline(cfg, o);
    CHECK_FALSE(std::filesystem::exists(dir / "csv" / "report.json"));
    CHECK(std::filesystem::exists(dir / "csv" / "emulation" / "network_table.csv"));
}

TEST_CASE("frequency scaling stage") {
    const auto dir = scratch_dir("pipe_scale");
    write_text(dir / "a.csv", "timestamp_utc,attenuation_db,valid\n0,10,1\n1,0,1\n");
    auto doc = json::parse(R"({"sites": [{"id": "A", "csv": "a.csv", "frequency_ghz": 40}],
                               "scale": {"f2_ghz": 50}})");
    const auto cfg = parse_scenario(doc, dir);
    const auto s = run_pipeline(cfg, to(dir / "out", stage_write_series));
    const auto rows = sgd_test::parse_csv(read_text(dir / "out" / "series" / "A.csv"));
    REQUIRE(rows.size() == 3);
    CHECK(rows[1][1] == fixed4(scale_attenuation(10, 40, 50)));
    CHECK(rows[2][1] == "0.0000");

    doc["scale"]["f2_ghz"] = 70;
    CHECK_THROWS_AS(parse_scenario(doc, dir), config_validation_error);
}
