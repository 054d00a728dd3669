#include "test_support.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <cmath>

using namespace sgd;
using sgd_test::scratch_dir;
using sgd_test::write_text;

namespace {

site_meta meta(const std::string& id) {
    site_meta m;
    m.site_id = id;
    m.region_tag = id;
    return m;
}

native_series native(const std::string& id, std::int64_t start, step_seconds step, std::vector<double> v,
                     std::vector<std::uint8_t> ok = {}) {
    native_series n;
    n.meta = meta(id);
    n.grid = time_grid{start, step, v.size()};
    n.series.site_id = id;
    if (ok.empty())
        ok.assign(v.size(), 1);
    n.series.values = std::move(v);
    n.series.valid = std::move(ok);
    return n;
}

} // namespace

TEST_CASE("CSV ingestion") {
    const auto dir = scratch_dir("csv");

    SECTION("three rows echo back on a 1 s grid") {
        write_text(dir / "a.csv", "timestamp_utc,attenuation_db,valid\n0,0.0,1\n1,1.5,1\n2,2.0,1\n");
        const auto s = load_series(dir / "a.csv", meta("A"));
        CHECK(s.grid.step == step_seconds{1});
        CHECK(s.grid.start_epoch == 0);
        CHECK(s.series.values == std::vector<double>{0.0, 1.5, 2.0});
        CHECK(s.series.valid == std::vector<std::uint8_t>{1, 1, 1});
    }
    SECTION("a missing row becomes an invalid sample") {
        write_text(dir / "b.csv", "timestamp_utc,attenuation_db,valid\n0,0.0,1\n2,2.0,1\n4,1.0,1\n5,1.0,1\n");
        const auto s = load_series(dir / "b.csv", meta("B"));
        CHECK(s.grid.count == 6);
        CHECK(s.series.valid == std::vector<std::uint8_t>{1, 0, 1, 0, 1, 1});
    }
    SECTION("missing row at t=1 over t=0..2") {
        write_text(dir / "b2.csv", "timestamp_utc,attenuation_db,valid\n0,0.0,1\n2,2.0,1\n");
        const auto s = load_series(dir / "b2.csv", meta("B2"));
        CHECK(s.grid.step == step_seconds{1});
        CHECK(s.series.valid == std::vector<std::uint8_t>{1, 0, 1});
    }
    SECTION("an empty attenuation field is invalid") {
        write_text(dir / "b3.csv", "timestamp_utc,attenuation_db,valid\n0,0.0,1\n1,,0\n2,2.0,1\n");
        const auto s = load_series(dir / "b3.csv", meta("B3"));
        CHECK(s.series.valid == std::vector<std::uint8_t>{1, 0, 1});
    }
    SECTION("coarse records need a declared step") {
        write_text(dir / "k.csv", "timestamp_utc,attenuation_db,valid\n0,1,1\n10,2,1\n30,3,1\n");
        CHECK(load_series(dir / "k.csv", meta("K")).grid.count == 31);
        const auto s = load_series(dir / "k.csv", meta("K"), step_seconds{10});
        CHECK(s.grid.count == 4);
        CHECK(s.series.valid == std::vector<std::uint8_t>{1, 1, 0, 1});
        CHECK_THROWS_AS(load_series(dir / "k.csv", meta("K"), step_seconds{20}), data_error);
    }
    SECTION("NaN and unparsable values are invalid") {
        write_text(dir / "c.csv", "timestamp_utc,attenuation_db,valid\n0,0.5,1\n1,NaN,1\n2,2.0,1\n3,abc,1\n4,1.0,0\n");
        const auto s = load_series(dir / "c.csv", meta("C"));
        CHECK(s.series.valid == std::vector<std::uint8_t>{1, 0, 1, 0, 0});
    }
    SECTION("ISO timestamps and sub-second steps") {
        write_text(dir / "d.csv",
                   "timestamp_utc,attenuation_db,valid\n"
                   "2024-01-01T00:00:00Z,1,1\n2024-01-01T00:00:00.5Z,2,1\n2024-01-01T00:00:01Z,3,1\n");
        const auto s = load_series(dir / "d.csv", meta("D"));
        CHECK(s.grid.start_epoch == 1704067200);
        CHECK(s.grid.step == step_seconds{1, 2});
        CHECK(s.grid.count == 3);
    }
    SECTION("negative values clamp to zero and are counted") {
        write_text(dir / "e.csv", "timestamp_utc,attenuation_db,valid\n0,-0.3,1\n1,0.2,1\n2,-1,1\n");
        const auto s = load_series(dir / "e.csv", meta("E"));
        CHECK(s.clamped == 2);
        CHECK(s.series.values == std::vector<double>{0.0, 0.2, 0.0});
    }
    SECTION("errors") {
        write_text(dir / "h.csv", "time,att,valid\n0,1,1\n");
        CHECK_THROWS_AS(load_series(dir / "h.csv", meta("H")), format_error);
        write_text(dir / "m.csv", "timestamp_utc,attenuation_db,valid\n0,1,1\n2,1,1\n1,1,1\n");
        CHECK_THROWS_AS(load_series(dir / "m.csv", meta("M")), data_error);
        write_text(dir / "dup.csv", "timestamp_utc,attenuation_db,valid\n0,1,1\n0,1,1\n");
        CHECK_THROWS_AS(load_series(dir / "dup.csv", meta("D")), data_error);
        write_text(dir / "empty.csv", "");
        CHECK_THROWS_AS(load_series(dir / "empty.csv", meta("E")), data_error);
        write_text(dir / "header_only.csv", "timestamp_utc,attenuation_db,valid\n");
        CHECK_THROWS_AS(load_series(dir / "header_only.csv", meta("E")), data_error);
        try {
            load_series(dir / "nope.csv", meta("N"));
            FAIL("expected a data error");
        } catch (const data_error& e) {
            CHECK(std::string(e.what()).find("nope.csv") != std::string::npos);
        }
    }
    SECTION("written series load back unchanged") {
        const time_grid g{1704067200, step_seconds{1}, 4};
        attenuation_series a{"W", {0.0, 1.25, 0.0, 7.5}, {1, 1, 0, 1}};
        write_series_csv(dir / "w.csv", g, a);
        const auto s = load_series(dir / "w.csv", meta("W"));
        CHECK(s.grid == g);
        CHECK(s.series.valid == a.valid);
        CHECK(s.series.values[1] == 1.25);
        CHECK(s.series.values[3] == 7.5);
    }
}

TEST_CASE("series set invariants") {
    using sgd_test::make_site;
    const auto g = sgd_test::grid_1s(3);
    CHECK_THROWS_AS(series_set(g, {make_site("A", {0, 0, 0}), make_site("A", {0, 0, 0})}), data_error);
    CHECK_THROWS_AS(series_set(g, {make_site("A", {0, 0})}), data_error);
    CHECK_THROWS_AS(series_set(g, {make_site("A", {0, -1, 0})}), data_error);
    CHECK_NOTHROW(series_set(g, {make_site("A", {0, -1, 0}, {1, 0, 1})}));

    const series_set s(g, {make_site("A", {0, 0, 0}, {1, 0, 1}), make_site("B", {0, 0, 0}, {1, 1, 0})});
    CHECK(s.concurrent_valid_count() == 1);
    CHECK(s.concurrent_validity_fraction() == Catch::Approx(1.0 / 3.0));
    CHECK(s.find("B") == 1u);
    CHECK_FALSE(s.find("C"));
}

TEST_CASE("concurrent validity matches a brute-force scan") {
    std::mt19937_64 gen(11);
    for (int trial = 0; trial < 20; ++trial) {
        const auto set = sgd_test::random_set(gen, 4, 500, 0.1);
        std::size_t all = 0;
        for (std::size_t k = 0; k < 500; ++k) {
            bool ok = true;
            for (const auto& s : set.sites())
                ok = ok && s.series.valid[k];
            all += ok;
        }
        CHECK(set.concurrent_validity_fraction() == static_cast<double>(all) / 500.0);
    }
}

TEST_CASE("harmonize") {
    SECTION("identity at the native step") {
        const std::vector<native_series> in{native("A", 10, step_seconds{1}, {0, 1, 2, 3}, {1, 0, 1, 1})};
        const auto out = harmonize(in, step_seconds{1});
        CHECK(out.grid() == in[0].grid);
        CHECK(out[0].series.values[2] == 2.0);
        CHECK(out[0].series.valid == in[0].series.valid);
    }
    SECTION("two half-second samples average into one bin") {
        const std::vector<native_series> in{native("A", 0, step_seconds{1, 2}, {2, 4})};
        const auto out = harmonize(in, step_seconds{1});
        REQUIRE(out.grid().count == 1);
        CHECK(out[0].series.values[0] == 3.0);
    }
    SECTION("max reducer keeps the bin peak") {
        const std::vector<native_series> in{native("A", 0, step_seconds{1, 2}, {2, 4})};
        CHECK(harmonize(in, step_seconds{1}, bin_reducer::max)[0].series.values[0] == 4.0);
    }
    SECTION("bins with no valid native sample are invalid") {
        const std::vector<native_series> in{
            native("A", 0, step_seconds{1, 2}, {1, 1, 5, 5, 2, 6}, {1, 1, 0, 0, 0, 1})};
        const auto out = harmonize(in, step_seconds{1});
        CHECK(out[0].series.valid == std::vector<std::uint8_t>{1, 0, 1});
        CHECK(out[0].series.values[2] == 6.0);
    }
    SECTION("output spans the intersection") {
        std::vector<double> a(101, 1.0), b(101, 2.0);
        const std::vector<native_series> in{native("A", 0, step_seconds{1}, a), native("B", 50, step_seconds{1}, b)};
        const auto out = harmonize(in, step_seconds{1});
        CHECK(out.grid().start_epoch == 50);
        CHECK(out.grid().instant_floor(out.grid().count - 1) == 100);
        CHECK(out.concurrent_valid_count() == 51);
    }
    SECTION("disjoint spans are rejected") {
        const std::vector<native_series> in{native("A", 0, step_seconds{1}, {0, 0}),
                                            native("B", 10, step_seconds{1}, {0, 0})};
        CHECK_THROWS_AS(harmonize(in, step_seconds{1}), span_error);
    }
    SECTION("upsampling holds a value for one native step only") {
        const std::vector<native_series> in{native("A", 0, step_seconds{2}, {1, 3, 5}, {1, 0, 1})};
        const auto out = harmonize(in, step_seconds{1});
        REQUIRE(out.grid().count == 5);
        CHECK(out[0].series.valid == std::vector<std::uint8_t>{1, 1, 0, 0, 1});
        CHECK(out[0].series.values[1] == 1.0);
    }
    SECTION("mixed native steps land on one grid") {
        const std::vector<native_series> in{native("A", 0, step_seconds{1, 4}, std::vector<double>(41, 1.0)),
                                            native("B", 0, step_seconds{5}, {2, 2, 2})};
        const auto out = harmonize(in, step_seconds{1});
        CHECK(out.grid().count == 11);
        for (const auto& s : out.sites())
            CHECK(s.series.values.size() == 11);
    }
}

TEST_CASE("harmonize is idempotent") {
    std::mt19937_64 gen(5);
    std::uniform_real_distribution<double> u(0.0, 10.0);
    for (auto [num, den] : {std::pair{1, 4}, std::pair{1, 2}, std::pair{3, 1}, std::pair{2, 1}}) {
        std::vector<double> v(240);
        std::vector<std::uint8_t> ok(240, 1);
        for (std::size_t k = 0; k < v.size(); ++k) {
            v[k] = u(gen);
            ok[k] = u(gen) > 1.0;
        }
        const std::vector<native_series> in{native("A", 7, step_seconds{num, den}, v, ok)};
        for (auto target : {step_seconds{1}, step_seconds{5}, step_seconds{1, 3}}) {
            const auto once = harmonize(in, target);
            const auto twice = harmonize(once, target);
            CHECK(twice.grid() == once.grid());
            CHECK(twice[0].series.values == once[0].series.values);
            CHECK(twice[0].series.valid == once[0].series.valid);
        }
    }
}

TEST_CASE("downsampling conserves the mean over aligned valid spans") {
    std::mt19937_64 gen(9);
    std::uniform_real_distribution<double> u(0.0, 20.0);
    for (int factor : {2, 4, 10}) {
        std::vector<double> v(static_cast<std::size_t>(60 * factor));
        for (auto& x : v)
            x = u(gen);
        const std::vector<native_series> in{native("A", 0, step_seconds{1, factor}, v)};
        const auto out = harmonize(in, step_seconds{1});
        REQUIRE(out.grid().count == 60);
        double native_mean = 0, target_mean = 0;
        for (double x : v)
            native_mean += x;
        native_mean /= static_cast<double>(v.size());
        for (double x : out[0].series.values)
            target_mean += x;
        target_mean /= 60.0;
        CHECK(std::abs(native_mean - target_mean) < 1e-9);
    }
}
