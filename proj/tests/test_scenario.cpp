#include "test_support.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <set>

using namespace sgd;
using sgd_test::make_set;
using sgd_test::network_of;

namespace {

std::vector<gateway_config> regional_roster(std::size_t n, std::size_t per_region) {
    std::vector<gateway_config> out;
    for (std::size_t i = 0; i < n; ++i)
        out.push_back({"G" + std::to_string(i + 1), "R" + std::to_string(i / per_region + 1), 5, 5});
    return out;
}

// Brute force over bit masks.
std::size_t count_subsets(const std::vector<gateway_config>& roster, std::size_t n, std::size_t min_regions) {
    std::size_t count = 0;
    for (unsigned mask = 0; mask < (1u << roster.size()); ++mask) {
        if (static_cast<std::size_t>(__builtin_popcount(mask)) != n)
            continue;
        std::set<std::string> regions;
        for (std::size_t i = 0; i < roster.size(); ++i)
            if (mask & (1u << i))
                regions.insert(roster[i].region_tag);
        count += regions.size() >= min_regions;
    }
    return count;
}

emulation_result result_with(double availability, std::size_t switches) {
    emulation_result r;
    r.availability_percent = availability;
    r.network_switches = switches;
    return r;
}

series_set regional_set(const sgd::series_set& raw) {
    std::vector<site_series> sites(raw.sites().begin(), raw.sites().end());
    for (std::size_t i = 0; i < sites.size(); ++i)
        sites[i].meta.region_tag = "R" + std::to_string(i / 2 + 1);
    return series_set(raw.grid(), std::move(sites));
}

network_config regional_network(const series_set& set, double sst) {
    auto cfg = network_of(set, 4, 2, sst, sst);
    for (std::size_t i = 0; i < cfg.gateways.size(); ++i)
        cfg.gateways[i].region_tag = set[i].meta.region_tag;
    return cfg;
}

} // namespace

TEST_CASE("combination enumeration") {
    const auto six = regional_roster(6, 2);
    const auto all = enumerate_combinations(six, 4, 3);
    CHECK(all.size() == 12);
    CHECK(all.front() == std::vector<std::size_t>{0, 1, 2, 4});
    CHECK(std::is_sorted(all.begin(), all.end()));
    for (const auto& s : all)
        CHECK(distinct_regions(six, s) == 3);

    CHECK(enumerate_combinations(six, 6, 1).size() == 1);
    CHECK(enumerate_combinations(regional_roster(4, 2), 3, 3).empty());
    CHECK_THROWS_AS(enumerate_combinations(six, 7, 1), config_error);

    for (std::size_t n = 0; n <= 6; ++n)
        for (std::size_t k = 0; k <= 4; ++k)
            CHECK(enumerate_combinations(six, n, k).size() == count_subsets(six, n, k));
}

TEST_CASE("partitions into 2+1 sub-networks") {
    network_config tmpl;
    tmpl.gateways = regional_roster(6, 2);
    tmpl.active_count = 4;
    tmpl.redundant_count = 2;
    const auto plans = enumerate_partitions(tmpl, 2, 1);
    CHECK(plans.size() == 10);
    std::size_t cat1 = 0;
    std::set<std::string> labels;
    for (const auto& p : plans) {
        cat1 += p.category() == 1;
        labels.insert(p.label());
        REQUIRE(p.sub_networks().size() == 2);
        CHECK(p.sub_networks()[0].gateways.front().site_id == "G1");
        CHECK(p.sub_networks()[0].active_count == 2);
    }
    CHECK(cat1 == 4);
    CHECK(labels.size() == 10);
    CHECK_THROWS_AS(enumerate_partitions(tmpl, 3, 1), plan_error);
}

TEST_CASE("cluster plan checks") {
    const auto roster = regional_roster(6, 2);
    auto sub = [&](std::initializer_list<std::size_t> idx) {
        network_config n;
        for (auto i : idx)
            n.gateways.push_back(roster[i]);
        n.active_count = 2;
        n.redundant_count = 1;
        return n;
    };
    CHECK_THROWS_AS(cluster_plan({sub({0, 1, 2}), sub({2, 3, 4})}), plan_error);
    CHECK_THROWS_AS(cluster_plan({sub({0, 1, 2}), sub({3, 4, 5})}, std::span(roster).first(5)), plan_error);
    CHECK(cluster_plan({sub({0, 2, 4}), sub({1, 3, 5})}).category() == 1);
    CHECK(cluster_plan({sub({0, 1, 2}), sub({3, 4, 5})}).category() == 2);
}

TEST_CASE("pair metrics") {
    const auto p = aggregate_pair({result_with(99.9439, 420), result_with(99.9660, 351)}, 1);
    CHECK(p.pair_availability == (99.9439 + 99.9660) / 2);
    CHECK(p.pair_availability == Catch::Approx(99.9550).margin(5e-5));
    CHECK(p.pair_switches == 771);
    CHECK(aggregate_pair({result_with(99.5, 3), result_with(99.5, 4)}, 2).pair_availability == 99.5);
    CHECK_THROWS_AS(aggregate_pair({}, 1), plan_error);
}

TEST_CASE("cluster evaluation on all-zero data") {
    const std::vector<double> z(50, 0.0);
    const auto set = regional_set(make_set({z, z, z, z, z, z}));
    const auto tmpl = regional_network(set, 5);
    for (const auto& plan : enumerate_partitions(tmpl, 2, 1)) {
        const auto r = evaluate_cluster_plan(set, plan, true);
        CHECK(r.pair_availability == 100.0);
        CHECK(r.pair_switches == 0);
        CHECK(r.category == plan.category());
    }
}

TEST_CASE("SST sweep") {
    SECTION("all-zero data") {
        const std::vector<double> z(20, 0.0);
        const auto set = make_set({z, z, z});
        const std::vector<double> ssts{1, 5, 9};
        const auto s = sst_sweep(set, network_of(set, 2, 1, 5, 5), ssts);
        REQUIRE(s.points.size() == 3);
        for (const auto& p : s.points) {
            CHECK(p.availability_percent == 100.0);
            CHECK(p.network_switches == 0);
        }
    }
    SECTION("random data matches the oracle at each point") {
        std::mt19937_64 gen(41);
        const auto set = sgd_test::random_set(gen, 6, 3000);
        const std::vector<double> ssts{3, 6, 9};
        const auto s = sst_sweep(set, network_of(set, 4, 2, 5, 5), ssts, sweep_mode::common_dimensioning, true);
        for (std::size_t i = 0; i < ssts.size(); ++i) {
            CHECK(s.points[i].availability_percent == sgd_test::oracle_availability_w0(set, 4, ssts[i]));
            if (i > 0)
                CHECK(s.points[i].availability_percent >= s.points[i - 1].availability_percent);
        }
    }
    SECTION("threshold-only keeps the fade margins") {
        const auto set = make_set({{7, 0}, {0, 0}});
        const std::vector<double> ssts{4, 8};
        const auto s = sst_sweep(set, network_of(set, 1, 1, 8, 8), ssts, sweep_mode::threshold_only);
        CHECK(s.points[0].network_switches == 1);
        CHECK(s.points[1].network_switches == 0);
        CHECK(s.points[1].availability_percent == 100.0);
    }
    SECTION("values must ascend") {
        const auto set = make_set({{0}, {0}});
        const std::vector<double> ssts{5, 5};
        CHECK_THROWS_AS(sst_sweep(set, network_of(set, 1, 1, 5, 5), ssts), config_error);
    }
}

TEST_CASE("daily breakdown histogram") {
    SECTION("six switches on one day fall in [6,8)") {
        // Alternating faults force one switch per sample.
        const auto flip = make_set({{6, 0, 6, 0, 6, 0}, {0, 6, 0, 6, 0, 6}});
        const auto r = emulate(flip, network_of(flip, 1, 1, 5, 5));
        REQUIRE(r.network_switches == 6);
        const auto d = daily_breakdown(r);
        CHECK(d.days_with_switches == 1);
        REQUIRE(d.histogram.size() == 4);
        CHECK(d.histogram[3].lo == 6);
        CHECK(d.histogram[3].hi == 8);
        CHECK(d.histogram[3].days == 1);
        CHECK(d.histogram[0].days + d.histogram[1].days + d.histogram[2].days == 0);
    }
    SECTION("no switches, empty histogram") {
        const auto set = make_set({{0, 0}, {0, 0}});
        const auto d = daily_breakdown(emulate(set, network_of(set, 1, 1, 5, 5)));
        CHECK(d.histogram.empty());
        CHECK(d.days_with_switches == 0);
        CHECK(d.days_with_outages == 0);
    }
    SECTION("bins {1}, [2,4), [4,6)") {
        emulation_result r;
        for (std::size_t s : {1, 2, 3, 4, 5, 0, 1})
            r.daily.push_back({0, 1, 0, 0, s, 1, 0, 0, 100.0});
        const auto d = daily_breakdown(r);
        REQUIRE(d.histogram.size() == 3);
        CHECK(d.histogram[0].days == 2);
        CHECK(d.histogram[1].days == 2);
        CHECK(d.histogram[2].days == 2);
        CHECK(d.days_with_switches == 6);
    }
}

TEST_CASE("no-diversity combinations") {
    const auto set = regional_set(make_set({{6, 0, 0}, {0, 0, 0}, {0, 6, 0}, {0, 0, 0}, {0, 0, 6}, {0, 0, 0}}));
    const auto roster = regional_network(set, 5).gateways;
    const std::vector<double> fms{5, 10};
    const auto rows = no_sgd_combinations(set, roster, 4, 3, fms);
    REQUIRE(rows.size() == 12);
    for (const auto& row : rows) {
        std::vector<gateway_config> members;
        for (auto i : row.members)
            members.push_back(roster[i]);
        CHECK(row.availability_percent[0] == availability_no_sgd(set, members));
        CHECK(row.availability_percent[1] == 100.0);
    }
}

TEST_CASE("sub-networks are emulated on their own members") {
    std::mt19937_64 gen(42);
    for (int trial = 0; trial < 10; ++trial) {
        const auto set = regional_set(sgd_test::random_set(gen, 6, 2000));
        const auto tmpl = regional_network(set, 8);
        for (const auto& plan : enumerate_partitions(tmpl, 2, 1)) {
            const auto pair = evaluate_cluster_plan(set, plan);
            double sum = 0;
            for (std::size_t i = 0; i < 2; ++i) {
                std::vector<site_series> members;
                for (const auto& g : plan.sub_networks()[i].gateways)
                    members.push_back(set.at(g.site_id));
                const series_set sub(set.grid(), std::move(members));
                CHECK(pair.sub_results[i].availability_percent == sgd_test::oracle_availability_w0(sub, 2, 8));
                sum += pair.sub_results[i].availability_percent;
            }
            CHECK(pair.pair_availability == sum / 2);
        }
    }
}

TEST_CASE("ordered parallel map keeps index order") {
    const auto out = ordered_map(8, [](std::size_t i) { return i * i; }, true);
    for (std::size_t i = 0; i < 8; ++i)
        CHECK(out[i] == i * i);
}
