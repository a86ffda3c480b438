#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <random>

#include "test_util.hpp"
#include "vectwin/schemes.hpp"

using namespace vectwin;

namespace {

std::vector<PolicyMap> midpoint_maps(const Topology& topo) {
    ActionBounds b;
    b.v_min = 5.0;
    b.v_max = 25.0;
    b.input_size = 0.2;
    std::vector<double> raw(static_cast<std::size_t>(action_dimension(topo.num_rsus())), 0.0);
    return decode_action(raw, topo, b, 1);
}

DecisionInput input(VehicleId v, Meters x, MetersPerSecond speed, Direction dir,
                    const Topology& topo) {
    DecisionInput in;
    in.vehicle = v;
    in.x = x;
    in.predicted_speed = dir == Direction::forward ? speed : -speed;
    in.direction = dir;
    in.connected = rsu_at(x, topo);
    in.next = next_rsu_of(in.connected, dir, topo);
    return in;
}

}  // namespace

TEST_CASE("scheme names round-trip") {
    for (const char* name : {"dt_matching", "dt_only", "migrate_x", "no_coop"})
        CHECK(scheme_name(parse_scheme(name)) == name);
    CHECK_THROWS_AS(parse_scheme("bogus"), ConfigError);
    CHECK(scheme_uses_ddpg(SchemeKind::dt_matching));
    CHECK(scheme_uses_ddpg(SchemeKind::dt_only));
    CHECK_FALSE(scheme_uses_ddpg(SchemeKind::migrate_x));
    CHECK_FALSE(scheme_uses_ddpg(SchemeKind::no_coop));
}

TEST_CASE("no_coop pins everything to the connected RSU") {
    auto topo = testutil::topology6();
    SchemeConfig scheme{SchemeKind::no_coop, 0.0};
    SchemeCounters counters;
    const std::vector<Seconds> snap(6, 0.0);
    auto out = decide_slot(scheme,
                           {input(1, 430.0, 15.0, Direction::forward, topo),
                            input(2, 80.0, 12.0, Direction::backward, topo)},
                           {}, snap, 0.2, topo, {}, counters);
    CHECK(out.at(1).processing == 2);
    CHECK(out.at(1).delivery == 2);
    CHECK(out.at(2).processing == 0);
    CHECK(out.at(2).delivery == 0);
    CHECK(counters.policy_map_lookups == 0);
    CHECK(counters.matching_runs == 0);
}

TEST_CASE("migrate_x threshold rule") {
    auto topo = testutil::topology6();
    SchemeCounters counters;
    const std::vector<Seconds> snap(6, 0.0);

    SUBCASE("within the threshold of the exit edge migrates") {
        SchemeConfig scheme{SchemeKind::migrate_x, 50.0};
        // Forward in RSU 2 ([400,600]), 30 m before the edge.
        auto out = decide_slot(scheme, {input(1, 570.0, 15.0, Direction::forward, topo)}, {},
                               snap, 0.2, topo, {}, counters);
        CHECK(out.at(1).delivery == 3);
        CHECK(out.at(1).processing == 2);
        // Backward in RSU 2, 30 m before its lower edge.
        auto out2 = decide_slot(scheme, {input(2, 430.0, 15.0, Direction::backward, topo)}, {},
                                snap, 0.2, topo, {}, counters);
        CHECK(out2.at(2).delivery == 1);
    }
    SUBCASE("outside the threshold stays local") {
        SchemeConfig scheme{SchemeKind::migrate_x, 50.0};
        auto out = decide_slot(scheme, {input(1, 480.0, 15.0, Direction::forward, topo)}, {},
                               snap, 0.2, topo, {}, counters);
        CHECK(out.at(1).delivery == 2);
    }
    SUBCASE("zero threshold never migrates") {
        SchemeConfig scheme{SchemeKind::migrate_x, 0.0};
        for (double x : {410.0, 500.0, 599.0}) {
            auto out = decide_slot(scheme, {input(1, x, 20.0, Direction::forward, topo)}, {},
                                   snap, 0.2, topo, {}, counters);
            CHECK(out.at(1).delivery == 2);
        }
    }
    SUBCASE("no next RSU at the road end") {
        SchemeConfig scheme{SchemeKind::migrate_x, 50.0};
        auto out = decide_slot(scheme, {input(1, 1190.0, 20.0, Direction::forward, topo)}, {},
                               snap, 0.2, topo, {}, counters);
        CHECK(out.at(1).delivery == 5);
    }
    CHECK(counters.policy_map_lookups == 0);
    CHECK(counters.matching_runs == 0);
}

TEST_CASE("dt_only consults the policy map but not the matcher") {
    auto topo = testutil::topology6();
    auto maps = midpoint_maps(topo);
    SchemeCounters counters;
    const std::vector<Seconds> snap(6, 0.0);
    SchemeConfig scheme{SchemeKind::dt_only, 0.0};
    auto out = decide_slot(scheme, {input(1, 430.0, 15.0, Direction::forward, topo)}, maps, snap,
                           0.2, topo, {}, counters);
    CHECK(out.at(1).processing == 2);  // never load-balances
    CHECK(counters.policy_map_lookups == 1);
    CHECK(counters.matching_runs == 0);
    // Midpoint maps: the line benchmark through the cell centre dominates
    // almost everywhere off the point benchmark.
    CHECK(out.at(1).delivery == 3);
}

TEST_CASE("dt_matching runs the matcher once per slot") {
    auto topo = testutil::topology6();
    auto maps = midpoint_maps(topo);
    SchemeCounters counters;
    const std::vector<Seconds> snap(6, 0.0);
    SchemeConfig scheme{SchemeKind::dt_matching, 0.0};
    auto out = decide_slot(scheme,
                           {input(1, 430.0, 15.0, Direction::forward, topo),
                            input(2, 450.0, 18.0, Direction::forward, topo)},
                           maps, snap, 0.2, topo, {}, counters);
    CHECK(counters.matching_runs == 1);
    CHECK(counters.policy_map_lookups == 2);
    for (const auto& [vid, d] : out) {
        CHECK(eligible_processors(2, topo).contains(d.processing));
        CHECK(d.proposals >= 1);
    }
}

TEST_CASE("every scheme emits policies within the allowed sets") {
    auto topo = testutil::topology6();
    auto maps = midpoint_maps(topo);
    std::mt19937_64 rng(77);
    const std::vector<SchemeConfig> schemes{{SchemeKind::no_coop, 0.0},
                                            {SchemeKind::migrate_x, 50.0},
                                            {SchemeKind::dt_only, 0.0},
                                            {SchemeKind::dt_matching, 0.0}};
    for (const auto& scheme : schemes) {
        for (int trial = 0; trial < 50; ++trial) {
            std::vector<DecisionInput> inputs;
            const int n = 1 + static_cast<int>(rng() % 5);
            for (int i = 0; i < n; ++i) {
                const double x = static_cast<double>(rng() % 12000) / 10.0;
                const Direction dir = rng() % 2 == 0 ? Direction::forward : Direction::backward;
                inputs.push_back(input(static_cast<VehicleId>(i + 1), x,
                                       5.0 + static_cast<double>(rng() % 200) / 10.0, dir, topo));
            }
            std::vector<Seconds> snap(6);
            for (auto& s : snap) s = static_cast<double>(rng() % 20) / 10.0;
            SchemeCounters counters;
            auto out = decide_slot(scheme, inputs, maps, snap, 0.2, topo, {}, counters);
            for (const auto& in : inputs) {
                const auto& d = out.at(in.vehicle);
                CHECK(eligible_processors(in.connected, topo).contains(d.processing));
                const bool local = d.delivery == in.connected;
                const bool ahead = in.next.has_value() && d.delivery == *in.next;
                CHECK((local || ahead));
            }
        }
    }
}
