#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <sstream>

#include "vectwin/mobility.hpp"

using namespace vectwin;

namespace {

SyntheticMobilityConfig quiet_config() {
    SyntheticMobilityConfig c;
    c.initial_vehicles = 5;
    c.arrival_rate_per_slot = 0.1;
    return c;
}

}  // namespace

TEST_CASE("synthetic generator is deterministic per seed") {
    SyntheticMobility a(quiet_config(), 1200.0, 0.5, 7);
    SyntheticMobility b(quiet_config(), 1200.0, 0.5, 7);
    for (SlotIndex t = 0; t < 50; ++t) {
        const auto sa = a.advance(t);
        const auto sb = b.advance(t);
        REQUIRE(sa.size() == sb.size());
        for (std::size_t i = 0; i < sa.size(); ++i) {
            CHECK(sa[i].vehicle == sb[i].vehicle);
            CHECK(sa[i].position == sb[i].position);
            CHECK(sa[i].speed == sb[i].speed);
        }
    }
    SyntheticMobility c(quiet_config(), 1200.0, 0.5, 8);
    auto s7 = SyntheticMobility(quiet_config(), 1200.0, 0.5, 7).advance(0);
    auto s8 = c.advance(0);
    bool all_equal = s7.size() == s8.size();
    if (all_equal)
        for (std::size_t i = 0; i < s7.size(); ++i)
            all_equal = all_equal && s7[i].position == s8[i].position;
    CHECK_FALSE(all_equal);
}

TEST_CASE("synthetic generator respects speed bounds and step size") {
    auto cfg = quiet_config();
    SyntheticMobility gen(cfg, 1200.0, 0.5, 12345);
    std::map<VehicleId, double> last_pos;
    for (SlotIndex t = 0; t < 200; ++t) {
        for (const TraceSample& s : gen.advance(t)) {
            CHECK(std::abs(s.speed) >= cfg.speed_min);
            CHECK(std::abs(s.speed) <= cfg.speed_max);
            CHECK(s.position >= 0.0);
            CHECK(s.position <= 1200.0);
            auto it = last_pos.find(s.vehicle);
            if (it != last_pos.end())
                CHECK(std::abs(s.position - it->second) <= cfg.speed_max * 0.5 + 1e-9);
            last_pos[s.vehicle] = s.position;
        }
    }
}

TEST_CASE("constant-speed vehicle advances by speed times slot duration") {
    SyntheticMobilityConfig cfg;
    cfg.initial_vehicles = 1;
    cfg.arrival_rate_per_slot = 0.0;
    cfg.mean_speed_lo = cfg.mean_speed_hi = 20.0;
    cfg.ou_sigma = 0.0;  // no diffusion: speed stays at the cruise target
    SyntheticMobility gen(cfg, 1200.0, 0.5, 3);
    auto s0 = gen.advance(0);
    REQUIRE(s0.size() == 1);
    double x = s0[0].position;
    const double dir = s0[0].speed > 0 ? 1.0 : -1.0;
    for (SlotIndex t = 1; t < 10; ++t) {
        auto s = gen.advance(t);
        if (s.empty()) break;  // left the road
        CHECK(s[0].position == doctest::Approx(x + dir * 10.0).epsilon(1e-12));
        x = s[0].position;
    }
}

TEST_CASE("trace ingestion") {
    SUBCASE("valid file") {
        std::istringstream in(
            "slot,vehicle,position,speed\n"
            "0,7,100.0,15\n"
            "1,7,107.5,15\n"
            "0,9,900.0,-12\n"
            "1,9,894.0,-12\n");
        TraceFileSource src(in, 1200.0, 0.5);
        auto s0 = src.advance(0);
        REQUIRE(s0.size() == 2);
        CHECK(s0[0].vehicle == 7);
        CHECK(s0[1].vehicle == 9);
        CHECK(src.direction_of(7) == Direction::forward);
        CHECK(src.direction_of(9) == Direction::backward);
        auto s1 = src.advance(1);
        CHECK(s1.size() == 2);
        CHECK(src.advance(2).empty());
    }
    SUBCASE("gap names vehicle and slot") {
        std::istringstream in(
            "slot,vehicle,position,speed\n"
            "10,7,100.0,15\n"
            "11,7,107.5,15\n"
            "13,7,122.5,15\n");
        try {
            TraceFileSource src(in, 1200.0, 0.5);
            FAIL("expected TraceError");
        } catch (const TraceError& e) {
            const std::string msg = e.what();
            CHECK(msg.find("7") != std::string::npos);
            CHECK(msg.find("12") != std::string::npos);
        }
    }
    SUBCASE("header required") {
        std::istringstream in("0,7,100.0,15\n");
        CHECK_THROWS_AS(TraceFileSource(in, 1200.0, 0.5), TraceError);
    }
    SUBCASE("off-road position rejected") {
        std::istringstream in(
            "slot,vehicle,position,speed\n"
            "0,7,1500.0,15\n");
        CHECK_THROWS_AS(TraceFileSource(in, 1200.0, 0.5), TraceError);
    }
    SUBCASE("jump beyond max speed rejected") {
        std::istringstream in(
            "slot,vehicle,position,speed\n"
            "0,7,100.0,15\n"
            "1,7,200.0,15\n");
        CHECK_THROWS_AS(TraceFileSource(in, 1200.0, 0.5, 25.0), TraceError);
    }
}

TEST_CASE("trajectory window") {
    TrajectoryWindow w(3);
    CHECK(w.empty());
    for (SlotIndex t = 0; t < 5; ++t) w.push(TraceSample{t, 1, 10.0 * t, 20.0});
    CHECK(w.size() == 3);
    CHECK(w.latest().slot == 4);
    CHECK(w.samples().front().slot == 2);
    CHECK_THROWS_AS(w.push(TraceSample{4, 1, 0.0, 0.0}), ContractError);
}

TEST_CASE("predict_speed least squares") {
    const Seconds eps = 0.5;
    SUBCASE("constant speed window") {
        TrajectoryWindow w(10);
        for (SlotIndex t = 0; t < 6; ++t) w.push(TraceSample{t, 1, 50.0 + 7.5 * t, 15.0});
        CHECK(predict_speed_least_squares(w, 3.0, eps) == doctest::Approx(15.0).epsilon(1e-12));
    }
    SUBCASE("three-point slope") {
        TrajectoryWindow w(10);
        w.push(TraceSample{0, 1, 100.0, 0.0});
        w.push(TraceSample{1, 1, 110.0, 0.0});
        w.push(TraceSample{2, 1, 120.0, 0.0});
        CHECK(predict_speed_least_squares(w, 3.0, eps) == 20.0);
    }
    SUBCASE("single sample falls back to instantaneous speed") {
        TrajectoryWindow w(10);
        w.push(TraceSample{0, 1, 100.0, 8.0});
        CHECK(predict_speed_least_squares(w, 3.0, eps) == 8.0);
    }
    SUBCASE("backward travel yields negative prediction") {
        TrajectoryWindow w(10);
        w.push(TraceSample{0, 1, 300.0, -10.0});
        w.push(TraceSample{1, 1, 295.0, -10.0});
        w.push(TraceSample{2, 1, 290.0, -10.0});
        CHECK(predict_speed_least_squares(w, 3.0, eps) == doctest::Approx(-10.0));
    }
    SUBCASE("empty window is a contract violation") {
        TrajectoryWindow w(10);
        CHECK_THROWS_AS(predict_speed_least_squares(w, 3.0, eps), ContractError);
    }
    SUBCASE("constant-velocity property over random windows") {
        std::mt19937_64 rng(5);
        for (int i = 0; i < 100; ++i) {
            TrajectoryWindow w(10);
            const double v = -25.0 + static_cast<double>(rng() % 5000) / 100.0;
            const double x0 = static_cast<double>(rng() % 1000);
            const int n = 2 + static_cast<int>(rng() % 8);
            for (SlotIndex t = 0; t < n; ++t)
                w.push(TraceSample{t, 1, x0 + v * 0.5 * static_cast<double>(t), v});
            CHECK(predict_speed_least_squares(w, 3.0, eps) ==
                  doctest::Approx(v).epsilon(1e-9));
        }
    }
}

TEST_CASE("advance out of order is rejected") {
    SyntheticMobility gen(quiet_config(), 1200.0, 0.5, 1);
    gen.advance(0);
    CHECK_THROWS_AS(gen.advance(2), ContractError);
}
