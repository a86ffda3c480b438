#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <random>

#include "test_util.hpp"
#include "vectwin/delay.hpp"
#include "vectwin/twin.hpp"

using namespace vectwin;

namespace {

// Minimal scripted mobility for twin tests.
class ScriptedMobility final : public MobilitySource {
  public:
    std::vector<TraceSample> advance(SlotIndex) override { return {}; }
    Direction direction_of(VehicleId v) const override {
        return v % 2 == 0 ? Direction::forward : Direction::backward;
    }
};

TwinConfig twin_config() {
    TwinConfig c;
    c.window_slots = 4;
    c.x_levels = 5;
    c.v_levels = 5;
    c.v_min = 5.0;
    c.v_max = 25.0;
    return c;
}

}  // namespace

TEST_CASE("offloading event lifecycle is write-once") {
    auto topo = testutil::topology6();
    TwinStore store(topo, twin_config());
    ScriptedMobility src;
    store.sync(0, {TraceSample{0, 2, 350.0, 12.0}}, src);

    auto h = store.record_offload(2, 0, 350.0, 12.0, rsu_at(350.0, topo));
    const OffloadingEvent& e = store.event(h);
    CHECK(e.gen_slot == 0);
    CHECK(e.location == 350.0);
    CHECK(e.predicted_speed == 12.0);
    CHECK(e.in_flight());
    CHECK_FALSE(e.delay.has_value());
    CHECK_FALSE(e.discontinuity.has_value());

    store.complete_event(h, 1.7, false);
    CHECK(store.event(h).delay == 1.7);
    CHECK(store.event(h).discontinuity == false);
    CHECK_THROWS_AS(store.complete_event(h, 2.0, true), ContractError);
    CHECK_THROWS_AS(store.set_delivery(h, 3), ContractError);
}

TEST_CASE("routing locators") {
    auto topo = testutil::topology6();
    TwinStore store(topo, twin_config());
    ScriptedMobility src;
    store.sync(0, {TraceSample{0, 2, 350.0, 12.0}}, src);

    CHECK(store.vdt(2).current_rloc == 1);
    CHECK_FALSE(store.vdt(2).future_rloc.has_value());

    auto h = store.record_offload(2, 0, 350.0, 12.0, 1);
    SUBCASE("delivery at the connected RSU needs no future locator") {
        store.set_delivery(h, 1);
        CHECK_FALSE(store.vdt(2).future_rloc.has_value());
    }
    SUBCASE("migrated delivery sets the future locator until completion") {
        store.set_delivery(h, 2);
        CHECK(store.vdt(2).future_rloc == 2);
        store.complete_event(h, 1.2, false);
        CHECK_FALSE(store.vdt(2).future_rloc.has_value());
    }
    SUBCASE("future locator clears once the vehicle reaches the delivery cell") {
        store.set_delivery(h, 2);
        store.sync(1, {TraceSample{1, 2, 405.0, 12.0}}, src);
        CHECK(store.vdt(2).current_rloc == 2);
        CHECK_FALSE(store.vdt(2).future_rloc.has_value());
    }
}

TEST_CASE("locator consistency invariant across random activity") {
    auto topo = testutil::topology6();
    TwinStore store(topo, twin_config());
    ScriptedMobility src;
    std::mt19937_64 rng(9);
    std::vector<EventHandle> open;
    for (SlotIndex t = 0; t < 40; ++t) {
        std::vector<TraceSample> samples;
        for (VehicleId v = 2; v <= 6; ++v)
            samples.push_back(TraceSample{t, v, static_cast<double>(rng() % 12000) / 10.0,
                                          v % 2 == 0 ? 15.0 : -15.0});
        store.sync(t, samples, src);
        if (rng() % 2 == 0) {
            const VehicleId v = 2 + rng() % 5;
            const Meters x = store.vdt(v).trajectory.latest().position;
            auto h = store.record_offload(v, t, x, 10.0, rsu_at(x, topo));
            store.set_delivery(h, static_cast<RsuId>(rng() % 6));
            open.push_back(h);
        }
        if (!open.empty() && rng() % 3 == 0) {
            store.complete_event(open.back(), 1.0, false);
            open.pop_back();
        }
        for (VehicleId v = 2; v <= 6; ++v) {
            const auto& vdt = store.vdt(v);
            bool needs_future = false;
            for (const auto& [seq, e] : vdt.events)
                if (e.in_flight() && e.delivery_rsu && *e.delivery_rsu != vdt.current_rloc)
                    needs_future = true;
            CHECK(vdt.future_rloc.has_value() == needs_future);
            CHECK(vdt.current_rloc == rsu_at(vdt.trajectory.latest().position, topo));
        }
    }
}

TEST_CASE("twin trajectory mirrors the sample stream") {
    auto topo = testutil::topology6();
    auto cfg = twin_config();
    TwinStore store(topo, cfg);
    ScriptedMobility src;
    std::vector<TraceSample> history;
    for (SlotIndex t = 0; t < 10; ++t) {
        TraceSample s{t, 4, 100.0 + 9.0 * static_cast<double>(t), 18.0};
        history.push_back(s);
        store.sync(t, {s}, src);
    }
    const auto& w = store.vdt(4).trajectory;
    REQUIRE(w.size() == cfg.window_slots);
    const std::size_t offset = history.size() - cfg.window_slots;
    for (std::size_t i = 0; i < cfg.window_slots; ++i) {
        CHECK(w.samples()[i].slot == history[offset + i].slot);
        CHECK(w.samples()[i].position == history[offset + i].position);
    }
}

TEST_CASE("departures deactivate twins") {
    auto topo = testutil::topology6();
    TwinStore store(topo, twin_config());
    ScriptedMobility src;
    store.sync(0, {TraceSample{0, 2, 100.0, 15.0}, TraceSample{0, 4, 200.0, 15.0}}, src);
    auto gone = store.sync(1, {TraceSample{1, 2, 107.0, 15.0}}, src);
    REQUIRE(gone.size() == 1);
    CHECK(gone[0] == 4);
    CHECK_FALSE(store.vdt(4).active);
    CHECK(store.active_vehicles() == std::vector<VehicleId>{2});
}

TEST_CASE("status matrix binning") {
    auto topo = testutil::topology6();
    const RsuConfig& rsu = topo.rsu(1);  // [200, 400]

    SUBCASE("empty epoch gives the zero matrix") {
        auto m = build_status_matrix({}, rsu, 3, 5, 5, 5.0, 25.0);
        CHECK(m.total() == 0.0);
        CHECK(m.counts.size() == 25);
    }
    SUBCASE("left edge and minimum speed land in cell (0,0)") {
        OffloadingEvent e;
        e.location = 200.0;
        e.predicted_speed = 5.0;
        auto m = build_status_matrix({e}, rsu, 3, 5, 5, 5.0, 25.0);
        CHECK(m.at(0, 0) == 1.0);
        CHECK(m.total() == 1.0);
    }
    SUBCASE("spread events conserve mass") {
        std::vector<OffloadingEvent> events(3);
        events[0].location = 210.0;
        events[0].predicted_speed = 6.0;
        events[1].location = 300.0;
        events[1].predicted_speed = -15.0;  // binned by magnitude
        events[2].location = 395.0;
        events[2].predicted_speed = 24.0;
        auto m = build_status_matrix(events, rsu, 1, 3, 3, 5.0, 25.0);
        CHECK(m.total() == 3.0);
    }
    SUBCASE("speeds outside the bounds clamp into the edge bins") {
        OffloadingEvent fast;
        fast.location = 399.9;
        fast.predicted_speed = 80.0;
        auto m = build_status_matrix({fast}, rsu, 1, 5, 5, 5.0, 25.0);
        CHECK(m.at(4, 4) == 1.0);
    }
    SUBCASE("mass conservation over random events") {
        std::mt19937_64 rng(17);
        for (int trial = 0; trial < 50; ++trial) {
            const int n = static_cast<int>(rng() % 30);
            std::vector<OffloadingEvent> events(static_cast<std::size_t>(n));
            for (auto& e : events) {
                e.location = 200.0 + static_cast<double>(rng() % 2000) / 10.0;
                e.predicted_speed = static_cast<double>(rng() % 600) / 10.0 - 30.0;
            }
            auto m = build_status_matrix(events, rsu, 1, 5, 5, 5.0, 25.0);
            CHECK(m.total() == static_cast<double>(n));
            for (double c : m.counts) CHECK(c >= 0.0);
        }
    }
}

TEST_CASE("provision snapshots record residual work per slot") {
    auto topo = testutil::topology6();
    TwinStore store(topo, twin_config());

    EdgeQueue q(2);
    store.snapshot_provision(2, q.residual_at(0.0));
    q.enqueue(1, 0.2 / 0.4, 0.0);
    store.snapshot_provision(2, q.residual_at(0.0));
    q.enqueue(2, 0.2 / 0.4, 0.0);
    store.snapshot_provision(2, q.residual_at(0.0));

    const auto& hist = store.idt(2).queue_history;
    REQUIRE(hist.size() == 3);
    CHECK(hist[0] == 0.0);
    CHECK(hist[1] == doctest::Approx(0.5));
    CHECK(hist[2] == doctest::Approx(1.0));
}

TEST_CASE("epoch bookkeeping builds one matrix per RSU and prunes") {
    auto topo = testutil::topology6();
    TwinStore store(topo, twin_config());
    ScriptedMobility src;
    store.sync(0, {TraceSample{0, 2, 50.0, 15.0}}, src);
    auto h1 = store.record_offload(2, 0, 50.0, 15.0, 0);
    auto h2 = store.record_offload(2, 3, 60.0, 15.0, 0);
    store.complete_event(h1, 1.0, false);

    store.finish_epoch(1);
    for (const auto& idt : store.idts()) {
        REQUIRE(idt.status_matrices.size() == 1);
        CHECK(idt.status_matrices[0].epoch == 1);
    }
    CHECK(store.idt(0).status_matrices[0].total() == 2.0);  // both events under RSU 0
    // Completed event pruned, in-flight one kept.
    CHECK(store.vdt(2).events.size() == 1);
    CHECK(store.vdt(2).events.begin()->second.in_flight());
    (void)h2;
}
