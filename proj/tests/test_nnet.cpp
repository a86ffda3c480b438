#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <random>

#include "vectwin/nnet.hpp"

using namespace vectwin;

namespace {

std::vector<double> random_vec(std::mt19937_64& rng, int n, double scale = 1.0) {
    std::vector<double> v(static_cast<std::size_t>(n));
    for (auto& x : v) x = (static_cast<double>(rng() >> 11) * 0x1.0p-53 - 0.5) * 2.0 * scale;
    return v;
}

}  // namespace

TEST_CASE("forward shapes and identity behaviour") {
    FeedForwardNet net(3, {4}, 2, Activation::tanh_sat, Activation::identity);
    CHECK(net.input_dim() == 3);
    CHECK(net.output_dim() == 2);
    CHECK(net.parameter_count() == 3 * 4 + 4 + 4 * 2 + 2);

    // Zero weights: output equals the output-layer bias.
    const std::vector<double> x{0.5, -1.0, 2.0};
    auto y = net.forward(x);
    CHECK(y[0] == 0.0);
    CHECK(y[1] == 0.0);

    CHECK_THROWS_AS(net.forward(std::vector<double>{1.0}), ContractError);
}

TEST_CASE("backward matches finite differences of a scalar readout") {
    std::mt19937_64 rng(2024);
    for (int trial = 0; trial < 5; ++trial) {
        const Activation out_act = trial % 2 == 0 ? Activation::tanh_sat : Activation::tanh_wide;
        FeedForwardNet net(4, {6, 5}, 3, Activation::tanh_sat, out_act);
        net.init_random(rng);
        const auto x = random_vec(rng, 4);
        const auto w = random_vec(rng, 3);  // fixed readout weights

        auto objective = [&]() {
            const auto y = net.forward(x);
            double s = 0.0;
            for (std::size_t i = 0; i < y.size(); ++i) s += w[i] * y[i];
            return s;
        };

        FeedForwardNet::Trace trace;
        net.forward(x, trace);
        auto grads = net.zero_gradients();
        net.backward(trace, w, grads);

        const double h = 1e-6;
        for (std::size_t p = 0; p < net.parameter_count(); p += 7) {
            const double orig = net.get_parameter(p);
            net.set_parameter(p, orig + h);
            const double plus = objective();
            net.set_parameter(p, orig - h);
            const double minus = objective();
            net.set_parameter(p, orig);
            const double fd = (plus - minus) / (2.0 * h);
            const double an = FeedForwardNet::gradient_entry(grads, p, net);
            CHECK(an == doctest::Approx(fd).epsilon(1e-5));
        }
    }
}

TEST_CASE("input gradient flows through backward") {
    std::mt19937_64 rng(7);
    FeedForwardNet net(3, {5}, 1, Activation::tanh_sat, Activation::identity);
    net.init_random(rng);
    const auto x = random_vec(rng, 3);

    FeedForwardNet::Trace trace;
    net.forward(x, trace);
    auto grads = net.zero_gradients();
    const std::vector<double> dy{1.0};
    const auto dx = net.backward(trace, dy, grads);
    REQUIRE(dx.size() == 3);

    const double h = 1e-6;
    for (int i = 0; i < 3; ++i) {
        auto xp = x, xm = x;
        xp[static_cast<std::size_t>(i)] += h;
        xm[static_cast<std::size_t>(i)] -= h;
        const double fd = (net.forward(xp)[0] - net.forward(xm)[0]) / (2.0 * h);
        CHECK(dx[static_cast<std::size_t>(i)] == doctest::Approx(fd).epsilon(1e-6));
    }
}

TEST_CASE("gradient_step descends") {
    std::mt19937_64 rng(9);
    FeedForwardNet net(2, {4}, 1, Activation::tanh_sat, Activation::identity);
    net.init_random(rng);
    const auto x = random_vec(rng, 2);

    for (int it = 0; it < 50; ++it) {
        FeedForwardNet::Trace trace;
        const double y = net.forward(x, trace)[0];
        auto grads = net.zero_gradients();
        const std::vector<double> dy{2.0 * (y - 1.0)};  // d/dy (y-1)^2
        net.backward(trace, dy, grads);
        net.gradient_step(grads, 0.1);
    }
    CHECK(std::abs(net.forward(x)[0] - 1.0) < 0.05);
}

TEST_CASE("soft_update") {
    std::mt19937_64 rng(30);
    FeedForwardNet eval(2, {3}, 1, Activation::tanh_sat, Activation::identity);
    eval.init_random(rng);
    FeedForwardNet target = eval;
    FeedForwardNet other(2, {3}, 1, Activation::tanh_sat, Activation::identity);
    other.init_random(rng);

    SUBCASE("eps zero copies the evaluation net") {
        soft_update(other, eval, 0.0);
        CHECK(max_parameter_difference(other, eval) == 0.0);
    }
    SUBCASE("identical nets are a fixed point") {
        soft_update(target, eval, 0.7);
        CHECK(max_parameter_difference(target, eval) == 0.0);
    }
    SUBCASE("scalar blend") {
        FeedForwardNet a(1, {}, 1, Activation::identity, Activation::identity);
        FeedForwardNet b(1, {}, 1, Activation::identity, Activation::identity);
        a.set_parameter(0, 1.0);
        b.set_parameter(0, 0.0);
        soft_update(a, b, 0.9);
        CHECK(a.get_parameter(0) == doctest::Approx(0.9));
    }
    SUBCASE("gap shrinks by exactly eps") {
        const double before = max_parameter_difference(other, eval);
        FeedForwardNet updated = other;
        soft_update(updated, eval, 0.25);
        for (std::size_t p = 0; p < eval.parameter_count(); ++p) {
            const double gap_before = other.get_parameter(p) - eval.get_parameter(p);
            const double gap_after = updated.get_parameter(p) - eval.get_parameter(p);
            CHECK(gap_after == doctest::Approx(0.25 * gap_before).epsilon(1e-12));
        }
        CHECK(before > 0.0);
    }
    SUBCASE("shape mismatch rejected") {
        FeedForwardNet small(1, {}, 1, Activation::identity, Activation::identity);
        CHECK_THROWS_AS(soft_update(small, eval, 0.5), ContractError);
    }
}

TEST_CASE("layer restore validates shapes") {
    FeedForwardNet net(2, {3}, 1, Activation::tanh_sat, Activation::identity);
    auto layers = net.layers();
    layers[0].w.pop_back();
    CHECK_THROWS_AS(net.restore_layers(layers), ContractError);
}
