#pragma once

#include <random>
#include <span>
#include <vector>

#include "vectwin/types.hpp"

namespace vectwin {

// tanh_wide saturates at +/-3: used on actor outputs so the downstream
// tanh-squashed parameter decoding can still reach the edges of each range.
enum class Activation { identity, tanh_sat, tanh_wide, relu };

// Small dense feed-forward network with hand-written backprop. Double
// precision throughout and plain gradient-descent steps, so analytic
// gradients can be checked against central finite differences exactly
// enough to gate on.
class FeedForwardNet {
  public:
    struct Layer {
        int inputs = 0;
        int outputs = 0;
        Activation act = Activation::identity;
        std::vector<double> w;  // row-major, outputs x inputs
        std::vector<double> b;
    };

    struct Gradients {
        std::vector<std::vector<double>> w;
        std::vector<std::vector<double>> b;
    };

    // Activations remembered by a forward pass for the matching backward.
    struct Trace {
        std::vector<double> input;
        std::vector<std::vector<double>> pre;   // per layer, before activation
        std::vector<std::vector<double>> post;  // per layer, after activation
    };

    FeedForwardNet() = default;
    FeedForwardNet(int input_dim, const std::vector<int>& hidden, int output_dim,
                   Activation hidden_act, Activation output_act);

    int input_dim() const;
    int output_dim() const;
    bool empty() const { return layers_.empty(); }

    // Uniform(-1/sqrt(fan_in), 1/sqrt(fan_in)) weights and zero biases.
    void init_random(std::mt19937_64& rng);

    std::vector<double> forward(std::span<const double> x) const;
    std::vector<double> forward(std::span<const double> x, Trace& trace) const;

    Gradients zero_gradients() const;
    // Accumulates dL/dparams into `grads` given dL/doutput; returns dL/dinput.
    std::vector<double> backward(const Trace& trace, std::span<const double> dy,
                                 Gradients& grads) const;

    void gradient_step(const Gradients& grads, double lr);

    // Flat parameter view (layer order, weights then biases) for
    // finite-difference probing.
    std::size_t parameter_count() const;
    double get_parameter(std::size_t i) const;
    void set_parameter(std::size_t i, double value);
    static double gradient_entry(const Gradients& grads, std::size_t i,
                                 const FeedForwardNet& shape);

    const std::vector<Layer>& layers() const { return layers_; }
    void restore_layers(std::vector<Layer> layers);

  private:
    std::vector<Layer> layers_;
};

// target := eps * target + (1 - eps) * eval, elementwise.
void soft_update(FeedForwardNet& target, const FeedForwardNet& eval, double eps);

double max_parameter_difference(const FeedForwardNet& a, const FeedForwardNet& b);

}  // namespace vectwin
