#include "vectwin/nnet.hpp"

#include <algorithm>
#include <cmath>

namespace vectwin {

namespace {

double activate(double x, Activation a) {
    switch (a) {
        case Activation::identity: return x;
        case Activation::tanh_sat: return std::tanh(x);
        case Activation::tanh_wide: return 3.0 * std::tanh(x);
        case Activation::relu: return x > 0.0 ? x : 0.0;
    }
    return x;
}

// Derivative in terms of pre- and post-activation values.
double activate_grad(double pre, double post, Activation a) {
    switch (a) {
        case Activation::identity: return 1.0;
        case Activation::tanh_sat: return 1.0 - post * post;
        case Activation::tanh_wide: return 3.0 - post * post / 3.0;
        case Activation::relu: return pre > 0.0 ? 1.0 : 0.0;
    }
    return 1.0;
}

}  // namespace

FeedForwardNet::FeedForwardNet(int input_dim, const std::vector<int>& hidden, int output_dim,
                               Activation hidden_act, Activation output_act) {
    if (input_dim < 1 || output_dim < 1) throw ContractError("net: dimensions must be positive");
    std::vector<int> dims;
    dims.push_back(input_dim);
    for (int h : hidden) {
        if (h < 1) throw ContractError("net: hidden width must be positive");
        dims.push_back(h);
    }
    dims.push_back(output_dim);
    for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
        Layer layer;
        layer.inputs = dims[l];
        layer.outputs = dims[l + 1];
        layer.act = (l + 2 == dims.size()) ? output_act : hidden_act;
        layer.w.assign(static_cast<std::size_t>(layer.inputs) * layer.outputs, 0.0);
        layer.b.assign(static_cast<std::size_t>(layer.outputs), 0.0);
        layers_.push_back(std::move(layer));
    }
}

int FeedForwardNet::input_dim() const {
    if (layers_.empty()) throw ContractError("net: empty");
    return layers_.front().inputs;
}

int FeedForwardNet::output_dim() const {
    if (layers_.empty()) throw ContractError("net: empty");
    return layers_.back().outputs;
}

void FeedForwardNet::init_random(std::mt19937_64& rng) {
    for (Layer& layer : layers_) {
        const double bound = 1.0 / std::sqrt(static_cast<double>(layer.inputs));
        for (double& w : layer.w) {
            const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
            w = (2.0 * u - 1.0) * bound;
        }
        std::fill(layer.b.begin(), layer.b.end(), 0.0);
    }
}

std::vector<double> FeedForwardNet::forward(std::span<const double> x) const {
    Trace scratch;
    return forward(x, scratch);
}

std::vector<double> FeedForwardNet::forward(std::span<const double> x, Trace& trace) const {
    if (layers_.empty()) throw ContractError("net: empty");
    if (static_cast<int>(x.size()) != input_dim())
        throw ContractError("net: input dimension mismatch");

    trace.input.assign(x.begin(), x.end());
    trace.pre.clear();
    trace.post.clear();
    std::vector<double> cur(x.begin(), x.end());
    for (const Layer& layer : layers_) {
        std::vector<double> pre(static_cast<std::size_t>(layer.outputs));
        for (int o = 0; o < layer.outputs; ++o) {
            double s = layer.b[static_cast<std::size_t>(o)];
            const double* row = layer.w.data() + static_cast<std::size_t>(o) * layer.inputs;
            for (int i = 0; i < layer.inputs; ++i) s += row[i] * cur[static_cast<std::size_t>(i)];
            pre[static_cast<std::size_t>(o)] = s;
        }
        std::vector<double> post(static_cast<std::size_t>(layer.outputs));
        for (int o = 0; o < layer.outputs; ++o)
            post[static_cast<std::size_t>(o)] = activate(pre[static_cast<std::size_t>(o)], layer.act);
        trace.pre.push_back(pre);
        trace.post.push_back(post);
        cur = std::move(post);
    }
    return cur;
}

FeedForwardNet::Gradients FeedForwardNet::zero_gradients() const {
    Gradients g;
    for (const Layer& layer : layers_) {
        g.w.emplace_back(layer.w.size(), 0.0);
        g.b.emplace_back(layer.b.size(), 0.0);
    }
    return g;
}

std::vector<double> FeedForwardNet::backward(const Trace& trace, std::span<const double> dy,
                                             Gradients& grads) const {
    if (trace.pre.size() != layers_.size())
        throw ContractError("net: trace does not match network");
    if (static_cast<int>(dy.size()) != output_dim())
        throw ContractError("net: output gradient dimension mismatch");

    std::vector<double> delta(dy.begin(), dy.end());
    for (int l = static_cast<int>(layers_.size()) - 1; l >= 0; --l) {
        const Layer& layer = layers_[static_cast<std::size_t>(l)];
        const auto& pre = trace.pre[static_cast<std::size_t>(l)];
        const auto& post = trace.post[static_cast<std::size_t>(l)];
        const std::vector<double>& below =
            l == 0 ? trace.input : trace.post[static_cast<std::size_t>(l - 1)];

        for (int o = 0; o < layer.outputs; ++o)
            delta[static_cast<std::size_t>(o)] *=
                activate_grad(pre[static_cast<std::size_t>(o)], post[static_cast<std::size_t>(o)],
                              layer.act);

        auto& gw = grads.w[static_cast<std::size_t>(l)];
        auto& gb = grads.b[static_cast<std::size_t>(l)];
        for (int o = 0; o < layer.outputs; ++o) {
            const double d = delta[static_cast<std::size_t>(o)];
            gb[static_cast<std::size_t>(o)] += d;
            double* grow = gw.data() + static_cast<std::size_t>(o) * layer.inputs;
            for (int i = 0; i < layer.inputs; ++i) grow[i] += d * below[static_cast<std::size_t>(i)];
        }

        std::vector<double> next(static_cast<std::size_t>(layer.inputs), 0.0);
        for (int o = 0; o < layer.outputs; ++o) {
            const double d = delta[static_cast<std::size_t>(o)];
            const double* row = layer.w.data() + static_cast<std::size_t>(o) * layer.inputs;
            for (int i = 0; i < layer.inputs; ++i) next[static_cast<std::size_t>(i)] += d * row[i];
        }
        delta = std::move(next);
    }
    return delta;
}

void FeedForwardNet::gradient_step(const Gradients& grads, double lr) {
    if (grads.w.size() != layers_.size()) throw ContractError("net: gradient shape mismatch");
    for (std::size_t l = 0; l < layers_.size(); ++l) {
        Layer& layer = layers_[l];
        if (grads.w[l].size() != layer.w.size() || grads.b[l].size() != layer.b.size())
            throw ContractError("net: gradient shape mismatch");
        for (std::size_t i = 0; i < layer.w.size(); ++i) layer.w[i] -= lr * grads.w[l][i];
        for (std::size_t i = 0; i < layer.b.size(); ++i) layer.b[i] -= lr * grads.b[l][i];
    }
}

std::size_t FeedForwardNet::parameter_count() const {
    std::size_t n = 0;
    for (const Layer& layer : layers_) n += layer.w.size() + layer.b.size();
    return n;
}

double FeedForwardNet::get_parameter(std::size_t i) const {
    for (const Layer& layer : layers_) {
        if (i < layer.w.size()) return layer.w[i];
        i -= layer.w.size();
        if (i < layer.b.size()) return layer.b[i];
        i -= layer.b.size();
    }
    throw ContractError("net: parameter index out of range");
}

void FeedForwardNet::set_parameter(std::size_t i, double value) {
    for (Layer& layer : layers_) {
        if (i < layer.w.size()) { layer.w[i] = value; return; }
        i -= layer.w.size();
        if (i < layer.b.size()) { layer.b[i] = value; return; }
        i -= layer.b.size();
    }
    throw ContractError("net: parameter index out of range");
}

double FeedForwardNet::gradient_entry(const Gradients& grads, std::size_t i,
                                      const FeedForwardNet& shape) {
    for (std::size_t l = 0; l < shape.layers_.size(); ++l) {
        if (i < grads.w[l].size()) return grads.w[l][i];
        i -= grads.w[l].size();
        if (i < grads.b[l].size()) return grads.b[l][i];
        i -= grads.b[l].size();
    }
    throw ContractError("net: gradient index out of range");
}

void FeedForwardNet::restore_layers(std::vector<Layer> layers) {
    for (const Layer& layer : layers) {
        if (layer.inputs < 1 || layer.outputs < 1 ||
            layer.w.size() != static_cast<std::size_t>(layer.inputs) * layer.outputs ||
            layer.b.size() != static_cast<std::size_t>(layer.outputs))
            throw ContractError("net: malformed layer restore");
    }
    layers_ = std::move(layers);
}

void soft_update(FeedForwardNet& target, const FeedForwardNet& eval, double eps) {
    if (eps < 0.0 || eps >= 1.0) throw ContractError("soft_update: eps must be in [0, 1)");
    const std::size_t n = target.parameter_count();
    if (n != eval.parameter_count()) throw ContractError("soft_update: shape mismatch");
    for (std::size_t i = 0; i < n; ++i)
        target.set_parameter(i, eps * target.get_parameter(i) + (1.0 - eps) * eval.get_parameter(i));
}

double max_parameter_difference(const FeedForwardNet& a, const FeedForwardNet& b) {
    const std::size_t n = a.parameter_count();
    if (n != b.parameter_count()) throw ContractError("parameter diff: shape mismatch");
    double m = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        m = std::max(m, std::abs(a.get_parameter(i) - b.get_parameter(i)));
    return m;
}

}  // namespace vectwin
