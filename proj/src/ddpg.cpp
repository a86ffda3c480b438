#include "vectwin/ddpg.hpp"

#include <algorithm>
#include <cmath>

#include "vectwin/rng.hpp"

namespace vectwin {

using nlohmann::json;

int state_dimension(int num_rsus, int count_window, int x_levels, int v_levels) {
    return num_rsus * (3 + count_window + x_levels * v_levels);
}

std::vector<double> encode_state(const StateSnapshot& snap, int num_rsus, int count_window,
                                 int x_levels, int v_levels, const StateNorm& norm) {
    const auto n = static_cast<std::size_t>(num_rsus);
    if (snap.compute_rates.size() != n || snap.uplink_rates.size() != n ||
        snap.queue_lengths.size() != n)
        throw ContractError("encode_state: per-RSU blocks do not match the topology");
    if (!snap.offload_counts.empty() && snap.offload_counts.size() != n)
        throw ContractError("encode_state: offload-count block does not match the topology");
    if (!snap.prev_matrices.empty() && snap.prev_matrices.size() != n)
        throw ContractError("encode_state: status-matrix block does not match the topology");

    std::vector<double> out;
    out.reserve(static_cast<std::size_t>(state_dimension(num_rsus, count_window, x_levels, v_levels)));
    for (double c : snap.compute_rates) out.push_back(c / norm.rate_scale);
    for (double h : snap.uplink_rates) out.push_back(h / norm.rate_scale);
    for (double q : snap.queue_lengths) out.push_back(q / norm.queue_scale);

    for (std::size_t r = 0; r < n; ++r) {
        const std::vector<double>* counts =
            snap.offload_counts.empty() ? nullptr : &snap.offload_counts[r];
        const std::size_t have = counts ? counts->size() : 0;
        if (have > static_cast<std::size_t>(count_window))
            throw ContractError("encode_state: offload-count window too long");
        for (std::size_t i = have; i < static_cast<std::size_t>(count_window); ++i)
            out.push_back(0.0);
        for (std::size_t i = 0; i < have; ++i) out.push_back((*counts)[i] / norm.count_scale);
    }

    const std::size_t cells = static_cast<std::size_t>(x_levels) * v_levels;
    for (std::size_t r = 0; r < n; ++r) {
        if (snap.prev_matrices.empty()) {
            for (std::size_t i = 0; i < cells; ++i) out.push_back(0.0);
        } else {
            const VehicleStatusMatrix& m = snap.prev_matrices[r];
            if (m.counts.size() != cells)
                throw ContractError("encode_state: status matrix has wrong shape");
            for (double c : m.counts) out.push_back(c / norm.count_scale);
        }
    }
    for (double v : out)
        if (!std::isfinite(v)) throw ContractError("encode_state: non-finite entry");
    return out;
}

ReplayMemory::ReplayMemory(std::size_t capacity) : capacity_(capacity) {
    if (capacity_ == 0) throw ContractError("replay: capacity must be positive");
}

void ReplayMemory::push(Transition t) {
    if (items_.size() < capacity_) {
        items_.push_back(std::move(t));
    } else {
        items_[cursor_] = std::move(t);  // oldest entry; ring order == insertion order
        cursor_ = (cursor_ + 1) % capacity_;
    }
}

std::vector<const Transition*> ReplayMemory::sample(std::mt19937_64& rng, std::size_t n) const {
    if (n > items_.size()) throw ContractError("replay: sample larger than contents");
    // Partial Fisher-Yates over the index range; distinct picks.
    std::vector<std::size_t> idx(items_.size());
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    std::vector<const Transition*> out;
    out.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t j = i + static_cast<std::size_t>(rng() % (idx.size() - i));
        std::swap(idx[i], idx[j]);
        out.push_back(&items_[idx[i]]);
    }
    return out;
}

void ReplayMemory::restore(std::vector<Transition> items, std::size_t cursor) {
    if (items.size() > capacity_ || (items.size() == capacity_ && cursor >= capacity_) ||
        (items.size() < capacity_ && cursor != 0))
        throw CheckpointError("replay: inconsistent restore");
    items_ = std::move(items);
    cursor_ = cursor;
}

NoiseProcess::NoiseProcess(double mean, double sigma, double decay)
    : mean_(mean), sigma_(sigma), decay_(decay) {
    if (sigma_ < 0.0) throw ContractError("noise: sigma must be non-negative");
    if (decay_ <= 0.0 || decay_ >= 1.0) throw ContractError("noise: decay must be in (0, 1)");
}

std::vector<double> NoiseProcess::sample(std::mt19937_64& rng, std::size_t dim) const {
    auto uniform01 = [&rng]() { return static_cast<double>(rng() >> 11) * 0x1.0p-53; };
    std::vector<double> out(dim);
    for (double& v : out) {
        const double u1 = 1.0 - uniform01();
        const double u2 = uniform01();
        const double z = std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586477 * u2);
        v = mean_ + sigma_ * z;
    }
    return out;
}

void NoiseProcess::decay_step() {
    mean_ *= decay_;
    sigma_ *= decay_;
}

void NoiseProcess::restore(double mean, double sigma) {
    mean_ = mean;
    sigma_ = sigma;
}

std::vector<double> bellman_targets(std::span<const Transition* const> batch,
                                    const FeedForwardNet& target_actor,
                                    const FeedForwardNet& target_critic, double discount) {
    std::vector<double> y;
    y.reserve(batch.size());
    for (const Transition* t : batch) {
        const std::vector<double> a2 = target_actor.forward(t->next_state);
        std::vector<double> in(t->next_state);
        in.insert(in.end(), a2.begin(), a2.end());
        y.push_back(t->cost + discount * target_critic.forward(in)[0]);
    }
    return y;
}

double critic_loss(const FeedForwardNet& critic, std::span<const Transition* const> batch,
                   std::span<const double> targets) {
    double loss = 0.0;
    for (std::size_t i = 0; i < batch.size(); ++i) {
        std::vector<double> in(batch[i]->state);
        in.insert(in.end(), batch[i]->action.begin(), batch[i]->action.end());
        const double q = critic.forward(in)[0];
        const double e = q - targets[i];
        loss += e * e;
    }
    return loss / static_cast<double>(batch.size());
}

double critic_step(FeedForwardNet& critic, std::span<const Transition* const> batch,
                   std::span<const double> targets, double lr) {
    if (batch.empty()) throw ContractError("critic_step: empty minibatch");
    if (targets.size() != batch.size()) throw ContractError("critic_step: target count mismatch");

    auto grads = critic.zero_gradients();
    double loss = 0.0;
    const double inv_n = 1.0 / static_cast<double>(batch.size());
    for (std::size_t i = 0; i < batch.size(); ++i) {
        std::vector<double> in(batch[i]->state);
        in.insert(in.end(), batch[i]->action.begin(), batch[i]->action.end());
        FeedForwardNet::Trace trace;
        const double q = critic.forward(in, trace)[0];
        const double e = q - targets[i];
        loss += e * e * inv_n;
        const double dy[1] = {2.0 * e * inv_n};
        critic.backward(trace, dy, grads);
    }
    if (!std::isfinite(loss)) throw TrainingFault("critic_step: non-finite loss");
    critic.gradient_step(grads, lr);
    return loss;
}

double actor_objective(const FeedForwardNet& actor, const FeedForwardNet& critic,
                       std::span<const Transition* const> batch) {
    double sum = 0.0;
    for (const Transition* t : batch) {
        const std::vector<double> a = actor.forward(t->state);
        std::vector<double> in(t->state);
        in.insert(in.end(), a.begin(), a.end());
        sum += critic.forward(in)[0];
    }
    return sum / static_cast<double>(batch.size());
}

void actor_step(FeedForwardNet& actor, const FeedForwardNet& critic,
                std::span<const Transition* const> batch, double lr) {
    if (batch.empty()) throw ContractError("actor_step: empty minibatch");
    auto grads = actor.zero_gradients();
    auto critic_scratch = critic.zero_gradients();
    const double inv_n = 1.0 / static_cast<double>(batch.size());
    const int state_dim = actor.input_dim();

    for (const Transition* t : batch) {
        FeedForwardNet::Trace atrace;
        const std::vector<double> a = actor.forward(t->state, atrace);
        std::vector<double> in(t->state);
        in.insert(in.end(), a.begin(), a.end());
        FeedForwardNet::Trace ctrace;
        critic.forward(in, ctrace);
        const double dy[1] = {inv_n};
        // dQ/d(input); the action block feeds the actor's output gradient.
        const std::vector<double> din = critic.backward(ctrace, dy, critic_scratch);
        const std::span<const double> da(din.data() + state_dim, a.size());
        actor.backward(atrace, da, grads);
    }
    for (const auto& gw : grads.w)
        for (double g : gw)
            if (!std::isfinite(g)) throw TrainingFault("actor_step: non-finite gradient");
    actor.gradient_step(grads, lr);
}

double epoch_cost(std::span<const std::pair<double, int>> slot_violations) {
    if (slot_violations.empty()) throw ContractError("epoch_cost: no slots");
    double sum = 0.0;
    for (const auto& [violations, offloaders] : slot_violations) {
        if (offloaders < 0) throw ContractError("epoch_cost: negative population");
        if (offloaders > 0) sum += violations / static_cast<double>(offloaders);
    }
    return sum / static_cast<double>(slot_violations.size());
}

DdpgAgent::DdpgAgent(int state_dim, int action_dim, DdpgConfig cfg, std::uint64_t master_seed)
    : cfg_(cfg),
      actor_(state_dim, cfg.actor_hidden, action_dim, Activation::tanh_sat,
             Activation::tanh_sat),
      critic_(state_dim + action_dim, cfg.critic_hidden, 1, Activation::tanh_sat,
              Activation::identity),
      target_actor_(actor_),
      target_critic_(critic_),
      replay_(cfg.replay_capacity),
      noise_(cfg.noise_mean, cfg.noise_sigma, cfg.noise_decay),
      rng_(rng::make_stream(master_seed, "ddpg")) {
    actor_.init_random(rng_);
    critic_.init_random(rng_);
    target_actor_ = actor_;
    target_critic_ = critic_;
}

std::vector<double> DdpgAgent::act(std::span<const double> state, bool explore) {
    std::vector<double> a = actor_.forward(state);
    if (explore) {
        const std::vector<double> n = noise_.sample(rng_, a.size());
        for (std::size_t i = 0; i < a.size(); ++i) a[i] += n[i];
    }
    return a;
}

DdpgAgent::UpdateStats DdpgAgent::update() {
    UpdateStats stats;
    const std::size_t need = std::max(cfg_.minibatch, cfg_.warmup);
    if (replay_.size() < need) return stats;

    const auto batch = replay_.sample(rng_, cfg_.minibatch);
    const auto y = bellman_targets(batch, target_actor_, target_critic_, cfg_.discount);
    stats.critic_loss = critic_step(critic_, batch, y, cfg_.critic_lr);
    actor_step(actor_, critic_, batch, cfg_.actor_lr);
    soft_update(target_actor_, actor_, cfg_.soft_eps);
    soft_update(target_critic_, critic_, cfg_.soft_eps);
    stats.updated = true;
    return stats;
}

namespace {

json net_to_json(const FeedForwardNet& net) {
    json layers = json::array();
    for (const auto& l : net.layers()) {
        layers.push_back({{"inputs", l.inputs},
                          {"outputs", l.outputs},
                          {"act", static_cast<int>(l.act)},
                          {"w", l.w},
                          {"b", l.b}});
    }
    return layers;
}

void net_from_json(FeedForwardNet& net, const json& j) {
    std::vector<FeedForwardNet::Layer> layers;
    for (const auto& lj : j) {
        FeedForwardNet::Layer l;
        l.inputs = lj.at("inputs").get<int>();
        l.outputs = lj.at("outputs").get<int>();
        l.act = static_cast<Activation>(lj.at("act").get<int>());
        l.w = lj.at("w").get<std::vector<double>>();
        l.b = lj.at("b").get<std::vector<double>>();
        layers.push_back(std::move(l));
    }
    net.restore_layers(std::move(layers));
}

}  // namespace

json DdpgAgent::save() const {
    json j;
    j["actor"] = net_to_json(actor_);
    j["critic"] = net_to_json(critic_);
    j["target_actor"] = net_to_json(target_actor_);
    j["target_critic"] = net_to_json(target_critic_);
    j["noise"] = {{"mean", noise_.mean()}, {"sigma", noise_.sigma()}};
    j["rng"] = rng::save_state(rng_);
    json items = json::array();
    for (std::size_t i = 0; i < replay_.size(); ++i) {
        const Transition& t = replay_.item(i);
        items.push_back(
            {{"s", t.state}, {"a", t.action}, {"c", t.cost}, {"s2", t.next_state}});
    }
    j["replay"] = {{"cursor", replay_.cursor()}, {"items", std::move(items)}};
    return j;
}

void DdpgAgent::load(const json& j) {
    try {
        net_from_json(actor_, j.at("actor"));
        net_from_json(critic_, j.at("critic"));
        net_from_json(target_actor_, j.at("target_actor"));
        net_from_json(target_critic_, j.at("target_critic"));
        noise_.restore(j.at("noise").at("mean").get<double>(),
                       j.at("noise").at("sigma").get<double>());
        rng::load_state(rng_, j.at("rng").get<std::string>());
        std::vector<Transition> items;
        for (const auto& tj : j.at("replay").at("items")) {
            Transition t;
            t.state = tj.at("s").get<std::vector<double>>();
            t.action = tj.at("a").get<std::vector<double>>();
            t.cost = tj.at("c").get<double>();
            t.next_state = tj.at("s2").get<std::vector<double>>();
            items.push_back(std::move(t));
        }
        replay_.restore(std::move(items), j.at("replay").at("cursor").get<std::size_t>());
    } catch (const json::exception& e) {
        throw CheckpointError(std::string("agent state malformed: ") + e.what());
    }
}

}  // namespace vectwin
