#pragma once

#include <random>
#include <span>
#include <vector>

#include "json.hpp"
#include "vectwin/nnet.hpp"
#include "vectwin/twin.hpp"
#include "vectwin/types.hpp"

namespace vectwin {

// Raw material for one epoch's state vector, in per-RSU blocks.
struct StateSnapshot {
    std::vector<double> compute_rates;               // C_r
    std::vector<double> uplink_rates;                // h_r
    std::vector<double> queue_lengths;               // Q_{r, t_k}, seconds
    std::vector<std::vector<double>> offload_counts; // per RSU, trailing window, oldest first
    std::vector<VehicleStatusMatrix> prev_matrices;  // previous epoch; empty => zeros
};

// Fixed divisors applied per block so the network sees O(1) inputs.
struct StateNorm {
    double rate_scale = 1.0;
    double queue_scale = 1.0;
    double count_scale = 10.0;
};

int state_dimension(int num_rsus, int count_window, int x_levels, int v_levels);

// Deterministic flattening: compute-rate block, uplink block, queue block,
// offload-count block (RSU-major, oldest slot first, zero-padded on the
// left), then the previous epoch's status matrices (RSU-major, x-major).
std::vector<double> encode_state(const StateSnapshot& snap, int num_rsus, int count_window,
                                 int x_levels, int v_levels, const StateNorm& norm);

struct Transition {
    std::vector<double> state;
    std::vector<double> action;  // raw, pre-decode
    double cost = 0.0;
    std::vector<double> next_state;
};

// Bounded ring of transitions with uniform minibatch sampling (no
// replacement within one minibatch).
class ReplayMemory {
  public:
    explicit ReplayMemory(std::size_t capacity);

    void push(Transition t);
    std::size_t size() const { return items_.size(); }
    std::size_t capacity() const { return capacity_; }
    std::size_t cursor() const { return cursor_; }
    const Transition& item(std::size_t i) const { return items_[i]; }

    std::vector<const Transition*> sample(std::mt19937_64& rng, std::size_t n) const;

    void restore(std::vector<Transition> items, std::size_t cursor);

  private:
    std::size_t capacity_;
    std::size_t cursor_ = 0;  // next overwrite position once full
    std::vector<Transition> items_;
};

// Per-dimension Gaussian exploration noise whose mean and spread decay
// geometrically each epoch.
class NoiseProcess {
  public:
    NoiseProcess(double mean, double sigma, double decay);

    std::vector<double> sample(std::mt19937_64& rng, std::size_t dim) const;
    void decay_step();
    double mean() const { return mean_; }
    double sigma() const { return sigma_; }
    double decay() const { return decay_; }
    void restore(double mean, double sigma);

  private:
    double mean_;
    double sigma_;
    double decay_;
};

// ---- Update steps (exposed for gradient-check tests) ----

// y_k = c_k + discount * Q'(s_{k+1}, mu'(s_{k+1})).
std::vector<double> bellman_targets(std::span<const Transition* const> batch,
                                    const FeedForwardNet& target_actor,
                                    const FeedForwardNet& target_critic, double discount);

double critic_loss(const FeedForwardNet& critic, std::span<const Transition* const> batch,
                   std::span<const double> targets);

// One mean-squared-error descent step; returns the pre-step loss.
double critic_step(FeedForwardNet& critic, std::span<const Transition* const> batch,
                   std::span<const double> targets, double lr);

// Mean critic value of the actor's own actions (the objective the actor
// descends).
double actor_objective(const FeedForwardNet& actor, const FeedForwardNet& critic,
                       std::span<const Transition* const> batch);

// One chain-rule descent step through the critic into the actor.
void actor_step(FeedForwardNet& actor, const FeedForwardNet& critic,
                std::span<const Transition* const> batch, double lr);

// Mean weighted violation per slot, averaged over the epoch's slots; slots
// with no offloading vehicles contribute zero.
double epoch_cost(std::span<const std::pair<double, int>> slot_violations);

struct DdpgConfig {
    std::vector<int> actor_hidden{128, 64};
    std::vector<int> critic_hidden{128, 64};
    double actor_lr = 3e-3;
    double critic_lr = 1e-2;
    double discount = 0.9;
    double soft_eps = 0.99;  // target retention per update
    double noise_mean = 0.0;
    double noise_sigma = 0.2;
    double noise_decay = 0.998;
    std::size_t replay_capacity = 2048;
    std::size_t minibatch = 32;
    std::size_t warmup = 40;  // replay size before updates start
};

// Actor-critic pair with target copies, replay and exploration state. One
// agent per training run; evaluation uses act() with explore = false.
class DdpgAgent {
  public:
    DdpgAgent(int state_dim, int action_dim, DdpgConfig cfg, std::uint64_t master_seed);

    std::vector<double> act(std::span<const double> state, bool explore);
    void store(Transition t) { replay_.push(std::move(t)); }

    struct UpdateStats {
        bool updated = false;
        double critic_loss = 0.0;
    };
    UpdateStats update();
    void decay_noise() { noise_.decay_step(); }

    const FeedForwardNet& actor() const { return actor_; }
    const FeedForwardNet& critic() const { return critic_; }
    const FeedForwardNet& target_actor() const { return target_actor_; }
    const FeedForwardNet& target_critic() const { return target_critic_; }
    const ReplayMemory& replay() const { return replay_; }
    const NoiseProcess& noise() const { return noise_; }
    const DdpgConfig& config() const { return cfg_; }

    nlohmann::json save() const;
    void load(const nlohmann::json& j);

  private:
    DdpgConfig cfg_;
    FeedForwardNet actor_, critic_, target_actor_, target_critic_;
    ReplayMemory replay_;
    NoiseProcess noise_;
    std::mt19937_64 rng_;
};

}  // namespace vectwin
