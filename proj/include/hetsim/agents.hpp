#pragma once

#include <Eigen/Core>
#include <array>
#include <map>
#include <vector>

#include "hetsim/mdp.hpp"
#include "hetsim/net.hpp"
#include "hetsim/rng.hpp"

namespace hetsim {

// One experience tuple: pre-processed normalized states on both sides.
struct Transition {
    Eigen::Vector3d state = Eigen::Vector3d::Zero();
    int action = 0;
    double reward = 0.0;
    Eigen::Vector3d next_state = Eigen::Vector3d::Zero();
};

// Bounded FIFO with uniform with-replacement sampling.
class ReplayMemory {
public:
    explicit ReplayMemory(std::size_t capacity);

    void push(const Transition& transition);
    const Transition& sample_one(Rng& rng) const;
    std::vector<Transition> sample(std::size_t batch_size, Rng& rng) const;

    std::size_t size() const { return buffer_.size(); }
    std::size_t capacity() const { return capacity_; }

private:
    std::size_t capacity_;
    std::size_t next_ = 0;  // ring position once full
    std::vector<Transition> buffer_;
};

// Statistics expressed as demand rates, Eq.-(22) units.
Eigen::Vector3d normalize_state(const DemandStats& stats, double rate_mbps, double t_r_s);

// Demand statistics quantized to activity-count bins for the tabular agent.
std::array<int, 3> ql_quantize(const DemandStats& stats, double data_size_mb,
                               int step_activities, int bin_cap = 200);

// Q table over quantized states; unseen states read as all-zero values.
class QTable {
public:
    using Key = std::array<int, 3>;

    explicit QTable(int n_actions);

    Eigen::VectorXd lookup(const Key& state) const;  // zeros when unseen
    int greedy_action(const Key& state) const;       // lowest index wins ties
    void update(const Key& state, int action, double reward, const Key& next_state,
                double learning_rate, double discount);

    int n_actions() const { return n_actions_; }
    std::size_t n_states() const { return table_.size(); }
    long visits(const Key& state) const;

    void save(const std::string& path) const;
    static QTable load(const std::string& path);

private:
    struct Entry {
        Eigen::VectorXd q;
        long visits = 0;
    };
    int n_actions_;
    std::map<Key, Entry> table_;
};

void ql_update(QTable& table, const QTable::Key& state, int action, double reward,
               const QTable::Key& next_state, double learning_rate, double discount);

struct DqnConfig {
    std::vector<int> hidden{512, 512};
    double learning_rate = 0.001;
    double discount = 0.9;
    double epsilon = 0.1;
    int target_sync_steps = 200;
    std::size_t replay_capacity = 10000;
    int batch_size = 32;
    std::uint64_t seed = 1;

    void validate() const;
};

// Online net, frozen target net, replay memory. One agent instance serves
// every macrocell.
class DqnAgent {
public:
    DqnAgent(int state_dim, int n_actions, const DqnConfig& config);

    const DenseNet& online() const { return online_; }
    const DenseNet& target() const { return target_; }
    DenseNet& online_mutable() { return online_; }
    ReplayMemory& replay() { return replay_; }
    const ReplayMemory& replay() const { return replay_; }
    const DqnConfig& config() const { return config_; }
    int n_actions() const { return n_actions_; }
    long train_steps() const { return train_steps_; }

    void sync_target() { clone_into(online_, target_); }
    void set_train_steps(long steps) { train_steps_ = steps; }

    friend double dqn_train_step(DqnAgent& agent, const std::vector<Transition>& batch);

private:
    DqnConfig config_;
    int n_actions_;
    DenseNet online_;
    DenseNet target_;
    ReplayMemory replay_;
    long train_steps_ = 0;
};

// Greedy on the online net with probability 1 - epsilon, uniform otherwise.
int select_action(const DqnAgent& agent, const Eigen::Ref<const Eigen::VectorXd>& state,
                  double epsilon, Rng& rng);

int greedy_action(const DenseNet& net, const Eigen::Ref<const Eigen::VectorXd>& state);

// One Eq.-(19) step per transition against the frozen target net; returns the
// mean per-sample loss. The target net re-syncs every target_sync_steps calls.
double dqn_train_step(DqnAgent& agent, const std::vector<Transition>& batch);

// Fixed baselines.
inline int macro_policy() { return 0; }
inline int static_policy(int k_small) { return k_small; }

}  // namespace hetsim
