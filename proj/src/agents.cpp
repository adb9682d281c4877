#include "hetsim/agents.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "hetsim/text.hpp"

namespace hetsim {

ReplayMemory::ReplayMemory(std::size_t capacity) : capacity_(capacity) {
    if (capacity_ == 0) throw InputError("replay capacity must be > 0");
    buffer_.reserve(capacity_);
}

void ReplayMemory::push(const Transition& transition) {
    if (buffer_.size() < capacity_) {
        buffer_.push_back(transition);
    } else {
        buffer_[next_] = transition;  // overwrite the oldest entry
        next_ = (next_ + 1) % capacity_;
    }
}

const Transition& ReplayMemory::sample_one(Rng& rng) const {
    if (buffer_.empty()) throw StateError("cannot sample from an empty replay memory");
    return buffer_[rng.uniform_index(buffer_.size())];
}

std::vector<Transition> ReplayMemory::sample(std::size_t batch_size, Rng& rng) const {
    std::vector<Transition> batch;
    batch.reserve(batch_size);
    for (std::size_t i = 0; i < batch_size; ++i) batch.push_back(sample_one(rng));
    return batch;
}

Eigen::Vector3d normalize_state(const DemandStats& stats, double rate_mbps, double t_r_s) {
    const double capacity = rate_mbps * t_r_s;
    if (capacity <= 0.0) throw InputError("capacity must be > 0");
    return Eigen::Vector3d(stats.d_min, stats.d_avg, stats.d_max) / capacity;
}

std::array<int, 3> ql_quantize(const DemandStats& stats, double data_size_mb,
                               int step_activities, int bin_cap) {
    if (data_size_mb <= 0.0) throw InputError("data_size_mb must be > 0");
    if (step_activities <= 0) throw InputError("quantization step must be > 0");
    const auto bin = [&](double demand_mb) {
        const double activities = demand_mb / data_size_mb;
        const int b = static_cast<int>(std::floor(activities / step_activities));
        return std::min(b, bin_cap);
    };
    return {bin(stats.d_min), bin(stats.d_avg), bin(stats.d_max)};
}

QTable::QTable(int n_actions) : n_actions_(n_actions) {
    if (n_actions_ < 1) throw InputError("QTable needs at least one action");
}

Eigen::VectorXd QTable::lookup(const Key& state) const {
    const auto it = table_.find(state);
    if (it == table_.end()) return Eigen::VectorXd::Zero(n_actions_);
    return it->second.q;
}

int QTable::greedy_action(const Key& state) const {
    const Eigen::VectorXd q = lookup(state);
    Eigen::Index best = 0;
    q.maxCoeff(&best);  // Eigen returns the first maximal coefficient
    return static_cast<int>(best);
}

void QTable::update(const Key& state, int action, double reward, const Key& next_state,
                    double learning_rate, double discount) {
    if (action < 0 || action >= n_actions_) throw InputError("action out of range");
    const double next_best = lookup(next_state).maxCoeff();
    auto [it, inserted] = table_.try_emplace(state, Entry{Eigen::VectorXd::Zero(n_actions_), 0});
    Entry& entry = it->second;
    entry.q[action] += learning_rate * (reward + discount * next_best - entry.q[action]);
    ++entry.visits;
}

long QTable::visits(const Key& state) const {
    const auto it = table_.find(state);
    return it == table_.end() ? 0 : it->second.visits;
}

void ql_update(QTable& table, const QTable::Key& state, int action, double reward,
               const QTable::Key& next_state, double learning_rate, double discount) {
    table.update(state, action, reward, next_state, learning_rate, discount);
}

void QTable::save(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open for writing: " + path);
    out << "hetsim-qtable 1\n";
    out << "actions " << n_actions_ << '\n';
    out << "states " << table_.size() << '\n';
    for (const auto& [key, entry] : table_) {
        out << key[0] << ' ' << key[1] << ' ' << key[2] << ' ' << entry.visits;
        for (Eigen::Index a = 0; a < entry.q.size(); ++a) {
            out << ' ' << format_double(entry.q[a]);
        }
        out << '\n';
    }
    if (!out.good()) throw IoError("write failed: " + path);
}

QTable QTable::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open for reading: " + path);
    std::string magic;
    int version = 0;
    in >> magic >> version;
    if (magic != "hetsim-qtable" || version != 1) throw DataError("not a qtable dump: " + path);
    std::string tag;
    int n_actions = 0;
    std::size_t n_states = 0;
    in >> tag >> n_actions;
    if (tag != "actions") throw DataError("qtable dump missing actions line");
    in >> tag >> n_states;
    if (tag != "states") throw DataError("qtable dump missing states line");

    QTable table(n_actions);
    for (std::size_t i = 0; i < n_states; ++i) {
        Key key{};
        long visits = 0;
        if (!(in >> key[0] >> key[1] >> key[2] >> visits)) throw DataError("qtable dump truncated");
        Entry entry{Eigen::VectorXd::Zero(n_actions), visits};
        for (int a = 0; a < n_actions; ++a) {
            if (!(in >> entry.q[a])) throw DataError("qtable dump truncated");
        }
        table.table_.emplace(key, std::move(entry));
    }
    return table;
}

void DqnConfig::validate() const {
    if (hidden.empty()) throw ConfigError("DQN needs at least one hidden layer");
    for (int h : hidden) {
        if (h < 1) throw ConfigError("hidden widths must be >= 1");
    }
    if (learning_rate <= 0.0) throw ConfigError("learning_rate must be > 0");
    if (discount < 0.0 || discount >= 1.0) throw ConfigError("discount must be in [0, 1)");
    if (epsilon < 0.0 || epsilon > 1.0) throw ConfigError("epsilon must be in [0, 1]");
    if (target_sync_steps < 1) throw ConfigError("target_sync_steps must be >= 1");
    if (batch_size < 1) throw ConfigError("batch_size must be >= 1");
}

DqnAgent::DqnAgent(int state_dim, int n_actions, const DqnConfig& config)
    : config_(config), n_actions_(n_actions), replay_(config.replay_capacity) {
    config_.validate();
    if (state_dim < 1 || n_actions < 1) throw InputError("state_dim and n_actions must be >= 1");
    std::vector<int> shape;
    shape.push_back(state_dim);
    for (int h : config_.hidden) shape.push_back(h);
    shape.push_back(n_actions);
    online_ = init_weights(shape, config_.seed);
    target_ = init_weights(shape, config_.seed);
    sync_target();
}

int greedy_action(const DenseNet& net, const Eigen::Ref<const Eigen::VectorXd>& state) {
    const Eigen::VectorXd q = forward(net, state);
    Eigen::Index best = 0;
    q.maxCoeff(&best);
    return static_cast<int>(best);
}

int select_action(const DqnAgent& agent, const Eigen::Ref<const Eigen::VectorXd>& state,
                  double epsilon, Rng& rng) {
    if (epsilon > 0.0 && rng.uniform() < epsilon) {
        return static_cast<int>(rng.uniform_index(agent.n_actions()));
    }
    return greedy_action(agent.online(), state);
}

double dqn_train_step(DqnAgent& agent, const std::vector<Transition>& batch) {
    if (batch.empty()) throw InputError("training batch must be non-empty");
    const SgdConfig sgd{agent.config_.learning_rate, agent.config_.seed};
    double loss_sum = 0.0;
    for (const Transition& transition : batch) {
        const double next_best = forward(agent.target_, transition.next_state).maxCoeff();
        const double target = transition.reward + agent.config_.discount * next_best;
        loss_sum += sgd_step(agent.online_, transition.state, target, transition.action, sgd);
    }
    ++agent.train_steps_;
    if (agent.train_steps_ % agent.config_.target_sync_steps == 0) agent.sync_target();
    return loss_sum / static_cast<double>(batch.size());
}

}  // namespace hetsim
