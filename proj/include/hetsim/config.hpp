#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "hetsim/agents.hpp"
#include "hetsim/cell.hpp"
#include "hetsim/data.hpp"
#include "hetsim/forecast.hpp"
#include "hetsim/mdp.hpp"
#include "hetsim/windows.hpp"

namespace hetsim {

enum class Scheme { Macro, Static, QL, DQN, DQNF };

Scheme parse_scheme(const std::string& name);
std::string scheme_name(Scheme scheme);

// Every experiment knob, resolved; serialized verbatim into all outputs.
struct ExperimentConfig {
    // environment
    double macro_rate_mbps = 12.5;
    double small_rate_mbps = 27.0;
    double macro_p_cst_w = 130.0;
    double small_p_cst_w = 4.8;
    double macro_p_tx_w = 20.0;
    double small_p_tx_w = 1.0;
    double macro_alpha = 4.7;
    double small_alpha = 8.0;
    int k_small = 10;
    double t_r_s = 600.0;
    std::string distribution_policy = "capacity_proportional";

    // reward
    double beta = 100.0;
    double gamma = 1.0;
    double rho_th1 = 0.7;
    double rho_th2 = 0.5;
    double w1 = 10.0;
    double w2 = 10.0;
    double w3 = 10.0;
    double w4 = 10.0;
    bool reward_active_only = true;
    std::string reward_variant = "literal";
    std::string reward_macro_load = "served";
    double reward_offered_cap = 1.5;

    // windows
    int obs_window = 6;
    int decision_window = 6;

    // data
    double data_size_mb = 15.0;
    double train_ratio = 0.9;
    std::string demand_csv;  // empty means synthesize

    // synthetic workload
    std::uint64_t synth_seed = 1;
    int synth_macrocells = 24;
    int synth_days = 31;
    double synth_base_mb = 5000.0;
    double synth_amplitude_mb = 2200.0;
    double synth_noise_std_mb = 350.0;
    double synth_overload_fraction = 0.4;

    // agent
    std::string scheme = "dqn-f";
    std::string forecaster = "oracle";
    std::vector<int> dqn_hidden{512, 512};
    double dqn_learning_rate = 0.001;
    double dqn_discount = 0.9;
    double dqn_epsilon = 0.1;
    int dqn_target_sync = 200;
    int replay_capacity = 10000;
    int batch_size = 32;
    int dqn_epochs = 5;
    double ql_learning_rate = 0.5;
    int ql_step_activities = 20;
    int ql_bin_cap = 200;
    int ql_epochs = 12;

    // forecaster regressor
    std::vector<int> regressor_hidden{64, 64};
    double regressor_learning_rate = 0.003;
    int regressor_epochs = 40;

    // run
    std::uint64_t seed = 1;
    int eval_workers = 1;

    void validate() const;

    CellLayout layout() const;
    DistributionPolicy policy() const;
    RewardParams reward() const;
    WindowSpec windows() const;
    DqnConfig dqn() const;
    RegressorConfig regressor() const;
    Scheme scheme_enum() const { return parse_scheme(scheme); }
    double macro_capacity_mb() const { return macro_rate_mbps * t_r_s; }

    void set(const std::string& key, const std::string& value);
    // Canonical key=value rendering, fixed key order.
    std::string to_text() const;

    static ExperimentConfig from_file(const std::string& path);
    static ExperimentConfig from_text(const std::string& text);
};

// `key = value` lines; '#' starts a comment; keys must be known.
std::map<std::string, std::string> parse_key_value_text(const std::string& text);

}  // namespace hetsim
