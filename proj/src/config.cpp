#include "hetsim/config.hpp"

#include <fstream>
#include <functional>
#include <sstream>

#include "hetsim/text.hpp"

namespace hetsim {

Scheme parse_scheme(const std::string& name) {
    if (name == "macro") return Scheme::Macro;
    if (name == "static") return Scheme::Static;
    if (name == "ql") return Scheme::QL;
    if (name == "dqn") return Scheme::DQN;
    if (name == "dqn-f") return Scheme::DQNF;
    throw ConfigError("unknown scheme: " + name + " (expected macro|static|ql|dqn|dqn-f)");
}

std::string scheme_name(Scheme scheme) {
    switch (scheme) {
        case Scheme::Macro: return "macro";
        case Scheme::Static: return "static";
        case Scheme::QL: return "ql";
        case Scheme::DQN: return "dqn";
        case Scheme::DQNF: return "dqn-f";
    }
    throw ConfigError("invalid scheme value");
}

namespace {

double to_double(const std::string& key, const std::string& value) {
    double out = 0.0;
    if (!parse_double(value, out)) throw ConfigError("config key " + key + " expects a number");
    return out;
}

long long to_long(const std::string& key, const std::string& value) {
    long long out = 0;
    if (!parse_long(value, out)) throw ConfigError("config key " + key + " expects an integer");
    return out;
}

bool to_bool(const std::string& key, const std::string& value) {
    if (value == "true" || value == "1") return true;
    if (value == "false" || value == "0") return false;
    throw ConfigError("config key " + key + " expects true/false");
}

std::vector<int> to_int_list(const std::string& key, const std::string& value) {
    std::vector<int> out;
    for (const auto field : split_fields(value, ',')) {
        long long v = 0;
        if (!parse_long(field, v)) throw ConfigError("config key " + key + " expects ints");
        out.push_back(static_cast<int>(v));
    }
    if (out.empty()) throw ConfigError("config key " + key + " expects a non-empty list");
    return out;
}

std::string int_list_text(const std::vector<int>& values) {
    std::string out;
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (i > 0) out += ',';
        out += std::to_string(values[i]);
    }
    return out;
}

}  // namespace

void ExperimentConfig::set(const std::string& key, const std::string& value) {
    if (key == "macro_rate_mbps") macro_rate_mbps = to_double(key, value);
    else if (key == "small_rate_mbps") small_rate_mbps = to_double(key, value);
    else if (key == "macro_p_cst_w") macro_p_cst_w = to_double(key, value);
    else if (key == "small_p_cst_w") small_p_cst_w = to_double(key, value);
    else if (key == "macro_p_tx_w") macro_p_tx_w = to_double(key, value);
    else if (key == "small_p_tx_w") small_p_tx_w = to_double(key, value);
    else if (key == "macro_alpha") macro_alpha = to_double(key, value);
    else if (key == "small_alpha") small_alpha = to_double(key, value);
    else if (key == "k_small") k_small = static_cast<int>(to_long(key, value));
    else if (key == "t_r_s") t_r_s = to_double(key, value);
    else if (key == "distribution_policy") distribution_policy = value;
    else if (key == "beta") beta = to_double(key, value);
    else if (key == "gamma") gamma = to_double(key, value);
    else if (key == "rho_th1") rho_th1 = to_double(key, value);
    else if (key == "rho_th2") rho_th2 = to_double(key, value);
    else if (key == "w1") w1 = to_double(key, value);
    else if (key == "w2") w2 = to_double(key, value);
    else if (key == "w3") w3 = to_double(key, value);
    else if (key == "w4") w4 = to_double(key, value);
    else if (key == "reward_active_only") reward_active_only = to_bool(key, value);
    else if (key == "reward_macro_load") reward_macro_load = value;
    else if (key == "reward_offered_cap") reward_offered_cap = to_double(key, value);
    else if (key == "reward_variant") reward_variant = value;
    else if (key == "obs_window") obs_window = static_cast<int>(to_long(key, value));
    else if (key == "decision_window") decision_window = static_cast<int>(to_long(key, value));
    else if (key == "data_size_mb") data_size_mb = to_double(key, value);
    else if (key == "train_ratio") train_ratio = to_double(key, value);
    else if (key == "demand_csv") demand_csv = value;
    else if (key == "synth_seed") synth_seed = static_cast<std::uint64_t>(to_long(key, value));
    else if (key == "synth_macrocells") synth_macrocells = static_cast<int>(to_long(key, value));
    else if (key == "synth_days") synth_days = static_cast<int>(to_long(key, value));
    else if (key == "synth_base_mb") synth_base_mb = to_double(key, value);
    else if (key == "synth_amplitude_mb") synth_amplitude_mb = to_double(key, value);
    else if (key == "synth_noise_std_mb") synth_noise_std_mb = to_double(key, value);
    else if (key == "synth_overload_fraction") synth_overload_fraction = to_double(key, value);
    else if (key == "scheme") scheme = value;
    else if (key == "forecaster") forecaster = value;
    else if (key == "dqn_hidden") dqn_hidden = to_int_list(key, value);
    else if (key == "dqn_learning_rate") dqn_learning_rate = to_double(key, value);
    else if (key == "dqn_discount") dqn_discount = to_double(key, value);
    else if (key == "dqn_epsilon") dqn_epsilon = to_double(key, value);
    else if (key == "dqn_target_sync") dqn_target_sync = static_cast<int>(to_long(key, value));
    else if (key == "replay_capacity") replay_capacity = static_cast<int>(to_long(key, value));
    else if (key == "batch_size") batch_size = static_cast<int>(to_long(key, value));
    else if (key == "dqn_epochs") dqn_epochs = static_cast<int>(to_long(key, value));
    else if (key == "ql_learning_rate") ql_learning_rate = to_double(key, value);
    else if (key == "ql_step_activities") ql_step_activities = static_cast<int>(to_long(key, value));
    else if (key == "ql_bin_cap") ql_bin_cap = static_cast<int>(to_long(key, value));
    else if (key == "ql_epochs") ql_epochs = static_cast<int>(to_long(key, value));
    else if (key == "regressor_hidden") regressor_hidden = to_int_list(key, value);
    else if (key == "regressor_learning_rate") regressor_learning_rate = to_double(key, value);
    else if (key == "regressor_epochs") regressor_epochs = static_cast<int>(to_long(key, value));
    else if (key == "seed") seed = static_cast<std::uint64_t>(to_long(key, value));
    else if (key == "eval_workers") eval_workers = static_cast<int>(to_long(key, value));
    else throw ConfigError("unknown config key: " + key);
}

std::string ExperimentConfig::to_text() const {
    std::ostringstream out;
    const auto d = [](double v) { return format_double(v); };
    out << "macro_rate_mbps = " << d(macro_rate_mbps) << '\n'
        << "small_rate_mbps = " << d(small_rate_mbps) << '\n'
        << "macro_p_cst_w = " << d(macro_p_cst_w) << '\n'
        << "small_p_cst_w = " << d(small_p_cst_w) << '\n'
        << "macro_p_tx_w = " << d(macro_p_tx_w) << '\n'
        << "small_p_tx_w = " << d(small_p_tx_w) << '\n'
        << "macro_alpha = " << d(macro_alpha) << '\n'
        << "small_alpha = " << d(small_alpha) << '\n'
        << "k_small = " << k_small << '\n'
        << "t_r_s = " << d(t_r_s) << '\n'
        << "distribution_policy = " << distribution_policy << '\n'
        << "beta = " << d(beta) << '\n'
        << "gamma = " << d(gamma) << '\n'
        << "rho_th1 = " << d(rho_th1) << '\n'
        << "rho_th2 = " << d(rho_th2) << '\n'
        << "w1 = " << d(w1) << '\n'
        << "w2 = " << d(w2) << '\n'
        << "w3 = " << d(w3) << '\n'
        << "w4 = " << d(w4) << '\n'
        << "reward_active_only = " << (reward_active_only ? "true" : "false") << '\n'
        << "reward_variant = " << reward_variant << '\n'
        << "reward_macro_load = " << reward_macro_load << '\n'
        << "reward_offered_cap = " << d(reward_offered_cap) << '\n'
        << "obs_window = " << obs_window << '\n'
        << "decision_window = " << decision_window << '\n'
        << "data_size_mb = " << d(data_size_mb) << '\n'
        << "train_ratio = " << d(train_ratio) << '\n'
        << "demand_csv = " << demand_csv << '\n'
        << "synth_seed = " << synth_seed << '\n'
        << "synth_macrocells = " << synth_macrocells << '\n'
        << "synth_days = " << synth_days << '\n'
        << "synth_base_mb = " << d(synth_base_mb) << '\n'
        << "synth_amplitude_mb = " << d(synth_amplitude_mb) << '\n'
        << "synth_noise_std_mb = " << d(synth_noise_std_mb) << '\n'
        << "synth_overload_fraction = " << d(synth_overload_fraction) << '\n'
        << "scheme = " << scheme << '\n'
        << "forecaster = " << forecaster << '\n'
        << "dqn_hidden = " << int_list_text(dqn_hidden) << '\n'
        << "dqn_learning_rate = " << d(dqn_learning_rate) << '\n'
        << "dqn_discount = " << d(dqn_discount) << '\n'
        << "dqn_epsilon = " << d(dqn_epsilon) << '\n'
        << "dqn_target_sync = " << dqn_target_sync << '\n'
        << "replay_capacity = " << replay_capacity << '\n'
        << "batch_size = " << batch_size << '\n'
        << "dqn_epochs = " << dqn_epochs << '\n'
        << "ql_learning_rate = " << d(ql_learning_rate) << '\n'
        << "ql_step_activities = " << ql_step_activities << '\n'
        << "ql_bin_cap = " << ql_bin_cap << '\n'
        << "ql_epochs = " << ql_epochs << '\n'
        << "regressor_hidden = " << int_list_text(regressor_hidden) << '\n'
        << "regressor_learning_rate = " << d(regressor_learning_rate) << '\n'
        << "regressor_epochs = " << regressor_epochs << '\n'
        << "seed = " << seed << '\n'
        << "eval_workers = " << eval_workers << '\n';
    return out.str();
}

void ExperimentConfig::validate() const {
    layout().validate();
    reward().validate();
    windows().validate();
    policy();              // throws on unknown name
    (void)scheme_enum();   // throws on unknown name
    if (reward_variant != "literal" && reward_variant != "band_relative") {
        throw ConfigError("reward_variant must be literal or band_relative");
    }
    if (reward_macro_load != "served" && reward_macro_load != "offered") {
        throw ConfigError("reward_macro_load must be served or offered");
    }
    if (forecaster != "oracle" && forecaster != "persistence" && forecaster != "seasonal" &&
        forecaster != "regressor") {
        throw ConfigError("forecaster must be oracle|persistence|seasonal|regressor");
    }
    if (!(train_ratio > 0.0 && train_ratio < 1.0)) {
        throw ConfigError("train_ratio must be in (0, 1)");
    }
    if (data_size_mb <= 0.0) throw ConfigError("data_size_mb must be > 0");
    if (dqn_epochs < 1 || ql_epochs < 1 || regressor_epochs < 1) {
        throw ConfigError("epoch counts must be >= 1");
    }
    if (eval_workers < 1) throw ConfigError("eval_workers must be >= 1");
    try {
        dqn().validate();
    } catch (const InputError& e) {
        throw ConfigError(e.what());
    }
}

CellLayout ExperimentConfig::layout() const {
    CellLayout layout;
    layout.macro = BSPowerProfile{macro_p_cst_w, macro_p_tx_w, macro_alpha, macro_rate_mbps};
    layout.small_bs = BSPowerProfile{small_p_cst_w, small_p_tx_w, small_alpha, small_rate_mbps};
    layout.k_small = k_small;
    layout.t_r_s = t_r_s;
    return layout;
}

DistributionPolicy ExperimentConfig::policy() const {
    if (distribution_policy == "capacity_proportional") {
        return DistributionPolicy::CapacityProportional;
    }
    if (distribution_policy == "small_first") return DistributionPolicy::SmallFirst;
    throw ConfigError("distribution_policy must be capacity_proportional or small_first");
}

RewardParams ExperimentConfig::reward() const {
    RewardParams params;
    params.beta = beta;
    params.gamma = gamma;
    params.rho_th1 = rho_th1;
    params.rho_th2 = rho_th2;
    params.w1 = w1;
    params.w2 = w2;
    params.w3 = w3;
    params.w4 = w4;
    params.active_only = reward_active_only;
    params.variant =
        reward_variant == "band_relative" ? RewardVariant::BandRelative : RewardVariant::Literal;
    params.use_offered_macro_load = reward_macro_load == "offered";
    params.offered_load_cap = reward_offered_cap;
    return params;
}

WindowSpec ExperimentConfig::windows() const { return WindowSpec{obs_window, decision_window}; }

DqnConfig ExperimentConfig::dqn() const {
    DqnConfig config;
    config.hidden = dqn_hidden;
    config.learning_rate = dqn_learning_rate;
    config.discount = dqn_discount;
    config.epsilon = dqn_epsilon;
    config.target_sync_steps = dqn_target_sync;
    config.replay_capacity = static_cast<std::size_t>(replay_capacity);
    config.batch_size = batch_size;
    config.seed = seed;
    return config;
}

RegressorConfig ExperimentConfig::regressor() const {
    RegressorConfig config;
    config.hidden = regressor_hidden;
    config.learning_rate = regressor_learning_rate;
    config.epochs = regressor_epochs;
    config.seed = seed ^ 0xf05ecau;
    config.capacity_mb = macro_capacity_mb();
    return config;
}

std::map<std::string, std::string> parse_key_value_text(const std::string& text) {
    std::map<std::string, std::string> entries;
    std::istringstream in(text);
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const std::size_t hash = line.find('#');
        if (hash != std::string::npos) line.resize(hash);
        const std::string_view trimmed = trim(line);
        if (trimmed.empty()) continue;
        const std::size_t eq = trimmed.find('=');
        if (eq == std::string_view::npos) {
            throw ConfigError("config line " + std::to_string(line_no) + " is not key = value");
        }
        const std::string key(trim(trimmed.substr(0, eq)));
        const std::string value(trim(trimmed.substr(eq + 1)));
        if (key.empty()) throw ConfigError("config line " + std::to_string(line_no) + " has no key");
        entries[key] = value;
    }
    return entries;
}

ExperimentConfig ExperimentConfig::from_text(const std::string& text) {
    ExperimentConfig config;
    for (const auto& [key, value] : parse_key_value_text(text)) config.set(key, value);
    return config;
}

ExperimentConfig ExperimentConfig::from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config: " + path);
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return from_text(buffer.str());
}

}  // namespace hetsim
