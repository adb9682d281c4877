#include "hetsim/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <filesystem>
#include <fstream>
#include <functional>
#include <mutex>
#include <sstream>
#include <thread>

#include "hetsim/text.hpp"

namespace hetsim {

namespace {

namespace fs = std::filesystem;

std::string join(const std::string& dir, const char* name) {
    return (fs::path(dir) / name).string();
}

// Scheme-dependent state: forecasted statistics for DQN-F, raw
// observation-window statistics otherwise.
DemandStats state_stats(Scheme scheme, const ForecastModel* forecaster,
                        const DemandSeries& series, Eigen::Index cell, Eigen::Index t,
                        const WindowSpec& w) {
    if (scheme == Scheme::DQNF) return forecaster->predict(series, cell, t);
    return window_stats(series.demand_mb.row(cell).segment(w.obs_start(t), w.n_obs));
}

Eigen::Index eval_first_t(const WindowSpec& w, const TrainedPolicy& policy) {
    Eigen::Index t = w.first_t();
    if (policy.forecaster) t = std::max(t, policy.forecaster->min_t());
    return t;
}

void run_cells(int workers, Eigen::Index n_cells, const std::function<void(Eigen::Index)>& body) {
    if (workers <= 1 || n_cells <= 1) {
        for (Eigen::Index c = 0; c < n_cells; ++c) body(c);
        return;
    }
    std::exception_ptr first_error;
    std::mutex error_mutex;
    std::atomic<Eigen::Index> next{0};
    auto worker = [&]() {
        while (true) {
            const Eigen::Index c = next.fetch_add(1);
            if (c >= n_cells) break;
            try {
                body(c);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!first_error) first_error = std::current_exception();
                break;
            }
        }
    };
    std::vector<std::thread> pool;
    const int n_threads = std::min<int>(workers, static_cast<int>(n_cells));
    pool.reserve(n_threads);
    for (int i = 0; i < n_threads; ++i) pool.emplace_back(worker);
    for (std::thread& t : pool) t.join();
    if (first_error) std::rethrow_exception(first_error);
}

}  // namespace

DemandSeries load_or_synth_demand(const ExperimentConfig& config) {
    DemandSeries series;
    if (!config.demand_csv.empty()) {
        series = load_demand_csv(config.demand_csv);
    } else {
        SynthParams params;
        params.seed = config.synth_seed;
        params.n_macrocells = config.synth_macrocells;
        params.n_days = config.synth_days;
        params.base_mb = config.synth_base_mb;
        params.amplitude_mb = config.synth_amplitude_mb;
        params.noise_std_mb = config.synth_noise_std_mb;
        params.overload_fraction = config.synth_overload_fraction;
        series = synth_traffic(params);
    }
    series.t_r_s = config.t_r_s;
    series.data_size_mb = config.data_size_mb;
    return series;
}

TrainingOutput run_training(const ExperimentConfig& config, const DemandSeries& full_series) {
    config.validate();
    const Scheme scheme = config.scheme_enum();

    TrainingOutput out;
    out.policy.scheme = scheme;
    out.policy.k_small = config.k_small;
    if (scheme == Scheme::Macro || scheme == Scheme::Static) return out;

    const DemandSeries train = train_test_split(full_series, config.train_ratio).train;
    const WindowSpec w = config.windows();
    const CellLayout layout = config.layout();
    const DistributionPolicy dist_policy = config.policy();
    const RewardParams reward_params = config.reward();
    const double capacity = config.macro_capacity_mb();
    const int n_actions = config.k_small + 1;

    if (scheme == Scheme::DQNF) {
        out.policy.forecaster = make_forecaster(config.forecaster, w, config.regressor());
        out.policy.forecaster_name = config.forecaster;
        out.policy.forecaster->fit(train);
    }

    Eigen::Index t_first = w.first_t();
    if (out.policy.forecaster) t_first = std::max(t_first, out.policy.forecaster->min_t());
    // The transition's next state must also be computable, hence the -1.
    const Eigen::Index t_last = w.last_t(train.n_slots()) - 1;
    if (t_last < t_first) {
        throw DataError("training split too short for one transition at the configured windows");
    }

    Rng rng = Rng(config.seed).fork(0x74726e);

    const auto stats_at = [&](Eigen::Index cell, Eigen::Index t) {
        return state_stats(scheme, out.policy.forecaster.get(), train, cell, t, w);
    };
    const auto window_at = [&](Eigen::Index cell, Eigen::Index t) {
        return train.demand_mb.row(cell).segment(w.decision_start(t), w.m_decision).transpose();
    };

    if (scheme == Scheme::QL) {
        auto table = std::make_unique<QTable>(n_actions);
        for (int epoch = 0; epoch < config.ql_epochs; ++epoch) {
            double reward_sum = 0.0;
            double td2_sum = 0.0;
            long n = 0;
            for (Eigen::Index t = t_first; t <= t_last; ++t) {
                for (Eigen::Index cell = 0; cell < train.n_macrocells(); ++cell) {
                    const QTable::Key key = ql_quantize(stats_at(cell, t), config.data_size_mb,
                                                        config.ql_step_activities, config.ql_bin_cap);
                    const int action =
                        rng.uniform() < config.dqn_epsilon
                            ? static_cast<int>(rng.uniform_index(n_actions))
                            : table->greedy_action(key);
                    const StepOutcome outcome =
                        step(window_at(cell, t), action, layout, dist_policy, reward_params);
                    const QTable::Key next_key =
                        ql_quantize(stats_at(cell, t + 1), config.data_size_mb,
                                    config.ql_step_activities, config.ql_bin_cap);
                    const double td = outcome.reward +
                                      config.dqn_discount * table->lookup(next_key).maxCoeff() -
                                      table->lookup(key)[action];
                    ql_update(*table, key, action, outcome.reward, next_key,
                              config.ql_learning_rate, config.dqn_discount);
                    reward_sum += outcome.reward;
                    td2_sum += td * td;
                    ++n;
                    ++out.steps;
                }
            }
            out.log.push_back(TrainingLogEntry{epoch, td2_sum / static_cast<double>(n),
                                               reward_sum / static_cast<double>(n)});
        }
        out.policy.table = std::move(table);
        return out;
    }

    // DQN / DQN-F
    auto agent = std::make_unique<DqnAgent>(3, n_actions, config.dqn());
    for (int epoch = 0; epoch < config.dqn_epochs; ++epoch) {
        double reward_sum = 0.0;
        double loss_sum = 0.0;
        long n = 0;
        long n_train_steps = 0;
        for (Eigen::Index t = t_first; t <= t_last; ++t) {
            for (Eigen::Index cell = 0; cell < train.n_macrocells(); ++cell) {
                Transition transition;
                transition.state = normalize_state(stats_at(cell, t), config.macro_rate_mbps,
                                                   config.t_r_s);
                transition.action = select_action(*agent, transition.state, config.dqn_epsilon, rng);
                const StepOutcome outcome = step(window_at(cell, t), transition.action, layout,
                                                 dist_policy, reward_params);
                transition.reward = outcome.reward;
                transition.next_state = normalize_state(stats_at(cell, t + 1),
                                                        config.macro_rate_mbps, config.t_r_s);
                agent->replay().push(transition);
                if (agent->replay().size() >= static_cast<std::size_t>(config.batch_size)) {
                    try {
                        loss_sum += dqn_train_step(
                            *agent, agent->replay().sample(config.batch_size, rng));
                    } catch (const TrainingError& e) {
                        throw TrainingError("training diverged in epoch " +
                                            std::to_string(epoch) + ": " + e.what());
                    }
                    ++n_train_steps;
                    ++out.steps;
                }
                reward_sum += outcome.reward;
                ++n;
            }
        }
        out.log.push_back(TrainingLogEntry{
            epoch, n_train_steps > 0 ? loss_sum / static_cast<double>(n_train_steps) : 0.0,
            reward_sum / static_cast<double>(n)});
    }
    out.policy.agent = std::move(agent);
    return out;
}

namespace {

void write_training_log(const std::vector<TrainingLogEntry>& log, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open for writing: " + path);
    out << "epoch,mean_loss,mean_reward\n";
    for (const TrainingLogEntry& entry : log) {
        out << entry.epoch << ',' << format_double(entry.mean_loss) << ','
            << format_double(entry.mean_reward) << '\n';
    }
    if (!out.good()) throw IoError("write failed: " + path);
}

}  // namespace

void save_checkpoint(const ExperimentConfig& config, const TrainingOutput& output,
                     const std::string& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw IoError("cannot create checkpoint directory " + dir + ": " + ec.message());

    std::ofstream manifest(join(dir, "manifest.txt"), std::ios::binary);
    if (!manifest) throw IoError("cannot write checkpoint manifest in " + dir);
    manifest << "schema = 1\n"
             << "scheme = " << scheme_name(output.policy.scheme) << '\n'
             << "forecaster = " << output.policy.forecaster_name << '\n'
             << "k_small = " << output.policy.k_small << '\n'
             << "seed = " << config.seed << '\n'
             << "train_steps = " << output.steps << '\n'
             << "epochs = " << output.log.size() << '\n';
    manifest.close();

    std::ofstream cfg(join(dir, "config.txt"), std::ios::binary);
    cfg << config.to_text();
    cfg.close();

    if (output.policy.agent) save_weights(output.policy.agent->online(), join(dir, "qnet.weights"));
    if (output.policy.table) output.policy.table->save(join(dir, "qtable.txt"));
    if (const auto* regressor =
            dynamic_cast<const RegressorForecaster*>(output.policy.forecaster.get())) {
        regressor->save(join(dir, "forecaster.weights"));
    }
    write_training_log(output.log, join(dir, "training_log.csv"));
}

TrainedPolicy load_checkpoint(const ExperimentConfig& config, const std::string& dir) {
    std::ifstream in(join(dir, "manifest.txt"));
    if (!in) throw IoError("cannot open checkpoint manifest in " + dir);
    std::ostringstream buffer;
    buffer << in.rdbuf();
    const auto manifest = parse_key_value_text(buffer.str());

    const auto field = [&](const char* key) -> std::string {
        const auto it = manifest.find(key);
        if (it == manifest.end()) {
            throw DataError(std::string("checkpoint manifest missing key ") + key);
        }
        return it->second;
    };

    TrainedPolicy policy;
    policy.scheme = parse_scheme(field("scheme"));
    policy.k_small = static_cast<int>(std::stol(field("k_small")));
    policy.forecaster_name = manifest.count("forecaster") ? manifest.at("forecaster") : "";

    if (policy.scheme != config.scheme_enum()) {
        throw ConfigError("checkpoint scheme " + field("scheme") + " does not match config scheme " +
                          config.scheme);
    }
    if (policy.k_small != config.k_small) {
        throw ConfigError("checkpoint k_small does not match config");
    }

    if (policy.scheme == Scheme::QL) {
        policy.table = std::make_unique<QTable>(QTable::load(join(dir, "qtable.txt")));
        if (policy.table->n_actions() != config.k_small + 1) {
            throw ConfigError("checkpoint action count does not match config");
        }
    } else if (policy.scheme == Scheme::DQN || policy.scheme == Scheme::DQNF) {
        auto agent = std::make_unique<DqnAgent>(3, config.k_small + 1, config.dqn());
        DenseNet net = load_weights(join(dir, "qnet.weights"));
        if (!net.same_shape(agent->online())) {
            throw ConfigError("checkpoint network shape does not match config dqn_hidden");
        }
        clone_into(net, agent->online_mutable());
        agent->sync_target();
        policy.agent = std::move(agent);
    }

    if (policy.scheme == Scheme::DQNF) {
        if (policy.forecaster_name != config.forecaster) {
            throw ConfigError("checkpoint forecaster " + policy.forecaster_name +
                              " does not match config forecaster " + config.forecaster);
        }
        auto model = make_forecaster(config.forecaster, config.windows(), config.regressor());
        if (auto* regressor = dynamic_cast<RegressorForecaster*>(model.get())) {
            regressor->load(join(dir, "forecaster.weights"));
        }
        policy.forecaster = std::move(model);
    }
    return policy;
}

std::vector<int> assign_demand_groups(const DemandSeries& series, double macro_capacity_mb,
                                      std::vector<double>* rates_out) {
    if (macro_capacity_mb <= 0.0) throw InputError("capacity must be > 0");
    std::vector<int> groups(series.n_macrocells());
    if (rates_out) rates_out->resize(series.n_macrocells());
    for (Eigen::Index c = 0; c < series.n_macrocells(); ++c) {
        const double rate = series.demand_mb.row(c).mean() / macro_capacity_mb;
        groups[c] = group_of(rate);
        if (rates_out) (*rates_out)[c] = rate;
    }
    return groups;
}

Report run_evaluation(const ExperimentConfig& config,
                      const std::vector<const TrainedPolicy*>& policies,
                      const DemandSeries& test_series) {
    config.validate();
    const WindowSpec w = config.windows();
    const CellLayout layout = config.layout();
    const DistributionPolicy dist_policy = config.policy();
    const RewardParams reward_params = config.reward();
    const Eigen::Index n_cells = test_series.n_macrocells();

    Report report;
    report.seed = config.seed;
    report.config_text = config.to_text();
    report.cell_groups =
        assign_demand_groups(test_series, config.macro_capacity_mb(), &report.cell_demand_rates);

    const Eigen::Index t_last = w.last_t(test_series.n_slots());

    for (const TrainedPolicy* policy : policies) {
        if (policy->k_small != config.k_small) {
            throw ConfigError("policy k_small does not match config");
        }
        const Eigen::Index t_first = eval_first_t(w, *policy);
        if (t_last < t_first) throw DataError("test split too short for one decision window");

        std::vector<GroupMetrics> per_cell(n_cells);
        run_cells(config.eval_workers, n_cells, [&](Eigen::Index cell) {
            GroupMetrics metrics;
            metrics.n_macrocells = 1;
            for (Eigen::Index t = t_first; t <= t_last; ++t) {
                int action = 0;
                switch (policy->scheme) {
                    case Scheme::Macro:
                        action = macro_policy();
                        break;
                    case Scheme::Static:
                        action = static_policy(config.k_small);
                        break;
                    case Scheme::QL: {
                        const DemandStats stats =
                            state_stats(Scheme::QL, nullptr, test_series, cell, t, w);
                        action = policy->table->greedy_action(
                            ql_quantize(stats, config.data_size_mb, config.ql_step_activities,
                                        config.ql_bin_cap));
                        break;
                    }
                    case Scheme::DQN:
                    case Scheme::DQNF: {
                        const DemandStats stats = state_stats(
                            policy->scheme, policy->forecaster.get(), test_series, cell, t, w);
                        action = greedy_action(
                            policy->agent->online(),
                            normalize_state(stats, config.macro_rate_mbps, config.t_r_s));
                        break;
                    }
                }
                const StepOutcome outcome =
                    step(test_series.demand_mb.row(cell).segment(w.decision_start(t), w.m_decision)
                             .transpose(),
                         action, layout, dist_policy, reward_params);
                metrics.n_decisions += 1;
                metrics.transmitted_mb += outcome.throughput_mb;
                metrics.energy_j += outcome.energy_j;
                metrics.dropped_mb += outcome.dropped_mb;
                metrics.active_smalls_sum += action;
                if (outcome.macro_load_offered > 1.0) ++metrics.failed_decisions;
                const int bin = std::min<int>(
                    kRhoHistogramBins - 1,
                    static_cast<int>(std::floor(outcome.macro_load_offered / kRhoHistogramStep)));
                ++metrics.rho_histogram[bin];
            }
            per_cell[cell] = std::move(metrics);
        });

        SchemeReport scheme_report;
        scheme_report.scheme = scheme_name(policy->scheme);
        scheme_report.forecaster = policy->scheme == Scheme::DQNF ? policy->forecaster_name : "";
        for (Eigen::Index cell = 0; cell < n_cells; ++cell) {
            scheme_report.groups[report.cell_groups[cell]].absorb(per_cell[cell]);
            scheme_report.overall.absorb(per_cell[cell]);
        }
        report.schemes.push_back(std::move(scheme_report));
    }
    return report;
}

}  // namespace hetsim
