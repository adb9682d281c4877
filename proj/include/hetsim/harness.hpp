#pragma once

#include <memory>
#include <string>
#include <vector>

#include "hetsim/agents.hpp"
#include "hetsim/config.hpp"
#include "hetsim/data.hpp"
#include "hetsim/forecast.hpp"
#include "hetsim/report.hpp"

namespace hetsim {

struct TrainingLogEntry {
    int epoch = 0;
    double mean_loss = 0.0;
    double mean_reward = 0.0;
};

// A policy ready for greedy evaluation. Exactly one of agent/table is set for
// the learned schemes; MACRO and STATIC carry neither.
struct TrainedPolicy {
    Scheme scheme = Scheme::Macro;
    int k_small = 0;
    std::unique_ptr<DqnAgent> agent;
    std::unique_ptr<QTable> table;
    std::unique_ptr<ForecastModel> forecaster;  // pre-processing for dqn-f
    std::string forecaster_name;
};

struct TrainingOutput {
    TrainedPolicy policy;
    std::vector<TrainingLogEntry> log;
    long steps = 0;  // parameter updates performed
};

// Demand input resolution: configured CSV when present, synthetic otherwise.
DemandSeries load_or_synth_demand(const ExperimentConfig& config);

// Trains the configured scheme on the chronological training split of
// `full_series`. MACRO and STATIC return immediately with an empty log.
TrainingOutput run_training(const ExperimentConfig& config, const DemandSeries& full_series);

void save_checkpoint(const ExperimentConfig& config, const TrainingOutput& output,
                     const std::string& dir);
TrainedPolicy load_checkpoint(const ExperimentConfig& config, const std::string& dir);

// Greedy (epsilon = 0) replay of the test split for each policy; one Report
// covering every scheme handed in.
Report run_evaluation(const ExperimentConfig& config,
                      const std::vector<const TrainedPolicy*>& policies,
                      const DemandSeries& test_series);

// Demand-group index per macrocell by time-averaged demand rate.
std::vector<int> assign_demand_groups(const DemandSeries& series, double macro_capacity_mb,
                                      std::vector<double>* rates_out = nullptr);

}  // namespace hetsim
