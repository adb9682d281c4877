#include "hetsim/forecast.hpp"

#include <algorithm>
#include <cmath>

#include "hetsim/rng.hpp"

namespace hetsim {

namespace {

Eigen::VectorXd window_of(const DemandSeries& series, Eigen::Index cell, Eigen::Index start,
                          Eigen::Index len, const char* what) {
    if (cell < 0 || cell >= series.n_macrocells()) throw InputError("macrocell index out of range");
    if (start < 0 || start + len > series.n_slots()) {
        throw HorizonError(std::string(what) + " window [" + std::to_string(start) + ", " +
                           std::to_string(start + len) + ") is outside the series");
    }
    return series.demand_mb.row(cell).segment(start, len);
}

}  // namespace

DemandStats clamp_ordering(const DemandStats& stats) {
    std::array<double, 3> v{stats.d_min, stats.d_avg, stats.d_max};
    for (double& x : v) x = std::max(x, 0.0);
    std::sort(v.begin(), v.end());
    return DemandStats{v[0], v[1], v[2]};
}

DemandStats OracleForecaster::predict(const DemandSeries& series, Eigen::Index cell,
                                      Eigen::Index t) const {
    return window_stats(window_of(series, cell, windows_.decision_start(t),
                                  windows_.m_decision, "decision"));
}

DemandStats PersistenceForecaster::predict(const DemandSeries& series, Eigen::Index cell,
                                           Eigen::Index t) const {
    return window_stats(window_of(series, cell, windows_.obs_start(t), windows_.n_obs,
                                  "observation"));
}

DemandStats SeasonalForecaster::predict(const DemandSeries& series, Eigen::Index cell,
                                        Eigen::Index t) const {
    const Eigen::Index start = windows_.decision_start(t) - period_slots_;
    return window_stats(window_of(series, cell, start, windows_.m_decision, "seasonal"));
}

RegressorForecaster::RegressorForecaster(const WindowSpec& windows, const RegressorConfig& config)
    : ForecastModel(windows), config_(config) {
    if (config_.capacity_mb <= 0.0) throw InputError("capacity_mb must be > 0");
    if (config_.learning_rate <= 0.0) throw InputError("learning_rate must be > 0");
}

Eigen::VectorXd RegressorForecaster::make_input(const DemandSeries& series, Eigen::Index cell,
                                                Eigen::Index t) const {
    const Eigen::VectorXd obs =
        window_of(series, cell, windows_.obs_start(t), windows_.n_obs, "observation");
    Eigen::VectorXd input(windows_.n_obs + 2);
    input.head(windows_.n_obs) = obs / config_.capacity_mb;
    const double day_pos = 2.0 * M_PI *
                           static_cast<double>((series.start_slot + windows_.decision_start(t)) %
                                               kSlotsPerDay) /
                           kSlotsPerDay;
    input[windows_.n_obs] = std::sin(day_pos);
    input[windows_.n_obs + 1] = std::cos(day_pos);
    return input;
}

void RegressorForecaster::fit(const DemandSeries& train) {
    const Eigen::Index t_first = windows_.first_t();
    const Eigen::Index t_last = windows_.last_t(train.n_slots());
    if (t_last < t_first) throw InputError("training series too short for one window pair");

    struct Sample {
        Eigen::VectorXd input;
        Eigen::Vector3d target;
    };
    std::vector<Sample> samples;
    for (Eigen::Index cell = 0; cell < train.n_macrocells(); ++cell) {
        for (Eigen::Index t = t_first; t <= t_last; ++t) {
            const DemandStats actual = window_stats(window_of(
                train, cell, windows_.decision_start(t), windows_.m_decision, "decision"));
            samples.push_back(Sample{
                make_input(train, cell, t),
                Eigen::Vector3d(actual.d_min, actual.d_avg, actual.d_max) / config_.capacity_mb});
        }
    }

    std::vector<int> shape;
    shape.push_back(static_cast<int>(samples.front().input.size()));
    for (int h : config_.hidden) shape.push_back(h);
    shape.push_back(3);
    net_ = init_weights(shape, config_.seed);

    Rng rng(config_.seed ^ 0x5eedf0f0u);
    const SgdConfig sgd{config_.learning_rate, config_.seed};
    std::vector<std::size_t> order(samples.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    for (int epoch = 0; epoch < config_.epochs; ++epoch) {
        for (std::size_t i = order.size(); i > 1; --i) {
            std::swap(order[i - 1], order[rng.uniform_index(i)]);
        }
        for (const std::size_t i : order) {
            sgd_step(net_, samples[i].input, samples[i].target, sgd);
        }
    }
    fitted_ = true;
}

DemandStats RegressorForecaster::predict(const DemandSeries& series, Eigen::Index cell,
                                         Eigen::Index t) const {
    if (!fitted_) throw StateError("regressor predict called before fit");
    const Eigen::VectorXd out = forward(net_, make_input(series, cell, t));
    return clamp_ordering(DemandStats{out[0] * config_.capacity_mb, out[1] * config_.capacity_mb,
                                      out[2] * config_.capacity_mb});
}

const DenseNet& RegressorForecaster::net() const {
    if (!fitted_) throw StateError("regressor has no weights before fit");
    return net_;
}

void RegressorForecaster::save(const std::string& path) const { save_weights(net(), path); }

void RegressorForecaster::load(const std::string& path) {
    net_ = load_weights(path);
    fitted_ = true;
}

std::unique_ptr<ForecastModel> make_forecaster(const std::string& name, const WindowSpec& windows,
                                               const RegressorConfig& regressor_config) {
    if (name == "oracle") return std::make_unique<OracleForecaster>(windows);
    if (name == "persistence") return std::make_unique<PersistenceForecaster>(windows);
    if (name == "seasonal") return std::make_unique<SeasonalForecaster>(windows);
    if (name == "regressor") {
        return std::make_unique<RegressorForecaster>(windows, regressor_config);
    }
    throw ConfigError("unknown forecaster: " + name);
}

ForecastErrorReport backtest(const ForecastModel& model, const DemandSeries& series) {
    const WindowSpec& w = model.windows();
    const Eigen::Index t_first = w.first_t();
    const Eigen::Index t_last = w.last_t(series.n_slots());
    if (t_last - t_first + 1 < 2) throw InputError("backtest needs at least 2 decision windows");

    ForecastErrorReport report;
    report.per_cell.resize(series.n_macrocells());
    Eigen::MatrixXd abs_sum = Eigen::MatrixXd::Zero(series.n_macrocells(), 3);
    Eigen::MatrixXd sq_sum = Eigen::MatrixXd::Zero(series.n_macrocells(), 3);

    for (Eigen::Index cell = 0; cell < series.n_macrocells(); ++cell) {
        for (Eigen::Index t = t_first; t <= t_last; ++t) {
            DemandStats predicted;
            try {
                predicted = model.predict(series, cell, t);
            } catch (const HorizonError&) {
                ++report.skipped_windows;
                continue;
            }
            const DemandStats actual = window_stats(
                series.demand_mb.row(cell).segment(w.decision_start(t), w.m_decision));
            const Eigen::Vector3d err(predicted.d_min - actual.d_min,
                                      predicted.d_avg - actual.d_avg,
                                      predicted.d_max - actual.d_max);
            abs_sum.row(cell) += err.cwiseAbs().transpose();
            sq_sum.row(cell) += err.cwiseAbs2().transpose();
            ++report.per_cell[cell].n_windows;
        }
    }

    Eigen::Vector3d total_abs = Eigen::Vector3d::Zero();
    Eigen::Vector3d total_sq = Eigen::Vector3d::Zero();
    long total_n = 0;
    for (Eigen::Index cell = 0; cell < series.n_macrocells(); ++cell) {
        ForecastErrorStats& stats = report.per_cell[cell];
        if (stats.n_windows > 0) {
            stats.mae = abs_sum.row(cell).transpose() / static_cast<double>(stats.n_windows);
            stats.rmse =
                (sq_sum.row(cell).transpose() / static_cast<double>(stats.n_windows)).cwiseSqrt();
        }
        total_abs += abs_sum.row(cell).transpose();
        total_sq += sq_sum.row(cell).transpose();
        total_n += stats.n_windows;
    }
    report.aggregate.n_windows = total_n;
    if (total_n > 0) {
        report.aggregate.mae = total_abs / static_cast<double>(total_n);
        report.aggregate.rmse = (total_sq / static_cast<double>(total_n)).cwiseSqrt();
    }
    return report;
}

}  // namespace hetsim
