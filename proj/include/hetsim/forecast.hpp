#pragma once

#include <Eigen/Core>
#include <memory>
#include <string>
#include <vector>

#include "hetsim/data.hpp"
#include "hetsim/mdp.hpp"
#include "hetsim/net.hpp"
#include "hetsim/windows.hpp"

namespace hetsim {

// Predicts the (min, avg, max) demand statistics of the decision window
// starting at slot t*M. Every implementation except the oracle reads only
// slots before t*M; the oracle reads the target window itself and exists for
// backtests and perfect-information bounds.
class ForecastModel {
public:
    explicit ForecastModel(const WindowSpec& windows) : windows_(windows) {
        windows_.validate();
    }
    virtual ~ForecastModel() = default;

    virtual std::string name() const = 0;
    virtual void fit(const DemandSeries& /*train*/) {}
    virtual DemandStats predict(const DemandSeries& series, Eigen::Index cell,
                                Eigen::Index t) const = 0;

    // Earliest decision time this model can serve on a fresh series.
    virtual Eigen::Index min_t() const { return windows_.first_t(); }

    const WindowSpec& windows() const { return windows_; }

protected:
    WindowSpec windows_;
};

// Ground truth of the target window; zero error by construction.
class OracleForecaster final : public ForecastModel {
public:
    using ForecastModel::ForecastModel;
    std::string name() const override { return "oracle"; }
    DemandStats predict(const DemandSeries& series, Eigen::Index cell,
                        Eigen::Index t) const override;
};

// Repeats the current observation-window statistics.
class PersistenceForecaster final : public ForecastModel {
public:
    using ForecastModel::ForecastModel;
    std::string name() const override { return "persistence"; }
    DemandStats predict(const DemandSeries& series, Eigen::Index cell,
                        Eigen::Index t) const override;
};

// Statistics of the window one period (default one day) earlier.
class SeasonalForecaster final : public ForecastModel {
public:
    SeasonalForecaster(const WindowSpec& windows, int period_slots = kSlotsPerDay)
        : ForecastModel(windows), period_slots_(period_slots) {
        if (period_slots_ < 1) throw InputError("period must be >= 1 slot");
    }
    std::string name() const override { return "seasonal"; }
    DemandStats predict(const DemandSeries& series, Eigen::Index cell,
                        Eigen::Index t) const override;
    Eigen::Index min_t() const override {
        const Eigen::Index lag = (period_slots_ + windows_.m_decision - 1) / windows_.m_decision;
        return std::max(windows_.first_t(), lag);
    }

private:
    int period_slots_;
};

struct RegressorConfig {
    std::vector<int> hidden{64, 64};
    double learning_rate = 0.003;
    int epochs = 40;
    std::uint64_t seed = 7;
    double capacity_mb = 7500.0;  // normalization scale, macro rate x T_r
};

// Small dense network over the normalized observation window plus a
// slot-of-day encoding; outputs the three normalized statistics.
class RegressorForecaster final : public ForecastModel {
public:
    RegressorForecaster(const WindowSpec& windows, const RegressorConfig& config);
    std::string name() const override { return "regressor"; }
    void fit(const DemandSeries& train) override;
    DemandStats predict(const DemandSeries& series, Eigen::Index cell,
                        Eigen::Index t) const override;

    bool fitted() const { return fitted_; }
    const DenseNet& net() const;
    void save(const std::string& path) const;
    void load(const std::string& path);

private:
    Eigen::VectorXd make_input(const DemandSeries& series, Eigen::Index cell,
                               Eigen::Index t) const;

    RegressorConfig config_;
    DenseNet net_;
    bool fitted_ = false;
};

std::unique_ptr<ForecastModel> make_forecaster(const std::string& name, const WindowSpec& windows,
                                               const RegressorConfig& regressor_config);

// Per-statistic absolute and squared forecast errors, megabits.
struct ForecastErrorStats {
    Eigen::Vector3d mae = Eigen::Vector3d::Zero();
    Eigen::Vector3d rmse = Eigen::Vector3d::Zero();
    long n_windows = 0;

    double mae_avg_stat() const { return mae[1]; }
    double mae_overall() const { return mae.mean(); }
};

struct ForecastErrorReport {
    std::vector<ForecastErrorStats> per_cell;
    ForecastErrorStats aggregate;
    long skipped_windows = 0;  // horizon-infeasible decision times
};

// Walk-forward evaluation over every feasible decision time of the series.
ForecastErrorReport backtest(const ForecastModel& model, const DemandSeries& series);

// Restores d_min <= d_avg <= d_max and non-negativity; idempotent.
DemandStats clamp_ordering(const DemandStats& stats);

}  // namespace hetsim
