#pragma once

#include <Eigen/Core>

#include "hetsim/cell.hpp"

namespace hetsim {

// (min, avg, max) demand over an observation window, megabits per slot.
struct DemandStats {
    double d_min = 0.0;
    double d_avg = 0.0;
    double d_max = 0.0;
};

enum class RewardVariant {
    Literal,       // the printed piecewise form, exp(w3 * rho_s) positive term
    BandRelative,  // positive term rebased to exp(w3 * (rho_s - rho_th2))
};

struct RewardParams {
    double beta = 100.0;  // scale of the energy-efficiency component
    double gamma = 1.0;   // scale of the loading component
    double rho_th1 = 0.7;
    double rho_th2 = 0.5;
    double w1 = 10.0;
    double w2 = 10.0;
    double w3 = 10.0;
    double w4 = 10.0;
    bool active_only = true;  // apply small-BS terms to ON BSs only
    RewardVariant variant = RewardVariant::Literal;
    // Feed the macro term of the loading reward with the offered (unserved
    // demand included) loading rate instead of the served one. Off by
    // default; the served rate is capped at 1 so dropping traffic is
    // otherwise never punished beyond that cap.
    bool use_offered_macro_load = false;
    // Bound on the offered rate fed into the exponential; keeps the
    // punishment finite when demand runs several times past capacity.
    double offered_load_cap = 1.5;

    void validate() const;
};

// Everything one decision produces, accumulated over the M-slot window.
struct StepOutcome {
    double reward = 0.0;
    double reward_energy = 0.0;   // mean per-slot energy efficiency
    double reward_loading = 0.0;  // loading-rate shaping term
    double macro_load = 0.0;      // window-average served macro loading rate
    // Window-average macro loading with unserved demand counted against the
    // macro BS; exceeds 1 exactly when the cell could not carry its demand.
    double macro_load_offered = 0.0;
    Eigen::VectorXd small_loads;  // window-average per small BS
    double throughput_mb = 0.0;
    double energy_j = 0.0;
    double dropped_mb = 0.0;
};

// Elementwise min/mean/max of one observation window.
DemandStats window_stats(const Eigen::Ref<const Eigen::VectorXd>& demands_mb);

// Loading-rate shaping reward over window-averaged rates.
double loading_reward(double rho_m, const Eigen::Ref<const Eigen::VectorXd>& rho_s,
                      const Eigen::Ref<const Eigen::Array<bool, Eigen::Dynamic, 1>>& active,
                      const RewardParams& params);

// Applies one action (number of active small BSs, held for the whole window)
// to M recording slots of demand.
StepOutcome step(const Eigen::Ref<const Eigen::VectorXd>& window_demands_mb, int action,
                 const CellLayout& layout, DistributionPolicy policy,
                 const RewardParams& params);

// Average demand over macro capacity; > 1 means the macro alone is overloaded.
double demand_rate(const DemandStats& stats, double rate_mbps, double t_r_s);

// Demand-rate group boundaries 0.3 / 0.7 / 1 / 2, half-open, closed below.
inline constexpr int kDemandGroups = 5;
int group_of(double avg_rate);

}  // namespace hetsim
