#include "hetsim/mdp.hpp"

#include <algorithm>
#include <cmath>

namespace hetsim {

void RewardParams::validate() const {
    if (!(rho_th1 > rho_th2) || !(rho_th2 > 0.0)) {
        throw InputError("thresholds must satisfy rho_th1 > rho_th2 > 0");
    }
    if (w1 <= 0.0 || w2 <= 0.0 || w3 <= 0.0 || w4 <= 0.0) {
        throw InputError("reward weights must be > 0");
    }
}

DemandStats window_stats(const Eigen::Ref<const Eigen::VectorXd>& demands_mb) {
    if (demands_mb.size() == 0) throw InputError("empty observation window");
    DemandStats stats;
    stats.d_min = demands_mb.minCoeff();
    stats.d_avg = demands_mb.mean();
    stats.d_max = demands_mb.maxCoeff();
    return stats;
}

double loading_reward(double rho_m, const Eigen::Ref<const Eigen::VectorXd>& rho_s,
                      const Eigen::Ref<const Eigen::Array<bool, Eigen::Dynamic, 1>>& active,
                      const RewardParams& params) {
    if (rho_m < 0.0 || (rho_s.size() > 0 && rho_s.minCoeff() < 0.0)) {
        throw InputError("loading rates must be >= 0");
    }
    if (rho_s.size() != active.size()) {
        throw InputError("rho_s and active must have equal length");
    }

    double r = 0.0;
    if (rho_m > params.rho_th1) {
        r -= std::exp(params.w1 * (rho_m - params.rho_th1));
    }
    for (Eigen::Index k = 0; k < rho_s.size(); ++k) {
        if (params.active_only && !active[k]) continue;
        const double rho = rho_s[k];
        if (rho_m < params.rho_th1 && rho < params.rho_th2) {
            r -= std::exp(params.w2 * (params.rho_th1 - rho));
        } else if (rho > params.rho_th2 && rho < params.rho_th1) {
            r += params.variant == RewardVariant::Literal
                     ? std::exp(params.w3 * rho)
                     : std::exp(params.w3 * (rho - params.rho_th2));
        } else if (rho > params.rho_th1) {
            r -= std::exp(params.w4 * (rho - params.rho_th1));
        }
    }
    return r;
}

StepOutcome step(const Eigen::Ref<const Eigen::VectorXd>& window_demands_mb, int action,
                 const CellLayout& layout, DistributionPolicy policy,
                 const RewardParams& params) {
    if (window_demands_mb.size() == 0) throw InputError("decision window must hold >= 1 slot");
    if (action < 0 || action > layout.k_small) {
        throw InputError("action out of range 0..k_small");
    }

    // The action maps to the first `action` small BSs; all smalls are
    // identical so the choice is immaterial.
    Eigen::Array<bool, Eigen::Dynamic, 1> active =
        Eigen::Array<bool, Eigen::Dynamic, 1>::Constant(layout.k_small, false);
    active.head(action) = true;

    const Eigen::Index n_slots = window_demands_mb.size();
    const double macro_cap = layout.macro_capacity_mb();

    StepOutcome out;
    out.small_loads = Eigen::VectorXd::Zero(layout.k_small);
    double ee_sum = 0.0;
    double offered_sum = 0.0;
    for (Eigen::Index i = 0; i < n_slots; ++i) {
        const LoadVector load = distribute_load(window_demands_mb[i], active, layout, policy);
        const CellSlotTotals totals = cell_energy_and_throughput(load, active, layout);
        out.throughput_mb += totals.throughput_mb;
        out.energy_j += totals.energy_j;
        out.dropped_mb += load.dropped;
        ee_sum += energy_efficiency(totals.throughput_mb, totals.energy_j);
        out.macro_load += load.x_macro / macro_cap;
        offered_sum += (load.x_macro + load.dropped) / macro_cap;
        out.small_loads += load.x_small / layout.small_capacity_mb();
    }
    const double inv_m = 1.0 / static_cast<double>(n_slots);
    out.macro_load *= inv_m;
    out.macro_load_offered = offered_sum * inv_m;
    out.small_loads *= inv_m;
    out.reward_energy = ee_sum * inv_m;
    const double reward_rho_m =
        params.use_offered_macro_load
            ? std::min(out.macro_load_offered, params.offered_load_cap)
            : out.macro_load;
    out.reward_loading = loading_reward(reward_rho_m, out.small_loads, active, params);
    out.reward = params.beta * out.reward_energy + params.gamma * out.reward_loading;
    return out;
}

double demand_rate(const DemandStats& stats, double rate_mbps, double t_r_s) {
    const double capacity = rate_mbps * t_r_s;
    if (capacity <= 0.0) throw InputError("capacity must be > 0");
    return stats.d_avg / capacity;
}

int group_of(double avg_rate) {
    if (avg_rate < 0.0) throw InputError("demand rate must be >= 0");
    if (avg_rate < 0.3) return 0;
    if (avg_rate < 0.7) return 1;
    if (avg_rate < 1.0) return 2;
    if (avg_rate < 2.0) return 3;
    return 4;
}

}  // namespace hetsim
