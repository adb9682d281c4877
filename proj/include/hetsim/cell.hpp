#pragma once

#include <Eigen/Core>

#include "hetsim/errors.hpp"

namespace hetsim {

// Power model of one base station. Traffic is in megabits, power in watts,
// energy in joules throughout.
struct BSPowerProfile {
    double p_cst_w = 0.0;    // constant signal-processing power
    double p_tx_w = 0.0;     // transmission power
    double alpha = 0.0;      // linear transmission power dependence factor
    double rate_mbps = 0.0;  // average achievable user data rate

    void validate() const;
    // Megabits the BS can serve in one recording slot.
    double capacity_mb(double t_r_s) const { return rate_mbps * t_r_s; }
};

// One macrocell: a macro BS plus k_small identical small BSs.
struct CellLayout {
    BSPowerProfile macro;
    BSPowerProfile small_bs;
    int k_small = 0;
    double t_r_s = 600.0;  // recording period

    void validate() const;
    double macro_capacity_mb() const { return macro.capacity_mb(t_r_s); }
    double small_capacity_mb() const { return small_bs.capacity_mb(t_r_s); }

    // Table I constants.
    static CellLayout defaults();
};

// How demand splits across the macro BS and the active small BSs.
enum class DistributionPolicy {
    CapacityProportional,  // every active BS carries the same loading rate
    SmallFirst,            // fill small BSs equally, remainder to the macro
};

// Megabits served by each BS in one slot. x_small is zero where a BS is OFF.
struct LoadVector {
    double x_macro = 0.0;
    Eigen::VectorXd x_small;
    double dropped = 0.0;

    double served() const { return x_macro + x_small.sum(); }
};

// Splits one slot's demand across the macro BS and the ON small BSs.
LoadVector distribute_load(double demand_mb, const Eigen::Ref<const Eigen::Array<bool, Eigen::Dynamic, 1>>& active,
                           const CellLayout& layout, DistributionPolicy policy);

// Served megabits over capacity; values above 1 are meaningful for offered
// (demand-side) rates, so no clamping here.
double loading_rate(double x_mb, double rate_mbps, double t_r_s);

// Eq.-style macro energy for one slot: (p_cst + alpha * rho * p_tx) * t_r.
double macro_energy(double rho_m, const BSPowerProfile& profile, double t_r_s);

// A small BS consumes nothing while OFF.
double small_energy(double rho_s, bool on, const BSPowerProfile& profile, double t_r_s);

// Totals for one slot given the realized loads.
struct CellSlotTotals {
    double throughput_mb = 0.0;
    double energy_j = 0.0;
};

CellSlotTotals cell_energy_and_throughput(const LoadVector& load,
                                          const Eigen::Ref<const Eigen::Array<bool, Eigen::Dynamic, 1>>& active,
                                          const CellLayout& layout);

// Megabits per joule.
double energy_efficiency(double throughput_mb, double energy_j);

}  // namespace hetsim
