#include "hetsim/cell.hpp"

#include <algorithm>
#include <cmath>

namespace hetsim {

void BSPowerProfile::validate() const {
    if (p_cst_w <= 0.0 || p_tx_w <= 0.0 || alpha <= 0.0 || rate_mbps <= 0.0) {
        throw InputError("BSPowerProfile fields must all be > 0");
    }
}

void CellLayout::validate() const {
    macro.validate();
    small_bs.validate();
    if (k_small < 0) throw InputError("k_small must be >= 0");
    if (t_r_s <= 0.0) throw InputError("t_r_s must be > 0");
}

CellLayout CellLayout::defaults() {
    CellLayout layout;
    layout.macro = BSPowerProfile{130.0, 20.0, 4.7, 12.5};
    layout.small_bs = BSPowerProfile{4.8, 1.0, 8.0, 27.0};
    layout.k_small = 10;
    layout.t_r_s = 600.0;
    return layout;
}

LoadVector distribute_load(double demand_mb, const Eigen::Ref<const Eigen::Array<bool, Eigen::Dynamic, 1>>& active,
                           const CellLayout& layout, DistributionPolicy policy) {
    if (demand_mb < 0.0) throw InputError("demand must be >= 0");
    if (active.size() != layout.k_small) {
        throw InputError("active flags length does not match k_small");
    }

    const double cap_m = layout.macro_capacity_mb();
    const double cap_s = layout.small_capacity_mb();
    const Eigen::Index n_active = active.count();

    LoadVector load;
    load.x_small = Eigen::VectorXd::Zero(layout.k_small);

    switch (policy) {
        case DistributionPolicy::CapacityProportional: {
            const double total_cap = cap_m + static_cast<double>(n_active) * cap_s;
            const bool over = demand_mb > total_cap;
            const double rho = over ? 1.0 : demand_mb / total_cap;
            load.x_macro = rho * cap_m;
            for (Eigen::Index k = 0; k < active.size(); ++k) {
                if (active[k]) load.x_small[k] = rho * cap_s;
            }
            load.dropped = over ? demand_mb - total_cap : 0.0;
            break;
        }
        case DistributionPolicy::SmallFirst: {
            double remaining = demand_mb;
            if (n_active > 0) {
                const double per_small =
                    std::min(remaining / static_cast<double>(n_active), cap_s);
                for (Eigen::Index k = 0; k < active.size(); ++k) {
                    if (active[k]) load.x_small[k] = per_small;
                }
                remaining = std::max(remaining - per_small * static_cast<double>(n_active), 0.0);
            }
            load.x_macro = std::min(remaining, cap_m);
            load.dropped = std::max(remaining - load.x_macro, 0.0);
            break;
        }
    }
    return load;
}

double loading_rate(double x_mb, double rate_mbps, double t_r_s) {
    if (x_mb < 0.0) throw InputError("served traffic must be >= 0");
    const double capacity = rate_mbps * t_r_s;
    if (capacity <= 0.0) throw InputError("capacity must be > 0");
    return x_mb / capacity;
}

double macro_energy(double rho_m, const BSPowerProfile& profile, double t_r_s) {
    if (rho_m < 0.0) throw InputError("loading rate must be >= 0");
    return (profile.p_cst_w + profile.alpha * rho_m * profile.p_tx_w) * t_r_s;
}

double small_energy(double rho_s, bool on, const BSPowerProfile& profile, double t_r_s) {
    if (!on) return 0.0;
    if (rho_s < 0.0) throw InputError("loading rate must be >= 0");
    return (profile.p_cst_w + profile.alpha * rho_s * profile.p_tx_w) * t_r_s;
}

CellSlotTotals cell_energy_and_throughput(const LoadVector& load,
                                          const Eigen::Ref<const Eigen::Array<bool, Eigen::Dynamic, 1>>& active,
                                          const CellLayout& layout) {
    if (load.x_small.size() != layout.k_small || active.size() != layout.k_small) {
        throw InputError("load/active dimensions do not match k_small");
    }
    CellSlotTotals totals;
    totals.throughput_mb = load.served();

    const double rho_m = loading_rate(load.x_macro, layout.macro.rate_mbps, layout.t_r_s);
    totals.energy_j = macro_energy(rho_m, layout.macro, layout.t_r_s);
    for (Eigen::Index k = 0; k < layout.k_small; ++k) {
        const double rho_s =
            loading_rate(load.x_small[k], layout.small_bs.rate_mbps, layout.t_r_s);
        totals.energy_j += small_energy(rho_s, active[k], layout.small_bs, layout.t_r_s);
    }
    return totals;
}

double energy_efficiency(double throughput_mb, double energy_j) {
    if (energy_j <= 0.0) {
        throw InputError("energy must be > 0; a powered BS always draws p_cst");
    }
    return throughput_mb / energy_j;
}

}  // namespace hetsim
