#include <doctest.h>

#include <Eigen/Core>
#include <cmath>

#include "hetsim/cell.hpp"
#include "hetsim/rng.hpp"

using namespace hetsim;

namespace {

using ActiveFlags = Eigen::Array<bool, Eigen::Dynamic, 1>;

ActiveFlags first_on(int k, int on) {
    ActiveFlags active = ActiveFlags::Constant(k, false);
    active.head(on) = true;
    return active;
}

ActiveFlags random_flags(int k, Rng& rng) {
    ActiveFlags active(k);
    for (int i = 0; i < k; ++i) active[i] = rng.uniform() < 0.5;
    return active;
}

}  // namespace

TEST_CASE("profile and layout validation") {
    CHECK_NOTHROW(CellLayout::defaults().validate());
    BSPowerProfile bad{0.0, 20.0, 4.7, 12.5};
    CHECK_THROWS_AS(bad.validate(), InputError);
    CellLayout layout = CellLayout::defaults();
    layout.t_r_s = 0.0;
    CHECK_THROWS_AS(layout.validate(), InputError);
}

TEST_CASE("distribute_load splits demand") {
    const CellLayout layout = CellLayout::defaults();

    SUBCASE("single BS under capacity") {
        const LoadVector load =
            distribute_load(5000.0, first_on(10, 0), layout, DistributionPolicy::CapacityProportional);
        CHECK(load.x_macro == doctest::Approx(5000.0));
        CHECK(load.dropped == 0.0);
    }
    SUBCASE("macro saturates at rate x t_r") {
        const LoadVector load =
            distribute_load(10000.0, first_on(10, 0), layout, DistributionPolicy::CapacityProportional);
        CHECK(load.x_macro == doctest::Approx(7500.0).epsilon(1e-12));
        CHECK(load.dropped == doctest::Approx(2500.0).epsilon(1e-12));
    }
    SUBCASE("proportional split equalizes loading rates") {
        const LoadVector load =
            distribute_load(9000.0, first_on(10, 1), layout, DistributionPolicy::CapacityProportional);
        const double rho = 9000.0 / 23700.0;
        CHECK(load.x_macro == doctest::Approx(rho * 7500.0).epsilon(1e-12));
        CHECK(load.x_small[0] == doctest::Approx(rho * 16200.0).epsilon(1e-12));
        CHECK(load.x_small.tail(9).isZero());
        CHECK(load.x_macro / 7500.0 == doctest::Approx(load.x_small[0] / 16200.0).epsilon(1e-12));
        CHECK(load.dropped == 0.0);
    }
    SUBCASE("demand above total capacity is dropped") {
        const LoadVector load =
            distribute_load(30000.0, first_on(10, 1), layout, DistributionPolicy::CapacityProportional);
        CHECK(load.x_macro == doctest::Approx(7500.0).epsilon(1e-12));
        CHECK(load.x_small[0] == doctest::Approx(16200.0).epsilon(1e-12));
        CHECK(load.dropped == doctest::Approx(6300.0).epsilon(1e-12));
    }
    SUBCASE("small_first fills small BSs before the macro") {
        const LoadVector load =
            distribute_load(9000.0, first_on(10, 2), layout, DistributionPolicy::SmallFirst);
        CHECK(load.x_small[0] == doctest::Approx(4500.0));
        CHECK(load.x_small[1] == doctest::Approx(4500.0));
        CHECK(load.x_macro == doctest::Approx(0.0));
        const LoadVector heavy =
            distribute_load(40000.0, first_on(10, 2), layout, DistributionPolicy::SmallFirst);
        CHECK(heavy.x_small[0] == doctest::Approx(16200.0));
        CHECK(heavy.x_macro == doctest::Approx(7500.0));
        CHECK(heavy.dropped == doctest::Approx(40000.0 - 2 * 16200.0 - 7500.0));
    }
    SUBCASE("input errors") {
        CHECK_THROWS_AS(
            distribute_load(-1.0, first_on(10, 0), layout, DistributionPolicy::CapacityProportional),
            InputError);
        CHECK_THROWS_AS(
            distribute_load(1.0, first_on(4, 0), layout, DistributionPolicy::CapacityProportional),
            InputError);
    }
}

TEST_CASE("loading_rate") {
    CHECK(loading_rate(7500.0, 12.5, 600.0) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(loading_rate(8100.0, 27.0, 600.0) == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(loading_rate(0.0, 27.0, 600.0) == 0.0);
    // offered rates above 1 stay representable
    CHECK(loading_rate(15000.0, 12.5, 600.0) == doctest::Approx(2.0).epsilon(1e-12));
    CHECK_THROWS_AS(loading_rate(1.0, 0.0, 600.0), InputError);
    CHECK_THROWS_AS(loading_rate(-1.0, 12.5, 600.0), InputError);
}

TEST_CASE("macro and small BS energy, Table-I constants") {
    const CellLayout layout = CellLayout::defaults();
    CHECK(macro_energy(0.0, layout.macro, 600.0) == doctest::Approx(78000.0).epsilon(1e-12));
    CHECK(macro_energy(1.0, layout.macro, 600.0) == doctest::Approx(134400.0).epsilon(1e-12));
    CHECK(macro_energy(0.5, layout.macro, 600.0) == doctest::Approx(106200.0).epsilon(1e-12));
    CHECK(small_energy(1.0, false, layout.small_bs, 600.0) == 0.0);
    CHECK(small_energy(1.0, true, layout.small_bs, 600.0) == doctest::Approx(7680.0).epsilon(1e-12));
    CHECK(small_energy(0.0, true, layout.small_bs, 600.0) == doctest::Approx(2880.0).epsilon(1e-12));

    SUBCASE("affine in the loading rate, slope alpha*p_tx*t_r") {
        const double slope = layout.macro.alpha * layout.macro.p_tx_w * layout.t_r_s;
        CHECK(macro_energy(1.0, layout.macro, 600.0) - macro_energy(0.0, layout.macro, 600.0) ==
              slope);
        Rng rng(11);
        for (int i = 0; i < 100; ++i) {
            const double r1 = rng.uniform(0.0, 1.0);
            const double r2 = rng.uniform(0.0, 1.0);
            if (r1 == r2) continue;
            const double fd = (macro_energy(r2, layout.macro, 600.0) -
                               macro_energy(r1, layout.macro, 600.0)) /
                              (r2 - r1);
            CHECK(fd == doctest::Approx(slope).epsilon(1e-9));
        }
    }
}

TEST_CASE("cell totals compose the per-BS models") {
    const CellLayout layout = CellLayout::defaults();

    SUBCASE("macro only at full load") {
        LoadVector load;
        load.x_macro = 7500.0;
        load.x_small = Eigen::VectorXd::Zero(10);
        const CellSlotTotals totals = cell_energy_and_throughput(load, first_on(10, 0), layout);
        CHECK(totals.throughput_mb == doctest::Approx(7500.0).epsilon(1e-12));
        CHECK(totals.energy_j == doctest::Approx(134400.0).epsilon(1e-12));
    }
    SUBCASE("idle macro still burns p_cst") {
        LoadVector load;
        load.x_small = Eigen::VectorXd::Zero(10);
        const CellSlotTotals totals = cell_energy_and_throughput(load, first_on(10, 0), layout);
        CHECK(totals.throughput_mb == 0.0);
        CHECK(totals.energy_j == doctest::Approx(78000.0).epsilon(1e-12));
    }
    SUBCASE("proportional 9000 Mb split") {
        const LoadVector load =
            distribute_load(9000.0, first_on(10, 1), layout, DistributionPolicy::CapacityProportional);
        const CellSlotTotals totals = cell_energy_and_throughput(load, first_on(10, 1), layout);
        const double rho = 9000.0 / 23700.0;
        const double expected_energy =
            (130.0 + 4.7 * rho * 20.0) * 600.0 + (4.8 + 8.0 * rho * 1.0) * 600.0;
        CHECK(totals.throughput_mb == doctest::Approx(9000.0).epsilon(1e-12));
        CHECK(totals.energy_j == doctest::Approx(expected_energy).epsilon(1e-12));
    }
}

TEST_CASE("energy_efficiency") {
    CHECK(energy_efficiency(7500.0, 134400.0) == doctest::Approx(7500.0 / 134400.0).epsilon(1e-12));
    CHECK(energy_efficiency(0.0, 78000.0) == 0.0);
    CHECK_THROWS_AS(energy_efficiency(1.0, 0.0), InputError);
    CHECK_THROWS_AS(energy_efficiency(1.0, -5.0), InputError);

    SUBCASE("overall table-row identity holds to 3 significant figures") {
        const double ee = energy_efficiency(6362.15 * 1000.0, 86.37e6);
        CHECK(std::round(ee * 1e4) / 1e4 == doctest::Approx(0.0737));
    }
}

TEST_CASE("load distribution properties over random inputs") {
    const CellLayout layout = CellLayout::defaults();
    Rng rng(2024);

    for (int trial = 0; trial < 500; ++trial) {
        const double demand = rng.uniform(0.0, 250000.0);
        const ActiveFlags active = random_flags(10, rng);
        const DistributionPolicy policy = rng.uniform() < 0.5
                                              ? DistributionPolicy::CapacityProportional
                                              : DistributionPolicy::SmallFirst;
        const LoadVector load = distribute_load(demand, active, layout, policy);

        // mass conservation
        CHECK(load.x_macro + load.x_small.sum() + load.dropped ==
              doctest::Approx(demand).epsilon(1e-9));
        // capacity and sign constraints
        CHECK(load.x_macro >= 0.0);
        CHECK(load.x_macro <= 7500.0 * (1 + 1e-12));
        for (int k = 0; k < 10; ++k) {
            CHECK(load.x_small[k] >= 0.0);
            CHECK(load.x_small[k] <= 16200.0 * (1 + 1e-12));
            if (!active[k]) CHECK(load.x_small[k] == 0.0);
        }
        // served never exceeds demand
        CHECK(load.served() <= demand * (1 + 1e-12));

        if (policy == DistributionPolicy::CapacityProportional) {
            const double total_cap = 7500.0 + 16200.0 * active.count();
            if (demand <= total_cap) {
                const double rho_m = load.x_macro / 7500.0;
                for (int k = 0; k < 10; ++k) {
                    if (active[k]) {
                        CHECK(std::abs(load.x_small[k] / 16200.0 - rho_m) < 1e-12);
                    }
                }
            }
        }
    }
}

TEST_CASE("activating another small BS never hurts under the proportional policy") {
    const CellLayout layout = CellLayout::defaults();
    Rng rng(99);
    for (int trial = 0; trial < 200; ++trial) {
        const double demand = rng.uniform(0.0, 200000.0);
        const int on = static_cast<int>(rng.uniform_index(10));
        const LoadVector before = distribute_load(demand, first_on(10, on), layout,
                                                  DistributionPolicy::CapacityProportional);
        const LoadVector after = distribute_load(demand, first_on(10, on + 1), layout,
                                                 DistributionPolicy::CapacityProportional);
        CHECK(after.x_macro <= before.x_macro * (1 + 1e-12) + 1e-12);
        CHECK(after.dropped <= before.dropped * (1 + 1e-12) + 1e-12);
        for (int k = 0; k < on; ++k) {
            CHECK(after.x_small[k] <= before.x_small[k] * (1 + 1e-12) + 1e-12);
        }
    }
}
