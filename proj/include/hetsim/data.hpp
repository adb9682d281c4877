#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <unordered_map>
#include <vector>

#include "hetsim/errors.hpp"

namespace hetsim {

// One aggregated grid-traffic sample: activity counts per 10-minute slot.
struct GridTrafficRecord {
    long long grid_id = 0;
    long long slot = 0;
    double activity = 0.0;
};

struct TrafficColumns {
    int grid = 0;
    int timestamp = 1;
    int activity = 7;  // internet-activity column of the source layout
    // '\0' sniffs tab vs comma from the first data line.
    char delimiter = '\0';
};

struct TrafficParseResult {
    std::vector<GridTrafficRecord> records;  // sorted by (grid, slot)
    std::size_t malformed_rows = 0;
    long long epoch_ms = 0;  // minimum timestamp seen; slot 0 starts here
};

inline constexpr long long kSlotMs = 600000;  // 10-minute recording interval

// Sums activity per (grid, slot); slot indices are relative to the earliest
// timestamp in the stream. Throws IoError on an unreadable stream and
// DataError when more than half of the non-empty rows are malformed.
TrafficParseResult parse_traffic_records(std::istream& in, const TrafficColumns& columns = {});

struct Coord {
    double lon = 0.0;
    double lat = 0.0;
};

struct TowerColumns {
    int type = 0;
    int mcc = 1;
    int mnc = 2;
    int lon = 6;
    int lat = 7;
};

// Keeps towers matching both mcc and mnc, deduplicated within 1e-6 degrees.
std::vector<Coord> parse_cell_towers(std::istream& in, long long mcc, long long mnc,
                                     const TowerColumns& columns = {});

struct GridCenter {
    long long id = 0;
    Coord center;
};

struct MacrocellMap {
    std::vector<Coord> bs_coords;
    std::vector<GridCenter> grid_centers;
    std::unordered_map<long long, int> assignment;  // grid id -> macrocell index

    int macrocell_of(long long grid_id) const;
    int n_macrocells() const { return static_cast<int>(bs_coords.size()); }
};

// Nearest macro BS by Euclidean distance in coordinate space; ties go to the
// lowest BS index.
MacrocellMap assign_grids(const std::vector<Coord>& bs_coords,
                          const std::vector<GridCenter>& grid_centers);

// Unit-spaced row-major centers for grids that come without geometry,
// mirroring a square downtown sub-area.
std::vector<GridCenter> synthetic_grid_centers(const std::vector<long long>& grid_ids);

// Seeded uniform BS placement over the grid bounding box.
std::vector<Coord> synthetic_bs_coords(int n_bs, const std::vector<GridCenter>& centers,
                                       std::uint64_t seed);

// Per-macrocell traffic demand in megabits per recording slot.
struct DemandSeries {
    Eigen::MatrixXd demand_mb;  // one row per macrocell, one column per slot
    double t_r_s = 600.0;
    double data_size_mb = 15.0;
    // Offset of column 0 within the original recording, so slot-of-day
    // features survive a chronological split.
    Eigen::Index start_slot = 0;

    Eigen::Index n_macrocells() const { return demand_mb.rows(); }
    Eigen::Index n_slots() const { return demand_mb.cols(); }
};

inline constexpr int kSlotsPerDay = 144;

// Eq.-(21)-style aggregation: per-slot activity summed over a macrocell's
// grids, converted at data_size_mb megabits per activity.
DemandSeries aggregate_demand(const std::vector<GridTrafficRecord>& records,
                              const MacrocellMap& map, double data_size_mb);

struct SplitSeries {
    DemandSeries train;
    DemandSeries test;
};

// Chronological split; the first floor(ratio * len) slots train.
SplitSeries train_test_split(const DemandSeries& series, double ratio);

struct SynthParams {
    std::uint64_t seed = 1;
    int n_macrocells = 24;
    int n_days = 31;
    double base_mb = 5000.0;
    double amplitude_mb = 2200.0;
    double noise_std_mb = 350.0;
    double overload_fraction = 0.4;
};

// Diurnal sinusoid plus Gaussian noise, clipped at zero. The first
// ceil(overload_fraction * n_macrocells) cells are scaled so their peak
// demand rate against the default macro capacity lands above 2.
DemandSeries synth_traffic(const SynthParams& params);

// Demand series persistence: header `macrocell,slot,demand_mb`.
void save_demand_csv(const DemandSeries& series, std::ostream& out);
void save_demand_csv(const DemandSeries& series, const std::string& path);
DemandSeries load_demand_csv(std::istream& in);
DemandSeries load_demand_csv(const std::string& path);

}  // namespace hetsim
