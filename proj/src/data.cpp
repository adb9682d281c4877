#include "hetsim/data.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <limits>
#include <map>
#include <set>
#include <sstream>

#include "hetsim/cell.hpp"
#include "hetsim/rng.hpp"
#include "hetsim/text.hpp"

namespace hetsim {

TrafficParseResult parse_traffic_records(std::istream& in, const TrafficColumns& columns) {
    if (!in.good()) throw IoError("traffic stream is not readable");

    const int max_col = std::max({columns.grid, columns.timestamp, columns.activity});
    struct RawRow {
        long long grid;
        long long timestamp;
        double activity;
    };
    std::vector<RawRow> rows;
    std::size_t malformed = 0;
    std::size_t total = 0;
    char delimiter = columns.delimiter;

    std::string line;
    while (std::getline(in, line)) {
        if (trim(line).empty()) continue;
        ++total;
        if (delimiter == '\0') {
            delimiter = line.find('\t') != std::string::npos ? '\t' : ',';
        }
        const auto fields = split_fields(line, delimiter);
        if (static_cast<int>(fields.size()) <= max_col) {
            ++malformed;
            continue;
        }
        RawRow row{};
        const std::string_view activity_field = trim(fields[columns.activity]);
        if (!parse_long(fields[columns.grid], row.grid) ||
            !parse_long(fields[columns.timestamp], row.timestamp)) {
            ++malformed;
            continue;
        }
        if (activity_field.empty()) {
            row.activity = 0.0;  // absent measurement, not a malformed row
        } else if (!parse_double(activity_field, row.activity) || row.activity < 0.0 ||
                   !std::isfinite(row.activity)) {
            ++malformed;
            continue;
        }
        rows.push_back(row);
    }
    if (in.bad()) throw IoError("I/O failure while reading traffic stream");
    if (total > 0 && malformed * 2 > total) {
        throw DataError("more than half of the traffic rows are malformed (" +
                        std::to_string(malformed) + " of " + std::to_string(total) + ")");
    }

    TrafficParseResult result;
    result.malformed_rows = malformed;
    if (rows.empty()) return result;

    long long epoch = std::numeric_limits<long long>::max();
    for (const RawRow& row : rows) epoch = std::min(epoch, row.timestamp);
    result.epoch_ms = epoch;

    std::map<std::pair<long long, long long>, double> summed;
    for (const RawRow& row : rows) {
        const long long slot = (row.timestamp - epoch) / kSlotMs;
        summed[{row.grid, slot}] += row.activity;
    }
    result.records.reserve(summed.size());
    for (const auto& [key, activity] : summed) {
        result.records.push_back(GridTrafficRecord{key.first, key.second, activity});
    }
    return result;
}

std::vector<Coord> parse_cell_towers(std::istream& in, long long mcc, long long mnc,
                                     const TowerColumns& columns) {
    if (!in.good()) throw IoError("tower stream is not readable");
    const int max_col = std::max({columns.type, columns.mcc, columns.mnc, columns.lon, columns.lat});

    std::vector<Coord> coords;
    std::set<std::pair<long long, long long>> seen;  // 1e-6 degree cells
    std::string line;
    while (std::getline(in, line)) {
        if (trim(line).empty()) continue;
        const auto fields = split_fields(line, ',');
        if (static_cast<int>(fields.size()) <= max_col) continue;
        long long row_mcc = 0;
        long long row_mnc = 0;
        Coord c;
        if (!parse_long(fields[columns.mcc], row_mcc) || !parse_long(fields[columns.mnc], row_mnc) ||
            !parse_double(fields[columns.lon], c.lon) || !parse_double(fields[columns.lat], c.lat)) {
            continue;  // header or unparsable row
        }
        if (row_mcc != mcc || row_mnc != mnc) continue;
        const auto key = std::make_pair(static_cast<long long>(std::llround(c.lon * 1e6)),
                                        static_cast<long long>(std::llround(c.lat * 1e6)));
        if (!seen.insert(key).second) continue;
        coords.push_back(c);
    }
    if (in.bad()) throw IoError("I/O failure while reading tower stream");
    return coords;
}

int MacrocellMap::macrocell_of(long long grid_id) const {
    const auto it = assignment.find(grid_id);
    if (it == assignment.end()) {
        throw InputError("grid " + std::to_string(grid_id) + " is not mapped to a macrocell");
    }
    return it->second;
}

MacrocellMap assign_grids(const std::vector<Coord>& bs_coords,
                          const std::vector<GridCenter>& grid_centers) {
    if (bs_coords.empty()) throw InputError("at least one macro BS is required");
    if (grid_centers.empty()) throw InputError("at least one grid center is required");

    MacrocellMap map;
    map.bs_coords = bs_coords;
    map.grid_centers = grid_centers;
    for (const GridCenter& grid : grid_centers) {
        int best = 0;
        double best_d2 = std::numeric_limits<double>::infinity();
        for (std::size_t b = 0; b < bs_coords.size(); ++b) {
            const double dx = bs_coords[b].lon - grid.center.lon;
            const double dy = bs_coords[b].lat - grid.center.lat;
            const double d2 = dx * dx + dy * dy;
            if (d2 < best_d2) {  // strict keeps the lowest index on ties
                best_d2 = d2;
                best = static_cast<int>(b);
            }
        }
        map.assignment[grid.id] = best;
    }
    return map;
}

std::vector<GridCenter> synthetic_grid_centers(const std::vector<long long>& grid_ids) {
    std::vector<long long> ids = grid_ids;
    std::sort(ids.begin(), ids.end());
    ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
    const int side = static_cast<int>(std::ceil(std::sqrt(static_cast<double>(ids.size()))));
    std::vector<GridCenter> centers;
    centers.reserve(ids.size());
    for (std::size_t i = 0; i < ids.size(); ++i) {
        const int row = static_cast<int>(i) / side;
        const int col = static_cast<int>(i) % side;
        centers.push_back(GridCenter{ids[i], Coord{col + 0.5, row + 0.5}});
    }
    return centers;
}

std::vector<Coord> synthetic_bs_coords(int n_bs, const std::vector<GridCenter>& centers,
                                       std::uint64_t seed) {
    if (n_bs <= 0) throw InputError("n_bs must be > 0");
    if (centers.empty()) throw InputError("grid centers required for BS placement");
    double lo_x = centers.front().center.lon, hi_x = lo_x;
    double lo_y = centers.front().center.lat, hi_y = lo_y;
    for (const GridCenter& g : centers) {
        lo_x = std::min(lo_x, g.center.lon);
        hi_x = std::max(hi_x, g.center.lon);
        lo_y = std::min(lo_y, g.center.lat);
        hi_y = std::max(hi_y, g.center.lat);
    }
    Rng rng(seed);
    std::vector<Coord> coords;
    coords.reserve(n_bs);
    for (int i = 0; i < n_bs; ++i) {
        coords.push_back(Coord{rng.uniform(lo_x, hi_x), rng.uniform(lo_y, hi_y)});
    }
    return coords;
}

DemandSeries aggregate_demand(const std::vector<GridTrafficRecord>& records,
                              const MacrocellMap& map, double data_size_mb) {
    if (data_size_mb <= 0.0) throw InputError("data_size_mb must be > 0");
    long long max_slot = -1;
    for (const GridTrafficRecord& r : records) max_slot = std::max(max_slot, r.slot);

    DemandSeries series;
    series.data_size_mb = data_size_mb;
    series.demand_mb = Eigen::MatrixXd::Zero(map.n_macrocells(), max_slot + 1);
    for (const GridTrafficRecord& r : records) {
        if (r.slot < 0) throw InputError("negative slot index in traffic records");
        series.demand_mb(map.macrocell_of(r.grid_id), r.slot) += r.activity * data_size_mb;
    }
    return series;
}

SplitSeries train_test_split(const DemandSeries& series, double ratio) {
    if (!(ratio > 0.0 && ratio < 1.0)) throw InputError("split ratio must be in (0, 1)");
    const Eigen::Index len = series.n_slots();
    if (len < 2) throw InputError("series must hold at least 2 slots to split");
    const Eigen::Index n_train = static_cast<Eigen::Index>(
        std::floor(ratio * static_cast<double>(len)));

    SplitSeries split;
    split.train = series;
    split.test = series;
    split.train.demand_mb = series.demand_mb.leftCols(n_train);
    split.test.demand_mb = series.demand_mb.rightCols(len - n_train);
    split.test.start_slot = series.start_slot + n_train;
    return split;
}

DemandSeries synth_traffic(const SynthParams& params) {
    if (params.n_macrocells <= 0 || params.n_days <= 0) {
        throw InputError("n_macrocells and n_days must be > 0");
    }
    if (params.base_mb < 0.0 || params.amplitude_mb < 0.0 || params.noise_std_mb < 0.0) {
        throw InputError("synth magnitudes must be >= 0");
    }
    if (params.overload_fraction < 0.0 || params.overload_fraction > 1.0) {
        throw InputError("overload_fraction must be in [0, 1]");
    }

    const double macro_cap = CellLayout::defaults().macro_capacity_mb();
    const Eigen::Index n_slots =
        static_cast<Eigen::Index>(params.n_days) * kSlotsPerDay;
    const int n_overloaded = static_cast<int>(
        std::ceil(params.overload_fraction * params.n_macrocells));

    Rng rng(params.seed);
    DemandSeries series;
    series.demand_mb = Eigen::MatrixXd::Zero(params.n_macrocells, n_slots);
    for (int c = 0; c < params.n_macrocells; ++c) {
        const double phase = rng.uniform(0.0, 2.0 * M_PI);
        // Drawn for every cell so the stream layout does not depend on the
        // overload fraction.
        const double peak_rate_target = rng.uniform(2.2, 4.4);
        double scale = 1.0;
        if (c < n_overloaded && params.base_mb + params.amplitude_mb > 0.0) {
            scale = peak_rate_target * macro_cap / (params.base_mb + params.amplitude_mb);
        }
        for (Eigen::Index n = 0; n < n_slots; ++n) {
            const double diurnal =
                params.base_mb +
                params.amplitude_mb *
                    std::sin(2.0 * M_PI * static_cast<double>(n) / kSlotsPerDay + phase);
            const double noise =
                params.noise_std_mb > 0.0 ? rng.normal(0.0, params.noise_std_mb) : 0.0;
            series.demand_mb(c, n) = std::max(0.0, scale * diurnal + noise);
        }
    }
    return series;
}

void save_demand_csv(const DemandSeries& series, std::ostream& out) {
    out << "macrocell,slot,demand_mb\n";
    for (Eigen::Index c = 0; c < series.n_macrocells(); ++c) {
        for (Eigen::Index n = 0; n < series.n_slots(); ++n) {
            out << c << ',' << n << ',' << format_double(series.demand_mb(c, n)) << '\n';
        }
    }
}

void save_demand_csv(const DemandSeries& series, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open for writing: " + path);
    save_demand_csv(series, out);
    if (!out.good()) throw IoError("write failed: " + path);
}

DemandSeries load_demand_csv(std::istream& in) {
    if (!in.good()) throw IoError("demand stream is not readable");
    std::string line;
    if (!std::getline(in, line) || trim(line) != "macrocell,slot,demand_mb") {
        throw DataError("demand CSV must start with header macrocell,slot,demand_mb");
    }
    struct Entry {
        long long cell;
        long long slot;
        double demand;
    };
    std::vector<Entry> entries;
    long long max_cell = -1;
    long long max_slot = -1;
    while (std::getline(in, line)) {
        if (trim(line).empty()) continue;
        const auto fields = split_fields(line, ',');
        Entry e{};
        if (fields.size() != 3 || !parse_long(fields[0], e.cell) || !parse_long(fields[1], e.slot) ||
            !parse_double(fields[2], e.demand)) {
            throw DataError("malformed demand CSV row: " + line);
        }
        if (e.cell < 0 || e.slot < 0) throw DataError("negative index in demand CSV");
        max_cell = std::max(max_cell, e.cell);
        max_slot = std::max(max_slot, e.slot);
        entries.push_back(e);
    }
    if (entries.empty()) throw DataError("demand CSV holds no rows");

    DemandSeries series;
    series.demand_mb = Eigen::MatrixXd::Zero(max_cell + 1, max_slot + 1);
    for (const Entry& e : entries) series.demand_mb(e.cell, e.slot) = e.demand;
    return series;
}

DemandSeries load_demand_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open for reading: " + path);
    return load_demand_csv(in);
}

}  // namespace hetsim
