#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "hetsim/config.hpp"
#include "hetsim/data.hpp"
#include "hetsim/harness.hpp"
#include "hetsim/report.hpp"
#include "hetsim/text.hpp"

namespace {

namespace fs = std::filesystem;
using namespace hetsim;

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitData = 3;
constexpr int kExitTraining = 4;

struct CommonOptions {
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> scheme;
    std::optional<std::string> forecaster;
    std::optional<std::string> demand;
};

ExperimentConfig resolve_config(const CommonOptions& options) {
    ExperimentConfig config;
    if (!options.config_path.empty()) config = ExperimentConfig::from_file(options.config_path);
    if (options.seed) config.seed = *options.seed;
    if (options.scheme) config.scheme = *options.scheme;
    if (options.forecaster) config.forecaster = *options.forecaster;
    if (options.demand) config.demand_csv = *options.demand;
    config.validate();
    return config;
}

void add_common(CLI::App* cmd, CommonOptions& options, bool with_demand = true) {
    cmd->add_option("--config", options.config_path, "key = value config file");
    cmd->add_option("--seed", options.seed, "override the config seed");
    cmd->add_option("--scheme", options.scheme, "macro|static|ql|dqn|dqn-f");
    cmd->add_option("--forecaster", options.forecaster,
                    "oracle|persistence|seasonal|regressor");
    if (with_demand) {
        cmd->add_option("--demand", options.demand, "demand series CSV (macrocell,slot,demand_mb)");
    }
}

void ensure_dir(const std::string& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw IoError("cannot create directory " + dir + ": " + ec.message());
}

int run_ingest(const std::string& traffic_path, const std::string& towers_path, long long mcc,
               long long mnc, const std::string& centers_path, int n_bs, std::uint64_t bs_seed,
               double data_size_mb, const TrafficColumns& traffic_columns,
               const TowerColumns& tower_columns, const std::string& out_dir) {
    std::ifstream traffic_in(traffic_path, std::ios::binary);
    if (!traffic_in) throw IoError("cannot open traffic file: " + traffic_path);
    const TrafficParseResult parsed = parse_traffic_records(traffic_in, traffic_columns);
    if (parsed.records.empty()) throw DataError("no usable traffic rows in " + traffic_path);

    std::vector<long long> grid_ids;
    for (const GridTrafficRecord& r : parsed.records) grid_ids.push_back(r.grid_id);

    std::vector<GridCenter> centers;
    if (!centers_path.empty()) {
        std::ifstream centers_in(centers_path);
        if (!centers_in) throw IoError("cannot open grid centers file: " + centers_path);
        std::string line;
        while (std::getline(centers_in, line)) {
            if (trim(line).empty()) continue;
            const auto fields = split_fields(line, ',');
            GridCenter g;
            if (fields.size() < 3 || !parse_long(fields[0], g.id) ||
                !parse_double(fields[1], g.center.lon) || !parse_double(fields[2], g.center.lat)) {
                continue;  // header
            }
            centers.push_back(g);
        }
        if (centers.empty()) throw DataError("no usable rows in grid centers file");
    } else {
        centers = synthetic_grid_centers(grid_ids);
    }

    std::vector<Coord> bs_coords;
    if (!towers_path.empty()) {
        std::ifstream towers_in(towers_path);
        if (!towers_in) throw IoError("cannot open towers file: " + towers_path);
        bs_coords = parse_cell_towers(towers_in, mcc, mnc, tower_columns);
        if (bs_coords.empty()) {
            std::cerr << "warning: no towers matched mcc=" << mcc << " mnc=" << mnc
                      << "; falling back to " << n_bs << " synthetic BS positions\n";
        }
    }
    if (bs_coords.empty()) bs_coords = synthetic_bs_coords(n_bs, centers, bs_seed);

    const MacrocellMap map = assign_grids(bs_coords, centers);
    const DemandSeries series = aggregate_demand(parsed.records, map, data_size_mb);

    ensure_dir(out_dir);
    save_demand_csv(series, (fs::path(out_dir) / "demand.csv").string());

    std::ofstream summary((fs::path(out_dir) / "ingest_summary.txt").string(), std::ios::binary);
    summary << "traffic_file = " << traffic_path << '\n'
            << "malformed_rows = " << parsed.malformed_rows << '\n'
            << "epoch_ms = " << parsed.epoch_ms << '\n'
            << "grids = " << centers.size() << '\n'
            << "macrocells = " << map.n_macrocells() << '\n'
            << "slots = " << series.n_slots() << '\n'
            << "data_size_mb = " << format_double(data_size_mb) << '\n';
    std::cout << "wrote " << (fs::path(out_dir) / "demand.csv").string() << " ("
              << series.n_macrocells() << " macrocells x " << series.n_slots() << " slots, "
              << parsed.malformed_rows << " malformed rows skipped)\n";
    return kExitOk;
}

int run_synth(const ExperimentConfig& config, const std::string& out_dir) {
    const DemandSeries series = load_or_synth_demand(config);
    ensure_dir(out_dir);
    save_demand_csv(series, (fs::path(out_dir) / "demand.csv").string());
    std::ofstream cfg((fs::path(out_dir) / "config.txt").string(), std::ios::binary);
    cfg << config.to_text();
    std::cout << "wrote " << (fs::path(out_dir) / "demand.csv").string() << " ("
              << series.n_macrocells() << " macrocells x " << series.n_slots() << " slots)\n";
    return kExitOk;
}

int run_train(const ExperimentConfig& config, const std::string& out_dir) {
    const DemandSeries series = load_or_synth_demand(config);
    const TrainingOutput output = run_training(config, series);
    save_checkpoint(config, output, out_dir);
    std::cout << "trained scheme=" << config.scheme;
    if (config.scheme_enum() == Scheme::DQNF) std::cout << " forecaster=" << config.forecaster;
    std::cout << " steps=" << output.steps << " -> " << out_dir << '\n';
    for (const TrainingLogEntry& entry : output.log) {
        std::cout << "  epoch " << entry.epoch << ": mean_loss=" << format_double(entry.mean_loss)
                  << " mean_reward=" << format_double(entry.mean_reward) << '\n';
    }
    return kExitOk;
}

int run_eval(const ExperimentConfig& config, const std::string& checkpoint_dir,
             const std::string& out_dir) {
    const DemandSeries series = load_or_synth_demand(config);
    const SplitSeries split = train_test_split(series, config.train_ratio);
    const TrainedPolicy policy = load_checkpoint(config, checkpoint_dir);
    const Report report = run_evaluation(config, {&policy}, split.test);
    emit_report(report, out_dir);
    const SchemeReport& s = report.schemes.front();
    std::cout << "scheme=" << s.scheme << " transmitted_gb="
              << format_fixed(s.overall.transmitted_mb / 1000.0, 2)
              << " energy_mj=" << format_fixed(s.overall.energy_j / 1e6, 2)
              << " ee=" << format_fixed(s.overall.energy_efficiency(), 4)
              << " failure=" << format_fixed(s.overall.failure_fraction(), 4) << '\n';
    std::cout << "report files in " << out_dir << '\n';
    return kExitOk;
}

int run_report(const std::vector<std::string>& inputs, const std::string& out_dir) {
    if (inputs.empty()) throw ConfigError("report needs at least one --in report.json");
    Report merged = load_report(inputs.front());
    for (std::size_t i = 1; i < inputs.size(); ++i) {
        const Report next = load_report(inputs[i]);
        if (next.cell_groups != merged.cell_groups) {
            throw DataError("reports to merge were produced on different demand groupings");
        }
        for (const SchemeReport& s : next.schemes) {
            if (merged.find(s.scheme)) {
                throw DataError("duplicate scheme in merged reports: " + s.scheme);
            }
            merged.schemes.push_back(s);
        }
    }
    emit_report(merged, out_dir);
    std::cout << "merged " << inputs.size() << " report(s) into " << out_dir << '\n';
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"HetNet small-BS offloading simulator and RL harness"};
    app.require_subcommand(1);

    // ingest
    auto* ingest = app.add_subcommand("ingest", "traffic/tower files -> demand series CSV");
    std::string traffic_path, towers_path, centers_path, ingest_out;
    long long mcc = 0, mnc = 0;
    int n_bs = 20;
    std::uint64_t bs_seed = 1;
    double data_size_mb = 15.0;
    TrafficColumns traffic_columns;
    TowerColumns tower_columns;
    std::string delimiter = "auto";
    ingest->add_option("--traffic", traffic_path, "delimited grid-traffic file")->required();
    ingest->add_option("--towers", towers_path, "tower CSV (OpenCellID layout)");
    ingest->add_option("--mcc", mcc, "mobile country code filter (required with --towers)");
    ingest->add_option("--mnc", mnc, "mobile network code filter (required with --towers)");
    ingest->add_option("--grid-centers", centers_path, "grid centers CSV: id,lon,lat");
    ingest->add_option("--n-bs", n_bs, "synthetic BS count when no towers file is given");
    ingest->add_option("--bs-seed", bs_seed, "seed for synthetic BS placement");
    ingest->add_option("--data-size", data_size_mb, "megabits per activity");
    ingest->add_option("--col-grid", traffic_columns.grid, "traffic column: grid id");
    ingest->add_option("--col-timestamp", traffic_columns.timestamp,
                       "traffic column: epoch-ms timestamp");
    ingest->add_option("--col-activity", traffic_columns.activity, "traffic column: activity");
    ingest->add_option("--delimiter", delimiter, "traffic delimiter: auto|tab|comma");
    ingest->add_option("--tower-col-mcc", tower_columns.mcc, "tower column: mcc");
    ingest->add_option("--tower-col-mnc", tower_columns.mnc, "tower column: mnc");
    ingest->add_option("--tower-col-lon", tower_columns.lon, "tower column: longitude");
    ingest->add_option("--tower-col-lat", tower_columns.lat, "tower column: latitude");
    ingest->add_option("--out", ingest_out, "output directory")->required();

    // synth
    auto* synth = app.add_subcommand("synth", "generate a synthetic demand series");
    CommonOptions synth_options;
    std::string synth_out;
    std::optional<int> synth_cells, synth_days;
    std::optional<double> synth_base, synth_amplitude, synth_noise, synth_overload;
    std::optional<std::uint64_t> synth_seed;
    add_common(synth, synth_options, false);
    synth->add_option("--cells", synth_cells, "number of macrocells");
    synth->add_option("--days", synth_days, "number of days (144 slots each)");
    synth->add_option("--base", synth_base, "base demand, megabits per slot");
    synth->add_option("--amplitude", synth_amplitude, "diurnal amplitude, megabits");
    synth->add_option("--noise", synth_noise, "Gaussian noise stddev, megabits");
    synth->add_option("--overload-fraction", synth_overload,
                      "fraction of macrocells scaled past demand rate 2");
    synth->add_option("--synth-seed", synth_seed, "seed for the synthetic workload");
    synth->add_option("--out", synth_out, "output directory")->required();

    // train
    auto* train = app.add_subcommand("train", "train a control scheme, write a checkpoint");
    CommonOptions train_options;
    std::string train_out;
    add_common(train, train_options);
    train->add_option("--out", train_out, "checkpoint directory")->required();

    // eval
    auto* eval = app.add_subcommand("eval", "greedy evaluation of a checkpoint on the test split");
    CommonOptions eval_options;
    std::string eval_checkpoint, eval_out;
    add_common(eval, eval_options);
    eval->add_option("--checkpoint", eval_checkpoint, "checkpoint directory")->required();
    eval->add_option("--out", eval_out, "report directory")->required();

    // report
    auto* report = app.add_subcommand("report", "re-emit / merge report JSON files");
    std::vector<std::string> report_inputs;
    std::string report_out;
    report->add_option("--in", report_inputs, "report.json files to merge")->required();
    report->add_option("--out", report_out, "output directory")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitConfig;
    }

    try {
        if (ingest->parsed()) {
            if (!towers_path.empty() && (ingest->count("--mcc") == 0 || ingest->count("--mnc") == 0)) {
                throw ConfigError("--mcc and --mnc are required when --towers is given");
            }
            if (delimiter == "tab") traffic_columns.delimiter = '\t';
            else if (delimiter == "comma") traffic_columns.delimiter = ',';
            else if (delimiter != "auto") throw ConfigError("--delimiter must be auto|tab|comma");
            return run_ingest(traffic_path, towers_path, mcc, mnc, centers_path, n_bs, bs_seed,
                              data_size_mb, traffic_columns, tower_columns, ingest_out);
        }
        if (synth->parsed()) {
            ExperimentConfig config = resolve_config(synth_options);
            if (synth_cells) config.synth_macrocells = *synth_cells;
            if (synth_days) config.synth_days = *synth_days;
            if (synth_base) config.synth_base_mb = *synth_base;
            if (synth_amplitude) config.synth_amplitude_mb = *synth_amplitude;
            if (synth_noise) config.synth_noise_std_mb = *synth_noise;
            if (synth_overload) config.synth_overload_fraction = *synth_overload;
            if (synth_seed) config.synth_seed = *synth_seed;
            config.demand_csv.clear();
            config.validate();
            return run_synth(config, synth_out);
        }
        if (train->parsed()) return run_train(resolve_config(train_options), train_out);
        if (eval->parsed()) return run_eval(resolve_config(eval_options), eval_checkpoint, eval_out);
        if (report->parsed()) return run_report(report_inputs, report_out);
        throw ConfigError("no subcommand given");
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const TrainingError& e) {
        std::cerr << "training error: " << e.what() << '\n';
        return kExitTraining;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitData;
    }
}
