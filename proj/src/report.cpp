#include "hetsim/report.hpp"

#include <filesystem>
#include <fstream>

#include <json.hpp>

#include "hetsim/text.hpp"

namespace hetsim {

using nlohmann::json;

void GroupMetrics::absorb(const GroupMetrics& other) {
    n_macrocells += other.n_macrocells;
    n_decisions += other.n_decisions;
    transmitted_mb += other.transmitted_mb;
    energy_j += other.energy_j;
    dropped_mb += other.dropped_mb;
    active_smalls_sum += other.active_smalls_sum;
    failed_decisions += other.failed_decisions;
    for (int i = 0; i < kRhoHistogramBins; ++i) rho_histogram[i] += other.rho_histogram[i];
}

const SchemeReport* Report::find(const std::string& scheme) const {
    for (const SchemeReport& s : schemes) {
        if (s.scheme == scheme) return &s;
    }
    return nullptr;
}

namespace {

json metrics_to_json(const GroupMetrics& m) {
    return json{{"n_macrocells", m.n_macrocells},
                {"n_decisions", m.n_decisions},
                {"transmitted_mb", m.transmitted_mb},
                {"energy_j", m.energy_j},
                {"dropped_mb", m.dropped_mb},
                {"active_smalls_sum", m.active_smalls_sum},
                {"failed_decisions", m.failed_decisions},
                {"rho_histogram", m.rho_histogram}};
}

GroupMetrics metrics_from_json(const json& j) {
    GroupMetrics m;
    m.n_macrocells = j.at("n_macrocells").get<long>();
    m.n_decisions = j.at("n_decisions").get<long>();
    m.transmitted_mb = j.at("transmitted_mb").get<double>();
    m.energy_j = j.at("energy_j").get<double>();
    m.dropped_mb = j.at("dropped_mb").get<double>();
    m.active_smalls_sum = j.at("active_smalls_sum").get<double>();
    m.failed_decisions = j.at("failed_decisions").get<long>();
    m.rho_histogram = j.at("rho_histogram").get<std::vector<long>>();
    if (m.rho_histogram.size() != kRhoHistogramBins) {
        throw DataError("report histogram has unexpected bin count");
    }
    return m;
}

}  // namespace

std::string report_to_json(const Report& report) {
    json j;
    j["schema_version"] = report.schema_version;
    j["seed"] = report.seed;
    j["config"] = report.config_text;
    j["cell_groups"] = report.cell_groups;
    j["cell_demand_rates"] = report.cell_demand_rates;
    json schemes = json::array();
    for (const SchemeReport& s : report.schemes) {
        json js;
        js["scheme"] = s.scheme;
        js["forecaster"] = s.forecaster;
        js["overall"] = metrics_to_json(s.overall);
        json groups = json::array();
        for (const GroupMetrics& g : s.groups) groups.push_back(metrics_to_json(g));
        js["groups"] = groups;
        schemes.push_back(js);
    }
    j["schemes"] = schemes;
    return j.dump(2) + "\n";
}

Report report_from_json(const std::string& json_text) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::exception& e) {
        throw DataError(std::string("report JSON does not parse: ") + e.what());
    }
    Report report;
    report.schema_version = j.at("schema_version").get<int>();
    if (report.schema_version != kReportSchemaVersion) {
        throw DataError("unsupported report schema version " +
                        std::to_string(report.schema_version));
    }
    report.seed = j.at("seed").get<std::uint64_t>();
    report.config_text = j.at("config").get<std::string>();
    report.cell_groups = j.at("cell_groups").get<std::vector<int>>();
    report.cell_demand_rates = j.at("cell_demand_rates").get<std::vector<double>>();
    for (const json& js : j.at("schemes")) {
        SchemeReport s;
        s.scheme = js.at("scheme").get<std::string>();
        s.forecaster = js.at("forecaster").get<std::string>();
        s.overall = metrics_from_json(js.at("overall"));
        const json& groups = js.at("groups");
        if (groups.size() != s.groups.size()) throw DataError("report group count mismatch");
        for (std::size_t g = 0; g < s.groups.size(); ++g) {
            s.groups[g] = metrics_from_json(groups[g]);
        }
        report.schemes.push_back(std::move(s));
    }
    return report;
}

namespace {

constexpr const char* kGroupLabels[5] = {"0-0.3", "0.3-0.7", "0.7-1", "1-2", ">2"};

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open for writing: " + path);
    out << content;
    if (!out.good()) throw IoError("write failed: " + path);
}

void append_metric_row(std::string& csv, const GroupMetrics& m) {
    csv += format_fixed(m.transmitted_mb / 1000.0, 2);  // Gb, table style
    csv += ',';
    csv += format_fixed(m.energy_j / 1e6, 2);  // megajoules
    csv += ',';
    csv += format_double(m.energy_j);
    csv += ',';
    csv += format_fixed(m.energy_efficiency(), 4);
    csv += ',';
    csv += format_fixed(m.mean_active_smalls(), 2);
    csv += ',';
    csv += format_fixed(m.failure_fraction(), 4);
    csv += ',';
    csv += format_fixed(m.dropped_mb / 1000.0, 2);
    csv += '\n';
}

}  // namespace

void emit_report(const Report& report, const std::string& out_dir) {
    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    if (ec) throw IoError("cannot create output directory " + out_dir + ": " + ec.message());
    const auto path = [&](const char* name) {
        return (std::filesystem::path(out_dir) / name).string();
    };

    write_file(path("report.json"), report_to_json(report));

    std::string overall =
        "scheme,data_transmitted_gb,energy_mj,energy_j,energy_efficiency_mb_per_j,"
        "mean_active_smalls,failure_fraction,dropped_gb\n";
    for (const SchemeReport& s : report.schemes) {
        overall += s.scheme + ',';
        append_metric_row(overall, s.overall);
    }
    write_file(path("overall.csv"), overall);

    std::string groups =
        "scheme,group,demand_rate_range,n_macrocells,n_decisions,data_transmitted_gb,"
        "energy_mj,energy_j,energy_efficiency_mb_per_j,mean_active_smalls,"
        "failure_fraction,dropped_gb\n";
    for (const SchemeReport& s : report.schemes) {
        for (std::size_t g = 0; g < s.groups.size(); ++g) {
            groups += s.scheme + ',' + std::to_string(g) + ',' + kGroupLabels[g] + ',' +
                      std::to_string(s.groups[g].n_macrocells) + ',' +
                      std::to_string(s.groups[g].n_decisions) + ',';
            append_metric_row(groups, s.groups[g]);
        }
    }
    write_file(path("groups.csv"), groups);

    std::string cdf = "scheme,group,rho_upper,cum_fraction\n";
    for (const SchemeReport& s : report.schemes) {
        for (std::size_t g = 0; g < s.groups.size(); ++g) {
            const GroupMetrics& m = s.groups[g];
            if (m.n_decisions == 0) continue;
            long cum = 0;
            for (int b = 0; b < kRhoHistogramBins; ++b) {
                cum += m.rho_histogram[b];
                cdf += s.scheme + ',' + std::to_string(g) + ',' +
                       format_fixed((b + 1) * kRhoHistogramStep, 2) + ',' +
                       format_double(static_cast<double>(cum) /
                                     static_cast<double>(m.n_decisions)) +
                       '\n';
            }
        }
    }
    write_file(path("loading_cdf.csv"), cdf);

    write_file(path("config.txt"), report.config_text);
}

Report load_report(const std::string& json_path) {
    std::ifstream in(json_path, std::ios::binary);
    if (!in) throw IoError("cannot open report: " + json_path);
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return report_from_json(text);
}

}  // namespace hetsim
