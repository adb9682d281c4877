#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "hetsim/errors.hpp"

namespace hetsim {

inline constexpr int kReportSchemaVersion = 1;
// Loading-rate CDF resolution 0.01 over [0, 4); the last bin collects >= 4.
inline constexpr int kRhoHistogramBins = 401;
inline constexpr double kRhoHistogramStep = 0.01;

// Accumulated evaluation results for one demand group (or the whole run).
// Sums are stored; means and rates are derived so serialization stays exact.
struct GroupMetrics {
    long n_macrocells = 0;
    long n_decisions = 0;
    double transmitted_mb = 0.0;
    double energy_j = 0.0;
    double dropped_mb = 0.0;
    double active_smalls_sum = 0.0;
    long failed_decisions = 0;  // offered macro loading rate above 1
    std::vector<long> rho_histogram = std::vector<long>(kRhoHistogramBins, 0);

    double energy_efficiency() const { return energy_j > 0.0 ? transmitted_mb / energy_j : 0.0; }
    double mean_active_smalls() const {
        return n_decisions > 0 ? active_smalls_sum / static_cast<double>(n_decisions) : 0.0;
    }
    double failure_fraction() const {
        return n_decisions > 0 ? static_cast<double>(failed_decisions) /
                                     static_cast<double>(n_decisions)
                               : 0.0;
    }

    void absorb(const GroupMetrics& other);
    bool operator==(const GroupMetrics&) const = default;
};

struct SchemeReport {
    std::string scheme;
    std::string forecaster;  // empty unless the scheme consumes forecasts
    GroupMetrics overall;
    std::array<GroupMetrics, 5> groups;

    bool operator==(const SchemeReport&) const = default;
};

struct Report {
    int schema_version = kReportSchemaVersion;
    std::uint64_t seed = 0;
    std::string config_text;          // full resolved config, provenance
    std::vector<int> cell_groups;     // macrocell -> demand group
    std::vector<double> cell_demand_rates;
    std::vector<SchemeReport> schemes;

    const SchemeReport* find(const std::string& scheme) const;
    bool operator==(const Report&) const = default;
};

std::string report_to_json(const Report& report);
Report report_from_json(const std::string& json_text);

// report.json plus flat CSVs (overall, per-group, loading-rate CDFs).
void emit_report(const Report& report, const std::string& out_dir);
Report load_report(const std::string& json_path);

}  // namespace hetsim
