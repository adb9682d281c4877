#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "hetsim/harness.hpp"

using namespace hetsim;

namespace {

// Small, fast experiment setup shared by the harness tests.
ExperimentConfig small_config() {
    ExperimentConfig config;
    config.synth_macrocells = 4;
    config.synth_days = 3;
    config.synth_base_mb = 5000.0;
    config.synth_amplitude_mb = 2500.0;
    config.synth_noise_std_mb = 300.0;
    config.synth_overload_fraction = 0.5;
    config.dqn_hidden = {16, 16};
    config.dqn_epochs = 2;
    config.ql_epochs = 2;
    config.regressor_hidden = {16, 16};
    config.regressor_epochs = 4;
    // keep plain SGD well-conditioned at this scale
    config.beta = 0.1;
    config.gamma = 0.001;
    config.seed = 5;
    return config;
}

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in.good());
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

}  // namespace

TEST_CASE("config round-trips through its text form") {
    ExperimentConfig config = small_config();
    config.scheme = "ql";
    config.demand_csv = "somewhere.csv";
    const std::string text = config.to_text();
    const ExperimentConfig restored = ExperimentConfig::from_text(text);
    CHECK(restored.to_text() == text);
    CHECK(restored.synth_macrocells == 4);
    CHECK(restored.scheme == "ql");
    CHECK(restored.demand_csv == "somewhere.csv");

    SUBCASE("unknown keys are rejected") {
        CHECK_THROWS_AS(ExperimentConfig::from_text("no_such_knob = 1\n"), ConfigError);
    }
    SUBCASE("bad values are rejected") {
        CHECK_THROWS_AS(ExperimentConfig::from_text("beta = banana\n"), ConfigError);
    }
    SUBCASE("comments and blanks are fine") {
        const ExperimentConfig c = ExperimentConfig::from_text("# comment\n\nseed = 9\n");
        CHECK(c.seed == 9);
    }
    SUBCASE("validation catches scheme typos") {
        ExperimentConfig bad = small_config();
        bad.scheme = "dnq";
        CHECK_THROWS_AS(bad.validate(), ConfigError);
        bad = small_config();
        bad.reward_variant = "softened";
        CHECK_THROWS_AS(bad.validate(), ConfigError);
    }
}

TEST_CASE("baseline schemes need no training") {
    const ExperimentConfig config = small_config();
    const DemandSeries series = load_or_synth_demand(config);

    ExperimentConfig macro = config;
    macro.scheme = "macro";
    const TrainingOutput out = run_training(macro, series);
    CHECK(out.log.empty());
    CHECK(out.steps == 0);
    CHECK(out.policy.agent == nullptr);
    CHECK(out.policy.table == nullptr);
}

TEST_CASE("learned schemes train deterministically") {
    ExperimentConfig config = small_config();
    const DemandSeries series = load_or_synth_demand(config);

    SUBCASE("ql") {
        config.scheme = "ql";
        const TrainingOutput a = run_training(config, series);
        const TrainingOutput b = run_training(config, series);
        REQUIRE(a.policy.table != nullptr);
        CHECK(a.policy.table->n_states() > 0);
        CHECK(a.steps > 0);
        REQUIRE(a.log.size() == 2);
        for (std::size_t i = 0; i < a.log.size(); ++i) {
            CHECK(a.log[i].mean_reward == b.log[i].mean_reward);
            CHECK(a.log[i].mean_loss == b.log[i].mean_loss);
        }
    }
    SUBCASE("dqn") {
        config.scheme = "dqn";
        const TrainingOutput a = run_training(config, series);
        const TrainingOutput b = run_training(config, series);
        REQUIRE(a.policy.agent != nullptr);
        CHECK(a.steps > 0);
        REQUIRE(a.log.size() == 2);
        for (std::size_t i = 0; i < a.log.size(); ++i) {
            CHECK(a.log[i].mean_loss == b.log[i].mean_loss);
            CHECK(a.log[i].mean_reward == b.log[i].mean_reward);
        }
        CHECK(a.policy.agent->online().weights[0] == b.policy.agent->online().weights[0]);
    }
    SUBCASE("dqn-f with the oracle pre-processor") {
        config.scheme = "dqn-f";
        config.forecaster = "oracle";
        const TrainingOutput out = run_training(config, series);
        REQUIRE(out.policy.forecaster != nullptr);
        CHECK(out.policy.forecaster->name() == "oracle");
        CHECK(out.steps > 0);
    }
    SUBCASE("divergence is surfaced as a training error") {
        config.scheme = "dqn";
        config.beta = 100.0;
        config.gamma = 1.0;
        config.dqn_learning_rate = 10.0;  // guaranteed blow-up
        CHECK_THROWS_AS(run_training(config, series), TrainingError);
    }
}

TEST_CASE("dqn mean reward does not decrease on a stationary workload") {
    ExperimentConfig config = small_config();
    config.scheme = "dqn";
    config.synth_amplitude_mb = 0.0;
    config.synth_noise_std_mb = 0.0;
    config.synth_base_mb = 9000.0;
    config.synth_overload_fraction = 0.0;
    config.synth_macrocells = 2;
    config.synth_days = 5;
    config.dqn_epochs = 5;
    config.dqn_epsilon = 0.0;  // greedy pass over a deterministic workload
    config.dqn_learning_rate = 0.003;
    config.dqn_target_sync = 100;
    config.seed = 5;
    const DemandSeries series = load_or_synth_demand(config);
    const TrainingOutput out = run_training(config, series);
    REQUIRE(out.log.size() == 5);
    for (std::size_t i = 1; i < out.log.size(); ++i) {
        CHECK(out.log[i].mean_reward >= out.log[i - 1].mean_reward - 1e-9);
    }
    // converges to the single-state optimum, not merely upward
    CHECK(out.log.back().mean_reward == doctest::Approx(-0.01451).epsilon(1e-3));
}

TEST_CASE("checkpoints round-trip through the filesystem") {
    namespace fs = std::filesystem;
    const std::string dir = "/tmp/hetsim_test_checkpoint";
    fs::remove_all(dir);

    ExperimentConfig config = small_config();
    config.scheme = "dqn-f";
    config.forecaster = "regressor";
    const DemandSeries series = load_or_synth_demand(config);
    const TrainingOutput out = run_training(config, series);
    save_checkpoint(config, out, dir);

    CHECK(fs::exists(fs::path(dir) / "manifest.txt"));
    CHECK(fs::exists(fs::path(dir) / "qnet.weights"));
    CHECK(fs::exists(fs::path(dir) / "forecaster.weights"));
    CHECK(fs::exists(fs::path(dir) / "training_log.csv"));
    CHECK(fs::exists(fs::path(dir) / "config.txt"));

    const TrainedPolicy restored = load_checkpoint(config, dir);
    REQUIRE(restored.agent != nullptr);
    CHECK(restored.agent->online().weights[0] == out.policy.agent->online().weights[0]);
    REQUIRE(restored.forecaster != nullptr);

    SUBCASE("scheme mismatch is a config error") {
        ExperimentConfig other = config;
        other.scheme = "ql";
        CHECK_THROWS_AS(load_checkpoint(other, dir), ConfigError);
    }
    SUBCASE("network shape mismatch is a config error") {
        ExperimentConfig other = config;
        other.dqn_hidden = {8, 8};
        CHECK_THROWS_AS(load_checkpoint(other, dir), ConfigError);
    }
    SUBCASE("forecaster mismatch is a config error") {
        ExperimentConfig other = config;
        other.forecaster = "oracle";
        CHECK_THROWS_AS(load_checkpoint(other, dir), ConfigError);
    }
}

TEST_CASE("run_evaluation fills the report") {
    ExperimentConfig config = small_config();
    const DemandSeries series = load_or_synth_demand(config);
    const SplitSeries split = train_test_split(series, config.train_ratio);

    TrainedPolicy macro;
    macro.scheme = Scheme::Macro;
    macro.k_small = config.k_small;
    TrainedPolicy static_policy_;
    static_policy_.scheme = Scheme::Static;
    static_policy_.k_small = config.k_small;

    const Report report = run_evaluation(config, {&macro, &static_policy_}, split.test);
    REQUIRE(report.schemes.size() == 2);
    CHECK(report.cell_groups.size() == 4);

    const SchemeReport& m = report.schemes[0];
    const SchemeReport& s = report.schemes[1];
    CHECK(m.scheme == "macro");
    CHECK(s.scheme == "static");

    SUBCASE("static keeps every small BS on in every populated group") {
        CHECK(s.overall.mean_active_smalls() == doctest::Approx(10.0));
        for (const GroupMetrics& g : s.groups) {
            if (g.n_decisions > 0) CHECK(g.mean_active_smalls() == doctest::Approx(10.0));
        }
        CHECK(m.overall.mean_active_smalls() == 0.0);
    }
    SUBCASE("group totals add up to the overall totals") {
        for (const SchemeReport& sr : report.schemes) {
            double transmitted = 0.0, energy = 0.0;
            long cells = 0, decisions = 0;
            for (const GroupMetrics& g : sr.groups) {
                transmitted += g.transmitted_mb;
                energy += g.energy_j;
                cells += g.n_macrocells;
                decisions += g.n_decisions;
            }
            CHECK(transmitted ==
                  doctest::Approx(sr.overall.transmitted_mb).epsilon(1e-9));
            CHECK(energy == doctest::Approx(sr.overall.energy_j).epsilon(1e-9));
            CHECK(cells == sr.overall.n_macrocells);
            CHECK(decisions == sr.overall.n_decisions);
        }
    }
    SUBCASE("macro under capacity drops nothing and uses the macro energy model only") {
        ExperimentConfig light = config;
        light.synth_base_mb = 3000.0;
        light.synth_amplitude_mb = 1500.0;
        light.synth_noise_std_mb = 0.0;
        light.synth_overload_fraction = 0.0;
        const DemandSeries light_series = load_or_synth_demand(light);
        const SplitSeries light_split = train_test_split(light_series, light.train_ratio);
        const Report r = run_evaluation(light, {&macro}, light_split.test);
        const GroupMetrics& overall = r.schemes[0].overall;
        CHECK(overall.dropped_mb == 0.0);
        CHECK(overall.failed_decisions == 0);

        // closed form: transmit everything, energy affine in the served load
        const WindowSpec w = light.windows();
        double expected_d = 0.0, expected_e = 0.0;
        for (Eigen::Index c = 0; c < light_split.test.n_macrocells(); ++c) {
            for (Eigen::Index t = w.first_t(); t <= w.last_t(light_split.test.n_slots()); ++t) {
                for (Eigen::Index i = 0; i < w.m_decision; ++i) {
                    const double d = light_split.test.demand_mb(c, w.decision_start(t) + i);
                    expected_d += d;
                    expected_e += macro_energy(d / 7500.0, light.layout().macro, 600.0);
                }
            }
        }
        CHECK(overall.transmitted_mb == doctest::Approx(expected_d).epsilon(1e-9));
        CHECK(overall.energy_j == doctest::Approx(expected_e).epsilon(1e-9));
    }
    SUBCASE("evaluation is reproducible and scheme order does not leak state") {
        const Report again = run_evaluation(config, {&macro, &static_policy_}, split.test);
        CHECK(report == again);
        const Report flipped = run_evaluation(config, {&static_policy_, &macro}, split.test);
        CHECK(flipped.schemes[1] == report.schemes[0]);
    }
    SUBCASE("parallel evaluation matches the serial reduction") {
        ExperimentConfig threaded = config;
        threaded.eval_workers = 3;
        const Report parallel = run_evaluation(threaded, {&macro, &static_policy_}, split.test);
        CHECK(parallel.schemes[0].overall == report.schemes[0].overall);
        CHECK(parallel.schemes[1].groups == report.schemes[1].groups);
    }
}

TEST_CASE("report JSON and CSV emission") {
    ExperimentConfig config = small_config();
    config.scheme = "ql";
    const DemandSeries series = load_or_synth_demand(config);
    const SplitSeries split = train_test_split(series, config.train_ratio);
    const TrainingOutput trained = run_training(config, series);
    const Report report = run_evaluation(config, {&trained.policy}, split.test);

    SUBCASE("round-trips through JSON exactly") {
        const std::string json = report_to_json(report);
        const Report parsed = report_from_json(json);
        CHECK(parsed == report);
        CHECK(report_to_json(parsed) == json);
    }
    SUBCASE("emitted files land on disk with the expected shapes") {
        namespace fs = std::filesystem;
        const std::string dir = "/tmp/hetsim_test_report";
        fs::remove_all(dir);
        emit_report(report, dir);
        const Report loaded = load_report((fs::path(dir) / "report.json").string());
        CHECK(loaded == report);

        const std::string groups_csv = slurp((fs::path(dir) / "groups.csv").string());
        long lines = 0;
        for (char ch : groups_csv) lines += ch == '\n' ? 1 : 0;
        CHECK(lines == 1 + 5 * static_cast<long>(report.schemes.size()));

        const std::string overall_csv = slurp((fs::path(dir) / "overall.csv").string());
        CHECK(overall_csv.find("ql,") != std::string::npos);
        // Gb rendered with two decimals
        std::istringstream overall_in(overall_csv);
        std::string header, row;
        std::getline(overall_in, header);
        std::getline(overall_in, row);
        const std::size_t comma = row.find(',');
        const std::string gb = row.substr(comma + 1, row.find(',', comma + 1) - comma - 1);
        CHECK(gb.find('.') != std::string::npos);
        CHECK(gb.size() - gb.find('.') - 1 == 2);
    }
    SUBCASE("malformed JSON is rejected") {
        CHECK_THROWS_AS(report_from_json("{\"schema_version\": 99}"), DataError);
        CHECK_THROWS_AS(report_from_json("not json"), DataError);
    }
}
