#include <doctest.h>

#include <array>
#include <cmath>
#include <vector>

#include "hetsim/agents.hpp"

using namespace hetsim;

namespace {

// Deterministic 3-state / 2-action chain: action 1 advances toward state 2,
// action 0 stays and collects the state's holding reward.
struct ChainMdp {
    static constexpr int kStates = 3;
    static constexpr int kActions = 2;

    static int next_state(int s, int a) { return a == 1 ? std::min(s + 1, 2) : s; }
    static double reward(int s, int a) {
        if (a == 1) return 0.0;
        return s == 0 ? 0.2 : s == 1 ? 0.5 : 1.0;
    }
};

// Value-iteration oracle over the known model.
std::array<int, 3> value_iteration_policy(double discount) {
    std::array<double, 3> v{0.0, 0.0, 0.0};
    for (int sweep = 0; sweep < 10000; ++sweep) {
        std::array<double, 3> next{};
        for (int s = 0; s < ChainMdp::kStates; ++s) {
            double best = -1e300;
            for (int a = 0; a < ChainMdp::kActions; ++a) {
                best = std::max(best,
                                ChainMdp::reward(s, a) + discount * v[ChainMdp::next_state(s, a)]);
            }
            next[s] = best;
        }
        v = next;
    }
    std::array<int, 3> policy{};
    for (int s = 0; s < ChainMdp::kStates; ++s) {
        double best = -1e300;
        for (int a = 0; a < ChainMdp::kActions; ++a) {
            const double q = ChainMdp::reward(s, a) + discount * v[ChainMdp::next_state(s, a)];
            if (q > best) {
                best = q;
                policy[s] = a;
            }
        }
    }
    return policy;
}

QTable::Key key_of(int s) { return {s, 0, 0}; }

}  // namespace

TEST_CASE("fixed baseline policies") {
    CHECK(macro_policy() == 0);
    CHECK(static_policy(10) == 10);
    CHECK(static_policy(4) == 4);
}

TEST_CASE("ql_quantize bins activities") {
    const DemandStats stats{4650.0, 4650.0, 4650.0};
    const auto key = ql_quantize(stats, 15.0, 20);
    CHECK(key[0] == 15);  // 310 activities, bin floor(310/20)
    CHECK(key[1] == 15);
    CHECK(key[2] == 15);

    CHECK(ql_quantize(DemandStats{0, 0, 0}, 15.0, 20)[1] == 0);
    CHECK(ql_quantize(DemandStats{0, 299.0 * 15.0, 0}, 15.0, 20)[1] == 14);
    CHECK(ql_quantize(DemandStats{0, 300.0 * 15.0, 0}, 15.0, 20)[1] == 15);

    SUBCASE("bin cap bounds the table") {
        CHECK(ql_quantize(DemandStats{0, 1e9, 0}, 15.0, 20, 200)[1] == 200);
    }
    SUBCASE("bad inputs") {
        CHECK_THROWS_AS(ql_quantize(stats, 0.0, 20), InputError);
        CHECK_THROWS_AS(ql_quantize(stats, 15.0, 0), InputError);
    }
}

TEST_CASE("ql_update arithmetic") {
    QTable table(2);
    ql_update(table, key_of(0), 0, 1.0, key_of(1), 0.5, 0.9);
    CHECK(table.lookup(key_of(0))[0] == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(table.lookup(key_of(0))[1] == 0.0);
    CHECK(table.visits(key_of(0)) == 1);
    CHECK(table.n_states() == 1);  // only visited states exist

    SUBCASE("zero learning rate freezes the table") {
        QTable frozen(2);
        ql_update(frozen, key_of(1), 1, 5.0, key_of(2), 0.0, 0.9);
        CHECK(frozen.lookup(key_of(1))[1] == 0.0);
    }
    SUBCASE("unseen states read as zeros") {
        CHECK(table.lookup(key_of(2)).maxCoeff() == 0.0);
        CHECK(table.greedy_action(key_of(2)) == 0);
        CHECK(table.visits(key_of(2)) == 0);
    }
}

TEST_CASE("tabular agent converges to the value-iteration optimum") {
    const double discount = 0.9;
    const std::array<int, 3> optimal = value_iteration_policy(discount);
    REQUIRE(optimal == std::array<int, 3>{1, 1, 0});

    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        Rng rng(seed);
        QTable table(ChainMdp::kActions);
        int state = 0;
        for (int update = 0; update < 10000; ++update) {
            const int action = rng.uniform() < 0.3
                                   ? static_cast<int>(rng.uniform_index(ChainMdp::kActions))
                                   : table.greedy_action(key_of(state));
            const int next = ChainMdp::next_state(state, action);
            ql_update(table, key_of(state), action, ChainMdp::reward(state, action), key_of(next),
                      0.5, discount);
            // occasional restarts keep every state visited
            state = update % 37 == 0 ? static_cast<int>(rng.uniform_index(3)) : next;
        }
        for (int s = 0; s < ChainMdp::kStates; ++s) {
            CHECK(table.greedy_action(key_of(s)) == optimal[s]);
        }
    }
}

TEST_CASE("qtable persistence round-trips") {
    QTable table(3);
    ql_update(table, {1, 2, 3}, 1, 4.25, {1, 2, 4}, 0.5, 0.9);
    ql_update(table, {0, 0, 0}, 2, -1.5, {1, 2, 3}, 0.5, 0.9);
    table.save("/tmp/hetsim_test_qtable.txt");
    const QTable restored = QTable::load("/tmp/hetsim_test_qtable.txt");
    CHECK(restored.n_actions() == 3);
    CHECK(restored.n_states() == 2);
    CHECK(restored.lookup({1, 2, 3}) == table.lookup({1, 2, 3}));
    CHECK(restored.visits({0, 0, 0}) == 1);
}

TEST_CASE("replay memory") {
    Rng rng(99);

    SUBCASE("FIFO eviction at capacity") {
        ReplayMemory memory(2);
        Transition a, b, c;
        a.reward = 1.0;
        b.reward = 2.0;
        c.reward = 3.0;
        memory.push(a);
        memory.push(b);
        memory.push(c);
        CHECK(memory.size() == 2);
        bool saw_a = false;
        for (int i = 0; i < 200; ++i) {
            const double r = memory.sample_one(rng).reward;
            if (r == 1.0) saw_a = true;
            CHECK(r >= 2.0);
        }
        CHECK_FALSE(saw_a);
    }
    SUBCASE("sampling with replacement from a single element") {
        ReplayMemory memory(8);
        Transition t;
        t.reward = 7.0;
        memory.push(t);
        const auto batch = memory.sample(5, rng);
        CHECK(batch.size() == 5);
        for (const Transition& s : batch) CHECK(s.reward == 7.0);
    }
    SUBCASE("uniform over contents") {
        ReplayMemory memory(2);
        Transition x, y;
        x.reward = 0.0;
        y.reward = 1.0;
        memory.push(x);
        memory.push(y);
        long ones = 0;
        const int n = 10000;
        for (int i = 0; i < n; ++i) ones += memory.sample_one(rng).reward == 1.0 ? 1 : 0;
        const double sigma = std::sqrt(n * 0.25);
        CHECK(std::abs(ones - n / 2) < 3.0 * sigma);
    }
    SUBCASE("sampling from empty memory is a state error") {
        ReplayMemory memory(4);
        CHECK_THROWS_AS(memory.sample_one(rng), StateError);
        CHECK_THROWS_AS(memory.sample(3, rng), StateError);
    }
    SUBCASE("zero capacity is rejected") { CHECK_THROWS_AS(ReplayMemory(0), InputError); }
}

TEST_CASE("normalize_state expresses stats as demand rates") {
    const Eigen::Vector3d unit = normalize_state(DemandStats{7500, 7500, 7500}, 12.5, 600.0);
    CHECK(unit == Eigen::Vector3d(1.0, 1.0, 1.0));
    CHECK(normalize_state(DemandStats{0, 0, 0}, 12.5, 600.0) == Eigen::Vector3d::Zero());
    Rng rng(2);
    for (int i = 0; i < 100; ++i) {
        DemandStats stats;
        stats.d_min = rng.uniform(0.0, 10000.0);
        stats.d_avg = stats.d_min + rng.uniform(0.0, 5000.0);
        stats.d_max = stats.d_avg + rng.uniform(0.0, 5000.0);
        const Eigen::Vector3d v = normalize_state(stats, 12.5, 600.0);
        CHECK(v[0] <= v[1]);
        CHECK(v[1] <= v[2]);
    }
    CHECK_THROWS_AS(normalize_state(DemandStats{}, 0.0, 600.0), InputError);
}

TEST_CASE("select_action") {
    DqnConfig config;
    config.hidden = {8};
    config.seed = 5;
    DqnAgent agent(3, 11, config);
    // rig the online net so the outputs are its biases
    for (auto& w : agent.online_mutable().weights) w.setZero();
    agent.online_mutable().biases.back().setZero();
    agent.online_mutable().biases.back()[1] = 0.9;
    agent.online_mutable().biases.back()[2] = 0.3;

    Rng rng(10);
    const Eigen::Vector3d state(0.5, 0.5, 0.5);

    SUBCASE("greedy at epsilon 0") {
        for (int i = 0; i < 10; ++i) CHECK(select_action(agent, state, 0.0, rng) == 1);
    }
    SUBCASE("ties break to the lowest index") {
        agent.online_mutable().biases.back().setConstant(0.5);
        CHECK(select_action(agent, state, 0.0, rng) == 0);
    }
    SUBCASE("epsilon 1 is uniform over actions") {
        std::array<long, 11> counts{};
        const int n = 11000;
        for (int i = 0; i < n; ++i) ++counts[select_action(agent, state, 1.0, rng)];
        const double p = 1.0 / 11.0;
        const double sigma = std::sqrt(n * p * (1 - p));
        for (long count : counts) CHECK(std::abs(count - n * p) < 3.0 * sigma);
    }
    SUBCASE("greedy choice is invariant under positive affine output transforms") {
        Rng state_rng(77);
        DqnAgent scaled(3, 11, config);
        clone_into(agent.online(), scaled.online_mutable());
        scaled.online_mutable().weights.back() *= 3.75;
        scaled.online_mutable().biases.back() =
            agent.online().biases.back() * 3.75 + Eigen::VectorXd::Constant(11, 42.0);
        for (int i = 0; i < 50; ++i) {
            const Eigen::Vector3d s(state_rng.uniform(), state_rng.uniform(), state_rng.uniform());
            CHECK(greedy_action(agent.online(), s) == greedy_action(scaled.online(), s));
        }
    }
}

TEST_CASE("dqn_train_step") {
    DqnConfig config;
    config.hidden = {6};
    config.learning_rate = 1e-3;
    config.discount = 0.9;
    config.target_sync_steps = 200;
    config.seed = 3;

    SUBCASE("per-sample loss matches the TD bracket") {
        DqnAgent agent(3, 2, config);
        // target net outputs max 10, online Q[0] = 12
        for (auto& w : agent.online_mutable().weights) w.setZero();
        agent.online_mutable().biases.back() << 10.0, 3.0;
        agent.sync_target();
        agent.online_mutable().biases.back() << 12.0, 0.0;

        Transition t;
        t.state = Eigen::Vector3d(0.1, 0.2, 0.3);
        t.action = 0;
        t.reward = 5.0;
        t.next_state = Eigen::Vector3d(0.3, 0.2, 0.1);
        const double loss = dqn_train_step(agent, {t});
        CHECK(loss == doctest::Approx(4.0).epsilon(1e-12));  // (5 + 0.9*10 - 12)^2
        CHECK(agent.train_steps() == 1);
    }
    SUBCASE("repeated steps on one batch drive the loss down") {
        DqnAgent agent(3, 4, config);
        Rng rng(17);
        std::vector<Transition> batch;
        for (int i = 0; i < 4; ++i) {
            Transition t;
            t.state = Eigen::Vector3d(rng.uniform(), rng.uniform(), rng.uniform());
            t.action = i;
            t.reward = rng.uniform(-2.0, 2.0);
            t.next_state = Eigen::Vector3d(rng.uniform(), rng.uniform(), rng.uniform());
            batch.push_back(t);
        }
        double previous = dqn_train_step(agent, batch);
        for (int step = 1; step < 199; ++step) {
            const double loss = dqn_train_step(agent, batch);
            CHECK(loss < previous);
            previous = loss;
        }
    }
    SUBCASE("target net holds still between syncs") {
        DqnConfig fast = config;
        fast.target_sync_steps = 5;
        DqnAgent agent(3, 2, fast);
        const Eigen::Vector3d probe(0.4, 0.5, 0.6);
        const Eigen::VectorXd before = forward(agent.target(), probe);
        Transition t;
        t.state = probe;
        t.action = 1;
        t.reward = 1.0;
        t.next_state = probe;
        for (int i = 0; i < 4; ++i) {
            dqn_train_step(agent, {t});
            CHECK(forward(agent.target(), probe) == before);
        }
        dqn_train_step(agent, {t});  // fifth step syncs
        CHECK(forward(agent.target(), probe) == forward(agent.online(), probe));
    }
    SUBCASE("empty batch is rejected") {
        DqnAgent agent(3, 2, config);
        CHECK_THROWS_AS(dqn_train_step(agent, {}), InputError);
    }
    SUBCASE("identical seeds reproduce the loss sequence bitwise") {
        const auto run = [&]() {
            DqnAgent agent(3, 5, config);
            Rng rng(1234);
            ReplayMemory memory(64);
            std::vector<double> losses;
            for (int i = 0; i < 50; ++i) {
                Transition t;
                t.state = Eigen::Vector3d(rng.uniform(), rng.uniform(), rng.uniform());
                t.action = select_action(agent, t.state, 0.2, rng);
                t.reward = rng.uniform(-3.0, 3.0);
                t.next_state = Eigen::Vector3d(rng.uniform(), rng.uniform(), rng.uniform());
                memory.push(t);
                losses.push_back(dqn_train_step(agent, memory.sample(8, rng)));
            }
            return losses;
        };
        CHECK(run() == run());
    }
}
