#pragma once

#include <Eigen/Core>
#include <iosfwd>
#include <string>
#include <vector>

#include "hetsim/errors.hpp"

namespace hetsim {

// Dense feed-forward network, rectifier hidden units, identity outputs,
// 64-bit floats throughout.
struct DenseNet {
    // weights[l] is (width[l+1] x width[l]); biases[l] is width[l+1].
    std::vector<Eigen::MatrixXd> weights;
    std::vector<Eigen::VectorXd> biases;

    std::vector<int> shape() const;
    int input_size() const { return weights.empty() ? 0 : static_cast<int>(weights.front().cols()); }
    int output_size() const { return weights.empty() ? 0 : static_cast<int>(weights.back().rows()); }
    bool same_shape(const DenseNet& other) const;
};

struct SgdConfig {
    double learning_rate = 0.001;
    std::uint64_t seed = 0;

    void validate() const;
};

// Uniform draws scaled by 1/sqrt(fan_in), zero biases; deterministic per seed.
DenseNet init_weights(const std::vector<int>& shape, std::uint64_t seed);

Eigen::VectorXd forward(const DenseNet& net, const Eigen::Ref<const Eigen::VectorXd>& input);

// Squared error on the selected output only; parameters move by
// -1/2 * lr * grad(loss), i.e. lr * error * grad(output). Returns the loss
// before the update.
double sgd_step(DenseNet& net, const Eigen::Ref<const Eigen::VectorXd>& input,
                double target_value, int action_index, const SgdConfig& config);

// Regression form: summed squared error over all outputs.
double sgd_step(DenseNet& net, const Eigen::Ref<const Eigen::VectorXd>& input,
                const Eigen::Ref<const Eigen::VectorXd>& target, const SgdConfig& config);

// Copies parameters; src and dst stay independent afterwards.
void clone_into(const DenseNet& src, DenseNet& dst);

// Text weight dump with a version header; shared by agent checkpoints and
// fitted forecasters.
void save_weights(const DenseNet& net, std::ostream& out);
void save_weights(const DenseNet& net, const std::string& path);
DenseNet load_weights(std::istream& in);
DenseNet load_weights(const std::string& path);

}  // namespace hetsim
