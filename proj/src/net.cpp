#include "hetsim/net.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "hetsim/rng.hpp"

namespace hetsim {

std::vector<int> DenseNet::shape() const {
    std::vector<int> s;
    if (weights.empty()) return s;
    s.push_back(static_cast<int>(weights.front().cols()));
    for (const auto& w : weights) s.push_back(static_cast<int>(w.rows()));
    return s;
}

bool DenseNet::same_shape(const DenseNet& other) const {
    if (weights.size() != other.weights.size()) return false;
    for (std::size_t l = 0; l < weights.size(); ++l) {
        if (weights[l].rows() != other.weights[l].rows() ||
            weights[l].cols() != other.weights[l].cols()) {
            return false;
        }
    }
    return true;
}

void SgdConfig::validate() const {
    if (learning_rate < 0.0) throw InputError("learning_rate must be >= 0");
}

DenseNet init_weights(const std::vector<int>& shape, std::uint64_t seed) {
    if (shape.size() < 2) throw InputError("net shape needs at least input and output widths");
    for (int w : shape) {
        if (w <= 0) throw InputError("layer widths must be > 0");
    }
    Rng rng(seed);
    DenseNet net;
    for (std::size_t l = 0; l + 1 < shape.size(); ++l) {
        const int fan_in = shape[l];
        const double bound = std::sqrt(3.0 / static_cast<double>(fan_in));
        Eigen::MatrixXd w(shape[l + 1], shape[l]);
        for (Eigen::Index i = 0; i < w.rows(); ++i) {
            for (Eigen::Index j = 0; j < w.cols(); ++j) {
                w(i, j) = rng.uniform(-bound, bound);
            }
        }
        net.weights.push_back(std::move(w));
        net.biases.push_back(Eigen::VectorXd::Zero(shape[l + 1]));
    }
    return net;
}

namespace {

// Pre-activations and activations for every layer; activations[0] is the input.
struct ForwardTrace {
    std::vector<Eigen::VectorXd> pre;
    std::vector<Eigen::VectorXd> act;
};

ForwardTrace forward_trace(const DenseNet& net, const Eigen::Ref<const Eigen::VectorXd>& input) {
    if (net.weights.empty()) throw InputError("uninitialized net");
    if (input.size() != net.input_size()) throw InputError("input length does not match net shape");
    ForwardTrace trace;
    trace.act.push_back(input);
    const std::size_t n_layers = net.weights.size();
    for (std::size_t l = 0; l < n_layers; ++l) {
        Eigen::VectorXd z = net.weights[l] * trace.act.back() + net.biases[l];
        trace.pre.push_back(z);
        if (l + 1 < n_layers) {
            trace.act.push_back(z.cwiseMax(0.0));
        } else {
            trace.act.push_back(std::move(z));  // identity output
        }
    }
    return trace;
}

// One gradient step against the masked half-gradient of the squared error.
// `delta` holds (output - target) for the outputs that participate, zero
// elsewhere; the returned loss is its squared norm before the update.
double apply_masked_step(DenseNet& net, const ForwardTrace& trace, Eigen::VectorXd delta,
                         const SgdConfig& config) {
    const double loss = delta.squaredNorm();
    if (!std::isfinite(loss)) throw TrainingError("non-finite loss in sgd_step");
    const double lr = config.learning_rate;
    for (std::size_t l = net.weights.size(); l-- > 0;) {
        Eigen::VectorXd next_delta;
        if (l > 0) {
            next_delta = net.weights[l].transpose() * delta;
            // rectifier derivative of the layer below
            next_delta = (trace.pre[l - 1].array() > 0.0).select(next_delta, 0.0);
        }
        net.weights[l].noalias() -= lr * delta * trace.act[l].transpose();
        net.biases[l] -= lr * delta;
        if (l > 0) delta = std::move(next_delta);
    }
    return loss;
}

}  // namespace

Eigen::VectorXd forward(const DenseNet& net, const Eigen::Ref<const Eigen::VectorXd>& input) {
    return forward_trace(net, input).act.back();
}

double sgd_step(DenseNet& net, const Eigen::Ref<const Eigen::VectorXd>& input,
                double target_value, int action_index, const SgdConfig& config) {
    config.validate();
    if (!std::isfinite(target_value)) throw TrainingError("non-finite training target");
    if (action_index < 0 || action_index >= net.output_size()) {
        throw InputError("action index out of range");
    }
    ForwardTrace trace = forward_trace(net, input);
    Eigen::VectorXd delta = Eigen::VectorXd::Zero(net.output_size());
    delta[action_index] = trace.act.back()[action_index] - target_value;
    return apply_masked_step(net, trace, std::move(delta), config);
}

double sgd_step(DenseNet& net, const Eigen::Ref<const Eigen::VectorXd>& input,
                const Eigen::Ref<const Eigen::VectorXd>& target, const SgdConfig& config) {
    config.validate();
    if (target.size() != net.output_size()) throw InputError("target length does not match net output");
    if (!target.allFinite()) throw TrainingError("non-finite training target");
    ForwardTrace trace = forward_trace(net, input);
    Eigen::VectorXd delta = trace.act.back() - target;
    return apply_masked_step(net, trace, std::move(delta), config);
}

void clone_into(const DenseNet& src, DenseNet& dst) {
    if (!src.same_shape(dst)) throw InputError("clone_into requires identical shapes");
    dst.weights = src.weights;
    dst.biases = src.biases;
}

namespace {

constexpr const char* kWeightsMagic = "hetsim-weights";
constexpr int kWeightsVersion = 1;

void write_double(std::ostream& out, double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    out << buf;
}

}  // namespace

void save_weights(const DenseNet& net, std::ostream& out) {
    out << kWeightsMagic << ' ' << kWeightsVersion << '\n';
    out << "shape";
    for (int w : net.shape()) out << ' ' << w;
    out << '\n';
    for (std::size_t l = 0; l < net.weights.size(); ++l) {
        out << "layer " << l << '\n';
        const Eigen::MatrixXd& w = net.weights[l];
        for (Eigen::Index i = 0; i < w.rows(); ++i) {
            for (Eigen::Index j = 0; j < w.cols(); ++j) {
                if (j > 0) out << ' ';
                write_double(out, w(i, j));
            }
            out << '\n';
        }
        const Eigen::VectorXd& b = net.biases[l];
        for (Eigen::Index i = 0; i < b.size(); ++i) {
            if (i > 0) out << ' ';
            write_double(out, b[i]);
        }
        out << '\n';
    }
}

void save_weights(const DenseNet& net, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open for writing: " + path);
    save_weights(net, out);
    if (!out.good()) throw IoError("write failed: " + path);
}

DenseNet load_weights(std::istream& in) {
    std::string magic;
    int version = 0;
    in >> magic >> version;
    if (magic != kWeightsMagic) throw DataError("not a weight dump (bad magic)");
    if (version != kWeightsVersion) {
        throw DataError("unsupported weight dump version " + std::to_string(version));
    }
    std::string tag;
    in >> tag;
    if (tag != "shape") throw DataError("weight dump missing shape line");
    std::string rest;
    std::getline(in, rest);
    std::istringstream shape_line(rest);
    std::vector<int> shape;
    int w = 0;
    while (shape_line >> w) shape.push_back(w);
    if (shape.size() < 2) throw DataError("weight dump shape too short");

    DenseNet net;
    for (std::size_t l = 0; l + 1 < shape.size(); ++l) {
        std::size_t index = 0;
        in >> tag >> index;
        if (tag != "layer" || index != l) throw DataError("weight dump layer framing broken");
        Eigen::MatrixXd weights(shape[l + 1], shape[l]);
        for (Eigen::Index i = 0; i < weights.rows(); ++i) {
            for (Eigen::Index j = 0; j < weights.cols(); ++j) {
                if (!(in >> weights(i, j))) throw DataError("weight dump truncated");
            }
        }
        Eigen::VectorXd biases(shape[l + 1]);
        for (Eigen::Index i = 0; i < biases.size(); ++i) {
            if (!(in >> biases[i])) throw DataError("weight dump truncated");
        }
        net.weights.push_back(std::move(weights));
        net.biases.push_back(std::move(biases));
    }
    return net;
}

DenseNet load_weights(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open for reading: " + path);
    return load_weights(in);
}

}  // namespace hetsim
