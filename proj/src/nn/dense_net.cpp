#include "mbfs/nn/dense_net.hpp"

#include <cmath>

#include "mbfs/error.hpp"

namespace mbfs::nn {

std::string to_string(Activation a) {
    return a == Activation::relu ? "relu" : "identity";
}

Activation activation_from_string(const std::string& name) {
    if (name == "relu") return Activation::relu;
    if (name == "identity") return Activation::identity;
    throw Error(ErrorKind::parse_error, "unknown activation '" + name + "'");
}

std::size_t DenseNet::num_parameters() const {
    std::size_t total = 0;
    for (std::size_t l = 0; l < weights.size(); ++l) {
        total += static_cast<std::size_t>(weights[l].size() + biases[l].size());
    }
    return total;
}

void DenseNet::validate() const {
    if (layer_dims.size() < 2) {
        throw Error(ErrorKind::dimension_mismatch, "network needs at least an input and an output dim");
    }
    const std::size_t layers = layer_dims.size() - 1;
    if (weights.size() != layers || biases.size() != layers || activations.size() != layers) {
        throw Error(ErrorKind::dimension_mismatch, "layer count does not match layer_dims");
    }
    for (std::size_t l = 0; l < layers; ++l) {
        if (layer_dims[l] == 0 || layer_dims[l + 1] == 0) {
            throw Error(ErrorKind::dimension_mismatch, "layer dims must be positive");
        }
        if (static_cast<std::size_t>(weights[l].rows()) != layer_dims[l + 1] ||
            static_cast<std::size_t>(weights[l].cols()) != layer_dims[l] ||
            static_cast<std::size_t>(biases[l].size()) != layer_dims[l + 1]) {
            throw Error(ErrorKind::dimension_mismatch,
                        "layer " + std::to_string(l) + " parameter shape does not match layer_dims");
        }
        if (!weights[l].allFinite() || !biases[l].allFinite()) {
            throw Error(ErrorKind::non_finite, "layer " + std::to_string(l) + " has non-finite parameters");
        }
    }
}

DenseNet make_zero_net(const std::vector<std::size_t>& layer_dims,
                       const std::vector<Activation>& activations) {
    DenseNet net;
    net.layer_dims = layer_dims;
    net.activations = activations;
    for (std::size_t l = 0; l + 1 < layer_dims.size(); ++l) {
        const auto in = static_cast<Eigen::Index>(layer_dims[l]);
        const auto out = static_cast<Eigen::Index>(layer_dims[l + 1]);
        net.weights.push_back(Matrix::Zero(out, in));
        net.biases.push_back(Vector::Zero(out));
    }
    net.validate();
    return net;
}

DenseNet make_dense_net(const std::vector<std::size_t>& layer_dims, std::mt19937_64& rng) {
    if (layer_dims.size() < 2) {
        throw Error(ErrorKind::dimension_mismatch, "network needs at least an input and an output dim");
    }
    std::vector<Activation> acts(layer_dims.size() - 1, Activation::relu);
    acts.back() = Activation::identity;
    DenseNet net = make_zero_net(layer_dims, acts);
    for (std::size_t l = 0; l < net.num_layers(); ++l) {
        const double a = std::sqrt(6.0 / static_cast<double>(layer_dims[l] + layer_dims[l + 1]));
        std::uniform_real_distribution<double> dist(-a, a);
        Matrix& w = net.weights[l];
        for (Eigen::Index r = 0; r < w.rows(); ++r) {
            for (Eigen::Index c = 0; c < w.cols(); ++c) w(r, c) = dist(rng);
        }
    }
    return net;
}

std::vector<double> forward(const DenseNet& net, std::span<const double> input) {
    if (input.size() != net.input_dim()) {
        throw Error(ErrorKind::dimension_mismatch,
                    "forward: input has " + std::to_string(input.size()) + " entries, network expects " +
                        std::to_string(net.input_dim()));
    }
    Matrix x(1, static_cast<Eigen::Index>(input.size()));
    for (std::size_t j = 0; j < input.size(); ++j) x(0, static_cast<Eigen::Index>(j)) = input[j];
    Matrix y = forward_batch(net, x);
    return {y.data(), y.data() + y.size()};
}

Matrix forward_batch(const DenseNet& net, const Matrix& input, ForwardCache* cache) {
    if (static_cast<std::size_t>(input.cols()) != net.input_dim()) {
        throw Error(ErrorKind::dimension_mismatch,
                    "forward: input has " + std::to_string(input.cols()) + " columns, network expects " +
                        std::to_string(net.input_dim()));
    }
    if (cache) {
        cache->layer_inputs.resize(net.num_layers());
        cache->pre_activations.resize(net.num_layers());
    }
    Matrix h = input;
    for (std::size_t l = 0; l < net.num_layers(); ++l) {
        Matrix pre = h * net.weights[l].transpose();
        pre.rowwise() += net.biases[l].transpose();
        if (cache) {
            cache->layer_inputs[l] = std::move(h);
            cache->pre_activations[l] = pre;
        }
        h = net.activations[l] == Activation::relu ? Matrix(pre.cwiseMax(0.0)) : std::move(pre);
    }
    return h;
}

GradientTape GradientTape::zeros_like(const DenseNet& net) {
    GradientTape tape;
    for (std::size_t l = 0; l < net.num_layers(); ++l) {
        tape.weights.push_back(Matrix::Zero(net.weights[l].rows(), net.weights[l].cols()));
        tape.biases.push_back(Vector::Zero(net.biases[l].size()));
    }
    return tape;
}

void GradientTape::set_zero() {
    for (auto& w : weights) w.setZero();
    for (auto& b : biases) b.setZero();
}

GradientTape& GradientTape::operator+=(const GradientTape& other) {
    if (other.weights.size() != weights.size()) {
        throw Error(ErrorKind::dimension_mismatch, "gradient tapes have different layer counts");
    }
    for (std::size_t l = 0; l < weights.size(); ++l) {
        weights[l] += other.weights[l];
        biases[l] += other.biases[l];
    }
    return *this;
}

bool GradientTape::all_zero() const {
    for (std::size_t l = 0; l < weights.size(); ++l) {
        if (!weights[l].isZero(0.0) || !biases[l].isZero(0.0)) return false;
    }
    return true;
}

void backward_batch(const DenseNet& net, const ForwardCache& cache, const Matrix& upstream,
                    GradientTape& tape, Matrix* input_grad) {
    if (cache.layer_inputs.size() != net.num_layers()) {
        throw Error(ErrorKind::dimension_mismatch, "backward: cache does not belong to this network");
    }
    if (static_cast<std::size_t>(upstream.cols()) != net.output_dim() ||
        upstream.rows() != cache.layer_inputs.front().rows()) {
        throw Error(ErrorKind::dimension_mismatch, "backward: upstream gradient shape mismatch");
    }
    if (tape.weights.size() != net.num_layers()) {
        throw Error(ErrorKind::dimension_mismatch, "backward: tape does not match network");
    }
    Matrix delta = upstream;
    for (std::size_t l = net.num_layers(); l-- > 0;) {
        if (net.activations[l] == Activation::relu) {
            delta = delta.cwiseProduct((cache.pre_activations[l].array() > 0.0).cast<double>().matrix());
        }
        tape.weights[l].noalias() += delta.transpose() * cache.layer_inputs[l];
        tape.biases[l] += delta.colwise().sum().transpose();
        if (l > 0 || input_grad) {
            Matrix next = delta * net.weights[l];
            delta = std::move(next);
        }
    }
    if (input_grad) *input_grad = std::move(delta);
}

GradientTape backward(const DenseNet& net, std::span<const double> input,
                      std::span<const double> upstream) {
    if (input.size() != net.input_dim() || upstream.size() != net.output_dim()) {
        throw Error(ErrorKind::dimension_mismatch, "backward: input or upstream gradient has the wrong length");
    }
    Matrix x(1, static_cast<Eigen::Index>(input.size()));
    for (std::size_t j = 0; j < input.size(); ++j) x(0, static_cast<Eigen::Index>(j)) = input[j];
    Matrix g(1, static_cast<Eigen::Index>(upstream.size()));
    for (std::size_t j = 0; j < upstream.size(); ++j) g(0, static_cast<Eigen::Index>(j)) = upstream[j];
    ForwardCache cache;
    forward_batch(net, x, &cache);
    GradientTape tape = GradientTape::zeros_like(net);
    backward_batch(net, cache, g, tape);
    return tape;
}

OptimizerState OptimizerState::for_net(const DenseNet& net, AdamConfig config) {
    OptimizerState state;
    state.first_moment = GradientTape::zeros_like(net);
    state.second_moment = GradientTape::zeros_like(net);
    state.config = config;
    return state;
}

namespace {

template <typename Param, typename Grad, typename Moment>
void adam_update(Param& p, const Grad& g, Moment& m, Moment& v, const AdamConfig& c,
                 double correction1, double correction2, double sign) {
    m = c.beta1 * m + (1.0 - c.beta1) * g;
    v = c.beta2 * v + (1.0 - c.beta2) * g.cwiseProduct(g);
    const auto m_hat = m.array() / correction1;
    const auto v_hat = v.array() / correction2;
    p.array() += sign * c.learning_rate * m_hat / (v_hat.sqrt() + c.epsilon);
}

}  // namespace

void adam_step(DenseNet& net, const GradientTape& tape, OptimizerState& state, bool maximize) {
    if (tape.weights.size() != net.num_layers() || state.first_moment.weights.size() != net.num_layers()) {
        throw Error(ErrorKind::dimension_mismatch, "adam_step: tape or optimizer state does not match network");
    }
    for (std::size_t l = 0; l < net.num_layers(); ++l) {
        if (tape.weights[l].rows() != net.weights[l].rows() || tape.weights[l].cols() != net.weights[l].cols() ||
            tape.biases[l].size() != net.biases[l].size()) {
            throw Error(ErrorKind::dimension_mismatch,
                        "adam_step: gradient shape mismatch in layer " + std::to_string(l));
        }
        if (!tape.weights[l].allFinite()) {
            throw Error(ErrorKind::non_finite, "adam_step: non-finite gradient in layer " + std::to_string(l) + " weights");
        }
        if (!tape.biases[l].allFinite()) {
            throw Error(ErrorKind::non_finite, "adam_step: non-finite gradient in layer " + std::to_string(l) + " biases");
        }
    }
    ++state.step;
    const auto& c = state.config;
    const double correction1 = 1.0 - std::pow(c.beta1, static_cast<double>(state.step));
    const double correction2 = 1.0 - std::pow(c.beta2, static_cast<double>(state.step));
    const double sign = maximize ? 1.0 : -1.0;
    for (std::size_t l = 0; l < net.num_layers(); ++l) {
        adam_update(net.weights[l], tape.weights[l], state.first_moment.weights[l],
                    state.second_moment.weights[l], c, correction1, correction2, sign);
        adam_update(net.biases[l], tape.biases[l], state.first_moment.biases[l],
                    state.second_moment.biases[l], c, correction1, correction2, sign);
    }
}

nlohmann::json to_json(const DenseNet& net) {
    nlohmann::json doc;
    doc["layer_dims"] = net.layer_dims;
    auto& acts = doc["activations"] = nlohmann::json::array();
    for (auto a : net.activations) acts.push_back(to_string(a));
    auto& ws = doc["weights"] = nlohmann::json::array();
    auto& bs = doc["biases"] = nlohmann::json::array();
    for (std::size_t l = 0; l < net.num_layers(); ++l) {
        const Matrix& w = net.weights[l];
        ws.push_back(std::vector<double>(w.data(), w.data() + w.size()));
        const Vector& b = net.biases[l];
        bs.push_back(std::vector<double>(b.data(), b.data() + b.size()));
    }
    return doc;
}

DenseNet dense_net_from_json(const nlohmann::json& doc) {
    DenseNet net;
    try {
        net.layer_dims = doc.at("layer_dims").get<std::vector<std::size_t>>();
        for (const auto& a : doc.at("activations")) net.activations.push_back(activation_from_string(a.get<std::string>()));
        const auto& ws = doc.at("weights");
        const auto& bs = doc.at("biases");
        if (net.layer_dims.size() < 2 || ws.size() + 1 != net.layer_dims.size() || bs.size() != ws.size()) {
            throw Error(ErrorKind::dimension_mismatch, "checkpoint layer count does not match layer_dims");
        }
        for (std::size_t l = 0; l < ws.size(); ++l) {
            const auto flat = ws[l].get<std::vector<double>>();
            const auto rows = static_cast<Eigen::Index>(net.layer_dims[l + 1]);
            const auto cols = static_cast<Eigen::Index>(net.layer_dims[l]);
            if (static_cast<Eigen::Index>(flat.size()) != rows * cols) {
                throw Error(ErrorKind::dimension_mismatch,
                            "checkpoint layer " + std::to_string(l) + " weight count does not match layer_dims");
            }
            net.weights.push_back(Eigen::Map<const Matrix>(flat.data(), rows, cols));
            const auto bias = bs[l].get<std::vector<double>>();
            net.biases.push_back(Eigen::Map<const Vector>(bias.data(), static_cast<Eigen::Index>(bias.size())));
        }
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorKind::parse_error, std::string("malformed network checkpoint: ") + e.what());
    }
    net.validate();
    return net;
}

}  // namespace mbfs::nn
