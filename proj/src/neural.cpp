#include "pecopt/neural.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numeric>
#include <stdexcept>

namespace pecopt {

namespace {

double activate(Activation a, double z) {
    switch (a) {
        case Activation::identity: return z;
        case Activation::relu: return z > 0.0 ? z : 0.0;
        case Activation::sigmoid: return 1.0 / (1.0 + std::exp(-z));
    }
    return z;
}

double activate_grad(Activation a, double z, double h) {
    switch (a) {
        case Activation::identity: return 1.0;
        case Activation::relu: return z > 0.0 ? 1.0 : 0.0;
        case Activation::sigmoid: return h * (1.0 - h);
    }
    return 1.0;
}

constexpr double kProbClip = 1e-12;

}  // namespace

void NetworkSpec::validate() const {
    if (input_size < 1) {
        throw std::invalid_argument("NetworkSpec: input_size must be >= 1");
    }
    if (layers.empty()) {
        throw std::invalid_argument("NetworkSpec: at least one layer required");
    }
    for (const auto& l : layers) {
        if (l.units < 1) {
            throw std::invalid_argument("NetworkSpec: layer units must be >= 1");
        }
        if (!(l.dropout >= 0.0 && l.dropout < 1.0)) {
            throw std::invalid_argument("NetworkSpec: dropout must lie in [0,1)");
        }
    }
    if (layers.back().dropout != 0.0) {
        throw std::invalid_argument("NetworkSpec: output layer must not use dropout");
    }
    if (loss == LossKind::binary_cross_entropy &&
        layers.back().activation != Activation::sigmoid) {
        throw std::invalid_argument("NetworkSpec: BCE loss requires a sigmoid output layer");
    }
}

Adam::Adam(std::size_t n_params, AdamConfig cfg)
    : cfg_(cfg), m_(n_params, 0.0), v_(n_params, 0.0) {}

void Adam::step(std::span<double> params, std::span<const double> grads) {
    if (params.size() != m_.size() || grads.size() != m_.size()) {
        throw std::invalid_argument("Adam::step: shape mismatch");
    }
    ++step_;
    const double b1 = cfg_.beta1, b2 = cfg_.beta2;
    const double bc1 = 1.0 - std::pow(b1, static_cast<double>(step_));
    const double bc2 = 1.0 - std::pow(b2, static_cast<double>(step_));
    for (std::size_t i = 0; i < params.size(); ++i) {
        m_[i] = b1 * m_[i] + (1.0 - b1) * grads[i];
        v_[i] = b2 * v_[i] + (1.0 - b2) * grads[i] * grads[i];
        const double m_hat = m_[i] / bc1;
        const double v_hat = v_[i] / bc2;
        params[i] -= cfg_.learning_rate * m_hat / (std::sqrt(v_hat) + cfg_.epsilon);
    }
}

Network::Network(NetworkSpec spec, std::uint64_t init_seed) : spec_(std::move(spec)) {
    spec_.validate();
    build_offsets();
    Rng rng(init_seed);
    int fan_in = spec_.input_size;
    std::size_t p = 0;
    for (const auto& l : spec_.layers) {
        const double bound = std::sqrt(6.0 / static_cast<double>(fan_in));
        for (int i = 0; i < l.units * fan_in; ++i) {
            params_[p++] = rng.uniform(-bound, bound);
        }
        for (int i = 0; i < l.units; ++i) {
            params_[p++] = 0.0;
        }
        fan_in = l.units;
    }
}

void Network::build_offsets() {
    weight_offset_.clear();
    bias_offset_.clear();
    std::size_t total = 0;
    int fan_in = spec_.input_size;
    for (const auto& l : spec_.layers) {
        weight_offset_.push_back(total);
        total += static_cast<std::size_t>(l.units) * fan_in;
        bias_offset_.push_back(total);
        total += l.units;
        fan_in = l.units;
    }
    params_.assign(total, 0.0);
}

std::vector<double> Network::forward(std::span<const double> input) const {
    if (static_cast<int>(input.size()) != spec_.input_size) {
        throw std::invalid_argument("Network::forward: input size mismatch");
    }
    std::vector<double> a(input.begin(), input.end());
    std::vector<double> next;
    int fan_in = spec_.input_size;
    for (std::size_t l = 0; l < spec_.layers.size(); ++l) {
        const auto& layer = spec_.layers[l];
        next.assign(layer.units, 0.0);
        const double* w = params_.data() + weight_offset_[l];
        const double* b = params_.data() + bias_offset_[l];
        for (int u = 0; u < layer.units; ++u) {
            const double* wrow = w + static_cast<std::size_t>(u) * fan_in;
            double z = b[u];
            for (int j = 0; j < fan_in; ++j) z += wrow[j] * a[j];
            next[u] = activate(layer.activation, z);
        }
        a.swap(next);
        fan_in = layer.units;
    }
    return a;
}

std::vector<double> Network::forward_stochastic(std::span<const double> input, Rng& rng) const {
    Cache cache;
    return forward_train(input, rng, cache);
}

std::vector<double> Network::forward_train(std::span<const double> input, Rng& rng,
                                           Cache& cache) const {
    if (static_cast<int>(input.size()) != spec_.input_size) {
        throw std::invalid_argument("Network::forward_train: input size mismatch");
    }
    const std::size_t n_layers = spec_.layers.size();
    cache.activations.resize(n_layers + 1);
    cache.preacts.resize(n_layers);
    cache.dropout_scale.resize(n_layers);
    cache.activations[0].assign(input.begin(), input.end());

    int fan_in = spec_.input_size;
    for (std::size_t l = 0; l < n_layers; ++l) {
        const auto& layer = spec_.layers[l];
        auto& z_out = cache.preacts[l];
        auto& a_out = cache.activations[l + 1];
        auto& scale = cache.dropout_scale[l];
        z_out.assign(layer.units, 0.0);
        a_out.assign(layer.units, 0.0);
        scale.assign(layer.units, 1.0);

        const double* w = params_.data() + weight_offset_[l];
        const double* b = params_.data() + bias_offset_[l];
        const auto& a_in = cache.activations[l];
        for (int u = 0; u < layer.units; ++u) {
            const double* wrow = w + static_cast<std::size_t>(u) * fan_in;
            double z = b[u];
            for (int j = 0; j < fan_in; ++j) z += wrow[j] * a_in[j];
            z_out[u] = z;
            a_out[u] = activate(layer.activation, z);
        }
        if (layer.dropout > 0.0) {
            const double keep = 1.0 - layer.dropout;
            for (int u = 0; u < layer.units; ++u) {
                // inverted dropout: scale kept units by 1/keep
                scale[u] = rng.uniform() < layer.dropout ? 0.0 : 1.0 / keep;
                a_out[u] *= scale[u];
            }
        }
        fan_in = layer.units;
    }
    cache.valid = true;
    return cache.activations.back();
}

void Network::backward(const Cache& cache, std::span<const double> target,
                       std::span<double> grads) const {
    if (!cache.valid) {
        throw std::logic_error("Network::backward: forward_train cache required");
    }
    if (grads.size() != params_.size()) {
        throw std::invalid_argument("Network::backward: gradient buffer size mismatch");
    }
    const std::size_t n_layers = spec_.layers.size();
    const auto& out = cache.activations[n_layers];
    if (target.size() != out.size()) {
        throw std::invalid_argument("Network::backward: target size mismatch");
    }

    // delta holds dL/dz of the current layer
    std::vector<double> delta(out.size());
    const auto& out_layer = spec_.layers[n_layers - 1];
    if (spec_.loss == LossKind::binary_cross_entropy) {
        // sigmoid + BCE shortcut
        for (std::size_t i = 0; i < out.size(); ++i) delta[i] = out[i] - target[i];
    } else {
        for (std::size_t i = 0; i < out.size(); ++i) {
            const double dl_da = 2.0 * (out[i] - target[i]);
            delta[i] = dl_da * activate_grad(out_layer.activation, cache.preacts[n_layers - 1][i],
                                             out[i]);
        }
    }

    std::vector<double> delta_prev;
    for (std::size_t l = n_layers; l-- > 0;) {
        const auto& layer = spec_.layers[l];
        const int fan_in = l == 0 ? spec_.input_size : spec_.layers[l - 1].units;
        const auto& a_in = cache.activations[l];
        double* gw = grads.data() + weight_offset_[l];
        double* gb = grads.data() + bias_offset_[l];
        for (int u = 0; u < layer.units; ++u) {
            double* gwrow = gw + static_cast<std::size_t>(u) * fan_in;
            const double d = delta[u];
            for (int j = 0; j < fan_in; ++j) gwrow[j] += d * a_in[j];
            gb[u] += d;
        }
        if (l == 0) break;

        const auto& prev = spec_.layers[l - 1];
        delta_prev.assign(fan_in, 0.0);
        const double* w = params_.data() + weight_offset_[l];
        for (int u = 0; u < layer.units; ++u) {
            const double* wrow = w + static_cast<std::size_t>(u) * fan_in;
            const double d = delta[u];
            for (int j = 0; j < fan_in; ++j) delta_prev[j] += wrow[j] * d;
        }
        // chain through dropout mask and the previous activation
        const auto& z_prev = cache.preacts[l - 1];
        const auto& scale_prev = cache.dropout_scale[l - 1];
        const auto& h_prev = cache.activations[l];
        for (int j = 0; j < fan_in; ++j) {
            const double masked = delta_prev[j] * scale_prev[j];
            const double h_unmasked = scale_prev[j] != 0.0 ? h_prev[j] / scale_prev[j] : 0.0;
            delta_prev[j] = masked * activate_grad(prev.activation, z_prev[j], h_unmasked);
        }
        delta.swap(delta_prev);
    }
}

double Network::loss(std::span<const double> output, std::span<const double> target) const {
    if (output.size() != target.size()) {
        throw std::invalid_argument("Network::loss: size mismatch");
    }
    if (spec_.loss == LossKind::binary_cross_entropy) {
        double total = 0.0;
        for (std::size_t i = 0; i < output.size(); ++i) {
            const double p = std::clamp(output[i], kProbClip, 1.0 - kProbClip);
            total -= target[i] * std::log(p) + (1.0 - target[i]) * std::log(1.0 - p);
        }
        return total;
    }
    double total = 0.0;
    for (std::size_t i = 0; i < output.size(); ++i) {
        const double d = output[i] - target[i];
        total += d * d;
    }
    return total;
}

std::vector<EpochStats> train_network(Network& net, const std::vector<std::vector<double>>& x,
                                      const std::vector<std::vector<double>>& y,
                                      const std::vector<std::vector<double>>& x_val,
                                      const std::vector<std::vector<double>>& y_val,
                                      const TrainConfig& cfg) {
    if (x.size() != y.size() || x.empty()) {
        throw std::invalid_argument("train_network: bad training data");
    }
    const bool classify = net.spec().loss == LossKind::binary_cross_entropy;
    Adam adam(net.num_params(), AdamConfig{.learning_rate = cfg.learning_rate});
    std::vector<double> grads(net.num_params(), 0.0);
    Network::Cache cache;
    std::vector<int> order(x.size());
    std::iota(order.begin(), order.end(), 0);

    std::vector<EpochStats> history;
    history.reserve(static_cast<std::size_t>(cfg.epochs));

    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        Rng rng(derive_seed(cfg.seed, static_cast<std::uint64_t>(epoch)));
        rng.shuffle(order);

        double loss_sum = 0.0;
        long correct = 0;
        std::size_t pos = 0;
        while (pos < order.size()) {
            const std::size_t batch_end = std::min(pos + cfg.batch_size, order.size());
            const double batch_n = static_cast<double>(batch_end - pos);
            std::fill(grads.begin(), grads.end(), 0.0);
            for (std::size_t s = pos; s < batch_end; ++s) {
                const int i = order[s];
                const auto out = net.forward_train(x[i], rng, cache);
                net.backward(cache, y[i], grads);
                loss_sum += net.loss(out, y[i]);
                if (classify) {
                    const bool pred = out[0] >= 0.5;
                    const bool truth = y[i][0] >= 0.5;
                    if (pred == truth) ++correct;
                }
            }
            for (auto& g : grads) g /= batch_n;
            adam.step(net.params(), grads);
            pos = batch_end;
        }

        EpochStats st;
        st.train_loss = loss_sum / static_cast<double>(x.size());
        st.train_accuracy = classify ? static_cast<double>(correct) / x.size() : 0.0;

        if (!x_val.empty()) {
            double vloss = 0.0;
            long vcorrect = 0;
            for (std::size_t i = 0; i < x_val.size(); ++i) {
                const auto out = net.forward(x_val[i]);
                vloss += net.loss(out, y_val[i]);
                if (classify && (out[0] >= 0.5) == (y_val[i][0] >= 0.5)) ++vcorrect;
            }
            st.val_loss = vloss / static_cast<double>(x_val.size());
            st.val_accuracy = classify ? static_cast<double>(vcorrect) / x_val.size() : 0.0;
        }
        history.push_back(st);
    }
    return history;
}

// --- serialization ----------------------------------------------------------

namespace {

constexpr char kNetMagic[8] = {'P', 'E', 'C', 'N', 'E', 'T', '0', '1'};

template <typename T>
void push_pod(std::vector<unsigned char>& out, const T& v) {
    const auto* p = reinterpret_cast<const unsigned char*>(&v);
    out.insert(out.end(), p, p + sizeof(T));
}

template <typename T>
T read_pod(const unsigned char*& p, const unsigned char* end) {
    if (p + sizeof(T) > end) {
        throw std::runtime_error("network deserialization: truncated data");
    }
    T v;
    std::memcpy(&v, p, sizeof(T));
    p += sizeof(T);
    return v;
}

}  // namespace

void write_network(std::vector<unsigned char>& out, const Network& net) {
    out.insert(out.end(), kNetMagic, kNetMagic + sizeof(kNetMagic));
    const auto& spec = net.spec();
    push_pod<std::int32_t>(out, spec.input_size);
    push_pod<std::int32_t>(out, static_cast<std::int32_t>(spec.layers.size()));
    push_pod<std::int32_t>(out, static_cast<std::int32_t>(spec.loss));
    for (const auto& l : spec.layers) {
        push_pod<std::int32_t>(out, l.units);
        push_pod<std::int32_t>(out, static_cast<std::int32_t>(l.activation));
        push_pod<double>(out, l.dropout);
    }
    push_pod<std::uint64_t>(out, net.num_params());
    for (double p : net.params()) push_pod<double>(out, p);
}

Network read_network(const unsigned char*& p, const unsigned char* end) {
    if (p + sizeof(kNetMagic) > end || std::memcmp(p, kNetMagic, sizeof(kNetMagic)) != 0) {
        throw std::runtime_error("network deserialization: bad magic");
    }
    p += sizeof(kNetMagic);
    NetworkSpec spec;
    spec.input_size = read_pod<std::int32_t>(p, end);
    const int n_layers = read_pod<std::int32_t>(p, end);
    spec.loss = static_cast<LossKind>(read_pod<std::int32_t>(p, end));
    for (int i = 0; i < n_layers; ++i) {
        LayerSpec l;
        l.units = read_pod<std::int32_t>(p, end);
        l.activation = static_cast<Activation>(read_pod<std::int32_t>(p, end));
        l.dropout = read_pod<double>(p, end);
        spec.layers.push_back(l);
    }
    Network net;
    net.spec_ = spec;
    net.build_offsets();
    const std::uint64_t n_params = read_pod<std::uint64_t>(p, end);
    if (n_params != net.params_.size()) {
        throw std::runtime_error("network deserialization: parameter count mismatch");
    }
    for (auto& v : net.params_) v = read_pod<double>(p, end);
    return net;
}

void save_network(const std::string& path, const Network& net) {
    std::vector<unsigned char> buf;
    write_network(buf, net);
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw std::runtime_error("save_network: cannot open " + path);
    }
    out.write(reinterpret_cast<const char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
    if (!out) {
        throw std::runtime_error("save_network: write failed for " + path);
    }
}

Network load_network(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw std::runtime_error("load_network: cannot open " + path);
    }
    std::vector<unsigned char> buf((std::istreambuf_iterator<char>(in)),
                                   std::istreambuf_iterator<char>());
    const unsigned char* p = buf.data();
    return read_network(p, buf.data() + buf.size());
}

}  // namespace pecopt
