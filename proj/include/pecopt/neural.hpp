#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "pecopt/rng.hpp"

namespace pecopt {

enum class Activation { identity, relu, sigmoid };
enum class LossKind { squared_error, binary_cross_entropy };

struct LayerSpec {
    int units = 0;
    Activation activation = Activation::relu;
    double dropout = 0.0;  // applied to this layer's output in train mode, [0,1)
};

/// Feed-forward network description. The last layer is the output layer;
/// hidden layers are everything before it.
struct NetworkSpec {
    int input_size = 9;
    std::vector<LayerSpec> layers;
    LossKind loss = LossKind::squared_error;

    int output_size() const { return layers.empty() ? 0 : layers.back().units; }
    void validate() const;
};

struct AdamConfig {
    double learning_rate = 0.001;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
};

/// Adam state over a flat parameter vector.
class Adam {
public:
    Adam() = default;
    Adam(std::size_t n_params, AdamConfig cfg);

    /// In-place update params -= lr * m_hat / (sqrt(v_hat) + eps).
    void step(std::span<double> params, std::span<const double> grads);

    long step_count() const { return step_; }
    const AdamConfig& config() const { return cfg_; }

private:
    AdamConfig cfg_;
    std::vector<double> m_, v_;
    long step_ = 0;
};

/// Dense feed-forward network with inverted dropout; 64-bit floats
/// throughout. Parameters live in one flat vector (per layer: weight
/// matrix row-major [units x fan_in], then biases) so Adam and
/// serialization operate on a single buffer.
class Network {
public:
    Network() = default;
    /// Kaiming-style uniform init, U(-sqrt(6/fan_in), sqrt(6/fan_in)), seeded.
    Network(NetworkSpec spec, std::uint64_t init_seed);

    const NetworkSpec& spec() const { return spec_; }
    std::vector<double>& params() { return params_; }
    const std::vector<double>& params() const { return params_; }

    /// Deterministic inference pass (dropout disabled).
    std::vector<double> forward(std::span<const double> input) const;

    /// Forward pass with dropout active (MC-dropout inference / training).
    std::vector<double> forward_stochastic(std::span<const double> input, Rng& rng) const;

    /// Activations cached by a train-mode forward pass, consumed by backward().
    struct Cache {
        std::vector<std::vector<double>> activations;  // [0]=input, per layer output
        std::vector<std::vector<double>> preacts;      // per layer pre-activation
        std::vector<std::vector<double>> dropout_scale;  // per layer, 0 or 1/(1-p)
        bool valid = false;
    };

    std::vector<double> forward_train(std::span<const double> input, Rng& rng, Cache& cache) const;

    /// Accumulate gradients of the configured loss for one sample into
    /// grads (same layout/size as params()). Requires a cache produced by
    /// forward_train on the same input.
    void backward(const Cache& cache, std::span<const double> target,
                  std::span<double> grads) const;

    /// Loss of one prediction/target pair under the configured loss.
    double loss(std::span<const double> output, std::span<const double> target) const;

    std::size_t num_params() const { return params_.size(); }

private:
    NetworkSpec spec_;
    std::vector<double> params_;
    std::vector<std::size_t> weight_offset_, bias_offset_;  // per layer

    void build_offsets();
    friend void write_network(std::vector<unsigned char>&, const Network&);
    friend Network read_network(const unsigned char*&, const unsigned char*);
};

struct TrainConfig {
    int epochs = 100;
    double learning_rate = 0.001;
    int batch_size = 128;
    std::uint64_t seed = 0;
};

struct EpochStats {
    double train_loss = 0.0;
    double train_accuracy = 0.0;  // meaningful for BCE nets only
    double val_loss = 0.0;
    double val_accuracy = 0.0;
};

/// Mini-batch Adam training; rows are shuffled per epoch with the run
/// seed and gradients are accumulated in fixed sample order. Validation
/// vectors may be empty.
std::vector<EpochStats> train_network(Network& net,
                                      const std::vector<std::vector<double>>& x,
                                      const std::vector<std::vector<double>>& y,
                                      const std::vector<std::vector<double>>& x_val,
                                      const std::vector<std::vector<double>>& y_val,
                                      const TrainConfig& cfg);

/// Versioned binary serialization: spec, then parameters row-major.
/// load(save(m)) == m bitwise.
void save_network(const std::string& path, const Network& net);
Network load_network(const std::string& path);
void write_network(std::vector<unsigned char>& out, const Network& net);
Network read_network(const unsigned char*& p, const unsigned char* end);

}  // namespace pecopt
