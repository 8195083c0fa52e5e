#pragma once

// Dense feedforward network with optional batch normalization.
//
// Each layer computes act(BN(x W + b)) with W stored input_dim x output_dim,
// so a batch (one sample per row) maps as a single row-major product.
// Batch normalization sits between the affine map and the activation.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "pdn/binary_io.hpp"
#include "pdn/matrix.hpp"

namespace pdn {

enum class Activation : std::uint8_t { relu = 0, relu6 = 1, linear = 2 };

enum class PassMode { train, infer };

inline constexpr double kBatchNormEpsilon = 1e-8;
inline constexpr double kBatchNormMomentum = 0.9;

struct LayerSpec {
    std::size_t input_dim = 1;
    std::size_t output_dim = 1;
    Activation activation = Activation::relu;
    bool batch_norm = false;

    bool operator==(const LayerSpec&) const = default;
};

struct DenseLayer {
    LayerSpec spec;
    Matrix weight;  // input_dim x output_dim
    std::vector<double> bias;
    // Present only when spec.batch_norm.
    std::vector<double> gamma;
    std::vector<double> beta;
    std::vector<double> running_mean;
    std::vector<double> running_var;

    bool operator==(const DenseLayer&) const = default;
};

struct NetworkWeights {
    std::vector<DenseLayer> layers;

    std::size_t input_dim() const;
    std::size_t output_dim() const;
    std::vector<LayerSpec> specs() const;
    bool operator==(const NetworkWeights&) const = default;
};

struct LayerTrace {
    Matrix input;
    Matrix normalized;           // BN only: (z - mean) * inv_std
    std::vector<double> inv_std; // BN only
    Matrix pre_activation;       // after BN, before the activation
};

/// Everything backward() needs from a forward pass.
struct ForwardTrace {
    PassMode mode = PassMode::train;
    std::vector<LayerTrace> layers;
    std::vector<std::vector<double>> batch_mean;  // per layer, BN train mode only
    std::vector<std::vector<double>> batch_var;   // biased, per layer, BN train mode only
    Matrix output;
};

struct LayerGradients {
    Matrix weight;
    std::vector<double> bias;
    std::vector<double> gamma;
    std::vector<double> beta;
};

struct NetworkGradients {
    std::vector<LayerGradients> layers;
    Matrix input;  // d loss / d network input
};

/// Chains `input_dim -> widths... -> output_dim`; hidden layers use `hidden`
/// activation and batch norm as requested, the last layer is as given.
std::vector<LayerSpec> chain_specs(std::size_t input_dim, std::span<const std::size_t> hidden_widths,
                                   Activation hidden, bool batch_norm, std::size_t output_dim,
                                   Activation output_activation);

/// He-uniform weights (variance 2 / fan_in), zero biases, gamma = 1, beta = 0,
/// running mean 0, running variance 1.
NetworkWeights init_weights(std::span<const LayerSpec> specs, std::uint64_t seed);

/// Pure forward pass. In train mode batch-norm layers use batch statistics
/// (the trace records them); in infer mode they use the running statistics.
ForwardTrace forward(const NetworkWeights& weights, const Matrix& batch, PassMode mode);

/// Folds the batch statistics of a train-mode trace into the running
/// estimates: running = momentum * running + (1 - momentum) * batch, with the
/// unbiased batch variance.
void update_running_stats(NetworkWeights& weights, const ForwardTrace& trace,
                          double momentum = kBatchNormMomentum);

/// Train-mode forward that also updates the running statistics.
ForwardTrace forward_train(NetworkWeights& weights, const Matrix& batch);

/// Infer-mode output only.
Matrix predict(const NetworkWeights& weights, const Matrix& batch);

/// Reverse-mode gradients given d loss / d output.
NetworkGradients backward(const NetworkWeights& weights, const ForwardTrace& trace, const Matrix& output_gradient);

/// A contiguous trainable array paired with its gradient.
struct ParamBlock {
    std::span<double> values;
    std::span<const double> grads;
    std::size_t layer = 0;
};

/// Weight, bias, gamma, beta of every layer, in layer order.
std::vector<ParamBlock> param_blocks(NetworkWeights& weights, const NetworkGradients& grads,
                                     std::size_t layer_offset = 0);

struct AdamState {
    double learning_rate = 1e-4;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
    double weight_decay = 0.0;
    std::uint64_t step = 0;
    std::vector<std::vector<double>> first_moment;
    std::vector<std::vector<double>> second_moment;
};

/// Bias-corrected Adam update. All gradients are checked for finiteness
/// before any parameter moves; the first bad block raises TrainingError
/// carrying its layer index. Moment buffers are sized on first use.
void adam_step(std::span<const ParamBlock> blocks, AdamState& state);

void write_network(io::ByteWriter& out, const NetworkWeights& weights);
NetworkWeights read_network(io::ByteReader& in);

/// Bare network in the .pdnw container (no head, no scaler).
void save_weights(const NetworkWeights& weights, const std::filesystem::path& path);
NetworkWeights load_weights(const std::filesystem::path& path);

}  // namespace pdn
