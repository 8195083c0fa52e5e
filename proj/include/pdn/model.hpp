#pragma once

// Inverse models (spectrum -> design) and their training loops.
//
//   pdn  trunk + mixture head, trained by mean negative log-likelihood
//   ann  trunk + linear design output, trained by mean squared error
//   tnn  inverse net trained through a frozen, pretrained forward net
//
// Designs live in normalized units (DesignScaler); inputs are raw spectra.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "pdn/dataset.hpp"
#include "pdn/duct.hpp"
#include "pdn/matrix.hpp"
#include "pdn/mixture.hpp"
#include "pdn/network.hpp"

namespace pdn {

enum class ModelKind : std::uint8_t { bare = 0, pdn = 1, ann = 2, tnn = 3 };

std::string to_string(ModelKind kind);
/// Throws DomainError naming the valid kinds.
ModelKind parse_model_kind(std::string_view name);

struct TrainConfig {
    double learning_rate = 1e-4;
    std::size_t batch_size = 256;
    std::size_t epochs = 1000;
    double weight_decay = 0.0;
    std::uint64_t seed = 1;
    std::vector<std::size_t> hidden_widths{400, 800, 1600, 3200};
    std::size_t mixture_count = 50;
    Activation activation = Activation::relu;
    bool batch_norm = true;
    bool isotropic = false;
    double tnn_gate = 0.05;  // max forward-net mean abs error before stage 2

    void validate() const;
};

struct InverseModel {
    ModelKind kind = ModelKind::bare;
    FreqGrid grid;  // input sampling the model was trained on
    DesignScaler scaler;
    NetworkWeights trunk;  // pdn: hidden layers only; ann/tnn: ends in the design output
    std::optional<HeadWeights> head;
    std::optional<NetworkWeights> forward;  // tnn diagnostics: design -> spectrum

    std::size_t input_dim() const { return trunk.input_dim(); }
    std::size_t design_dim() const { return scaler.dims(); }
    bool operator==(const InverseModel&) const = default;
};

/// Inference-mode mixtures, one per input row (pdn only).
std::vector<MixtureParams> mixtures_for(const InverseModel& model, const Matrix& inputs);
MixtureParams mixture_for(const InverseModel& model, std::span<const double> input);

/// Inference-mode single designs in design units (ann/tnn only).
Matrix predict_design(const InverseModel& model, const Matrix& inputs);

std::vector<char> encode_model(const InverseModel& model);
InverseModel decode_model(std::vector<char> bytes);
void save_model(const InverseModel& model, const std::filesystem::path& path);
InverseModel load_model(const std::filesystem::path& path);

/// Batches for one epoch: a permutation shuffled from derive_seed(seed, epoch)
/// cut into batch_size chunks. A trailing single sample joins the previous
/// batch so batch normalization never sees a batch of one.
std::vector<std::vector<std::size_t>> epoch_batches(std::size_t n, std::size_t batch_size, std::uint64_t seed,
                                                    std::size_t epoch);

/// Loss and gradients of one batch, computed without touching running statistics.
struct PdnStep {
    double loss = 0.0;
    NetworkGradients trunk;
    HeadGradients head;
};
PdnStep pdn_loss_and_gradients(const NetworkWeights& trunk, const HeadWeights& head, const Matrix& inputs,
                               const Matrix& labels);

struct RegressionStep {
    double loss = 0.0;  // mean over rows and columns of squared error
    NetworkGradients grads;
};
RegressionStep mse_loss_and_gradients(const NetworkWeights& net, const Matrix& inputs, const Matrix& targets);

/// Stage-2 tandem loss mean((F(G(x)) - x)^2) with F evaluated in inference mode
/// and held fixed; only G's gradients are returned.
RegressionStep tandem_loss_and_gradients(const NetworkWeights& inverse, const NetworkWeights& forward_net,
                                         const Matrix& spectra);

struct TrainOutcome {
    InverseModel model;  // on divergence: the state after the last completed epoch
    std::vector<double> epoch_losses;
    bool diverged = false;
    std::size_t failed_epoch = 0;
    std::string message;
    double seconds = 0.0;
};

using EpochObserver = std::function<void(std::size_t epoch, double loss)>;

struct TrainingSet {
    Matrix inputs;  // spectra
    Matrix labels;  // designs, normalized units
    FreqGrid grid;
    DesignScaler scaler;
};

TrainingSet training_set(const std::vector<LabelledPair>& pairs, const FreqGrid& grid,
                         const DesignScaler& scaler);

TrainOutcome train_pdn(const TrainingSet& data, const TrainConfig& config, const EpochObserver& observer = {});
TrainOutcome train_ann(const TrainingSet& data, const TrainConfig& config, const EpochObserver& observer = {});

struct TandemOutcome {
    TrainOutcome outcome;            // the tandem model (inverse + frozen forward)
    std::vector<double> forward_losses;
    double forward_error = 0.0;      // mean abs error of F on the gate set
    bool gated = false;              // stage 2 refused
};

/// `gate_set` (spectra in inputs, designs in labels) scores the forward net;
/// when empty the training set is used.
TandemOutcome train_tnn(const TrainingSet& data, const TrainConfig& config, const TrainingSet* gate_set = nullptr,
                        const EpochObserver& observer = {});

}  // namespace pdn
