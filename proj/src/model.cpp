#include "pdn/model.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>

#include "pdn/binary_io.hpp"
#include "pdn/errors.hpp"
#include "pdn/rng.hpp"

namespace pdn {

namespace {

constexpr std::string_view kMagic = "PDNW";
constexpr std::uint32_t kVersion = 1;

// Seed streams derived from TrainConfig::seed.
constexpr std::uint64_t kTrunkStream = 1;
constexpr std::uint64_t kHeadStream = 2;
constexpr std::uint64_t kForwardStream = 3;
constexpr std::uint64_t kShuffleStream = 4;
constexpr std::uint64_t kForwardShuffleStream = 5;

}  // namespace

std::string to_string(ModelKind kind) {
    switch (kind) {
        case ModelKind::bare: return "bare";
        case ModelKind::pdn: return "pdn";
        case ModelKind::ann: return "ann";
        case ModelKind::tnn: return "tnn";
    }
    return "unknown";
}

ModelKind parse_model_kind(std::string_view name) {
    if (name == "pdn") return ModelKind::pdn;
    if (name == "ann") return ModelKind::ann;
    if (name == "tnn") return ModelKind::tnn;
    throw DomainError("unknown model \"" + std::string(name) + "\" (valid: pdn, ann, tnn)");
}

void TrainConfig::validate() const {
    if (!(learning_rate > 0.0) || batch_size == 0 || !(weight_decay >= 0.0) || mixture_count == 0 ||
        !(tnn_gate > 0.0)) {
        throw DomainError("train config: learning_rate, batch_size, mixture_count and tnn_gate must be positive, "
                          "weight_decay non-negative");
    }
    for (std::size_t w : hidden_widths) {
        if (w == 0) throw DomainError("train config: hidden widths must be positive");
    }
}

std::vector<MixtureParams> mixtures_for(const InverseModel& model, const Matrix& inputs) {
    if (model.kind != ModelKind::pdn || !model.head) throw DomainError("mixtures_for: model has no mixture head");
    const Matrix trunk_out = predict(model.trunk, inputs);
    return head_forward(*model.head, trunk_out).params;
}

MixtureParams mixture_for(const InverseModel& model, std::span<const double> input) {
    Matrix one(1, input.size());
    std::copy(input.begin(), input.end(), one.row(0).begin());
    return std::move(mixtures_for(model, one).front());
}

Matrix predict_design(const InverseModel& model, const Matrix& inputs) {
    if (model.kind != ModelKind::ann && model.kind != ModelKind::tnn) {
        throw DomainError("predict_design: only single-output models predict one design");
    }
    return predict(model.trunk, inputs);
}

std::vector<char> encode_model(const InverseModel& model) {
    io::ByteWriter w;
    w.put_bytes(kMagic);
    w.put_u32(kVersion);
    w.put_u8(static_cast<std::uint8_t>(model.kind));
    w.put_u32(static_cast<std::uint32_t>(model.grid.size()));
    w.put_f64s(model.grid.frequencies);
    w.put_u32(static_cast<std::uint32_t>(model.scaler.dims()));
    for (std::size_t k = 0; k < model.scaler.dims(); ++k) {
        w.put_f64(model.scaler.lower[k]);
        w.put_f64(model.scaler.upper[k]);
    }
    write_network(w, model.trunk);
    w.put_u8(model.head ? 1 : 0);
    if (model.head) write_head(w, *model.head);
    w.put_u8(model.forward ? 1 : 0);
    if (model.forward) write_network(w, *model.forward);
    return w.bytes();
}

InverseModel decode_model(std::vector<char> bytes) {
    io::ByteReader r(std::move(bytes));
    r.expect_magic(kMagic);
    const auto version_at = r.offset();
    const std::uint32_t version = r.get_u32("version");
    if (version != kVersion) {
        throw FormatError("unsupported weights format version " + std::to_string(version) + " (this build reads " +
                              std::to_string(kVersion) + "); retrain or use a matching build",
                          version_at);
    }
    InverseModel model;
    const auto kind_at = r.offset();
    const std::uint8_t kind = r.get_u8("model kind");
    if (kind > 3) throw FormatError("unknown model kind " + std::to_string(kind), kind_at);
    model.kind = static_cast<ModelKind>(kind);
    const std::uint32_t grid_len = r.get_u32("grid length");
    if (grid_len > r.remaining() / 8) throw FormatError("truncated file in frequency grid", r.offset());
    model.grid.frequencies.resize(grid_len);
    r.get_f64s(model.grid.frequencies, "frequency grid");
    const std::uint32_t dims = r.get_u32("scaler dims");
    if (dims > r.remaining() / 16) throw FormatError("truncated file in scaler", r.offset());
    model.scaler.lower.resize(dims);
    model.scaler.upper.resize(dims);
    for (std::uint32_t k = 0; k < dims; ++k) {
        model.scaler.lower[k] = r.get_f64("scaler");
        model.scaler.upper[k] = r.get_f64("scaler");
    }
    model.trunk = read_network(r);
    const auto head_at = r.offset();
    const std::uint8_t has_head = r.get_u8("head flag");
    if (has_head > 1) throw FormatError("bad head flag", head_at);
    if (has_head) {
        model.head = read_head(r);
        if (model.head->input_dim() != model.trunk.output_dim()) {
            throw FormatError("head input width does not match trunk output", head_at);
        }
        if (model.head->d != dims) throw FormatError("head dimension does not match scaler", head_at);
    }
    const auto fwd_at = r.offset();
    const std::uint8_t has_forward = r.get_u8("forward-net flag");
    if (has_forward > 1) throw FormatError("bad forward-net flag", fwd_at);
    if (has_forward) model.forward = read_network(r);
    r.expect_end();
    if (model.kind == ModelKind::pdn && !model.head) throw FormatError("pdn model without a mixture head", head_at);
    return model;
}

void save_model(const InverseModel& model, const std::filesystem::path& path) {
    io::write_file(path, encode_model(model));
}

InverseModel load_model(const std::filesystem::path& path) { return decode_model(io::read_file(path)); }

void save_weights(const NetworkWeights& weights, const std::filesystem::path& path) {
    InverseModel bare;
    bare.kind = ModelKind::bare;
    bare.trunk = weights;
    save_model(bare, path);
}

NetworkWeights load_weights(const std::filesystem::path& path) { return load_model(path).trunk; }

std::vector<std::vector<std::size_t>> epoch_batches(std::size_t n, std::size_t batch_size, std::uint64_t seed,
                                                    std::size_t epoch) {
    if (batch_size == 0) throw DomainError("epoch_batches: batch size must be positive");
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    Rng rng(derive_seed(seed, epoch));
    rng.shuffle(std::span<std::size_t>(order));
    std::vector<std::vector<std::size_t>> batches;
    for (std::size_t start = 0; start < n; start += batch_size) {
        const std::size_t end = std::min(n, start + batch_size);
        batches.emplace_back(order.begin() + static_cast<std::ptrdiff_t>(start),
                             order.begin() + static_cast<std::ptrdiff_t>(end));
    }
    if (batches.size() > 1 && batches.back().size() == 1) {
        batches[batches.size() - 2].push_back(batches.back().front());
        batches.pop_back();
    }
    return batches;
}

PdnStep pdn_loss_and_gradients(const NetworkWeights& trunk, const HeadWeights& head, const Matrix& inputs,
                               const Matrix& labels) {
    const ForwardTrace trace = forward(trunk, inputs, PassMode::train);
    const HeadTrace ht = head_forward(head, trace.output);
    const NllResult nll = nll_loss(ht.params, labels);
    PdnStep step;
    step.loss = nll.loss;
    step.head = head_backward(head, ht, nll);
    step.trunk = backward(trunk, trace, step.head.input);
    return step;
}

namespace {

double squared_error(const Matrix& predicted, const Matrix& target, Matrix& gradient) {
    if (predicted.rows() != target.rows() || predicted.cols() != target.cols()) {
        throw DomainError("squared error: prediction and target shapes differ");
    }
    gradient = Matrix(predicted.rows(), predicted.cols());
    const double scale = 1.0 / static_cast<double>(predicted.size());
    double total = 0.0;
    const auto p = predicted.values();
    const auto t = target.values();
    auto g = gradient.values();
    for (std::size_t k = 0; k < p.size(); ++k) {
        const double diff = p[k] - t[k];
        total += diff * diff;
        g[k] = 2.0 * diff * scale;
    }
    const double loss = total * scale;
    if (!std::isfinite(loss)) throw TrainingError("non-finite squared-error loss", -1);
    return loss;
}

}  // namespace

RegressionStep mse_loss_and_gradients(const NetworkWeights& net, const Matrix& inputs, const Matrix& targets) {
    const ForwardTrace trace = forward(net, inputs, PassMode::train);
    Matrix grad;
    RegressionStep step;
    step.loss = squared_error(trace.output, targets, grad);
    step.grads = backward(net, trace, grad);
    return step;
}

RegressionStep tandem_loss_and_gradients(const NetworkWeights& inverse, const NetworkWeights& forward_net,
                                         const Matrix& spectra) {
    const ForwardTrace inv = forward(inverse, spectra, PassMode::train);
    const ForwardTrace fwd = forward(forward_net, inv.output, PassMode::infer);
    Matrix grad;
    RegressionStep step;
    step.loss = squared_error(fwd.output, spectra, grad);
    const NetworkGradients through_forward = backward(forward_net, fwd, grad);
    step.grads = backward(inverse, inv, through_forward.input);
    return step;
}

TrainingSet training_set(const std::vector<LabelledPair>& pairs, const FreqGrid& grid, const DesignScaler& scaler) {
    if (pairs.empty()) throw DomainError("training_set: no pairs");
    TrainingSet set;
    set.grid = grid;
    set.scaler = scaler;
    set.inputs = Matrix(pairs.size(), grid.size());
    set.labels = Matrix(pairs.size(), scaler.dims());
    for (std::size_t i = 0; i < pairs.size(); ++i) {
        if (pairs[i].spectrum.size() != grid.size()) throw DomainError("training_set: spectrum length mismatch");
        std::copy(pairs[i].spectrum.transmittance.begin(), pairs[i].spectrum.transmittance.end(),
                  set.inputs.row(i).begin());
        const auto design = scaler.to_design(pairs[i].structure.radii);
        std::copy(design.begin(), design.end(), set.labels.row(i).begin());
    }
    return set;
}

namespace {

AdamState adam_for(const TrainConfig& config) {
    AdamState state;
    state.learning_rate = config.learning_rate;
    state.weight_decay = config.weight_decay;
    return state;
}

void check_set(const TrainingSet& data) {
    if (data.inputs.rows() == 0 || data.inputs.rows() != data.labels.rows()) {
        throw DomainError("training data: inputs and labels must have the same positive row count");
    }
    if (data.labels.cols() != data.scaler.dims()) throw DomainError("training data: label width != scaler dims");
}

/// Shared epoch loop. `step` trains on one batch and returns its loss;
/// `snapshot` records the model after each completed epoch.
template <class Step, class Snapshot>
void run_epochs(std::size_t n, const TrainConfig& config, std::uint64_t shuffle_seed, TrainOutcome& outcome,
                Step&& step, Snapshot&& snapshot, const EpochObserver& observer) {
    const auto started = std::chrono::steady_clock::now();
    for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
        double total = 0.0;
        try {
            for (const auto& batch : epoch_batches(n, config.batch_size, shuffle_seed, epoch)) {
                total += step(batch) * static_cast<double>(batch.size());
            }
        } catch (const TrainingError& e) {
            outcome.diverged = true;
            outcome.failed_epoch = epoch;
            outcome.message = std::string(e.what()) + " during epoch " + std::to_string(epoch);
            break;
        }
        const double loss = total / static_cast<double>(n);
        if (!std::isfinite(loss)) {
            outcome.diverged = true;
            outcome.failed_epoch = epoch;
            outcome.message = "non-finite epoch loss in epoch " + std::to_string(epoch);
            break;
        }
        outcome.epoch_losses.push_back(loss);
        snapshot();
        if (observer) observer(epoch, loss);
    }
    outcome.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
}

}  // namespace

TrainOutcome train_pdn(const TrainingSet& data, const TrainConfig& config, const EpochObserver& observer) {
    config.validate();
    check_set(data);
    const auto specs = chain_specs(data.inputs.cols(), config.hidden_widths, config.activation, config.batch_norm, 1,
                                   Activation::linear);
    // chain_specs always appends an output layer; the pdn trunk stops at the last hidden layer.
    std::vector<LayerSpec> trunk_specs(specs.begin(), specs.end() - 1);
    if (trunk_specs.empty()) throw DomainError("train_pdn: the trunk needs at least one hidden layer");

    InverseModel model;
    model.kind = ModelKind::pdn;
    model.grid = data.grid;
    model.scaler = data.scaler;
    model.trunk = init_weights(trunk_specs, derive_seed(config.seed, kTrunkStream));
    model.head = init_head(model.trunk.output_dim(), config.mixture_count, data.scaler.dims(), config.isotropic,
                           derive_seed(config.seed, kHeadStream));

    TrainOutcome outcome;
    outcome.model = model;
    AdamState adam = adam_for(config);
    run_epochs(
        data.inputs.rows(), config, derive_seed(config.seed, kShuffleStream), outcome,
        [&](const std::vector<std::size_t>& batch) {
            const Matrix x = gather_rows(data.inputs, batch);
            const Matrix y = gather_rows(data.labels, batch);
            const ForwardTrace trace = forward(model.trunk, x, PassMode::train);
            const HeadTrace ht = head_forward(*model.head, trace.output);
            const NllResult nll = nll_loss(ht.params, y);
            const HeadGradients hg = head_backward(*model.head, ht, nll);
            const NetworkGradients tg = backward(model.trunk, trace, hg.input);
            auto blocks = param_blocks(model.trunk, tg);
            auto head_blocks = head_param_blocks(*model.head, hg, model.trunk.layers.size());
            blocks.insert(blocks.end(), head_blocks.begin(), head_blocks.end());
            adam_step(blocks, adam);
            update_running_stats(model.trunk, trace);
            return nll.loss;
        },
        [&] { outcome.model = model; }, observer);
    return outcome;
}

TrainOutcome train_ann(const TrainingSet& data, const TrainConfig& config, const EpochObserver& observer) {
    config.validate();
    check_set(data);
    const auto specs = chain_specs(data.inputs.cols(), config.hidden_widths, config.activation, config.batch_norm,
                                   data.scaler.dims(), Activation::linear);
    InverseModel model;
    model.kind = ModelKind::ann;
    model.grid = data.grid;
    model.scaler = data.scaler;
    model.trunk = init_weights(specs, derive_seed(config.seed, kTrunkStream));

    TrainOutcome outcome;
    outcome.model = model;
    AdamState adam = adam_for(config);
    run_epochs(
        data.inputs.rows(), config, derive_seed(config.seed, kShuffleStream), outcome,
        [&](const std::vector<std::size_t>& batch) {
            const Matrix x = gather_rows(data.inputs, batch);
            const Matrix y = gather_rows(data.labels, batch);
            const ForwardTrace trace = forward(model.trunk, x, PassMode::train);
            Matrix grad;
            const double loss = squared_error(trace.output, y, grad);
            const NetworkGradients g = backward(model.trunk, trace, grad);
            adam_step(param_blocks(model.trunk, g), adam);
            update_running_stats(model.trunk, trace);
            return loss;
        },
        [&] { outcome.model = model; }, observer);
    return outcome;
}

TandemOutcome train_tnn(const TrainingSet& data, const TrainConfig& config, const TrainingSet* gate_set,
                        const EpochObserver& observer) {
    config.validate();
    check_set(data);
    TandemOutcome result;
    const auto started = std::chrono::steady_clock::now();

    // Stage 1: forward net, design -> spectrum.
    const auto fwd_specs = chain_specs(data.labels.cols(), config.hidden_widths, config.activation, config.batch_norm,
                                       data.inputs.cols(), Activation::linear);
    NetworkWeights forward_net = init_weights(fwd_specs, derive_seed(config.seed, kForwardStream));
    TrainOutcome stage1;
    {
        AdamState adam = adam_for(config);
        run_epochs(
            data.inputs.rows(), config, derive_seed(config.seed, kForwardShuffleStream), stage1,
            [&](const std::vector<std::size_t>& batch) {
                const Matrix x = gather_rows(data.labels, batch);
                const Matrix y = gather_rows(data.inputs, batch);
                const ForwardTrace trace = forward(forward_net, x, PassMode::train);
                Matrix grad;
                const double loss = squared_error(trace.output, y, grad);
                adam_step(param_blocks(forward_net, backward(forward_net, trace, grad)), adam);
                update_running_stats(forward_net, trace);
                return loss;
            },
            [] {}, {});
    }
    result.forward_losses = stage1.epoch_losses;

    InverseModel model;
    model.kind = ModelKind::tnn;
    model.grid = data.grid;
    model.scaler = data.scaler;
    const auto inv_specs = chain_specs(data.inputs.cols(), config.hidden_widths, config.activation, config.batch_norm,
                                       data.scaler.dims(), Activation::linear);
    model.trunk = init_weights(inv_specs, derive_seed(config.seed, kTrunkStream));
    model.forward = forward_net;
    result.outcome.model = model;

    if (stage1.diverged) {
        result.outcome.diverged = true;
        result.outcome.failed_epoch = stage1.failed_epoch;
        result.outcome.message = "forward net diverged: " + stage1.message;
        return result;
    }

    const TrainingSet& gate = gate_set ? *gate_set : data;
    const Matrix predicted = predict(forward_net, gate.labels);
    double err = 0.0;
    for (std::size_t k = 0; k < predicted.size(); ++k) err += std::abs(predicted.values()[k] - gate.inputs.values()[k]);
    result.forward_error = err / static_cast<double>(predicted.size());
    if (!(result.forward_error <= config.tnn_gate)) {
        result.gated = true;
        result.outcome.message = "forward net mean abs error " + std::to_string(result.forward_error) +
                                 " exceeds the gate " + std::to_string(config.tnn_gate) + "; stage 2 refused";
        result.outcome.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
        return result;
    }

    // Stage 2: inverse net through the frozen forward net.
    AdamState adam = adam_for(config);
    run_epochs(
        data.inputs.rows(), config, derive_seed(config.seed, kShuffleStream), result.outcome,
        [&](const std::vector<std::size_t>& batch) {
            const Matrix x = gather_rows(data.inputs, batch);
            const ForwardTrace inv = forward(model.trunk, x, PassMode::train);
            const ForwardTrace fwd = forward(*model.forward, inv.output, PassMode::infer);
            Matrix grad;
            const double loss = squared_error(fwd.output, x, grad);
            const NetworkGradients through = backward(*model.forward, fwd, grad);
            const NetworkGradients g = backward(model.trunk, inv, through.input);
            adam_step(param_blocks(model.trunk, g), adam);
            update_running_stats(model.trunk, inv);
            return loss;
        },
        [&] { result.outcome.model = model; }, observer);
    result.outcome.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    return result;
}

}  // namespace pdn
