#include "pdn/network.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "pdn/errors.hpp"
#include "pdn/rng.hpp"

namespace pdn {

std::size_t NetworkWeights::input_dim() const {
    if (layers.empty()) throw DomainError("network has no layers");
    return layers.front().spec.input_dim;
}

std::size_t NetworkWeights::output_dim() const {
    if (layers.empty()) throw DomainError("network has no layers");
    return layers.back().spec.output_dim;
}

std::vector<LayerSpec> NetworkWeights::specs() const {
    std::vector<LayerSpec> out;
    for (const auto& l : layers) out.push_back(l.spec);
    return out;
}

std::vector<LayerSpec> chain_specs(std::size_t input_dim, std::span<const std::size_t> hidden_widths,
                                   Activation hidden, bool batch_norm, std::size_t output_dim,
                                   Activation output_activation) {
    std::vector<LayerSpec> specs;
    std::size_t prev = input_dim;
    for (std::size_t w : hidden_widths) {
        specs.push_back(LayerSpec{prev, w, hidden, batch_norm});
        prev = w;
    }
    specs.push_back(LayerSpec{prev, output_dim, output_activation, false});
    return specs;
}

NetworkWeights init_weights(std::span<const LayerSpec> specs, std::uint64_t seed) {
    if (specs.empty()) throw DomainError("init_weights: no layers");
    Rng rng(seed);
    NetworkWeights net;
    for (std::size_t i = 0; i < specs.size(); ++i) {
        const LayerSpec& s = specs[i];
        if (s.input_dim == 0 || s.output_dim == 0) throw DomainError("init_weights: zero layer dimension");
        if (i > 0 && specs[i - 1].output_dim != s.input_dim) {
            throw DomainError("init_weights: layer " + std::to_string(i) + " input does not chain");
        }
        DenseLayer layer;
        layer.spec = s;
        layer.weight = Matrix(s.input_dim, s.output_dim);
        const double bound = std::sqrt(6.0 / static_cast<double>(s.input_dim));
        for (double& w : layer.weight.values()) w = rng.uniform(-bound, bound);
        layer.bias.assign(s.output_dim, 0.0);
        if (s.batch_norm) {
            layer.gamma.assign(s.output_dim, 1.0);
            layer.beta.assign(s.output_dim, 0.0);
            layer.running_mean.assign(s.output_dim, 0.0);
            layer.running_var.assign(s.output_dim, 1.0);
        }
        net.layers.push_back(std::move(layer));
    }
    return net;
}

namespace {

double activate(Activation a, double x) noexcept {
    switch (a) {
        case Activation::relu: return x > 0.0 ? x : 0.0;
        case Activation::relu6: return std::clamp(x, 0.0, 6.0);
        case Activation::linear: return x;
    }
    return x;
}

double activation_slope(Activation a, double x) noexcept {
    switch (a) {
        case Activation::relu: return x > 0.0 ? 1.0 : 0.0;
        case Activation::relu6: return (x > 0.0 && x < 6.0) ? 1.0 : 0.0;
        case Activation::linear: return 1.0;
    }
    return 1.0;
}

}  // namespace

ForwardTrace forward(const NetworkWeights& weights, const Matrix& batch, PassMode mode) {
    if (weights.layers.empty()) throw DomainError("forward: network has no layers");
    if (batch.cols() != weights.input_dim()) {
        throw DomainError("forward: batch has " + std::to_string(batch.cols()) + " features, network expects " +
                          std::to_string(weights.input_dim()));
    }
    const std::size_t n = batch.rows();
    if (n == 0) throw DomainError("forward: empty batch");
    ForwardTrace trace;
    trace.mode = mode;
    trace.layers.resize(weights.layers.size());
    trace.batch_mean.resize(weights.layers.size());
    trace.batch_var.resize(weights.layers.size());

    Matrix current = batch;
    for (std::size_t li = 0; li < weights.layers.size(); ++li) {
        const DenseLayer& layer = weights.layers[li];
        LayerTrace& lt = trace.layers[li];
        const std::size_t out = layer.spec.output_dim;
        if (layer.weight.rows() != layer.spec.input_dim || layer.weight.cols() != out || layer.bias.size() != out) {
            throw DomainError("forward: layer " + std::to_string(li) + " parameters disagree with its spec");
        }
        lt.input = std::move(current);
        Matrix z;
        matmul(lt.input, layer.weight, z);
        for (std::size_t r = 0; r < n; ++r) {
            auto row = z.row(r);
            for (std::size_t j = 0; j < out; ++j) row[j] += layer.bias[j];
        }
        if (layer.spec.batch_norm) {
            if (mode == PassMode::train && n < 2) {
                throw DomainError("forward: batch normalization needs at least 2 samples in train mode");
            }
            std::vector<double> mean(out, 0.0), var(out, 0.0);
            if (mode == PassMode::train) {
                for (std::size_t r = 0; r < n; ++r) {
                    const auto row = z.row(r);
                    for (std::size_t j = 0; j < out; ++j) mean[j] += row[j];
                }
                for (double& m : mean) m /= static_cast<double>(n);
                for (std::size_t r = 0; r < n; ++r) {
                    const auto row = z.row(r);
                    for (std::size_t j = 0; j < out; ++j) {
                        const double dz = row[j] - mean[j];
                        var[j] += dz * dz;
                    }
                }
                for (double& v : var) v /= static_cast<double>(n);
            } else {
                mean = layer.running_mean;
                var = layer.running_var;
            }
            lt.inv_std.resize(out);
            for (std::size_t j = 0; j < out; ++j) lt.inv_std[j] = 1.0 / std::sqrt(var[j] + kBatchNormEpsilon);
            lt.normalized = Matrix(n, out);
            lt.pre_activation = Matrix(n, out);
            for (std::size_t r = 0; r < n; ++r) {
                const auto zr = z.row(r);
                auto xh = lt.normalized.row(r);
                auto pa = lt.pre_activation.row(r);
                for (std::size_t j = 0; j < out; ++j) {
                    xh[j] = (zr[j] - mean[j]) * lt.inv_std[j];
                    pa[j] = layer.gamma[j] * xh[j] + layer.beta[j];
                }
            }
            if (mode == PassMode::train) {
                trace.batch_mean[li] = std::move(mean);
                trace.batch_var[li] = std::move(var);
            }
        } else {
            lt.pre_activation = std::move(z);
        }
        current = lt.pre_activation;
        if (layer.spec.activation != Activation::linear) {
            for (double& v : current.values()) v = activate(layer.spec.activation, v);
        }
    }
    trace.output = std::move(current);
    return trace;
}

void update_running_stats(NetworkWeights& weights, const ForwardTrace& trace, double momentum) {
    if (trace.mode != PassMode::train || trace.layers.size() != weights.layers.size()) {
        throw DomainError("update_running_stats: needs a train-mode trace of this network");
    }
    for (std::size_t li = 0; li < weights.layers.size(); ++li) {
        DenseLayer& layer = weights.layers[li];
        if (!layer.spec.batch_norm) continue;
        const double n = static_cast<double>(trace.layers[li].input.rows());
        const auto& mean = trace.batch_mean[li];
        const auto& var = trace.batch_var[li];
        for (std::size_t j = 0; j < layer.spec.output_dim; ++j) {
            layer.running_mean[j] = momentum * layer.running_mean[j] + (1.0 - momentum) * mean[j];
            layer.running_var[j] = momentum * layer.running_var[j] + (1.0 - momentum) * var[j] * n / (n - 1.0);
        }
    }
}

ForwardTrace forward_train(NetworkWeights& weights, const Matrix& batch) {
    ForwardTrace trace = forward(weights, batch, PassMode::train);
    update_running_stats(weights, trace);
    return trace;
}

Matrix predict(const NetworkWeights& weights, const Matrix& batch) {
    return forward(weights, batch, PassMode::infer).output;
}

NetworkGradients backward(const NetworkWeights& weights, const ForwardTrace& trace, const Matrix& output_gradient) {
    if (trace.layers.size() != weights.layers.size()) {
        throw DomainError("backward: trace has " + std::to_string(trace.layers.size()) + " layers, network has " +
                          std::to_string(weights.layers.size()));
    }
    if (output_gradient.rows() != trace.output.rows() || output_gradient.cols() != trace.output.cols()) {
        throw DomainError("backward: output gradient shape does not match the traced output");
    }
    NetworkGradients grads;
    grads.layers.resize(weights.layers.size());
    Matrix upstream = output_gradient;
    for (std::size_t li = weights.layers.size(); li-- > 0;) {
        const DenseLayer& layer = weights.layers[li];
        const LayerTrace& lt = trace.layers[li];
        LayerGradients& g = grads.layers[li];
        const std::size_t n = lt.input.rows();
        const std::size_t out = layer.spec.output_dim;
        if (lt.input.cols() != layer.spec.input_dim || lt.pre_activation.cols() != out ||
            upstream.rows() != n || upstream.cols() != out) {
            throw DomainError("backward: stale trace for layer " + std::to_string(li));
        }
        // Through the activation.
        Matrix dpre = std::move(upstream);
        if (layer.spec.activation != Activation::linear) {
            const auto pre = lt.pre_activation.values();
            auto d = dpre.values();
            for (std::size_t k = 0; k < d.size(); ++k) d[k] *= activation_slope(layer.spec.activation, pre[k]);
        }
        // Through batch normalization.
        Matrix dz;
        if (layer.spec.batch_norm) {
            if (lt.normalized.rows() != n || lt.inv_std.size() != out) {
                throw DomainError("backward: stale batch-norm trace for layer " + std::to_string(li));
            }
            g.gamma.assign(out, 0.0);
            g.beta.assign(out, 0.0);
            for (std::size_t r = 0; r < n; ++r) {
                const auto dr = dpre.row(r);
                const auto xh = lt.normalized.row(r);
                for (std::size_t j = 0; j < out; ++j) {
                    g.gamma[j] += dr[j] * xh[j];
                    g.beta[j] += dr[j];
                }
            }
            dz = Matrix(n, out);
            if (trace.mode == PassMode::train) {
                // dz = inv_std / n * (n * dxh - sum(dxh) - xh * sum(dxh * xh)) with dxh = dy * gamma,
                // where the two sums are gamma times the beta and gamma gradients.
                const double nn = static_cast<double>(n);
                for (std::size_t r = 0; r < n; ++r) {
                    const auto dr = dpre.row(r);
                    const auto xh = lt.normalized.row(r);
                    auto out_row = dz.row(r);
                    for (std::size_t j = 0; j < out; ++j) {
                        out_row[j] = layer.gamma[j] * lt.inv_std[j] / nn *
                                     (nn * dr[j] - g.beta[j] - xh[j] * g.gamma[j]);
                    }
                }
            } else {
                for (std::size_t r = 0; r < n; ++r) {
                    const auto dr = dpre.row(r);
                    auto out_row = dz.row(r);
                    for (std::size_t j = 0; j < out; ++j) out_row[j] = dr[j] * layer.gamma[j] * lt.inv_std[j];
                }
            }
        } else {
            dz = std::move(dpre);
        }
        g.bias.assign(out, 0.0);
        for (std::size_t r = 0; r < n; ++r) {
            const auto dr = dz.row(r);
            for (std::size_t j = 0; j < out; ++j) g.bias[j] += dr[j];
        }
        matmul_tn(lt.input, dz, g.weight);
        matmul_nt(dz, layer.weight, upstream);
    }
    grads.input = std::move(upstream);
    return grads;
}

std::vector<ParamBlock> param_blocks(NetworkWeights& weights, const NetworkGradients& grads,
                                     std::size_t layer_offset) {
    if (grads.layers.size() != weights.layers.size()) throw DomainError("param_blocks: gradient layer count mismatch");
    std::vector<ParamBlock> blocks;
    const auto add = [&](std::span<double> v, std::span<const double> g, std::size_t layer) {
        if (v.size() != g.size()) {
            throw DomainError("param_blocks: gradient shape mismatch in layer " + std::to_string(layer));
        }
        blocks.push_back(ParamBlock{v, g, layer});
    };
    for (std::size_t li = 0; li < weights.layers.size(); ++li) {
        DenseLayer& l = weights.layers[li];
        const LayerGradients& g = grads.layers[li];
        add(l.weight.values(), g.weight.values(), li + layer_offset);
        add(l.bias, g.bias, li + layer_offset);
        if (l.spec.batch_norm) {
            add(l.gamma, g.gamma, li + layer_offset);
            add(l.beta, g.beta, li + layer_offset);
        }
    }
    return blocks;
}

void adam_step(std::span<const ParamBlock> blocks, AdamState& state) {
    for (const auto& b : blocks) {
        if (b.values.size() != b.grads.size()) throw DomainError("adam_step: gradient/parameter size mismatch");
        for (double g : b.grads) {
            if (!std::isfinite(g)) {
                throw TrainingError("non-finite gradient in layer " + std::to_string(b.layer),
                                    static_cast<std::int64_t>(b.layer));
            }
        }
    }
    if (state.first_moment.empty()) {
        for (const auto& b : blocks) {
            state.first_moment.emplace_back(b.values.size(), 0.0);
            state.second_moment.emplace_back(b.values.size(), 0.0);
        }
    } else if (state.first_moment.size() != blocks.size()) {
        throw DomainError("adam_step: parameter layout changed between steps");
    }
    ++state.step;
    const double t = static_cast<double>(state.step);
    const double correction1 = 1.0 - std::pow(state.beta1, t);
    const double correction2 = 1.0 - std::pow(state.beta2, t);
    for (std::size_t bi = 0; bi < blocks.size(); ++bi) {
        const ParamBlock& b = blocks[bi];
        auto& m = state.first_moment[bi];
        auto& v = state.second_moment[bi];
        if (m.size() != b.values.size()) throw DomainError("adam_step: moment buffer shape mismatch");
        for (std::size_t k = 0; k < b.values.size(); ++k) {
            const double g = b.grads[k] + state.weight_decay * b.values[k];
            m[k] = state.beta1 * m[k] + (1.0 - state.beta1) * g;
            v[k] = state.beta2 * v[k] + (1.0 - state.beta2) * g * g;
            const double m_hat = m[k] / correction1;
            const double v_hat = v[k] / correction2;
            b.values[k] -= state.learning_rate * m_hat / (std::sqrt(v_hat) + state.epsilon);
        }
    }
}

void write_network(io::ByteWriter& out, const NetworkWeights& weights) {
    out.put_u32(static_cast<std::uint32_t>(weights.layers.size()));
    for (const auto& l : weights.layers) {
        out.put_u32(static_cast<std::uint32_t>(l.spec.input_dim));
        out.put_u32(static_cast<std::uint32_t>(l.spec.output_dim));
        out.put_u8(static_cast<std::uint8_t>(l.spec.activation));
        out.put_u8(l.spec.batch_norm ? 1 : 0);
        out.put_f64s(l.weight.values());
        out.put_f64s(l.bias);
        if (l.spec.batch_norm) {
            out.put_f64s(l.gamma);
            out.put_f64s(l.beta);
            out.put_f64s(l.running_mean);
            out.put_f64s(l.running_var);
        }
    }
}

NetworkWeights read_network(io::ByteReader& in) {
    NetworkWeights net;
    const auto count_offset = in.offset();
    const std::uint32_t count = in.get_u32("layer count");
    if (count == 0) throw FormatError("network with zero layers", count_offset);
    for (std::uint32_t li = 0; li < count; ++li) {
        DenseLayer l;
        const auto spec_offset = in.offset();
        l.spec.input_dim = in.get_u32("layer input_dim");
        l.spec.output_dim = in.get_u32("layer output_dim");
        const std::uint8_t act = in.get_u8("activation");
        const std::uint8_t bn = in.get_u8("batch_norm flag");
        if (act > 2 || bn > 1 || l.spec.input_dim == 0 || l.spec.output_dim == 0) {
            throw FormatError("invalid layer spec for layer " + std::to_string(li), spec_offset);
        }
        if (!net.layers.empty() && net.layers.back().spec.output_dim != l.spec.input_dim) {
            throw FormatError("layer " + std::to_string(li) + " input does not chain", spec_offset);
        }
        const std::uint64_t params = static_cast<std::uint64_t>(l.spec.input_dim) * l.spec.output_dim;
        if (params > in.remaining() / 8) throw FormatError("truncated file in layer weights", in.offset());
        l.spec.activation = static_cast<Activation>(act);
        l.spec.batch_norm = bn != 0;
        l.weight = Matrix(l.spec.input_dim, l.spec.output_dim);
        in.get_f64s(l.weight.values(), "weights");
        l.bias.resize(l.spec.output_dim);
        in.get_f64s(l.bias, "bias");
        if (l.spec.batch_norm) {
            for (auto* v : {&l.gamma, &l.beta, &l.running_mean, &l.running_var}) {
                v->resize(l.spec.output_dim);
                in.get_f64s(*v, "batch-norm parameters");
            }
        }
        net.layers.push_back(std::move(l));
    }
    return net;
}

}  // namespace pdn
