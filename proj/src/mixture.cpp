#include "pdn/mixture.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "pdn/errors.hpp"
#include "pdn/rng.hpp"

namespace pdn {

namespace {

constexpr double kHalfLogTwoPi = 0.91893853320467274178;  // 0.5 * log(2 pi)

double log_sum_exp(std::span<const double> values) {
    double peak = -std::numeric_limits<double>::infinity();
    for (double v : values) peak = std::max(peak, v);
    if (!std::isfinite(peak)) return peak;
    double sum = 0.0;
    for (double v : values) sum += std::exp(v - peak);
    return peak + std::log(sum);
}

std::vector<double> joint_log_terms(const MixtureParams& p, std::span<const double> z) {
    if (z.size() != p.d) {
        throw DomainError("mixture: point has " + std::to_string(z.size()) + " dimensions, mixture has " +
                          std::to_string(p.d));
    }
    std::vector<double> terms(p.m);
    for (std::size_t i = 0; i < p.m; ++i) {
        double acc = p.log_mixing[i];
        const auto mu = p.mean(i);
        const auto sd = p.deviation(i);
        const auto lsd = p.log_deviation(i);
        for (std::size_t k = 0; k < p.d; ++k) {
            const double u = (z[k] - mu[k]) / sd[k];
            acc -= lsd[k] + kHalfLogTwoPi + 0.5 * u * u;
        }
        terms[i] = acc;
    }
    return terms;
}

Matrix affine(const DenseLayer& layer, const Matrix& input) {
    Matrix out;
    matmul(input, layer.weight, out);
    for (std::size_t r = 0; r < out.rows(); ++r) {
        auto row = out.row(r);
        for (std::size_t j = 0; j < row.size(); ++j) row[j] += layer.bias[j];
    }
    return out;
}

LayerGradients affine_backward(const DenseLayer& layer, const Matrix& input, const Matrix& d_out,
                               Matrix& d_input) {
    LayerGradients g;
    matmul_tn(input, d_out, g.weight);
    g.bias.assign(layer.spec.output_dim, 0.0);
    for (std::size_t r = 0; r < d_out.rows(); ++r) {
        const auto row = d_out.row(r);
        for (std::size_t j = 0; j < row.size(); ++j) g.bias[j] += row[j];
    }
    Matrix contrib;
    matmul_nt(d_out, layer.weight, contrib);
    if (d_input.rows() == 0) {
        d_input = std::move(contrib);
    } else {
        auto dst = d_input.values();
        const auto src = contrib.values();
        for (std::size_t k = 0; k < dst.size(); ++k) dst[k] += src[k];
    }
    return g;
}

DenseLayer linear_layer(std::size_t input_dim, std::size_t output_dim, Rng& rng) {
    DenseLayer layer;
    layer.spec = LayerSpec{input_dim, output_dim, Activation::linear, false};
    layer.weight = Matrix(input_dim, output_dim);
    const double bound = std::sqrt(6.0 / static_cast<double>(input_dim));
    for (double& w : layer.weight.values()) w = rng.uniform(-bound, bound);
    layer.bias.assign(output_dim, 0.0);
    return layer;
}

}  // namespace

DesignScaler DesignScaler::for_geometry(const Geometry& geometry) {
    return uniform(geometry.layer_count, geometry.radius_min, geometry.radius_max);
}

DesignScaler DesignScaler::uniform(std::size_t dims, double lower, double upper) {
    DesignScaler s{std::vector<double>(dims, lower), std::vector<double>(dims, upper)};
    s.validate();
    return s;
}

void DesignScaler::validate() const {
    if (lower.size() != upper.size() || lower.empty()) throw DomainError("design scaler: bad dimensions");
    for (std::size_t k = 0; k < lower.size(); ++k) {
        if (!(upper[k] > lower[k])) throw DomainError("design scaler: upper bound must exceed lower bound");
    }
}

std::vector<double> DesignScaler::to_design(std::span<const double> physical) const {
    if (physical.size() != dims()) throw DomainError("design scaler: dimension mismatch");
    std::vector<double> out(dims());
    for (std::size_t k = 0; k < dims(); ++k) {
        out[k] = 2.0 * (physical[k] - lower[k]) / (upper[k] - lower[k]) - 1.0;
    }
    return out;
}

std::vector<double> DesignScaler::to_physical(std::span<const double> design) const {
    if (design.size() != dims()) throw DomainError("design scaler: dimension mismatch");
    std::vector<double> out(dims());
    for (std::size_t k = 0; k < dims(); ++k) {
        out[k] = lower[k] + 0.5 * (design[k] + 1.0) * (upper[k] - lower[k]);
    }
    return out;
}

std::vector<double> DesignScaler::to_physical_clamped(std::span<const double> design) const {
    auto out = to_physical(design);
    for (std::size_t k = 0; k < dims(); ++k) out[k] = std::clamp(out[k], lower[k], upper[k]);
    return out;
}

void MixtureParams::validate() const {
    if (m == 0 || d == 0) throw DomainError("mixture: empty mixture");
    if (mixing.size() != m || log_mixing.size() != m || means.size() != m * d || deviations.size() != m * d ||
        log_deviations.size() != m * d) {
        throw DomainError("mixture: parameter shapes disagree with m and d");
    }
    double total = 0.0;
    for (double p : mixing) {
        if (!(p >= 0.0) || !std::isfinite(p)) throw DomainError("mixture: invalid mixing weight");
        total += p;
    }
    if (std::abs(total - 1.0) > 1e-12) throw DomainError("mixture: mixing weights do not sum to one");
    for (double s : deviations) {
        if (!(s > 0.0) || !std::isfinite(s)) throw DomainError("mixture: deviations must be positive and finite");
    }
    for (double mu : means) {
        if (!std::isfinite(mu)) throw DomainError("mixture: non-finite mean");
    }
}

MixtureParams make_mixture(std::vector<double> weights, std::vector<double> means, std::vector<double> deviations,
                           std::size_t d) {
    MixtureParams p;
    p.m = weights.size();
    p.d = d;
    double total = 0.0;
    for (double w : weights) total += w;
    if (!(total > 0.0)) throw DomainError("make_mixture: weights must have positive sum");
    p.mixing.resize(p.m);
    p.log_mixing.resize(p.m);
    for (std::size_t i = 0; i < p.m; ++i) {
        p.mixing[i] = weights[i] / total;
        p.log_mixing[i] = std::log(p.mixing[i]);
    }
    p.means = std::move(means);
    p.deviations = std::move(deviations);
    for (double s : p.deviations) {
        if (!(s > 0.0)) throw DomainError("make_mixture: deviations must be positive");
    }
    p.log_deviations.resize(p.deviations.size());
    std::transform(p.deviations.begin(), p.deviations.end(), p.log_deviations.begin(),
                   [](double s) { return std::log(s); });
    p.validate();
    return p;
}

std::size_t sigma_width(std::size_t m, std::size_t d, bool isotropic) noexcept { return isotropic ? m : m * d; }

MixtureParams params_from_logits(std::span<const double> mixing_logits, std::span<const double> mean_outputs,
                                 std::span<const double> sigma_logits, std::size_t m, std::size_t d, bool isotropic) {
    if (mixing_logits.size() != m || mean_outputs.size() != m * d || sigma_logits.size() != sigma_width(m, d, isotropic)) {
        throw DomainError("parameterize: head output widths disagree with m and d");
    }
    for (auto span : {mixing_logits, mean_outputs, sigma_logits}) {
        for (double v : span) {
            if (!std::isfinite(v)) throw DomainError("parameterize: non-finite head input");
        }
    }
    MixtureParams p;
    p.m = m;
    p.d = d;
    p.isotropic = isotropic;
    const double lse = log_sum_exp(mixing_logits);
    p.log_mixing.resize(m);
    p.mixing.resize(m);
    double total = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
        p.log_mixing[i] = mixing_logits[i] - lse;
        p.mixing[i] = std::exp(p.log_mixing[i]);
        total += p.mixing[i];
    }
    // Renormalize so the simplex holds to rounding; log weights stay consistent to ~1 ulp.
    for (double& w : p.mixing) w /= total;
    p.means.assign(mean_outputs.begin(), mean_outputs.end());
    p.log_deviations.resize(m * d);
    p.deviations.resize(m * d);
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t k = 0; k < d; ++k) {
            const double raw = isotropic ? sigma_logits[i] : sigma_logits[i * d + k];
            const double ls = std::clamp(raw, -kLogSigmaClamp, kLogSigmaClamp);
            p.log_deviations[i * d + k] = ls;
            p.deviations[i * d + k] = std::exp(ls);
        }
    }
    return p;
}

HeadWeights init_head(std::size_t input_dim, std::size_t m, std::size_t d, bool isotropic, std::uint64_t seed) {
    if (input_dim == 0 || m == 0 || d == 0) throw DomainError("init_head: dimensions must be positive");
    Rng rng(seed);
    HeadWeights head;
    head.m = m;
    head.d = d;
    head.isotropic = isotropic;
    head.mixing = linear_layer(input_dim, m, rng);
    head.means = linear_layer(input_dim, m * d, rng);
    head.deviations = linear_layer(input_dim, sigma_width(m, d, isotropic), rng);
    return head;
}

HeadTrace head_forward(const HeadWeights& head, const Matrix& trunk_output) {
    if (trunk_output.cols() != head.input_dim()) {
        throw DomainError("head_forward: trunk width " + std::to_string(trunk_output.cols()) + " != head input " +
                          std::to_string(head.input_dim()));
    }
    if (!trunk_output.all_finite()) throw DomainError("head_forward: non-finite trunk output");
    HeadTrace t;
    t.input = trunk_output;
    t.mixing_logits = affine(head.mixing, trunk_output);
    t.mean_outputs = affine(head.means, trunk_output);
    t.sigma_logits = affine(head.deviations, trunk_output);
    t.params.reserve(trunk_output.rows());
    for (std::size_t r = 0; r < trunk_output.rows(); ++r) {
        t.params.push_back(params_from_logits(t.mixing_logits.row(r), t.mean_outputs.row(r), t.sigma_logits.row(r),
                                              head.m, head.d, head.isotropic));
    }
    return t;
}

MixtureParams parameterize(std::span<const double> trunk_output, const HeadWeights& head) {
    Matrix one(1, trunk_output.size());
    std::copy(trunk_output.begin(), trunk_output.end(), one.row(0).begin());
    return std::move(head_forward(head, one).params.front());
}

double component_log_density(std::span<const double> z, std::span<const double> mean, std::span<const double> dev) {
    if (z.size() != mean.size() || z.size() != dev.size()) throw DomainError("component_log_density: size mismatch");
    double acc = 0.0;
    for (std::size_t k = 0; k < z.size(); ++k) {
        if (!(dev[k] > 0.0)) throw DomainError("component_log_density: deviation must be positive");
        const double u = (z[k] - mean[k]) / dev[k];
        acc -= std::log(dev[k]) + kHalfLogTwoPi + 0.5 * u * u;
    }
    return acc;
}

double log_density(const MixtureParams& params, std::span<const double> z) {
    return log_sum_exp(joint_log_terms(params, z));
}

double density(const MixtureParams& params, std::span<const double> z) { return std::exp(log_density(params, z)); }

std::vector<double> responsibilities(const MixtureParams& params, std::span<const double> z) {
    auto terms = joint_log_terms(params, z);
    const double lse = log_sum_exp(terms);
    for (double& t : terms) t = std::exp(t - lse);
    return terms;
}

NllResult nll_loss(std::span<const MixtureParams> params, const Matrix& labels) {
    if (params.size() != labels.rows() || params.empty()) {
        throw DomainError("nll_loss: " + std::to_string(params.size()) + " mixtures for " +
                          std::to_string(labels.rows()) + " labels");
    }
    const std::size_t n = params.size();
    const std::size_t m = params.front().m;
    const std::size_t d = params.front().d;
    const bool iso = params.front().isotropic;
    if (labels.cols() != d) throw DomainError("nll_loss: label width does not match mixture dimension");
    NllResult out;
    out.d_mixing_logits = Matrix(n, m);
    out.d_means = Matrix(n, m * d);
    out.d_log_deviations = Matrix(n, sigma_width(m, d, iso));
    const double inv_n = 1.0 / static_cast<double>(n);
    double total = 0.0;
    for (std::size_t s = 0; s < n; ++s) {
        const MixtureParams& p = params[s];
        if (p.m != m || p.d != d || p.isotropic != iso) throw DomainError("nll_loss: ragged mixture batch");
        const auto y = labels.row(s);
        auto terms = joint_log_terms(p, y);
        const double lse = log_sum_exp(terms);
        if (!std::isfinite(lse)) {
            throw TrainingError("non-finite log-likelihood in batch sample " + std::to_string(s),
                                static_cast<std::int64_t>(s));
        }
        total -= lse;
        auto dpi = out.d_mixing_logits.row(s);
        auto dmu = out.d_means.row(s);
        auto dls = out.d_log_deviations.row(s);
        for (std::size_t i = 0; i < m; ++i) {
            const double gamma = std::exp(terms[i] - lse);
            dpi[i] = (p.mixing[i] - gamma) * inv_n;
            const auto mu = p.mean(i);
            const auto sd = p.deviation(i);
            for (std::size_t k = 0; k < d; ++k) {
                const double diff = y[k] - mu[k];
                const double var = sd[k] * sd[k];
                dmu[i * d + k] = -gamma * diff / var * inv_n;
                const double g = gamma * (1.0 - diff * diff / var) * inv_n;
                if (iso) {
                    dls[i] += g;
                } else {
                    dls[i * d + k] = g;
                }
            }
        }
    }
    out.loss = total * inv_n;
    if (!std::isfinite(out.loss)) throw TrainingError("non-finite loss", -1);
    return out;
}

HeadGradients head_backward(const HeadWeights& head, const HeadTrace& trace, const NllResult& nll) {
    const std::size_t n = trace.input.rows();
    if (nll.d_mixing_logits.rows() != n || nll.d_mixing_logits.cols() != head.m ||
        nll.d_means.cols() != head.m * head.d ||
        nll.d_log_deviations.cols() != sigma_width(head.m, head.d, head.isotropic)) {
        throw DomainError("head_backward: gradient shapes do not match the head");
    }
    Matrix d_sigma_logits = nll.d_log_deviations;
    for (std::size_t k = 0; k < d_sigma_logits.size(); ++k) {
        const double raw = trace.sigma_logits.values()[k];
        if (raw < -kLogSigmaClamp || raw > kLogSigmaClamp) d_sigma_logits.values()[k] = 0.0;
    }
    HeadGradients g;
    g.mixing = affine_backward(head.mixing, trace.input, nll.d_mixing_logits, g.input);
    g.means = affine_backward(head.means, trace.input, nll.d_means, g.input);
    g.deviations = affine_backward(head.deviations, trace.input, d_sigma_logits, g.input);
    return g;
}

std::vector<ParamBlock> head_param_blocks(HeadWeights& head, const HeadGradients& grads, std::size_t layer_offset) {
    std::vector<ParamBlock> blocks;
    const auto add = [&](DenseLayer& l, const LayerGradients& g, std::size_t idx) {
        if (l.weight.size() != g.weight.size() || l.bias.size() != g.bias.size()) {
            throw DomainError("head_param_blocks: gradient shape mismatch");
        }
        blocks.push_back(ParamBlock{l.weight.values(), g.weight.values(), idx});
        blocks.push_back(ParamBlock{l.bias, g.bias, idx});
    };
    add(head.mixing, grads.mixing, layer_offset);
    add(head.means, grads.means, layer_offset + 1);
    add(head.deviations, grads.deviations, layer_offset + 2);
    return blocks;
}

void write_head(io::ByteWriter& out, const HeadWeights& head) {
    out.put_u32(static_cast<std::uint32_t>(head.m));
    out.put_u32(static_cast<std::uint32_t>(head.d));
    out.put_u8(head.isotropic ? 1 : 0);
    out.put_u32(static_cast<std::uint32_t>(head.input_dim()));
    for (const auto* l : {&head.mixing, &head.means, &head.deviations}) {
        out.put_u32(static_cast<std::uint32_t>(l->spec.output_dim));
        out.put_f64s(l->weight.values());
        out.put_f64s(l->bias);
    }
}

HeadWeights read_head(io::ByteReader& in) {
    HeadWeights head;
    const auto start = in.offset();
    head.m = in.get_u32("head m");
    head.d = in.get_u32("head d");
    const std::uint8_t iso = in.get_u8("head isotropic flag");
    const std::size_t width = in.get_u32("head input width");
    if (head.m == 0 || head.d == 0 || iso > 1 || width == 0) throw FormatError("invalid head descriptor", start);
    head.isotropic = iso != 0;
    const std::size_t expected[3] = {head.m, head.m * head.d, sigma_width(head.m, head.d, head.isotropic)};
    DenseLayer* layers[3] = {&head.mixing, &head.means, &head.deviations};
    for (int i = 0; i < 3; ++i) {
        const auto at = in.offset();
        const std::size_t out_dim = in.get_u32("head output width");
        if (out_dim != expected[i]) throw FormatError("head output width disagrees with m and d", at);
        if (static_cast<std::uint64_t>(width) * out_dim > in.remaining() / 8) {
            throw FormatError("truncated file in head weights", in.offset());
        }
        DenseLayer& l = *layers[i];
        l.spec = LayerSpec{width, out_dim, Activation::linear, false};
        l.weight = Matrix(width, out_dim);
        in.get_f64s(l.weight.values(), "head weights");
        l.bias.resize(out_dim);
        in.get_f64s(l.bias, "head bias");
    }
    return head;
}

std::vector<std::vector<double>> sample_design(const MixtureParams& params, std::size_t count, std::uint64_t seed) {
    if (count == 0) throw DomainError("sample: count must be at least 1");
    params.validate();
    Rng rng(seed);
    std::vector<double> cumulative(params.m);
    double acc = 0.0;
    for (std::size_t i = 0; i < params.m; ++i) cumulative[i] = (acc += params.mixing[i]);
    std::vector<std::vector<double>> out(count, std::vector<double>(params.d));
    for (auto& point : out) {
        const double u = rng.uniform() * acc;
        std::size_t comp = static_cast<std::size_t>(std::upper_bound(cumulative.begin(), cumulative.end(), u) -
                                                    cumulative.begin());
        comp = std::min(comp, params.m - 1);
        const auto mu = params.mean(comp);
        const auto sd = params.deviation(comp);
        for (std::size_t k = 0; k < params.d; ++k) point[k] = mu[k] + sd[k] * rng.normal();
    }
    return out;
}

std::vector<Structure> sample(const MixtureParams& params, const DesignScaler& scaler, std::size_t count,
                              std::uint64_t seed) {
    if (scaler.dims() != params.d) throw DomainError("sample: scaler dimension mismatch");
    std::vector<Structure> out;
    for (const auto& point : sample_design(params, count, seed)) {
        out.push_back(Structure{scaler.to_physical_clamped(point)});
    }
    return out;
}

double design_confidence(const MixtureParams& params, const DesignScaler& scaler, const Structure& structure) {
    return density(params, scaler.to_design(structure.radii));
}

}  // namespace pdn
