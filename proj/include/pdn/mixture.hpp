#pragma once

// Mixture-density output head.
//
// The trunk's last activation is mapped by three affine maps to mixing
// logits, component means and log-deviations. Components are diagonal
// Gaussians in normalized design units:
//
//   pi    = softmax(W_pi z + b_pi)
//   mu    = W_mu z + b_mu
//   sigma = exp(clamp(W_sigma z + b_sigma, -10, 10))
//
// and the conditional density is p(y|x) = sum_i pi_i prod_d N(y_d; mu_id, sigma_id).
// All mixture arithmetic is carried out in log space.

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "pdn/duct.hpp"
#include "pdn/matrix.hpp"
#include "pdn/network.hpp"

namespace pdn {

inline constexpr double kLogSigmaClamp = 10.0;

/// Per-dimension affine map between physical radii and design units in [-1, 1].
struct DesignScaler {
    std::vector<double> lower;  // physical value mapped to -1
    std::vector<double> upper;  // physical value mapped to +1

    static DesignScaler for_geometry(const Geometry& geometry);
    static DesignScaler uniform(std::size_t dims, double lower, double upper);

    std::size_t dims() const noexcept { return lower.size(); }
    void validate() const;

    std::vector<double> to_design(std::span<const double> physical) const;
    /// Inverse map without clamping.
    std::vector<double> to_physical(std::span<const double> design) const;
    /// Inverse map clamped to [lower, upper].
    std::vector<double> to_physical_clamped(std::span<const double> design) const;

    bool operator==(const DesignScaler&) const = default;
};

struct MixtureParams {
    std::size_t m = 0;
    std::size_t d = 0;
    bool isotropic = false;
    std::vector<double> mixing;      // m, on the simplex
    std::vector<double> log_mixing;  // m
    std::vector<double> means;       // m x d row-major
    std::vector<double> deviations;  // m x d row-major, > 0
    std::vector<double> log_deviations;

    std::span<const double> mean(std::size_t i) const { return {means.data() + i * d, d}; }
    std::span<const double> deviation(std::size_t i) const { return {deviations.data() + i * d, d}; }
    std::span<const double> log_deviation(std::size_t i) const { return {log_deviations.data() + i * d, d}; }

    void validate() const;
};

/// Builds parameters from explicit mixing weights (normalized here), means and deviations.
MixtureParams make_mixture(std::vector<double> weights, std::vector<double> means, std::vector<double> deviations,
                           std::size_t d);

/// Width of the sigma output for a head (m when isotropic, m * d otherwise).
std::size_t sigma_width(std::size_t m, std::size_t d, bool isotropic) noexcept;

/// Parameters from raw head pre-activations of one sample.
MixtureParams params_from_logits(std::span<const double> mixing_logits, std::span<const double> mean_outputs,
                                 std::span<const double> sigma_logits, std::size_t m, std::size_t d, bool isotropic);

struct HeadWeights {
    std::size_t m = 0;
    std::size_t d = 0;
    bool isotropic = false;
    DenseLayer mixing;
    DenseLayer means;
    DenseLayer deviations;

    std::size_t input_dim() const noexcept { return mixing.spec.input_dim; }
    bool operator==(const HeadWeights&) const = default;
};

HeadWeights init_head(std::size_t input_dim, std::size_t m, std::size_t d, bool isotropic, std::uint64_t seed);

struct HeadTrace {
    Matrix input;
    Matrix mixing_logits;
    Matrix mean_outputs;
    Matrix sigma_logits;
    std::vector<MixtureParams> params;
};

HeadTrace head_forward(const HeadWeights& head, const Matrix& trunk_output);

MixtureParams parameterize(std::span<const double> trunk_output, const HeadWeights& head);

double component_log_density(std::span<const double> z, std::span<const double> mean, std::span<const double> dev);

/// log p(z) by log-sum-exp over components.
double log_density(const MixtureParams& params, std::span<const double> z);
double density(const MixtureParams& params, std::span<const double> z);

/// Posterior component probabilities at z; sums to 1.
std::vector<double> responsibilities(const MixtureParams& params, std::span<const double> z);

/// Mean negative log-likelihood with gradients w.r.t. the head outputs
/// (mixing logits, means, log-deviations), already divided by the batch size.
struct NllResult {
    double loss = 0.0;
    Matrix d_mixing_logits;
    Matrix d_means;
    Matrix d_log_deviations;
};

NllResult nll_loss(std::span<const MixtureParams> params, const Matrix& labels);

struct HeadGradients {
    LayerGradients mixing;
    LayerGradients means;
    LayerGradients deviations;
    Matrix input;  // d loss / d trunk output
};

/// Chains the NLL gradients through the head; clamped sigma logits get zero gradient.
HeadGradients head_backward(const HeadWeights& head, const HeadTrace& trace, const NllResult& nll);

std::vector<ParamBlock> head_param_blocks(HeadWeights& head, const HeadGradients& grads, std::size_t layer_offset);

void write_head(io::ByteWriter& out, const HeadWeights& head);
HeadWeights read_head(io::ByteReader& in);

/// Draws a component from pi, then a diagonal Gaussian point, maps it to
/// physical units and clamps to the scaler range.
std::vector<Structure> sample(const MixtureParams& params, const DesignScaler& scaler, std::size_t count,
                              std::uint64_t seed);

/// Same draws in design units, unclamped.
std::vector<std::vector<double>> sample_design(const MixtureParams& params, std::size_t count, std::uint64_t seed);

/// Mixture density at the structure's design-unit coordinates.
double design_confidence(const MixtureParams& params, const DesignScaler& scaler, const Structure& structure);

}  // namespace pdn
