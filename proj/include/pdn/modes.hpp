#pragma once

// Local maxima of a diagonal Gaussian mixture.
//
// Ascent uses the mean-shift fixed point for heteroscedastic diagonal
// mixtures: with responsibilities w_i(x),
//
//   x_d <- sum_i w_i mu_id / sigma_id^2  /  sum_i w_i / sigma_id^2
//
// which never decreases the density. Every component mean seeds one ascent;
// nearby end points are merged and the survivors ranked by density.

#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <vector>

#include "pdn/mixture.hpp"

namespace pdn {

struct Projection;

struct SeekerConfig {
    std::size_t max_iterations = 500;
    double tolerance = 1e-8;      // step norm, design units
    double merge_radius = 0.02;   // design units
    double density_floor = 1e-3;  // fraction of the top mode's density
    std::size_t max_modes = 16;

    void validate() const;
};

struct Ascent {
    std::vector<double> point;
    double log_density = 0.0;
    std::size_t iterations = 0;
    bool converged = false;
};

/// `trajectory`, when given, receives the log density after every iterate
/// (starting with the start point).
Ascent ascend(const MixtureParams& params, std::span<const double> start, const SeekerConfig& config,
              std::vector<double>* trajectory = nullptr);

struct Mode {
    std::vector<double> location;  // design units
    Structure structure;           // physical radii, clamped to the scaler range
    double density = 0.0;
    double log_density = 0.0;
    std::vector<std::size_t> basin_components;
    std::size_t rank = 0;  // 1-based
    bool converged = true;
    bool boundary = false;  // clamping moved log density by more than 1 %
};

std::vector<Mode> find_modes(const MixtureParams& params, const DesignScaler& scaler, const SeekerConfig& config = {});

/// CSV: rank,density,converged,r1..rL (mm, 2 decimals)[,u,v].
void emit_designs(std::span<const Mode> modes, const std::filesystem::path& path,
                  const Projection* projection = nullptr);

struct DesignRow {
    std::size_t rank = 0;
    double density = 0.0;
    bool converged = true;
    Structure structure;  // metres
};

/// Reads a designs CSV (any number of r<k> columns, values in mm).
std::vector<DesignRow> read_designs(const std::filesystem::path& path);

}  // namespace pdn
