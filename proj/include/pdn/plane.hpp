#pragma once

// Two-dimensional views of the design-space density.
//
// A PCA plane is fitted to a point cloud (usually samples drawn from the
// mixture itself) and the full-dimensional density is evaluated on a planar
// slice: grid point (u, v) is lifted to center + u * axis1 + v * axis2.

#include <array>
#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "pdn/matrix.hpp"
#include "pdn/mixture.hpp"

namespace pdn {

struct Mode;

struct Projection {
    std::vector<double> center;
    std::array<std::vector<double>, 2> axes;
    std::array<double, 2> explained_variance{};
};

/// Eigen-decomposition of a small symmetric matrix by cyclic Jacobi rotations
/// (fixed sweep order p < q). Eigenvalues descending; eigenvectors are the
/// columns of `vectors`.
struct SymmetricEigen {
    std::vector<double> values;
    Matrix vectors;
};
SymmetricEigen jacobi_eigen(const Matrix& symmetric, std::size_t max_sweeps = 100);

/// Top-two principal axes of the rows of `points` (n >= 3). Each axis is
/// signed so its largest-magnitude entry is positive.
Projection fit_projection(const Matrix& points);
Projection fit_projection(std::span<const std::vector<double>> points);

std::array<double, 2> project(const Projection& projection, std::span<const double> point);
std::vector<double> lift(const Projection& projection, double u, double v);

struct GridMarker {
    std::string label;
    double u = 0.0;
    double v = 0.0;
};

struct DensityGrid {
    double u_min = 0.0, u_max = 0.0, v_min = 0.0, v_max = 0.0;
    std::size_t resolution = 0;
    std::vector<double> values;  // resolution x resolution, v-major: values[iv * resolution + iu]
    std::vector<GridMarker> markers;

    double u_at(std::size_t iu) const;
    double v_at(std::size_t iv) const;
    double at(std::size_t iu, std::size_t iv) const { return values[iv * resolution + iu]; }
};

/// Evaluates the mixture density on a slice through the projection plane.
/// Bounds cover every projected extent point and mode with a 15 % margin;
/// modes become markers A1, A2, ... in rank order.
DensityGrid density_grid(const MixtureParams& params, const Projection& projection, std::size_t resolution,
                         std::span<const std::vector<double>> extent_points, std::span<const Mode> modes);

/// CSV (u,v,density) preceded by a range comment and marker comments.
void emit_grid(const DensityGrid& grid, const std::filesystem::path& path);
DensityGrid read_grid(const std::filesystem::path& path);

/// Dependency-free heat map with labelled mode markers.
std::string render_svg(const DensityGrid& grid);

}  // namespace pdn
