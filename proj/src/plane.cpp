#include "pdn/plane.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>
#include <sstream>

#include "pdn/binary_io.hpp"
#include "pdn/csv.hpp"
#include "pdn/errors.hpp"
#include "pdn/modes.hpp"

namespace pdn {

SymmetricEigen jacobi_eigen(const Matrix& symmetric, std::size_t max_sweeps) {
    const std::size_t n = symmetric.rows();
    if (n == 0 || symmetric.cols() != n) throw DomainError("jacobi_eigen: matrix must be square");
    Matrix a = symmetric;
    Matrix v(n, n);
    for (std::size_t i = 0; i < n; ++i) v(i, i) = 1.0;

    double scale = 0.0;
    for (double x : a.values()) scale += x * x;
    const double threshold = 1e-30 * std::max(scale, std::numeric_limits<double>::min());
    for (std::size_t sweep = 0; sweep < max_sweeps; ++sweep) {
        double off = 0.0;
        for (std::size_t p = 0; p < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) off += a(p, q) * a(p, q);
        }
        if (off <= threshold) break;
        for (std::size_t p = 0; p < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                const double apq = a(p, q);
                if (apq == 0.0) continue;
                const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
                const double t = (theta >= 0.0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;
                for (std::size_t k = 0; k < n; ++k) {
                    const double akp = a(k, p);
                    const double akq = a(k, q);
                    a(k, p) = c * akp - s * akq;
                    a(k, q) = s * akp + c * akq;
                }
                for (std::size_t k = 0; k < n; ++k) {
                    const double apk = a(p, k);
                    const double aqk = a(q, k);
                    a(p, k) = c * apk - s * aqk;
                    a(q, k) = s * apk + c * aqk;
                }
                for (std::size_t k = 0; k < n; ++k) {
                    const double vkp = v(k, p);
                    const double vkq = v(k, q);
                    v(k, p) = c * vkp - s * vkq;
                    v(k, q) = s * vkp + c * vkq;
                }
            }
        }
    }
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) { return a(i, i) > a(j, j); });
    SymmetricEigen out;
    out.vectors = Matrix(n, n);
    for (std::size_t c = 0; c < n; ++c) {
        out.values.push_back(a(order[c], order[c]));
        for (std::size_t r = 0; r < n; ++r) out.vectors(r, c) = v(r, order[c]);
    }
    return out;
}

Projection fit_projection(const Matrix& points) {
    const std::size_t n = points.rows();
    const std::size_t d = points.cols();
    if (n < 3) throw DomainError("fit_projection: need at least 3 points");
    if (d < 2) throw DomainError("fit_projection: need at least 2 dimensions");
    Projection proj;
    proj.center.assign(d, 0.0);
    for (std::size_t r = 0; r < n; ++r) {
        const auto row = points.row(r);
        for (std::size_t k = 0; k < d; ++k) proj.center[k] += row[k];
    }
    for (double& c : proj.center) c /= static_cast<double>(n);
    Matrix cov(d, d);
    for (std::size_t r = 0; r < n; ++r) {
        const auto row = points.row(r);
        for (std::size_t i = 0; i < d; ++i) {
            const double di = row[i] - proj.center[i];
            for (std::size_t j = i; j < d; ++j) cov(i, j) += di * (row[j] - proj.center[j]);
        }
    }
    for (std::size_t i = 0; i < d; ++i) {
        for (std::size_t j = i; j < d; ++j) {
            cov(i, j) /= static_cast<double>(n - 1);
            cov(j, i) = cov(i, j);
        }
    }
    const SymmetricEigen eig = jacobi_eigen(cov);
    if (!(eig.values.front() > 0.0)) throw DomainError("fit_projection: points have zero variance");
    for (std::size_t a = 0; a < 2; ++a) {
        std::vector<double> axis(d);
        std::size_t biggest = 0;
        for (std::size_t k = 0; k < d; ++k) {
            axis[k] = eig.vectors(k, a);
            if (std::abs(axis[k]) > std::abs(axis[biggest])) biggest = k;
        }
        if (axis[biggest] < 0.0) {
            for (double& x : axis) x = -x;
        }
        proj.axes[a] = std::move(axis);
        proj.explained_variance[a] = std::max(0.0, eig.values[a]);
    }
    return proj;
}

Projection fit_projection(std::span<const std::vector<double>> points) {
    if (points.empty()) throw DomainError("fit_projection: need at least 3 points");
    Matrix m(points.size(), points.front().size());
    for (std::size_t r = 0; r < points.size(); ++r) {
        if (points[r].size() != m.cols()) throw DomainError("fit_projection: ragged points");
        std::copy(points[r].begin(), points[r].end(), m.row(r).begin());
    }
    return fit_projection(m);
}

std::array<double, 2> project(const Projection& projection, std::span<const double> point) {
    if (point.size() != projection.center.size()) throw DomainError("project: dimension mismatch");
    std::array<double, 2> uv{0.0, 0.0};
    for (std::size_t k = 0; k < point.size(); ++k) {
        const double c = point[k] - projection.center[k];
        uv[0] += c * projection.axes[0][k];
        uv[1] += c * projection.axes[1][k];
    }
    return uv;
}

std::vector<double> lift(const Projection& projection, double u, double v) {
    std::vector<double> p = projection.center;
    for (std::size_t k = 0; k < p.size(); ++k) p[k] += u * projection.axes[0][k] + v * projection.axes[1][k];
    return p;
}

double DensityGrid::u_at(std::size_t iu) const {
    return u_min + (u_max - u_min) * static_cast<double>(iu) / static_cast<double>(resolution - 1);
}

double DensityGrid::v_at(std::size_t iv) const {
    return v_min + (v_max - v_min) * static_cast<double>(iv) / static_cast<double>(resolution - 1);
}

DensityGrid density_grid(const MixtureParams& params, const Projection& projection, std::size_t resolution,
                         std::span<const std::vector<double>> extent_points, std::span<const Mode> modes) {
    if (resolution < 16) throw DomainError("density_grid: resolution must be at least 16");
    params.validate();
    DensityGrid grid;
    grid.resolution = resolution;
    double lo[2] = {std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity()};
    double hi[2] = {-lo[0], -lo[1]};
    const auto include = [&](std::span<const double> p) {
        const auto uv = project(projection, p);
        for (int a = 0; a < 2; ++a) {
            lo[a] = std::min(lo[a], uv[a]);
            hi[a] = std::max(hi[a], uv[a]);
        }
    };
    include(projection.center);
    for (const auto& p : extent_points) include(p);
    for (const auto& m : modes) {
        include(m.location);
        const auto uv = project(projection, m.location);
        grid.markers.push_back(GridMarker{"A" + std::to_string(m.rank), uv[0], uv[1]});
    }
    for (int a = 0; a < 2; ++a) {
        const double span = hi[a] - lo[a];
        const double pad = span > 0.0 ? 0.15 * span : 1.0;
        lo[a] -= pad;
        hi[a] += pad;
    }
    grid.u_min = lo[0];
    grid.u_max = hi[0];
    grid.v_min = lo[1];
    grid.v_max = hi[1];
    grid.values.resize(resolution * resolution);
    for (std::size_t iv = 0; iv < resolution; ++iv) {
        for (std::size_t iu = 0; iu < resolution; ++iu) {
            grid.values[iv * resolution + iu] = density(params, lift(projection, grid.u_at(iu), grid.v_at(iv)));
        }
    }
    return grid;
}

void emit_grid(const DensityGrid& grid, const std::filesystem::path& path) {
    std::ostringstream out;
    char buf[256];
    std::snprintf(buf, sizeof buf, "# u_min=%.17g,u_max=%.17g,v_min=%.17g,v_max=%.17g,resolution=%zu\n", grid.u_min,
                  grid.u_max, grid.v_min, grid.v_max, grid.resolution);
    out << buf;
    for (const auto& m : grid.markers) {
        std::snprintf(buf, sizeof buf, "# marker %s %.17g %.17g\n", m.label.c_str(), m.u, m.v);
        out << buf;
    }
    out << "u,v,density\n";
    for (std::size_t iv = 0; iv < grid.resolution; ++iv) {
        for (std::size_t iu = 0; iu < grid.resolution; ++iu) {
            std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g\n", grid.u_at(iu), grid.v_at(iv), grid.at(iu, iv));
            out << buf;
        }
    }
    io::write_text(path, out.str());
}

DensityGrid read_grid(const std::filesystem::path& path) {
    const csv::Table table = csv::read_table(path);
    DensityGrid grid;
    bool have_range = false;
    for (const auto& c : table.comments) {
        if (c.rfind("u_min=", 0) == 0) {
            if (std::sscanf(c.c_str(), "u_min=%lg,u_max=%lg,v_min=%lg,v_max=%lg,resolution=%zu", &grid.u_min,
                            &grid.u_max, &grid.v_min, &grid.v_max, &grid.resolution) != 5) {
                throw csv::ParseError("malformed grid range line", 1);
            }
            have_range = true;
        } else if (c.rfind("marker ", 0) == 0) {
            char label[64];
            GridMarker m;
            if (std::sscanf(c.c_str(), "marker %63s %lg %lg", label, &m.u, &m.v) != 3) {
                throw csv::ParseError("malformed marker line", 1);
            }
            m.label = label;
            grid.markers.push_back(std::move(m));
        }
    }
    if (!have_range || grid.resolution < 2) throw csv::ParseError("grid file lacks its range line", 1);
    if (table.cells.size() != grid.resolution * grid.resolution) {
        throw csv::ParseError("grid file has " + std::to_string(table.cells.size()) + " rows, expected " +
                                  std::to_string(grid.resolution * grid.resolution),
                              table.lines.empty() ? 1 : table.lines.back());
    }
    const std::size_t dcol = table.column("density");
    grid.values.resize(table.cells.size());
    for (std::size_t r = 0; r < table.cells.size(); ++r) grid.values[r] = table.number(r, dcol);
    return grid;
}

namespace {

std::string ramp(double t) {
    // Dark blue -> teal -> yellow.
    t = std::clamp(t, 0.0, 1.0);
    const double r = t < 0.5 ? 30 + 2 * t * 10 : 40 + (t - 0.5) * 2 * 213;
    const double g = t < 0.5 ? 30 + 2 * t * 150 : 180 + (t - 0.5) * 2 * 51;
    const double b = t < 0.5 ? 90 + 2 * t * 60 : 150 - (t - 0.5) * 2 * 120;
    char buf[16];
    std::snprintf(buf, sizeof buf, "#%02x%02x%02x", static_cast<int>(r), static_cast<int>(g), static_cast<int>(b));
    return buf;
}

}  // namespace

std::string render_svg(const DensityGrid& grid) {
    constexpr double kSize = 480.0;
    const double cell = kSize / static_cast<double>(grid.resolution);
    const double peak = grid.values.empty() ? 0.0 : *std::max_element(grid.values.begin(), grid.values.end());
    std::ostringstream out;
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kSize << "\" height=\"" << kSize
        << "\" viewBox=\"0 0 " << kSize << ' ' << kSize << "\">\n";
    for (std::size_t iv = 0; iv < grid.resolution; ++iv) {
        for (std::size_t iu = 0; iu < grid.resolution; ++iu) {
            const double t = peak > 0.0 ? grid.at(iu, iv) / peak : 0.0;
            // v grows upward.
            out << "<rect x=\"" << csv::fixed(static_cast<double>(iu) * cell, 2) << "\" y=\""
                << csv::fixed(kSize - static_cast<double>(iv + 1) * cell, 2) << "\" width=\""
                << csv::fixed(cell + 0.05, 2) << "\" height=\"" << csv::fixed(cell + 0.05, 2) << "\" fill=\""
                << ramp(t) << "\"/>\n";
        }
    }
    for (const auto& m : grid.markers) {
        const double x = (m.u - grid.u_min) / (grid.u_max - grid.u_min) * kSize;
        const double y = kSize - (m.v - grid.v_min) / (grid.v_max - grid.v_min) * kSize;
        out << "<circle cx=\"" << csv::fixed(x, 2) << "\" cy=\"" << csv::fixed(y, 2)
            << "\" r=\"4\" fill=\"none\" stroke=\"white\" stroke-width=\"1.5\"/>\n";
        out << "<text x=\"" << csv::fixed(x + 6, 2) << "\" y=\"" << csv::fixed(y - 6, 2)
            << "\" fill=\"white\" font-family=\"sans-serif\" font-size=\"12\">" << m.label << "</text>\n";
    }
    out << "</svg>\n";
    return out.str();
}

}  // namespace pdn
