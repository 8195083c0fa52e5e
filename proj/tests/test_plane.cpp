#include <algorithm>
#include <cmath>
#include <fstream>

#include "doctest.h"
#include "pdn/errors.hpp"
#include "pdn/modes.hpp"
#include "pdn/plane.hpp"
#include "pdn/rng.hpp"
#include "tempdir.hpp"

using namespace pdn;

namespace {

double dot(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) s += a[k] * b[k];
    return s;
}

Matrix anisotropic_cloud(Rng& rng, std::size_t n) {
    const double scales[] = {3.0, 2.0, 0.7, 0.4, 0.1};
    Matrix m(n, 5);
    for (std::size_t r = 0; r < n; ++r) {
        for (std::size_t k = 0; k < 5; ++k) m(r, k) = scales[k] * rng.normal() + 0.3 * static_cast<double>(k);
        m(r, 1) += 0.5 * m(r, 0);
    }
    return m;
}

void check_invariants(const Projection& p) {
    CHECK(std::abs(dot(p.axes[0], p.axes[0]) - 1.0) < 1e-10);
    CHECK(std::abs(dot(p.axes[1], p.axes[1]) - 1.0) < 1e-10);
    CHECK(std::abs(dot(p.axes[0], p.axes[1])) < 1e-10);
    CHECK(p.explained_variance[0] >= p.explained_variance[1]);
    CHECK(p.explained_variance[1] >= 0.0);
    for (const auto& axis : p.axes) {
        const auto big = std::max_element(axis.begin(), axis.end(),
                                          [](double a, double b) { return std::abs(a) < std::abs(b); });
        CHECK(*big > 0.0);
    }
}

}  // namespace

TEST_CASE("Jacobi eigensolver") {
    Rng rng(1);
    Matrix a(5, 5);
    for (std::size_t i = 0; i < 5; ++i) {
        for (std::size_t j = 0; j <= i; ++j) a(i, j) = a(j, i) = rng.uniform(-1, 1);
    }
    const SymmetricEigen e = jacobi_eigen(a);
    for (std::size_t k = 0; k + 1 < 5; ++k) CHECK(e.values[k] >= e.values[k + 1]);
    for (std::size_t k = 0; k < 5; ++k) {
        for (std::size_t i = 0; i < 5; ++i) {
            double av = 0.0;
            for (std::size_t j = 0; j < 5; ++j) av += a(i, j) * e.vectors(j, k);
            CHECK(std::abs(av - e.values[k] * e.vectors(i, k)) < 1e-10);
        }
    }
    CHECK_THROWS_AS(jacobi_eigen(Matrix(2, 3)), DomainError);
}

TEST_CASE("projection basics") {
    Rng rng(2);
    const Matrix pts = anisotropic_cloud(rng, 2000);
    const Projection p = fit_projection(pts);
    check_invariants(p);
    for (std::size_t k = 0; k < 5; ++k) {
        double mean = 0.0;
        for (std::size_t r = 0; r < pts.rows(); ++r) mean += pts(r, k);
        CHECK(p.center[k] == doctest::Approx(mean / 2000.0).epsilon(1e-12));
    }
    const auto origin = project(p, p.center);
    CHECK(origin[0] == 0.0);
    CHECK(origin[1] == 0.0);
    std::vector<double> shifted = p.center;
    for (std::size_t k = 0; k < 5; ++k) shifted[k] += p.axes[0][k];
    const auto unit = project(p, shifted);
    CHECK(std::abs(unit[0] - 1.0) < 1e-12);
    CHECK(std::abs(unit[1]) < 1e-12);
    for (std::size_t r = 0; r < 100; ++r) {
        const auto uv = project(p, pts.row(r));
        double dist2 = 0.0;
        for (std::size_t k = 0; k < 5; ++k) dist2 += (pts(r, k) - p.center[k]) * (pts(r, k) - p.center[k]);
        CHECK(uv[0] * uv[0] + uv[1] * uv[1] <= dist2 + 1e-12);
    }
    const auto back = project(p, lift(p, 0.7, -1.3));
    CHECK(std::abs(back[0] - 0.7) < 1e-12);
    CHECK(std::abs(back[1] + 1.3) < 1e-12);

    CHECK_THROWS_AS(project(p, std::vector<double>(4, 0.0)), DomainError);
    CHECK_THROWS_AS(fit_projection(Matrix(2, 5, 1.0)), DomainError);
    CHECK_THROWS_AS(fit_projection(Matrix(10, 5, 1.0)), DomainError);
}

TEST_CASE("rank-two data lies on the fitted plane") {
    Rng rng(3);
    const std::vector<double> a{0.2, -0.5, 0.1, 0.7, 0.3}, b{0.6, 0.1, -0.4, 0.0, 0.2}, c{1, 2, 3, 4, 5};
    std::vector<std::vector<double>> pts;
    for (int i = 0; i < 200; ++i) {
        const double s = rng.uniform(-2, 2), t = rng.uniform(-2, 2);
        std::vector<double> p(5);
        for (std::size_t k = 0; k < 5; ++k) p[k] = c[k] + s * a[k] + t * b[k];
        pts.push_back(p);
    }
    const Projection p = fit_projection(pts);
    check_invariants(p);
    for (const auto& pt : pts) {
        const auto uv = project(p, pt);
        const auto on_plane = lift(p, uv[0], uv[1]);
        double err = 0.0;
        for (std::size_t k = 0; k < 5; ++k) err += (on_plane[k] - pt[k]) * (on_plane[k] - pt[k]);
        CHECK(std::sqrt(err) < 1e-9);
    }
}

TEST_CASE("isotropic cloud") {
    Rng rng(4);
    Matrix pts(10000, 5);
    for (double& v : pts.values()) v = rng.normal();
    const Projection p = fit_projection(pts);
    CHECK(p.explained_variance[1] > 0.9 * p.explained_variance[0]);
}

TEST_CASE("projection invariances") {
    Rng rng(5);
    const Matrix pts = anisotropic_cloud(rng, 300);
    const Projection p = fit_projection(pts);

    Matrix reversed(pts.rows(), 5);
    for (std::size_t r = 0; r < pts.rows(); ++r) {
        std::copy(pts.row(r).begin(), pts.row(r).end(), reversed.row(pts.rows() - 1 - r).begin());
    }
    const Projection q = fit_projection(reversed);
    for (std::size_t a = 0; a < 2; ++a) {
        for (std::size_t k = 0; k < 5; ++k) CHECK(std::abs(q.axes[a][k] - p.axes[a][k]) < 1e-10);
    }

    Matrix moved = pts;
    for (std::size_t r = 0; r < moved.rows(); ++r) {
        for (std::size_t k = 0; k < 5; ++k) moved(r, k) += 10.0 - 3.0 * static_cast<double>(k);
    }
    const Projection t = fit_projection(moved);
    for (std::size_t r = 0; r < pts.rows(); ++r) {
        const auto before = project(p, pts.row(r));
        const auto after = project(t, moved.row(r));
        CHECK(std::abs(before[0] - after[0]) < 1e-10);
        CHECK(std::abs(before[1] - after[1]) < 1e-10);
    }
}

TEST_CASE("density grid") {
    Rng rng(6);
    const Projection p = fit_projection(anisotropic_cloud(rng, 500));
    const MixtureParams at_center = make_mixture({1.0}, p.center, std::vector<double>(5, 0.8), 5);
    const std::vector<std::vector<double>> extent{lift(p, -3.0, -2.0), lift(p, 2.0, 3.0)};
    const DensityGrid g = density_grid(at_center, p, 41, extent, {});
    const auto peak = std::max_element(g.values.begin(), g.values.end()) - g.values.begin();
    const double cell_u = (g.u_max - g.u_min) / 40.0, cell_v = (g.v_max - g.v_min) / 40.0;
    CHECK(std::abs(g.u_at(static_cast<std::size_t>(peak) % 41)) <= cell_u);
    CHECK(std::abs(g.v_at(static_cast<std::size_t>(peak) / 41)) <= cell_v);
    for (double v : g.values) {
        CHECK(std::isfinite(v));
        CHECK(v >= 0.0);
    }
    CHECK(g.values.size() == 41 * 41);
    CHECK_THROWS_AS(density_grid(at_center, p, 15, extent, {}), DomainError);

    // Two components in the plane and one off it; the highest mode is in-plane.
    const auto a = lift(p, 1.0, 0.5), b = lift(p, -1.2, -0.8);
    std::vector<double> off = lift(p, 0.0, 1.5);
    for (double& x : off) x += 0.5;
    std::vector<double> means;
    for (const auto& v : {a, b, off}) means.insert(means.end(), v.begin(), v.end());
    const MixtureParams mix = make_mixture({0.5, 0.3, 0.2}, means, std::vector<double>(15, 0.3), 5);
    const auto modes = find_modes(mix, DesignScaler::uniform(5, -100.0, 100.0));
    REQUIRE_FALSE(modes.empty());
    const DensityGrid mg = density_grid(mix, p, 64, extent, modes);
    const auto top = std::max_element(mg.values.begin(), mg.values.end()) - mg.values.begin();
    const auto uv = project(p, modes[0].location);
    const double cu = (mg.u_max - mg.u_min) / 63.0, cv = (mg.v_max - mg.v_min) / 63.0;
    CHECK(std::abs(mg.u_at(static_cast<std::size_t>(top) % 64) - uv[0]) <= cu);
    CHECK(std::abs(mg.v_at(static_cast<std::size_t>(top) / 64) - uv[1]) <= cv);

    REQUIRE(mg.markers.size() == modes.size());
    CHECK(mg.markers[0].label == "A1");
    for (const auto& m : mg.markers) {
        const double su = mg.u_max - mg.u_min, sv = mg.v_max - mg.v_min;
        CHECK(m.u >= mg.u_min + 0.1 * su / 1.3);
        CHECK(m.u <= mg.u_max - 0.1 * su / 1.3);
        CHECK(m.v >= mg.v_min + 0.1 * sv / 1.3);
        CHECK(m.v <= mg.v_max - 0.1 * sv / 1.3);
    }

    TempDir dir;
    emit_grid(mg, dir / "g.csv");
    const DensityGrid back = read_grid(dir / "g.csv");
    CHECK(back.resolution == mg.resolution);
    CHECK(back.u_min == mg.u_min);
    CHECK(back.v_max == mg.v_max);
    CHECK(back.values == mg.values);
    REQUIRE(back.markers.size() == mg.markers.size());
    for (std::size_t i = 0; i < back.markers.size(); ++i) {
        CHECK(back.markers[i].label == mg.markers[i].label);
        CHECK(back.markers[i].u == mg.markers[i].u);
    }
    std::size_t rows = 0;
    {
        std::ifstream in(dir / "g.csv");
        for (std::string line; std::getline(in, line);) {
            if (!line.empty() && line[0] != '#' && line[0] != 'u') ++rows;
        }
    }
    CHECK(rows == 64 * 64);

    const std::string svg = render_svg(mg);
    CHECK(svg.rfind("<svg", 0) == 0);
    for (const auto& m : mg.markers) CHECK(svg.find(">" + m.label + "<") != std::string::npos);
}
