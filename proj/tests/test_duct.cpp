#include <cmath>
#include <numbers>

#include "doctest.h"
#include "oracles.hpp"
#include "pdn/duct.hpp"
#include "pdn/errors.hpp"
#include "pdn/rng.hpp"

using namespace pdn;

namespace {

Structure random_structure(Rng& rng, const Geometry& g) {
    Structure s;
    for (std::size_t k = 0; k < g.layer_count; ++k) s.radii.push_back(rng.uniform(g.radius_min, g.radius_max));
    return s;
}

}  // namespace

TEST_CASE("segment matrix is unimodular") {
    const Medium air;
    Rng rng(3);
    for (int i = 0; i < 200; ++i) {
        const TwoPort t = segment_matrix(rng.uniform(1e-3, 0.02), rng.uniform(1e-3, 0.1), rng.uniform(10, 6000), air);
        CHECK(std::abs(t.determinant() - std::complex<double>(1.0, 0.0)) < 1e-9);
    }
}

TEST_CASE("zero-length limit is the identity") {
    const TwoPort t = segment_matrix(0.00725, 1e-14, 1000.0, Medium{});
    CHECK(std::abs(t.a - 1.0) < 1e-9);
    // b and c carry the characteristic impedance Zc and 1/Zc.
    const Medium air;
    const double zc = air.density * air.sound_speed / (std::numbers::pi * 0.00725 * 0.00725);
    CHECK(std::abs(t.b) / zc < 1e-9);
    CHECK(std::abs(t.c) * zc < 1e-9);
    CHECK(std::abs(t.d - 1.0) < 1e-9);
}

TEST_CASE("quarter-wave segment entries") {
    const Medium air;
    const double length = 0.020;
    const double f = air.sound_speed / (4.0 * length);
    const double r = 0.00725;
    const TwoPort t = segment_matrix(r, length, f, air);
    const double zc = air.density * air.sound_speed / (std::numbers::pi * r * r);
    CHECK(std::abs(t.a) < 1e-9);
    CHECK(std::abs(t.d) < 1e-9);
    CHECK(std::abs(t.b - std::complex<double>(0.0, zc)) < 1e-9 * zc);
    CHECK(std::abs(t.c - std::complex<double>(0.0, 1.0 / zc)) < 1e-9 / zc);
}

TEST_CASE("segment matrix rejects non-positive inputs") {
    const Medium air;
    CHECK_THROWS_AS(segment_matrix(0.0, 0.02, 100.0, air), DomainError);
    CHECK_THROWS_AS(segment_matrix(0.01, -0.02, 100.0, air), DomainError);
    CHECK_THROWS_AS(segment_matrix(0.01, 0.02, 0.0, air), DomainError);
}

TEST_CASE("open tube transmits everything") {
    const Geometry g;
    const Spectrum s = transmission(Structure{std::vector<double>(5, g.tube_radius)}, FreqGrid::standard(), g, Medium{});
    REQUIRE(s.size() == 250);
    for (double t : s.transmittance) CHECK(std::abs(t - 1.0) < 1e-12);
}

TEST_CASE("single constriction at the quarter-wave frequency") {
    const Geometry g;
    const Medium air;
    Structure s{std::vector<double>(5, g.tube_radius)};
    s.radii[2] = 0.00725;
    const FreqGrid at{{air.sound_speed / (4.0 * g.layer_length)}};
    const double tau = transmission(s, at, g, air).transmittance[0];
    CHECK(tau == doctest::Approx(oracle::quarter_wave_transmission(g.tube_radius, 0.00725)).epsilon(1e-12));
    CHECK(std::abs(tau - 0.221453) < 1e-6);
}

TEST_CASE("transfer matrices agree with impedance translation") {
    const Geometry g;
    const Medium air;
    const FreqGrid grid = FreqGrid::standard();
    Rng rng(11);
    for (int trial = 0; trial < 20; ++trial) {
        const Structure s = random_structure(rng, g);
        const Spectrum spec = transmission(s, grid, g, air);
        for (std::size_t i = 0; i < grid.size(); ++i) {
            const double ref = oracle::impedance_transmission(s.radii, g.layer_length, g.tube_radius,
                                                              grid.frequencies[i], air.sound_speed, air.density);
            CHECK(std::abs(spec.transmittance[i] - ref) < 1e-9);
        }
    }
}

TEST_CASE("energy conservation, reciprocity and unimodular cascades") {
    const Geometry g;
    const Medium air;
    const FreqGrid grid = FreqGrid::standard();
    const double z0 = characteristic_impedance(g.tube_radius, air);
    Rng rng(5);
    for (int trial = 0; trial < 30; ++trial) {
        const Structure s = random_structure(rng, g);
        const Spectrum fwd = transmission(s, grid, g, air);
        const Spectrum rev = transmission(s.reversed(), grid, g, air);
        for (std::size_t i = 0; i < grid.size(); ++i) {
            const TwoPort t = cascade(s, grid.frequencies[i], g, air);
            const Scattering sc = scattering(t, z0);
            CHECK(std::abs(std::norm(sc.transmitted) + std::norm(sc.reflected) - 1.0) < 1e-9);
            CHECK(std::abs(t.determinant() - 1.0) < 1e-9);
            CHECK(std::abs(fwd.transmittance[i] - rev.transmittance[i]) < 1e-9);
            CHECK(fwd.transmittance[i] >= 0.0);
            CHECK(fwd.transmittance[i] <= 1.0 + 1e-9);
        }
    }
}

TEST_CASE("transmission approaches one as radii approach the tube") {
    const Geometry g;
    const Medium air;
    const FreqGrid grid = FreqGrid::standard();
    double previous = 1.0;
    for (double gap : {0.5, 0.1, 0.01, 0.001}) {
        const Structure s{std::vector<double>(5, g.tube_radius * (1.0 - gap))};
        double worst = 0.0;
        for (double t : transmission(s, grid, g, air).transmittance) worst = std::max(worst, 1.0 - t);
        CHECK(worst <= previous);
        previous = worst;
    }
    CHECK(previous < 1e-5);
}

TEST_CASE("transmission is deterministic and validates structures") {
    const Geometry g;
    const Medium air;
    const FreqGrid grid = FreqGrid::standard();
    const Structure s{{0.004, 0.012, 0.009, 0.006, 0.013}};
    CHECK(transmission(s, grid, g, air) == transmission(s, grid, g, air));
    CHECK_THROWS_AS(transmission(Structure{{0.004, 0.012}}, grid, g, air), DomainError);
    CHECK_THROWS_AS(transmission(Structure{{0.001, 0.012, 0.009, 0.006, 0.013}}, grid, g, air), DomainError);
}

TEST_CASE("spectrum error") {
    const std::vector<double> zeros(250, 0.0), ones(250, 1.0);
    CHECK(spectrum_error(zeros, zeros) == 0.0);
    CHECK(spectrum_error(zeros, ones) == doctest::Approx(1.0).epsilon(1e-15));
    std::vector<double> target(250, 0.3), shifted = target;
    for (std::size_t i = 0; i < 125; ++i) shifted[i] += 0.1;
    CHECK(spectrum_error(shifted, target) == doctest::Approx(0.05).epsilon(1e-12));
    CHECK_THROWS_AS(spectrum_error(std::vector<double>(3), std::vector<double>(4)), DomainError);
}

TEST_CASE("plane-wave cutoff of the default tube") {
    const Geometry g;
    const Medium air;
    CHECK(plane_wave_cutoff(g, air) == doctest::Approx(1.8412 * 343.0 / (2.0 * std::numbers::pi * 0.0145)));
    CHECK(plane_wave_cutoff(g, air) == doctest::Approx(6932).epsilon(1e-3));
    CHECK(within_plane_wave_range(FreqGrid::standard(), g, air));
    CHECK_FALSE(within_plane_wave_range(FreqGrid::uniform(1000, 1000, 8), g, air));
}

TEST_CASE("geometry, medium and grid validation") {
    Geometry g;
    g.radius_min = 0.02;
    CHECK_THROWS_AS(g.validate(), DomainError);
    CHECK_THROWS_AS((Medium{0.0, 1.2}.validate()), DomainError);
    CHECK_THROWS_AS((FreqGrid{{20, 10}}.validate()), DomainError);
    CHECK_THROWS_AS((FreqGrid{{}}.validate()), DomainError);
    const FreqGrid std_grid = FreqGrid::standard();
    CHECK(std_grid.size() == 250);
    CHECK(std_grid.frequencies.front() == 20.0);
    CHECK(std_grid.frequencies.back() == 5000.0);
}
