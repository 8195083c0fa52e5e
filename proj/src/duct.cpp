#include "pdn/duct.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "pdn/errors.hpp"

namespace pdn {

void Medium::validate() const {
    if (!(sound_speed > 0.0) || !(density > 0.0)) {
        throw DomainError("medium: sound speed and density must be strictly positive");
    }
}

void Geometry::validate() const {
    if (!(radius_min > 0.0) || !(radius_min <= radius_max) || !(radius_max <= tube_radius)) {
        throw DomainError("geometry: need 0 < radius_min <= radius_max <= tube_radius");
    }
    if (!(layer_length > 0.0)) throw DomainError("geometry: layer_length must be positive");
    if (layer_count < 1) throw DomainError("geometry: layer_count must be at least 1");
}

void Structure::validate(const Geometry& geometry) const {
    if (radii.size() != geometry.layer_count) {
        throw DomainError("structure has " + std::to_string(radii.size()) + " layers, geometry expects " +
                          std::to_string(geometry.layer_count));
    }
    for (std::size_t i = 0; i < radii.size(); ++i) {
        const double r = radii[i];
        if (!(r >= geometry.radius_min && r <= geometry.radius_max)) {
            throw DomainError("structure radius " + std::to_string(i) + " = " + std::to_string(r) +
                              " m outside [radius_min, radius_max]");
        }
    }
}

Structure Structure::reversed() const {
    return Structure{std::vector<double>(radii.rbegin(), radii.rend())};
}

FreqGrid FreqGrid::standard() { return uniform(20.0, 20.0, 250); }

FreqGrid FreqGrid::uniform(double first_hz, double step_hz, std::size_t count) {
    FreqGrid grid;
    grid.frequencies.reserve(count);
    for (std::size_t i = 0; i < count; ++i) {
        grid.frequencies.push_back(first_hz + step_hz * static_cast<double>(i));
    }
    grid.validate();
    return grid;
}

void FreqGrid::validate() const {
    if (frequencies.empty()) throw DomainError("frequency grid is empty");
    for (std::size_t i = 0; i < frequencies.size(); ++i) {
        if (!(frequencies[i] > 0.0)) throw DomainError("frequency grid entries must be positive");
        if (i > 0 && !(frequencies[i] > frequencies[i - 1])) {
            throw DomainError("frequency grid must be strictly increasing");
        }
    }
}

TwoPort operator*(const TwoPort& lhs, const TwoPort& rhs) noexcept {
    return TwoPort{lhs.a * rhs.a + lhs.b * rhs.c, lhs.a * rhs.b + lhs.b * rhs.d,
                   lhs.c * rhs.a + lhs.d * rhs.c, lhs.c * rhs.b + lhs.d * rhs.d};
}

double characteristic_impedance(double radius, const Medium& medium) {
    return medium.density * medium.sound_speed / (std::numbers::pi * radius * radius);
}

double plane_wave_cutoff(const Geometry& geometry, const Medium& medium) {
    return 1.8412 * medium.sound_speed / (2.0 * std::numbers::pi * geometry.tube_radius);
}

bool within_plane_wave_range(const FreqGrid& grid, const Geometry& geometry, const Medium& medium) {
    return grid.frequencies.empty() || grid.frequencies.back() < plane_wave_cutoff(geometry, medium);
}

TwoPort segment_matrix(double radius, double length, double frequency, const Medium& medium) {
    if (!(radius > 0.0) || !(length > 0.0) || !(frequency > 0.0)) {
        throw DomainError("segment_matrix: radius, length and frequency must be positive");
    }
    const double kl = 2.0 * std::numbers::pi * frequency / medium.sound_speed * length;
    const double zc = characteristic_impedance(radius, medium);
    const double cs = std::cos(kl);
    const double sn = std::sin(kl);
    return TwoPort{{cs, 0.0}, {0.0, zc * sn}, {0.0, sn / zc}, {cs, 0.0}};
}

TwoPort cascade(const Structure& structure, double frequency, const Geometry& geometry,
                const Medium& medium) {
    TwoPort total;
    for (double r : structure.radii) {
        total = total * segment_matrix(r, geometry.layer_length, frequency, medium);
    }
    return total;
}

Scattering scattering(const TwoPort& t, double terminal_impedance) noexcept {
    const double z0 = terminal_impedance;
    const std::complex<double> denom = t.a + t.b / z0 + t.c * z0 + t.d;
    return Scattering{2.0 / denom, (t.a + t.b / z0 - t.c * z0 - t.d) / denom};
}

Spectrum transmission(const Structure& structure, const FreqGrid& grid, const Geometry& geometry,
                      const Medium& medium) {
    geometry.validate();
    medium.validate();
    structure.validate(geometry);
    const double z0 = characteristic_impedance(geometry.tube_radius, medium);
    Spectrum out;
    out.transmittance.reserve(grid.size());
    for (double f : grid.frequencies) {
        const std::complex<double> t = scattering(cascade(structure, f, geometry, medium), z0).transmitted;
        out.transmittance.push_back(std::norm(t));
    }
    return out;
}

double spectrum_error(std::span<const double> predicted, std::span<const double> target) {
    if (predicted.size() != target.size()) {
        throw DomainError("spectrum_error: length mismatch (" + std::to_string(predicted.size()) + " vs " +
                          std::to_string(target.size()) + ")");
    }
    if (predicted.empty()) return 0.0;
    double sum = 0.0;
    for (std::size_t i = 0; i < predicted.size(); ++i) sum += std::abs(predicted[i] - target[i]);
    return sum / static_cast<double>(predicted.size());
}

double spectrum_error(const Spectrum& predicted, const Spectrum& target) {
    return spectrum_error(predicted.transmittance, target.transmittance);
}

}  // namespace pdn
