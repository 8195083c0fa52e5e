#pragma once

// Plane-wave transfer-matrix model of a layered duct metastructure.
//
// The metastructure is a chain of coaxial cylindrical air channels of equal
// axial length mounted in a rigid reference tube. Each channel is a lossless
// uniform segment; the chain is terminated anechoically by the reference tube
// on both sides. Pressure / volume-velocity convention throughout.

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

namespace pdn {

struct Medium {
    double sound_speed = 343.0;  // m/s
    double density = 1.21;       // kg/m^3

    void validate() const;
};

struct Geometry {
    double tube_radius = 0.0145;   // m
    double layer_length = 0.020;   // m
    std::size_t layer_count = 5;
    double radius_min = 0.0018125; // m
    double radius_max = 0.0145;    // m

    void validate() const;
};

/// Layer radii in metres, ordered along the propagation direction.
struct Structure {
    std::vector<double> radii;

    void validate(const Geometry& geometry) const;
    Structure reversed() const;
    bool operator==(const Structure&) const = default;
};

struct FreqGrid {
    std::vector<double> frequencies;  // Hz, strictly increasing

    /// 20, 40, ..., 5000 Hz.
    static FreqGrid standard();
    static FreqGrid uniform(double first_hz, double step_hz, std::size_t count);

    std::size_t size() const noexcept { return frequencies.size(); }
    void validate() const;
    bool operator==(const FreqGrid&) const = default;
};

struct Spectrum {
    std::vector<double> transmittance;

    std::size_t size() const noexcept { return transmittance.size(); }
    bool operator==(const Spectrum&) const = default;
};

struct TwoPort {
    std::complex<double> a{1.0, 0.0};
    std::complex<double> b{0.0, 0.0};
    std::complex<double> c{0.0, 0.0};
    std::complex<double> d{1.0, 0.0};

    std::complex<double> determinant() const noexcept { return a * d - b * c; }
    friend TwoPort operator*(const TwoPort& lhs, const TwoPort& rhs) noexcept;
};

/// Complex transmission and reflection amplitudes of a two-port between
/// identical terminations of impedance `terminal_impedance`.
struct Scattering {
    std::complex<double> transmitted;
    std::complex<double> reflected;
};

/// Characteristic acoustic impedance rho*c / (pi r^2) of a circular duct.
double characteristic_impedance(double radius, const Medium& medium);

/// First non-planar mode cutoff of the reference tube: 1.8412 c / (2 pi R).
double plane_wave_cutoff(const Geometry& geometry, const Medium& medium);
bool within_plane_wave_range(const FreqGrid& grid, const Geometry& geometry, const Medium& medium);

TwoPort segment_matrix(double radius, double length, double frequency, const Medium& medium);

/// Cascade T = T1 * T2 * ... * TL at one frequency.
TwoPort cascade(const Structure& structure, double frequency, const Geometry& geometry,
                const Medium& medium);

Scattering scattering(const TwoPort& t, double terminal_impedance) noexcept;

/// Power transmission |t|^2 on every grid frequency.
Spectrum transmission(const Structure& structure, const FreqGrid& grid, const Geometry& geometry,
                      const Medium& medium);

/// Mean absolute transmittance difference.
double spectrum_error(std::span<const double> predicted, std::span<const double> target);
double spectrum_error(const Spectrum& predicted, const Spectrum& target);

}  // namespace pdn
