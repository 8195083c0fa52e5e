#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <vector>

#include "pdn/duct.hpp"

namespace pdn {

struct LabelledPair {
    Structure structure;
    Spectrum spectrum;

    bool operator==(const LabelledPair&) const = default;
};

enum class Provenance : std::uint8_t { grid_uniform = 0, random_continuous = 1 };

struct Dataset {
    Geometry geometry;
    Medium medium;
    FreqGrid grid;
    std::vector<LabelledPair> pairs;
    Provenance provenance = Provenance::grid_uniform;
    std::uint64_t seed = 0;

    std::size_t size() const noexcept { return pairs.size(); }
};

bool operator==(const Dataset& lhs, const Dataset& rhs);

inline constexpr std::size_t kDefaultPairLimit = 10'000'000;

/// k * radius_max / count for k = 1..count, in metres.
std::vector<double> grid_values(std::size_t count, const Geometry& geometry);

/// Cartesian product of grid_values over all layers in lexicographic order
/// (last layer varies fastest). Throws CapacityError above `pair_limit`.
Dataset generate_grid(std::size_t values_per_layer, const Geometry& geometry, const Medium& medium,
                      const FreqGrid& grid, std::size_t pair_limit = kDefaultPairLimit);

/// Radii drawn independently and uniformly from [radius_min, radius_max].
Dataset generate_random(std::size_t n, std::uint64_t seed, const Geometry& geometry, const Medium& medium,
                        const FreqGrid& grid);

/// Oracle spectra for a batch of structures, computed in parallel and stored by index.
std::vector<Spectrum> oracle_spectra(const std::vector<Structure>& structures, const FreqGrid& grid,
                                     const Geometry& geometry, const Medium& medium);

std::vector<char> encode_dataset(const Dataset& dataset);
Dataset decode_dataset(std::vector<char> bytes);
void save_dataset(const Dataset& dataset, const std::filesystem::path& path);
Dataset load_dataset(const std::filesystem::path& path);

/// FNV-1a of the encoded dataset, hex.
std::string dataset_fingerprint(const Dataset& dataset);

/// Header r1..rL,t<f>...; radii in mm with 6 decimals, transmittances with 9.
void export_csv(const Dataset& dataset, const std::filesystem::path& path);

/// Parses a file written by export_csv back into pairs (radii in metres).
std::vector<LabelledPair> import_csv(const std::filesystem::path& path, std::size_t layer_count);

}  // namespace pdn
