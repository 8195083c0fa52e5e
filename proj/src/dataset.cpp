#include "pdn/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <string>

#include "pdn/binary_io.hpp"
#include "pdn/csv.hpp"
#include "pdn/errors.hpp"
#include "pdn/parallel.hpp"
#include "pdn/rng.hpp"

namespace pdn {

namespace {

constexpr std::string_view kMagic = "PDND";
constexpr std::uint32_t kVersion = 1;

}  // namespace

bool operator==(const Dataset& lhs, const Dataset& rhs) {
    const auto geom = [](const Geometry& g) {
        return std::tuple(g.tube_radius, g.layer_length, g.layer_count, g.radius_min, g.radius_max);
    };
    return geom(lhs.geometry) == geom(rhs.geometry) && lhs.medium.sound_speed == rhs.medium.sound_speed &&
           lhs.medium.density == rhs.medium.density && lhs.grid == rhs.grid && lhs.pairs == rhs.pairs &&
           lhs.provenance == rhs.provenance && lhs.seed == rhs.seed;
}

std::vector<double> grid_values(std::size_t count, const Geometry& geometry) {
    if (count == 0) throw DomainError("grid_values: count must be at least 1");
    std::vector<double> values(count);
    for (std::size_t k = 1; k <= count; ++k) {
        values[k - 1] = static_cast<double>(k) * geometry.radius_max / static_cast<double>(count);
    }
    return values;
}

std::vector<Spectrum> oracle_spectra(const std::vector<Structure>& structures, const FreqGrid& grid,
                                     const Geometry& geometry, const Medium& medium) {
    std::vector<Spectrum> out(structures.size());
    parallel_for(
        structures.size(), [&](std::size_t i) { out[i] = transmission(structures[i], grid, geometry, medium); }, 64);
    return out;
}

namespace {

Dataset assemble(std::vector<Structure> structures, const Geometry& geometry, const Medium& medium,
                 const FreqGrid& grid) {
    Dataset ds;
    ds.geometry = geometry;
    ds.medium = medium;
    ds.grid = grid;
    auto spectra = oracle_spectra(structures, grid, geometry, medium);
    ds.pairs.reserve(structures.size());
    for (std::size_t i = 0; i < structures.size(); ++i) {
        ds.pairs.push_back(LabelledPair{std::move(structures[i]), std::move(spectra[i])});
    }
    return ds;
}

}  // namespace

Dataset generate_grid(std::size_t values_per_layer, const Geometry& geometry, const Medium& medium,
                      const FreqGrid& grid, std::size_t pair_limit) {
    geometry.validate();
    medium.validate();
    grid.validate();
    const auto values = grid_values(values_per_layer, geometry);
    std::size_t total = 1;
    for (std::size_t l = 0; l < geometry.layer_count; ++l) {
        if (total > pair_limit / values_per_layer) {
            throw CapacityError("grid dataset would exceed the pair limit of " + std::to_string(pair_limit));
        }
        total *= values_per_layer;
    }
    std::vector<Structure> structures;
    structures.reserve(total);
    std::vector<std::size_t> digits(geometry.layer_count, 0);
    for (std::size_t i = 0; i < total; ++i) {
        Structure s;
        s.radii.reserve(geometry.layer_count);
        for (std::size_t d : digits) s.radii.push_back(values[d]);
        structures.push_back(std::move(s));
        for (std::size_t l = geometry.layer_count; l-- > 0;) {
            if (++digits[l] < values_per_layer) break;
            digits[l] = 0;
        }
    }
    Dataset ds = assemble(std::move(structures), geometry, medium, grid);
    ds.provenance = Provenance::grid_uniform;
    return ds;
}

Dataset generate_random(std::size_t n, std::uint64_t seed, const Geometry& geometry, const Medium& medium,
                        const FreqGrid& grid) {
    if (n == 0) throw DomainError("generate_random: n must be at least 1");
    geometry.validate();
    medium.validate();
    grid.validate();
    Rng rng(seed);
    std::vector<Structure> structures(n);
    for (auto& s : structures) {
        s.radii.resize(geometry.layer_count);
        for (double& r : s.radii) r = rng.uniform(geometry.radius_min, geometry.radius_max);
    }
    Dataset ds = assemble(std::move(structures), geometry, medium, grid);
    ds.provenance = Provenance::random_continuous;
    ds.seed = seed;
    return ds;
}

std::vector<char> encode_dataset(const Dataset& ds) {
    io::ByteWriter w;
    w.put_bytes(kMagic);
    w.put_u32(kVersion);
    w.put_u32(static_cast<std::uint32_t>(ds.geometry.layer_count));
    w.put_u32(static_cast<std::uint32_t>(ds.grid.size()));
    w.put_u64(ds.pairs.size());
    w.put_f64(ds.geometry.tube_radius);
    w.put_f64(ds.geometry.layer_length);
    w.put_f64(ds.geometry.radius_min);
    w.put_f64(ds.geometry.radius_max);
    w.put_f64(ds.medium.sound_speed);
    w.put_f64(ds.medium.density);
    w.put_u8(static_cast<std::uint8_t>(ds.provenance));
    w.put_u64(ds.seed);
    w.put_f64s(ds.grid.frequencies);
    for (const auto& pair : ds.pairs) {
        if (pair.structure.radii.size() != ds.geometry.layer_count || pair.spectrum.size() != ds.grid.size()) {
            throw DomainError("encode_dataset: pair shape disagrees with dataset header");
        }
        w.put_f64s(pair.structure.radii);
        w.put_f64s(pair.spectrum.transmittance);
    }
    return w.bytes();
}

Dataset decode_dataset(std::vector<char> bytes) {
    io::ByteReader r(std::move(bytes));
    r.expect_magic(kMagic);
    const auto version_offset = r.offset();
    const std::uint32_t version = r.get_u32("version");
    if (version != kVersion) {
        throw FormatError("unsupported dataset format version " + std::to_string(version) + " (this build reads " +
                              std::to_string(kVersion) + "); regenerate the dataset with gen-data",
                          version_offset);
    }
    Dataset ds;
    ds.geometry.layer_count = r.get_u32("layer_count");
    const std::uint32_t grid_len = r.get_u32("grid length");
    const std::uint64_t count = r.get_u64("pair count");
    ds.geometry.tube_radius = r.get_f64("geometry");
    ds.geometry.layer_length = r.get_f64("geometry");
    ds.geometry.radius_min = r.get_f64("geometry");
    ds.geometry.radius_max = r.get_f64("geometry");
    ds.medium.sound_speed = r.get_f64("medium");
    ds.medium.density = r.get_f64("medium");
    const auto tag_offset = r.offset();
    const std::uint8_t tag = r.get_u8("provenance");
    if (tag > 1) throw FormatError("unknown provenance tag " + std::to_string(tag), tag_offset);
    ds.provenance = static_cast<Provenance>(tag);
    ds.seed = r.get_u64("seed");
    ds.grid.frequencies.resize(grid_len);
    r.get_f64s(ds.grid.frequencies, "frequency grid");
    const std::uint64_t record = 8ULL * (ds.geometry.layer_count + grid_len);
    if (record == 0 || count > r.remaining() / record) {
        throw FormatError("truncated file: header promises " + std::to_string(count) + " pairs", r.offset());
    }
    ds.pairs.resize(count);
    for (auto& pair : ds.pairs) {
        pair.structure.radii.resize(ds.geometry.layer_count);
        pair.spectrum.transmittance.resize(grid_len);
        r.get_f64s(pair.structure.radii, "radii");
        r.get_f64s(pair.spectrum.transmittance, "transmittances");
    }
    r.expect_end();
    return ds;
}

void save_dataset(const Dataset& dataset, const std::filesystem::path& path) {
    io::write_file(path, encode_dataset(dataset));
}

Dataset load_dataset(const std::filesystem::path& path) { return decode_dataset(io::read_file(path)); }

std::string dataset_fingerprint(const Dataset& dataset) {
    return io::hex64(io::fnv1a(encode_dataset(dataset)));
}

void export_csv(const Dataset& ds, const std::filesystem::path& path) {
    std::ostringstream out;
    for (std::size_t l = 0; l < ds.geometry.layer_count; ++l) out << (l ? "," : "") << 'r' << (l + 1);
    for (double f : ds.grid.frequencies) out << ",t" << csv::format_number(f);
    out << '\n';
    for (const auto& pair : ds.pairs) {
        for (std::size_t l = 0; l < pair.structure.radii.size(); ++l) {
            out << (l ? "," : "") << csv::fixed(pair.structure.radii[l] * 1e3, 6);
        }
        for (double t : pair.spectrum.transmittance) out << ',' << csv::fixed(t, 9);
        out << '\n';
    }
    io::write_text(path, out.str());
}

std::vector<LabelledPair> import_csv(const std::filesystem::path& path, std::size_t layer_count) {
    const auto table = csv::read_numeric(path);
    std::vector<LabelledPair> pairs;
    pairs.reserve(table.rows.size());
    for (const auto& row : table.rows) {
        if (row.size() < layer_count) throw DomainError("csv has fewer columns than layers");
        LabelledPair pair;
        for (std::size_t l = 0; l < layer_count; ++l) pair.structure.radii.push_back(row[l] * 1e-3);
        pair.spectrum.transmittance.assign(row.begin() + static_cast<std::ptrdiff_t>(layer_count), row.end());
        pairs.push_back(std::move(pair));
    }
    return pairs;
}

}  // namespace pdn
