#pragma once

// Orchestration behind the command-line tool.
//
// Configuration is a flat `key = value` text file; every key has a default
// and unknown keys are rejected. Precedence is flags > file > defaults. Each
// command writes its effective configuration next to its main artifact as
// `<artifact>.config`.

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "pdn/duct.hpp"
#include "pdn/model.hpp"
#include "pdn/modes.hpp"
#include "pdn/rivals.hpp"

namespace pdn {

struct ConfigKey {
    std::string_view name;
    std::string_view default_value;
    std::string_view doc;
};

/// Every accepted key, in serialization order.
std::span<const ConfigKey> config_keys();

class RunConfig {
public:
    RunConfig();

    /// Throws DomainError for unknown keys or malformed values.
    void set(std::string_view key, std::string_view value);
    /// `key=value` as given on the command line.
    void set_assignment(std::string_view assignment);
    void merge_file(const std::filesystem::path& path);
    void merge_text(std::string_view text);

    const std::string& get(std::string_view key) const;
    double number(std::string_view key) const;
    std::size_t count(std::string_view key) const;
    std::uint64_t seed(std::string_view key) const;
    bool flag(std::string_view key) const;
    std::vector<std::string> list(std::string_view key) const;

    Geometry geometry() const;
    Medium medium() const;
    FreqGrid grid() const;
    TrainConfig train() const;
    SeekerConfig seeker() const;

    /// Every key with its current value, defaults materialized.
    std::string to_text() const;
    void write_beside(const std::filesystem::path& artifact) const;

private:
    std::map<std::string, std::string, std::less<>> values_;
};

/// Target spectrum on `grid` from a spec string:
///   bandgap:LO-HI   0 inside [LO, HI] Hz, 1 elsewhere
///   peak:F          1 within +-width/2 of F Hz, 0 elsewhere
///   structure:R1,.. oracle spectrum of the given radii in mm
///   <path>          CSV with frequency_hz,transmittance columns
/// CSV targets are linearly resampled; every value is clipped to [0, 1].
Spectrum resolve_target(std::string_view spec, const FreqGrid& grid, double peak_width_hz, const Geometry& geometry,
                        const Medium& medium);

/// Linear interpolation of (frequencies, values) onto `grid`. Throws
/// IncompatibleError when the grid reaches outside the sampled range.
std::vector<double> resample(std::span<const double> frequencies, std::span<const double> values, const FreqGrid& grid);

struct GenDataRequest {
    std::filesystem::path out;
    std::optional<std::filesystem::path> csv;
};
void cmd_gen_data(const RunConfig& config, const GenDataRequest& request, std::ostream& report);

struct TrainRequest {
    std::filesystem::path data;
    std::filesystem::path out;
    std::optional<std::filesystem::path> log;  // default: <out>.log.csv
};
/// Throws TrainingError after checkpointing the last good epoch.
void cmd_train(const RunConfig& config, const TrainRequest& request, std::ostream& report);

struct DesignRequest {
    std::filesystem::path weights;
    std::string target;
    std::filesystem::path out;
    std::optional<std::filesystem::path> pca_grid;
    std::optional<std::filesystem::path> svg;
};
void cmd_design(const RunConfig& config, const DesignRequest& request, std::ostream& report);

struct VerifyRequest {
    std::filesystem::path designs;
    std::string target;
    std::filesystem::path out;
};
/// Rows: rank 0 is the target itself, then one row per design.
void cmd_verify(const RunConfig& config, const VerifyRequest& request, std::ostream& report);

struct CompareRequest {
    std::filesystem::path data;
    std::filesystem::path out;
};
void cmd_compare(const RunConfig& config, const CompareRequest& request, std::ostream& report);

/// Exit status for an exception escaping a command.
int exit_code_for(const std::exception& error) noexcept;

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitCapacity = 3;
inline constexpr int kExitIo = 4;
inline constexpr int kExitTraining = 5;
inline constexpr int kExitIncompatible = 6;

}  // namespace pdn
