#pragma once

// Baseline comparison: every model kind is scored through the physics oracle
// on held-out target spectra.
//
// Per target, the designs are all modes of the mixture (pdn) or the single
// prediction (ann, tnn), clamped to the physical range. The error of a target
// is the mean absolute spectrum error of the best design; variety counts the
// designs that are pairwise at least `variety_threshold` apart in L-infinity.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "pdn/duct.hpp"
#include "pdn/matrix.hpp"
#include "pdn/model.hpp"
#include "pdn/modes.hpp"

namespace pdn {

/// Physical design -> spectrum on the model's grid.
using Oracle = std::function<std::vector<double>(std::span<const double> design)>;

Oracle duct_oracle(const Geometry& geometry, const Medium& medium, const FreqGrid& grid);
/// x -> {x^2}, the forward map of the toy tasks.
Oracle parabola_oracle();

/// Physical designs the model proposes for one input spectrum, best first.
std::vector<std::vector<double>> designs_for(const InverseModel& model, std::span<const double> input,
                                             const SeekerConfig& seeker);

/// Greedy count of designs pairwise >= threshold apart (L-infinity), in rank order.
std::size_t variety(std::span<const std::vector<double>> designs, double threshold);

struct TargetScore {
    double best_error = 0.0;
    double rank1_error = 0.0;
    std::size_t designs = 0;
    std::size_t variety = 0;
};

struct EvalSettings {
    SeekerConfig seeker;
    double variety_threshold = 0.002;  // physical units (2 mm for ducts)
};

/// Scores every row of `targets`; rows are independent and evaluated in parallel.
std::vector<TargetScore> score_targets(const InverseModel& model, const Matrix& targets, const Oracle& oracle,
                                       const EvalSettings& settings);

struct ReportRow {
    ModelKind kind = ModelKind::pdn;
    double train_error = 0.0;
    double test_error = 0.0;
    double time_s = 0.0;
    double variety_mean = 0.0;
    std::size_t variety_max = 0;
    std::string status = "ok";

    bool operator==(const ReportRow&) const = default;
};

struct Report {
    std::vector<ReportRow> rows;
    std::vector<std::string> metadata;  // emitted as '#' lines

    bool operator==(const Report&) const = default;
};

ReportRow evaluate(const InverseModel& model, const Matrix& train_targets, const Matrix& test_targets,
                   const Oracle& oracle, const EvalSettings& settings, double time_s);

/// Trains each kind in turn on `train` with the shared config and evaluates
/// on `test` (spectra in inputs). A failing model gets a status note, the
/// others still run. `gate` scores the tnn forward net (defaults to `test`).
Report run_comparison(std::span<const ModelKind> kinds, const TrainingSet& train, const TrainingSet& test,
                      const TrainConfig& config, const Oracle& oracle, const EvalSettings& settings,
                      const TrainingSet* gate = nullptr, std::size_t train_eval_limit = 200);

/// CSV: kind,train_error,test_error,time_s,variety_mean,variety_max,status.
void emit_report(const Report& report, const std::filesystem::path& path);
Report parse_report(const std::filesystem::path& path);

/// Content hash of a report file ignoring '#' lines and the time_s column.
std::string report_digest(const std::filesystem::path& path);

/// {(x^2, x) : x uniform in [-1, 1]}.
TrainingSet inverse_parabola(std::size_t n, std::uint64_t seed);
/// y uniform in [0, 1], each y labelled with both +sqrt(y) and -sqrt(y) (2n rows).
TrainingSet two_branch(std::size_t n, std::uint64_t seed);

}  // namespace pdn
