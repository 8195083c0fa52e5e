#include "pdn/rivals.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "pdn/binary_io.hpp"
#include "pdn/csv.hpp"
#include "pdn/errors.hpp"
#include "pdn/parallel.hpp"
#include "pdn/rng.hpp"

namespace pdn {

Oracle duct_oracle(const Geometry& geometry, const Medium& medium, const FreqGrid& grid) {
    return [geometry, medium, grid](std::span<const double> design) {
        Structure s{std::vector<double>(design.begin(), design.end())};
        return transmission(s, grid, geometry, medium).transmittance;
    };
}

Oracle parabola_oracle() {
    return [](std::span<const double> design) { return std::vector<double>{design[0] * design[0]}; };
}

std::vector<std::vector<double>> designs_for(const InverseModel& model, std::span<const double> input,
                                             const SeekerConfig& seeker) {
    if (input.size() != model.input_dim()) {
        throw IncompatibleError("target has " + std::to_string(input.size()) + " samples, model expects " +
                                std::to_string(model.input_dim()));
    }
    std::vector<std::vector<double>> out;
    if (model.kind == ModelKind::pdn) {
        for (const Mode& mode : find_modes(mixture_for(model, input), model.scaler, seeker)) {
            out.push_back(mode.structure.radii);
        }
        return out;
    }
    Matrix one(1, input.size());
    std::copy(input.begin(), input.end(), one.row(0).begin());
    const Matrix design = predict_design(model, one);
    out.push_back(model.scaler.to_physical_clamped(design.row(0)));
    return out;
}

std::size_t variety(std::span<const std::vector<double>> designs, double threshold) {
    std::vector<const std::vector<double>*> kept;
    for (const auto& candidate : designs) {
        const bool distinct = std::all_of(kept.begin(), kept.end(), [&](const std::vector<double>* other) {
            double dist = 0.0;
            for (std::size_t k = 0; k < candidate.size(); ++k) dist = std::max(dist, std::abs(candidate[k] - (*other)[k]));
            return dist >= threshold;
        });
        if (distinct) kept.push_back(&candidate);
    }
    return kept.size();
}

std::vector<TargetScore> score_targets(const InverseModel& model, const Matrix& targets, const Oracle& oracle,
                                       const EvalSettings& settings) {
    std::vector<TargetScore> scores(targets.rows());
    parallel_for(targets.rows(), [&](std::size_t i) {
        const auto target = targets.row(i);
        const auto designs = designs_for(model, target, settings.seeker);
        TargetScore score;
        score.designs = designs.size();
        score.variety = variety(designs, settings.variety_threshold);
        score.best_error = std::numeric_limits<double>::infinity();
        for (std::size_t k = 0; k < designs.size(); ++k) {
            const double err = spectrum_error(oracle(designs[k]), target);
            if (k == 0) score.rank1_error = err;
            score.best_error = std::min(score.best_error, err);
        }
        scores[i] = score;
    });
    return scores;
}

namespace {

double mean_best(const std::vector<TargetScore>& scores) {
    if (scores.empty()) return 0.0;
    double total = 0.0;
    for (const auto& s : scores) total += s.best_error;
    return total / static_cast<double>(scores.size());
}

Matrix subsample_rows(const Matrix& rows, std::size_t limit) {
    if (rows.rows() <= limit) return rows;
    std::vector<std::size_t> picks(limit);
    for (std::size_t k = 0; k < limit; ++k) picks[k] = k * rows.rows() / limit;
    return gather_rows(rows, picks);
}

std::string clean_status(std::string s) {
    std::replace(s.begin(), s.end(), ',', ';');
    std::replace(s.begin(), s.end(), '\n', ' ');
    return s;
}

}  // namespace

ReportRow evaluate(const InverseModel& model, const Matrix& train_targets, const Matrix& test_targets,
                   const Oracle& oracle, const EvalSettings& settings, double time_s) {
    ReportRow row;
    row.kind = model.kind;
    row.time_s = time_s;
    row.train_error = mean_best(score_targets(model, train_targets, oracle, settings));
    const auto test = score_targets(model, test_targets, oracle, settings);
    row.test_error = mean_best(test);
    double varieties = 0.0;
    for (const auto& s : test) {
        varieties += static_cast<double>(s.variety);
        row.variety_max = std::max(row.variety_max, s.variety);
    }
    row.variety_mean = test.empty() ? 0.0 : varieties / static_cast<double>(test.size());
    return row;
}

Report run_comparison(std::span<const ModelKind> kinds, const TrainingSet& train, const TrainingSet& test,
                      const TrainConfig& config, const Oracle& oracle, const EvalSettings& settings,
                      const TrainingSet* gate, std::size_t train_eval_limit) {
    Report report;
    const Matrix train_targets = subsample_rows(train.inputs, train_eval_limit);
    for (ModelKind kind : kinds) {
        ReportRow row;
        row.kind = kind;
        try {
            TrainOutcome outcome;
            std::string status = "ok";
            switch (kind) {
                case ModelKind::pdn: outcome = train_pdn(train, config); break;
                case ModelKind::ann: outcome = train_ann(train, config); break;
                case ModelKind::tnn: {
                    TandemOutcome t = train_tnn(train, config, gate ? gate : &test);
                    if (t.gated) status = "gated: " + t.outcome.message;
                    outcome = std::move(t.outcome);
                    break;
                }
                default: throw DomainError("run_comparison: cannot train model kind " + to_string(kind));
            }
            if (outcome.diverged) status = "diverged: " + outcome.message;
            row = evaluate(outcome.model, train_targets, test.inputs, oracle, settings, outcome.seconds);
            row.status = clean_status(status);
        } catch (const std::exception& e) {
            row.status = clean_status(std::string("failed: ") + e.what());
        }
        report.rows.push_back(row);
    }
    return report;
}

namespace {

constexpr const char* kReportHeader = "kind,train_error,test_error,time_s,variety_mean,variety_max,status";

}  // namespace

void emit_report(const Report& report, const std::filesystem::path& path) {
    std::ostringstream out;
    for (const auto& line : report.metadata) out << "# " << line << '\n';
    out << kReportHeader << '\n';
    for (const auto& row : report.rows) {
        out << to_string(row.kind) << ',' << csv::format_number(row.train_error) << ','
            << csv::format_number(row.test_error) << ',' << csv::format_number(row.time_s) << ','
            << csv::format_number(row.variety_mean) << ',' << row.variety_max << ',' << clean_status(row.status)
            << '\n';
    }
    io::write_text(path, out.str());
}

Report parse_report(const std::filesystem::path& path) {
    const csv::Table table = csv::read_table(path);
    Report report;
    for (const auto& c : table.comments) report.metadata.push_back(c.starts_with(' ') ? c.substr(1) : c);
    const std::size_t kind = table.column("kind");
    const std::size_t train = table.column("train_error");
    const std::size_t test = table.column("test_error");
    const std::size_t time = table.column("time_s");
    const std::size_t vmean = table.column("variety_mean");
    const std::size_t vmax = table.column("variety_max");
    const std::size_t status = table.column("status");
    for (std::size_t r = 0; r < table.cells.size(); ++r) {
        ReportRow row;
        try {
            row.kind = parse_model_kind(table.cells[r][kind]);
        } catch (const DomainError& e) {
            throw csv::ParseError(e.what(), table.lines[r]);
        }
        row.train_error = table.number(r, train);
        row.test_error = table.number(r, test);
        row.time_s = table.number(r, time);
        row.variety_mean = table.number(r, vmean);
        row.variety_max = static_cast<std::size_t>(table.number(r, vmax));
        row.status = table.cells[r][status];
        report.rows.push_back(row);
    }
    return report;
}

std::string report_digest(const std::filesystem::path& path) {
    const csv::Table table = csv::read_table(path);
    const std::size_t time = table.column("time_s");
    std::string canonical;
    auto append = [&](const std::vector<std::string>& cells) {
        for (std::size_t c = 0; c < cells.size(); ++c) {
            if (c == time) continue;
            canonical += cells[c];
            canonical += ',';
        }
        canonical += '\n';
    };
    append(table.header);
    for (const auto& row : table.cells) append(row);
    return io::hex64(io::fnv1a(canonical));
}

TrainingSet inverse_parabola(std::size_t n, std::uint64_t seed) {
    if (n == 0) throw DomainError("inverse_parabola: n must be positive");
    TrainingSet set;
    set.grid = FreqGrid{{1.0}};
    set.scaler = DesignScaler::uniform(1, -1.0, 1.0);
    set.inputs = Matrix(n, 1);
    set.labels = Matrix(n, 1);
    Rng rng(seed);
    for (std::size_t i = 0; i < n; ++i) {
        const double x = rng.uniform(-1.0, 1.0);
        set.inputs(i, 0) = x * x;
        set.labels(i, 0) = x;
    }
    return set;
}

TrainingSet two_branch(std::size_t n, std::uint64_t seed) {
    if (n == 0) throw DomainError("two_branch: n must be positive");
    TrainingSet set;
    set.grid = FreqGrid{{1.0}};
    set.scaler = DesignScaler::uniform(1, -1.0, 1.0);
    set.inputs = Matrix(2 * n, 1);
    set.labels = Matrix(2 * n, 1);
    Rng rng(seed);
    for (std::size_t i = 0; i < n; ++i) {
        const double y = rng.uniform();
        set.inputs(2 * i, 0) = y;
        set.labels(2 * i, 0) = std::sqrt(y);
        set.inputs(2 * i + 1, 0) = y;
        set.labels(2 * i + 1, 0) = -std::sqrt(y);
    }
    return set;
}

}  // namespace pdn
