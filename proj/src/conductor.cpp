#include "pdn/conductor.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <sstream>
#include <thread>

#include "pdn/binary_io.hpp"
#include "pdn/csv.hpp"
#include "pdn/dataset.hpp"
#include "pdn/errors.hpp"
#include "pdn/plane.hpp"

namespace pdn {

namespace {

enum class KeyType { real, count, text, boolean, list };

struct KeyInfo {
    ConfigKey key;
    KeyType type;
};

constexpr KeyInfo kKeys[] = {
    {{"geometry.tube_radius_mm", "14.5", "reference tube radius"}, KeyType::real},
    {{"geometry.layer_length_mm", "20", "axial length of every layer"}, KeyType::real},
    {{"geometry.layers", "5", "layers per structure"}, KeyType::count},
    {{"geometry.radius_min_mm", "1.8125", "smallest admissible layer radius"}, KeyType::real},
    {{"geometry.radius_max_mm", "14.5", "largest admissible layer radius"}, KeyType::real},
    {{"medium.sound_speed", "343", "m/s"}, KeyType::real},
    {{"medium.density", "1.21", "kg/m^3"}, KeyType::real},
    {{"grid.first_hz", "20", "first frequency"}, KeyType::real},
    {{"grid.step_hz", "20", "frequency step"}, KeyType::real},
    {{"grid.count", "250", "number of frequencies"}, KeyType::count},
    {{"data.values", "8", "radii per layer for grid datasets"}, KeyType::count},
    {{"data.random", "0", "when > 0, draw this many random structures instead of a grid"}, KeyType::count},
    {{"data.seed", "1", "seed of random datasets"}, KeyType::count},
    {{"data.pair_limit", "10000000", "capacity guard for grid datasets"}, KeyType::count},
    {{"train.model", "pdn", "pdn, ann or tnn"}, KeyType::text},
    {{"train.learning_rate", "1e-4", "Adam step size"}, KeyType::real},
    {{"train.batch_size", "256", "samples per batch"}, KeyType::count},
    {{"train.epochs", "1000", "passes over the data"}, KeyType::count},
    {{"train.weight_decay", "0", "L2 coefficient added to the gradients"}, KeyType::real},
    {{"train.seed", "1", "initialization and shuffling seed"}, KeyType::count},
    {{"train.hidden_widths", "400,800,1600,3200", "trunk widths"}, KeyType::list},
    {{"train.mixtures", "50", "mixture components of the pdn head"}, KeyType::count},
    {{"train.activation", "relu", "relu, relu6 or linear"}, KeyType::text},
    {{"train.batch_norm", "true", "batch normalization in hidden layers"}, KeyType::boolean},
    {{"train.isotropic", "false", "one deviation per component instead of one per layer"}, KeyType::boolean},
    {{"train.tnn_gate", "0.05", "max forward-net mean abs error before the tandem stage"}, KeyType::real},
    {{"seek.max_iterations", "500", "mean-shift iterations per start"}, KeyType::count},
    {{"seek.tolerance", "1e-8", "step norm that counts as converged"}, KeyType::real},
    {{"seek.merge_radius", "0.02", "end points closer than this are one mode (design units)"}, KeyType::real},
    {{"seek.density_floor", "1e-3", "modes below this fraction of the top density are dropped"}, KeyType::real},
    {{"seek.max_modes", "16", "modes kept per target"}, KeyType::count},
    {{"design.peak_width_hz", "100", "width of the peak template"}, KeyType::real},
    {{"design.pca_samples", "10000", "mixture samples the projection is fitted to"}, KeyType::count},
    {{"design.pca_resolution", "64", "grid cells per axis"}, KeyType::count},
    {{"design.sample_seed", "1", "seed of the mixture samples"}, KeyType::count},
    {{"compare.models", "pdn,ann,tnn", "models to train and score"}, KeyType::list},
    {{"compare.test_count", "50", "held-out random targets"}, KeyType::count},
    {{"compare.test_seed", "1001", "seed of the held-out targets"}, KeyType::count},
    {{"compare.gate_count", "50", "random structures scoring the tnn forward net"}, KeyType::count},
    {{"compare.gate_seed", "1002", "seed of the gate structures"}, KeyType::count},
    {{"compare.test_radius_min_mm", "1.8125", "smallest radius of held-out structures"}, KeyType::real},
    {{"compare.variety_mm", "2", "designs this far apart (L-infinity) count as distinct"}, KeyType::real},
    {{"compare.train_eval_limit", "200", "training targets scored for train_error"}, KeyType::count},
};

const KeyInfo* find_key(std::string_view name) {
    for (const auto& k : kKeys) {
        if (k.key.name == name) return &k;
    }
    return nullptr;
}

std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

bool parse_count(std::string_view text, std::uint64_t& out) {
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), out);
    return ec == std::errc() && ptr == text.data() + text.size() && !text.empty();
}

bool parse_bool(std::string_view text, bool& out) {
    if (text == "true" || text == "1" || text == "yes") {
        out = true;
        return true;
    }
    if (text == "false" || text == "0" || text == "no") {
        out = false;
        return true;
    }
    return false;
}

void check_value(const KeyInfo& info, std::string_view value) {
    const auto bad = [&](std::string_view expected) {
        return DomainError("config key " + std::string(info.key.name) + ": \"" + std::string(value) + "\" is not " +
                           std::string(expected));
    };
    switch (info.type) {
        case KeyType::real: {
            double v;
            if (!csv::parse_double(value, v) || !std::isfinite(v)) throw bad("a finite number");
            break;
        }
        case KeyType::count: {
            std::uint64_t v;
            if (!parse_count(value, v)) throw bad("a non-negative integer");
            break;
        }
        case KeyType::boolean: {
            bool v;
            if (!parse_bool(value, v)) throw bad("true or false");
            break;
        }
        case KeyType::list:
            if (value.empty()) throw bad("a comma-separated list");
            break;
        case KeyType::text:
            if (value.empty()) throw bad("a non-empty value");
            break;
    }
}

}  // namespace

std::span<const ConfigKey> config_keys() {
    static const std::vector<ConfigKey> keys = [] {
        std::vector<ConfigKey> out;
        for (const auto& k : kKeys) out.push_back(k.key);
        return out;
    }();
    return keys;
}

RunConfig::RunConfig() {
    for (const auto& k : kKeys) values_.emplace(std::string(k.key.name), std::string(k.key.default_value));
}

void RunConfig::set(std::string_view key, std::string_view value) {
    const KeyInfo* info = find_key(key);
    if (!info) throw DomainError("unknown config key \"" + std::string(key) + "\"");
    value = trim(value);
    check_value(*info, value);
    values_.find(key)->second = std::string(value);
}

void RunConfig::set_assignment(std::string_view assignment) {
    const auto eq = assignment.find('=');
    if (eq == std::string_view::npos) throw DomainError("expected key=value, got \"" + std::string(assignment) + "\"");
    set(trim(assignment.substr(0, eq)), assignment.substr(eq + 1));
}

void RunConfig::merge_text(std::string_view text) {
    std::size_t line_no = 0;
    std::size_t start = 0;
    while (start <= text.size()) {
        const auto end = std::min(text.find('\n', start), text.size());
        const std::string_view line = trim(text.substr(start, end - start));
        ++line_no;
        start = end + 1;
        if (line.empty() || line.front() == '#') continue;
        try {
            set_assignment(line);
        } catch (const DomainError& e) {
            throw DomainError("config line " + std::to_string(line_no) + ": " + e.what());
        }
        if (end == text.size()) break;
    }
}

void RunConfig::merge_file(const std::filesystem::path& path) {
    const auto bytes = io::read_file(path);
    merge_text(std::string_view(bytes.data(), bytes.size()));
}

const std::string& RunConfig::get(std::string_view key) const {
    const auto it = values_.find(key);
    if (it == values_.end()) throw DomainError("unknown config key \"" + std::string(key) + "\"");
    return it->second;
}

double RunConfig::number(std::string_view key) const {
    double v = 0.0;
    if (!csv::parse_double(get(key), v)) throw DomainError("config key " + std::string(key) + " is not a number");
    return v;
}

std::size_t RunConfig::count(std::string_view key) const { return static_cast<std::size_t>(seed(key)); }

std::uint64_t RunConfig::seed(std::string_view key) const {
    std::uint64_t v = 0;
    if (!parse_count(get(key), v)) throw DomainError("config key " + std::string(key) + " is not an integer");
    return v;
}

bool RunConfig::flag(std::string_view key) const {
    bool v = false;
    if (!parse_bool(get(key), v)) throw DomainError("config key " + std::string(key) + " is not a boolean");
    return v;
}

std::vector<std::string> RunConfig::list(std::string_view key) const {
    std::vector<std::string> out;
    for (const auto& item : csv::split(get(key))) {
        const auto t = trim(item);
        if (!t.empty()) out.emplace_back(t);
    }
    return out;
}

Geometry RunConfig::geometry() const {
    Geometry g;
    g.tube_radius = number("geometry.tube_radius_mm") * 1e-3;
    g.layer_length = number("geometry.layer_length_mm") * 1e-3;
    g.layer_count = count("geometry.layers");
    g.radius_min = number("geometry.radius_min_mm") * 1e-3;
    g.radius_max = number("geometry.radius_max_mm") * 1e-3;
    g.validate();
    return g;
}

Medium RunConfig::medium() const {
    Medium m{number("medium.sound_speed"), number("medium.density")};
    m.validate();
    return m;
}

FreqGrid RunConfig::grid() const {
    FreqGrid g = FreqGrid::uniform(number("grid.first_hz"), number("grid.step_hz"), count("grid.count"));
    g.validate();
    return g;
}

TrainConfig RunConfig::train() const {
    TrainConfig t;
    t.learning_rate = number("train.learning_rate");
    t.batch_size = count("train.batch_size");
    t.epochs = count("train.epochs");
    t.weight_decay = number("train.weight_decay");
    t.seed = seed("train.seed");
    t.hidden_widths.clear();
    for (const auto& w : list("train.hidden_widths")) {
        std::uint64_t v = 0;
        if (!parse_count(w, v)) throw DomainError("train.hidden_widths: \"" + w + "\" is not an integer");
        t.hidden_widths.push_back(static_cast<std::size_t>(v));
    }
    t.mixture_count = count("train.mixtures");
    const std::string& act = get("train.activation");
    if (act == "relu") {
        t.activation = Activation::relu;
    } else if (act == "relu6") {
        t.activation = Activation::relu6;
    } else if (act == "linear") {
        t.activation = Activation::linear;
    } else {
        throw DomainError("train.activation: unknown activation \"" + act + "\" (valid: relu, relu6, linear)");
    }
    t.batch_norm = flag("train.batch_norm");
    t.isotropic = flag("train.isotropic");
    t.tnn_gate = number("train.tnn_gate");
    t.validate();
    return t;
}

SeekerConfig RunConfig::seeker() const {
    SeekerConfig s;
    s.max_iterations = count("seek.max_iterations");
    s.tolerance = number("seek.tolerance");
    s.merge_radius = number("seek.merge_radius");
    s.density_floor = number("seek.density_floor");
    s.max_modes = count("seek.max_modes");
    s.validate();
    return s;
}

std::string RunConfig::to_text() const {
    std::ostringstream out;
    for (const auto& k : kKeys) {
        out << "# " << k.key.doc << '\n' << k.key.name << " = " << get(k.key.name) << '\n';
    }
    return out.str();
}

void RunConfig::write_beside(const std::filesystem::path& artifact) const {
    std::filesystem::path p = artifact;
    p += ".config";
    io::write_text(p, to_text());
}

std::vector<double> resample(std::span<const double> frequencies, std::span<const double> values, const FreqGrid& grid) {
    if (frequencies.size() != values.size() || frequencies.empty()) {
        throw DomainError("resample: need matching, non-empty frequency and value columns");
    }
    for (std::size_t k = 1; k < frequencies.size(); ++k) {
        if (!(frequencies[k] > frequencies[k - 1])) throw DomainError("resample: frequencies must increase strictly");
    }
    std::vector<double> out(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const double f = grid.frequencies[i];
        const double tol = 1e-9 * std::max(1.0, std::abs(f));
        if (f < frequencies.front() - tol || f > frequencies.back() + tol) {
            throw IncompatibleError("target covers " + csv::format_number(frequencies.front()) + ".." +
                                    csv::format_number(frequencies.back()) + " Hz but the model grid needs " +
                                    csv::format_number(f) + " Hz");
        }
        const auto hi = std::lower_bound(frequencies.begin(), frequencies.end(), f - tol);
        const std::size_t j = static_cast<std::size_t>(hi - frequencies.begin());
        if (j == 0 || std::abs(frequencies[j] - f) <= tol) {
            out[i] = values[j];
            continue;
        }
        const double w = (f - frequencies[j - 1]) / (frequencies[j] - frequencies[j - 1]);
        out[i] = (1.0 - w) * values[j - 1] + w * values[j];
    }
    return out;
}

namespace {

double template_number(std::string_view text, std::string_view spec) {
    double v = 0.0;
    if (!csv::parse_double(trim(text), v) || !std::isfinite(v)) {
        throw DomainError("target \"" + std::string(spec) + "\": \"" + std::string(text) + "\" is not a number");
    }
    return v;
}

}  // namespace

Spectrum resolve_target(std::string_view spec, const FreqGrid& grid, double peak_width_hz, const Geometry& geometry,
                        const Medium& medium) {
    Spectrum target;
    if (spec.starts_with("bandgap:")) {
        const std::string_view range = spec.substr(8);
        const auto dash = range.find('-');
        if (dash == std::string_view::npos) throw DomainError("target \"" + std::string(spec) + "\": expected LO-HI");
        const double lo = template_number(range.substr(0, dash), spec);
        const double hi = template_number(range.substr(dash + 1), spec);
        if (!(hi > lo)) throw DomainError("target \"" + std::string(spec) + "\": band must have HI > LO");
        for (double f : grid.frequencies) target.transmittance.push_back(f >= lo && f <= hi ? 0.0 : 1.0);
    } else if (spec.starts_with("peak:")) {
        const double centre = template_number(spec.substr(5), spec);
        if (!(peak_width_hz > 0.0)) throw DomainError("peak width must be positive");
        for (double f : grid.frequencies) {
            target.transmittance.push_back(std::abs(f - centre) <= 0.5 * peak_width_hz ? 1.0 : 0.0);
        }
    } else if (spec.starts_with("structure:")) {
        Structure s;
        for (const auto& item : csv::split(spec.substr(10))) s.radii.push_back(template_number(item, spec) * 1e-3);
        if (s.radii.size() != geometry.layer_count) {
            throw IncompatibleError("target structure has " + std::to_string(s.radii.size()) + " layers, geometry has " +
                                    std::to_string(geometry.layer_count));
        }
        target = transmission(s, grid, geometry, medium);
    } else {
        const csv::Table table = csv::read_table(std::filesystem::path(std::string(spec)));
        const std::size_t fcol = table.column("frequency_hz");
        const std::size_t tcol = table.column("transmittance");
        std::vector<double> freqs, values;
        for (std::size_t r = 0; r < table.cells.size(); ++r) {
            freqs.push_back(table.number(r, fcol));
            values.push_back(table.number(r, tcol));
        }
        if (freqs.empty()) throw csv::ParseError("target file has no rows", 1);
        for (std::size_t r = 1; r < freqs.size(); ++r) {
            if (!(freqs[r] > freqs[r - 1])) throw csv::ParseError("frequencies must increase", table.lines[r]);
        }
        target.transmittance = resample(freqs, values, grid);
    }
    for (double& t : target.transmittance) t = std::clamp(t, 0.0, 1.0);
    return target;
}

void cmd_gen_data(const RunConfig& config, const GenDataRequest& request, std::ostream& report) {
    const Geometry geometry = config.geometry();
    const Medium medium = config.medium();
    const FreqGrid grid = config.grid();
    if (!within_plane_wave_range(grid, geometry, medium)) {
        report << "warning: grid exceeds the plane-wave cutoff of "
               << csv::fixed(plane_wave_cutoff(geometry, medium), 1) << " Hz; higher duct modes are ignored\n";
    }
    const std::size_t random = config.count("data.random");
    const Dataset dataset = random > 0 ? generate_random(random, config.seed("data.seed"), geometry, medium, grid)
                                       : generate_grid(config.count("data.values"), geometry, medium, grid,
                                                       config.count("data.pair_limit"));
    save_dataset(dataset, request.out);
    if (request.csv) export_csv(dataset, *request.csv);
    config.write_beside(request.out);
    report << "pairs " << dataset.size() << '\n'
           << "grid " << csv::format_number(grid.frequencies.front()) << ".."
           << csv::format_number(grid.frequencies.back()) << " Hz (" << grid.size() << " points)\n"
           << "fingerprint " << dataset_fingerprint(dataset) << '\n';
}

namespace {

void write_loss_log(const std::filesystem::path& path, const std::vector<std::pair<std::string, std::vector<double>>>& stages) {
    std::ostringstream out;
    out << "stage,epoch,loss\n";
    for (const auto& [stage, losses] : stages) {
        for (std::size_t e = 0; e < losses.size(); ++e) out << stage << ',' << e << ',' << csv::format_number(losses[e]) << '\n';
    }
    io::write_text(path, out.str());
}

}  // namespace

void cmd_train(const RunConfig& config, const TrainRequest& request, std::ostream& report) {
    const Dataset dataset = load_dataset(request.data);
    const TrainConfig train = config.train();
    const ModelKind kind = parse_model_kind(config.get("train.model"));
    const TrainingSet set = training_set(dataset.pairs, dataset.grid, DesignScaler::for_geometry(dataset.geometry));
    std::filesystem::path log = request.log.value_or(std::filesystem::path(request.out.string() + ".log.csv"));

    TrainOutcome outcome;
    std::vector<std::pair<std::string, std::vector<double>>> stages;
    std::string refusal;
    if (kind == ModelKind::tnn) {
        TandemOutcome t = train_tnn(set, train);
        stages.emplace_back("forward", t.forward_losses);
        if (t.gated) refusal = t.outcome.message;
        outcome = std::move(t.outcome);
    } else {
        outcome = kind == ModelKind::pdn ? train_pdn(set, train) : train_ann(set, train);
    }
    stages.emplace_back(to_string(kind), outcome.epoch_losses);

    save_model(outcome.model, request.out);
    write_loss_log(log, stages);
    config.write_beside(request.out);
    if (outcome.diverged) {
        throw TrainingError(outcome.message + "; weights of the last good epoch saved to " + request.out.string(),
                            static_cast<std::int64_t>(outcome.failed_epoch));
    }
    if (!refusal.empty()) throw TrainingError(refusal, -1);
    report << "model " << to_string(kind) << '\n' << "epochs " << outcome.epoch_losses.size() << '\n';
    if (!outcome.epoch_losses.empty()) report << "final train loss " << csv::format_number(outcome.epoch_losses.back()) << '\n';
    report << "seconds " << csv::fixed(outcome.seconds, 2) << '\n';
}

void cmd_design(const RunConfig& config, const DesignRequest& request, std::ostream& report) {
    const InverseModel model = load_model(request.weights);
    if (model.kind != ModelKind::pdn) {
        throw IncompatibleError("design needs a pdn model, got " + to_string(model.kind) +
                                "; single-output models are scored by compare");
    }
    const Spectrum target =
        resolve_target(request.target, model.grid, config.number("design.peak_width_hz"), config.geometry(), config.medium());
    const MixtureParams params = mixture_for(model, target.transmittance);
    const std::vector<Mode> modes = find_modes(params, model.scaler, config.seeker());

    std::optional<Projection> projection;
    if (request.pca_grid || request.svg) {
        const auto samples = sample_design(params, config.count("design.pca_samples"), config.seed("design.sample_seed"));
        projection = fit_projection(samples);
        const DensityGrid grid =
            density_grid(params, *projection, config.count("design.pca_resolution"), samples, modes);
        if (request.pca_grid) emit_grid(grid, *request.pca_grid);
        if (request.svg) io::write_text(*request.svg, render_svg(grid));
    }
    emit_designs(modes, request.out, projection ? &*projection : nullptr);
    config.write_beside(request.out);
    report << "designs " << modes.size() << '\n';
    for (const Mode& m : modes) {
        report << "A" << m.rank << " density " << csv::format_number(m.density) << " radii_mm";
        for (double r : m.structure.radii) report << ' ' << csv::fixed(r * 1e3, 2);
        if (m.boundary) report << " (boundary)";
        report << '\n';
    }
}

void cmd_verify(const RunConfig& config, const VerifyRequest& request, std::ostream& report) {
    const Geometry geometry = config.geometry();
    const Medium medium = config.medium();
    const FreqGrid grid = config.grid();
    const auto designs = read_designs(request.designs);
    const Spectrum target = resolve_target(request.target, grid, config.number("design.peak_width_hz"), geometry, medium);

    std::ostringstream out;
    out << "rank,spectrum_error";
    for (double f : grid.frequencies) out << ",t" << csv::format_number(f);
    out << '\n';
    const auto row = [&](std::size_t rank, double error, const std::vector<double>& values) {
        out << rank << ',' << csv::format_number(error);
        for (double v : values) out << ',' << csv::fixed(v, 9);
        out << '\n';
    };
    row(0, 0.0, target.transmittance);
    for (const auto& d : designs) {
        if (d.structure.radii.size() != geometry.layer_count) {
            throw IncompatibleError("design " + std::to_string(d.rank) + " has " + std::to_string(d.structure.radii.size()) +
                                    " layers, geometry has " + std::to_string(geometry.layer_count));
        }
        // Radii are printed to 0.01 mm; absorb that rounding at the range ends.
        Structure s = d.structure;
        for (double& r : s.radii) {
            if (r < geometry.radius_min && r > geometry.radius_min - 5e-6) r = geometry.radius_min;
            if (r > geometry.radius_max && r < geometry.radius_max + 5e-6) r = geometry.radius_max;
        }
        const Spectrum predicted = transmission(s, grid, geometry, medium);
        const double error = spectrum_error(predicted, target);
        row(d.rank, error, predicted.transmittance);
        report << "A" << d.rank << " spectrum_error " << csv::fixed(error, 6) << '\n';
    }
    io::write_text(request.out, out.str());
    config.write_beside(request.out);
}

void cmd_compare(const RunConfig& config, const CompareRequest& request, std::ostream& report) {
    std::vector<ModelKind> kinds;
    for (const auto& name : config.list("compare.models")) kinds.push_back(parse_model_kind(name));
    if (kinds.empty()) throw DomainError("compare.models is empty (valid: pdn, ann, tnn)");
    const TrainConfig train = config.train();
    const Dataset dataset = load_dataset(request.data);
    const DesignScaler scaler = DesignScaler::for_geometry(dataset.geometry);
    const TrainingSet train_set = training_set(dataset.pairs, dataset.grid, scaler);

    Geometry held_out = dataset.geometry;
    held_out.radius_min = config.number("compare.test_radius_min_mm") * 1e-3;
    const Dataset test = generate_random(config.count("compare.test_count"), config.seed("compare.test_seed"), held_out,
                                         dataset.medium, dataset.grid);
    const Dataset gate = generate_random(config.count("compare.gate_count"), config.seed("compare.gate_seed"), held_out,
                                         dataset.medium, dataset.grid);
    const TrainingSet test_set = training_set(test.pairs, dataset.grid, scaler);
    const TrainingSet gate_set = training_set(gate.pairs, dataset.grid, scaler);

    EvalSettings settings;
    settings.seeker = config.seeker();
    settings.variety_threshold = config.number("compare.variety_mm") * 1e-3;
    Report result = run_comparison(kinds, train_set, test_set, train,
                                   duct_oracle(dataset.geometry, dataset.medium, dataset.grid), settings, &gate_set,
                                   config.count("compare.train_eval_limit"));
    const std::string config_text = config.to_text();
    result.metadata = {
        "dataset_fingerprint=" + dataset_fingerprint(dataset),
        "dataset_pairs=" + std::to_string(dataset.size()),
        "train_seed=" + config.get("train.seed"),
        "test_seed=" + config.get("compare.test_seed") + " test_count=" + config.get("compare.test_count"),
        "config_digest=" + io::hex64(io::fnv1a(config_text)),
        "hardware_threads=" + std::to_string(std::thread::hardware_concurrency()),
        "error=mean absolute transmittance of the best design; variety threshold " + config.get("compare.variety_mm") +
            " mm",
    };
    emit_report(result, request.out);
    config.write_beside(request.out);
    for (const auto& row : result.rows) {
        report << to_string(row.kind) << " train_error " << csv::fixed(row.train_error, 4) << " test_error "
               << csv::fixed(row.test_error, 4) << " time_s " << csv::fixed(row.time_s, 1) << " variety "
               << csv::fixed(row.variety_mean, 2) << " (max " << row.variety_max << ") " << row.status << '\n';
    }
}

int exit_code_for(const std::exception& error) noexcept {
    if (dynamic_cast<const CapacityError*>(&error)) return kExitCapacity;
    if (dynamic_cast<const IoError*>(&error) || dynamic_cast<const FormatError*>(&error)) return kExitIo;
    if (dynamic_cast<const TrainingError*>(&error)) return kExitTraining;
    if (dynamic_cast<const IncompatibleError*>(&error)) return kExitIncompatible;
    if (dynamic_cast<const DomainError*>(&error) || dynamic_cast<const csv::ParseError*>(&error)) return kExitUsage;
    return 1;
}

}  // namespace pdn
