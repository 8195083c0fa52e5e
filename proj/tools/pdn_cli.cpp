// pdn: dataset generation, training, inverse design, verification and
// model comparison for layered acoustic duct metastructures.
//
// Exit codes: 0 ok, 2 usage, 3 capacity, 4 I/O, 5 training, 6 incompatible.

#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "pdn/conductor.hpp"

namespace {

struct Common {
    std::string config_file;
    std::vector<std::string> assignments;
};

void add_common(CLI::App* cmd, Common& common) {
    cmd->add_option("--config", common.config_file, "key = value configuration file");
    cmd->add_option("--set", common.assignments, "override one key (key=value); repeatable");
}

/// Defaults, then the config file, then --set, then dedicated flags.
pdn::RunConfig build_config(const Common& common,
                            const std::vector<std::pair<std::string, std::optional<std::string>>>& flags) {
    pdn::RunConfig config;
    if (!common.config_file.empty()) config.merge_file(common.config_file);
    for (const auto& a : common.assignments) config.set_assignment(a);
    for (const auto& [key, value] : flags) {
        if (value) config.set(key, *value);
    }
    return config;
}

template <class T>
std::optional<std::string> text(const std::optional<T>& v) {
    if (!v) return std::nullopt;
    if constexpr (std::is_same_v<T, std::string>) {
        return *v;
    } else {
        return std::to_string(*v);
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Probability-density inverse design of acoustic duct metastructures"};
    app.require_subcommand(1);
    app.set_version_flag("--version", "pdn 1.0");

    Common common;
    std::string out, data, weights, target, designs, log_path, pca_grid, svg, csv_out;
    std::optional<std::size_t> values, random, layers, epochs, batch;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> model, models, lr;

    auto* gen = app.add_subcommand("gen-data", "generate a labelled dataset");
    add_common(gen, common);
    auto* values_opt = gen->add_option("--values", values, "radii per layer (grid dataset)");
    gen->add_option("--random", random, "random structures instead of a grid")->excludes(values_opt);
    gen->add_option("--layers", layers, "layers per structure");
    gen->add_option("--seed", seed, "seed of random datasets");
    gen->add_option("--out", out, "dataset file (.pdnd)")->required();
    gen->add_option("--csv", csv_out, "also export as CSV");

    auto* train = app.add_subcommand("train", "train an inverse model");
    add_common(train, common);
    train->add_option("--data", data, "dataset file")->required();
    train->add_option("--model", model, "pdn, ann or tnn");
    train->add_option("--epochs", epochs, "passes over the data");
    train->add_option("--lr", lr, "learning rate");
    train->add_option("--batch", batch, "batch size");
    train->add_option("--seed", seed, "training seed");
    train->add_option("--out", out, "weights file (.pdnw)")->required();
    train->add_option("--log", log_path, "per-epoch loss CSV (default <out>.log.csv)");

    auto* design = app.add_subcommand("design", "propose ranked designs for a target spectrum");
    add_common(design, common);
    design->add_option("--weights", weights, "trained pdn weights")->required();
    design->add_option("--target", target, "bandgap:LO-HI, peak:F, structure:R1,...,RL (mm) or a CSV path")
        ->required();
    design->add_option("--out", out, "designs CSV")->required();
    design->add_option("--pca-grid", pca_grid, "density grid CSV on the principal plane");
    design->add_option("--svg", svg, "heat map of the density grid");

    auto* verify = app.add_subcommand("verify", "recompute the spectra of proposed designs");
    add_common(verify, common);
    verify->add_option("--designs", designs, "designs CSV")->required();
    verify->add_option("--target", target, "target spectrum spec")->required();
    verify->add_option("--out", out, "verification CSV")->required();

    auto* compare = app.add_subcommand("compare", "train and score pdn, ann and tnn side by side");
    add_common(compare, common);
    compare->add_option("--data", data, "training dataset")->required();
    compare->add_option("--models", models, "comma-separated subset of pdn,ann,tnn");
    compare->add_option("--epochs", epochs, "passes over the data");
    compare->add_option("--seed", seed, "training seed");
    compare->add_option("--out", out, "report CSV")->required();

    auto* show = app.add_subcommand("show-config", "print the effective configuration");
    add_common(show, common);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? pdn::kExitOk : pdn::kExitUsage;
    }

    try {
        if (gen->parsed()) {
            const auto config = build_config(common, {{"data.values", text(values)},
                                                      {"data.random", text(random)},
                                                      {"data.seed", text(seed)},
                                                      {"geometry.layers", text(layers)}});
            pdn::GenDataRequest request{out, std::nullopt};
            if (!csv_out.empty()) request.csv = csv_out;
            pdn::cmd_gen_data(config, request, std::cout);
        } else if (train->parsed()) {
            const auto config = build_config(common, {{"train.model", model},
                                                      {"train.epochs", text(epochs)},
                                                      {"train.learning_rate", lr},
                                                      {"train.batch_size", text(batch)},
                                                      {"train.seed", text(seed)}});
            pdn::TrainRequest request{data, out, std::nullopt};
            if (!log_path.empty()) request.log = log_path;
            pdn::cmd_train(config, request, std::cout);
        } else if (design->parsed()) {
            const auto config = build_config(common, {});
            pdn::DesignRequest request{weights, target, out, std::nullopt, std::nullopt};
            if (!pca_grid.empty()) request.pca_grid = pca_grid;
            if (!svg.empty()) request.svg = svg;
            pdn::cmd_design(config, request, std::cout);
        } else if (verify->parsed()) {
            const auto config = build_config(common, {});
            pdn::cmd_verify(config, {designs, target, out}, std::cout);
        } else if (compare->parsed()) {
            const auto config = build_config(
                common, {{"compare.models", models}, {"train.epochs", text(epochs)}, {"train.seed", text(seed)}});
            pdn::cmd_compare(config, {data, out}, std::cout);
        } else if (show->parsed()) {
            std::cout << build_config(common, {}).to_text();
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return pdn::exit_code_for(e);
    }
    return pdn::kExitOk;
}
