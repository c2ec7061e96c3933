#include <cstdlib>
#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "lsemix/experiments.hpp"

namespace {

using lsemix::ExperimentConfig;

std::string error_type(const std::exception& e) {
    if (dynamic_cast<const lsemix::DataError*>(&e)) return "data_error";
    if (dynamic_cast<const lsemix::CheckpointError*>(&e)) return "checkpoint_error";
    if (dynamic_cast<const lsemix::TrainError*>(&e)) return "train_error";
    if (dynamic_cast<const std::invalid_argument*>(&e)) return "invalid_argument";
    return "runtime_error";
}

struct CliOverrides {
    std::string config_path;
    std::string data_dir;
    std::string out_dir;
    std::string model;
    std::string optimizer;
    double lr = 0.0;
    std::size_t epochs = 0;
    std::size_t batch_size = 0;
    double lambda_var = 0.0;
    double lambda_tc = 0.0;
    double l1 = 0.0;
    std::uint64_t seed = 0;
    std::vector<std::uint64_t> seeds;
    std::size_t train_limit = 0;
};

// Shared flags for every training-style subcommand. Values land in `ov`;
// only options the user actually passed override the config file.
void add_common_options(CLI::App* cmd, CliOverrides& ov) {
    cmd->add_option("--config", ov.config_path, "JSON config file; flags override its fields");
    cmd->add_option("--data-dir", ov.data_dir,
                    "directory with MNIST IDX files (fallback: LSEMIX_DATA_DIR)");
    cmd->add_option("--out-dir", ov.out_dir, "output directory");
    cmd->add_option("--model", ov.model, "theory|sae");
    cmd->add_option("--optimizer", ov.optimizer, "sgd|adam");
    cmd->add_option("--lr", ov.lr, "learning rate");
    cmd->add_option("--epochs", ov.epochs, "training epochs");
    cmd->add_option("--batch-size", ov.batch_size, "minibatch size");
    cmd->add_option("--lambda-var", ov.lambda_var, "variance penalty weight");
    cmd->add_option("--lambda-tc", ov.lambda_tc, "decorrelation penalty weight");
    cmd->add_option("--l1", ov.l1, "sae L1 weight");
    cmd->add_option("--seed", ov.seed, "single seed (replaces the config's seed list)");
    cmd->add_option("--seeds", ov.seeds, "seed list")->delimiter(',');
    cmd->add_option("--train-limit", ov.train_limit,
                    "use only the first N training rows (0 = all)");
}

ExperimentConfig resolve_config(const CLI::App* cmd, const CliOverrides& ov) {
    ExperimentConfig cfg;
    if (cmd->count("--config")) cfg = lsemix::load_config_file(ov.config_path);
    if (cmd->count("--data-dir")) cfg.data_dir = ov.data_dir;
    if (cmd->count("--out-dir")) cfg.out_dir = ov.out_dir;
    if (cmd->count("--model")) cfg.model = lsemix::model_from_string(ov.model);
    if (cmd->count("--optimizer")) cfg.optimizer = lsemix::opt_from_string(ov.optimizer);
    if (cmd->count("--lr")) cfg.lr = ov.lr;
    if (cmd->count("--epochs")) cfg.epochs = ov.epochs;
    if (cmd->count("--batch-size")) cfg.batch_size = ov.batch_size;
    if (cmd->count("--lambda-var")) cfg.lambda_var = ov.lambda_var;
    if (cmd->count("--lambda-tc")) cfg.lambda_tc = ov.lambda_tc;
    if (cmd->count("--l1")) cfg.l1_weight = ov.l1;
    if (cmd->count("--seed")) cfg.seeds = {ov.seed};
    if (cmd->count("--seeds")) cfg.seeds = ov.seeds;
    if (cmd->count("--train-limit")) cfg.train_limit = ov.train_limit;

    if (cfg.data_dir.empty()) {
        if (const char* env = std::getenv("LSEMIX_DATA_DIR")) cfg.data_dir = env;
    }
    cfg.validate();
    return cfg;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"lsemix: decoder-free sparse autoencoder training and evaluation"};
    app.require_subcommand(1);

    CliOverrides ov;

    auto* cmd_identity = app.add_subcommand(
        "verify-identity", "check that the batch LSE gradient reproduces the responsibilities");
    std::uint64_t id_seed = 0;
    std::size_t id_samples = 64, id_components = 128;
    cmd_identity->add_option("--seed", id_seed, "rng seed");
    cmd_identity->add_option("--samples", id_samples, "activation rows");
    cmd_identity->add_option("--components", id_components, "activation columns");

    auto* cmd_train = app.add_subcommand("train", "train one model and write its artifacts");
    add_common_options(cmd_train, ov);

    auto* cmd_ablation =
        app.add_subcommand("ablation", "train the four loss-flag configurations over all seeds");
    add_common_options(cmd_ablation, ov);

    auto* cmd_benchmark =
        app.add_subcommand("benchmark", "compare the encoder model against the SAE baseline");
    add_common_options(cmd_benchmark, ov);

    auto* cmd_dynamics = app.add_subcommand(
        "dynamics", "sweep {sgd,adam} x {1e-4..1e-1} on the full objective");
    add_common_options(cmd_dynamics, ov);

    auto* cmd_visualize =
        app.add_subcommand("visualize", "render a checkpoint's encoder weights as a PPM grid");
    std::string vis_checkpoint, vis_out = "weights.ppm";
    cmd_visualize->add_option("--checkpoint", vis_checkpoint, "checkpoint path")->required();
    cmd_visualize->add_option("--out", vis_out, "output PPM path");

    CLI11_PARSE(app, argc, argv);

    try {
        if (cmd_identity->parsed()) {
            lsemix::IdentityReport rep =
                lsemix::verify_identity(id_seed, id_samples, id_components);
            std::cout << lsemix::identity_report_json(rep).dump(2) << "\n";
            return rep.pass ? 0 : 2;
        }

        if (cmd_visualize->parsed()) {
            lsemix::run_visualize(vis_checkpoint, vis_out);
            std::cout << nlohmann::json{{"written", vis_out}}.dump(2) << "\n";
            return 0;
        }

        const CLI::App* active = app.get_subcommands().front();
        ExperimentConfig cfg = resolve_config(active, ov);
        lsemix::Dataset train = lsemix::load_train_split(cfg);
        lsemix::Dataset test = lsemix::load_test_split(cfg);

        if (cmd_train->parsed()) {
            nlohmann::json summary = nlohmann::json::array();
            for (std::uint64_t seed : cfg.seeds) {
                const std::string dir = cfg.out_dir + "/train_" + lsemix::to_string(cfg.model) +
                                        "_seed" + std::to_string(seed);
                lsemix::RunResult run = lsemix::run_train_to_dir(cfg, seed, train, test, dir);
                summary.push_back(lsemix::run_record_json(cfg, run));
                std::cerr << "run seed " << seed << ": probe " << run.probe_accuracy << ", dead "
                          << run.metrics.dead_units << ", wall " << run.wall_time_sec << "s\n";
            }
            std::cout << summary.dump(2) << "\n";
        } else if (cmd_ablation->parsed()) {
            std::cout << lsemix::run_ablation(cfg, train, test).dump(2) << "\n";
        } else if (cmd_benchmark->parsed()) {
            std::cout << lsemix::run_benchmark(cfg, train, test).dump(2) << "\n";
        } else if (cmd_dynamics->parsed()) {
            std::cout << lsemix::run_dynamics(cfg, train, test).dump(2) << "\n";
        }
        return 0;
    } catch (const std::exception& e) {
        nlohmann::json err{{"error", {{"type", error_type(e)}, {"message", e.what()}}}};
        std::cerr << err.dump() << "\n";
        return 1;
    }
}
