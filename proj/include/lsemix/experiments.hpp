#pragma once

#include <cstdint>
#include <string>

#include <json.hpp>

#include "lsemix/config.hpp"
#include "lsemix/data.hpp"
#include "lsemix/train.hpp"

namespace lsemix {

// Gradient-vs-responsibility check on random standard-normal activations.
struct IdentityReport {
    std::uint64_t seed = 0;
    std::size_t samples = 0;
    std::size_t components = 0;
    double max_abs_err = 0.0;
    double mean_abs_err = 0.0;
    double correlation = 0.0;
    bool pass = false; // max_abs_err <= 1e-9
};

IdentityReport verify_identity(std::uint64_t seed, std::size_t samples = 64,
                               std::size_t components = 128);
nlohmann::json identity_report_json(const IdentityReport& r);

// Loads the train/t10k splits from cfg.data_dir.
Dataset load_train_split(const ExperimentConfig& cfg);
Dataset load_test_split(const ExperimentConfig& cfg);

// Trains one (config, seed) run and writes its artifacts into dir:
//   config.json, train_log.jsonl, model.ckpt, weights.ppm, run_record.json.
// Everything except run_record.json (which carries wall time) is
// byte-reproducible for a fixed config and seed.
RunResult run_train_to_dir(const ExperimentConfig& cfg, std::uint64_t seed, const Dataset& train,
                           const Dataset& test, const std::string& dir);

// The four-configuration ablation grid over cfg.seeds; returns the
// aggregate table and writes it to <out>/ablation_table.json.
nlohmann::json run_ablation(const ExperimentConfig& base, const Dataset& train,
                            const Dataset& test);

// Encoder model vs SAE baseline over cfg.seeds; writes benchmark_table.json.
nlohmann::json run_benchmark(const ExperimentConfig& base, const Dataset& train,
                             const Dataset& test);

// {sgd, adam} x {1e-4, 1e-3, 1e-2, 1e-1} over cfg.seeds on the full
// objective; writes dynamics_table.json.
nlohmann::json run_dynamics(const ExperimentConfig& base, const Dataset& train,
                            const Dataset& test);

// Loads a checkpoint and renders its encoder weight rows as a PPM grid.
void run_visualize(const std::string& checkpoint_path, const std::string& out_path);

} // namespace lsemix
