#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

namespace lsemix {

enum class ModelChoice { kTheory, kSae };
enum class OptChoice { kSgd, kAdam };

std::string to_string(ModelChoice m);
std::string to_string(OptChoice o);
ModelChoice model_from_string(const std::string& s);
OptChoice opt_from_string(const std::string& s);

// One training configuration. Defaults are the reference setup:
// 784 -> 64, 100 epochs, batch 128, Adam 1e-3, both penalties at 1.0.
struct ExperimentConfig {
    ModelChoice model = ModelChoice::kTheory;
    std::size_t input_dim = 784;
    std::size_t components = 64;
    std::size_t epochs = 100;
    std::size_t batch_size = 128;
    OptChoice optimizer = OptChoice::kAdam;
    double lr = 0.001;
    double lambda_var = 1.0;
    double lambda_tc = 1.0;
    double lambda_wr = 0.0;
    double l1_weight = 0.01; // sae only
    bool enable_lse = true;
    bool enable_var = true;
    bool enable_tc = true;
    std::vector<std::uint64_t> seeds = {1, 2, 3};
    std::string data_dir;
    std::string out_dir = "runs";
    std::size_t train_limit = 0; // 0 = full training split; >0 = first n rows
    std::string precision = "float64";

    void validate() const; // throws std::invalid_argument on bad fields
};

nlohmann::json to_json(const ExperimentConfig& cfg);
ExperimentConfig config_from_json(const nlohmann::json& j);
ExperimentConfig load_config_file(const std::string& path);

} // namespace lsemix
