#include "lsemix/config.hpp"

#include <fstream>
#include <stdexcept>

namespace lsemix {

std::string to_string(ModelChoice m) {
    return m == ModelChoice::kTheory ? "theory" : "sae";
}

std::string to_string(OptChoice o) {
    return o == OptChoice::kSgd ? "sgd" : "adam";
}

ModelChoice model_from_string(const std::string& s) {
    if (s == "theory") return ModelChoice::kTheory;
    if (s == "sae") return ModelChoice::kSae;
    throw std::invalid_argument("unknown model \"" + s + "\" (expected theory|sae)");
}

OptChoice opt_from_string(const std::string& s) {
    if (s == "sgd") return OptChoice::kSgd;
    if (s == "adam") return OptChoice::kAdam;
    throw std::invalid_argument("unknown optimizer \"" + s + "\" (expected sgd|adam)");
}

void ExperimentConfig::validate() const {
    if (components < 1) throw std::invalid_argument("config: components must be >= 1");
    if (input_dim < 1) throw std::invalid_argument("config: input_dim must be >= 1");
    if (epochs < 1) throw std::invalid_argument("config: epochs must be >= 1");
    if (batch_size < 2) throw std::invalid_argument("config: batch_size must be >= 2");
    if (seeds.empty()) throw std::invalid_argument("config: seeds must be nonempty");
    if (!(lr > 0.0)) throw std::invalid_argument("config: lr must be > 0");
    if (lambda_var < 0.0 || lambda_tc < 0.0 || lambda_wr < 0.0) {
        throw std::invalid_argument("config: lambdas must be >= 0");
    }
}

nlohmann::json to_json(const ExperimentConfig& cfg) {
    return nlohmann::json{{"model", to_string(cfg.model)},
                          {"input_dim", cfg.input_dim},
                          {"components", cfg.components},
                          {"epochs", cfg.epochs},
                          {"batch_size", cfg.batch_size},
                          {"optimizer", to_string(cfg.optimizer)},
                          {"lr", cfg.lr},
                          {"lambda_var", cfg.lambda_var},
                          {"lambda_tc", cfg.lambda_tc},
                          {"lambda_wr", cfg.lambda_wr},
                          {"l1_weight", cfg.l1_weight},
                          {"enable_lse", cfg.enable_lse},
                          {"enable_var", cfg.enable_var},
                          {"enable_tc", cfg.enable_tc},
                          {"seeds", cfg.seeds},
                          {"data_dir", cfg.data_dir},
                          {"out_dir", cfg.out_dir},
                          {"train_limit", cfg.train_limit},
                          {"precision", cfg.precision}};
}

ExperimentConfig config_from_json(const nlohmann::json& j) {
    ExperimentConfig cfg;
    if (j.contains("model")) cfg.model = model_from_string(j.at("model").get<std::string>());
    if (j.contains("input_dim")) cfg.input_dim = j.at("input_dim").get<std::size_t>();
    if (j.contains("components")) cfg.components = j.at("components").get<std::size_t>();
    if (j.contains("epochs")) cfg.epochs = j.at("epochs").get<std::size_t>();
    if (j.contains("batch_size")) cfg.batch_size = j.at("batch_size").get<std::size_t>();
    if (j.contains("optimizer")) cfg.optimizer = opt_from_string(j.at("optimizer").get<std::string>());
    if (j.contains("lr")) cfg.lr = j.at("lr").get<double>();
    if (j.contains("lambda_var")) cfg.lambda_var = j.at("lambda_var").get<double>();
    if (j.contains("lambda_tc")) cfg.lambda_tc = j.at("lambda_tc").get<double>();
    if (j.contains("lambda_wr")) cfg.lambda_wr = j.at("lambda_wr").get<double>();
    if (j.contains("l1_weight")) cfg.l1_weight = j.at("l1_weight").get<double>();
    if (j.contains("enable_lse")) cfg.enable_lse = j.at("enable_lse").get<bool>();
    if (j.contains("enable_var")) cfg.enable_var = j.at("enable_var").get<bool>();
    if (j.contains("enable_tc")) cfg.enable_tc = j.at("enable_tc").get<bool>();
    if (j.contains("seeds")) cfg.seeds = j.at("seeds").get<std::vector<std::uint64_t>>();
    if (j.contains("data_dir")) cfg.data_dir = j.at("data_dir").get<std::string>();
    if (j.contains("out_dir")) cfg.out_dir = j.at("out_dir").get<std::string>();
    if (j.contains("train_limit")) cfg.train_limit = j.at("train_limit").get<std::size_t>();
    if (j.contains("precision")) cfg.precision = j.at("precision").get<std::string>();
    return cfg;
}

ExperimentConfig load_config_file(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw std::runtime_error("config: cannot open " + path);
    nlohmann::json j;
    f >> j;
    return config_from_json(j);
}

} // namespace lsemix
