#pragma once

#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "lsemix/checkpoint.hpp"
#include "lsemix/config.hpp"
#include "lsemix/data.hpp"
#include "lsemix/eval.hpp"
#include "lsemix/objective.hpp"

namespace lsemix {

// Raised when a loss term turns non-finite; names the epoch and term so
// collapse diagnostics are explicit rather than silent NaN propagation.
class TrainError : public std::runtime_error {
public:
    TrainError(std::size_t epoch, const std::string& term)
        : std::runtime_error("non-finite loss in term \"" + term + "\" at epoch " +
                             std::to_string(epoch)),
          epoch_(epoch), term_(term) {}

    std::size_t epoch() const { return epoch_; }
    const std::string& term() const { return term_; }

private:
    std::size_t epoch_;
    std::string term_;
};

struct RunResult {
    std::uint64_t seed = 0;
    std::vector<nlohmann::json> epoch_logs; // one object per epoch
    double final_loss = 0.0;                // mean total of the last epoch
    Checkpoint model;
    RepMetrics metrics;      // on the test split
    double probe_accuracy = 0.0;
    int probe_iterations = 0;
    double recon_mse = 0.0;  // test split; pseudo-decoder for the encoder model
    double wall_time_sec = 0.0;
};

// Trains one model for one seed. Writes one JSON object per epoch to
// epoch_log when given (newline-terminated; no timing fields, so the
// stream is byte-reproducible for a fixed config and seed).
RunResult train_run(const ExperimentConfig& cfg, std::uint64_t seed, const Dataset& train,
                    const Dataset& test, std::ostream* epoch_log = nullptr);

nlohmann::json run_record_json(const ExperimentConfig& cfg, const RunResult& run);

} // namespace lsemix
