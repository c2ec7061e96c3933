#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "lsemix/matrix.hpp"

namespace lsemix {

// Representation-quality summary over an evaluation split.
//   dead: columns whose population variance falls below dead_threshold.
//   redundancy: sum of squared off-diagonal correlations over live
//     columns only; absent when fewer than two columns are alive.
//   resp_entropy: mean Shannon entropy (nats) of responsibility rows.
//   l0_density: mean fraction of entries strictly > 0.
struct RepMetrics {
    std::size_t dead_units = 0;
    double dead_fraction = 0.0;
    std::optional<double> redundancy;
    double resp_entropy = 0.0;
    double l0_density = 0.0;
    double l0_mean_active = 0.0;
};

RepMetrics rep_metrics(const Matrix& acts, const Matrix& resp, double dead_threshold = 0.01);

struct ProbeConfig {
    int max_iters = 500;
    double tol = 1e-7;   // stop when loss improvement falls below this
    double l2 = 1e-4;    // coefficient on sum of squared weights
    double lr = 0.05;    // full-batch Adam step size
};

struct ProbeResult {
    double accuracy = 0.0; // on the held-out set
    Matrix weights;        // 10 x K
    std::vector<double> bias;
    int iterations = 0;
};

// Multinomial softmax regression on frozen features: full-batch Adam on
// mean cross-entropy plus l2 * sum(W^2). Weights start at zero (the
// objective is convex), so the result is deterministic with no seed.
ProbeResult train_linear_probe(const Matrix& train_feats, const std::vector<int>& train_labels,
                               const Matrix& test_feats, const std::vector<int>& test_labels,
                               const ProbeConfig& cfg = {});

// Mean over all entries of (Xhat - X)^2. Shapes must match.
double reconstruction_mse(const Matrix& X, const Matrix& Xhat);

// Writes each row of W as a 28x28 tile into a binary PPM (P6) grid.
// Values are normalized by max|W| over the whole matrix; positive
// weights blend white->blue, negative white->red, zero stays white.
// Separator pixels between tiles are mid-gray. Requires W.cols() == 784.
void export_weight_grid(const Matrix& W, const std::string& path, std::size_t tiles_per_row = 8,
                        std::size_t separator_px = 2);

// Grid geometry helper: tiles_per_row*28 + (tiles_per_row-1)*separator_px etc.
struct GridDims {
    std::size_t width = 0;
    std::size_t height = 0;
};
GridDims weight_grid_dims(std::size_t n_tiles, std::size_t tiles_per_row, std::size_t separator_px);

} // namespace lsemix
