#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

namespace lsemix {

// One parameter block and its gradient, viewed in place.
struct BlockRef {
    double* param;
    const double* grad;
    std::size_t size;
};

struct SgdState {
    double lr = 0.0;
};

// theta <- theta - lr * g for every entry of every block.
void sgd_step(const SgdState& state, const std::vector<BlockRef>& blocks);

// Bias-corrected Adam with per-block moment buffers. Block sizes are
// fixed at construction; step() rejects mismatched shapes.
class AdamState {
public:
    AdamState(double lr, const std::vector<std::size_t>& block_sizes);

    double lr = 0.0;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    std::int64_t t = 0;

    std::vector<std::vector<double>> m;
    std::vector<std::vector<double>> v;
};

// m <- b1 m + (1-b1) g;  v <- b2 v + (1-b2) g^2;
// theta <- theta - lr * mhat / (sqrt(vhat) + eps).
void adam_step(AdamState& state, const std::vector<BlockRef>& blocks);

} // namespace lsemix
