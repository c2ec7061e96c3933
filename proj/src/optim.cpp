#include "lsemix/optim.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace lsemix {

void sgd_step(const SgdState& state, const std::vector<BlockRef>& blocks) {
    if (!(state.lr > 0.0)) throw std::invalid_argument("sgd_step: requires lr > 0");
    for (const BlockRef& b : blocks) {
        for (std::size_t i = 0; i < b.size; ++i) b.param[i] -= state.lr * b.grad[i];
    }
}

AdamState::AdamState(double lr_, const std::vector<std::size_t>& block_sizes) : lr(lr_) {
    if (!(lr > 0.0)) throw std::invalid_argument("AdamState: requires lr > 0");
    m.reserve(block_sizes.size());
    v.reserve(block_sizes.size());
    for (std::size_t n : block_sizes) {
        m.emplace_back(n, 0.0);
        v.emplace_back(n, 0.0);
    }
}

void adam_step(AdamState& state, const std::vector<BlockRef>& blocks) {
    if (blocks.size() != state.m.size()) {
        throw std::invalid_argument("adam_step: got " + std::to_string(blocks.size()) +
                                    " blocks, state has " + std::to_string(state.m.size()));
    }
    for (std::size_t k = 0; k < blocks.size(); ++k) {
        if (blocks[k].size != state.m[k].size()) {
            throw std::invalid_argument("adam_step: block " + std::to_string(k) + " has size " +
                                        std::to_string(blocks[k].size) + ", state expects " +
                                        std::to_string(state.m[k].size()));
        }
    }

    state.t += 1;
    const double bc1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.t));
    const double bc2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.t));

    for (std::size_t k = 0; k < blocks.size(); ++k) {
        const BlockRef& b = blocks[k];
        double* mk = state.m[k].data();
        double* vk = state.v[k].data();
        for (std::size_t i = 0; i < b.size; ++i) {
            const double g = b.grad[i];
            mk[i] = state.beta1 * mk[i] + (1.0 - state.beta1) * g;
            vk[i] = state.beta2 * vk[i] + (1.0 - state.beta2) * g * g;
            const double mhat = mk[i] / bc1;
            const double vhat = vk[i] / bc2;
            b.param[i] -= state.lr * mhat / (std::sqrt(vhat) + state.eps);
        }
    }
}

} // namespace lsemix
