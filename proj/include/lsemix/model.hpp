#pragma once

#include <cstddef>
#include <vector>

#include "lsemix/matrix.hpp"
#include "lsemix/rng.hpp"

namespace lsemix {

// Activation applied to pre-activations to obtain component distances.
// ReLU is the only variant the training engine uses; the enum exists so
// the forward pass has a single substitution point.
enum class Activation { kRelu };

// Single-layer encoder: z = W x + b, d = relu(z). Each of the K rows of
// W is one component; d_j is that component's distance to the input
// (zero = strong match).
struct EncoderParams {
    Matrix W;              // K x D
    std::vector<double> b; // K

    std::size_t components() const { return W.rows(); }
    std::size_t input_dim() const { return W.cols(); }
};

struct ForwardCache {
    Matrix Z;    // B x K pre-activations
    Matrix Dact; // B x K distances, relu(Z)
};

// Baseline autoencoder with untied encoder/decoder weights.
struct SaeParams {
    Matrix W_enc;              // K x D
    std::vector<double> b_enc; // K
    Matrix W_dec;              // D x K
    std::vector<double> b_dec; // D

    std::size_t components() const { return W_enc.rows(); }
    std::size_t input_dim() const { return W_enc.cols(); }
};

struct SaeForward {
    Matrix Z_enc; // B x K pre-activations
    Matrix A;     // B x K relu(Z_enc)
    Matrix Xhat;  // B x D reconstruction
};

// Entries of W and b drawn uniform on [-1/sqrt(D), +1/sqrt(D)], W filled
// row-major then b; the draw order is part of the determinism contract.
EncoderParams init_encoder(Rng& rng, std::size_t D, std::size_t K);

ForwardCache encoder_forward(const EncoderParams& p, const Matrix& X);

// Row-wise softmax over negated distances; each row sums to 1.
Matrix responsibilities(const Matrix& Dact);

// Xhat = Dact * W, reading W^T as an untrained pseudo-decoder. No bias.
Matrix pseudo_reconstruct(const EncoderParams& p, const Matrix& Dact);

// Uniform +-1/sqrt(fan_in) per layer; draw order W_enc, b_enc, W_dec, b_dec.
SaeParams init_sae(Rng& rng, std::size_t D, std::size_t K);

SaeForward sae_forward(const SaeParams& p, const Matrix& X);

// K*D + K
std::size_t encoder_param_count(std::size_t D, std::size_t K);
// 2*K*D + K + D
std::size_t sae_param_count(std::size_t D, std::size_t K);

} // namespace lsemix
