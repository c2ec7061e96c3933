#include "lsemix/model.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace lsemix {

EncoderParams init_encoder(Rng& rng, std::size_t D, std::size_t K) {
    if (D < 1 || K < 1) throw std::invalid_argument("init_encoder: requires D >= 1 and K >= 1");
    const double bound = 1.0 / std::sqrt(static_cast<double>(D));
    EncoderParams p;
    p.W = Matrix(K, D);
    for (std::size_t i = 0; i < K * D; ++i) p.W.data()[i] = rng.uniform(-bound, bound);
    p.b.resize(K);
    for (std::size_t j = 0; j < K; ++j) p.b[j] = rng.uniform(-bound, bound);
    return p;
}

ForwardCache encoder_forward(const EncoderParams& p, const Matrix& X) {
    if (X.cols() != p.input_dim()) {
        throw std::invalid_argument("encoder_forward: input has " + std::to_string(X.cols()) +
                                    " columns, encoder expects " + std::to_string(p.input_dim()));
    }
    ForwardCache fc;
    fc.Z = matmul_nt(X, p.W); // B x K
    const std::size_t K = p.components();
    for (std::size_t i = 0; i < fc.Z.rows(); ++i) {
        double* zi = fc.Z.row(i);
        for (std::size_t j = 0; j < K; ++j) zi[j] += p.b[j];
    }
    fc.Dact = fc.Z;
    for (std::size_t i = 0; i < fc.Dact.size(); ++i) {
        double& v = fc.Dact.data()[i];
        if (v < 0.0) v = 0.0;
    }
    return fc;
}

Matrix responsibilities(const Matrix& Dact) {
    Matrix r(Dact.rows(), Dact.cols());
    for (std::size_t i = 0; i < Dact.rows(); ++i) {
        softmax_neg(Dact.row(i), r.row(i), Dact.cols());
    }
    return r;
}

Matrix pseudo_reconstruct(const EncoderParams& p, const Matrix& Dact) {
    if (Dact.cols() != p.components()) {
        throw std::invalid_argument("pseudo_reconstruct: activations have " +
                                    std::to_string(Dact.cols()) + " columns, encoder has " +
                                    std::to_string(p.components()) + " components");
    }
    return matmul(Dact, p.W); // (B x K) * (K x D)
}

SaeParams init_sae(Rng& rng, std::size_t D, std::size_t K) {
    if (D < 1 || K < 1) throw std::invalid_argument("init_sae: requires D >= 1 and K >= 1");
    SaeParams p;
    const double enc_bound = 1.0 / std::sqrt(static_cast<double>(D));
    p.W_enc = Matrix(K, D);
    for (std::size_t i = 0; i < K * D; ++i) p.W_enc.data()[i] = rng.uniform(-enc_bound, enc_bound);
    p.b_enc.resize(K);
    for (std::size_t j = 0; j < K; ++j) p.b_enc[j] = rng.uniform(-enc_bound, enc_bound);

    const double dec_bound = 1.0 / std::sqrt(static_cast<double>(K));
    p.W_dec = Matrix(D, K);
    for (std::size_t i = 0; i < D * K; ++i) p.W_dec.data()[i] = rng.uniform(-dec_bound, dec_bound);
    p.b_dec.resize(D);
    for (std::size_t j = 0; j < D; ++j) p.b_dec[j] = rng.uniform(-dec_bound, dec_bound);
    return p;
}

SaeForward sae_forward(const SaeParams& p, const Matrix& X) {
    if (X.cols() != p.input_dim()) {
        throw std::invalid_argument("sae_forward: input has " + std::to_string(X.cols()) +
                                    " columns, encoder expects " + std::to_string(p.input_dim()));
    }
    SaeForward fw;
    fw.Z_enc = matmul_nt(X, p.W_enc);
    const std::size_t K = p.components();
    for (std::size_t i = 0; i < fw.Z_enc.rows(); ++i) {
        double* zi = fw.Z_enc.row(i);
        for (std::size_t j = 0; j < K; ++j) zi[j] += p.b_enc[j];
    }
    fw.A = fw.Z_enc;
    for (std::size_t i = 0; i < fw.A.size(); ++i) {
        double& v = fw.A.data()[i];
        if (v < 0.0) v = 0.0;
    }
    fw.Xhat = matmul_nt(fw.A, p.W_dec);
    const std::size_t D = p.input_dim();
    for (std::size_t i = 0; i < fw.Xhat.rows(); ++i) {
        double* xi = fw.Xhat.row(i);
        for (std::size_t j = 0; j < D; ++j) xi[j] += p.b_dec[j];
    }
    return fw;
}

std::size_t encoder_param_count(std::size_t D, std::size_t K) {
    return K * D + K;
}

std::size_t sae_param_count(std::size_t D, std::size_t K) {
    return 2 * K * D + K + D;
}

} // namespace lsemix
