#include "lsemix/objective.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace lsemix {

LossGrad lse_loss_grad(const Matrix& Dact) {
    const std::size_t B = Dact.rows();
    const std::size_t K = Dact.cols();
    if (B < 1) throw std::invalid_argument("lse_loss_grad: empty batch");
    LossGrad out;
    out.grad = Matrix(B, K);
    const double invB = 1.0 / static_cast<double>(B);
    double loss = 0.0;
    for (std::size_t i = 0; i < B; ++i) {
        const double* di = Dact.row(i);
        double* gi = out.grad.row(i);
        softmax_neg(di, gi, K);
        loss += logsumexp_neg(di, K);
        for (std::size_t j = 0; j < K; ++j) gi[j] *= invB;
    }
    out.loss = loss * invB;
    return out;
}

LossGrad variance_penalty_grad(const Matrix& Dact, const ObjectiveConfig& cfg) {
    const std::size_t B = Dact.rows();
    const std::size_t K = Dact.cols();
    if (B < 2) {
        throw std::invalid_argument("variance_penalty_grad: requires batch >= 2, got " +
                                    std::to_string(B));
    }
    ColumnStats s = column_stats(Dact);
    LossGrad out;
    out.grad = Matrix(B, K);
    double loss = 0.0;
    std::vector<double> coef(K); // -(2/B) / (Var_j + eps)
    const double scale = -2.0 / static_cast<double>(B);
    for (std::size_t j = 0; j < K; ++j) {
        const double vj = s.var[j] + cfg.eps_var;
        loss -= std::log(vj);
        coef[j] = scale / vj;
    }
    for (std::size_t i = 0; i < B; ++i) {
        const double* di = Dact.row(i);
        double* gi = out.grad.row(i);
        for (std::size_t j = 0; j < K; ++j) gi[j] = coef[j] * (di[j] - s.mean[j]);
    }
    out.loss = loss;
    return out;
}

LossGrad decorrelation_penalty_grad(const Matrix& Dact, const ObjectiveConfig& cfg) {
    const std::size_t B = Dact.rows();
    const std::size_t K = Dact.cols();
    if (B < 2) {
        throw std::invalid_argument("decorrelation_penalty_grad: requires batch >= 2, got " +
                                    std::to_string(B));
    }
    ColumnStats s = column_stats(Dact);

    Matrix centered(B, K);
    for (std::size_t i = 0; i < B; ++i) {
        const double* di = Dact.row(i);
        double* ci = centered.row(i);
        for (std::size_t j = 0; j < K; ++j) ci[j] = di[j] - s.mean[j];
    }

    const double invB = 1.0 / static_cast<double>(B);
    Matrix cov = matmul_tn(centered, centered); // unscaled; * invB below
    std::vector<double> inv_var(K), inv_sd(K);
    for (std::size_t j = 0; j < K; ++j) {
        const double vj = s.var[j] + cfg.eps_corr;
        inv_var[j] = 1.0 / vj;
        inv_sd[j] = 1.0 / std::sqrt(vj);
    }

    // Corr and the collected dL/dS in one pass.
    Matrix M(K, K);
    double loss = 0.0;
    for (std::size_t p = 0; p < K; ++p) {
        double diag_acc = 0.0;
        for (std::size_t q = 0; q < K; ++q) {
            if (q == p) continue;
            const double c = cov(p, q) * invB * inv_sd[p] * inv_sd[q];
            loss += c * c;
            M(p, q) = 2.0 * c * inv_sd[p] * inv_sd[q];
            diag_acc += c * c;
        }
        M(p, p) = -2.0 * inv_var[p] * diag_acc;
    }

    LossGrad out;
    out.loss = loss;
    out.grad = matmul(centered, M); // B x K
    const double scale = 2.0 * invB;
    for (std::size_t i = 0; i < out.grad.size(); ++i) out.grad.data()[i] *= scale;
    return out;
}

WeightRegGrad weight_reg_grad(const Matrix& W, double lambda_wr) {
    const std::size_t D = W.cols();
    Matrix gram = matmul_tn(W, W); // D x D
    for (std::size_t j = 0; j < D; ++j) gram(j, j) -= 1.0;

    double fro2 = 0.0;
    for (std::size_t i = 0; i < gram.size(); ++i) {
        const double g = gram.data()[i];
        fro2 += g * g;
    }

    WeightRegGrad out;
    out.loss = lambda_wr * fro2;
    out.gradW = matmul(W, gram); // K x D
    const double scale = 4.0 * lambda_wr;
    for (std::size_t i = 0; i < out.gradW.size(); ++i) out.gradW.data()[i] *= scale;
    return out;
}

EncoderGrads full_loss_grad(const EncoderParams& p, const Matrix& X, const ObjectiveConfig& cfg) {
    const std::size_t B = X.rows();
    const std::size_t K = p.components();
    if ((cfg.enable_var || cfg.enable_tc) && B < 2) {
        throw std::invalid_argument("full_loss_grad: variance/decorrelation need batch >= 2, got " +
                                    std::to_string(B));
    }

    ForwardCache fc = encoder_forward(p, X);

    EncoderGrads out;
    Matrix gradD(B, K);
    if (cfg.enable_lse) {
        // The attraction term enters the batch objective summed over
        // samples, not averaged: one LSE term per input against one set
        // of batch penalties. Averaging instead weakens the pull by 1/B
        // and the equilibrium degenerates to dense, ever-growing
        // activations (the var+tc-only regime).
        LossGrad lse = lse_loss_grad(fc.Dact);
        const double batch = static_cast<double>(B);
        out.breakdown.lse = batch * lse.loss;
        for (std::size_t i = 0; i < gradD.size(); ++i)
            gradD.data()[i] += batch * lse.grad.data()[i];
    }
    if (cfg.enable_var) {
        LossGrad var = variance_penalty_grad(fc.Dact, cfg);
        out.breakdown.var = var.loss;
        for (std::size_t i = 0; i < gradD.size(); ++i)
            gradD.data()[i] += cfg.lambda_var * var.grad.data()[i];
    }
    if (cfg.enable_tc) {
        LossGrad tc = decorrelation_penalty_grad(fc.Dact, cfg);
        out.breakdown.tc = tc.loss;
        for (std::size_t i = 0; i < gradD.size(); ++i)
            gradD.data()[i] += cfg.lambda_tc * tc.grad.data()[i];
    }

    // ReLU mask: distances respond only where Z > 0.
    for (std::size_t i = 0; i < gradD.size(); ++i) {
        if (!(fc.Z.data()[i] > 0.0)) gradD.data()[i] = 0.0;
    }

    out.gradW = matmul_tn(gradD, X); // K x D
    out.gradb.assign(K, 0.0);
    for (std::size_t i = 0; i < B; ++i) {
        const double* gi = gradD.row(i);
        for (std::size_t j = 0; j < K; ++j) out.gradb[j] += gi[j];
    }

    if (cfg.lambda_wr > 0.0) {
        WeightRegGrad wr = weight_reg_grad(p.W, cfg.lambda_wr);
        out.breakdown.wr = wr.loss;
        for (std::size_t i = 0; i < out.gradW.size(); ++i)
            out.gradW.data()[i] += wr.gradW.data()[i];
    }

    out.breakdown.total = (cfg.enable_lse ? out.breakdown.lse : 0.0) +
                          (cfg.enable_var ? cfg.lambda_var * out.breakdown.var : 0.0) +
                          (cfg.enable_tc ? cfg.lambda_tc * out.breakdown.tc : 0.0) +
                          out.breakdown.wr;
    return out;
}

SaeGrads sae_loss_grad(const SaeParams& p, const Matrix& X, double l1_weight) {
    const std::size_t B = X.rows();
    const std::size_t D = p.input_dim();
    const std::size_t K = p.components();
    if (X.cols() != D) {
        throw std::invalid_argument("sae_loss_grad: input has " + std::to_string(X.cols()) +
                                    " columns, model expects " + std::to_string(D));
    }

    SaeForward fw = sae_forward(p, X);

    SaeGrads out;
    const double inv_bd = 1.0 / static_cast<double>(B * D);
    const double invB = 1.0 / static_cast<double>(B);

    // gXhat = 2 (Xhat - X) / (B*D); reuse fw.Xhat as the residual buffer.
    double mse = 0.0;
    for (std::size_t i = 0; i < fw.Xhat.size(); ++i) {
        const double r = fw.Xhat.data()[i] - X.data()[i];
        mse += r * r;
        fw.Xhat.data()[i] = 2.0 * r * inv_bd;
    }
    out.loss.mse = mse * inv_bd;

    double l1 = 0.0;
    for (std::size_t i = 0; i < fw.A.size(); ++i) l1 += fw.A.data()[i];
    out.loss.l1 = l1_weight * l1 * invB;
    out.loss.total = out.loss.mse + out.loss.l1;

    const Matrix& gXhat = fw.Xhat;
    out.gradW_dec = matmul_tn(gXhat, fw.A); // D x K
    out.gradb_dec.assign(D, 0.0);
    for (std::size_t i = 0; i < B; ++i) {
        const double* gi = gXhat.row(i);
        for (std::size_t j = 0; j < D; ++j) out.gradb_dec[j] += gi[j];
    }

    Matrix gA = matmul(gXhat, p.W_dec); // B x K
    const double l1_term = l1_weight * invB;
    for (std::size_t i = 0; i < gA.size(); ++i) {
        if (fw.Z_enc.data()[i] > 0.0) {
            gA.data()[i] += l1_term;
        } else {
            gA.data()[i] = 0.0;
        }
    }

    out.gradW_enc = matmul_tn(gA, X); // K x D
    out.gradb_enc.assign(K, 0.0);
    for (std::size_t i = 0; i < B; ++i) {
        const double* gi = gA.row(i);
        for (std::size_t j = 0; j < K; ++j) out.gradb_enc[j] += gi[j];
    }
    return out;
}

} // namespace lsemix
