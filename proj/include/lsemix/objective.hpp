#pragma once

#include <vector>

#include "lsemix/matrix.hpp"
#include "lsemix/model.hpp"

namespace lsemix {

struct ObjectiveConfig {
    double lambda_var = 1.0;
    double lambda_tc = 1.0;
    double lambda_wr = 0.0;
    double eps_var = 1e-8;
    double eps_corr = 1e-8;
    bool enable_lse = true;
    bool enable_var = true;
    bool enable_tc = true;
};

// Per-batch loss terms. Components are stored unweighted;
// total = lse + lambda_var * var + lambda_tc * tc + wr, with disabled
// terms contributing zero (wr already carries its lambda).
struct LossBreakdown {
    double lse = 0.0;
    double var = 0.0;
    double tc = 0.0;
    double wr = 0.0;
    double total = 0.0;
};

struct LossGrad {
    double loss = 0.0;
    Matrix grad; // d(loss)/d(Dact), B x K
};

// Batch-mean attraction term: loss = (1/B) sum_i -log sum_j exp(-d_ij).
// The gradient row is exactly the responsibility row scaled by 1/B; the
// softmax and the gradient share the same float ops so the identity
// holds to the last bit after multiplying back by B.
LossGrad lse_loss_grad(const Matrix& Dact);

// loss = -sum_j log(Var_j + eps_var), population variance over the batch.
// grad[i][j] = -(2/B) * (d_ij - mean_j) / (Var_j + eps_var).
// Requires B >= 2.
LossGrad variance_penalty_grad(const Matrix& Dact, const ObjectiveConfig& cfg);

// loss = sum_{p != q} Corr(Dact)_pq^2 with eps-guarded correlations; the
// diagonal is excluded. Requires B >= 2.
//
// Gradient: with centered columns Xc, covariance S = Xc^T Xc / B and
// sigma_p = sqrt(S_pp + eps), the collected dL/dS is
//   M_pq = 2 C_pq / (sigma_p sigma_q)            (p != q)
//   M_pp = -(2 / sigma_p^2) sum_{q != p} C_pq^2
// and dL/dDact = (2/B) Xc M (the centering correction vanishes because
// Xc's columns sum to zero).
LossGrad decorrelation_penalty_grad(const Matrix& Dact, const ObjectiveConfig& cfg);

struct WeightRegGrad {
    double loss = 0.0;
    Matrix gradW; // K x D
};

// loss = lambda_wr * ||W^T W - I||_F^2, gradW = lambda_wr * 4 W (W^T W - I).
WeightRegGrad weight_reg_grad(const Matrix& W, double lambda_wr);

struct EncoderGrads {
    LossBreakdown breakdown;
    Matrix gradW;              // K x D
    std::vector<double> gradb; // K
};

// Full objective over one batch: the LSE term summed over samples
// (breakdown.lse = B * batch-mean, so its gradD is exactly the
// responsibility matrix), plus the once-per-batch penalties, masked
// through the ReLU (gradZ = gradD where Z > 0); gradW = gradZ^T X and
// gradb = column sums of gradZ.
// Requires B >= 2 when var or tc is enabled.
EncoderGrads full_loss_grad(const EncoderParams& p, const Matrix& X, const ObjectiveConfig& cfg);

struct SaeLoss {
    double mse = 0.0;
    double l1 = 0.0;
    double total = 0.0;
};

struct SaeGrads {
    SaeLoss loss;
    Matrix gradW_enc;              // K x D
    std::vector<double> gradb_enc; // K
    Matrix gradW_dec;              // D x K
    std::vector<double> gradb_dec; // D
};

// mse = mean over batch and pixels of (Xhat - X)^2;
// l1 = l1_weight * mean over batch of sum_j A_ij.
// Standard backprop through both linear layers and the ReLU; the L1
// subgradient at A = 0 is 0 (the ReLU mask kills it).
SaeGrads sae_loss_grad(const SaeParams& p, const Matrix& X, double l1_weight);

} // namespace lsemix
