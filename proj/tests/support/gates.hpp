#pragma once

// Finite-difference gates for every analytic gradient in the objective
// module, shared between the unit tests and the acceptance suite. Each
// gate runs `trials` randomized small instances and reports the worst
// tolerance ratio seen (<= 1 means every entry passed).

#include <cmath>

#include "gradcheck.hpp"
#include "lsemix/objective.hpp"
#include "lsemix/rng.hpp"

namespace gates {

struct GateResult {
    int trials = 0;
    double worst = 0.0;
    bool pass = true;

    void fold(double ratio) {
        if (ratio > worst) worst = ratio;
        if (ratio > 1.0) pass = false;
    }
};

inline lsemix::Matrix random_activations(lsemix::Rng& rng, std::size_t rows, std::size_t cols,
                                         double lo, double hi) {
    lsemix::Matrix m(rows, cols);
    for (std::size_t i = 0; i < m.size(); ++i) m.data()[i] = rng.uniform(lo, hi);
    return m;
}

inline GateResult lse_gate(lsemix::Rng& rng, int trials) {
    GateResult res;
    res.trials = trials;
    gradcheck::Tolerance tol;
    tol.rtol = 1e-6;
    for (int t = 0; t < trials; ++t) {
        lsemix::Matrix d = random_activations(rng, 8, 5, -2.0, 4.0);
        lsemix::LossGrad g = lsemix::lse_loss_grad(d);
        auto numeric = gradcheck::numeric_grad(
            [&] { return lsemix::lse_loss_grad(d).loss; }, d.data(), d.size(), tol.h);
        res.fold(gradcheck::worst_ratio(g.grad.data(), numeric, tol));
    }
    return res;
}

inline GateResult var_gate(lsemix::Rng& rng, int trials) {
    GateResult res;
    res.trials = trials;
    gradcheck::Tolerance tol;
    tol.rtol = 1e-6;
    lsemix::ObjectiveConfig cfg;
    for (int t = 0; t < trials; ++t) {
        lsemix::Matrix d = random_activations(rng, 16, 4, -1.0, 3.0);
        lsemix::LossGrad g = lsemix::variance_penalty_grad(d, cfg);
        auto numeric = gradcheck::numeric_grad(
            [&] { return lsemix::variance_penalty_grad(d, cfg).loss; }, d.data(), d.size(), tol.h);
        res.fold(gradcheck::worst_ratio(g.grad.data(), numeric, tol));
    }
    return res;
}

inline GateResult tc_gate(lsemix::Rng& rng, int trials) {
    GateResult res;
    res.trials = trials;
    gradcheck::Tolerance tol; // rtol 1e-5
    lsemix::ObjectiveConfig cfg;
    for (int t = 0; t < trials; ++t) {
        lsemix::Matrix d = random_activations(rng, 32, 6, -1.0, 3.0);
        lsemix::LossGrad g = lsemix::decorrelation_penalty_grad(d, cfg);
        auto numeric = gradcheck::numeric_grad(
            [&] { return lsemix::decorrelation_penalty_grad(d, cfg).loss; }, d.data(), d.size(),
            tol.h);
        res.fold(gradcheck::worst_ratio(g.grad.data(), numeric, tol));
    }
    return res;
}

inline GateResult wr_gate(lsemix::Rng& rng, int trials) {
    GateResult res;
    res.trials = trials;
    gradcheck::Tolerance tol;
    tol.rtol = 1e-6;
    for (int t = 0; t < trials; ++t) {
        lsemix::Matrix w = random_activations(rng, 4, 3, -1.0, 1.0);
        const double lambda = rng.uniform(0.1, 2.0);
        lsemix::WeightRegGrad g = lsemix::weight_reg_grad(w, lambda);
        auto numeric = gradcheck::numeric_grad(
            [&] { return lsemix::weight_reg_grad(w, lambda).loss; }, w.data(), w.size(), tol.h);
        res.fold(gradcheck::worst_ratio(g.gradW.data(), numeric, tol));
    }
    return res;
}

// Draws an encoder/input pair whose pre-activations all sit at least
// `margin` away from the ReLU kink, so central differences stay on one
// side of it.
inline void draw_away_from_kink(lsemix::Rng& rng, lsemix::EncoderParams& p, lsemix::Matrix& X,
                                std::size_t B, std::size_t D, std::size_t K,
                                double margin = 1e-3) {
    for (int attempt = 0; attempt < 200; ++attempt) {
        p.W = random_activations(rng, K, D, -0.6, 0.6);
        p.b.resize(K);
        for (auto& b : p.b) b = rng.uniform(-0.5, 0.5);
        X = random_activations(rng, B, D, -1.0, 1.0);
        lsemix::ForwardCache fc = lsemix::encoder_forward(p, X);
        bool ok = true;
        for (std::size_t i = 0; i < fc.Z.size(); ++i) {
            if (std::fabs(fc.Z.data()[i]) < margin) {
                ok = false;
                break;
            }
        }
        if (ok) return;
    }
    throw std::runtime_error("draw_away_from_kink: no margin instance found");
}

inline GateResult full_gate(lsemix::Rng& rng, int trials) {
    GateResult res;
    res.trials = trials;
    gradcheck::Tolerance tol; // rtol 1e-5
    lsemix::ObjectiveConfig cfg;
    cfg.lambda_var = 1.0;
    cfg.lambda_tc = 1.0;
    for (int t = 0; t < trials; ++t) {
        lsemix::EncoderParams p;
        lsemix::Matrix X;
        draw_away_from_kink(rng, p, X, 16, 6, 4);
        cfg.lambda_wr = (t % 2 == 0) ? 0.0 : 0.5; // exercise both paths
        lsemix::EncoderGrads g = lsemix::full_loss_grad(p, X, cfg);

        auto loss = [&] { return lsemix::full_loss_grad(p, X, cfg).breakdown.total; };
        auto numW = gradcheck::numeric_grad(loss, p.W.data(), p.W.size(), tol.h);
        res.fold(gradcheck::worst_ratio(g.gradW.data(), numW, tol));
        auto numB = gradcheck::numeric_grad(loss, p.b.data(), p.b.size(), tol.h);
        res.fold(gradcheck::worst_ratio(g.gradb.data(), numB, tol));
    }
    return res;
}

inline GateResult sae_gate(lsemix::Rng& rng, int trials) {
    GateResult res;
    res.trials = trials;
    gradcheck::Tolerance tol; // rtol 1e-5
    const std::size_t B = 8, D = 5, K = 3;
    for (int t = 0; t < trials; ++t) {
        lsemix::SaeParams p;
        lsemix::Matrix X;
        // rejection-sample pre-activations away from the kink
        for (int attempt = 0;; ++attempt) {
            p.W_enc = random_activations(rng, K, D, -0.7, 0.7);
            p.b_enc.resize(K);
            for (auto& b : p.b_enc) b = rng.uniform(-0.5, 0.5);
            p.W_dec = random_activations(rng, D, K, -0.7, 0.7);
            p.b_dec.resize(D);
            for (auto& b : p.b_dec) b = rng.uniform(-0.5, 0.5);
            X = random_activations(rng, B, D, -1.0, 1.0);
            lsemix::SaeForward fw = lsemix::sae_forward(p, X);
            bool ok = true;
            for (std::size_t i = 0; i < fw.Z_enc.size(); ++i) {
                if (std::fabs(fw.Z_enc.data()[i]) < 1e-3) {
                    ok = false;
                    break;
                }
            }
            if (ok) break;
            if (attempt > 200) throw std::runtime_error("sae_gate: no margin instance found");
        }
        const double l1 = 0.01;
        lsemix::SaeGrads g = lsemix::sae_loss_grad(p, X, l1);

        auto loss = [&] { return lsemix::sae_loss_grad(p, X, l1).loss.total; };
        auto numWe = gradcheck::numeric_grad(loss, p.W_enc.data(), p.W_enc.size(), tol.h);
        res.fold(gradcheck::worst_ratio(g.gradW_enc.data(), numWe, tol));
        auto numBe = gradcheck::numeric_grad(loss, p.b_enc.data(), p.b_enc.size(), tol.h);
        res.fold(gradcheck::worst_ratio(g.gradb_enc.data(), numBe, tol));
        auto numWd = gradcheck::numeric_grad(loss, p.W_dec.data(), p.W_dec.size(), tol.h);
        res.fold(gradcheck::worst_ratio(g.gradW_dec.data(), numWd, tol));
        auto numBd = gradcheck::numeric_grad(loss, p.b_dec.data(), p.b_dec.size(), tol.h);
        res.fold(gradcheck::worst_ratio(g.gradb_dec.data(), numBd, tol));
    }
    return res;
}

} // namespace gates
