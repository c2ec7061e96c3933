#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "lsemix/objective.hpp"
#include "support/gates.hpp"

using namespace lsemix;

TEST_CASE("lse loss on uniform zero distances") {
    Matrix d(1, 64);
    LossGrad g = lse_loss_grad(d);
    CHECK(g.loss == doctest::Approx(-std::log(64.0)).epsilon(1e-14));
    for (std::size_t i = 0; i < g.grad.size(); ++i) {
        CHECK(g.grad.data()[i] == doctest::Approx(1.0 / 64.0).epsilon(1e-14));
    }
}

TEST_CASE("gradient-responsibility identity is exact") {
    Rng rng(55);
    // power-of-two batch so the 1/B scaling is an exponent shift
    Matrix d = gates::random_activations(rng, 8, 5, -3.0, 3.0);
    LossGrad g = lse_loss_grad(d);
    Matrix r = responsibilities(d);
    double max_err = 0.0;
    for (std::size_t i = 0; i < d.size(); ++i) {
        max_err = std::fmax(max_err, std::fabs(8.0 * g.grad.data()[i] - r.data()[i]));
    }
    CHECK(max_err == 0.0);

    // non-power-of-two batch still meets the 1e-12 bound
    Matrix d2 = gates::random_activations(rng, 6, 5, -3.0, 3.0);
    LossGrad g2 = lse_loss_grad(d2);
    Matrix r2 = responsibilities(d2);
    for (std::size_t i = 0; i < d2.size(); ++i) {
        CHECK(std::fabs(6.0 * g2.grad.data()[i] - r2.data()[i]) <= 1e-12);
    }
}

TEST_CASE("lse gradient matches finite differences") {
    Rng rng(56);
    gates::GateResult res = gates::lse_gate(rng, 20);
    CHECK(res.pass);
}

TEST_CASE("variance penalty on unit-variance columns") {
    // two rows {0, 2} in every column: population variance exactly 1
    Matrix d(2, 4);
    for (std::size_t j = 0; j < 4; ++j) d(1, j) = 2.0;
    ObjectiveConfig cfg;
    LossGrad g = variance_penalty_grad(d, cfg);
    CHECK(std::fabs(g.loss - (-4.0 * std::log(1.0 + 1e-8))) < 1e-14);
    CHECK(std::fabs(g.loss) < 1e-6);
}

TEST_CASE("variance penalty barrier on a constant column") {
    Matrix d(8, 2);
    for (std::size_t i = 0; i < 8; ++i) {
        d(i, 0) = 3.0;                         // constant: var 0
        d(i, 1) = static_cast<double>(i % 2);  // var 0.25
    }
    ObjectiveConfig cfg;
    LossGrad g = variance_penalty_grad(d, cfg);
    const double expected = -std::log(1e-8) - std::log(0.25 + 1e-8);
    CHECK(g.loss == doctest::Approx(expected).epsilon(1e-9));
    CHECK(-std::log(1e-8) == doctest::Approx(18.42).epsilon(1e-3));

    CHECK_THROWS_AS(variance_penalty_grad(Matrix(1, 2), cfg), std::invalid_argument);
}

TEST_CASE("variance penalty decreases as a column's variance grows") {
    Rng rng(57);
    ObjectiveConfig cfg;
    Matrix d = gates::random_activations(rng, 16, 3, 0.0, 2.0);
    const double before = variance_penalty_grad(d, cfg).loss;
    for (std::size_t i = 0; i < 16; ++i) d(i, 1) *= 3.0; // inflate one column's spread
    const double after = variance_penalty_grad(d, cfg).loss;
    CHECK(after < before);
}

TEST_CASE("variance gradient matches finite differences") {
    Rng rng(58);
    gates::GateResult res = gates::var_gate(rng, 20);
    CHECK(res.pass);
}

TEST_CASE("decorrelation loss on duplicated columns") {
    Rng rng(59);
    Matrix d(32, 2);
    for (std::size_t i = 0; i < 32; ++i) {
        d(i, 0) = rng.uniform(0.0, 2.0);
        d(i, 1) = d(i, 0);
    }
    ObjectiveConfig cfg;
    LossGrad g = decorrelation_penalty_grad(d, cfg);
    CHECK(g.loss == doctest::Approx(2.0).epsilon(1e-6));
}

TEST_CASE("decorrelation loss on two-point anti-correlated indicators") {
    Matrix d(2, 2, {1.0, 0.0, 0.0, 1.0});
    ObjectiveConfig cfg;
    LossGrad g = decorrelation_penalty_grad(d, cfg);
    CHECK(g.loss == doctest::Approx(2.0).epsilon(1e-6));

    CHECK_THROWS_AS(decorrelation_penalty_grad(Matrix(1, 2), cfg), std::invalid_argument);
}

TEST_CASE("decorrelation loss vanishes for uncorrelated columns") {
    // exactly orthogonal two-column pattern over 4 rows
    Matrix d(4, 2, {1.0, 1.0,
                    1.0, -1.0,
                    -1.0, 1.0,
                    -1.0, -1.0});
    ObjectiveConfig cfg;
    LossGrad g = decorrelation_penalty_grad(d, cfg);
    CHECK(g.loss >= 0.0);
    CHECK(g.loss < 1e-9);
}

TEST_CASE("decorrelation gradient matches finite differences") {
    Rng rng(60);
    gates::GateResult res = gates::tc_gate(rng, 20);
    CHECK(res.pass);
}

TEST_CASE("weight regularizer identity and zero cases") {
    WeightRegGrad g = weight_reg_grad(Matrix::identity(4), 0.7);
    CHECK(g.loss == 0.0);
    for (std::size_t i = 0; i < g.gradW.size(); ++i) CHECK(g.gradW.data()[i] == 0.0);

    const double lambda = 0.3;
    WeightRegGrad z = weight_reg_grad(Matrix(5, 3), lambda);
    CHECK(z.loss == doctest::Approx(lambda * 3.0).epsilon(1e-14));
    for (std::size_t i = 0; i < z.gradW.size(); ++i) CHECK(z.gradW.data()[i] == 0.0);
}

TEST_CASE("weight regularizer gradient matches finite differences") {
    Rng rng(61);
    gates::GateResult res = gates::wr_gate(rng, 20);
    CHECK(res.pass);
}

TEST_CASE("full objective composition with penalties disabled") {
    Rng rng(62);
    EncoderParams p;
    Matrix X;
    gates::draw_away_from_kink(rng, p, X, 8, 5, 3);

    ObjectiveConfig cfg;
    cfg.enable_var = false;
    cfg.enable_tc = false;
    EncoderGrads g = full_loss_grad(p, X, cfg);

    // with penalties off, gradD is exactly the responsibility matrix
    // masked by the ReLU (the summed LSE term)
    ForwardCache fc = encoder_forward(p, X);
    Matrix resp = responsibilities(fc.Dact);
    Matrix gradD(8, 3);
    for (std::size_t i = 0; i < gradD.size(); ++i) {
        gradD.data()[i] = fc.Z.data()[i] > 0.0 ? resp.data()[i] : 0.0;
    }
    Matrix wantW = matmul_tn(gradD, X);
    for (std::size_t i = 0; i < wantW.size(); ++i) {
        CHECK(g.gradW.data()[i] == doctest::Approx(wantW.data()[i]).epsilon(1e-12));
    }
    CHECK(g.breakdown.var == 0.0);
    CHECK(g.breakdown.tc == 0.0);
    CHECK(g.breakdown.total == g.breakdown.lse);
}

TEST_CASE("full objective gradient matches finite differences") {
    Rng rng(63);
    gates::GateResult res = gates::full_gate(rng, 10);
    CHECK(res.pass);
}

TEST_CASE("dead-gradient regime when all pre-activations are negative") {
    EncoderParams p;
    p.W = Matrix(3, 4);
    Rng rng(64);
    for (std::size_t i = 0; i < p.W.size(); ++i) p.W.data()[i] = rng.uniform(-0.1, 0.1);
    p.b = {-5.0, -5.0, -5.0};
    Matrix X = gates::random_activations(rng, 6, 4, 0.0, 1.0);

    ObjectiveConfig cfg;
    EncoderGrads g = full_loss_grad(p, X, cfg);
    for (std::size_t i = 0; i < g.gradW.size(); ++i) CHECK(g.gradW.data()[i] == 0.0);
    for (double gb : g.gradb) CHECK(gb == 0.0);
}

TEST_CASE("full objective rejects too-small batches when penalties are on") {
    Rng rng(65);
    EncoderParams p = init_encoder(rng, 4, 3);
    ObjectiveConfig cfg;
    CHECK_THROWS_AS(full_loss_grad(p, Matrix(1, 4), cfg), std::invalid_argument);
}

TEST_CASE("loss breakdown total is the weighted sum and reproducible") {
    Rng rng(66);
    EncoderParams p;
    Matrix X;
    gates::draw_away_from_kink(rng, p, X, 16, 6, 4);
    ObjectiveConfig cfg;
    cfg.lambda_var = 0.7;
    cfg.lambda_tc = 1.3;

    EncoderGrads a = full_loss_grad(p, X, cfg);
    EncoderGrads b = full_loss_grad(p, X, cfg);
    CHECK(a.breakdown.total == b.breakdown.total); // bit-for-bit
    const double recomposed = a.breakdown.lse + cfg.lambda_var * a.breakdown.var +
                              cfg.lambda_tc * a.breakdown.tc + a.breakdown.wr;
    CHECK(std::fabs(a.breakdown.total - recomposed) <= 1e-12);
}

TEST_CASE("sae loss trivial cases") {
    SaeParams p;
    p.W_enc = Matrix(3, 5);
    p.b_enc.assign(3, 0.0);
    p.W_dec = Matrix(5, 3);
    p.b_dec.assign(5, 0.0);

    SaeGrads zero = sae_loss_grad(p, Matrix(4, 5), 0.01);
    CHECK(zero.loss.mse == 0.0);
    CHECK(zero.loss.l1 == 0.0);
    CHECK(zero.loss.total == 0.0);

    // zero parameters: Xhat = 0, so mse equals the input mean square
    Rng rng(67);
    Matrix X = gates::random_activations(rng, 4, 5, -1.0, 1.0);
    double m = 0.0;
    for (std::size_t i = 0; i < X.size(); ++i) m += X.data()[i] * X.data()[i];
    m /= double(X.size());
    SaeGrads g = sae_loss_grad(p, X, 0.01);
    CHECK(g.loss.mse == doctest::Approx(m).epsilon(1e-14));

    CHECK_THROWS_AS(sae_loss_grad(p, Matrix(2, 7), 0.01), std::invalid_argument);
}

TEST_CASE("sae gradient matches finite differences") {
    Rng rng(68);
    gates::GateResult res = gates::sae_gate(rng, 10);
    CHECK(res.pass);
}
