#include "lsemix/train.hpp"

#include <chrono>
#include <cmath>
#include <memory>

#include "lsemix/optim.hpp"

namespace lsemix {

namespace {

void check_finite(double v, std::size_t epoch, const char* term) {
    if (!std::isfinite(v)) throw TrainError(epoch, term);
}

struct EvalSummary {
    RepMetrics metrics;
    double probe_accuracy;
    int probe_iterations;
    double recon_mse;
};

EvalSummary evaluate_encoder(const EncoderParams& p, const Dataset& train, const Dataset& test) {
    ForwardCache train_fc = encoder_forward(p, train.images);
    ForwardCache test_fc = encoder_forward(p, test.images);
    Matrix resp = responsibilities(test_fc.Dact);

    EvalSummary ev;
    ev.metrics = rep_metrics(test_fc.Dact, resp);
    ProbeResult probe =
        train_linear_probe(train_fc.Dact, train.labels, test_fc.Dact, test.labels);
    ev.probe_accuracy = probe.accuracy;
    ev.probe_iterations = probe.iterations;
    ev.recon_mse = reconstruction_mse(test.images, pseudo_reconstruct(p, test_fc.Dact));
    return ev;
}

EvalSummary evaluate_sae(const SaeParams& p, const Dataset& train, const Dataset& test) {
    SaeForward train_fw = sae_forward(p, train.images);
    SaeForward test_fw = sae_forward(p, test.images);
    Matrix resp = responsibilities(test_fw.A);

    EvalSummary ev;
    ev.metrics = rep_metrics(test_fw.A, resp);
    ProbeResult probe = train_linear_probe(train_fw.A, train.labels, test_fw.A, test.labels);
    ev.probe_accuracy = probe.accuracy;
    ev.probe_iterations = probe.iterations;
    ev.recon_mse = reconstruction_mse(test.images, test_fw.Xhat);
    return ev;
}

Dataset truncate(const Dataset& ds, std::size_t limit) {
    Dataset out;
    std::vector<std::size_t> idx(limit);
    for (std::size_t i = 0; i < limit; ++i) idx[i] = i;
    out.images = gather_rows(ds.images, idx);
    out.labels.assign(ds.labels.begin(), ds.labels.begin() + static_cast<std::ptrdiff_t>(limit));
    return out;
}

} // namespace

RunResult train_run(const ExperimentConfig& cfg, std::uint64_t seed, const Dataset& train_full,
                    const Dataset& test, std::ostream* epoch_log) {
    cfg.validate();
    const auto t0 = std::chrono::steady_clock::now();

    const bool limited = cfg.train_limit > 0 && cfg.train_limit < train_full.images.rows();
    Dataset train_subset;
    if (limited) train_subset = truncate(train_full, cfg.train_limit);
    const Dataset& train = limited ? train_subset : train_full;

    Rng rng(seed);
    RunResult res;
    res.seed = seed;

    EncoderParams enc;
    SaeParams sae;
    std::vector<BlockRef> blocks;
    if (cfg.model == ModelChoice::kTheory) {
        enc = init_encoder(rng, cfg.input_dim, cfg.components);
        blocks = {{enc.W.data(), nullptr, enc.W.size()}, {enc.b.data(), nullptr, enc.b.size()}};
    } else {
        sae = init_sae(rng, cfg.input_dim, cfg.components);
        blocks = {{sae.W_enc.data(), nullptr, sae.W_enc.size()},
                  {sae.b_enc.data(), nullptr, sae.b_enc.size()},
                  {sae.W_dec.data(), nullptr, sae.W_dec.size()},
                  {sae.b_dec.data(), nullptr, sae.b_dec.size()}};
    }

    SgdState sgd{cfg.lr};
    std::unique_ptr<AdamState> adam;
    if (cfg.optimizer == OptChoice::kAdam) {
        std::vector<std::size_t> sizes;
        for (const auto& b : blocks) sizes.push_back(b.size);
        adam = std::make_unique<AdamState>(cfg.lr, sizes);
    }

    ObjectiveConfig obj;
    obj.lambda_var = cfg.lambda_var;
    obj.lambda_tc = cfg.lambda_tc;
    obj.lambda_wr = cfg.lambda_wr;
    obj.enable_lse = cfg.enable_lse;
    obj.enable_var = cfg.enable_var;
    obj.enable_tc = cfg.enable_tc;

    for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
        const auto slices = minibatches(train.images.rows(), cfg.batch_size, rng);
        double sum_lse = 0.0, sum_var = 0.0, sum_tc = 0.0, sum_wr = 0.0, sum_total = 0.0;
        double sum_mse = 0.0, sum_l1 = 0.0;

        for (const auto& slice : slices) {
            Matrix X = gather_rows(train.images, slice);
            if (cfg.model == ModelChoice::kTheory) {
                EncoderGrads g = full_loss_grad(enc, X, obj);
                check_finite(g.breakdown.lse, epoch, "lse");
                check_finite(g.breakdown.var, epoch, "var");
                check_finite(g.breakdown.tc, epoch, "tc");
                check_finite(g.breakdown.wr, epoch, "wr");
                check_finite(g.breakdown.total, epoch, "total");
                blocks[0].grad = g.gradW.data();
                blocks[1].grad = g.gradb.data();
                if (adam) {
                    adam_step(*adam, blocks);
                } else {
                    sgd_step(sgd, blocks);
                }
                sum_lse += g.breakdown.lse;
                sum_var += g.breakdown.var;
                sum_tc += g.breakdown.tc;
                sum_wr += g.breakdown.wr;
                sum_total += g.breakdown.total;
            } else {
                SaeGrads g = sae_loss_grad(sae, X, cfg.l1_weight);
                check_finite(g.loss.mse, epoch, "mse");
                check_finite(g.loss.l1, epoch, "l1");
                check_finite(g.loss.total, epoch, "total");
                blocks[0].grad = g.gradW_enc.data();
                blocks[1].grad = g.gradb_enc.data();
                blocks[2].grad = g.gradW_dec.data();
                blocks[3].grad = g.gradb_dec.data();
                if (adam) {
                    adam_step(*adam, blocks);
                } else {
                    sgd_step(sgd, blocks);
                }
                sum_mse += g.loss.mse;
                sum_l1 += g.loss.l1;
                sum_total += g.loss.total;
            }
        }

        const double nb = static_cast<double>(slices.size());
        nlohmann::json line;
        if (cfg.model == ModelChoice::kTheory) {
            line = nlohmann::json{{"epoch", epoch},      {"lse", sum_lse / nb},
                                  {"var", sum_var / nb}, {"tc", sum_tc / nb},
                                  {"wr", sum_wr / nb},   {"total", sum_total / nb}};
        } else {
            line = nlohmann::json{{"epoch", epoch},
                                  {"mse", sum_mse / nb},
                                  {"l1", sum_l1 / nb},
                                  {"total", sum_total / nb}};
        }
        res.epoch_logs.push_back(line);
        res.final_loss = sum_total / nb;
        if (epoch_log) *epoch_log << line.dump() << "\n";
    }

    EvalSummary ev;
    if (cfg.model == ModelChoice::kTheory) {
        res.model.kind = ModelKind::kEncoder;
        res.model.encoder = enc;
        ev = evaluate_encoder(enc, train, test);
    } else {
        res.model.kind = ModelKind::kSae;
        res.model.sae = sae;
        ev = evaluate_sae(sae, train, test);
    }
    res.metrics = ev.metrics;
    res.probe_accuracy = ev.probe_accuracy;
    res.probe_iterations = ev.probe_iterations;
    res.recon_mse = ev.recon_mse;

    const auto t1 = std::chrono::steady_clock::now();
    res.wall_time_sec = std::chrono::duration<double>(t1 - t0).count();
    return res;
}

nlohmann::json run_record_json(const ExperimentConfig& cfg, const RunResult& run) {
    nlohmann::json metrics{{"dead_units", run.metrics.dead_units},
                           {"dead_fraction", run.metrics.dead_fraction},
                           {"resp_entropy", run.metrics.resp_entropy},
                           {"l0_density", run.metrics.l0_density},
                           {"l0_mean_active", run.metrics.l0_mean_active}};
    if (run.metrics.redundancy) {
        metrics["redundancy"] = *run.metrics.redundancy;
    } else {
        metrics["redundancy"] = nullptr;
    }
    return nlohmann::json{{"config", to_json(cfg)},
                          {"seed", run.seed},
                          {"epochs", run.epoch_logs},
                          {"final_loss", run.final_loss},
                          {"metrics", metrics},
                          {"probe_accuracy", run.probe_accuracy},
                          {"probe_iterations", run.probe_iterations},
                          {"recon_mse", run.recon_mse},
                          {"wall_time_sec", run.wall_time_sec}};
}

} // namespace lsemix
