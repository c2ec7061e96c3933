#include "lsemix/experiments.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>

#include "lsemix/eval.hpp"
#include "lsemix/objective.hpp"

namespace lsemix {

namespace {

namespace fs = std::filesystem;

void write_json_file(const nlohmann::json& j, const std::string& path) {
    std::ofstream f(path);
    if (!f) throw std::runtime_error("cannot open " + path + " for writing");
    f << j.dump(2) << "\n";
}

double mean_of(const std::vector<double>& xs) {
    double s = 0.0;
    for (double x : xs) s += x;
    return s / static_cast<double>(xs.size());
}

double stddev_of(const std::vector<double>& xs) {
    if (xs.size() < 2) return 0.0;
    const double m = mean_of(xs);
    double s = 0.0;
    for (double x : xs) s += (x - m) * (x - m);
    return std::sqrt(s / static_cast<double>(xs.size()));
}

// Mean/std aggregation of per-seed run results into one table row; the
// raw per-seed values ride along for downstream checks and plots.
nlohmann::json aggregate_runs(const std::vector<RunResult>& runs) {
    std::vector<double> dead, entropy, l0, probe, recon, final_loss;
    std::vector<double> redundancy;
    nlohmann::json per_seed{{"seed", nlohmann::json::array()},
                            {"dead_units", nlohmann::json::array()},
                            {"redundancy", nlohmann::json::array()},
                            {"resp_entropy", nlohmann::json::array()},
                            {"l0_density", nlohmann::json::array()},
                            {"probe_accuracy", nlohmann::json::array()},
                            {"recon_mse", nlohmann::json::array()},
                            {"final_loss", nlohmann::json::array()}};
    for (const auto& r : runs) {
        dead.push_back(static_cast<double>(r.metrics.dead_units));
        entropy.push_back(r.metrics.resp_entropy);
        l0.push_back(r.metrics.l0_density);
        probe.push_back(r.probe_accuracy);
        recon.push_back(r.recon_mse);
        final_loss.push_back(r.final_loss);
        if (r.metrics.redundancy) redundancy.push_back(*r.metrics.redundancy);

        per_seed["seed"].push_back(r.seed);
        per_seed["dead_units"].push_back(r.metrics.dead_units);
        if (r.metrics.redundancy) {
            per_seed["redundancy"].push_back(*r.metrics.redundancy);
        } else {
            per_seed["redundancy"].push_back(nullptr);
        }
        per_seed["resp_entropy"].push_back(r.metrics.resp_entropy);
        per_seed["l0_density"].push_back(r.metrics.l0_density);
        per_seed["probe_accuracy"].push_back(r.probe_accuracy);
        per_seed["recon_mse"].push_back(r.recon_mse);
        per_seed["final_loss"].push_back(r.final_loss);
    }
    nlohmann::json row{{"seeds", runs.size()},
                       {"dead_units_mean", mean_of(dead)},
                       {"resp_entropy_mean", mean_of(entropy)},
                       {"l0_density_mean", mean_of(l0)},
                       {"probe_accuracy_mean", mean_of(probe)},
                       {"probe_accuracy_std", stddev_of(probe)},
                       {"recon_mse_mean", mean_of(recon)},
                       {"recon_mse_std", stddev_of(recon)},
                       {"final_loss_mean", mean_of(final_loss)},
                       {"final_loss_std", stddev_of(final_loss)},
                       {"per_seed", per_seed}};
    // Redundancy is undefined for runs with < 2 live units; report the
    // mean over defined values, or null when there are none.
    if (redundancy.empty()) {
        row["redundancy_mean"] = nullptr;
    } else {
        row["redundancy_mean"] = mean_of(redundancy);
    }
    return row;
}

std::string lr_tag(double lr) {
    std::string s = std::to_string(lr);
    while (!s.empty() && s.back() == '0') s.pop_back();
    if (!s.empty() && s.back() == '.') s.pop_back();
    for (auto& c : s) {
        if (c == '.') c = 'p';
    }
    return s;
}

} // namespace

IdentityReport verify_identity(std::uint64_t seed, std::size_t samples, std::size_t components) {
    Rng rng(seed);
    Matrix a(samples, components);
    for (std::size_t i = 0; i < a.size(); ++i) a.data()[i] = rng.normal();

    LossGrad lse = lse_loss_grad(a);
    Matrix resp = responsibilities(a);

    const double B = static_cast<double>(samples);
    IdentityReport rep;
    rep.seed = seed;
    rep.samples = samples;
    rep.components = components;

    double sum_err = 0.0;
    double sum_g = 0.0, sum_r = 0.0, sum_gg = 0.0, sum_rr = 0.0, sum_gr = 0.0;
    const std::size_t n = a.size();
    for (std::size_t i = 0; i < n; ++i) {
        const double g = B * lse.grad.data()[i]; // per-sample gradient
        const double r = resp.data()[i];
        const double err = std::fabs(g - r);
        if (err > rep.max_abs_err) rep.max_abs_err = err;
        sum_err += err;
        sum_g += g;
        sum_r += r;
        sum_gg += g * g;
        sum_rr += r * r;
        sum_gr += g * r;
    }
    rep.mean_abs_err = sum_err / static_cast<double>(n);
    const double dn = static_cast<double>(n);
    const double cov = sum_gr / dn - (sum_g / dn) * (sum_r / dn);
    const double vg = sum_gg / dn - (sum_g / dn) * (sum_g / dn);
    const double vr = sum_rr / dn - (sum_r / dn) * (sum_r / dn);
    rep.correlation = cov / std::sqrt(vg * vr);
    rep.pass = rep.max_abs_err <= 1e-9;
    return rep;
}

nlohmann::json identity_report_json(const IdentityReport& r) {
    return nlohmann::json{{"seed", r.seed},
                          {"samples", r.samples},
                          {"components", r.components},
                          {"max_abs_err", r.max_abs_err},
                          {"mean_abs_err", r.mean_abs_err},
                          {"correlation", r.correlation},
                          {"pass", r.pass}};
}

Dataset load_train_split(const ExperimentConfig& cfg) {
    return load_mnist_split(cfg.data_dir, "train");
}

Dataset load_test_split(const ExperimentConfig& cfg) {
    return load_mnist_split(cfg.data_dir, "t10k");
}

RunResult run_train_to_dir(const ExperimentConfig& cfg, std::uint64_t seed, const Dataset& train,
                           const Dataset& test, const std::string& dir) {
    fs::create_directories(dir);
    std::ofstream log(dir + "/train_log.jsonl");
    if (!log) throw std::runtime_error("cannot open " + dir + "/train_log.jsonl for writing");

    write_json_file(to_json(cfg), dir + "/config.json");
    RunResult run = train_run(cfg, seed, train, test, &log);
    log.close();

    if (run.model.kind == ModelKind::kEncoder) {
        save_checkpoint(run.model.encoder, dir + "/model.ckpt");
        if (run.model.encoder.input_dim() == 784) {
            export_weight_grid(run.model.encoder.W, dir + "/weights.ppm");
        }
    } else {
        save_checkpoint(run.model.sae, dir + "/model.ckpt");
        if (run.model.sae.input_dim() == 784) {
            export_weight_grid(run.model.sae.W_enc, dir + "/weights.ppm");
        }
    }
    write_json_file(run_record_json(cfg, run), dir + "/run_record.json");
    return run;
}

nlohmann::json run_ablation(const ExperimentConfig& base, const Dataset& train,
                            const Dataset& test) {
    struct Row {
        const char* name;
        bool lse, var, tc;
    };
    // The four loss-flag combinations; nothing else varies.
    const Row grid[] = {{"lse_only", true, false, false},
                        {"lse_var", true, true, false},
                        {"lse_var_tc", true, true, true},
                        {"var_tc_only", false, true, true}};

    nlohmann::json table = nlohmann::json::array();
    for (const Row& row : grid) {
        ExperimentConfig cfg = base;
        cfg.model = ModelChoice::kTheory;
        cfg.enable_lse = row.lse;
        cfg.enable_var = row.var;
        cfg.enable_tc = row.tc;

        std::vector<RunResult> runs;
        for (std::uint64_t seed : cfg.seeds) {
            const std::string dir =
                base.out_dir + "/ablation/" + row.name + "_seed" + std::to_string(seed);
            runs.push_back(run_train_to_dir(cfg, seed, train, test, dir));
        }
        nlohmann::json agg = aggregate_runs(runs);
        agg["configuration"] = row.name;
        agg["enable_lse"] = row.lse;
        agg["enable_var"] = row.var;
        agg["enable_tc"] = row.tc;
        table.push_back(agg);
    }

    nlohmann::json out{{"experiment", "ablation"}, {"rows", table}};
    fs::create_directories(base.out_dir);
    write_json_file(out, base.out_dir + "/ablation_table.json");
    return out;
}

nlohmann::json run_benchmark(const ExperimentConfig& base, const Dataset& train,
                             const Dataset& test) {
    nlohmann::json table = nlohmann::json::array();
    for (ModelChoice model : {ModelChoice::kTheory, ModelChoice::kSae}) {
        ExperimentConfig cfg = base;
        cfg.model = model;

        std::vector<RunResult> runs;
        for (std::uint64_t seed : cfg.seeds) {
            const std::string dir = base.out_dir + "/benchmark/" + to_string(model) + "_seed" +
                                    std::to_string(seed);
            runs.push_back(run_train_to_dir(cfg, seed, train, test, dir));
        }
        nlohmann::json agg = aggregate_runs(runs);
        agg["model"] = to_string(model);
        agg["parameters"] = model == ModelChoice::kTheory
                                ? encoder_param_count(cfg.input_dim, cfg.components)
                                : sae_param_count(cfg.input_dim, cfg.components);
        table.push_back(agg);
    }

    nlohmann::json out{{"experiment", "benchmark"}, {"rows", table}};
    fs::create_directories(base.out_dir);
    write_json_file(out, base.out_dir + "/benchmark_table.json");
    return out;
}

nlohmann::json run_dynamics(const ExperimentConfig& base, const Dataset& train,
                            const Dataset& test) {
    const double lrs[] = {1e-4, 1e-3, 1e-2, 1e-1};

    nlohmann::json table = nlohmann::json::array();
    for (OptChoice opt : {OptChoice::kSgd, OptChoice::kAdam}) {
        for (double lr : lrs) {
            ExperimentConfig cfg = base;
            cfg.model = ModelChoice::kTheory;
            cfg.optimizer = opt;
            cfg.lr = lr;

            std::vector<RunResult> runs;
            for (std::uint64_t seed : cfg.seeds) {
                const std::string dir = base.out_dir + "/dynamics/" + to_string(opt) + "_lr" +
                                        lr_tag(lr) + "_seed" + std::to_string(seed);
                runs.push_back(run_train_to_dir(cfg, seed, train, test, dir));
            }
            nlohmann::json agg = aggregate_runs(runs);
            agg["optimizer"] = to_string(opt);
            agg["lr"] = lr;
            table.push_back(agg);
        }
    }

    nlohmann::json out{{"experiment", "dynamics"}, {"rows", table}};
    fs::create_directories(base.out_dir);
    write_json_file(out, base.out_dir + "/dynamics_table.json");
    return out;
}

void run_visualize(const std::string& checkpoint_path, const std::string& out_path) {
    Checkpoint ck = load_checkpoint(checkpoint_path);
    const Matrix& W = ck.kind == ModelKind::kEncoder ? ck.encoder.W : ck.sae.W_enc;
    export_weight_grid(W, out_path);
}

} // namespace lsemix
