#include "lsemix/eval.hpp"

#include <cmath>
#include <fstream>
#include <stdexcept>
#include <string>

namespace lsemix {

RepMetrics rep_metrics(const Matrix& acts, const Matrix& resp, double dead_threshold) {
    const std::size_t N = acts.rows();
    const std::size_t K = acts.cols();
    if (N < 2) {
        throw std::invalid_argument("rep_metrics: requires at least 2 rows, got " +
                                    std::to_string(N));
    }

    ColumnStats s = column_stats(acts);
    RepMetrics m;
    std::vector<std::size_t> live;
    live.reserve(K);
    for (std::size_t j = 0; j < K; ++j) {
        if (s.var[j] < dead_threshold) {
            ++m.dead_units;
        } else {
            live.push_back(j);
        }
    }
    m.dead_fraction = static_cast<double>(m.dead_units) / static_cast<double>(K);

    if (live.size() >= 2) {
        Matrix live_acts(N, live.size());
        for (std::size_t i = 0; i < N; ++i) {
            const double* src = acts.row(i);
            double* dst = live_acts.row(i);
            for (std::size_t j = 0; j < live.size(); ++j) dst[j] = src[live[j]];
        }
        // Live columns have variance >= dead_threshold, so the guard can
        // be negligible; this keeps redundancy invariant under positive
        // affine maps of the columns.
        Matrix corr = correlation_matrix(live_acts, 1e-20);
        double red = 0.0;
        for (std::size_t p = 0; p < live.size(); ++p) {
            for (std::size_t q = 0; q < live.size(); ++q) {
                if (p != q) red += corr(p, q) * corr(p, q);
            }
        }
        m.redundancy = red;
    }

    double entropy = 0.0;
    for (std::size_t i = 0; i < N; ++i) {
        const double* ri = resp.row(i);
        double h = 0.0;
        for (std::size_t j = 0; j < K; ++j) {
            if (ri[j] > 0.0) h -= ri[j] * std::log(ri[j]);
        }
        entropy += h;
    }
    m.resp_entropy = entropy / static_cast<double>(N);

    std::size_t active = 0;
    for (std::size_t i = 0; i < acts.size(); ++i) {
        if (acts.data()[i] > 0.0) ++active;
    }
    m.l0_density = static_cast<double>(active) / static_cast<double>(N * K);
    m.l0_mean_active = m.l0_density * static_cast<double>(K);
    return m;
}

namespace {

double probe_loss_grad(const Matrix& feats, const std::vector<int>& labels, const Matrix& W,
                       const std::vector<double>& b, double l2, Matrix& gradW,
                       std::vector<double>& gradb) {
    const std::size_t N = feats.rows();
    const std::size_t C = W.rows();
    const double invN = 1.0 / static_cast<double>(N);

    gradb.assign(C, 0.0);

    // err = (softmax(logits) - onehot) / N, built in place on the logits
    Matrix err = matmul_nt(feats, W);
    double ce = 0.0;
    for (std::size_t i = 0; i < N; ++i) {
        double* row = err.row(i);
        double mx = -1e300;
        for (std::size_t c = 0; c < C; ++c) {
            row[c] += b[c];
            if (row[c] > mx) mx = row[c];
        }
        double t = 0.0;
        for (std::size_t c = 0; c < C; ++c) {
            row[c] = std::exp(row[c] - mx);
            t += row[c];
        }
        const double invt = 1.0 / t;
        const std::size_t y = static_cast<std::size_t>(labels[i]);
        ce -= std::log(row[y] * invt);
        for (std::size_t c = 0; c < C; ++c) {
            row[c] = (row[c] * invt - (c == y ? 1.0 : 0.0)) * invN;
            gradb[c] += row[c];
        }
    }

    gradW = matmul_tn(err, feats); // C x K

    double w2 = 0.0;
    for (std::size_t i = 0; i < W.size(); ++i) {
        const double w = W.data()[i];
        w2 += w * w;
        gradW.data()[i] += 2.0 * l2 * w;
    }
    return ce * invN + l2 * w2;
}

} // namespace

ProbeResult train_linear_probe(const Matrix& train_feats, const std::vector<int>& train_labels,
                               const Matrix& test_feats, const std::vector<int>& test_labels,
                               const ProbeConfig& cfg) {
    const std::size_t N = train_feats.rows();
    const std::size_t K = train_feats.cols();
    if (N == 0 || test_feats.rows() == 0) {
        throw std::invalid_argument("train_linear_probe: empty feature matrix");
    }
    if (train_labels.size() != N || test_labels.size() != test_feats.rows()) {
        throw std::invalid_argument("train_linear_probe: label count does not match rows");
    }
    if (test_feats.cols() != K) {
        throw std::invalid_argument("train_linear_probe: train/test feature width mismatch");
    }
    constexpr std::size_t kClasses = 10;

    ProbeResult res;
    res.weights = Matrix(kClasses, K);
    res.bias.assign(kClasses, 0.0);

    // Hand-rolled Adam buffers; the probe is self-contained so it cannot
    // perturb any caller-owned optimizer state.
    Matrix mW(kClasses, K), vW(kClasses, K);
    std::vector<double> mb(kClasses, 0.0), vb(kClasses, 0.0);
    const double b1 = 0.9, b2 = 0.999, eps = 1e-8;

    Matrix gradW;
    std::vector<double> gradb;
    double prev_loss = 1e300;
    int iters = 0;
    for (int it = 1; it <= cfg.max_iters; ++it) {
        const double loss =
            probe_loss_grad(train_feats, train_labels, res.weights, res.bias, cfg.l2, gradW, gradb);
        const double bc1 = 1.0 - std::pow(b1, it);
        const double bc2 = 1.0 - std::pow(b2, it);
        for (std::size_t i = 0; i < res.weights.size(); ++i) {
            const double g = gradW.data()[i];
            mW.data()[i] = b1 * mW.data()[i] + (1.0 - b1) * g;
            vW.data()[i] = b2 * vW.data()[i] + (1.0 - b2) * g * g;
            res.weights.data()[i] -=
                cfg.lr * (mW.data()[i] / bc1) / (std::sqrt(vW.data()[i] / bc2) + eps);
        }
        for (std::size_t c = 0; c < kClasses; ++c) {
            const double g = gradb[c];
            mb[c] = b1 * mb[c] + (1.0 - b1) * g;
            vb[c] = b2 * vb[c] + (1.0 - b2) * g * g;
            res.bias[c] -= cfg.lr * (mb[c] / bc1) / (std::sqrt(vb[c] / bc2) + eps);
        }
        iters = it;
        if (prev_loss - loss < cfg.tol && it > 1) break;
        prev_loss = loss;
    }
    res.iterations = iters;

    std::size_t correct = 0;
    Matrix logits = matmul_nt(test_feats, res.weights);
    for (std::size_t i = 0; i < test_feats.rows(); ++i) {
        const double* row = logits.row(i);
        std::size_t best = 0;
        double best_v = -1e300;
        for (std::size_t c = 0; c < kClasses; ++c) {
            const double v = row[c] + res.bias[c];
            if (v > best_v) {
                best_v = v;
                best = c;
            }
        }
        if (static_cast<int>(best) == test_labels[i]) ++correct;
    }
    res.accuracy = static_cast<double>(correct) / static_cast<double>(test_feats.rows());
    return res;
}

double reconstruction_mse(const Matrix& X, const Matrix& Xhat) {
    if (X.rows() != Xhat.rows() || X.cols() != Xhat.cols()) {
        throw std::invalid_argument("reconstruction_mse: shape mismatch " +
                                    std::to_string(X.rows()) + "x" + std::to_string(X.cols()) +
                                    " vs " + std::to_string(Xhat.rows()) + "x" +
                                    std::to_string(Xhat.cols()));
    }
    double acc = 0.0;
    for (std::size_t i = 0; i < X.size(); ++i) {
        const double r = Xhat.data()[i] - X.data()[i];
        acc += r * r;
    }
    return acc / static_cast<double>(X.size());
}

GridDims weight_grid_dims(std::size_t n_tiles, std::size_t tiles_per_row,
                          std::size_t separator_px) {
    const std::size_t tile = 28;
    const std::size_t rows = (n_tiles + tiles_per_row - 1) / tiles_per_row;
    GridDims d;
    d.width = tiles_per_row * tile + (tiles_per_row - 1) * separator_px;
    d.height = rows * tile + (rows - 1) * separator_px;
    return d;
}

void export_weight_grid(const Matrix& W, const std::string& path, std::size_t tiles_per_row,
                        std::size_t separator_px) {
    if (W.cols() != 784) {
        throw std::invalid_argument("export_weight_grid: expected 784 columns (28x28 tiles), got " +
                                    std::to_string(W.cols()));
    }
    const std::size_t tile = 28;
    const std::size_t K = W.rows();
    const GridDims dims = weight_grid_dims(K, tiles_per_row, separator_px);

    double wmax = 0.0;
    for (std::size_t i = 0; i < W.size(); ++i) {
        const double a = std::fabs(W.data()[i]);
        if (a > wmax) wmax = a;
    }

    const unsigned char gray = 128;
    std::vector<unsigned char> img(dims.width * dims.height * 3, gray);

    for (std::size_t k = 0; k < K; ++k) {
        const std::size_t tr = k / tiles_per_row;
        const std::size_t tc = k % tiles_per_row;
        const std::size_t y0 = tr * (tile + separator_px);
        const std::size_t x0 = tc * (tile + separator_px);
        const double* w = W.row(k);
        for (std::size_t py = 0; py < tile; ++py) {
            for (std::size_t px = 0; px < tile; ++px) {
                const double v = wmax > 0.0 ? w[py * tile + px] / wmax : 0.0;
                // white at 0; blend toward blue for v>0, red for v<0
                unsigned char r = 255, g = 255, b = 255;
                if (v > 0.0) {
                    r = static_cast<unsigned char>(std::lround(255.0 * (1.0 - v)));
                    g = r;
                } else if (v < 0.0) {
                    g = static_cast<unsigned char>(std::lround(255.0 * (1.0 + v)));
                    b = g;
                }
                const std::size_t off = ((y0 + py) * dims.width + (x0 + px)) * 3;
                img[off] = r;
                img[off + 1] = g;
                img[off + 2] = b;
            }
        }
    }

    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("export_weight_grid: cannot open " + path);
    f << "P6\n" << dims.width << " " << dims.height << "\n255\n";
    f.write(reinterpret_cast<const char*>(img.data()), static_cast<std::streamsize>(img.size()));
    if (!f) throw std::runtime_error("export_weight_grid: write failed for " + path);
}

} // namespace lsemix
