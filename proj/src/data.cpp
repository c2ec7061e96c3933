#include "lsemix/data.hpp"

#include <cstdint>
#include <fstream>

namespace lsemix {

namespace {

constexpr std::uint32_t kImageMagic = 0x00000803u;
constexpr std::uint32_t kLabelMagic = 0x00000801u;

std::uint32_t read_u32_be(std::ifstream& f, const std::string& path, std::size_t offset,
                          const char* what) {
    unsigned char buf[4];
    f.read(reinterpret_cast<char*>(buf), 4);
    if (f.gcount() != 4) {
        throw DataError(DataError::Kind::kTruncated,
                        path + ": truncated " + what + " at offset " + std::to_string(offset) +
                            " (expected 4 bytes, got " + std::to_string(f.gcount()) + ")");
    }
    return (std::uint32_t(buf[0]) << 24) | (std::uint32_t(buf[1]) << 16) |
           (std::uint32_t(buf[2]) << 8) | std::uint32_t(buf[3]);
}

std::string hex32(std::uint32_t v) {
    static const char* digits = "0123456789abcdef";
    std::string s = "0x";
    for (int i = 28; i >= 0; i -= 4) s += digits[(v >> i) & 0xF];
    return s;
}

std::ifstream open_file(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw DataError(DataError::Kind::kIo, path + ": cannot open file");
    return f;
}

} // namespace

Matrix load_idx_images(const std::string& path) {
    std::ifstream f = open_file(path);
    const std::uint32_t magic = read_u32_be(f, path, 0, "magic");
    if (magic != kImageMagic) {
        throw DataError(DataError::Kind::kMagic, path + ": magic mismatch at offset 0 (expected " +
                                                     hex32(kImageMagic) + ", got " + hex32(magic) +
                                                     ")");
    }
    const std::uint32_t count = read_u32_be(f, path, 4, "image count");
    const std::uint32_t rows = read_u32_be(f, path, 8, "row count");
    const std::uint32_t cols = read_u32_be(f, path, 12, "column count");

    const std::size_t pixels = std::size_t(count) * rows * cols;
    std::vector<unsigned char> raw(pixels);
    f.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(pixels));
    const std::size_t got = static_cast<std::size_t>(f.gcount());
    if (got != pixels) {
        throw DataError(DataError::Kind::kTruncated,
                        path + ": truncated pixel payload at offset " + std::to_string(16 + got) +
                            " (expected " + std::to_string(pixels) + " bytes, got " +
                            std::to_string(got) + ")");
    }

    Matrix m(count, std::size_t(rows) * cols);
    for (std::size_t i = 0; i < pixels; ++i) m.data()[i] = raw[i] / 255.0;
    return m;
}

std::vector<int> load_idx_labels(const std::string& path) {
    std::ifstream f = open_file(path);
    const std::uint32_t magic = read_u32_be(f, path, 0, "magic");
    if (magic != kLabelMagic) {
        throw DataError(DataError::Kind::kMagic, path + ": magic mismatch at offset 0 (expected " +
                                                     hex32(kLabelMagic) + ", got " + hex32(magic) +
                                                     ")");
    }
    const std::uint32_t count = read_u32_be(f, path, 4, "label count");

    std::vector<unsigned char> raw(count);
    f.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(count));
    const std::size_t got = static_cast<std::size_t>(f.gcount());
    if (got != count) {
        throw DataError(DataError::Kind::kTruncated,
                        path + ": truncated label payload at offset " + std::to_string(8 + got) +
                            " (expected " + std::to_string(count) + " bytes, got " +
                            std::to_string(got) + ")");
    }

    std::vector<int> labels(count);
    for (std::size_t i = 0; i < count; ++i) {
        if (raw[i] > 9) {
            throw DataError(DataError::Kind::kLabelRange,
                            path + ": label value " + std::to_string(int(raw[i])) + " at index " +
                                std::to_string(i) + " is outside 0..9");
        }
        labels[i] = raw[i];
    }
    return labels;
}

Dataset load_mnist_split(const std::string& dir, const std::string& prefix) {
    Dataset ds;
    ds.images = load_idx_images(dir + "/" + prefix + "-images-idx3-ubyte");
    ds.labels = load_idx_labels(dir + "/" + prefix + "-labels-idx1-ubyte");
    if (ds.images.rows() != ds.labels.size()) {
        throw DataError(DataError::Kind::kTruncated,
                        dir + "/" + prefix + ": image count " + std::to_string(ds.images.rows()) +
                            " does not match label count " + std::to_string(ds.labels.size()));
    }
    return ds;
}

std::vector<std::vector<std::size_t>> minibatches(std::size_t n, std::size_t batch_size,
                                                  Rng& rng) {
    if (batch_size < 2) {
        throw std::invalid_argument("minibatches: requires batch_size >= 2, got " +
                                    std::to_string(batch_size));
    }
    std::vector<std::size_t> perm(n);
    for (std::size_t i = 0; i < n; ++i) perm[i] = i;
    // Fisher-Yates
    for (std::size_t i = n; i > 1; --i) {
        const std::size_t j = rng.next_below(i);
        std::swap(perm[i - 1], perm[j]);
    }

    std::vector<std::vector<std::size_t>> slices;
    slices.reserve(n / batch_size + 1);
    for (std::size_t start = 0; start < n; start += batch_size) {
        const std::size_t end = std::min(n, start + batch_size);
        if (end - start < 2) break; // drop degenerate tail
        slices.emplace_back(perm.begin() + static_cast<std::ptrdiff_t>(start),
                            perm.begin() + static_cast<std::ptrdiff_t>(end));
    }
    return slices;
}

Matrix gather_rows(const Matrix& src, const std::vector<std::size_t>& idx) {
    Matrix out(idx.size(), src.cols());
    for (std::size_t i = 0; i < idx.size(); ++i) {
        const double* s = src.row(idx[i]);
        double* d = out.row(i);
        for (std::size_t j = 0; j < src.cols(); ++j) d[j] = s[j];
    }
    return out;
}

} // namespace lsemix
