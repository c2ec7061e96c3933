#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include "lsemix/matrix.hpp"
#include "lsemix/rng.hpp"

namespace lsemix {

// IDX container errors, distinguished by kind so callers and tests can
// tell a bad magic from a short file from a bad label byte.
class DataError : public std::runtime_error {
public:
    enum class Kind { kIo, kMagic, kTruncated, kLabelRange };

    DataError(Kind kind, const std::string& msg) : std::runtime_error(msg), kind_(kind) {}
    Kind kind() const { return kind_; }

private:
    Kind kind_;
};

struct Dataset {
    Matrix images;           // N x (rows*cols), entries in [0, 1]
    std::vector<int> labels; // N, each in 0..9
};

// Big-endian IDX image file (magic 0x00000803): header, then one byte
// per pixel. Pixels are flattened row-major and scaled by 1/255.
Matrix load_idx_images(const std::string& path);

// Big-endian IDX label file (magic 0x00000801); every byte must be 0..9.
std::vector<int> load_idx_labels(const std::string& path);

// Loads <prefix>-images-idx3-ubyte and <prefix>-labels-idx1-ubyte from
// dir; prefix is "train" or "t10k". Verifies that counts agree.
Dataset load_mnist_split(const std::string& dir, const std::string& prefix);

// A seeded permutation of 0..N-1 cut into consecutive batch_size slices.
// A final slice shorter than 2 rows is dropped (batch statistics need at
// least 2). Requires batch_size >= 2.
std::vector<std::vector<std::size_t>> minibatches(std::size_t n, std::size_t batch_size, Rng& rng);

// Gathers the given rows of a matrix into a dense batch.
Matrix gather_rows(const Matrix& src, const std::vector<std::size_t>& idx);

} // namespace lsemix
