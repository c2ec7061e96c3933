#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <filesystem>

#include "lsemix/data.hpp"
#include "lsemix/eval.hpp"

using namespace lsemix;

// These tests need the real MNIST IDX files. They read LSEMIX_DATA_DIR
// (wired up by ctest) and skip with a message when the files are absent.

namespace {

std::string data_dir() {
    const char* env = std::getenv("LSEMIX_DATA_DIR");
    if (!env) return {};
    if (!std::filesystem::exists(std::string(env) + "/train-images-idx3-ubyte")) return {};
    return env;
}

} // namespace

TEST_CASE("mnist splits have the standard shapes") {
    const std::string dir = data_dir();
    if (dir.empty()) {
        MESSAGE("LSEMIX_DATA_DIR not set or MNIST missing; skipping");
        return;
    }

    Matrix train_images = load_idx_images(dir + "/train-images-idx3-ubyte");
    CHECK(train_images.rows() == 60000);
    CHECK(train_images.cols() == 784);

    auto test_labels = load_idx_labels(dir + "/t10k-labels-idx1-ubyte");
    CHECK(test_labels.size() == 10000);

    // pixel range invariant
    double lo = 1e300, hi = -1e300;
    for (std::size_t i = 0; i < train_images.size(); ++i) {
        lo = std::fmin(lo, train_images.data()[i]);
        hi = std::fmax(hi, train_images.data()[i]);
    }
    CHECK(lo >= 0.0);
    CHECK(hi <= 1.0);

    for (int y : test_labels) {
        CHECK(y >= 0);
        CHECK(y <= 9);
    }
}

TEST_CASE("raw-pixel probe reaches the expected accuracy band") {
    const std::string dir = data_dir();
    if (dir.empty()) {
        MESSAGE("LSEMIX_DATA_DIR not set or MNIST missing; skipping");
        return;
    }

    Dataset train = load_mnist_split(dir, "train");
    Dataset test = load_mnist_split(dir, "t10k");
    ProbeResult r = train_linear_probe(train.images, train.labels, test.images, test.labels);
    MESSAGE("raw-pixel probe accuracy: ", r.accuracy, " after ", r.iterations, " iterations");
    CHECK(r.accuracy >= 0.91);
    CHECK(r.accuracy <= 0.93);
}
