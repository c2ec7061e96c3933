#include "lsemix/checkpoint.hpp"

#include <cstring>
#include <fstream>
#include <vector>

namespace lsemix {

namespace {

constexpr char kMagic[8] = {'L', 'S', 'E', 'M', 'I', 'X', '0', '1'};

void write_u32_le(std::ofstream& f, std::uint32_t v) {
    unsigned char buf[4] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8),
                            static_cast<unsigned char>(v >> 16),
                            static_cast<unsigned char>(v >> 24)};
    f.write(reinterpret_cast<const char*>(buf), 4);
}

void write_f64_block(std::ofstream& f, const double* data, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) {
        std::uint64_t bits;
        std::memcpy(&bits, &data[i], 8);
        unsigned char buf[8];
        for (int k = 0; k < 8; ++k) buf[k] = static_cast<unsigned char>(bits >> (8 * k));
        f.write(reinterpret_cast<const char*>(buf), 8);
    }
}

class Reader {
public:
    Reader(const std::string& path) : path_(path), f_(path, std::ios::binary) {
        if (!f_) throw CheckpointError(path + ": cannot open checkpoint");
    }

    void read(void* dst, std::size_t n, const char* what) {
        f_.read(reinterpret_cast<char*>(dst), static_cast<std::streamsize>(n));
        const std::size_t got = static_cast<std::size_t>(f_.gcount());
        offset_ += got;
        if (got != n) {
            throw CheckpointError(path_ + ": truncated checkpoint reading " + what + " (expected " +
                                  std::to_string(n) + " bytes at offset " +
                                  std::to_string(offset_ - got) + ", got " + std::to_string(got) +
                                  ")");
        }
    }

    std::uint32_t read_u32(const char* what) {
        unsigned char buf[4];
        read(buf, 4, what);
        return std::uint32_t(buf[0]) | (std::uint32_t(buf[1]) << 8) |
               (std::uint32_t(buf[2]) << 16) | (std::uint32_t(buf[3]) << 24);
    }

    void read_f64_block(double* dst, std::size_t n, const char* what) {
        std::vector<unsigned char> buf(n * 8);
        read(buf.data(), buf.size(), what);
        for (std::size_t i = 0; i < n; ++i) {
            std::uint64_t bits = 0;
            for (int k = 0; k < 8; ++k) bits |= std::uint64_t(buf[i * 8 + k]) << (8 * k);
            std::memcpy(&dst[i], &bits, 8);
        }
    }

private:
    std::string path_;
    std::ifstream f_;
    std::size_t offset_ = 0;
};

std::ofstream open_out(const std::string& path) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw CheckpointError(path + ": cannot open for writing");
    return f;
}

} // namespace

void save_checkpoint(const EncoderParams& p, const std::string& path) {
    std::ofstream f = open_out(path);
    f.write(kMagic, 8);
    const std::uint8_t kind = static_cast<std::uint8_t>(ModelKind::kEncoder);
    f.write(reinterpret_cast<const char*>(&kind), 1);
    write_u32_le(f, static_cast<std::uint32_t>(p.input_dim()));
    write_u32_le(f, static_cast<std::uint32_t>(p.components()));
    write_f64_block(f, p.W.data(), p.W.size());
    write_f64_block(f, p.b.data(), p.b.size());
    if (!f) throw CheckpointError(path + ": write failed");
}

void save_checkpoint(const SaeParams& p, const std::string& path) {
    std::ofstream f = open_out(path);
    f.write(kMagic, 8);
    const std::uint8_t kind = static_cast<std::uint8_t>(ModelKind::kSae);
    f.write(reinterpret_cast<const char*>(&kind), 1);
    write_u32_le(f, static_cast<std::uint32_t>(p.input_dim()));
    write_u32_le(f, static_cast<std::uint32_t>(p.components()));
    write_f64_block(f, p.W_enc.data(), p.W_enc.size());
    write_f64_block(f, p.b_enc.data(), p.b_enc.size());
    write_f64_block(f, p.W_dec.data(), p.W_dec.size());
    write_f64_block(f, p.b_dec.data(), p.b_dec.size());
    if (!f) throw CheckpointError(path + ": write failed");
}

Checkpoint load_checkpoint(const std::string& path) {
    Reader r(path);
    char magic[8];
    r.read(magic, 8, "magic");
    if (std::memcmp(magic, kMagic, 8) != 0) {
        throw CheckpointError(path + ": magic mismatch (expected LSEMIX01, got \"" +
                              std::string(magic, magic + 8) + "\")");
    }
    std::uint8_t kind_byte;
    r.read(&kind_byte, 1, "model kind");
    if (kind_byte > 1) {
        throw CheckpointError(path + ": unknown model kind " + std::to_string(int(kind_byte)));
    }
    const std::uint32_t D = r.read_u32("input dim");
    const std::uint32_t K = r.read_u32("component count");
    if (D == 0 || K == 0) {
        throw CheckpointError(path + ": invalid dims D=" + std::to_string(D) +
                              " K=" + std::to_string(K));
    }

    Checkpoint ck;
    ck.kind = static_cast<ModelKind>(kind_byte);
    if (ck.kind == ModelKind::kEncoder) {
        ck.encoder.W = Matrix(K, D);
        ck.encoder.b.resize(K);
        r.read_f64_block(ck.encoder.W.data(), ck.encoder.W.size(), "encoder W");
        r.read_f64_block(ck.encoder.b.data(), K, "encoder b");
    } else {
        ck.sae.W_enc = Matrix(K, D);
        ck.sae.b_enc.resize(K);
        ck.sae.W_dec = Matrix(D, K);
        ck.sae.b_dec.resize(D);
        r.read_f64_block(ck.sae.W_enc.data(), ck.sae.W_enc.size(), "sae W_enc");
        r.read_f64_block(ck.sae.b_enc.data(), K, "sae b_enc");
        r.read_f64_block(ck.sae.W_dec.data(), ck.sae.W_dec.size(), "sae W_dec");
        r.read_f64_block(ck.sae.b_dec.data(), D, "sae b_dec");
    }
    return ck;
}

} // namespace lsemix
