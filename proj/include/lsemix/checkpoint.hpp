#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

#include "lsemix/model.hpp"

namespace lsemix {

// Binary checkpoint, all integers and floats little-endian:
//
//   bytes 0..7   magic "LSEMIX01"
//   byte  8      model kind (0 = encoder, 1 = sae)
//   bytes 9..12  D as u32
//   bytes 13..16 K as u32
//   then the parameter blocks as f64 sequences, row-major:
//     encoder: W (K*D), b (K)
//     sae:     W_enc (K*D), b_enc (K), W_dec (D*K), b_dec (D)
//
// load reconstructs bit-identical parameters.

enum class ModelKind : std::uint8_t { kEncoder = 0, kSae = 1 };

struct Checkpoint {
    ModelKind kind = ModelKind::kEncoder;
    EncoderParams encoder; // valid when kind == kEncoder
    SaeParams sae;         // valid when kind == kSae
};

class CheckpointError : public std::runtime_error {
public:
    explicit CheckpointError(const std::string& msg) : std::runtime_error(msg) {}
};

void save_checkpoint(const EncoderParams& p, const std::string& path);
void save_checkpoint(const SaeParams& p, const std::string& path);
Checkpoint load_checkpoint(const std::string& path);

} // namespace lsemix
