#ifndef CODESEER_NEURAL_CHECKPOINT_HPP
#define CODESEER_NEURAL_CHECKPOINT_HPP

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>

#include "codeseer/binary_io.hpp"
#include "codeseer/codebase.hpp"
#include "codeseer/error.hpp"
#include "codeseer/neural/sequence_model.hpp"

namespace codeseer::neural {

struct Checkpoint {
    SequenceModel<float> model;
    Digest vocab_hash{};
    std::map<std::string, std::string> metadata;  // training provenance, "key: value"

    friend bool operator==(const Checkpoint&, const Checkpoint&) = default;
};

inline constexpr std::string_view kCheckpointMagic = "CSNN";
inline constexpr std::uint32_t kCheckpointVersion = 1;

/// magic, u32 version, u8 kind, u32 n/vocab/embed/hidden, 32-byte vocabulary
/// hash, float32 row-major tensors in visit order, then a u32-length-prefixed
/// metadata block of `key: value` lines.
inline std::string serialize_checkpoint(const Checkpoint& ckpt) {
    const auto& m = ckpt.model;
    ByteWriter w;
    w.put_bytes(kCheckpointMagic);
    w.put(kCheckpointVersion);
    w.put(static_cast<std::uint8_t>(m.kind));
    for (const auto d : {m.dims.context_len, m.dims.vocab_size, m.dims.embed_dim, m.dims.hidden_dim}) {
        w.put(static_cast<std::uint32_t>(d));
    }
    w.put_bytes(std::string_view(reinterpret_cast<const char*>(ckpt.vocab_hash.data()), ckpt.vocab_hash.size()));
    m.visit([&](std::string_view, const auto& t) {
        w.put_span(std::span<const float>(t.data(), static_cast<std::size_t>(t.size())));
    });
    std::string meta;
    for (const auto& [k, v] : ckpt.metadata) meta += k + ": " + v + "\n";
    w.put_string(meta);
    return w.take();
}

inline Checkpoint parse_checkpoint(std::string_view bytes, const std::string& what = "checkpoint") {
    ByteReader r(bytes, what);
    r.expect_magic(kCheckpointMagic);
    const auto version = r.get<std::uint32_t>();
    if (version != kCheckpointVersion) {
        throw FormatError(what + ": format version " + std::to_string(version) + " (expected " +
                          std::to_string(kCheckpointVersion) + ")");
    }
    const auto kind_tag = r.get<std::uint8_t>();
    if (kind_tag != static_cast<std::uint8_t>(ModelKind::rnn) && kind_tag != static_cast<std::uint8_t>(ModelKind::bigru)) {
        throw FormatError(what + ": unknown model kind tag " + std::to_string(kind_tag));
    }
    ModelDims dims;
    dims.context_len = r.get<std::uint32_t>();
    dims.vocab_size = r.get<std::uint32_t>();
    dims.embed_dim = r.get<std::uint32_t>();
    dims.hidden_dim = r.get<std::uint32_t>();
    Checkpoint ckpt;
    const auto hash = r.get_bytes(ckpt.vocab_hash.size());
    std::copy(hash.begin(), hash.end(), ckpt.vocab_hash.begin());
    try {
        ckpt.model = SequenceModel<float>::zeros(static_cast<ModelKind>(kind_tag), dims);
    } catch (const DataError& e) {
        throw FormatError(what + ": " + e.what());
    }
    const std::size_t expected_floats = ckpt.model.parameter_count();
    if (r.remaining() < expected_floats * sizeof(float)) throw FormatError(what + ": truncated");
    ckpt.model.visit([&](std::string_view, auto& t) {
        r.get_span(std::span<float>(t.data(), static_cast<std::size_t>(t.size())));
    });
    const auto meta = r.get_string();
    if (!r.at_end()) throw FormatError(what + ": trailing bytes");
    ckpt.metadata = parse_key_values(meta);
    return ckpt;
}

inline void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path) {
    write_file(path, serialize_checkpoint(ckpt));
}

/// When `expected_hash` is given, a checkpoint trained on a different
/// vocabulary is rejected.
inline Checkpoint load_checkpoint(const std::filesystem::path& path, const std::optional<Digest>& expected_hash = {}) {
    auto ckpt = parse_checkpoint(read_file(path), path.string());
    if (expected_hash && *expected_hash != ckpt.vocab_hash) {
        throw FormatError(path.string() + ": vocabulary hash mismatch (checkpoint " + to_hex(ckpt.vocab_hash) +
                          ", vocabulary " + to_hex(*expected_hash) + ")");
    }
    return ckpt;
}

}  // namespace codeseer::neural

#endif  // CODESEER_NEURAL_CHECKPOINT_HPP
