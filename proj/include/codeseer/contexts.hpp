#ifndef CODESEER_CONTEXTS_HPP
#define CODESEER_CONTEXTS_HPP

#include <algorithm>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "codeseer/binary_io.hpp"
#include "codeseer/error.hpp"
#include "codeseer/vocabulary.hpp"

namespace codeseer {

/// A fixed-length context window and the token that follows it.
struct ContextExample {
    std::vector<TokenId> context;
    TokenId target = kPadId;

    friend bool operator==(const ContextExample&, const ContextExample&) = default;
};

struct ExampleView {
    std::span<const TokenId> context;
    TokenId target;
};

/// Contiguous storage of (context, target) records sharing one context length.
class ExampleSet {
public:
    ExampleSet() = default;
    explicit ExampleSet(std::size_t context_len) : n_(context_len) {
        if (n_ == 0) throw DataError("context length must be at least 1");
    }

    std::size_t context_len() const noexcept { return n_; }
    std::size_t size() const noexcept { return n_ == 0 ? 0 : data_.size() / (n_ + 1); }
    bool empty() const noexcept { return size() == 0; }

    ExampleView operator[](std::size_t i) const {
        const auto* rec = data_.data() + i * (n_ + 1);
        return {std::span<const TokenId>(rec, n_), rec[n_]};
    }

    void push_back(std::span<const TokenId> context, TokenId target) {
        if (context.size() != n_) throw DataError("context length mismatch");
        data_.insert(data_.end(), context.begin(), context.end());
        data_.push_back(target);
    }

    void push_back(const ContextExample& ex) { push_back(ex.context, ex.target); }

    void append(const ExampleSet& other) {
        if (other.empty()) return;
        if (other.n_ != n_) throw DataError("context length mismatch");
        data_.insert(data_.end(), other.data_.begin(), other.data_.end());
    }

    ExampleSet subset(std::span<const std::size_t> indices) const {
        ExampleSet out(n_);
        out.data_.reserve(indices.size() * (n_ + 1));
        for (const auto i : indices) {
            const auto* rec = data_.data() + i * (n_ + 1);
            out.data_.insert(out.data_.end(), rec, rec + n_ + 1);
        }
        return out;
    }

    ContextExample example(std::size_t i) const {
        const auto v = (*this)[i];
        return {std::vector<TokenId>(v.context.begin(), v.context.end()), v.target};
    }

    std::span<const TokenId> raw() const noexcept { return data_; }

    TokenId max_id() const noexcept {
        TokenId m = 0;
        for (const auto id : data_) m = std::max(m, id);
        return m;
    }

    friend bool operator==(const ExampleSet&, const ExampleSet&) = default;

private:
    friend ExampleSet parse_examples(std::string_view bytes, const std::string& what);

    std::size_t n_ = 0;
    std::vector<TokenId> data_;
};

/// One example per position t >= 1: the limit-n window of ids before t,
/// left-padded with PAD, predicting the id at t.
inline void extract_contexts(std::span<const TokenId> ids, ExampleSet& into) {
    const std::size_t n = into.context_len();
    std::vector<TokenId> window(n, kPadId);
    for (std::size_t t = 1; t < ids.size(); ++t) {
        // slide: window holds ids[t-n, t)
        window.erase(window.begin());
        window.push_back(ids[t - 1]);
        into.push_back(window, ids[t]);
    }
}

inline ExampleSet extract_contexts(std::span<const TokenId> ids, std::size_t n) {
    ExampleSet out(n);
    extract_contexts(ids, out);
    return out;
}

inline ExampleSet extract_contexts(const TokenStream& stream, const Vocabulary& vocab, std::size_t n) {
    return extract_contexts(vectorize(stream, vocab), n);
}

/// Left-pads (or truncates from the left) to exactly n ids.
inline std::vector<TokenId> fit_context(std::span<const TokenId> ids, std::size_t n) {
    std::vector<TokenId> out(n, kPadId);
    const std::size_t take = std::min(n, ids.size());
    std::copy(ids.end() - static_cast<std::ptrdiff_t>(take), ids.end(), out.end() - static_cast<std::ptrdiff_t>(take));
    return out;
}

inline constexpr std::string_view kExamplesMagic = "CSEX";
inline constexpr std::uint8_t kExamplesVersion = 1;

/// magic, version byte, u32 n, then (n context ids, target id) u32 records.
inline std::string serialize_examples(const ExampleSet& set) {
    ByteWriter w;
    w.put_bytes(kExamplesMagic);
    w.put(kExamplesVersion);
    w.put(static_cast<std::uint32_t>(set.context_len()));
    w.put_span(set.raw());
    return w.take();
}

inline ExampleSet parse_examples(std::string_view bytes, const std::string& what = "examples") {
    ByteReader r(bytes, what);
    r.expect_magic(kExamplesMagic);
    const auto version = r.get<std::uint8_t>();
    if (version != kExamplesVersion) {
        throw FormatError(what + ": unsupported version " + std::to_string(version));
    }
    const auto n = r.get<std::uint32_t>();
    if (n == 0) throw FormatError(what + ": context length 0");
    const std::size_t record = (static_cast<std::size_t>(n) + 1) * sizeof(TokenId);
    if (r.remaining() % record != 0) throw FormatError(what + ": truncated record");
    ExampleSet set(n);
    set.data_.resize(r.remaining() / sizeof(TokenId));
    r.get_span(std::span<TokenId>(set.data_));
    return set;
}

inline constexpr std::string_view kStreamsMagic = "CSID";
inline constexpr std::uint8_t kStreamsVersion = 1;

using IdStreams = std::vector<std::vector<TokenId>>;

/// Vectorized token streams, one per file: magic, version, u32 count, then
/// u32 length-prefixed id arrays.
inline std::string serialize_streams(const IdStreams& streams) {
    ByteWriter w;
    w.put_bytes(kStreamsMagic);
    w.put(kStreamsVersion);
    w.put(static_cast<std::uint32_t>(streams.size()));
    for (const auto& s : streams) {
        w.put(static_cast<std::uint32_t>(s.size()));
        w.put_span(std::span<const TokenId>(s));
    }
    return w.take();
}

inline IdStreams parse_streams(std::string_view bytes, const std::string& what = "streams") {
    ByteReader r(bytes, what);
    r.expect_magic(kStreamsMagic);
    const auto version = r.get<std::uint8_t>();
    if (version != kStreamsVersion) {
        throw FormatError(what + ": unsupported version " + std::to_string(version));
    }
    IdStreams streams(r.get<std::uint32_t>());
    for (auto& s : streams) {
        const auto len = r.get<std::uint32_t>();
        if (static_cast<std::size_t>(len) * sizeof(TokenId) > r.remaining()) throw FormatError(what + ": truncated");
        s.resize(len);
        r.get_span(std::span<TokenId>(s));
    }
    if (!r.at_end()) throw FormatError(what + ": trailing bytes");
    return streams;
}

}  // namespace codeseer

#endif  // CODESEER_CONTEXTS_HPP
