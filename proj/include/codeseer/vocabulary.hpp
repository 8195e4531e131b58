#ifndef CODESEER_VOCABULARY_HPP
#define CODESEER_VOCABULARY_HPP

#include <algorithm>
#include <charconv>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "codeseer/binary_io.hpp"
#include "codeseer/error.hpp"
#include "codeseer/lexer.hpp"

namespace codeseer {

using TokenId = std::uint32_t;

inline constexpr TokenId kPadId = 0;
inline constexpr TokenId kUnkId = 1;
inline constexpr TokenId kFirstRegularId = 2;
inline constexpr std::string_view kPadToken = "<pad>";
inline constexpr std::string_view kUnkToken = "UNK";

using FrequencyMap = std::unordered_map<std::string, std::uint64_t>;

inline void count_tokens(const TokenStream& stream, FrequencyMap& into) {
    for (const auto& t : stream.tokens) ++into[t];
}

/// Bijection between retained tokens and contiguous ids, PAD=0 and UNK=1.
class Vocabulary {
public:
    struct Entry {
        std::string token;
        std::uint64_t frequency = 0;
    };

    Vocabulary() : Vocabulary(std::vector<Entry>{}, 0) {}

    /// `regular` must already be in id order; ids start at kFirstRegularId.
    Vocabulary(std::vector<Entry> regular, std::uint64_t unk_frequency) {
        entries_.reserve(regular.size() + kFirstRegularId);
        entries_.push_back({std::string(kPadToken), 0});
        entries_.push_back({std::string(kUnkToken), unk_frequency});
        for (auto& e : regular) {
            if (e.token.empty() || e.token == kPadToken || e.token == kUnkToken) {
                throw DataError("reserved or empty token in vocabulary: '" + e.token + "'");
            }
            entries_.push_back(std::move(e));
        }
        index_.reserve(entries_.size());
        for (TokenId id = 0; id < entries_.size(); ++id) {
            if (!index_.emplace(entries_[id].token, id).second) {
                throw DataError("duplicate vocabulary token '" + entries_[id].token + "'");
            }
        }
    }

    std::size_t size() const noexcept { return entries_.size(); }

    /// Out-of-vocabulary tokens map to UNK.
    TokenId id(const std::string& token) const {
        const auto it = index_.find(token);
        return it == index_.end() ? kUnkId : it->second;
    }

    bool contains(const std::string& token) const { return index_.contains(token); }

    const std::string& token(TokenId id) const {
        if (id >= entries_.size()) {
            throw RangeError("token id " + std::to_string(id) + " out of range for vocabulary of size " +
                             std::to_string(entries_.size()));
        }
        return entries_[id].token;
    }

    std::uint64_t frequency(TokenId id) const {
        (void)token(id);
        return entries_[id].frequency;
    }

    /// `<id>\t<token>\t<frequency>` lines sorted by id.
    std::string serialize() const {
        std::string out;
        for (TokenId id = 0; id < entries_.size(); ++id) {
            out += std::to_string(id);
            out += '\t';
            out += entries_[id].token;
            out += '\t';
            out += std::to_string(entries_[id].frequency);
            out += '\n';
        }
        return out;
    }

    static Vocabulary parse(std::string_view text) {
        std::vector<Entry> regular;
        std::uint64_t unk_frequency = 0;
        std::size_t expected_id = 0;
        std::size_t line_no = 0;
        while (!text.empty()) {
            const auto nl = text.find('\n');
            const auto line = text.substr(0, nl);
            text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
            ++line_no;
            const auto bad = [&](const char* why) {
                return FormatError("vocabulary line " + std::to_string(line_no) + ": " + why);
            };
            const auto t1 = line.find('\t');
            const auto t2 = t1 == std::string_view::npos ? t1 : line.find('\t', t1 + 1);
            if (t2 == std::string_view::npos) throw bad("expected three tab-separated fields");
            std::size_t id = 0;
            std::uint64_t freq = 0;
            const auto id_field = line.substr(0, t1);
            const auto freq_field = line.substr(t2 + 1);
            if (std::from_chars(id_field.data(), id_field.data() + id_field.size(), id).ptr !=
                    id_field.data() + id_field.size() ||
                std::from_chars(freq_field.data(), freq_field.data() + freq_field.size(), freq).ptr !=
                    freq_field.data() + freq_field.size()) {
                throw bad("malformed number");
            }
            if (id != expected_id++) throw bad("ids must be contiguous and sorted");
            const auto token = std::string(line.substr(t1 + 1, t2 - t1 - 1));
            if (id == kPadId) {
                if (token != kPadToken) throw bad("id 0 must be the PAD token");
            } else if (id == kUnkId) {
                if (token != kUnkToken) throw bad("id 1 must be the UNK token");
                unk_frequency = freq;
            } else {
                regular.push_back({token, freq});
            }
        }
        if (expected_id < kFirstRegularId) throw FormatError("vocabulary is missing reserved entries");
        return Vocabulary(std::move(regular), unk_frequency);
    }

    /// SHA-256 of the serialized form; binds checkpoints to this vocabulary.
    Digest hash() const { return sha256(serialize()); }

    friend bool operator==(const Vocabulary& a, const Vocabulary& b) {
        if (a.entries_.size() != b.entries_.size()) return false;
        for (std::size_t i = 0; i < a.entries_.size(); ++i) {
            if (a.entries_[i].token != b.entries_[i].token || a.entries_[i].frequency != b.entries_[i].frequency) {
                return false;
            }
        }
        return true;
    }

private:
    std::vector<Entry> entries_;
    std::unordered_map<std::string, TokenId> index_;
};

/// Retains tokens with frequency >= min_count. Ids follow descending
/// frequency, ties by lexicographic token order.
inline Vocabulary build_vocabulary(const FrequencyMap& counts, std::size_t min_count = 2) {
    if (counts.empty()) throw DataError("cannot build a vocabulary from an empty training split");
    std::vector<Vocabulary::Entry> kept;
    std::uint64_t unk = 0;
    for (const auto& [token, freq] : counts) {
        if (token == kPadToken || token == kUnkToken || freq < min_count) {
            unk += freq;
        } else {
            kept.push_back({token, freq});
        }
    }
    std::sort(kept.begin(), kept.end(), [](const auto& a, const auto& b) {
        return a.frequency != b.frequency ? a.frequency > b.frequency : a.token < b.token;
    });
    return Vocabulary(std::move(kept), unk);
}

inline Vocabulary build_vocabulary(std::span<const TokenStream> streams, std::size_t min_count = 2) {
    FrequencyMap counts;
    for (const auto& s : streams) count_tokens(s, counts);
    return build_vocabulary(counts, min_count);
}

inline std::vector<TokenId> vectorize(std::span<const std::string> tokens, const Vocabulary& vocab) {
    std::vector<TokenId> ids;
    ids.reserve(tokens.size());
    for (const auto& t : tokens) ids.push_back(vocab.id(t));
    return ids;
}

inline std::vector<TokenId> vectorize(const TokenStream& stream, const Vocabulary& vocab) {
    return vectorize(std::span<const std::string>(stream.tokens), vocab);
}

inline std::vector<std::string> devectorize(std::span<const TokenId> ids, const Vocabulary& vocab) {
    std::vector<std::string> tokens;
    tokens.reserve(ids.size());
    for (const auto id : ids) tokens.push_back(vocab.token(id));
    return tokens;
}

}  // namespace codeseer

#endif  // CODESEER_VOCABULARY_HPP
