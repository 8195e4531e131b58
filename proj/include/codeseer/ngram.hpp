#ifndef CODESEER_NGRAM_HPP
#define CODESEER_NGRAM_HPP

// Interpolated Kneser-Ney n-gram model with a single absolute discount.
//
//   P_k(w | h) = max(c_k(h w) - D, 0) / c_k(h .)  +  D * N1+(h .) / c_k(h .) * P_{k-1}(w | h')
//
// c_N is the raw count at the highest order; lower orders use continuation
// counts N1+(. g). P_0 is uniform over the vocabulary, so every id keeps
// non-zero mass. Histories never seen fall through to the next lower order.

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "codeseer/binary_io.hpp"
#include "codeseer/contexts.hpp"
#include "codeseer/error.hpp"
#include "codeseer/ranking.hpp"
#include "codeseer/vocabulary.hpp"

namespace codeseer {

class NGramModel {
public:
    using CountTable = std::unordered_map<std::uint64_t, std::uint64_t>;

    static constexpr std::size_t kDefaultOrder = 3;
    static constexpr double kDefaultDiscount = 0.75;

    /// A model with empty count tables: uniform over the vocabulary.
    explicit NGramModel(std::size_t vocab_size, std::size_t order = kDefaultOrder, double discount = kDefaultDiscount)
        : vocab_size_(vocab_size), order_(order), discount_(discount) {
        if (vocab_size_ < 1) throw DataError("n-gram vocabulary must be non-empty");
        if (order_ < 1) throw DataError("n-gram order must be at least 1");
        if (!(discount_ > 0.0 && discount_ < 1.0)) throw DataError("n-gram discount must lie in (0, 1)");
        bits_ = std::max(1, static_cast<int>(std::bit_width(vocab_size_ - 1)));
        if (order_ * static_cast<std::size_t>(bits_) > 64) {
            throw DataError("order " + std::to_string(order_) + " with vocabulary size " + std::to_string(vocab_size_) +
                            " does not fit a 64-bit n-gram key");
        }
        tables_.resize(order_);
        build_levels();
    }

    /// Counts every k-gram (k <= order) that lies fully inside a stream.
    static NGramModel train(const IdStreams& streams, std::size_t vocab_size, std::size_t order = kDefaultOrder,
                            double discount = kDefaultDiscount) {
        NGramModel m(vocab_size, order, discount);
        std::size_t total = 0;
        for (const auto& s : streams) {
            for (std::size_t i = 0; i < s.size(); ++i) {
                m.check_id(s[i]);
                std::uint64_t key = 0;
                // k-grams ending at i, growing leftwards: key of s[i-k+1..i]
                for (std::size_t k = 1; k <= order && k <= i + 1; ++k) {
                    key = m.extend_left(key, s[i - k + 1], k - 1);
                    ++m.tables_[k - 1][key];
                }
            }
            total += s.size();
        }
        if (total == 0) throw DataError("cannot train an n-gram model on an empty corpus");
        m.build_levels();
        return m;
    }

    std::size_t vocab_size() const noexcept { return vocab_size_; }
    std::size_t order() const noexcept { return order_; }
    double discount() const noexcept { return discount_; }

    /// Raw count table for k-grams, 1 <= k <= order.
    const CountTable& counts(std::size_t k) const { return tables_.at(k - 1); }

    std::uint64_t count(std::span<const TokenId> gram) const {
        if (gram.empty() || gram.size() > order_) return 0;
        const auto& t = tables_[gram.size() - 1];
        const auto it = t.find(key_of(gram));
        return it == t.end() ? 0 : it->second;
    }

    std::vector<TokenId> unpack(std::uint64_t key, std::size_t k) const {
        std::vector<TokenId> gram(k);
        const std::uint64_t mask = (std::uint64_t{1} << bits_) - 1;
        for (std::size_t i = k; i > 0; --i) {
            gram[i - 1] = static_cast<TokenId>(key & mask);
            key >>= bits_;
        }
        return gram;
    }

    double prob(std::span<const TokenId> context, TokenId token) const {
        check_id(token);
        const auto hist = usable_history(context);
        double p = 1.0 / static_cast<double>(vocab_size_);
        for (std::size_t k = 1; k <= hist.size() + 1; ++k) {
            const History* h = find_history(k, hist.last(k - 1));
            if (h == nullptr) continue;
            const auto it = std::lower_bound(h->successors.begin(), h->successors.end(), token,
                                             [](const auto& s, TokenId t) { return s.first < t; });
            const double c = (it != h->successors.end() && it->first == token) ? static_cast<double>(it->second) : 0.0;
            p = std::max(c - discount_, 0.0) / h->total + discount_ * h->distinct / h->total * p;
        }
        return p;
    }

    void distribution(std::span<const TokenId> context, std::span<double> out) const {
        if (out.size() != vocab_size_) throw RangeError("distribution buffer size mismatch");
        const auto hist = usable_history(context);
        std::fill(out.begin(), out.end(), 1.0 / static_cast<double>(vocab_size_));
        for (std::size_t k = 1; k <= hist.size() + 1; ++k) {
            const History* h = find_history(k, hist.last(k - 1));
            if (h == nullptr) continue;
            const double gamma = discount_ * h->distinct / h->total;
            for (auto& v : out) v *= gamma;
            for (const auto& [w, c] : h->successors) {
                out[w] += std::max(static_cast<double>(c) - discount_, 0.0) / h->total;
            }
        }
    }

    std::vector<Suggestion> predict_topk(std::span<const TokenId> context, std::size_t k) const {
        return codeseer::predict_topk(*this, context, k);
    }

    static constexpr std::string_view kMagic = "CSNG";
    static constexpr std::uint32_t kVersion = 1;

    /// magic, u32 version, u32 order, f64 discount, u32 vocab size, 32-byte
    /// vocabulary hash, then per order a u64 entry count followed by (k u32
    /// ids, u64 count) entries in ascending key order.
    std::string serialize(const Digest& vocab_hash) const {
        ByteWriter w;
        w.put_bytes(kMagic);
        w.put(kVersion);
        w.put(static_cast<std::uint32_t>(order_));
        w.put(discount_);
        w.put(static_cast<std::uint32_t>(vocab_size_));
        w.put_bytes(std::string_view(reinterpret_cast<const char*>(vocab_hash.data()), vocab_hash.size()));
        for (std::size_t k = 1; k <= order_; ++k) {
            std::vector<std::pair<std::uint64_t, std::uint64_t>> entries(tables_[k - 1].begin(), tables_[k - 1].end());
            std::sort(entries.begin(), entries.end());
            w.put(static_cast<std::uint64_t>(entries.size()));
            for (const auto& [key, c] : entries) {
                for (const auto id : unpack(key, k)) w.put(id);
                w.put(c);
            }
        }
        return w.take();
    }

    struct Loaded;
    static Loaded parse(std::string_view bytes, const std::string& what = "n-gram model");

    friend bool operator==(const NGramModel& a, const NGramModel& b) {
        return a.vocab_size_ == b.vocab_size_ && a.order_ == b.order_ && a.discount_ == b.discount_ &&
               a.tables_ == b.tables_;
    }

private:
    struct History {
        double total = 0;     // sum of level counts over successors
        double distinct = 0;  // N1+(h .)
        std::vector<std::pair<TokenId, std::uint64_t>> successors;  // ascending id
    };

    void check_id(TokenId id) const {
        if (id >= vocab_size_) {
            throw RangeError("token id " + std::to_string(id) + " out of range for vocabulary of size " +
                             std::to_string(vocab_size_));
        }
    }

    std::uint64_t extend_left(std::uint64_t key, TokenId id, std::size_t current_len) const noexcept {
        return key | (static_cast<std::uint64_t>(id) << (bits_ * current_len));
    }

    std::uint64_t key_of(std::span<const TokenId> gram) const noexcept {
        std::uint64_t key = 0;
        for (const auto id : gram) key = (key << bits_) | id;
        return key;
    }

    std::uint64_t drop_first(std::uint64_t key, std::size_t k) const noexcept {
        const std::size_t keep = (k - 1) * static_cast<std::size_t>(bits_);
        return keep == 0 ? 0 : key & ((std::uint64_t{1} << keep) - 1);
    }

    // The last order-1 ids after the most recent PAD; PAD marks "no token".
    std::span<const TokenId> usable_history(std::span<const TokenId> context) const {
        for (const auto id : context) check_id(id);
        auto hist = context.last(std::min(context.size(), order_ - 1));
        for (std::size_t i = hist.size(); i > 0; --i) {
            if (hist[i - 1] == kPadId) return hist.subspan(i);
        }
        return hist;
    }

    const History* find_history(std::size_t level, std::span<const TokenId> history) const {
        const auto& map = levels_[level - 1];
        const auto it = map.find(key_of(history));
        return it == map.end() || it->second.total <= 0 ? nullptr : &it->second;
    }

    void build_levels() {
        levels_.assign(order_, {});
        // level counts: raw at the top order, continuation counts below
        std::vector<CountTable> level_counts(order_);
        level_counts[order_ - 1] = tables_[order_ - 1];
        for (std::size_t k = 1; k < order_; ++k) {
            for (const auto& [key, c] : tables_[k]) {
                (void)c;
                ++level_counts[k - 1][drop_first(key, k + 1)];
            }
        }
        for (std::size_t k = 1; k <= order_; ++k) {
            auto& map = levels_[k - 1];
            const std::uint64_t mask = (std::uint64_t{1} << bits_) - 1;
            for (const auto& [key, c] : level_counts[k - 1]) {
                auto& h = map[key >> bits_];
                h.total += static_cast<double>(c);
                h.distinct += 1;
                h.successors.emplace_back(static_cast<TokenId>(key & mask), c);
            }
            for (auto& [_, h] : map) std::sort(h.successors.begin(), h.successors.end());
        }
    }

    std::size_t vocab_size_;
    std::size_t order_;
    double discount_;
    int bits_ = 1;
    std::vector<CountTable> tables_;                              // raw k-gram counts, index k-1
    std::vector<std::unordered_map<std::uint64_t, History>> levels_;  // keyed by history, index k-1
};

struct NGramModel::Loaded {
    NGramModel model;
    Digest vocab_hash;
};

inline NGramModel::Loaded NGramModel::parse(std::string_view bytes, const std::string& what) {
    ByteReader r(bytes, what);
    r.expect_magic(kMagic);
    const auto version = r.get<std::uint32_t>();
    if (version != kVersion) {
        throw FormatError(what + ": version " + std::to_string(version) + " (expected " + std::to_string(kVersion) + ")");
    }
    const auto order = r.get<std::uint32_t>();
    const auto discount = r.get<double>();
    const auto vocab_size = r.get<std::uint32_t>();
    Digest hash{};
    const auto raw = r.get_bytes(hash.size());
    std::copy(raw.begin(), raw.end(), hash.begin());
    NGramModel m(vocab_size, order, discount);
    std::vector<TokenId> gram;
    for (std::size_t k = 1; k <= order; ++k) {
        const auto entries = r.get<std::uint64_t>();
        if (entries > r.remaining()) throw FormatError(what + ": truncated");
        gram.resize(k);
        for (std::uint64_t e = 0; e < entries; ++e) {
            for (auto& id : gram) {
                id = r.get<TokenId>();
                m.check_id(id);
            }
            m.tables_[k - 1][m.key_of(gram)] = r.get<std::uint64_t>();
        }
    }
    if (!r.at_end()) throw FormatError(what + ": trailing bytes");
    m.build_levels();
    return {std::move(m), hash};
}

}  // namespace codeseer

#endif  // CODESEER_NGRAM_HPP
