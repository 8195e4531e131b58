#ifndef CODESEER_RANKING_HPP
#define CODESEER_RANKING_HPP

#include <algorithm>
#include <concepts>
#include <cstddef>
#include <numeric>
#include <span>
#include <vector>

#include "codeseer/vocabulary.hpp"

namespace codeseer {

struct Suggestion {
    TokenId id;
    double probability;

    friend bool operator==(const Suggestion&, const Suggestion&) = default;
};

/// The ranking order shared by every model: descending probability, then
/// ascending token id.
inline bool ranks_before(double pa, TokenId a, double pb, TokenId b) noexcept {
    return pa != pb ? pa > pb : a < b;
}

inline std::vector<Suggestion> rank_topk(std::span<const double> probs, std::size_t k) {
    k = std::min(k, probs.size());
    std::vector<TokenId> ids(probs.size());
    std::iota(ids.begin(), ids.end(), TokenId{0});
    const auto cmp = [&](TokenId a, TokenId b) { return ranks_before(probs[a], a, probs[b], b); };
    std::partial_sort(ids.begin(), ids.begin() + static_cast<std::ptrdiff_t>(k), ids.end(), cmp);
    std::vector<Suggestion> out;
    out.reserve(k);
    for (std::size_t i = 0; i < k; ++i) out.push_back({ids[i], probs[ids[i]]});
    return out;
}

/// 1-based position of `target` in the full ranking, without sorting.
inline std::size_t rank_of(std::span<const double> probs, TokenId target) {
    const double pt = probs[target];
    std::size_t ahead = 0;
    for (TokenId j = 0; j < probs.size(); ++j) ahead += ranks_before(probs[j], j, pt, target) ? 1 : 0;
    return ahead + 1;
}

/// Models that yield a full next-token distribution for a context.
template <class M>
concept LanguageModel = requires(const M& m, std::span<const TokenId> ctx, std::span<double> out) {
    { m.vocab_size() } -> std::convertible_to<std::size_t>;
    m.distribution(ctx, out);
};

template <LanguageModel M>
std::vector<Suggestion> predict_topk(const M& model, std::span<const TokenId> context, std::size_t k) {
    std::vector<double> probs(model.vocab_size());
    model.distribution(context, probs);
    return rank_topk(probs, k);
}

}  // namespace codeseer

#endif  // CODESEER_RANKING_HPP
