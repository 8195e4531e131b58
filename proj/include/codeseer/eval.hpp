#ifndef CODESEER_EVAL_HPP
#define CODESEER_EVAL_HPP

#include <chrono>
#include <cmath>
#include <cstdio>
#include <map>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "codeseer/contexts.hpp"
#include "codeseer/error.hpp"
#include "codeseer/parallel.hpp"
#include "codeseer/ranking.hpp"
#include "codeseer/neural/sequence_model.hpp"

namespace codeseer {

inline constexpr std::array<std::size_t, 4> kDefaultKs{1, 3, 5, 10};
inline constexpr double kMinProbability = 1e-12;

/// Calls fn(i, distribution) for every example. Neural models are evaluated
/// in batches; anything else one context at a time.
template <LanguageModel M, class Fn>
void for_each_distribution(const M& model, const ExampleSet& set, std::size_t threads, Fn&& fn) {
    constexpr std::size_t kChunk = 256;
    const std::size_t chunks = (set.size() + kChunk - 1) / kChunk;
    parallel_for(chunks, resolve_threads(threads), [&](std::size_t c) {
        const std::size_t begin = c * kChunk;
        const std::size_t end = std::min(set.size(), begin + kChunk);
        std::vector<double> probs(model.vocab_size());
        if constexpr (requires { typename M::NeuralTag; }) {
            std::vector<std::size_t> idx(end - begin);
            std::iota(idx.begin(), idx.end(), begin);
            const auto part = set.subset(idx);
            neural::ForwardCache<typename M::Scalar> cache;
            const auto& p = neural::forward(model, part, cache, false);
            for (std::size_t i = 0; i < part.size(); ++i) {
                const auto col = p.col(static_cast<Eigen::Index>(i));
                for (std::size_t v = 0; v < probs.size(); ++v) probs[v] = static_cast<double>(col[static_cast<Eigen::Index>(v)]);
                fn(begin + i, std::span<const double>(probs));
            }
        } else {
            for (std::size_t i = begin; i < end; ++i) {
                model.distribution(set[i].context, probs);
                fn(i, std::span<const double>(probs));
            }
        }
    });
}

struct ExampleScore {
    std::size_t rank = 0;  // 1-based rank of the target in the full ranking
    double probability = 0;
};

template <LanguageModel M>
std::vector<ExampleScore> score_examples(const M& model, const ExampleSet& set, std::size_t threads = 1) {
    std::vector<ExampleScore> scores(set.size());
    for_each_distribution(model, set, threads, [&](std::size_t i, std::span<const double> probs) {
        const auto target = set[i].target;
        if (target >= probs.size()) throw RangeError("target id out of range");
        scores[i] = {rank_of(probs, target), probs[target]};
    });
    return scores;
}

struct EvalReport {
    std::string model_kind;
    std::map<std::size_t, std::size_t> hits;  // k -> examples with rank <= k
    std::map<std::size_t, double> accuracy;   // k -> hits / example_count
    double mrr = 0;
    double cross_entropy_bits = 0;
    std::size_t example_count = 0;
    std::size_t unk_targets = 0;
    std::size_t clamped_probabilities = 0;
    double wall_seconds = 0;

    double unk_target_fraction() const {
        return example_count == 0 ? 0.0 : static_cast<double>(unk_targets) / static_cast<double>(example_count);
    }
};

/// Aggregates per-example scores in index order, so results do not depend on
/// how scoring was parallelized.
inline EvalReport summarize(const ExampleSet& set, std::span<const ExampleScore> scores, std::span<const std::size_t> ks) {
    EvalReport r;
    r.example_count = scores.size();
    for (const auto k : ks) r.hits[k] = 0;
    double reciprocal = 0, bits = 0;
    for (std::size_t i = 0; i < scores.size(); ++i) {
        for (auto& [k, h] : r.hits) h += scores[i].rank <= k ? 1 : 0;
        reciprocal += 1.0 / static_cast<double>(scores[i].rank);
        double p = scores[i].probability;
        if (p < kMinProbability) {
            p = kMinProbability;
            ++r.clamped_probabilities;
        }
        bits -= std::log2(p);
        r.unk_targets += set[i].target == kUnkId ? 1 : 0;
    }
    const double n = static_cast<double>(r.example_count);
    for (const auto& [k, h] : r.hits) r.accuracy[k] = static_cast<double>(h) / n;
    r.mrr = reciprocal / n;
    r.cross_entropy_bits = bits / n;
    return r;
}

template <LanguageModel M>
EvalReport evaluate(const M& model, const ExampleSet& test, std::string model_kind,
                    std::span<const std::size_t> ks = kDefaultKs, std::size_t threads = 1) {
    if (test.empty()) throw DataError("cannot evaluate on an empty test set");
    const auto t0 = std::chrono::steady_clock::now();
    const auto scores = score_examples(model, test, threads);
    auto r = summarize(test, scores, ks);
    r.model_kind = std::move(model_kind);
    r.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return r;
}

template <LanguageModel M>
std::map<std::size_t, double> topk_accuracy(const M& model, const ExampleSet& examples,
                                            std::span<const std::size_t> ks = kDefaultKs, std::size_t threads = 1) {
    return evaluate(model, examples, "", ks, threads).accuracy;
}

template <LanguageModel M>
double mrr(const M& model, const ExampleSet& examples, std::size_t threads = 1) {
    return evaluate(model, examples, "", kDefaultKs, threads).mrr;
}

struct CrossEntropy {
    double bits = 0;
    std::size_t clamped = 0;
};

/// Mean -log2 P(target | context), probabilities clamped at 1e-12.
template <LanguageModel M>
CrossEntropy cross_entropy(const M& model, const ExampleSet& examples, std::size_t threads = 1) {
    const auto r = evaluate(model, examples, "", kDefaultKs, threads);
    return {r.cross_entropy_bits, r.clamped_probabilities};
}

/// Mean reciprocal rank of a list of 1-based ranks.
inline double mean_reciprocal_rank(std::span<const std::size_t> ranks) {
    if (ranks.empty()) throw DataError("MRR of an empty rank list");
    double s = 0;
    for (const auto r : ranks) s += 1.0 / static_cast<double>(r);
    return s / static_cast<double>(ranks.size());
}

inline std::string format_fixed(double v, int digits) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", digits, v);
    return buf;
}

/// Tab-separated comparison table, one row per model.
inline std::string reports_to_tsv(std::span<const EvalReport> reports) {
    std::string out = "model\ttop1\ttop3\ttop5\ttop10\tmrr\tcross_entropy_bits\texamples\tunk_target_fraction\n";
    for (const auto& r : reports) {
        out += r.model_kind;
        for (const auto k : kDefaultKs) {
            const auto it = r.accuracy.find(k);
            out += '\t' + format_fixed(it == r.accuracy.end() ? 0.0 : it->second, 6);
        }
        out += '\t' + format_fixed(r.mrr, 6);
        out += '\t' + format_fixed(r.cross_entropy_bits, 6);
        out += '\t' + std::to_string(r.example_count);
        out += '\t' + format_fixed(r.unk_target_fraction(), 6);
        out += '\n';
    }
    return out;
}

inline std::string reports_to_table(std::span<const EvalReport> reports) {
    std::string out;
    char line[256];
    std::snprintf(line, sizeof line, "%-8s %8s %8s %8s %8s %7s %10s\n", "Model", "Top-1", "Top-3", "Top-5", "Top-10", "MRR",
                  "CE (bits)");
    out += line;
    for (const auto& r : reports) {
        const auto pct = [&](std::size_t k) {
            const auto it = r.accuracy.find(k);
            return (it == r.accuracy.end() ? 0.0 : it->second) * 100.0;
        };
        std::snprintf(line, sizeof line, "%-8s %7.2f%% %7.2f%% %7.2f%% %7.2f%% %7.3f %10.4f\n", r.model_kind.c_str(), pct(1),
                      pct(3), pct(5), pct(10), r.mrr, r.cross_entropy_bits);
        out += line;
    }
    return out;
}

}  // namespace codeseer

#endif  // CODESEER_EVAL_HPP
