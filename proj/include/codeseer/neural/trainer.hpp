#ifndef CODESEER_NEURAL_TRAINER_HPP
#define CODESEER_NEURAL_TRAINER_HPP

#include <chrono>
#include <cmath>
#include <functional>
#include <numbers>
#include <numeric>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "codeseer/contexts.hpp"
#include "codeseer/error.hpp"
#include "codeseer/neural/checkpoint.hpp"
#include "codeseer/neural/sequence_model.hpp"
#include "codeseer/parallel.hpp"
#include "codeseer/vocabulary.hpp"

namespace codeseer::neural {

struct TrainConfig {
    std::size_t epochs = 10;
    std::size_t batch_size = 64;
    double learning_rate = 1e-3;
    double gradient_clip_norm = 5.0;
    std::uint64_t seed = 1;
    double validation_fraction = 0.1;
    std::size_t threads = 1;
    std::size_t patience = 0;  // epochs without validation improvement before stopping; 0 disables
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;

    void validate() const {
        if (epochs == 0 || batch_size == 0) throw DataError("epochs and batch size must be positive");
        if (!(learning_rate > 0) || !(gradient_clip_norm > 0)) throw DataError("learning rate and clip norm must be positive");
        if (!(validation_fraction > 0 && validation_fraction < 1)) throw DataError("validation fraction must lie in (0, 1)");
    }
};

struct EpochMetrics {
    std::size_t epoch = 0;  // 1-based
    double train_loss_bits = 0;
    double val_loss_bits = 0;
    double train_acc = 0;
    double val_acc = 0;
};

struct TrainResult {
    Checkpoint checkpoint;  // best validation loss epoch
    std::vector<EpochMetrics> history;
    double initial_val_loss_bits = 0;
    std::size_t best_epoch = 0;
    bool diverged = false;
    std::string divergence_reason;
};

/// Adam with bias-corrected moments.
template <class S>
class Adam {
public:
    Adam(const SequenceModel<S>& shape, const TrainConfig& cfg)
        : m_(shape.zeros_like()), v_(shape.zeros_like()), cfg_(cfg) {}

    void step(SequenceModel<S>& params, const SequenceModel<S>& grad) {
        ++t_;
        const double c1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(t_));
        const double c2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(t_));
        const S lr = static_cast<S>(cfg_.learning_rate * std::sqrt(c2) / c1);
        const S b1 = static_cast<S>(cfg_.beta1), b2 = static_cast<S>(cfg_.beta2);
        const S eps = static_cast<S>(cfg_.epsilon * std::sqrt(c2));
        std::vector<S*> p, g, m, v;
        std::vector<Eigen::Index> sizes;
        params.visit([&](std::string_view, auto& t) {
            p.push_back(t.data());
            sizes.push_back(t.size());
        });
        grad.visit([&](std::string_view, const auto& t) { g.push_back(const_cast<S*>(t.data())); });
        m_.visit([&](std::string_view, auto& t) { m.push_back(t.data()); });
        v_.visit([&](std::string_view, auto& t) { v.push_back(t.data()); });
        for (std::size_t i = 0; i < p.size(); ++i) {
            using Arr = Eigen::Map<Eigen::Array<S, Eigen::Dynamic, 1>>;
            Arr P(p[i], sizes[i]), G(g[i], sizes[i]), M(m[i], sizes[i]), V(v[i], sizes[i]);
            M = b1 * M + (S(1) - b1) * G;
            V = b2 * V + (S(1) - b2) * G.square();
            P -= lr * M / (V.sqrt() + eps);
        }
    }

private:
    SequenceModel<S> m_, v_;
    const TrainConfig& cfg_;
    std::size_t t_ = 0;
};

template <class S>
double gradient_norm(const SequenceModel<S>& grad) {
    double sq = 0.0;
    grad.visit([&](std::string_view, const auto& t) { sq += t.template cast<double>().squaredNorm(); });
    return std::sqrt(sq);
}

template <class S>
void scale_gradients(SequenceModel<S>& grad, double factor) {
    grad.visit([&](std::string_view, auto& t) { t *= static_cast<S>(factor); });
}

struct LossAccuracy {
    double loss_bits = 0;
    double accuracy = 0;
};

/// Mean loss (bits) and top-1 accuracy with the shared tie rule (lowest id).
template <class S>
LossAccuracy loss_and_accuracy(const SequenceModel<S>& model, const ExampleSet& set, std::size_t chunk = 512) {
    ForwardCache<S> cache;
    double loss = 0;
    std::size_t hits = 0;
    std::vector<std::size_t> idx;
    for (std::size_t start = 0; start < set.size(); start += chunk) {
        idx.resize(std::min(set.size(), start + chunk) - start);
        std::iota(idx.begin(), idx.end(), start);
        const auto part = set.subset(idx);
        const auto& p = forward(model, part, cache, false);
        for (std::size_t i = 0; i < part.size(); ++i) {
            const auto col = static_cast<Eigen::Index>(i);
            loss -= std::log(std::max(static_cast<double>(p(part[i].target, col)), 1e-30));
            Eigen::Index best = 0;
            p.col(col).maxCoeff(&best);
            hits += static_cast<TokenId>(best) == part[i].target ? 1 : 0;
        }
    }
    const double n = static_cast<double>(set.size());
    return {loss / n / std::numbers::ln2, static_cast<double>(hits) / n};
}

inline void fisher_yates(std::vector<std::size_t>& v, std::mt19937_64& rng) {
    for (std::size_t i = v.size(); i > 1; --i) std::swap(v[i - 1], v[rng() % i]);
}

/// Seeded example-level split into (train, validation).
inline std::pair<ExampleSet, ExampleSet> split_validation(const ExampleSet& examples, double fraction,
                                                          std::uint64_t seed) {
    std::vector<std::size_t> order(examples.size());
    std::iota(order.begin(), order.end(), 0);
    std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ULL);
    fisher_yates(order, rng);
    auto n_val = static_cast<std::size_t>(std::llround(fraction * static_cast<double>(examples.size())));
    n_val = std::clamp<std::size_t>(n_val, 1, examples.size() - 1);
    std::vector<std::size_t> val(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_val));
    std::vector<std::size_t> tr(order.begin() + static_cast<std::ptrdiff_t>(n_val), order.end());
    std::sort(val.begin(), val.end());
    std::sort(tr.begin(), tr.end());
    return {examples.subset(tr), examples.subset(val)};
}

inline std::string format_double(double v) {
    std::ostringstream os;
    os.precision(17);
    os << v;
    return os.str();
}

using EpochCallback = std::function<void(const EpochMetrics&, double seconds)>;

/// Mini-batch Adam on the mean cross-entropy with global-norm clipping.
/// Deterministic for a fixed seed and thread count.
inline TrainResult train(const ExampleSet& examples, const Vocabulary& vocab, ModelKind kind, ModelDims dims,
                         const TrainConfig& cfg, const EpochCallback& on_epoch = {}) {
    cfg.validate();
    if (examples.size() < 2) throw DataError("training requires at least two examples");
    dims.context_len = examples.context_len();
    dims.vocab_size = vocab.size();
    if (examples.max_id() >= vocab.size()) throw RangeError("example ids exceed the vocabulary");

    auto [train_set, val_set] = split_validation(examples, cfg.validation_fraction, cfg.seed);
    auto model = SequenceModel<float>::initialize(kind, dims, cfg.seed);
    Adam<float> adam(model, cfg);
    const std::size_t threads = resolve_threads(cfg.threads);

    TrainResult result;
    result.initial_val_loss_bits = loss_and_accuracy(model, val_set).loss_bits;
    result.checkpoint.model = model;
    result.checkpoint.vocab_hash = vocab.hash();
    double best_val = std::numeric_limits<double>::infinity();
    std::size_t since_best = 0;

    std::mt19937_64 rng(cfg.seed);
    std::vector<std::size_t> order(train_set.size());
    std::iota(order.begin(), order.end(), 0);
    auto grad = model.zeros_like();
    std::vector<SequenceModel<float>> shard_grads;
    std::vector<double> shard_loss;
    std::vector<std::size_t> shard_hits;

    for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
        const auto t0 = std::chrono::steady_clock::now();
        fisher_yates(order, rng);
        double loss_sum = 0;
        std::size_t hits = 0;
        try {
            for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
                const std::size_t end = std::min(order.size(), start + cfg.batch_size);
                const auto batch = train_set.subset(std::span<const std::size_t>(order).subspan(start, end - start));
                const double bsz = static_cast<double>(batch.size());
                grad.visit([](std::string_view, auto& t) { t.setZero(); });

                const std::size_t shards = std::min(threads, batch.size());
                if (shards <= 1) {
                    loss_sum += accumulate_gradients(model, batch, grad, bsz, &hits);
                } else {
                    shard_grads.resize(shards, grad);
                    shard_loss.assign(shards, 0.0);
                    shard_hits.assign(shards, 0);
                    parallel_shards(batch.size(), shards, [&](std::size_t s, std::size_t b, std::size_t e) {
                        shard_grads[s].visit([](std::string_view, auto& t) { t.setZero(); });
                        std::vector<std::size_t> idx(e - b);
                        std::iota(idx.begin(), idx.end(), b);
                        shard_loss[s] = accumulate_gradients(model, batch.subset(idx), shard_grads[s], bsz, &shard_hits[s]);
                    });
                    for (std::size_t s = 0; s < shards; ++s) {
                        std::vector<float*> dst;
                        grad.visit([&](std::string_view, auto& t) { dst.push_back(t.data()); });
                        std::size_t i = 0;
                        shard_grads[s].visit([&](std::string_view, const auto& t) {
                            float* d = dst[i++];
                            for (Eigen::Index j = 0; j < t.size(); ++j) d[j] += t.data()[j];
                        });
                        loss_sum += shard_loss[s];
                        hits += shard_hits[s];
                    }
                }
                require_finite_gradients(grad);
                const double norm = gradient_norm(grad);
                if (norm > cfg.gradient_clip_norm) scale_gradients(grad, cfg.gradient_clip_norm / norm);
                adam.step(model, grad);
            }
        } catch (const NumericError& e) {
            result.diverged = true;
            result.divergence_reason = e.what();
            break;
        }

        EpochMetrics em;
        em.epoch = epoch;
        em.train_loss_bits = loss_sum / static_cast<double>(order.size()) / std::numbers::ln2;
        em.train_acc = static_cast<double>(hits) / static_cast<double>(order.size());
        const auto val = loss_and_accuracy(model, val_set);
        em.val_loss_bits = val.loss_bits;
        em.val_acc = val.accuracy;
        if (!std::isfinite(em.val_loss_bits) || !std::isfinite(em.train_loss_bits)) {
            result.diverged = true;
            result.divergence_reason = "non-finite loss at epoch " + std::to_string(epoch);
            break;
        }
        result.history.push_back(em);
        if (on_epoch) {
            on_epoch(em, std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
        }
        if (em.val_loss_bits < best_val) {
            best_val = em.val_loss_bits;
            result.best_epoch = epoch;
            result.checkpoint.model = model;
            since_best = 0;
        } else if (cfg.patience > 0 && ++since_best >= cfg.patience) {
            break;
        }
    }

    auto& meta = result.checkpoint.metadata;
    meta["kind"] = std::string(to_string(kind));
    meta["epochs_completed"] = std::to_string(result.history.size());
    meta["best_epoch"] = std::to_string(result.best_epoch);
    meta["seed"] = std::to_string(cfg.seed);
    meta["initial_val_loss_bits"] = format_double(result.initial_val_loss_bits);
    meta["diverged"] = result.diverged ? "true" : "false";
    if (result.best_epoch > 0) {
        const auto& best = result.history[result.best_epoch - 1];
        meta["train_loss_bits"] = format_double(best.train_loss_bits);
        meta["val_loss_bits"] = format_double(best.val_loss_bits);
        meta["train_acc"] = format_double(best.train_acc);
        meta["val_acc"] = format_double(best.val_acc);
    }
    return result;
}

}  // namespace codeseer::neural

#endif  // CODESEER_NEURAL_TRAINER_HPP
