#ifndef CODESEER_NEURAL_SEQUENCE_MODEL_HPP
#define CODESEER_NEURAL_SEQUENCE_MODEL_HPP

#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "codeseer/contexts.hpp"
#include "codeseer/error.hpp"
#include "codeseer/neural/cells.hpp"
#include "codeseer/neural/tensor.hpp"
#include "codeseer/ranking.hpp"

namespace codeseer::neural {

enum class ModelKind : std::uint8_t { rnn = 1, bigru = 2 };

inline std::string_view to_string(ModelKind k) noexcept { return k == ModelKind::rnn ? "rnn" : "bigru"; }

inline ModelKind parse_model_kind(std::string_view s) {
    if (s == "rnn") return ModelKind::rnn;
    if (s == "bigru") return ModelKind::bigru;
    throw DataError("unknown neural model kind '" + std::string(s) + "'");
}

struct ModelDims {
    std::size_t context_len = 20;
    std::size_t vocab_size = 0;
    std::size_t embed_dim = 64;
    std::size_t hidden_dim = 128;

    friend bool operator==(const ModelDims&, const ModelDims&) = default;
};

/// Embedding -> recurrent encoder over the context window -> affine -> softmax.
/// For bigru the forward cell reads positions 1..n, the backward cell reads
/// n..1, and their final states are concatenated [forward; backward].
template <class S>
struct SequenceModel {
    using Scalar = S;
    using NeuralTag = void;

    ModelKind kind = ModelKind::bigru;
    ModelDims dims;
    ParamMatrix<S> embedding;  // vocab x embed
    GruCellParams<S> forward_gru;
    GruCellParams<S> backward_gru;
    RnnCellParams<S> rnn;
    ParamMatrix<S> projection;       // vocab x state
    ParamVector<S> projection_bias;  // vocab

    std::size_t state_dim() const noexcept { return kind == ModelKind::bigru ? 2 * dims.hidden_dim : dims.hidden_dim; }
    std::size_t vocab_size() const noexcept { return dims.vocab_size; }
    std::size_t context_len() const noexcept { return dims.context_len; }

    static SequenceModel zeros(ModelKind kind, const ModelDims& dims) {
        if (dims.context_len < 1 || dims.vocab_size < 1 || dims.embed_dim < 1 || dims.hidden_dim < 1) {
            throw DataError("model dimensions must be positive");
        }
        SequenceModel m;
        m.kind = kind;
        m.dims = dims;
        const auto V = static_cast<Eigen::Index>(dims.vocab_size);
        const auto E = static_cast<Eigen::Index>(dims.embed_dim);
        const auto H = static_cast<Eigen::Index>(dims.hidden_dim);
        m.embedding.setZero(V, E);
        if (kind == ModelKind::bigru) {
            m.forward_gru = GruCellParams<S>::zeros(H, E);
            m.backward_gru = GruCellParams<S>::zeros(H, E);
        } else {
            m.rnn = RnnCellParams<S>::zeros(H, E);
        }
        m.projection.setZero(V, static_cast<Eigen::Index>(m.state_dim()));
        m.projection_bias.setZero(V);
        return m;
    }

    /// Glorot-uniform matrices; zero biases and zero output projection, so a
    /// fresh model predicts the uniform distribution.
    static SequenceModel initialize(ModelKind kind, const ModelDims& dims, std::uint64_t seed) {
        auto m = zeros(kind, dims);
        Initializer init(seed);
        m.visit([&](std::string_view name, auto& t) {
            if constexpr (std::is_same_v<std::decay_t<decltype(t)>, ParamMatrix<S>>) {
                if (name != "projection") init.template glorot<S>(t);
            }
        });
        return m;
    }

    SequenceModel zeros_like() const { return zeros(kind, dims); }

    /// Visits every parameter tensor in declared (checkpoint) order.
    template <class F>
    void visit(F&& f) {
        visit_impl(*this, f);
    }
    template <class F>
    void visit(F&& f) const {
        visit_impl(*this, f);
    }

    std::size_t parameter_count() const {
        std::size_t n = 0;
        visit([&](std::string_view, const auto& t) { n += static_cast<std::size_t>(t.size()); });
        return n;
    }

    template <class T>
    SequenceModel<T> cast() const {
        auto out = SequenceModel<T>::zeros(kind, dims);
        std::vector<const S*> src;
        visit([&](std::string_view, const auto& t) { src.push_back(t.data()); });
        std::size_t i = 0;
        out.visit([&](std::string_view, auto& t) {
            const S* s = src[i++];
            for (Eigen::Index j = 0; j < t.size(); ++j) t.data()[j] = static_cast<T>(s[j]);
        });
        return out;
    }

    void distribution(std::span<const TokenId> context, std::span<double> out) const;

    std::vector<Suggestion> predict_topk(std::span<const TokenId> context, std::size_t k) const {
        return codeseer::predict_topk(*this, context, k);
    }

    friend bool operator==(const SequenceModel& a, const SequenceModel& b) {
        if (a.kind != b.kind || !(a.dims == b.dims)) return false;
        std::vector<std::pair<const S*, Eigen::Index>> ta;
        a.visit([&](std::string_view, const auto& t) { ta.emplace_back(t.data(), t.size()); });
        std::size_t i = 0;
        bool equal = true;
        b.visit([&](std::string_view, const auto& t) {
            const auto [data, size] = ta[i++];
            equal = equal && size == t.size() && std::equal(data, data + size, t.data());
        });
        return equal;
    }

private:
    template <class Self, class F>
    static void visit_impl(Self& self, F& f) {
        f(std::string_view("embedding"), self.embedding);
        if (self.kind == ModelKind::bigru) {
            GruCellParams<S>::visit(self.forward_gru, "forward.", f);
            GruCellParams<S>::visit(self.backward_gru, "backward.", f);
        } else {
            RnnCellParams<S>::visit(self.rnn, "rnn.", f);
        }
        f(std::string_view("projection"), self.projection);
        f(std::string_view("projection_bias"), self.projection_bias);
    }
};

/// Per-step activations retained for backpropagation through time.
template <class S>
struct ForwardCache {
    std::vector<Batch<S>> inputs;  // embedded context, one per position
    std::vector<GruStepCache<S>> forward_steps;
    std::vector<GruStepCache<S>> backward_steps;
    std::vector<RnnStepCache<S>> rnn_steps;
    Batch<S> state;  // state_dim x batch
    Batch<S> probs;  // vocab x batch
};

template <class S>
void check_context(const SequenceModel<S>& m, std::span<const TokenId> context) {
    if (context.size() != m.dims.context_len) {
        throw RangeError("context length " + std::to_string(context.size()) + " != model context length " +
                         std::to_string(m.dims.context_len));
    }
    for (const auto id : context) {
        if (id >= m.dims.vocab_size) {
            throw RangeError("token id " + std::to_string(id) + " out of range for vocabulary of size " +
                             std::to_string(m.dims.vocab_size));
        }
    }
}

/// Forward pass over a batch of examples; returns vocab x batch probabilities.
template <class S>
const Batch<S>& forward(const SequenceModel<S>& m, const ExampleSet& batch, ForwardCache<S>& cache,
                        bool keep_steps = true) {
    const std::size_t n = m.dims.context_len;
    if (batch.context_len() != n) throw RangeError("example context length does not match the model");
    const auto B = static_cast<Eigen::Index>(batch.size());
    const auto E = static_cast<Eigen::Index>(m.dims.embed_dim);
    const auto H = static_cast<Eigen::Index>(m.dims.hidden_dim);

    cache.inputs.assign(n, Batch<S>(E, B));
    for (Eigen::Index b = 0; b < B; ++b) {
        const auto ex = batch[static_cast<std::size_t>(b)];
        check_context(m, ex.context);
        for (std::size_t t = 0; t < n; ++t) cache.inputs[t].col(b) = m.embedding.row(ex.context[t]).transpose();
    }

    cache.state.resize(static_cast<Eigen::Index>(m.state_dim()), B);
    Batch<S> h = Batch<S>::Zero(H, B);
    if (m.kind == ModelKind::bigru) {
        cache.forward_steps.resize(keep_steps ? n : 0);
        cache.backward_steps.resize(keep_steps ? n : 0);
        for (std::size_t t = 0; t < n; ++t) {
            h = gru_step(m.forward_gru, cache.inputs[t], h, keep_steps ? &cache.forward_steps[t] : nullptr);
        }
        cache.state.topRows(H) = h;
        h.setZero();
        for (std::size_t s = 0; s < n; ++s) {
            const std::size_t t = n - 1 - s;
            h = gru_step(m.backward_gru, cache.inputs[t], h, keep_steps ? &cache.backward_steps[s] : nullptr);
        }
        cache.state.bottomRows(H) = h;
    } else {
        cache.rnn_steps.resize(keep_steps ? n : 0);
        for (std::size_t t = 0; t < n; ++t) {
            h = rnn_step(m.rnn, cache.inputs[t], h, keep_steps ? &cache.rnn_steps[t] : nullptr);
        }
        cache.state = h;
    }
    cache.probs.noalias() = m.projection * cache.state;
    cache.probs.colwise() += m.projection_bias;
    softmax_columns(cache.probs);
    return cache.probs;
}

template <class S>
void SequenceModel<S>::distribution(std::span<const TokenId> context, std::span<double> out) const {
    if (out.size() != dims.vocab_size) throw RangeError("distribution buffer size mismatch");
    check_context(*this, context);
    ExampleSet one(dims.context_len);
    one.push_back(context, kPadId);
    ForwardCache<S> cache;
    const auto& p = forward(*this, one, cache, false);
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = static_cast<double>(p(static_cast<Eigen::Index>(i), 0));
}

/// Probabilities of `context` under the model (the model_forward surface).
template <class S>
std::vector<double> model_forward(const SequenceModel<S>& m, std::span<const TokenId> context) {
    std::vector<double> out(m.vocab_size());
    m.distribution(context, out);
    return out;
}

/// Backpropagation through time. Adds the gradient of (summed natural-log
/// loss over `batch`) / normalizer into `grad` and returns the summed loss.
/// Shards of one mini-batch pass the full mini-batch size as normalizer.
template <class S>
double accumulate_gradients(const SequenceModel<S>& m, const ExampleSet& batch, SequenceModel<S>& grad,
                            double normalizer, std::size_t* top1_hits = nullptr) {
    ForwardCache<S> cache;
    forward(m, batch, cache, true);
    const std::size_t n = m.dims.context_len;
    const auto B = static_cast<Eigen::Index>(batch.size());
    const auto H = static_cast<Eigen::Index>(m.dims.hidden_dim);
    const S inv = static_cast<S>(1.0 / normalizer);

    double loss = 0.0;
    Batch<S> dlogits = cache.probs;
    for (Eigen::Index b = 0; b < B; ++b) {
        const auto target = batch[static_cast<std::size_t>(b)].target;
        if (target >= m.dims.vocab_size) throw RangeError("target id out of range");
        const double p = std::max(static_cast<double>(cache.probs(target, b)), 1e-30);
        loss -= std::log(p);
        if (top1_hits) {
            Eigen::Index best = 0;
            cache.probs.col(b).maxCoeff(&best);
            *top1_hits += static_cast<TokenId>(best) == target ? 1 : 0;
        }
        dlogits(target, b) -= S(1);
    }
    dlogits *= inv;

    grad.projection.noalias() += dlogits * cache.state.transpose();
    grad.projection_bias += dlogits.rowwise().sum();
    const Batch<S> dstate = m.projection.transpose() * dlogits;

    const auto E = static_cast<Eigen::Index>(m.dims.embed_dim);
    std::vector<Batch<S>> dx(n, Batch<S>::Zero(E, B));
    if (m.kind == ModelKind::bigru) {
        Batch<S> dh = dstate.topRows(H);
        for (std::size_t t = n; t > 0; --t) {
            dh = gru_step_backward(m.forward_gru, cache.inputs[t - 1], cache.forward_steps[t - 1], dh, grad.forward_gru,
                                   dx[t - 1]);
        }
        dh = dstate.bottomRows(H);
        for (std::size_t s = n; s > 0; --s) {
            const std::size_t t = n - s;  // backward step s-1 consumed position n-s
            dh = gru_step_backward(m.backward_gru, cache.inputs[t], cache.backward_steps[s - 1], dh, grad.backward_gru,
                                   dx[t]);
        }
    } else {
        Batch<S> dh = dstate;
        for (std::size_t t = n; t > 0; --t) {
            dh = rnn_step_backward(m.rnn, cache.inputs[t - 1], cache.rnn_steps[t - 1], dh, grad.rnn, dx[t - 1]);
        }
    }
    for (Eigen::Index b = 0; b < B; ++b) {
        const auto ctx = batch[static_cast<std::size_t>(b)].context;
        for (std::size_t t = 0; t < n; ++t) grad.embedding.row(ctx[t]) += dx[t].col(b).transpose();
    }
    return loss;
}

template <class S>
struct GradientResult {
    double loss = 0.0;  // mean natural-log loss
    SequenceModel<S> grad;
};

template <class S>
void require_finite_gradients(const SequenceModel<S>& grad) {
    grad.visit([](std::string_view name, const auto& t) {
        if (!t.allFinite()) throw NumericError("non-finite gradient in parameter '" + std::string(name) + "'");
    });
}

/// Gradient of the mean cross-entropy (natural log) over `batch`.
template <class S>
GradientResult<S> backward(const SequenceModel<S>& m, const ExampleSet& batch) {
    if (batch.empty()) throw DataError("backward requires a non-empty batch");
    GradientResult<S> r{0.0, m.zeros_like()};
    const double n = static_cast<double>(batch.size());
    r.loss = accumulate_gradients(m, batch, r.grad, n) / n;
    require_finite_gradients(r.grad);
    return r;
}

/// Mean natural-log loss without gradients, processed in chunks.
template <class S>
double mean_loss(const SequenceModel<S>& m, const ExampleSet& examples, std::size_t chunk = 256) {
    if (examples.empty()) throw DataError("loss requires a non-empty example set");
    ForwardCache<S> cache;
    double loss = 0.0;
    std::vector<std::size_t> idx;
    for (std::size_t start = 0; start < examples.size(); start += chunk) {
        const std::size_t end = std::min(examples.size(), start + chunk);
        idx.clear();
        for (std::size_t i = start; i < end; ++i) idx.push_back(i);
        const auto part = examples.subset(idx);
        const auto& p = forward(m, part, cache, false);
        for (std::size_t i = 0; i < part.size(); ++i) {
            loss -= std::log(std::max(static_cast<double>(p(part[i].target, static_cast<Eigen::Index>(i))), 1e-30));
        }
    }
    return loss / static_cast<double>(examples.size());
}

}  // namespace codeseer::neural

#endif  // CODESEER_NEURAL_SEQUENCE_MODEL_HPP
