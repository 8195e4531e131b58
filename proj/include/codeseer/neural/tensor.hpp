#ifndef CODESEER_NEURAL_TENSOR_HPP
#define CODESEER_NEURAL_TENSOR_HPP

#include <cmath>
#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "codeseer/error.hpp"

namespace codeseer::neural {

/// Parameters are row-major so their storage order is the checkpoint order.
template <class S>
using ParamMatrix = Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <class S>
using ParamVector = Eigen::Matrix<S, Eigen::Dynamic, 1>;

/// Activations: one column per example in the batch.
template <class S>
using Batch = Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic>;

template <class S>
using Vector = Eigen::Matrix<S, Eigen::Dynamic, 1>;

template <class S, class Derived>
auto sigmoid(const Eigen::MatrixBase<Derived>& a) {
    return (S(1) / (S(1) + (-a.array()).exp())).matrix();
}

/// Deterministic uniform initializer. Uses raw engine output rather than
/// std::uniform_real_distribution so values agree across standard libraries.
class Initializer {
public:
    explicit Initializer(std::uint64_t seed) : rng_(seed) {}

    double uniform(double limit) {
        const double u = static_cast<double>(rng_() >> 11) * 0x1.0p-53;
        return (2.0 * u - 1.0) * limit;
    }

    template <class S>
    void glorot(ParamMatrix<S>& m) {
        const double limit = std::sqrt(6.0 / static_cast<double>(m.rows() + m.cols()));
        for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = static_cast<S>(uniform(limit));
    }

    std::mt19937_64& engine() noexcept { return rng_; }

private:
    std::mt19937_64 rng_;
};

/// Numerically stable softmax: subtracts the maximum before exponentiating.
inline std::vector<double> softmax(std::span<const double> scores) {
    std::vector<double> out(scores.size());
    if (scores.empty()) return out;
    double mx = scores[0];
    for (const double s : scores) mx = std::max(mx, s);
    double sum = 0.0;
    for (std::size_t i = 0; i < scores.size(); ++i) {
        out[i] = std::exp(scores[i] - mx);
        sum += out[i];
    }
    for (auto& v : out) v /= sum;
    return out;
}

/// Column-wise softmax in place.
template <class S>
void softmax_columns(Batch<S>& logits) {
    for (Eigen::Index b = 0; b < logits.cols(); ++b) {
        auto col = logits.col(b);
        const S mx = col.maxCoeff();
        col = (col.array() - mx).exp().matrix();
        col /= col.sum();
    }
}

template <class Derived>
void require_finite(const Eigen::MatrixBase<Derived>& m, std::string_view what) {
    if (!m.allFinite()) throw NumericError("non-finite values in " + std::string(what));
}

}  // namespace codeseer::neural

#endif  // CODESEER_NEURAL_TENSOR_HPP
