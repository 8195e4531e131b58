#ifndef CODESEER_NEURAL_CELLS_HPP
#define CODESEER_NEURAL_CELLS_HPP

// Recurrent cells and their single-step backward passes. All step functions
// work on batches (one column per example).
//
// GRU:
//   z  = sigmoid(W_z x + U_z h + b_z)        update gate
//   r  = sigmoid(W_r x + U_r h + b_r)        reset gate
//   h~ = tanh(W x + r * (U h) + b)           candidate state
//   h' = (1 - z) * h + z * h~
// RNN:
//   h' = tanh(W_x x + W_h h + b)

#include <string>
#include <string_view>

#include "codeseer/neural/tensor.hpp"

namespace codeseer::neural {

template <class S>
struct GruCellParams {
    ParamMatrix<S> W_z, W_r, W;  // hidden x input
    ParamMatrix<S> U_z, U_r, U;  // hidden x hidden
    ParamVector<S> b_z, b_r, b;  // hidden

    static GruCellParams zeros(Eigen::Index hidden, Eigen::Index input) {
        GruCellParams p;
        for (auto* m : {&p.W_z, &p.W_r, &p.W}) m->setZero(hidden, input);
        for (auto* m : {&p.U_z, &p.U_r, &p.U}) m->setZero(hidden, hidden);
        for (auto* v : {&p.b_z, &p.b_r, &p.b}) v->setZero(hidden);
        return p;
    }

    Eigen::Index hidden_dim() const noexcept { return U.rows(); }
    Eigen::Index input_dim() const noexcept { return W.cols(); }

    template <class Self, class F>
    static void visit(Self& self, std::string_view prefix, F&& f) {
        const std::string p(prefix);
        f(p + "W_z", self.W_z);
        f(p + "W_r", self.W_r);
        f(p + "W", self.W);
        f(p + "U_z", self.U_z);
        f(p + "U_r", self.U_r);
        f(p + "U", self.U);
        f(p + "b_z", self.b_z);
        f(p + "b_r", self.b_r);
        f(p + "b", self.b);
    }
};

template <class S>
struct RnnCellParams {
    ParamMatrix<S> W_x;  // hidden x input
    ParamMatrix<S> W_h;  // hidden x hidden
    ParamVector<S> b;

    static RnnCellParams zeros(Eigen::Index hidden, Eigen::Index input) {
        RnnCellParams p;
        p.W_x.setZero(hidden, input);
        p.W_h.setZero(hidden, hidden);
        p.b.setZero(hidden);
        return p;
    }

    Eigen::Index hidden_dim() const noexcept { return W_h.rows(); }
    Eigen::Index input_dim() const noexcept { return W_x.cols(); }

    template <class Self, class F>
    static void visit(Self& self, std::string_view prefix, F&& f) {
        const std::string p(prefix);
        f(p + "W_x", self.W_x);
        f(p + "W_h", self.W_h);
        f(p + "b", self.b);
    }
};

template <class S>
struct GruStepCache {
    Batch<S> h_prev, z, r, u, h_cand;  // u = U h_prev
};

template <class S>
struct RnnStepCache {
    Batch<S> h_prev, h_next;
};

template <class S>
Batch<S> gru_step(const GruCellParams<S>& p, const Batch<S>& x, const Batch<S>& h_prev, GruStepCache<S>* cache = nullptr) {
    Batch<S> z = sigmoid<S>((p.W_z * x + p.U_z * h_prev).colwise() + p.b_z);
    Batch<S> r = sigmoid<S>((p.W_r * x + p.U_r * h_prev).colwise() + p.b_r);
    Batch<S> u = p.U * h_prev;
    Batch<S> h_cand = ((p.W * x + r.cwiseProduct(u)).colwise() + p.b).array().tanh().matrix();
    Batch<S> h_next = h_prev + z.cwiseProduct(h_cand - h_prev);
    if (cache) {
        cache->h_prev = h_prev;
        cache->z = std::move(z);
        cache->r = std::move(r);
        cache->u = std::move(u);
        cache->h_cand = std::move(h_cand);
    }
    return h_next;
}

/// Accumulates parameter gradients into `grad`, input gradients into `dx`,
/// and returns the gradient with respect to h_prev.
template <class S>
Batch<S> gru_step_backward(const GruCellParams<S>& p, const Batch<S>& x, const GruStepCache<S>& c,
                           const Batch<S>& dh_next, GruCellParams<S>& grad, Batch<S>& dx) {
    const Batch<S> dz = dh_next.cwiseProduct(c.h_cand - c.h_prev);
    const Batch<S> d_cand = dh_next.cwiseProduct(c.z);
    Batch<S> dh_prev = dh_next - dh_next.cwiseProduct(c.z);

    const Batch<S> da_cand = d_cand.array() * (S(1) - c.h_cand.array().square());
    const Batch<S> dr = da_cand.cwiseProduct(c.u);
    const Batch<S> du = da_cand.cwiseProduct(c.r);
    const Batch<S> da_r = dr.array() * c.r.array() * (S(1) - c.r.array());
    const Batch<S> da_z = dz.array() * c.z.array() * (S(1) - c.z.array());

    grad.W.noalias() += da_cand * x.transpose();
    grad.U.noalias() += du * c.h_prev.transpose();
    grad.b += da_cand.rowwise().sum();
    grad.W_r.noalias() += da_r * x.transpose();
    grad.U_r.noalias() += da_r * c.h_prev.transpose();
    grad.b_r += da_r.rowwise().sum();
    grad.W_z.noalias() += da_z * x.transpose();
    grad.U_z.noalias() += da_z * c.h_prev.transpose();
    grad.b_z += da_z.rowwise().sum();

    dx.noalias() += p.W.transpose() * da_cand;
    dx.noalias() += p.W_r.transpose() * da_r;
    dx.noalias() += p.W_z.transpose() * da_z;
    dh_prev.noalias() += p.U.transpose() * du;
    dh_prev.noalias() += p.U_r.transpose() * da_r;
    dh_prev.noalias() += p.U_z.transpose() * da_z;
    return dh_prev;
}

template <class S>
Batch<S> rnn_step(const RnnCellParams<S>& p, const Batch<S>& x, const Batch<S>& h_prev, RnnStepCache<S>* cache = nullptr) {
    Batch<S> h_next = ((p.W_x * x + p.W_h * h_prev).colwise() + p.b).array().tanh().matrix();
    if (cache) {
        cache->h_prev = h_prev;
        cache->h_next = h_next;
    }
    return h_next;
}

template <class S>
Batch<S> rnn_step_backward(const RnnCellParams<S>& p, const Batch<S>& x, const RnnStepCache<S>& c,
                           const Batch<S>& dh_next, RnnCellParams<S>& grad, Batch<S>& dx) {
    const Batch<S> da = dh_next.array() * (S(1) - c.h_next.array().square());
    grad.W_x.noalias() += da * x.transpose();
    grad.W_h.noalias() += da * c.h_prev.transpose();
    grad.b += da.rowwise().sum();
    dx.noalias() += p.W_x.transpose() * da;
    return p.W_h.transpose() * da;
}

/// Single-vector GRU step with input validation.
template <class S>
Vector<S> gru_cell_forward(const Vector<S>& x, const Vector<S>& h_prev, const GruCellParams<S>& p) {
    if (x.size() != p.input_dim() || h_prev.size() != p.hidden_dim()) {
        throw RangeError("GRU input/state dimension mismatch");
    }
    require_finite(x, "GRU input");
    require_finite(h_prev, "GRU state");
    return gru_step<S>(p, x, h_prev);
}

template <class S>
Vector<S> rnn_cell_forward(const Vector<S>& x, const Vector<S>& h_prev, const RnnCellParams<S>& p) {
    if (x.size() != p.input_dim() || h_prev.size() != p.hidden_dim()) {
        throw RangeError("RNN input/state dimension mismatch");
    }
    require_finite(x, "RNN input");
    require_finite(h_prev, "RNN state");
    return rnn_step<S>(p, x, h_prev);
}

}  // namespace codeseer::neural

#endif  // CODESEER_NEURAL_CELLS_HPP
