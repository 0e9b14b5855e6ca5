#ifndef SLN_NN_CORE_HPP_
#define SLN_NN_CORE_HPP_

#include <array>
#include <cmath>
#include <cstddef>
#include <functional>
#include <numeric>
#include <vector>

#include "sln/common.hpp"
#include "sln/rng.hpp"

namespace sln::nn {

/// Row-major dense tensor of 64-bit reals.
struct Tensor {
    std::vector<int> shape;
    std::vector<double> values;

    Tensor() = default;
    explicit Tensor(std::vector<int> s) : shape(std::move(s)) {
        size_t n = 1;
        for (int d : shape) n *= static_cast<size_t>(d);
        values.assign(n, 0.0);
    }
    size_t size() const { return values.size(); }
    double& operator[](size_t i) { return values[i]; }
    double operator[](size_t i) const { return values[i]; }
};

inline void check_finite(const std::vector<double>& v, const char* what) {
    for (double x : v)
        require(std::isfinite(x), what, " contains a non-finite value");
}

// ---------------------------------------------------------------------------
// Activations, each with its gradient counterpart.
// ---------------------------------------------------------------------------

inline double sigmoid(double a) { return 1.0 / (1.0 + std::exp(-a)); }

inline void relu_forward(const double* x, double* y, size_t n) {
    for (size_t i = 0; i < n; ++i) y[i] = x[i] > 0.0 ? x[i] : 0.0;
}

/// dx = dy * 1{x > 0}, using the cached pre-activation x.
inline void relu_backward(const double* x, const double* dy, double* dx, size_t n) {
    for (size_t i = 0; i < n; ++i) dx[i] = x[i] > 0.0 ? dy[i] : 0.0;
}

inline void sigmoid_forward(const double* x, double* y, size_t n) {
    for (size_t i = 0; i < n; ++i) y[i] = sigmoid(x[i]);
}

/// dx = dy * y (1 - y), using the cached output y.
inline void sigmoid_backward(const double* y, const double* dy, double* dx, size_t n) {
    for (size_t i = 0; i < n; ++i) dx[i] = dy[i] * y[i] * (1.0 - y[i]);
}

inline void tanh_forward(const double* x, double* y, size_t n) {
    for (size_t i = 0; i < n; ++i) y[i] = std::tanh(x[i]);
}

inline void tanh_backward(const double* y, const double* dy, double* dx, size_t n) {
    for (size_t i = 0; i < n; ++i) dx[i] = dy[i] * (1.0 - y[i] * y[i]);
}

inline void softmax(const double* x, double* y, size_t n) {
    double mx = x[0];
    for (size_t i = 1; i < n; ++i) mx = std::max(mx, x[i]);
    double sum = 0.0;
    for (size_t i = 0; i < n; ++i) {
        y[i] = std::exp(x[i] - mx);
        sum += y[i];
    }
    for (size_t i = 0; i < n; ++i) y[i] /= sum;
}

/// Full softmax Jacobian product: dx_j = y_j (dy_j - sum_i dy_i y_i).
inline void softmax_backward(const double* y, const double* dy, double* dx, size_t n) {
    double dot = 0.0;
    for (size_t i = 0; i < n; ++i) dot += dy[i] * y[i];
    for (size_t i = 0; i < n; ++i) dx[i] = y[i] * (dy[i] - dot);
}

// ---------------------------------------------------------------------------
// Categorical cross entropy over two classes (Eq.-style mean over samples).
// Rows must be probability distributions; log arguments clamp at 1e-12.
// ---------------------------------------------------------------------------

constexpr double kLogClamp = 1e-12;

inline double cross_entropy(const std::vector<std::array<double, 2>>& predictions,
                            const std::vector<std::array<double, 2>>& onehot) {
    require(predictions.size() == onehot.size(), "cross_entropy: ", predictions.size(),
            " predictions vs ", onehot.size(), " labels");
    require(!predictions.empty(), "cross_entropy: empty batch");
    double loss = 0.0;
    for (size_t i = 0; i < predictions.size(); ++i) {
        const auto& p = predictions[i];
        require(p[0] >= -1e-9 && p[1] >= -1e-9 && std::abs(p[0] + p[1] - 1.0) <= 1e-6,
                "cross_entropy: prediction row ", i, " is not a probability distribution");
        for (int j = 0; j < 2; ++j)
            loss -= onehot[i][j] * std::log(std::max(p[j], kLogClamp));
    }
    return loss / static_cast<double>(predictions.size());
}

/// Fused softmax + cross entropy for one sample: returns the loss and fills
/// dlogits with (p - onehot); the caller divides by the batch size.
inline double softmax_xent(const double* logits, int label, double* probs, double* dlogits) {
    softmax(logits, probs, 2);
    dlogits[0] = probs[0] - (label == 0 ? 1.0 : 0.0);
    dlogits[1] = probs[1] - (label == 1 ? 1.0 : 0.0);
    return -std::log(std::max(probs[label], kLogClamp));
}

// ---------------------------------------------------------------------------
// Adam with bias correction. Defaults lr 0.001, beta1 0.9, beta2 0.999,
// epsilon 1e-8.
// ---------------------------------------------------------------------------

struct AdamConfig {
    double lr = 0.001;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
};

class AdamState {
public:
    AdamState() = default;
    AdamState(size_t n, AdamConfig cfg) : cfg_(cfg), m_(n, 0.0), v_(n, 0.0) {}

    void step(std::vector<double>& params, const std::vector<double>& grads) {
        require(params.size() == m_.size() && grads.size() == m_.size(),
                "adam_step: parameter/gradient shape mismatch: params ", params.size(),
                ", grads ", grads.size(), ", state ", m_.size());
        ++t_;
        const double c1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(t_));
        const double c2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(t_));
        for (size_t i = 0; i < params.size(); ++i) {
            m_[i] = cfg_.beta1 * m_[i] + (1.0 - cfg_.beta1) * grads[i];
            v_[i] = cfg_.beta2 * v_[i] + (1.0 - cfg_.beta2) * grads[i] * grads[i];
            const double mhat = m_[i] / c1;
            const double vhat = v_[i] / c2;
            params[i] -= cfg_.lr * mhat / (std::sqrt(vhat) + cfg_.epsilon);
        }
    }

    long long step_count() const { return t_; }

private:
    AdamConfig cfg_;
    std::vector<double> m_, v_;
    long long t_ = 0;
};

// ---------------------------------------------------------------------------
// Parameter initialization: uniform +-sqrt(6 / (fan_in + fan_out)).
// ---------------------------------------------------------------------------

inline void glorot_init(double* w, size_t n, int fan_in, int fan_out, Rng& rng) {
    double bound = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
    for (size_t i = 0; i < n; ++i) w[i] = rng.uniform(-bound, bound);
}

}  // namespace sln::nn

#endif  // SLN_NN_CORE_HPP_
