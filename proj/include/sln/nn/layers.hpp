#ifndef SLN_NN_LAYERS_HPP_
#define SLN_NN_LAYERS_HPP_

#include <vector>

#include "sln/nn/core.hpp"

namespace sln::nn {

/// Allocates offsets into one flat parameter vector. Keeping every layer's
/// parameters in a single vector makes Adam, checkpointing, and finite
/// difference checks uniform.
class ParamAllocator {
public:
    size_t allocate(size_t n) {
        size_t off = size_;
        size_ += n;
        return off;
    }
    size_t size() const { return size_; }

private:
    size_t size_ = 0;
};

// ---------------------------------------------------------------------------
// Dense layer: y = W x + b, W row-major (out x in).
// ---------------------------------------------------------------------------

struct Dense {
    int in = 0;
    int out = 0;
    size_t w = 0;
    size_t b = 0;

    Dense() = default;
    Dense(int in_, int out_, ParamAllocator& alloc) : in(in_), out(out_) {
        w = alloc.allocate(static_cast<size_t>(in) * out);
        b = alloc.allocate(out);
    }

    void init(std::vector<double>& params, Rng& rng) const {
        glorot_init(&params[w], static_cast<size_t>(in) * out, in, out, rng);
        std::fill(&params[b], &params[b] + out, 0.0);
    }

    void forward(const std::vector<double>& p, const double* x, double* y) const {
        for (int o = 0; o < out; ++o) {
            double acc = p[b + o];
            const double* row = &p[w + static_cast<size_t>(o) * in];
            for (int i = 0; i < in; ++i) acc += row[i] * x[i];
            y[o] = acc;
        }
    }

    /// Accumulates parameter gradients; writes input gradient unless dx null.
    void backward(const std::vector<double>& p, std::vector<double>& g, const double* x,
                  const double* dy, double* dx) const {
        for (int o = 0; o < out; ++o) {
            const double d = dy[o];
            double* wrow = &g[w + static_cast<size_t>(o) * in];
            for (int i = 0; i < in; ++i) wrow[i] += d * x[i];
            g[b + o] += d;
        }
        if (dx) {
            for (int i = 0; i < in; ++i) {
                double acc = 0.0;
                for (int o = 0; o < out; ++o) acc += p[w + static_cast<size_t>(o) * in + i] * dy[o];
                dx[i] = acc;
            }
        }
    }
};

// ---------------------------------------------------------------------------
// 1-D convolution, stride 1, no padding. Input (channels x len), output
// (maps x (len - width + 1)). Kernels laid out maps x channels x width.
// ---------------------------------------------------------------------------

struct Conv1d {
    int in_ch = 0;
    int maps = 0;
    int width = 0;
    size_t w = 0;
    size_t b = 0;

    Conv1d() = default;
    Conv1d(int in_ch_, int maps_, int width_, ParamAllocator& alloc)
        : in_ch(in_ch_), maps(maps_), width(width_) {
        w = alloc.allocate(static_cast<size_t>(maps) * in_ch * width);
        b = alloc.allocate(maps);
    }

    int out_len(int in_len) const {
        require(in_len - width + 1 >= 1, "conv1d: input length ", in_len,
                " shorter than kernel width ", width);
        return in_len - width + 1;
    }

    void init(std::vector<double>& params, Rng& rng) const {
        glorot_init(&params[w], static_cast<size_t>(maps) * in_ch * width, in_ch * width, maps,
                    rng);
        std::fill(&params[b], &params[b] + maps, 0.0);
    }

    void forward(const std::vector<double>& p, const double* x, int in_len, double* y) const {
        const int olen = out_len(in_len);
        for (int m = 0; m < maps; ++m) {
            for (int pos = 0; pos < olen; ++pos) {
                double acc = p[b + m];
                for (int c = 0; c < in_ch; ++c) {
                    const double* k = &p[w + (static_cast<size_t>(m) * in_ch + c) * width];
                    const double* xc = x + static_cast<size_t>(c) * in_len + pos;
                    for (int t = 0; t < width; ++t) acc += k[t] * xc[t];
                }
                y[static_cast<size_t>(m) * olen + pos] = acc;
            }
        }
    }

    void backward(const std::vector<double>& p, std::vector<double>& g, const double* x,
                  int in_len, const double* dy, double* dx) const {
        const int olen = out_len(in_len);
        if (dx) std::fill(dx, dx + static_cast<size_t>(in_ch) * in_len, 0.0);
        for (int m = 0; m < maps; ++m) {
            for (int pos = 0; pos < olen; ++pos) {
                const double d = dy[static_cast<size_t>(m) * olen + pos];
                g[b + m] += d;
                for (int c = 0; c < in_ch; ++c) {
                    double* gk = &g[w + (static_cast<size_t>(m) * in_ch + c) * width];
                    const double* xc = x + static_cast<size_t>(c) * in_len + pos;
                    for (int t = 0; t < width; ++t) gk[t] += d * xc[t];
                    if (dx) {
                        const double* k = &p[w + (static_cast<size_t>(m) * in_ch + c) * width];
                        double* dxc = dx + static_cast<size_t>(c) * in_len + pos;
                        for (int t = 0; t < width; ++t) dxc[t] += d * k[t];
                    }
                }
            }
        }
    }
};

// ---------------------------------------------------------------------------
// LSTM cell in the form used here: with d = [x; h_prev],
//   g = tanh(W_g d + b_g)        (interaction)
//   i = sigmoid(W_i d + b_i)     (relationship gain)
//   f = sigmoid(W_f d + b_f)     (relationship fading)
//   z = g .* i + z_prev .* f
//   o = sigmoid(W_o d + b_o)
//   h = sigmoid(z .* o)
// Note the output form h = sigmoid(z .* o); this is intentional and part of
// the model contract, not the textbook o .* tanh(z).
// ---------------------------------------------------------------------------

struct LstmStepCache {
    std::vector<double> d;           // [x; h_prev], size in + width
    std::vector<double> g, i, f, o;  // gate activations
    std::vector<double> z_prev, z, h;
};

struct LstmCell {
    int in = 0;
    int width = 0;
    size_t w_g = 0, w_i = 0, w_f = 0, w_o = 0;
    size_t b_g = 0, b_i = 0, b_f = 0, b_o = 0;

    LstmCell() = default;
    LstmCell(int in_, int width_, ParamAllocator& alloc) : in(in_), width(width_) {
        const size_t wn = static_cast<size_t>(width) * (in + width);
        w_g = alloc.allocate(wn);
        w_i = alloc.allocate(wn);
        w_f = alloc.allocate(wn);
        w_o = alloc.allocate(wn);
        b_g = alloc.allocate(width);
        b_i = alloc.allocate(width);
        b_f = alloc.allocate(width);
        b_o = alloc.allocate(width);
    }

    /// Forget-gate bias starts at +1, other biases at 0.
    void init(std::vector<double>& params, Rng& rng) const {
        const size_t wn = static_cast<size_t>(width) * (in + width);
        for (size_t off : {w_g, w_i, w_f, w_o})
            glorot_init(&params[off], wn, in + width, width, rng);
        std::fill(&params[b_g], &params[b_g] + width, 0.0);
        std::fill(&params[b_i], &params[b_i] + width, 0.0);
        std::fill(&params[b_f], &params[b_f] + width, 1.0);
        std::fill(&params[b_o], &params[b_o] + width, 0.0);
    }

    void affine(const std::vector<double>& p, size_t woff, size_t boff, const double* d,
                double* out) const {
        const int cols = in + width;
        for (int r = 0; r < width; ++r) {
            double acc = p[boff + r];
            const double* row = &p[woff + static_cast<size_t>(r) * cols];
            for (int c = 0; c < cols; ++c) acc += row[c] * d[c];
            out[r] = acc;
        }
    }

    /// One step. h_prev and z_prev must have `width` entries (zeros at t=1).
    void forward(const std::vector<double>& p, const double* x, const double* h_prev,
                 const double* z_prev, LstmStepCache& c) const {
        c.d.resize(in + width);
        std::copy(x, x + in, c.d.begin());
        std::copy(h_prev, h_prev + width, c.d.begin() + in);
        c.g.resize(width);
        c.i.resize(width);
        c.f.resize(width);
        c.o.resize(width);
        c.z.resize(width);
        c.h.resize(width);
        c.z_prev.assign(z_prev, z_prev + width);

        std::vector<double> a(width);
        affine(p, w_g, b_g, c.d.data(), a.data());
        tanh_forward(a.data(), c.g.data(), width);
        affine(p, w_i, b_i, c.d.data(), a.data());
        sigmoid_forward(a.data(), c.i.data(), width);
        affine(p, w_f, b_f, c.d.data(), a.data());
        sigmoid_forward(a.data(), c.f.data(), width);
        affine(p, w_o, b_o, c.d.data(), a.data());
        sigmoid_forward(a.data(), c.o.data(), width);
        for (int r = 0; r < width; ++r) {
            c.z[r] = c.g[r] * c.i[r] + c.z_prev[r] * c.f[r];
            c.h[r] = sigmoid(c.z[r] * c.o[r]);
        }
    }

    /// Backward through one step. dh: gradient on h(t); dz_carry: gradient on
    /// z(t) arriving from step t+1. Outputs gradient on x, h_prev, z_prev.
    void backward(const std::vector<double>& p, std::vector<double>& grads,
                  const LstmStepCache& c, const double* dh, const double* dz_carry, double* dx,
                  double* dh_prev, double* dz_prev) const {
        const int cols = in + width;
        std::vector<double> dz(width), da(width), dd(cols, 0.0);

        // h = sigmoid(s), s = z .* o
        std::vector<double> ds(width), dgate(width);
        for (int r = 0; r < width; ++r) {
            ds[r] = dh[r] * c.h[r] * (1.0 - c.h[r]);
            dz[r] = ds[r] * c.o[r] + (dz_carry ? dz_carry[r] : 0.0);
        }

        auto accumulate = [&](size_t woff, size_t boff, const double* da_vec) {
            for (int r = 0; r < width; ++r) {
                const double d = da_vec[r];
                double* row = &grads[woff + static_cast<size_t>(r) * cols];
                for (int col = 0; col < cols; ++col) row[col] += d * c.d[col];
                grads[boff + r] += d;
                const double* prow = &p[woff + static_cast<size_t>(r) * cols];
                for (int col = 0; col < cols; ++col) dd[col] += prow[col] * d;
            }
        };

        // o gate: do = ds .* z
        for (int r = 0; r < width; ++r) dgate[r] = ds[r] * c.z[r] * c.o[r] * (1.0 - c.o[r]);
        accumulate(w_o, b_o, dgate.data());
        // g: dg = dz .* i, through tanh
        for (int r = 0; r < width; ++r) dgate[r] = dz[r] * c.i[r] * (1.0 - c.g[r] * c.g[r]);
        accumulate(w_g, b_g, dgate.data());
        // i: di = dz .* g, through sigmoid
        for (int r = 0; r < width; ++r) dgate[r] = dz[r] * c.g[r] * c.i[r] * (1.0 - c.i[r]);
        accumulate(w_i, b_i, dgate.data());
        // f: df = dz .* z_prev, through sigmoid
        for (int r = 0; r < width; ++r)
            dgate[r] = dz[r] * c.z_prev[r] * c.f[r] * (1.0 - c.f[r]);
        accumulate(w_f, b_f, dgate.data());

        if (dx)
            for (int i2 = 0; i2 < in; ++i2) dx[i2] = dd[i2];
        if (dh_prev)
            for (int r = 0; r < width; ++r) dh_prev[r] = dd[in + r];
        if (dz_prev)
            for (int r = 0; r < width; ++r) dz_prev[r] = dz[r] * c.f[r];
    }
};

// ---------------------------------------------------------------------------
// Bayesian linear model: latent z ~ N(W e, sigma^2 I) (10 units by default),
// link probability P = sigmoid(phi' z + b). Mean mode uses z = W e.
// ---------------------------------------------------------------------------

struct BayesianLinear {
    int in = 0;
    int latent = 0;
    size_t w = 0;    // latent x in
    size_t phi = 0;  // latent
    size_t b = 0;    // scalar

    BayesianLinear() = default;
    BayesianLinear(int in_, int latent_, ParamAllocator& alloc) : in(in_), latent(latent_) {
        w = alloc.allocate(static_cast<size_t>(latent) * in);
        phi = alloc.allocate(latent);
        b = alloc.allocate(1);
    }

    void init(std::vector<double>& params, Rng& rng) const {
        glorot_init(&params[w], static_cast<size_t>(latent) * in, in, latent, rng);
        glorot_init(&params[phi], latent, latent, 1, rng);
        params[b] = 0.0;
    }

    void latent_mean(const std::vector<double>& p, const double* x, double* z) const {
        for (int r = 0; r < latent; ++r) {
            double acc = 0.0;
            const double* row = &p[w + static_cast<size_t>(r) * in];
            for (int i2 = 0; i2 < in; ++i2) acc += row[i2] * x[i2];
            z[r] = acc;
        }
    }

    double forward_mean(const std::vector<double>& p, const double* x, double* z_out) const {
        std::vector<double> z(latent);
        latent_mean(p, x, z.data());
        double a = p[b];
        for (int r = 0; r < latent; ++r) a += p[phi + r] * z[r];
        if (z_out) std::copy(z.begin(), z.end(), z_out);
        return sigmoid(a);
    }

    double forward_sample(const std::vector<double>& p, const double* x, double sigma2,
                          Rng& rng) const {
        require(sigma2 > 0.0, "bayes_forward: sigma2 must be positive, got ", sigma2);
        std::vector<double> z(latent);
        latent_mean(p, x, z.data());
        const double sd = std::sqrt(sigma2);
        double a = p[b];
        for (int r = 0; r < latent; ++r) a += p[phi + r] * (z[r] + sd * rng.normal());
        return sigmoid(a);
    }

    /// Mean-mode backward given dP (gradient on the output probability).
    void backward_mean(const std::vector<double>& p, std::vector<double>& g, const double* x,
                       double prob, double dprob, double* dx) const {
        const double da = dprob * prob * (1.0 - prob);
        std::vector<double> z(latent);
        latent_mean(p, x, z.data());
        g[b] += da;
        if (dx) std::fill(dx, dx + in, 0.0);
        for (int r = 0; r < latent; ++r) {
            g[phi + r] += da * z[r];
            const double dz = da * p[phi + r];
            double* wrow = &g[w + static_cast<size_t>(r) * in];
            const double* prow = &p[w + static_cast<size_t>(r) * in];
            for (int i2 = 0; i2 < in; ++i2) {
                wrow[i2] += dz * x[i2];
                if (dx) dx[i2] += dz * prow[i2];
            }
        }
    }
};

}  // namespace sln::nn

#endif  // SLN_NN_LAYERS_HPP_
