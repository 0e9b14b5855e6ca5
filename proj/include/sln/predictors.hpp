#ifndef SLN_PREDICTORS_HPP_
#define SLN_PREDICTORS_HPP_

#include <algorithm>
#include <cmath>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "sln/features.hpp"
#include "sln/nn/core.hpp"
#include "sln/nn/layers.hpp"
#include "sln/rng.hpp"

namespace sln {

enum class ModelKind { re_unsup, linda, svm, bnet, fcnn, cnn, rnn, crnn, gnn };

inline const char* model_kind_name(ModelKind k) {
    switch (k) {
        case ModelKind::re_unsup: return "re";
        case ModelKind::linda: return "linda";
        case ModelKind::svm: return "svm";
        case ModelKind::bnet: return "bnet";
        case ModelKind::fcnn: return "fcnn";
        case ModelKind::cnn: return "cnn";
        case ModelKind::rnn: return "rnn";
        case ModelKind::crnn: return "crnn";
        case ModelKind::gnn: return "gnn";
    }
    return "?";
}

inline ModelKind model_kind_from(const std::string& s) {
    static const std::map<std::string, ModelKind> names = {
        {"re", ModelKind::re_unsup}, {"re_unsup", ModelKind::re_unsup},
        {"linda", ModelKind::linda}, {"svm", ModelKind::svm},
        {"bnet", ModelKind::bnet},   {"fcnn", ModelKind::fcnn},
        {"cnn", ModelKind::cnn},     {"rnn", ModelKind::rnn},
        {"crnn", ModelKind::crnn},   {"gnn", ModelKind::gnn}};
    auto it = names.find(s);
    require(it != names.end(), "unknown model kind '", s, "'");
    return it->second;
}

/// Architecture and training hyperparameters. Defaults follow the artifact's
/// standard configuration; everything is overridable.
struct ModelSpec {
    ModelKind kind = ModelKind::cnn;
    int epochs = 300;
    int batch = 64;
    double lr = 0.001;
    uint64_t seed = 1;

    int fc_hidden = 128;        // FCNN: two hidden layers of this width
    int conv1_maps = 64;
    int conv1_width = 3;
    int conv2_maps = 32;
    int conv2_width = 2;
    bool conv2_enabled = true;  // dropped when fewer than 5 features are in play
    int cnn_dense = 32;
    int rnn_cells = 64;
    int rnn_dense = 128;
    int crnn_cells = 32;
    int crnn_dense = 32;
    int bnn_latent = 10;

    double svm_c = 1.0;
    double linda_ridge = 1e-6;

    int gnn_dim = 32;
    int gnn_neg_samples = 2;

    double decision_threshold = 0.5;
    bool balanced_batches = true;       // stratified balanced mini-batches
    std::vector<int> columns;           // selected feature columns; empty = all
};

struct FeatureStats {
    std::vector<double> mean;
    std::vector<double> sd;  // zero-variance columns standardize with sd 1
};

struct TrainedModel {
    ModelSpec spec;
    std::vector<std::string> columns;   // names in input order
    FeatureStats stats;
    std::vector<double> params;
    std::vector<double> loss_log;       // one entry per epoch
    double sigma2 = 0.0;                // bnet: residual variance
    int gnn_nodes = 0;                  // gnn: node count of the training graph
};

namespace detail {

inline std::vector<int> selected_columns(const ModelSpec& spec) {
    if (spec.columns.empty()) {
        std::vector<int> all(kFeatureCount);
        for (int i = 0; i < kFeatureCount; ++i) all[i] = i;
        return all;
    }
    for (int c : spec.columns)
        require(c >= 0 && c < kFeatureCount, "feature column index ", c, " out of range");
    return spec.columns;
}

inline FeatureStats compute_stats(const std::vector<std::vector<double>>& rows, int dims) {
    FeatureStats st;
    st.mean.assign(dims, 0.0);
    st.sd.assign(dims, 1.0);
    if (rows.empty()) return st;
    for (const auto& r : rows)
        for (int c = 0; c < dims; ++c) st.mean[c] += r[c];
    for (int c = 0; c < dims; ++c) st.mean[c] /= static_cast<double>(rows.size());
    std::vector<double> var(dims, 0.0);
    for (const auto& r : rows)
        for (int c = 0; c < dims; ++c) {
            double d = r[c] - st.mean[c];
            var[c] += d * d;
        }
    for (int c = 0; c < dims; ++c) {
        double v = var[c] / static_cast<double>(rows.size());
        st.sd[c] = v > 0.0 ? std::sqrt(v) : 1.0;
    }
    return st;
}

inline void standardize_row(const FeatureStats& st, std::vector<double>& row) {
    for (size_t c = 0; c < row.size(); ++c) row[c] = (row[c] - st.mean[c]) / st.sd[c];
}

inline std::vector<double> select_row(const FeatureVector& x, const std::vector<int>& cols) {
    std::vector<double> row(cols.size());
    for (size_t c = 0; c < cols.size(); ++c) row[c] = x[cols[c]];
    return row;
}

// -----------------------------------------------------------------------
// Static architectures (bnet / fcnn / cnn): one row in, link probability out.
// -----------------------------------------------------------------------

struct StaticNet {
    ModelKind kind;
    int in = 0;
    nn::ParamAllocator alloc;
    nn::BayesianLinear bayes;
    nn::Dense fc1, fc2, head;
    nn::Conv1d conv1, conv2;
    bool conv2_on = false;
    int len1 = 0, len2 = 0, flat = 0;
    nn::Dense cnn_fc;

    StaticNet(const ModelSpec& spec, int in_dims) : kind(spec.kind), in(in_dims) {
        switch (kind) {
            case ModelKind::bnet:
                bayes = nn::BayesianLinear(in, spec.bnn_latent, alloc);
                break;
            case ModelKind::fcnn:
                fc1 = nn::Dense(in, spec.fc_hidden, alloc);
                fc2 = nn::Dense(spec.fc_hidden, spec.fc_hidden, alloc);
                head = nn::Dense(spec.fc_hidden, 2, alloc);
                break;
            case ModelKind::cnn: {
                conv1 = nn::Conv1d(1, spec.conv1_maps, spec.conv1_width, alloc);
                len1 = conv1.out_len(in);
                conv2_on = spec.conv2_enabled;
                if (conv2_on) {
                    conv2 = nn::Conv1d(spec.conv1_maps, spec.conv2_maps, spec.conv2_width, alloc);
                    len2 = conv2.out_len(len1);
                    flat = spec.conv2_maps * len2;
                } else {
                    flat = spec.conv1_maps * len1;
                }
                cnn_fc = nn::Dense(flat, spec.cnn_dense, alloc);
                head = nn::Dense(spec.cnn_dense, 2, alloc);
                break;
            }
            default:
                fail("StaticNet: unsupported kind ", model_kind_name(kind));
        }
    }

    void init(std::vector<double>& params, Rng& rng) const {
        params.assign(alloc.size(), 0.0);
        switch (kind) {
            case ModelKind::bnet:
                bayes.init(params, rng);
                break;
            case ModelKind::fcnn:
                fc1.init(params, rng);
                fc2.init(params, rng);
                head.init(params, rng);
                break;
            case ModelKind::cnn:
                conv1.init(params, rng);
                if (conv2_on) conv2.init(params, rng);
                cnn_fc.init(params, rng);
                head.init(params, rng);
                break;
            default: break;
        }
    }

    /// Probability of class 1.
    double forward(const std::vector<double>& p, const double* x) const {
        switch (kind) {
            case ModelKind::bnet:
                return bayes.forward_mean(p, x, nullptr);
            case ModelKind::fcnn: {
                std::vector<double> a1(fc1.out), r1(fc1.out), a2(fc2.out), r2(fc2.out),
                    logits(2), probs(2);
                fc1.forward(p, x, a1.data());
                nn::relu_forward(a1.data(), r1.data(), a1.size());
                fc2.forward(p, r1.data(), a2.data());
                nn::relu_forward(a2.data(), r2.data(), a2.size());
                head.forward(p, r2.data(), logits.data());
                nn::softmax(logits.data(), probs.data(), 2);
                return probs[1];
            }
            case ModelKind::cnn: {
                std::vector<double> c1(static_cast<size_t>(conv1.maps) * len1), r1(c1.size());
                conv1.forward(p, x, in, c1.data());
                nn::relu_forward(c1.data(), r1.data(), c1.size());
                std::vector<double> feat;
                if (conv2_on) {
                    std::vector<double> c2(static_cast<size_t>(conv2.maps) * len2), r2(c2.size());
                    conv2.forward(p, r1.data(), len1, c2.data());
                    nn::relu_forward(c2.data(), r2.data(), c2.size());
                    feat = r2;
                } else {
                    feat = r1;
                }
                std::vector<double> a(cnn_fc.out), r(cnn_fc.out), logits(2), probs(2);
                cnn_fc.forward(p, feat.data(), a.data());
                nn::relu_forward(a.data(), r.data(), a.size());
                head.forward(p, r.data(), logits.data());
                nn::softmax(logits.data(), probs.data(), 2);
                return probs[1];
            }
            default:
                fail("StaticNet: unsupported kind");
        }
    }

    /// Forward + backward for one sample; accumulates grads scaled by
    /// `weight` and returns the unweighted loss.
    double train_sample(const std::vector<double>& p, std::vector<double>& g, const double* x,
                        int label, double weight) const {
        switch (kind) {
            case ModelKind::bnet: {
                double prob = bayes.forward_mean(p, x, nullptr);
                double loss = -std::log(std::max(label == 1 ? prob : 1.0 - prob, nn::kLogClamp));
                // d(loss)/d(pre-sigmoid activation) = prob - label; route
                // through backward_mean's dP hook by dividing the sigmoid
                // derivative back out.
                double denom = std::max(prob * (1.0 - prob), nn::kLogClamp);
                double dprob = (prob - (label == 1 ? 1.0 : 0.0)) / denom * weight;
                bayes.backward_mean(p, g, x, prob, dprob, nullptr);
                return loss;
            }
            case ModelKind::fcnn: {
                std::vector<double> a1(fc1.out), r1(fc1.out), a2(fc2.out), r2(fc2.out), logits(2);
                double probs[2], dl[2];
                fc1.forward(p, x, a1.data());
                nn::relu_forward(a1.data(), r1.data(), a1.size());
                fc2.forward(p, r1.data(), a2.data());
                nn::relu_forward(a2.data(), r2.data(), a2.size());
                head.forward(p, r2.data(), logits.data());
                double loss = nn::softmax_xent(logits.data(), label, probs, dl);
                dl[0] *= weight;
                dl[1] *= weight;
                std::vector<double> dr2(fc2.out), da2(fc2.out), dr1(fc1.out), da1(fc1.out);
                head.backward(p, g, r2.data(), dl, dr2.data());
                nn::relu_backward(a2.data(), dr2.data(), da2.data(), a2.size());
                fc2.backward(p, g, r1.data(), da2.data(), dr1.data());
                nn::relu_backward(a1.data(), dr1.data(), da1.data(), a1.size());
                fc1.backward(p, g, x, da1.data(), nullptr);
                return loss;
            }
            case ModelKind::cnn: {
                std::vector<double> c1(static_cast<size_t>(conv1.maps) * len1), r1(c1.size());
                conv1.forward(p, x, in, c1.data());
                nn::relu_forward(c1.data(), r1.data(), c1.size());
                std::vector<double> c2, r2;
                const std::vector<double>* feat = &r1;
                if (conv2_on) {
                    c2.resize(static_cast<size_t>(conv2.maps) * len2);
                    r2.resize(c2.size());
                    conv2.forward(p, r1.data(), len1, c2.data());
                    nn::relu_forward(c2.data(), r2.data(), c2.size());
                    feat = &r2;
                }
                std::vector<double> a(cnn_fc.out), r(cnn_fc.out), logits(2);
                double probs[2], dl[2];
                cnn_fc.forward(p, feat->data(), a.data());
                nn::relu_forward(a.data(), r.data(), a.size());
                head.forward(p, r.data(), logits.data());
                double loss = nn::softmax_xent(logits.data(), label, probs, dl);
                dl[0] *= weight;
                dl[1] *= weight;
                std::vector<double> dr(cnn_fc.out), da(cnn_fc.out), dfeat(feat->size());
                head.backward(p, g, r.data(), dl, dr.data());
                nn::relu_backward(a.data(), dr.data(), da.data(), a.size());
                cnn_fc.backward(p, g, feat->data(), da.data(), dfeat.data());
                if (conv2_on) {
                    std::vector<double> dc2(c2.size()), dr1v(r1.size());
                    nn::relu_backward(c2.data(), dfeat.data(), dc2.data(), c2.size());
                    conv2.backward(p, g, r1.data(), len1, dc2.data(), dr1v.data());
                    std::vector<double> dc1(c1.size());
                    nn::relu_backward(c1.data(), dr1v.data(), dc1.data(), c1.size());
                    conv1.backward(p, g, x, in, dc1.data(), nullptr);
                } else {
                    std::vector<double> dc1(c1.size());
                    nn::relu_backward(c1.data(), dfeat.data(), dc1.data(), c1.size());
                    conv1.backward(p, g, x, in, dc1.data(), nullptr);
                }
                return loss;
            }
            default:
                fail("StaticNet: unsupported kind");
        }
    }
};

// -----------------------------------------------------------------------
// Recurrent architectures (rnn / crnn): a sequence of rows in, one link
// probability per interval out. The CRNN runs each interval's row through
// the convolutional front end before the LSTM.
// -----------------------------------------------------------------------

struct RecurrentNet {
    ModelKind kind;
    int in = 0;
    nn::ParamAllocator alloc;
    bool conv_front = false;
    nn::Conv1d conv1, conv2;
    bool conv2_on = false;
    int len1 = 0, len2 = 0, step_dim = 0;
    nn::LstmCell cell;
    nn::Dense fc, head;

    RecurrentNet(const ModelSpec& spec, int in_dims) : kind(spec.kind), in(in_dims) {
        if (kind == ModelKind::crnn) {
            conv_front = true;
            conv1 = nn::Conv1d(1, spec.conv1_maps, spec.conv1_width, alloc);
            len1 = conv1.out_len(in);
            conv2_on = spec.conv2_enabled;
            if (conv2_on) {
                conv2 = nn::Conv1d(spec.conv1_maps, spec.conv2_maps, spec.conv2_width, alloc);
                len2 = conv2.out_len(len1);
                step_dim = spec.conv2_maps * len2;
            } else {
                step_dim = spec.conv1_maps * len1;
            }
            cell = nn::LstmCell(step_dim, spec.crnn_cells, alloc);
            fc = nn::Dense(spec.crnn_cells, spec.crnn_dense, alloc);
            head = nn::Dense(spec.crnn_dense, 2, alloc);
        } else {
            require(kind == ModelKind::rnn, "RecurrentNet: unsupported kind ",
                    model_kind_name(kind));
            step_dim = in;
            cell = nn::LstmCell(step_dim, spec.rnn_cells, alloc);
            fc = nn::Dense(spec.rnn_cells, spec.rnn_dense, alloc);
            head = nn::Dense(spec.rnn_dense, 2, alloc);
        }
    }

    void init(std::vector<double>& params, Rng& rng) const {
        params.assign(alloc.size(), 0.0);
        if (conv_front) {
            conv1.init(params, rng);
            if (conv2_on) conv2.init(params, rng);
        }
        cell.init(params, rng);
        fc.init(params, rng);
        head.init(params, rng);
    }

    struct StepTrace {
        std::vector<double> conv_c1, conv_r1, conv_c2, conv_r2;  // crnn front end
        std::vector<double> step_in;                             // lstm input
        nn::LstmStepCache lstm;
        std::vector<double> fc_a, fc_r, logits;
        double probs[2] = {0.0, 0.0};
    };

    /// Runs the whole sequence; fills per-step probabilities and (optionally)
    /// traces for backward.
    void forward_sequence(const std::vector<double>& p,
                          const std::vector<std::vector<double>>& xs, std::vector<double>* out,
                          std::vector<StepTrace>* traces) const {
        const int width = cell.width;
        std::vector<double> h(width, 0.0), z(width, 0.0);
        if (out) out->clear();
        if (traces) traces->assign(xs.size(), StepTrace{});
        nn::LstmStepCache scratch;
        for (size_t t = 0; t < xs.size(); ++t) {
            StepTrace local;
            StepTrace& tr = traces ? (*traces)[t] : local;
            const std::vector<double>* step_x = &xs[t];
            if (conv_front) {
                tr.conv_c1.resize(static_cast<size_t>(conv1.maps) * len1);
                tr.conv_r1.resize(tr.conv_c1.size());
                conv1.forward(p, xs[t].data(), in, tr.conv_c1.data());
                nn::relu_forward(tr.conv_c1.data(), tr.conv_r1.data(), tr.conv_c1.size());
                if (conv2_on) {
                    tr.conv_c2.resize(static_cast<size_t>(conv2.maps) * len2);
                    tr.conv_r2.resize(tr.conv_c2.size());
                    conv2.forward(p, tr.conv_r1.data(), len1, tr.conv_c2.data());
                    nn::relu_forward(tr.conv_c2.data(), tr.conv_r2.data(), tr.conv_c2.size());
                    tr.step_in = tr.conv_r2;
                } else {
                    tr.step_in = tr.conv_r1;
                }
                step_x = &tr.step_in;
            }
            cell.forward(p, step_x->data(), h.data(), z.data(), tr.lstm);
            h = tr.lstm.h;
            z = tr.lstm.z;
            tr.fc_a.resize(fc.out);
            tr.fc_r.resize(fc.out);
            tr.logits.resize(2);
            fc.forward(p, h.data(), tr.fc_a.data());
            nn::relu_forward(tr.fc_a.data(), tr.fc_r.data(), tr.fc_a.size());
            head.forward(p, tr.fc_r.data(), tr.logits.data());
            nn::softmax(tr.logits.data(), tr.probs, 2);
            if (out) out->push_back(tr.probs[1]);
        }
    }

    /// Cross-entropy training pass over one sequence (all intervals are
    /// targets); accumulates grads scaled by `weight` per step. Returns the
    /// summed unweighted per-step loss.
    double train_sequence(const std::vector<double>& p, std::vector<double>& g,
                          const std::vector<std::vector<double>>& xs,
                          const std::vector<uint8_t>& labels, double weight) const {
        const int width = cell.width;
        const size_t steps = xs.size();
        std::vector<StepTrace> traces;
        forward_sequence(p, xs, nullptr, &traces);

        double total = 0.0;
        std::vector<std::vector<double>> dh_head(steps, std::vector<double>(width, 0.0));
        for (size_t t = 0; t < steps; ++t) {
            StepTrace& tr = traces[t];
            double dl[2];
            int label = labels[t];
            total += -std::log(std::max(tr.probs[label], nn::kLogClamp));
            dl[0] = (tr.probs[0] - (label == 0 ? 1.0 : 0.0)) * weight;
            dl[1] = (tr.probs[1] - (label == 1 ? 1.0 : 0.0)) * weight;
            std::vector<double> dr(fc.out), da(fc.out);
            head.backward(p, g, tr.fc_r.data(), dl, dr.data());
            nn::relu_backward(tr.fc_a.data(), dr.data(), da.data(), fc.out);
            fc.backward(p, g, tr.lstm.h.data(), da.data(), dh_head[t].data());
        }

        // BPTT
        std::vector<double> dh(width, 0.0), dz(width, 0.0);
        for (int t = static_cast<int>(steps) - 1; t >= 0; --t) {
            StepTrace& tr = traces[t];
            for (int r = 0; r < width; ++r) dh[r] += dh_head[t][r];
            std::vector<double> dx(step_dim), dh_prev(width), dz_prev(width);
            cell.backward(p, g, tr.lstm, dh.data(), dz.data(), dx.data(), dh_prev.data(),
                          dz_prev.data());
            if (conv_front) {
                if (conv2_on) {
                    std::vector<double> dc2(tr.conv_c2.size()), dr1(tr.conv_r1.size());
                    nn::relu_backward(tr.conv_c2.data(), dx.data(), dc2.data(), dc2.size());
                    conv2.backward(p, g, tr.conv_r1.data(), len1, dc2.data(), dr1.data());
                    std::vector<double> dc1(tr.conv_c1.size());
                    nn::relu_backward(tr.conv_c1.data(), dr1.data(), dc1.data(), dc1.size());
                    conv1.backward(p, g, xs[t].data(), in, dc1.data(), nullptr);
                } else {
                    std::vector<double> dc1(tr.conv_c1.size());
                    nn::relu_backward(tr.conv_c1.data(), dx.data(), dc1.data(), dc1.size());
                    conv1.backward(p, g, xs[t].data(), in, dc1.data(), nullptr);
                }
            }
            dh = dh_prev;
            dz = dz_prev;
        }
        return total;
    }
};

}  // namespace detail

// ---------------------------------------------------------------------------
// Unsupervised Re predictor: min-max normalization of the raw Re column over
// the scored population, used directly as the link score.
// ---------------------------------------------------------------------------

struct ReScores {
    std::vector<std::vector<double>> scores;  // [series][interval]
    bool constant_column = false;             // all-equal Re: scores are 0, caller should warn
};

inline ReScores predict_re(const FeatureSet& fs, const std::vector<size_t>& series_idx) {
    static const int re_col = 2;
    ReScores out;
    double lo = 0.0, hi = 0.0;
    bool first = true;
    for (size_t s : series_idx) {
        for (const auto& x : fs.series[s].x) {
            double v = x[re_col];
            if (first) {
                lo = hi = v;
                first = false;
            } else {
                lo = std::min(lo, v);
                hi = std::max(hi, v);
            }
        }
    }
    require(!first, "predict_re: empty population");
    out.constant_column = hi <= lo;
    out.scores.reserve(series_idx.size());
    for (size_t s : series_idx) {
        std::vector<double> row;
        row.reserve(fs.series[s].x.size());
        for (const auto& x : fs.series[s].x)
            row.push_back(out.constant_column ? 0.0 : (x[re_col] - lo) / (hi - lo));
        out.scores.push_back(std::move(row));
    }
    return out;
}

// ---------------------------------------------------------------------------
// Linear discriminant analysis: class means + pooled ridge-regularized
// covariance, threshold at the projected midpoint, logistic link for scores.
// ---------------------------------------------------------------------------

namespace detail {

/// Solves A x = b for small symmetric positive definite A via Cholesky.
inline std::vector<double> cholesky_solve(std::vector<std::vector<double>> a,
                                          std::vector<double> b) {
    const int n = static_cast<int>(b.size());
    for (int j = 0; j < n; ++j) {
        for (int k = 0; k < j; ++k) a[j][j] -= a[j][k] * a[j][k];
        require(a[j][j] > 0.0, "cholesky: matrix not positive definite");
        a[j][j] = std::sqrt(a[j][j]);
        for (int i = j + 1; i < n; ++i) {
            for (int k = 0; k < j; ++k) a[i][j] -= a[i][k] * a[j][k];
            a[i][j] /= a[j][j];
        }
    }
    for (int i = 0; i < n; ++i) {
        for (int k = 0; k < i; ++k) b[i] -= a[i][k] * b[k];
        b[i] /= a[i][i];
    }
    for (int i = n - 1; i >= 0; --i) {
        for (int k = i + 1; k < n; ++k) b[i] -= a[k][i] * b[k];
        b[i] /= a[i][i];
    }
    return b;
}

struct RowDataset {
    std::vector<std::vector<double>> x;  // standardized
    std::vector<uint8_t> y;
    FeatureStats stats;
    std::vector<int> cols;
};

inline RowDataset build_rows(const FeatureSet& fs, const std::vector<size_t>& series_idx,
                             const ModelSpec& spec) {
    RowDataset ds;
    ds.cols = selected_columns(spec);
    for (size_t s : series_idx) {
        const auto& series = fs.series[s];
        for (size_t i = 0; i < series.x.size(); ++i) {
            ds.x.push_back(select_row(series.x[i], ds.cols));
            ds.y.push_back(series.label[i]);
        }
    }
    require(!ds.x.empty(), "empty training set");
    ds.stats = compute_stats(ds.x, static_cast<int>(ds.cols.size()));
    for (auto& row : ds.x) standardize_row(ds.stats, row);
    return ds;
}

}  // namespace detail

inline TrainedModel fit_linda(const FeatureSet& fs, const std::vector<size_t>& series_idx,
                              const ModelSpec& spec) {
    auto ds = detail::build_rows(fs, series_idx, spec);
    const int dims = static_cast<int>(ds.cols.size());
    size_t n1 = 0, n0 = 0;
    std::vector<double> mu1(dims, 0.0), mu0(dims, 0.0);
    for (size_t i = 0; i < ds.x.size(); ++i) {
        if (ds.y[i]) {
            ++n1;
            for (int c = 0; c < dims; ++c) mu1[c] += ds.x[i][c];
        } else {
            ++n0;
            for (int c = 0; c < dims; ++c) mu0[c] += ds.x[i][c];
        }
    }
    require(n1 > 0 && n0 > 0, "LinDA requires both classes in the training set");
    for (int c = 0; c < dims; ++c) {
        mu1[c] /= static_cast<double>(n1);
        mu0[c] /= static_cast<double>(n0);
    }
    std::vector<std::vector<double>> cov(dims, std::vector<double>(dims, 0.0));
    for (size_t i = 0; i < ds.x.size(); ++i) {
        const auto& mu = ds.y[i] ? mu1 : mu0;
        for (int a = 0; a < dims; ++a)
            for (int b = 0; b <= a; ++b)
                cov[a][b] += (ds.x[i][a] - mu[a]) * (ds.x[i][b] - mu[b]);
    }
    const double denom = std::max<double>(1.0, static_cast<double>(n1 + n0 - 2));
    for (int a = 0; a < dims; ++a)
        for (int b = 0; b <= a; ++b) {
            cov[a][b] /= denom;
            cov[b][a] = cov[a][b];
        }
    for (int a = 0; a < dims; ++a) cov[a][a] += spec.linda_ridge;

    std::vector<double> diff(dims);
    for (int c = 0; c < dims; ++c) diff[c] = mu1[c] - mu0[c];
    auto w = detail::cholesky_solve(cov, diff);
    double c0 = 0.0;
    for (int c = 0; c < dims; ++c) c0 += w[c] * (mu1[c] + mu0[c]) / 2.0;

    TrainedModel model;
    model.spec = spec;
    for (int c : ds.cols) model.columns.push_back(feature_columns()[c]);
    model.stats = ds.stats;
    model.params = w;
    model.params.push_back(c0);
    return model;
}

// ---------------------------------------------------------------------------
// Linear SVM: hinge loss + L2 via full-batch sub-gradient descent with a
// decaying step. lambda = 1 / (C * N).
// ---------------------------------------------------------------------------

inline TrainedModel fit_svm(const FeatureSet& fs, const std::vector<size_t>& series_idx,
                            const ModelSpec& spec) {
    auto ds = detail::build_rows(fs, series_idx, spec);
    const int dims = static_cast<int>(ds.cols.size());
    const size_t n = ds.x.size();
    {
        size_t pos = 0;
        for (uint8_t y : ds.y) pos += y;
        require(pos > 0 && pos < n, "SVM requires both classes in the training set");
    }
    const double lambda = 1.0 / (spec.svm_c * static_cast<double>(n));
    std::vector<double> w(dims, 0.0);
    double b = 0.0;
    TrainedModel model;
    model.spec = spec;
    for (int c : ds.cols) model.columns.push_back(feature_columns()[c]);
    model.stats = ds.stats;

    const int iterations = spec.epochs;
    for (int t = 0; t < iterations; ++t) {
        std::vector<double> gw(dims, 0.0);
        double gb = 0.0, hinge = 0.0, norm2 = 0.0;
        for (size_t i = 0; i < n; ++i) {
            const double y = ds.y[i] ? 1.0 : -1.0;
            double margin = b;
            for (int c = 0; c < dims; ++c) margin += w[c] * ds.x[i][c];
            margin *= y;
            if (margin < 1.0) {
                hinge += 1.0 - margin;
                for (int c = 0; c < dims; ++c) gw[c] -= y * ds.x[i][c];
                gb -= y;
            }
        }
        for (int c = 0; c < dims; ++c) {
            gw[c] = gw[c] / static_cast<double>(n) + lambda * w[c];
            norm2 += w[c] * w[c];
        }
        gb /= static_cast<double>(n);
        model.loss_log.push_back(0.5 * lambda * norm2 + hinge / static_cast<double>(n));
        const double eta = 0.5 / std::sqrt(static_cast<double>(t) + 1.0);
        for (int c = 0; c < dims; ++c) w[c] -= eta * gw[c];
        b -= eta * gb;
    }
    model.params = w;
    model.params.push_back(b);
    return model;
}

/// Raw decision value of a linear model (LinDA: w'x - c; SVM: w'x + b).
inline double linear_decision(const TrainedModel& model, const std::vector<double>& std_row) {
    const size_t dims = model.columns.size();
    double acc = 0.0;
    for (size_t c = 0; c < dims; ++c) acc += model.params[c] * std_row[c];
    if (model.spec.kind == ModelKind::linda) return acc - model.params[dims];
    return acc + model.params[dims];
}

// ---------------------------------------------------------------------------
// Gradient-trained networks (bnet / fcnn / cnn / rnn / crnn).
// ---------------------------------------------------------------------------

namespace detail {

/// Balanced batch scheduler: one epoch walks the minority class once in
/// shuffled chunks, pairing each chunk with an equal number of majority
/// samples drawn from a persistent shuffled cursor.
class BalancedSampler {
public:
    BalancedSampler(std::vector<size_t> minority, std::vector<size_t> majority, int half,
                    Rng& rng)
        : minority_(std::move(minority)), majority_(std::move(majority)), half_(half),
          rng_(rng) {
        rng_.shuffle(majority_);
    }

    /// Emits batches for one epoch.
    template <typename Fn>
    void epoch(Fn&& consume_batch) {
        rng_.shuffle(minority_);
        for (size_t at = 0; at < minority_.size(); at += half_) {
            size_t take = std::min<size_t>(half_, minority_.size() - at);
            std::vector<size_t> batch(minority_.begin() + at, minority_.begin() + at + take);
            for (size_t j = 0; j < take; ++j) {
                if (cursor_ >= majority_.size()) {
                    rng_.shuffle(majority_);
                    cursor_ = 0;
                }
                batch.push_back(majority_[cursor_++]);
            }
            consume_batch(batch);
        }
    }

private:
    std::vector<size_t> minority_, majority_;
    size_t half_;
    Rng& rng_;
    size_t cursor_ = 0;
};

inline void split_by_label(const std::vector<uint8_t>& labels, std::vector<size_t>& pos,
                           std::vector<size_t>& neg) {
    for (size_t i = 0; i < labels.size(); ++i) (labels[i] ? pos : neg).push_back(i);
}

}  // namespace detail

inline TrainedModel fit_nn(const FeatureSet& fs, const std::vector<size_t>& series_idx,
                           const ModelSpec& spec) {
    require(spec.kind == ModelKind::bnet || spec.kind == ModelKind::fcnn ||
                spec.kind == ModelKind::cnn || spec.kind == ModelKind::rnn ||
                spec.kind == ModelKind::crnn,
            "fit_nn: unsupported kind ", model_kind_name(spec.kind));
    require(!series_idx.empty(), "empty training set");
    const bool recurrent = spec.kind == ModelKind::rnn || spec.kind == ModelKind::crnn;

    TrainedModel model;
    model.spec = spec;
    Rng rng(spec.seed);
    nn::AdamConfig adam_cfg;
    adam_cfg.lr = spec.lr;

    if (!recurrent) {
        auto ds = detail::build_rows(fs, series_idx, spec);
        model.columns.clear();
        for (int c : ds.cols) model.columns.push_back(feature_columns()[c]);
        model.stats = ds.stats;
        std::vector<size_t> pos, neg;
        detail::split_by_label(ds.y, pos, neg);
        require(!pos.empty() && !neg.empty(),
                "fit_nn: training set must contain both classes");

        detail::StaticNet net(spec, static_cast<int>(ds.cols.size()));
        net.init(model.params, rng);
        std::vector<double> grads(model.params.size(), 0.0);
        nn::AdamState adam(model.params.size(), adam_cfg);

        auto run_batch = [&](const std::vector<size_t>& batch, double& loss_sum,
                             size_t& loss_count) {
            std::fill(grads.begin(), grads.end(), 0.0);
            const double weight = 1.0 / static_cast<double>(batch.size());
            for (size_t i : batch)
                loss_sum += net.train_sample(model.params, grads, ds.x[i].data(),
                                             ds.y[i] ? 1 : 0, weight);
            loss_count += batch.size();
            adam.step(model.params, grads);
        };

        if (spec.balanced_batches) {
            auto& minority = pos.size() <= neg.size() ? pos : neg;
            auto& majority = pos.size() <= neg.size() ? neg : pos;
            detail::BalancedSampler sampler(minority, majority, spec.batch / 2, rng);
            for (int e = 0; e < spec.epochs; ++e) {
                double loss_sum = 0.0;
                size_t count = 0;
                sampler.epoch([&](const std::vector<size_t>& b) { run_batch(b, loss_sum, count); });
                model.loss_log.push_back(loss_sum / static_cast<double>(count));
            }
        } else {
            std::vector<size_t> order(ds.x.size());
            for (size_t i = 0; i < order.size(); ++i) order[i] = i;
            for (int e = 0; e < spec.epochs; ++e) {
                rng.shuffle(order);
                double loss_sum = 0.0;
                size_t count = 0;
                for (size_t at = 0; at < order.size(); at += spec.batch) {
                    size_t take = std::min<size_t>(spec.batch, order.size() - at);
                    std::vector<size_t> batch(order.begin() + at, order.begin() + at + take);
                    run_batch(batch, loss_sum, count);
                }
                model.loss_log.push_back(loss_sum / static_cast<double>(count));
            }
        }

        if (spec.kind == ModelKind::bnet) {
            // sigma^2 as the residual variance of the fitted mean path
            detail::StaticNet scorer(spec, static_cast<int>(ds.cols.size()));
            double ss = 0.0;
            for (size_t i = 0; i < ds.x.size(); ++i) {
                double p = scorer.forward(model.params, ds.x[i].data());
                double r = (ds.y[i] ? 1.0 : 0.0) - p;
                ss += r * r;
            }
            model.sigma2 = std::max(ss / static_cast<double>(ds.x.size()), 1e-12);
        }
        return model;
    }

    // Recurrent: sequences per pair, per-interval targets.
    auto cols = detail::selected_columns(spec);
    model.columns.clear();
    for (int c : cols) model.columns.push_back(feature_columns()[c]);
    {
        std::vector<std::vector<double>> flat_rows;
        for (size_t s : series_idx)
            for (const auto& x : fs.series[s].x) flat_rows.push_back(detail::select_row(x, cols));
        require(!flat_rows.empty(), "empty training set");
        model.stats = detail::compute_stats(flat_rows, static_cast<int>(cols.size()));
    }

    std::vector<std::vector<std::vector<double>>> seq_x;
    std::vector<std::vector<uint8_t>> seq_y;
    std::vector<uint8_t> seq_class;
    for (size_t s : series_idx) {
        const auto& series = fs.series[s];
        std::vector<std::vector<double>> xs;
        for (const auto& x : series.x) {
            auto row = detail::select_row(x, cols);
            detail::standardize_row(model.stats, row);
            xs.push_back(std::move(row));
        }
        seq_x.push_back(std::move(xs));
        seq_y.push_back(series.label);
        seq_class.push_back(series.label.empty() ? 0 : series.label.back());
    }
    std::vector<size_t> pos, neg;
    detail::split_by_label(seq_class, pos, neg);
    require(!pos.empty() && !neg.empty(), "fit_nn: training set must contain both classes");

    detail::RecurrentNet net(spec, static_cast<int>(cols.size()));
    net.init(model.params, rng);
    std::vector<double> grads(model.params.size(), 0.0);
    nn::AdamState adam(model.params.size(), adam_cfg);

    auto run_batch = [&](const std::vector<size_t>& batch, double& loss_sum,
                         size_t& loss_count) {
        std::fill(grads.begin(), grads.end(), 0.0);
        size_t predictions = 0;
        for (size_t s : batch) predictions += seq_y[s].size();
        const double weight = 1.0 / static_cast<double>(predictions);
        for (size_t s : batch)
            loss_sum += net.train_sequence(model.params, grads, seq_x[s], seq_y[s], weight);
        loss_count += predictions;
        adam.step(model.params, grads);
    };

    if (spec.balanced_batches) {
        auto& minority = pos.size() <= neg.size() ? pos : neg;
        auto& majority = pos.size() <= neg.size() ? neg : pos;
        detail::BalancedSampler sampler(minority, majority, spec.batch / 2, rng);
        for (int e = 0; e < spec.epochs; ++e) {
            double loss_sum = 0.0;
            size_t count = 0;
            sampler.epoch([&](const std::vector<size_t>& b) { run_batch(b, loss_sum, count); });
            model.loss_log.push_back(loss_sum / static_cast<double>(count));
        }
    } else {
        std::vector<size_t> order(seq_x.size());
        for (size_t i = 0; i < order.size(); ++i) order[i] = i;
        for (int e = 0; e < spec.epochs; ++e) {
            rng.shuffle(order);
            double loss_sum = 0.0;
            size_t count = 0;
            for (size_t at = 0; at < order.size(); at += spec.batch) {
                size_t take = std::min<size_t>(spec.batch, order.size() - at);
                std::vector<size_t> batch(order.begin() + at, order.begin() + at + take);
                run_batch(batch, loss_sum, count);
            }
            model.loss_log.push_back(loss_sum / static_cast<double>(count));
        }
    }
    return model;
}

/// Per-interval link probabilities for one pair series. Recurrent models
/// reset state and replay the prefix; static models score each row.
inline std::vector<double> predict_series(const TrainedModel& model, const PairSeries& series) {
    const auto& spec = model.spec;
    require(spec.kind != ModelKind::re_unsup && spec.kind != ModelKind::gnn,
            "predict_series: use the dedicated path for ", model_kind_name(spec.kind));
    auto cols = detail::selected_columns(spec);
    require(cols.size() == model.columns.size(), "feature count mismatch vs checkpoint");
    for (size_t c = 0; c < cols.size(); ++c)
        require(feature_columns()[cols[c]] == model.columns[c],
                "feature-order mismatch vs checkpoint: expected '", model.columns[c], "', got '",
                feature_columns()[cols[c]], "'");

    std::vector<std::vector<double>> xs;
    for (const auto& x : series.x) {
        auto row = detail::select_row(x, cols);
        detail::standardize_row(model.stats, row);
        xs.push_back(std::move(row));
    }

    std::vector<double> out;
    switch (spec.kind) {
        case ModelKind::linda:
        case ModelKind::svm:
            for (const auto& row : xs) out.push_back(nn::sigmoid(linear_decision(model, row)));
            break;
        case ModelKind::bnet:
        case ModelKind::fcnn:
        case ModelKind::cnn: {
            detail::StaticNet net(spec, static_cast<int>(cols.size()));
            require(net.alloc.size() == model.params.size(),
                    "checkpoint parameter count mismatch");
            for (const auto& row : xs) out.push_back(net.forward(model.params, row.data()));
            break;
        }
        case ModelKind::rnn:
        case ModelKind::crnn: {
            detail::RecurrentNet net(spec, static_cast<int>(cols.size()));
            require(net.alloc.size() == model.params.size(),
                    "checkpoint parameter count mismatch");
            net.forward_sequence(model.params, xs, &out, nullptr);
            break;
        }
        default:
            fail("predict_series: unsupported kind");
    }
    return out;
}

// ---------------------------------------------------------------------------
// Checkpoint format: versioned JSON with the architecture tag, flat
// parameters, standardization statistics, seed, and feature column order.
// ---------------------------------------------------------------------------

inline nlohmann::json spec_to_json(const ModelSpec& s) {
    nlohmann::json j;
    j["kind"] = model_kind_name(s.kind);
    j["epochs"] = s.epochs;
    j["batch"] = s.batch;
    j["lr"] = s.lr;
    j["seed"] = s.seed;
    j["fc_hidden"] = s.fc_hidden;
    j["conv1_maps"] = s.conv1_maps;
    j["conv1_width"] = s.conv1_width;
    j["conv2_maps"] = s.conv2_maps;
    j["conv2_width"] = s.conv2_width;
    j["conv2_enabled"] = s.conv2_enabled;
    j["cnn_dense"] = s.cnn_dense;
    j["rnn_cells"] = s.rnn_cells;
    j["rnn_dense"] = s.rnn_dense;
    j["crnn_cells"] = s.crnn_cells;
    j["crnn_dense"] = s.crnn_dense;
    j["bnn_latent"] = s.bnn_latent;
    j["svm_c"] = s.svm_c;
    j["linda_ridge"] = s.linda_ridge;
    j["gnn_dim"] = s.gnn_dim;
    j["gnn_neg_samples"] = s.gnn_neg_samples;
    j["decision_threshold"] = s.decision_threshold;
    j["balanced_batches"] = s.balanced_batches;
    j["columns"] = s.columns;
    return j;
}

inline ModelSpec spec_from_json(const nlohmann::json& j) {
    ModelSpec s;
    s.kind = model_kind_from(j["kind"].get<std::string>());
    s.epochs = j["epochs"].get<int>();
    s.batch = j["batch"].get<int>();
    s.lr = j["lr"].get<double>();
    s.seed = j["seed"].get<uint64_t>();
    s.fc_hidden = j["fc_hidden"].get<int>();
    s.conv1_maps = j["conv1_maps"].get<int>();
    s.conv1_width = j["conv1_width"].get<int>();
    s.conv2_maps = j["conv2_maps"].get<int>();
    s.conv2_width = j["conv2_width"].get<int>();
    s.conv2_enabled = j["conv2_enabled"].get<bool>();
    s.cnn_dense = j["cnn_dense"].get<int>();
    s.rnn_cells = j["rnn_cells"].get<int>();
    s.rnn_dense = j["rnn_dense"].get<int>();
    s.crnn_cells = j["crnn_cells"].get<int>();
    s.crnn_dense = j["crnn_dense"].get<int>();
    s.bnn_latent = j["bnn_latent"].get<int>();
    s.svm_c = j["svm_c"].get<double>();
    s.linda_ridge = j["linda_ridge"].get<double>();
    s.gnn_dim = j["gnn_dim"].get<int>();
    s.gnn_neg_samples = j["gnn_neg_samples"].get<int>();
    s.decision_threshold = j["decision_threshold"].get<double>();
    s.balanced_batches = j["balanced_batches"].get<bool>();
    s.columns = j["columns"].get<std::vector<int>>();
    return s;
}

inline std::string write_checkpoint(const TrainedModel& m) {
    nlohmann::json j;
    j["sln_model"] = 1;
    j["spec"] = spec_to_json(m.spec);
    j["columns"] = m.columns;
    j["stats_mean"] = m.stats.mean;
    j["stats_sd"] = m.stats.sd;
    j["params"] = m.params;
    j["loss_log"] = m.loss_log;
    j["sigma2"] = m.sigma2;
    j["gnn_nodes"] = m.gnn_nodes;
    return j.dump();
}

inline TrainedModel read_checkpoint(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        fail("checkpoint is not valid JSON: ", e.what());
    }
    require(j.contains("sln_model") && j["sln_model"].get<int>() == 1,
            "not a model checkpoint (bad or missing version tag)");
    TrainedModel m;
    m.spec = spec_from_json(j["spec"]);
    m.columns = j["columns"].get<std::vector<std::string>>();
    m.stats.mean = j["stats_mean"].get<std::vector<double>>();
    m.stats.sd = j["stats_sd"].get<std::vector<double>>();
    m.params = j["params"].get<std::vector<double>>();
    m.loss_log = j["loss_log"].get<std::vector<double>>();
    m.sigma2 = j["sigma2"].get<double>();
    m.gnn_nodes = j["gnn_nodes"].get<int>();
    return m;
}

}  // namespace sln

#endif  // SLN_PREDICTORS_HPP_
