#ifndef SLN_GNN_HPP_
#define SLN_GNN_HPP_

#include <cmath>
#include <vector>

#include "sln/nn/core.hpp"
#include "sln/predictors.hpp"
#include "sln/rng.hpp"
#include "sln/timeline.hpp"

namespace sln {

/// Two-layer GraphSAGE with mean aggregation. Node attributes are
/// self-generated: a learnable embedding per node. Each layer maps the
/// concatenation [h_v ; mean of neighbor h] through a weight matrix; layer 1
/// applies ReLU. The pair score is sigmoid(h2_u . h2_v), so score(u, v) =
/// score(v, u) exactly. Isolated nodes aggregate a zero vector and are
/// carried by their own embedding.
class GraphSage {
public:
    int nodes = 0;
    int dim = 0;
    size_t x_off = 0, w1_off = 0, w2_off = 0;
    size_t param_count = 0;

    GraphSage(int nodes_, int dim_) : nodes(nodes_), dim(dim_) {
        x_off = 0;
        w1_off = x_off + static_cast<size_t>(nodes) * dim;
        w2_off = w1_off + static_cast<size_t>(dim) * 2 * dim;
        param_count = w2_off + static_cast<size_t>(dim) * 2 * dim;
    }

    void init(std::vector<double>& params, Rng& rng) const {
        params.assign(param_count, 0.0);
        nn::glorot_init(&params[x_off], static_cast<size_t>(nodes) * dim, dim, dim, rng);
        nn::glorot_init(&params[w1_off], static_cast<size_t>(dim) * 2 * dim, 2 * dim, dim, rng);
        nn::glorot_init(&params[w2_off], static_cast<size_t>(dim) * 2 * dim, 2 * dim, dim, rng);
    }

    struct Forward {
        std::vector<double> a1;  // pre-ReLU layer-1 activations, nodes x dim
        std::vector<double> h1;  // nodes x dim
        std::vector<double> h2;  // nodes x dim
    };

    void forward(const std::vector<double>& p, const SlnSnapshot& snap, Forward& f) const {
        f.a1.assign(static_cast<size_t>(nodes) * dim, 0.0);
        f.h1.assign(static_cast<size_t>(nodes) * dim, 0.0);
        f.h2.assign(static_cast<size_t>(nodes) * dim, 0.0);
        std::vector<double> concat(2 * dim);
        for (int v = 0; v < nodes; ++v) {
            aggregate(&p[x_off], snap, v, concat);
            matvec(&p[w1_off], concat, &f.a1[static_cast<size_t>(v) * dim]);
        }
        nn::relu_forward(f.a1.data(), f.h1.data(), f.a1.size());
        for (int v = 0; v < nodes; ++v) {
            aggregate(f.h1.data(), snap, v, concat);
            matvec(&p[w2_off], concat, &f.h2[static_cast<size_t>(v) * dim]);
        }
    }

    double score(const Forward& f, Pair pair) const {
        const double* a = &f.h2[static_cast<size_t>(pair.u) * dim];
        const double* b = &f.h2[static_cast<size_t>(pair.v) * dim];
        double dot = 0.0;
        for (int i = 0; i < dim; ++i) dot += a[i] * b[i];
        return nn::sigmoid(dot);
    }

    /// Backward for a batch of (pair, target) at one snapshot. dh2 arrives
    /// from the pair scores; gradients flow through both layers into the
    /// embeddings. Returns the summed loss.
    double batch_backward(const std::vector<double>& p, std::vector<double>& g,
                          const SlnSnapshot& snap, const Forward& f,
                          const std::vector<std::pair<Pair, int>>& batch, double weight) const {
        std::vector<double> dh2(static_cast<size_t>(nodes) * dim, 0.0);
        double loss = 0.0;
        for (const auto& [pair, target] : batch) {
            const double* a = &f.h2[static_cast<size_t>(pair.u) * dim];
            const double* b = &f.h2[static_cast<size_t>(pair.v) * dim];
            double dot = 0.0;
            for (int i = 0; i < dim; ++i) dot += a[i] * b[i];
            double prob = nn::sigmoid(dot);
            loss += -std::log(std::max(target ? prob : 1.0 - prob, nn::kLogClamp));
            double ddot = (prob - target) * weight;
            for (int i = 0; i < dim; ++i) {
                dh2[static_cast<size_t>(pair.u) * dim + i] += ddot * b[i];
                dh2[static_cast<size_t>(pair.v) * dim + i] += ddot * a[i];
            }
        }

        // layer 2 backward
        std::vector<double> dh1(static_cast<size_t>(nodes) * dim, 0.0);
        std::vector<double> concat(2 * dim), dconcat(2 * dim);
        for (int v = 0; v < nodes; ++v) {
            const double* dv = &dh2[static_cast<size_t>(v) * dim];
            bool live = false;
            for (int i = 0; i < dim; ++i) live = live || dv[i] != 0.0;
            if (!live) continue;
            aggregate(f.h1.data(), snap, v, concat);
            matvec_backward(&p[w2_off], &g[w2_off], concat, dv, dconcat);
            scatter(dh1.data(), snap, v, dconcat);
        }
        // layer 1 backward through ReLU into embeddings
        std::vector<double> da(dim);
        for (int v = 0; v < nodes; ++v) {
            const double* dv = &dh1[static_cast<size_t>(v) * dim];
            bool live = false;
            for (int i = 0; i < dim; ++i) live = live || dv[i] != 0.0;
            if (!live) continue;
            nn::relu_backward(&f.a1[static_cast<size_t>(v) * dim], dv, da.data(), dim);
            aggregate(&p[x_off], snap, v, concat);
            matvec_backward(&p[w1_off], &g[w1_off], concat, da.data(), dconcat);
            scatter(&g[x_off], snap, v, dconcat);
        }
        return loss;
    }

private:
    /// concat = [h_v ; mean over neighbors of h], zero mean when isolated.
    void aggregate(const double* h, const SlnSnapshot& snap, int v,
                   std::vector<double>& concat) const {
        const double* hv = h + static_cast<size_t>(v) * dim;
        for (int i = 0; i < dim; ++i) {
            concat[i] = hv[i];
            concat[dim + i] = 0.0;
        }
        const auto& nb = snap.neighbors[v];
        if (!nb.empty()) {
            for (int m : nb) {
                const double* hm = h + static_cast<size_t>(m) * dim;
                for (int i = 0; i < dim; ++i) concat[dim + i] += hm[i];
            }
            for (int i = 0; i < dim; ++i) concat[dim + i] /= static_cast<double>(nb.size());
        }
    }

    /// Adjoint of aggregate: routes dconcat back to node v and its neighbors.
    void scatter(double* dh, const SlnSnapshot& snap, int v,
                 const std::vector<double>& dconcat) const {
        double* dv = dh + static_cast<size_t>(v) * dim;
        for (int i = 0; i < dim; ++i) dv[i] += dconcat[i];
        const auto& nb = snap.neighbors[v];
        if (!nb.empty()) {
            const double inv = 1.0 / static_cast<double>(nb.size());
            for (int m : nb) {
                double* dm = dh + static_cast<size_t>(m) * dim;
                for (int i = 0; i < dim; ++i) dm[i] += dconcat[dim + i] * inv;
            }
        }
    }

    void matvec(const double* w, const std::vector<double>& x, double* y) const {
        for (int r = 0; r < dim; ++r) {
            double acc = 0.0;
            const double* row = w + static_cast<size_t>(r) * 2 * dim;
            for (int c = 0; c < 2 * dim; ++c) acc += row[c] * x[c];
            y[r] = acc;
        }
    }

    void matvec_backward(const double* w, double* gw, const std::vector<double>& x,
                         const double* dy, std::vector<double>& dx) const {
        std::fill(dx.begin(), dx.end(), 0.0);
        for (int r = 0; r < dim; ++r) {
            const double d = dy[r];
            double* grow = gw + static_cast<size_t>(r) * 2 * dim;
            const double* row = w + static_cast<size_t>(r) * 2 * dim;
            for (int c = 0; c < 2 * dim; ++c) {
                grow[c] += d * x[c];
                dx[c] += row[c] * d;
            }
        }
    }
};

/// Trains GraphSAGE on the train pairs: each formed pair is a positive at
/// its formation interval with the strictly-prior snapshot G(i-1) as input;
/// negatives are train pairs unformed at that interval.
inline TrainedModel fit_gnn(const SlnTimeline& tl, const std::vector<Pair>& train_pairs,
                            const ModelSpec& spec) {
    require(!train_pairs.empty(), "empty training set");
    TrainedModel model;
    model.spec = spec;
    model.gnn_nodes = tl.node_count();

    GraphSage net(tl.node_count(), spec.gnn_dim);
    Rng rng(spec.seed);
    net.init(model.params, rng);
    std::vector<double> grads(model.params.size(), 0.0);
    nn::AdamConfig cfg;
    cfg.lr = spec.lr;
    nn::AdamState adam(model.params.size(), cfg);

    // Positives grouped by formation interval.
    std::vector<std::vector<Pair>> by_interval(tl.intervals + 1);
    std::vector<Pair> unformed_pool;
    for (const Pair& p : train_pairs) {
        auto it = tl.formation.find(p);
        if (it != tl.formation.end() && it->second <= tl.intervals)
            by_interval[it->second].push_back(p);
        else
            unformed_pool.push_back(p);
    }
    size_t total_pos = 0;
    for (const auto& v : by_interval) total_pos += v.size();
    require(total_pos > 0, "fit_gnn: no formed pairs in the training set");

    std::vector<SlnSnapshot> snaps(tl.intervals + 1);
    for (int i = 0; i <= tl.intervals; ++i) snaps[i] = tl.snapshot(i);

    GraphSage::Forward fwd;
    for (int epoch = 0; epoch < spec.epochs; ++epoch) {
        double loss_sum = 0.0;
        size_t count = 0;
        for (int i = 1; i <= tl.intervals; ++i) {
            const auto& pos = by_interval[i];
            if (pos.empty()) continue;
            std::vector<std::pair<Pair, int>> batch;
            for (const Pair& p : pos) {
                batch.emplace_back(p, 1);
                for (int s = 0; s < spec.gnn_neg_samples; ++s) {
                    // reject candidates already formed by interval i
                    for (int attempt = 0; attempt < 64; ++attempt) {
                        const Pair& cand =
                            train_pairs[rng.uniform_int(train_pairs.size())];
                        if (!tl.linked_at(cand, i)) {
                            batch.emplace_back(cand, 0);
                            break;
                        }
                    }
                }
            }
            std::fill(grads.begin(), grads.end(), 0.0);
            net.forward(model.params, snaps[i - 1], fwd);
            loss_sum += net.batch_backward(model.params, grads, snaps[i - 1], fwd, batch,
                                           1.0 / static_cast<double>(batch.size()));
            count += batch.size();
            adam.step(model.params, grads);
        }
        model.loss_log.push_back(count ? loss_sum / static_cast<double>(count) : 0.0);
    }
    return model;
}

/// Per-interval scores for a set of pairs: interval i is scored on the
/// snapshot at i-1 with the trained parameters.
inline std::vector<std::vector<double>> predict_gnn(const TrainedModel& model,
                                                    const SlnTimeline& tl,
                                                    const std::vector<Pair>& pairs) {
    require(model.spec.kind == ModelKind::gnn, "predict_gnn: not a gnn checkpoint");
    require(model.gnn_nodes == tl.node_count(), "gnn checkpoint was trained on ",
            model.gnn_nodes, " nodes, timeline has ", tl.node_count());
    GraphSage net(model.gnn_nodes, model.spec.gnn_dim);
    require(net.param_count == model.params.size(), "checkpoint parameter count mismatch");

    std::vector<std::vector<double>> scores(pairs.size(),
                                            std::vector<double>(tl.intervals, 0.0));
    GraphSage::Forward fwd;
    for (int i = 1; i <= tl.intervals; ++i) {
        SlnSnapshot snap = tl.snapshot(i - 1);
        net.forward(model.params, snap, fwd);
        for (size_t s = 0; s < pairs.size(); ++s) scores[s][i - 1] = net.score(fwd, pairs[s]);
    }
    return scores;
}

}  // namespace sln

#endif  // SLN_GNN_HPP_
