#ifndef SLN_LDA_HPP_
#define SLN_LDA_HPP_

#include <algorithm>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "sln/common.hpp"
#include "sln/corpus.hpp"
#include "sln/rng.hpp"
#include "sln/text.hpp"
#include "sln/timeline.hpp"

namespace sln {

struct Vocabulary {
    std::vector<std::string> tokens;       // index -> token, sorted
    std::map<std::string, int> index;      // token -> index
    std::vector<int> doc_freq;             // documents containing the token

    int lookup(const std::string& tok) const {
        auto it = index.find(tok);
        return it == index.end() ? -1 : it->second;
    }
    size_t size() const { return tokens.size(); }
};

struct LdaParams {
    int topics = 20;
    int iterations = 1000;
    double alpha = -1.0;  // negative -> 50 / K
    double beta = 0.01;
    uint64_t seed = 1;
};

/// LDA fitted by collapsed Gibbs sampling. phi and theta are row-stochastic;
/// a refit with the same seed and inputs is bit-identical.
struct TopicModel {
    int topics = 0;
    double alpha = 0.0;
    double beta = 0.0;
    uint64_t seed = 0;
    Vocabulary vocab;
    std::vector<std::vector<double>> phi;    // topics x vocab
    std::vector<std::vector<double>> theta;  // docs x topics
    std::vector<std::string> doc_ids;
    std::map<std::string, int> doc_index;

    const std::vector<double>& doc_topics(const std::string& doc_id) const {
        auto it = doc_index.find(doc_id);
        require(it != doc_index.end(), "unknown document '", doc_id, "'");
        return theta[it->second];
    }
};

using TokenizedDoc = std::pair<std::string, std::vector<std::string>>;  // (doc id, tokens)

inline TopicModel fit_lda(const std::vector<TokenizedDoc>& docs, const LdaParams& params) {
    require(params.topics >= 2, "topic count must be >= 2, got ", params.topics);
    const int K = params.topics;
    const double alpha = params.alpha < 0 ? 50.0 / K : params.alpha;
    const double beta = params.beta;

    TopicModel model;
    model.topics = K;
    model.alpha = alpha;
    model.beta = beta;
    model.seed = params.seed;

    // Vocabulary in sorted token order for determinism.
    std::map<std::string, int> freq;
    for (const auto& [id, tokens] : docs) {
        std::set<std::string> seen;
        for (const auto& t : tokens)
            if (seen.insert(t).second) ++freq[t];
    }
    require(!freq.empty(), "cannot fit LDA: all documents are empty");
    for (const auto& [tok, df] : freq) {
        model.vocab.index[tok] = static_cast<int>(model.vocab.tokens.size());
        model.vocab.tokens.push_back(tok);
        model.vocab.doc_freq.push_back(df);
    }
    const int V = static_cast<int>(model.vocab.size());

    // Token streams per document.
    const int D = static_cast<int>(docs.size());
    std::vector<std::vector<int>> words(D);
    for (int d = 0; d < D; ++d) {
        model.doc_ids.push_back(docs[d].first);
        require(model.doc_index.emplace(docs[d].first, d).second, "duplicate document id '",
                docs[d].first, "'");
        words[d].reserve(docs[d].second.size());
        for (const auto& t : docs[d].second) words[d].push_back(model.vocab.index.at(t));
    }

    // Count tables.
    std::vector<std::vector<int>> n_dk(D, std::vector<int>(K, 0));
    std::vector<std::vector<int>> n_kw(K, std::vector<int>(V, 0));
    std::vector<int> n_k(K, 0);
    std::vector<std::vector<int>> z(D);

    Rng rng(params.seed);
    for (int d = 0; d < D; ++d) {
        z[d].resize(words[d].size());
        for (size_t j = 0; j < words[d].size(); ++j) {
            int k = static_cast<int>(rng.uniform_int(K));
            z[d][j] = k;
            ++n_dk[d][k];
            ++n_kw[k][words[d][j]];
            ++n_k[k];
        }
    }

    std::vector<double> p(K);
    const double v_beta = V * beta;
    for (int sweep = 0; sweep < params.iterations; ++sweep) {
        for (int d = 0; d < D; ++d) {
            for (size_t j = 0; j < words[d].size(); ++j) {
                const int w = words[d][j];
                const int old = z[d][j];
                --n_dk[d][old];
                --n_kw[old][w];
                --n_k[old];
                double total = 0.0;
                for (int k = 0; k < K; ++k) {
                    total += (n_kw[k][w] + beta) / (n_k[k] + v_beta) * (n_dk[d][k] + alpha);
                    p[k] = total;
                }
                const double s = total * rng.uniform01();
                int k = 0;
                while (k + 1 < K && s >= p[k]) ++k;
                z[d][j] = k;
                ++n_dk[d][k];
                ++n_kw[k][w];
                ++n_k[k];
            }
        }
    }

    model.phi.assign(K, std::vector<double>(V));
    for (int k = 0; k < K; ++k)
        for (int w = 0; w < V; ++w) model.phi[k][w] = (n_kw[k][w] + beta) / (n_k[k] + v_beta);
    model.theta.assign(D, std::vector<double>(K));
    for (int d = 0; d < D; ++d) {
        const double denom = static_cast<double>(words[d].size()) + K * alpha;
        for (int k = 0; k < K; ++k) model.theta[d][k] = (n_dk[d][k] + alpha) / denom;
    }
    return model;
}

/// Topic vector for an arbitrary token list under a fitted model, by count
/// projection: each in-vocabulary token contributes its per-word topic
/// posterior phi[k][w] / sum_j phi[j][w]. Empty or fully out-of-vocabulary
/// input yields the uniform vector 1/K.
inline std::vector<double> infer_post_topics(const TopicModel& model,
                                             const std::vector<std::string>& tokens) {
    const int K = model.topics;
    std::vector<double> acc(K, 0.0);
    size_t used = 0;
    for (const auto& t : tokens) {
        int w = model.vocab.lookup(t);
        if (w < 0) continue;
        double col = 0.0;
        for (int k = 0; k < K; ++k) col += model.phi[k][w];
        for (int k = 0; k < K; ++k) acc[k] += model.phi[k][w] / col;
        ++used;
    }
    if (used == 0) return std::vector<double>(K, 1.0 / K);
    const double denom = static_cast<double>(used) + K * model.alpha;
    for (int k = 0; k < K; ++k) acc[k] = (acc[k] + model.alpha) / denom;
    return acc;
}

/// Cumulative topic profile of one learner through an interval.
struct LearnerTopicProfile {
    std::string learner;
    int interval = 0;
    std::vector<double> mean_vector;  // all-zero when the learner has no posts yet
    std::vector<int> active_topics;   // K_u(i), sorted
};

/// Fit LDA over every post of the corpus (each post is one document).
inline TopicModel fit_corpus_lda(const ForumCorpus& corpus, const LdaParams& params) {
    std::vector<TokenizedDoc> docs;
    for (const auto& th : corpus.threads)
        for (const auto& p : th.posts) docs.emplace_back(p.post_id, preprocess(p.body));
    return fit_lda(docs, params);
}

namespace detail {

inline std::vector<int> threshold_topics(const std::vector<double>& mean, double threshold) {
    std::vector<int> active;
    for (size_t k = 0; k < mean.size(); ++k)
        if (mean[k] >= threshold) active.push_back(static_cast<int>(k));
    return active;
}

}  // namespace detail

inline LearnerTopicProfile learner_profile(const TopicModel& model, const ForumCorpus& corpus,
                                           const std::string& learner, int interval,
                                           double threshold, int intervals) {
    LearnerTopicProfile prof;
    prof.learner = learner;
    prof.interval = interval;
    std::vector<double> sum(model.topics, 0.0);
    size_t count = 0;
    for (const auto& th : corpus.threads) {
        for (const auto& p : th.posts) {
            if (p.author_id != learner) continue;
            int iv = bin_timestamp(p.timestamp, corpus.start_time, corpus.end_time, intervals);
            if (iv > interval) continue;
            const auto& vec = model.doc_topics(p.post_id);
            for (int k = 0; k < model.topics; ++k) sum[k] += vec[k];
            ++count;
        }
    }
    if (count == 0) {
        prof.mean_vector.assign(model.topics, 0.0);
        return prof;  // empty active set
    }
    for (int k = 0; k < model.topics; ++k) sum[k] /= static_cast<double>(count);
    prof.mean_vector = std::move(sum);
    prof.active_topics = detail::threshold_topics(prof.mean_vector, threshold);
    return prof;
}

/// Active topic sets for every learner at every interval, computed in one
/// cumulative pass. active(u, i) is empty until u's first post.
class LearnerProfileTable {
public:
    int intervals = 0;
    int topics = 0;
    double threshold = 0.0;
    // [learner][interval-1] -> sorted active topic set
    std::vector<std::vector<std::vector<int>>> active;
    std::vector<std::vector<std::vector<double>>> means;

    const std::vector<int>& active_at(int learner, int interval) const {
        return active[learner][interval - 1];
    }
};

inline LearnerProfileTable compute_profiles(const TopicModel& model, const ForumCorpus& corpus,
                                            const SlnTimeline& tl, double threshold) {
    LearnerProfileTable table;
    table.intervals = tl.intervals;
    table.topics = model.topics;
    table.threshold = threshold;
    const int n = tl.node_count();
    const int L = tl.intervals;
    const int K = model.topics;

    // Per learner and interval: sum of post vectors and post count.
    std::vector<std::vector<std::vector<double>>> sums(
        n, std::vector<std::vector<double>>(L, std::vector<double>(K, 0.0)));
    std::vector<std::vector<int>> counts(n, std::vector<int>(L, 0));
    for (const auto& th : corpus.threads) {
        for (const auto& p : th.posts) {
            int u = tl.learner_index(p.author_id);
            int iv = bin_timestamp(p.timestamp, corpus.start_time, corpus.end_time, L);
            const auto& vec = model.doc_topics(p.post_id);
            for (int k = 0; k < K; ++k) sums[u][iv - 1][k] += vec[k];
            ++counts[u][iv - 1];
        }
    }

    table.active.assign(n, std::vector<std::vector<int>>(L));
    table.means.assign(n, std::vector<std::vector<double>>(L));
    for (int u = 0; u < n; ++u) {
        std::vector<double> acc(K, 0.0);
        int total = 0;
        for (int i = 0; i < L; ++i) {
            for (int k = 0; k < K; ++k) acc[k] += sums[u][i][k];
            total += counts[u][i];
            std::vector<double> mean(K, 0.0);
            if (total > 0)
                for (int k = 0; k < K; ++k) mean[k] = acc[k] / total;
            table.active[u][i] = total > 0 ? detail::threshold_topics(mean, threshold)
                                           : std::vector<int>();
            table.means[u][i] = std::move(mean);
        }
    }
    return table;
}

/// Top-n stems of one topic with their probabilities, plus the topic's
/// support (mean theta mass across documents). Ties break on the token.
struct TopWords {
    int topic = 0;
    double support = 0.0;
    std::vector<std::pair<std::string, double>> words;
};

inline TopWords top_words(const TopicModel& model, int topic, int n) {
    require(topic >= 0 && topic < model.topics, "topic ", topic, " out of range [0, ",
            model.topics, ")");
    TopWords out;
    out.topic = topic;
    std::vector<int> order(model.vocab.size());
    for (size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
    std::sort(order.begin(), order.end(), [&](int a, int b) {
        if (model.phi[topic][a] != model.phi[topic][b])
            return model.phi[topic][a] > model.phi[topic][b];
        return model.vocab.tokens[a] < model.vocab.tokens[b];
    });
    for (int i = 0; i < n && i < static_cast<int>(order.size()); ++i)
        out.words.emplace_back(model.vocab.tokens[order[i]], model.phi[topic][order[i]]);
    double mass = 0.0;
    for (const auto& row : model.theta) mass += row[topic];
    out.support = model.theta.empty() ? 0.0 : mass / static_cast<double>(model.theta.size());
    return out;
}

// ---------------------------------------------------------------------------
// Serialization (versioned JSON).
// ---------------------------------------------------------------------------

inline std::string write_topic_model(const TopicModel& m) {
    nlohmann::json j;
    j["sln_topic_model"] = 1;
    j["topics"] = m.topics;
    j["alpha"] = m.alpha;
    j["beta"] = m.beta;
    j["seed"] = m.seed;
    j["vocab"] = m.vocab.tokens;
    j["doc_freq"] = m.vocab.doc_freq;
    j["phi"] = m.phi;
    j["theta"] = m.theta;
    j["doc_ids"] = m.doc_ids;
    return j.dump();
}

inline TopicModel read_topic_model(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        fail("topic model file is not valid JSON: ", e.what());
    }
    require(j.contains("sln_topic_model") && j["sln_topic_model"].get<int>() == 1,
            "not a topic model file (bad or missing version tag)");
    TopicModel m;
    m.topics = j["topics"].get<int>();
    m.alpha = j["alpha"].get<double>();
    m.beta = j["beta"].get<double>();
    m.seed = j["seed"].get<uint64_t>();
    m.vocab.tokens = j["vocab"].get<std::vector<std::string>>();
    m.vocab.doc_freq = j["doc_freq"].get<std::vector<int>>();
    for (size_t i = 0; i < m.vocab.tokens.size(); ++i)
        m.vocab.index[m.vocab.tokens[i]] = static_cast<int>(i);
    m.phi = j["phi"].get<std::vector<std::vector<double>>>();
    m.theta = j["theta"].get<std::vector<std::vector<double>>>();
    m.doc_ids = j["doc_ids"].get<std::vector<std::string>>();
    for (size_t i = 0; i < m.doc_ids.size(); ++i) m.doc_index[m.doc_ids[i]] = static_cast<int>(i);
    return m;
}

}  // namespace sln

#endif  // SLN_LDA_HPP_
