#ifndef SLN_FEATURES_HPP_
#define SLN_FEATURES_HPP_

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <deque>
#include <sstream>
#include <string>
#include <vector>

#include "sln/common.hpp"
#include "sln/lda.hpp"
#include "sln/timeline.hpp"

namespace sln {

/// Column order of the 7-feature vector. This order is part of the model
/// contract: checkpoints record it and refuse mismatched inputs.
inline const std::vector<std::string>& feature_columns() {
    static const std::vector<std::string> cols = {"ja", "ad", "re", "pr", "lp", "np", "to"};
    return cols;
}
constexpr int kFeatureCount = 7;

enum class LeakagePolicy { strict_prior, concurrent };

inline const char* leakage_policy_name(LeakagePolicy p) {
    return p == LeakagePolicy::strict_prior ? "strict-prior" : "concurrent";
}

inline LeakagePolicy leakage_policy_from(const std::string& s) {
    if (s == "strict-prior") return LeakagePolicy::strict_prior;
    if (s == "concurrent") return LeakagePolicy::concurrent;
    fail("unknown leakage policy '", s, "' (expected strict-prior|concurrent)");
}

struct NeighborhoodFeatures {
    double ja = 0.0;
    double ad = 0.0;
    double re = 0.0;
    double pr = 0.0;
};

/// Jaccard, Adamic-Adar (natural log), resource allocation, preferential
/// attachment. Common neighbors always have degree >= 2, so log is safe.
inline NeighborhoodFeatures neighborhood_features(const SlnSnapshot& snap, int u, int v) {
    require(u != v, "neighborhood features need distinct nodes, got ", u, " twice");
    const auto& nu = snap.neighbors[u];
    const auto& nv = snap.neighbors[v];
    NeighborhoodFeatures f;
    f.pr = static_cast<double>(nu.size()) * static_cast<double>(nv.size());

    size_t a = 0, b = 0, common = 0;
    while (a < nu.size() && b < nv.size()) {
        if (nu[a] < nv[b]) {
            ++a;
        } else if (nu[a] > nv[b]) {
            ++b;
        } else {
            ++common;
            double deg = static_cast<double>(snap.neighbors[nu[a]].size());
            f.ad += 1.0 / std::log(deg);
            f.re += 1.0 / deg;
            ++a;
            ++b;
        }
    }
    size_t uni = nu.size() + nv.size() - common;
    f.ja = uni == 0 ? 0.0 : static_cast<double>(common) / static_cast<double>(uni);
    return f;
}

struct PathFeatures {
    double lp = 0.0;  // shortest-path length, or the sentinel when disconnected
    double np = 0.0;  // number of distinct shortest paths, 0 when disconnected
};

/// BFS from `src` computing distances and shortest-path counts to all nodes.
/// Counts are exact for values up to 2^53.
inline void bfs_path_counts(const SlnSnapshot& snap, int src, std::vector<int>& dist,
                            std::vector<double>& count) {
    const int n = static_cast<int>(snap.node_count());
    dist.assign(n, -1);
    count.assign(n, 0.0);
    dist[src] = 0;
    count[src] = 1.0;
    std::deque<int> queue{src};
    while (!queue.empty()) {
        int u = queue.front();
        queue.pop_front();
        for (int w : snap.neighbors[u]) {
            if (dist[w] < 0) {
                dist[w] = dist[u] + 1;
                count[w] = count[u];
                queue.push_back(w);
            } else if (dist[w] == dist[u] + 1) {
                count[w] += count[u];
            }
        }
    }
}

inline PathFeatures path_features(const SlnSnapshot& snap, int u, int v, int lp_sentinel) {
    require(u != v, "path features need distinct nodes, got ", u, " twice");
    std::vector<int> dist;
    std::vector<double> count;
    bfs_path_counts(snap, u, dist, count);
    PathFeatures f;
    if (dist[v] < 0) {
        f.lp = static_cast<double>(lp_sentinel);
        f.np = 0.0;
    } else {
        f.lp = static_cast<double>(dist[v]);
        f.np = count[v];
    }
    return f;
}

/// |K_u(i) ∩ K_v(i)| over sorted active-topic sets.
inline int topic_overlap(const std::vector<int>& ku, const std::vector<int>& kv) {
    size_t a = 0, b = 0;
    int common = 0;
    while (a < ku.size() && b < kv.size()) {
        if (ku[a] < kv[b])
            ++a;
        else if (ku[a] > kv[b])
            ++b;
        else {
            ++common;
            ++a;
            ++b;
        }
    }
    return common;
}

using FeatureVector = std::array<double, kFeatureCount>;

struct PairSeries {
    Pair pair;
    std::vector<FeatureVector> x;   // e_uv(i), i = 1..L
    std::vector<uint8_t> label;     // y_uv(i), monotone
};

struct FeatureSet {
    int intervals = 0;
    int lp_sentinel = 0;
    LeakagePolicy policy = LeakagePolicy::strict_prior;
    std::vector<std::string> learner_ids;
    std::vector<PairSeries> series;

    const PairSeries& find(Pair p) const {
        for (const auto& s : series)
            if (s.pair == p) return s;
        fail("unknown pair (", p.u, ", ", p.v, ") in feature set");
    }
};

/// Assemble e_uv(i) and label series for the given pairs. Under strict-prior
/// (the default) every feature for interval i, including topic overlap, is
/// computed from state through interval i-1; interval 1 sees an empty graph
/// and empty topic profiles. Under concurrent, state through i is used.
inline FeatureSet assemble_series(const SlnTimeline& tl, const LearnerProfileTable& profiles,
                                  const std::vector<Pair>& pairs, LeakagePolicy policy,
                                  int lp_sentinel = -1) {
    const int L = tl.intervals;
    const int n = tl.node_count();
    if (lp_sentinel < 0) lp_sentinel = n;

    FeatureSet fs;
    fs.intervals = L;
    fs.lp_sentinel = lp_sentinel;
    fs.policy = policy;
    fs.learner_ids = tl.learner_ids;
    fs.series.resize(pairs.size());
    for (size_t s = 0; s < pairs.size(); ++s) {
        require(pairs[s].u >= 0 && pairs[s].v < n && pairs[s].u != pairs[s].v,
                "pair (", pairs[s].u, ", ", pairs[s].v, ") out of range");
        fs.series[s].pair = pairs[s];
        fs.series[s].x.resize(L);
        fs.series[s].label.resize(L);
    }

    std::vector<int> dist;
    std::vector<double> count;
    for (int i = 1; i <= L; ++i) {
        const int state = policy == LeakagePolicy::strict_prior ? i - 1 : i;
        SlnSnapshot snap = tl.snapshot(state);

        // One BFS per distinct source node used by the pair list.
        std::vector<int> sources;
        for (const auto& p : pairs) sources.push_back(p.u);
        std::sort(sources.begin(), sources.end());
        sources.erase(std::unique(sources.begin(), sources.end()), sources.end());
        std::vector<std::vector<int>> dists(sources.size());
        std::vector<std::vector<double>> counts(sources.size());
        for (size_t s = 0; s < sources.size(); ++s)
            bfs_path_counts(snap, sources[s], dists[s], counts[s]);
        auto source_slot = [&](int u) {
            return std::lower_bound(sources.begin(), sources.end(), u) - sources.begin();
        };

        for (size_t s = 0; s < pairs.size(); ++s) {
            const Pair p = pairs[s];
            auto nb = neighborhood_features(snap, p.u, p.v);
            size_t slot = source_slot(p.u);
            FeatureVector& x = fs.series[s].x[i - 1];
            x[0] = nb.ja;
            x[1] = nb.ad;
            x[2] = nb.re;
            x[3] = nb.pr;
            if (dists[slot][p.v] < 0) {
                x[4] = static_cast<double>(lp_sentinel);
                x[5] = 0.0;
            } else {
                x[4] = static_cast<double>(dists[slot][p.v]);
                x[5] = counts[slot][p.v];
            }
            if (state == 0) {
                x[6] = 0.0;
            } else {
                x[6] = static_cast<double>(
                    topic_overlap(profiles.active_at(p.u, state), profiles.active_at(p.v, state)));
            }
            fs.series[s].label[i - 1] = tl.linked_at(p, i) ? 1 : 0;
        }
    }
    return fs;
}

/// All pairs of the timeline in rank order.
inline std::vector<Pair> all_pairs(const SlnTimeline& tl) {
    std::vector<Pair> pairs;
    const int n = tl.node_count();
    pairs.reserve(pair_count(n));
    for (int u = 0; u < n; ++u)
        for (int v = u + 1; v < n; ++v) pairs.emplace_back(u, v);
    return pairs;
}

// ---------------------------------------------------------------------------
// Feature table file: delimited text, header row, one row per
// (pair, interval). %.17g formatting makes the round trip bit-exact.
// ---------------------------------------------------------------------------

inline std::string write_features(const FeatureSet& fs) {
    std::ostringstream os;
    os << "# sln-features v1 intervals=" << fs.intervals << " lp_sentinel=" << fs.lp_sentinel
       << " policy=" << leakage_policy_name(fs.policy) << "\n";
    os << "u,v,interval";
    for (const auto& c : feature_columns()) os << "," << c;
    os << ",label\n";
    for (const auto& s : fs.series) {
        for (int i = 1; i <= fs.intervals; ++i) {
            os << fs.learner_ids[s.pair.u] << "," << fs.learner_ids[s.pair.v] << "," << i;
            for (int c = 0; c < kFeatureCount; ++c) os << "," << fmt_double(s.x[i - 1][c]);
            os << "," << static_cast<int>(s.label[i - 1]) << "\n";
        }
    }
    return os.str();
}

inline FeatureSet read_features(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    require(static_cast<bool>(std::getline(in, line)) && line.rfind("# sln-features v1", 0) == 0,
            "not a feature table (bad or missing version tag)");
    FeatureSet fs;
    {
        std::istringstream hs(line.substr(std::string("# sln-features v1").size()));
        std::string kv;
        while (hs >> kv) {
            auto eq = kv.find('=');
            require(eq != std::string::npos, "bad feature header token '", kv, "'");
            std::string key = kv.substr(0, eq), val = kv.substr(eq + 1);
            if (key == "intervals")
                fs.intervals = static_cast<int>(parse_int(val));
            else if (key == "lp_sentinel")
                fs.lp_sentinel = static_cast<int>(parse_int(val));
            else if (key == "policy")
                fs.policy = leakage_policy_from(val);
        }
    }
    require(static_cast<bool>(std::getline(in, line)), "feature table: missing column header");
    {
        auto cols = split(line, ',');
        require(cols.size() == static_cast<size_t>(3 + kFeatureCount + 1),
                "feature table: unexpected column count ", cols.size());
        for (int c = 0; c < kFeatureCount; ++c)
            require(cols[3 + c] == feature_columns()[c], "feature table column ", 3 + c,
                    " is '", cols[3 + c], "', expected '", feature_columns()[c], "'");
    }

    require(fs.intervals >= 1, "feature table header missing intervals");

    // Pass 1: collect rows; learner indices are assigned over the sorted id
    // set so that pair order matches the writer's.
    std::vector<std::vector<std::string>> rows;
    std::set<std::string> ids;
    size_t lineno = 2;
    while (std::getline(in, line)) {
        ++lineno;
        if (trim(line).empty()) continue;
        auto f = split(line, ',');
        require(f.size() == static_cast<size_t>(3 + kFeatureCount + 1), "feature table line ",
                lineno, ": unexpected field count");
        ids.insert(f[0]);
        ids.insert(f[1]);
        rows.push_back(std::move(f));
    }
    fs.learner_ids.assign(ids.begin(), ids.end());
    auto index_of = [&](const std::string& id) {
        return static_cast<int>(std::lower_bound(fs.learner_ids.begin(), fs.learner_ids.end(),
                                                 id) -
                                fs.learner_ids.begin());
    };

    std::map<Pair, size_t> pair_slot;
    for (const auto& f : rows) {
        Pair p(index_of(f[0]), index_of(f[1]));
        int interval = static_cast<int>(parse_int(f[2]));
        require(interval >= 1 && interval <= fs.intervals,
                "feature table: interval out of range");
        auto [slot_it, inserted] = pair_slot.emplace(p, fs.series.size());
        if (inserted) {
            PairSeries s;
            s.pair = p;
            s.x.resize(fs.intervals);
            s.label.resize(fs.intervals);
            fs.series.push_back(std::move(s));
        }
        PairSeries& s = fs.series[slot_it->second];
        for (int c = 0; c < kFeatureCount; ++c) s.x[interval - 1][c] = parse_double(f[3 + c]);
        s.label[interval - 1] = static_cast<uint8_t>(parse_int(f[3 + kFeatureCount]));
    }
    return fs;
}

}  // namespace sln

#endif  // SLN_FEATURES_HPP_
