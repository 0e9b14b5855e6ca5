#ifndef SLN_TIMELINE_HPP_
#define SLN_TIMELINE_HPP_

#include <algorithm>
#include <cstdint>
#include <deque>
#include <map>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "sln/common.hpp"
#include "sln/corpus.hpp"

namespace sln {

/// Unordered learner pair, canonical order u < v over learner indices.
struct Pair {
    int u = 0;
    int v = 0;
    Pair() = default;
    Pair(int a, int b) : u(std::min(a, b)), v(std::max(a, b)) {}
    bool operator==(const Pair& o) const { return u == o.u && v == o.v; }
    bool operator<(const Pair& o) const { return u != o.u ? u < o.u : v < o.v; }
};

/// Interval index of a post: min(L, 1 + floor(L * (t - start) / (end - start))).
/// Exact integer arithmetic; a post at the window end is clamped to L.
inline int bin_timestamp(int64_t t, int64_t start, int64_t end, int intervals) {
    require(intervals >= 2, "interval count must be >= 2, got ", intervals);
    require(end > start, "course window empty");
    require(t >= start && t <= end, "post timestamp ", t, " outside course window [", start,
            ", ", end, "]");
    int64_t idx = 1 + static_cast<int64_t>(intervals) * (t - start) / (end - start);
    return static_cast<int>(std::min<int64_t>(intervals, idx));
}

/// Adjacency view of the SLN at one interval: symmetric, zero diagonal,
/// neighbor lists sorted ascending.
struct SlnSnapshot {
    int interval = 0;
    std::vector<std::vector<int>> neighbors;

    size_t node_count() const { return neighbors.size(); }
    size_t edge_count() const {
        size_t deg_sum = 0;
        for (const auto& n : neighbors) deg_sum += n.size();
        return deg_sum / 2;
    }
    bool has_edge(int u, int v) const {
        const auto& n = neighbors[u];
        return std::binary_search(n.begin(), n.end(), v);
    }
};

/// Time-evolving SLN over L intervals. Stored sparsely as the first interval
/// at which each linked pair forms; y_uv(i) = 1 iff formation(u,v) <= i.
/// Links persist, so snapshots are monotone by construction.
class SlnTimeline {
public:
    int intervals = 0;
    std::vector<std::string> learner_ids;          // index -> author_id, sorted
    std::map<Pair, int> formation;                 // linked pairs only

    int learner_index(const std::string& id) const {
        auto it = std::lower_bound(learner_ids.begin(), learner_ids.end(), id);
        require(it != learner_ids.end() && *it == id, "unknown learner '", id, "'");
        return static_cast<int>(it - learner_ids.begin());
    }

    int node_count() const { return static_cast<int>(learner_ids.size()); }

    /// y_uv(i) for interval i in [1, L].
    bool linked_at(Pair p, int i) const {
        auto it = formation.find(p);
        return it != formation.end() && it->second <= i;
    }

    SlnSnapshot snapshot(int i) const {
        require(i >= 0 && i <= intervals, "interval ", i, " out of range [0, ", intervals, "]");
        SlnSnapshot s;
        s.interval = i;
        s.neighbors.resize(learner_ids.size());
        for (const auto& [p, formed_at] : formation) {
            if (formed_at <= i) {
                s.neighbors[p.u].push_back(p.v);
                s.neighbors[p.v].push_back(p.u);
            }
        }
        // map iteration yields (u,v) in ascending order; v-side lists need a sort
        for (auto& n : s.neighbors) std::sort(n.begin(), n.end());
        return s;
    }

    size_t edge_count_at(int i) const {
        size_t n = 0;
        for (const auto& [p, formed_at] : formation)
            if (formed_at <= i) ++n;
        return n;
    }
};

/// Map every post in the corpus to its interval.
inline std::map<std::string, int> bin_posts(const ForumCorpus& corpus, int intervals) {
    std::map<std::string, int> out;
    for (const auto& t : corpus.threads)
        for (const auto& p : t.posts)
            out[p.post_id] =
                bin_timestamp(p.timestamp, corpus.start_time, corpus.end_time, intervals);
    return out;
}

/// Build the SLN timeline: a link (u, v) forms at the first interval by which
/// both learners have contributed to some common thread, i.e. per thread at
/// max(first interval of u, first interval of v), minimized over threads.
inline SlnTimeline build_timeline(const ForumCorpus& corpus, int intervals) {
    require(intervals >= 2, "interval count must be >= 2, got ", intervals);
    SlnTimeline tl;
    tl.intervals = intervals;
    tl.learner_ids = corpus.learners;  // already sorted + unique

    for (const auto& t : corpus.threads) {
        // First contribution interval per author in this thread.
        std::map<int, int> first_interval;
        for (const auto& p : t.posts) {
            int idx = tl.learner_index(p.author_id);
            int iv = bin_timestamp(p.timestamp, corpus.start_time, corpus.end_time, intervals);
            auto [it, inserted] = first_interval.emplace(idx, iv);
            if (!inserted && iv < it->second) it->second = iv;
        }
        for (auto a = first_interval.begin(); a != first_interval.end(); ++a) {
            auto b = a;
            for (++b; b != first_interval.end(); ++b) {
                Pair p(a->first, b->first);
                int formed = std::max(a->second, b->second);
                auto [it, inserted] = tl.formation.emplace(p, formed);
                if (!inserted && formed < it->second) it->second = formed;
            }
        }
    }
    return tl;
}

// ---------------------------------------------------------------------------
// Link sets: Omega (all unordered pairs), formed G(L), unformed complement.
// Pairs are addressed by a rank in [0, |Omega|) to avoid materializing the
// complement; pair_rank/rank_pair form the bijection.
// ---------------------------------------------------------------------------

inline uint64_t pair_count(int nodes) {
    return static_cast<uint64_t>(nodes) * (nodes - 1) / 2;
}

/// Rank of pair (u, v), u < v, in lexicographic order.
inline uint64_t pair_rank(Pair p, int nodes) {
    uint64_t u = p.u, v = p.v, n = nodes;
    return u * n - u * (u + 1) / 2 + (v - u - 1);
}

inline Pair rank_pair(uint64_t rank, int nodes) {
    uint64_t n = nodes;
    // Find u = largest index with cumulative count <= rank.
    uint64_t u = 0, acc = 0;
    while (acc + (n - u - 1) <= rank) {
        acc += n - u - 1;
        ++u;
    }
    uint64_t v = u + 1 + (rank - acc);
    return Pair(static_cast<int>(u), static_cast<int>(v));
}

struct LinkSets {
    uint64_t omega_count = 0;
    std::vector<Pair> formed;    // sorted
    std::vector<Pair> unformed;  // sorted; materialized (desk scale)
    bool imbalance_expected_violated = false;  // |unformed| >> |formed| did not hold
};

inline LinkSets link_sets(const SlnTimeline& tl) {
    LinkSets ls;
    int n = tl.node_count();
    ls.omega_count = pair_count(n);
    for (const auto& [p, formed_at] : tl.formation)
        if (formed_at <= tl.intervals) ls.formed.push_back(p);
    ls.unformed.reserve(ls.omega_count - ls.formed.size());
    auto it = ls.formed.begin();
    for (int u = 0; u < n; ++u) {
        for (int v = u + 1; v < n; ++v) {
            Pair p(u, v);
            if (it != ls.formed.end() && *it == p)
                ++it;
            else
                ls.unformed.push_back(p);
        }
    }
    // Expect heavy imbalance toward unformed; warn (flag) instead of failing.
    ls.imbalance_expected_violated = ls.formed.size() * 2 > ls.omega_count;
    return ls;
}

// ---------------------------------------------------------------------------
// Topology statistics.
// ---------------------------------------------------------------------------

struct GraphMetrics {
    size_t nodes = 0;
    size_t edges = 0;
    std::vector<int> degrees;                 // per node
    std::vector<double> clustering;           // per node, 0 for degree < 2
    std::map<int, uint64_t> path_length_hist; // over connected unordered pairs
    double mean_degree = 0.0;
    double mean_clustering = 0.0;
    double mean_path_length = 0.0;            // 0 when no connected pairs
    uint64_t connected_pairs = 0;
};

inline GraphMetrics graph_metrics(const SlnSnapshot& snap) {
    GraphMetrics m;
    int n = static_cast<int>(snap.node_count());
    m.nodes = snap.node_count();
    m.edges = snap.edge_count();
    m.degrees.resize(n);
    m.clustering.assign(n, 0.0);
    for (int u = 0; u < n; ++u) m.degrees[u] = static_cast<int>(snap.neighbors[u].size());

    for (int u = 0; u < n; ++u) {
        int d = m.degrees[u];
        if (d < 2) continue;
        const auto& nb = snap.neighbors[u];
        uint64_t triangles = 0;
        for (size_t a = 0; a < nb.size(); ++a)
            for (size_t b = a + 1; b < nb.size(); ++b)
                if (snap.has_edge(nb[a], nb[b])) ++triangles;
        m.clustering[u] =
            2.0 * static_cast<double>(triangles) / (static_cast<double>(d) * (d - 1));
    }

    // BFS from every node; unordered pairs counted once.
    std::vector<int> dist(n);
    std::deque<int> queue;
    for (int src = 0; src < n; ++src) {
        std::fill(dist.begin(), dist.end(), -1);
        dist[src] = 0;
        queue.clear();
        queue.push_back(src);
        while (!queue.empty()) {
            int u = queue.front();
            queue.pop_front();
            for (int w : snap.neighbors[u]) {
                if (dist[w] < 0) {
                    dist[w] = dist[u] + 1;
                    queue.push_back(w);
                }
            }
        }
        for (int v = src + 1; v < n; ++v)
            if (dist[v] > 0) ++m.path_length_hist[dist[v]];
    }

    double deg_sum = std::accumulate(m.degrees.begin(), m.degrees.end(), 0.0);
    double clu_sum = std::accumulate(m.clustering.begin(), m.clustering.end(), 0.0);
    m.mean_degree = n > 0 ? deg_sum / n : 0.0;
    m.mean_clustering = n > 0 ? clu_sum / n : 0.0;
    uint64_t pairs = 0;
    double len_sum = 0.0;
    for (const auto& [len, cnt] : m.path_length_hist) {
        pairs += cnt;
        len_sum += static_cast<double>(len) * static_cast<double>(cnt);
    }
    m.connected_pairs = pairs;
    m.mean_path_length = pairs > 0 ? len_sum / static_cast<double>(pairs) : 0.0;
    return m;
}

/// BFS ball of radius `depth` around learner u at interval i, with all edges
/// induced on the ball's nodes.
struct EgoSubgraph {
    std::vector<int> nodes;           // sorted
    std::vector<Pair> edges;          // sorted
};

inline EgoSubgraph ego_subgraph(const SlnTimeline& tl, const std::string& learner, int interval,
                                int depth) {
    require(depth == 1 || depth == 2, "ego depth must be 1 or 2, got ", depth);
    int center = tl.learner_index(learner);
    SlnSnapshot snap = tl.snapshot(interval);

    std::vector<int> dist(snap.node_count(), -1);
    std::deque<int> queue;
    dist[center] = 0;
    queue.push_back(center);
    EgoSubgraph ego;
    while (!queue.empty()) {
        int u = queue.front();
        queue.pop_front();
        ego.nodes.push_back(u);
        if (dist[u] == depth) continue;
        for (int w : snap.neighbors[u]) {
            if (dist[w] < 0) {
                dist[w] = dist[u] + 1;
                queue.push_back(w);
            }
        }
    }
    std::sort(ego.nodes.begin(), ego.nodes.end());
    for (int u : ego.nodes)
        for (int w : snap.neighbors[u])
            if (w > u && std::binary_search(ego.nodes.begin(), ego.nodes.end(), w))
                ego.edges.emplace_back(u, w);
    std::sort(ego.edges.begin(), ego.edges.end());
    return ego;
}

// ---------------------------------------------------------------------------
// Timeline file format: versioned text, edge list delta-encoded per interval.
// ---------------------------------------------------------------------------

inline std::string write_timeline(const SlnTimeline& tl) {
    std::ostringstream os;
    os << "sln-timeline v1\n";
    os << "intervals " << tl.intervals << "\n";
    os << "learners " << tl.learner_ids.size() << "\n";
    for (const auto& id : tl.learner_ids) os << id << "\n";
    // Group edges by formation interval (delta encoding: each edge listed once).
    std::vector<std::vector<Pair>> by_interval(tl.intervals + 1);
    for (const auto& [p, formed_at] : tl.formation) by_interval[formed_at].push_back(p);
    for (int i = 1; i <= tl.intervals; ++i) {
        os << "interval " << i << " " << by_interval[i].size() << "\n";
        for (const Pair& p : by_interval[i]) os << p.u << " " << p.v << "\n";
    }
    return os.str();
}

inline SlnTimeline read_timeline(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    require(static_cast<bool>(std::getline(in, line)) && line == "sln-timeline v1",
            "not a timeline file (bad or missing version tag)");
    SlnTimeline tl;
    size_t n_learners = 0;
    require(static_cast<bool>(in >> line) && line == "intervals" && (in >> tl.intervals),
            "timeline file: bad intervals header");
    require(static_cast<bool>(in >> line) && line == "learners" && (in >> n_learners),
            "timeline file: bad learners header");
    std::getline(in, line);
    for (size_t i = 0; i < n_learners; ++i) {
        require(static_cast<bool>(std::getline(in, line)), "timeline file: truncated learner list");
        tl.learner_ids.push_back(line);
    }
    for (int i = 1; i <= tl.intervals; ++i) {
        int interval = 0;
        size_t count = 0;
        require(static_cast<bool>(in >> line) && line == "interval" && (in >> interval >> count) &&
                    interval == i,
                "timeline file: bad interval block ", i);
        for (size_t e = 0; e < count; ++e) {
            int u, v;
            require(static_cast<bool>(in >> u >> v), "timeline file: truncated edge list");
            tl.formation.emplace(Pair(u, v), i);
        }
    }
    return tl;
}

}  // namespace sln

#endif  // SLN_TIMELINE_HPP_
