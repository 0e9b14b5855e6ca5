#include <catch2/catch_amalgamated.hpp>

#include <map>
#include <set>

#include "sln/rng.hpp"
#include "sln/timeline.hpp"

using namespace sln;

namespace {

ForumCorpus make_corpus(int64_t start, int64_t end,
                        const std::vector<std::vector<std::pair<std::string, int64_t>>>& threads) {
    ForumCorpus c;
    c.course_id = "fixture";
    c.start_time = start;
    c.end_time = end;
    std::set<std::string> learners;
    int pid = 0;
    for (size_t t = 0; t < threads.size(); ++t) {
        ForumThread th;
        th.thread_id = "t" + std::to_string(t);
        for (const auto& [author, ts] : threads[t]) {
            Post p;
            p.post_id = "p" + std::to_string(pid++);
            p.thread_id = th.thread_id;
            p.author_id = author;
            p.timestamp = ts;
            learners.insert(author);
            th.posts.push_back(p);
        }
        detail::sort_thread_posts(th);
        c.threads.push_back(th);
    }
    c.learners.assign(learners.begin(), learners.end());
    return c;
}

/// Brute-force co-thread scan: y_uv(i) = 1 iff some thread has posts by both
/// u and v with intervals <= i.
std::map<Pair, std::vector<bool>> oracle_adjacency(const ForumCorpus& corpus, int L) {
    std::map<Pair, std::vector<bool>> y;
    SlnTimeline index_only;
    index_only.learner_ids = corpus.learners;
    for (int i = 1; i <= L; ++i) {
        for (const auto& th : corpus.threads) {
            for (const auto& a : th.posts) {
                for (const auto& b : th.posts) {
                    if (a.author_id == b.author_id) continue;
                    int ia = bin_timestamp(a.timestamp, corpus.start_time, corpus.end_time, L);
                    int ib = bin_timestamp(b.timestamp, corpus.start_time, corpus.end_time, L);
                    if (ia <= i && ib <= i) {
                        Pair p(index_only.learner_index(a.author_id),
                               index_only.learner_index(b.author_id));
                        auto& row = y[p];
                        row.resize(L + 1, false);
                        row[i] = true;
                    }
                }
            }
        }
    }
    return y;
}

}  // namespace

TEST_CASE("bin_timestamp boundaries") {
    // exact start -> interval 1; exact end -> clamped to L
    CHECK(bin_timestamp(0, 0, 1000, 20) == 1);
    CHECK(bin_timestamp(1000, 0, 1000, 20) == 20);
    CHECK(bin_timestamp(49, 0, 1000, 20) == 1);
    CHECK(bin_timestamp(50, 0, 1000, 20) == 2);
    CHECK_THROWS_AS(bin_timestamp(-1, 0, 1000, 20), Error);
    CHECK_THROWS_AS(bin_timestamp(1001, 0, 1000, 20), Error);
}

TEST_CASE("bin_timestamp matches floor formula on random timestamps") {
    Rng rng(3);
    int64_t start = 500, end = 13337;
    int L = 4;
    std::map<int, int> counts;
    for (int i = 0; i < 100; ++i) {
        int64_t t = start + static_cast<int64_t>(rng.uniform_int(end - start + 1));
        int got = bin_timestamp(t, start, end, L);
        long long idx = 1 + static_cast<long long>(L) * (t - start) / (end - start);
        int expect = static_cast<int>(std::min<long long>(L, idx));
        CHECK(got == expect);
        counts[got]++;
    }
    for (const auto& [iv, n] : counts) {
        CHECK(iv >= 1);
        CHECK(iv <= L);
    }
}

TEST_CASE("build_timeline: pair posting at interval 3 links from 3 onward") {
    // window [0, 400), L = 4: interval 3 covers [200, 300)
    auto corpus = make_corpus(0, 400, {{{"A", 210}, {"B", 250}}});
    auto tl = build_timeline(corpus, 4);
    Pair ab(tl.learner_index("A"), tl.learner_index("B"));
    CHECK_FALSE(tl.linked_at(ab, 1));
    CHECK_FALSE(tl.linked_at(ab, 2));
    CHECK(tl.linked_at(ab, 3));
    CHECK(tl.linked_at(ab, 4));
}

TEST_CASE("build_timeline: single-author thread contributes no links") {
    auto corpus = make_corpus(0, 400, {{{"A", 10}, {"A", 210}, {"A", 390}}});
    auto tl = build_timeline(corpus, 4);
    CHECK(tl.formation.empty());
}

TEST_CASE("build_timeline: link forms when the later learner first contributes") {
    auto corpus = make_corpus(0, 500, {{{"A", 110}, {"B", 410}}});  // intervals 2 and 5, L=5
    auto tl = build_timeline(corpus, 5);
    Pair ab(tl.learner_index("A"), tl.learner_index("B"));
    auto it = tl.formation.find(ab);
    REQUIRE(it != tl.formation.end());
    CHECK(it->second == 5);
}

TEST_CASE("build_timeline matches brute-force co-thread oracle") {
    Rng rng(99);
    for (int trial = 0; trial < 15; ++trial) {
        std::vector<std::vector<std::pair<std::string, int64_t>>> spec_threads(5);
        for (auto& th : spec_threads) {
            int n = 1 + static_cast<int>(rng.uniform_int(8));
            for (int i = 0; i < n; ++i)
                th.emplace_back("u" + std::to_string(rng.uniform_int(10)),
                                static_cast<int64_t>(rng.uniform_int(1000)));
        }
        auto corpus = make_corpus(0, 1000, spec_threads);
        int L = 6;
        auto tl = build_timeline(corpus, L);
        auto oracle = oracle_adjacency(corpus, L);

        int n = tl.node_count();
        for (int i = 1; i <= L; ++i) {
            auto snap = tl.snapshot(i);
            for (int u = 0; u < n; ++u) {
                for (int v = u + 1; v < n; ++v) {
                    Pair p(u, v);
                    bool expect = false;
                    auto it = oracle.find(p);
                    if (it != oracle.end() && i < static_cast<int>(it->second.size()))
                        expect = it->second[i];
                    CHECK(snap.has_edge(u, v) == expect);
                    CHECK(snap.has_edge(v, u) == expect);  // symmetry
                }
                CHECK_FALSE(snap.has_edge(u, u));  // zero diagonal
            }
        }
    }
}

TEST_CASE("timeline monotonicity and permutation invariance") {
    Rng rng(5);
    std::vector<std::vector<std::pair<std::string, int64_t>>> spec_threads(4);
    for (auto& th : spec_threads) {
        int n = 2 + static_cast<int>(rng.uniform_int(6));
        for (int i = 0; i < n; ++i)
            th.emplace_back("u" + std::to_string(rng.uniform_int(7)),
                            static_cast<int64_t>(rng.uniform_int(900)));
    }
    auto corpus = make_corpus(0, 1000, spec_threads);
    auto tl = build_timeline(corpus, 5);

    // monotone edge counts
    size_t prev = 0;
    for (int i = 1; i <= 5; ++i) {
        size_t e = tl.edge_count_at(i);
        CHECK(e >= prev);
        prev = e;
    }

    // permuting thread order leaves the timeline unchanged
    ForumCorpus shuffled = corpus;
    std::reverse(shuffled.threads.begin(), shuffled.threads.end());
    auto tl2 = build_timeline(shuffled, 5);
    CHECK(tl.formation == tl2.formation);
    CHECK(tl.learner_ids == tl2.learner_ids);
}

TEST_CASE("link_sets partitions omega") {
    auto corpus = make_corpus(0, 100, {{{"A", 10}, {"B", 20}}, {{"C", 30}}});
    auto tl = build_timeline(corpus, 4);
    auto ls = link_sets(tl);
    CHECK(ls.omega_count == 3);
    CHECK(ls.formed.size() == 1);
    CHECK(ls.unformed.size() == 2);

    // empty adjacency: formed empty, unformed = omega
    auto corpus2 = make_corpus(0, 100, {{{"A", 10}}, {{"B", 20}}, {{"C", 30}}});
    auto tl2 = build_timeline(corpus2, 4);
    auto ls2 = link_sets(tl2);
    CHECK(ls2.formed.empty());
    CHECK(ls2.unformed.size() == 3);
}

TEST_CASE("pair_rank / rank_pair bijection") {
    int n = 23;
    uint64_t total = pair_count(n);
    for (uint64_t r = 0; r < total; ++r) {
        Pair p = rank_pair(r, n);
        CHECK(pair_rank(p, n) == r);
        CHECK(p.u < p.v);
    }
}

TEST_CASE("graph_metrics: triangle and path graphs") {
    SlnSnapshot tri;
    tri.neighbors = {{1, 2}, {0, 2}, {0, 1}};
    auto m = graph_metrics(tri);
    CHECK(m.nodes == 3);
    CHECK(m.edges == 3);
    for (double c : m.clustering) CHECK(c == Catch::Approx(1.0));
    REQUIRE(m.path_length_hist.size() == 1);
    CHECK(m.path_length_hist.at(1) == 3);

    SlnSnapshot path;  // A - B - C
    path.neighbors = {{1}, {0, 2}, {1}};
    auto mp = graph_metrics(path);
    for (double c : mp.clustering) CHECK(c == 0.0);
    CHECK(mp.path_length_hist.at(1) == 2);
    CHECK(mp.path_length_hist.at(2) == 1);
    CHECK(mp.connected_pairs == 3);
}

TEST_CASE("graph_metrics matches exhaustive oracle on random graphs") {
    Rng rng(17);
    for (int trial = 0; trial < 10; ++trial) {
        int n = 25;
        SlnSnapshot snap;
        snap.neighbors.resize(n);
        std::set<std::pair<int, int>> edges;
        for (int u = 0; u < n; ++u)
            for (int v = u + 1; v < n; ++v)
                if (rng.uniform01() < 0.15) edges.insert({u, v});
        for (auto [u, v] : edges) {
            snap.neighbors[u].push_back(v);
            snap.neighbors[v].push_back(u);
        }
        for (auto& nb : snap.neighbors) std::sort(nb.begin(), nb.end());

        auto m = graph_metrics(snap);
        CHECK(m.edges == edges.size());

        // oracle: triangles by exhaustive triple scan
        for (int u = 0; u < n; ++u) {
            int deg = static_cast<int>(snap.neighbors[u].size());
            if (deg < 2) {
                CHECK(m.clustering[u] == 0.0);
                continue;
            }
            int tri = 0;
            for (int a = 0; a < n; ++a)
                for (int b = a + 1; b < n; ++b)
                    if (snap.has_edge(u, a) && snap.has_edge(u, b) && snap.has_edge(a, b)) ++tri;
            CHECK(m.clustering[u] == Catch::Approx(2.0 * tri / (deg * (deg - 1.0))));
        }

        // oracle: all-pairs shortest paths by Floyd-Warshall
        std::vector<std::vector<int>> d(n, std::vector<int>(n, 1 << 20));
        for (int u = 0; u < n; ++u) d[u][u] = 0;
        for (auto [u, v] : edges) d[u][v] = d[v][u] = 1;
        for (int k = 0; k < n; ++k)
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < n; ++j)
                    d[i][j] = std::min(d[i][j], d[i][k] + d[k][j]);
        std::map<int, uint64_t> hist;
        for (int u = 0; u < n; ++u)
            for (int v = u + 1; v < n; ++v)
                if (d[u][v] < (1 << 20)) ++hist[d[u][v]];
        CHECK(m.path_length_hist == hist);
    }
}

TEST_CASE("ego_subgraph: isolated node and star center") {
    auto corpus = make_corpus(
        0, 100, {{{"hub", 10}, {"s1", 20}, {"s2", 30}, {"s3", 40}}, {{"loner", 50}}});
    auto tl = build_timeline(corpus, 4);

    auto iso = ego_subgraph(tl, "loner", 4, 2);
    CHECK(iso.nodes == std::vector<int>{tl.learner_index("loner")});
    CHECK(iso.edges.empty());

    auto star = ego_subgraph(tl, "hub", 4, 1);
    CHECK(star.nodes.size() == 4);  // hub + 3 leaves (co-thread forms a clique here)
    CHECK_THROWS_AS(ego_subgraph(tl, "nobody", 4, 1), Error);
}

TEST_CASE("ego_subgraph equals brute-force BFS ball on random graphs") {
    Rng rng(23);
    for (int trial = 0; trial < 10; ++trial) {
        std::vector<std::vector<std::pair<std::string, int64_t>>> spec_threads(6);
        for (auto& th : spec_threads) {
            int n = 1 + static_cast<int>(rng.uniform_int(5));
            for (int i = 0; i < n; ++i)
                th.emplace_back("u" + std::to_string(rng.uniform_int(9)),
                                static_cast<int64_t>(rng.uniform_int(900)));
        }
        auto corpus = make_corpus(0, 1000, spec_threads);
        auto tl = build_timeline(corpus, 4);
        auto snap = tl.snapshot(4);
        int n = tl.node_count();
        int center = static_cast<int>(rng.uniform_int(n));
        int depth = 1 + static_cast<int>(rng.uniform_int(2));

        auto ego = ego_subgraph(tl, tl.learner_ids[center], 4, depth);

        // oracle: BFS distances via Floyd-Warshall ball
        std::vector<std::vector<int>> d(n, std::vector<int>(n, 1 << 20));
        for (int u = 0; u < n; ++u) d[u][u] = 0;
        for (int u = 0; u < n; ++u)
            for (int v : snap.neighbors[u]) d[u][v] = 1;
        for (int k = 0; k < n; ++k)
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < n; ++j)
                    d[i][j] = std::min(d[i][j], d[i][k] + d[k][j]);
        std::vector<int> expect_nodes;
        for (int v = 0; v < n; ++v)
            if (d[center][v] <= depth) expect_nodes.push_back(v);
        CHECK(ego.nodes == expect_nodes);
        for (const Pair& e : ego.edges) {
            CHECK(snap.has_edge(e.u, e.v));
            CHECK(std::binary_search(expect_nodes.begin(), expect_nodes.end(), e.u));
            CHECK(std::binary_search(expect_nodes.begin(), expect_nodes.end(), e.v));
        }
    }
}

TEST_CASE("timeline file round trip") {
    auto corpus = make_corpus(0, 1000,
                              {{{"A", 10}, {"B", 500}, {"C", 900}},
                               {{"B", 100}, {"D", 150}},
                               {{"E", 700}}});
    auto tl = build_timeline(corpus, 5);
    std::string text = write_timeline(tl);
    auto back = read_timeline(text);
    CHECK(back.intervals == tl.intervals);
    CHECK(back.learner_ids == tl.learner_ids);
    CHECK(back.formation == tl.formation);
    CHECK(write_timeline(back) == text);
    CHECK_THROWS_AS(read_timeline("garbage"), Error);
}
