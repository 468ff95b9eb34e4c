#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <set>

#include "rgnn/graph.hpp"
#include "rgnn/graph_io.hpp"
#include "rgnn/rng.hpp"
#include "rgnn/sbm.hpp"

using namespace rgnn;

namespace {

Graph make_graph(int n, const std::vector<std::pair<int, int>>& edges, int num_classes = 2) {
    Tensor x(n, 2, 1.0);
    std::vector<int> labels(n, 0);
    for (int i = 0; i < n; ++i) labels[i] = i % num_classes;
    return Graph::build(n, edges, std::move(x), std::move(labels), num_classes);
}

// Independent component finder: union-find over the edge list.
struct UnionFind {
    std::vector<int> parent;
    explicit UnionFind(int n) : parent(n) {
        for (int i = 0; i < n; ++i) parent[i] = i;
    }
    int find(int x) { return parent[x] == x ? x : parent[x] = find(parent[x]); }
    void unite(int a, int b) { parent[find(a)] = find(b); }
};

std::filesystem::path temp_dir() {
    auto dir = std::filesystem::temp_directory_path() / "rgnn_graph_test";
    std::filesystem::create_directories(dir);
    return dir;
}

void write_text(const std::filesystem::path& p, const std::string& text) {
    std::ofstream out(p);
    out << text;
}

}  // namespace

TEST_CASE("build normalizes the edge list") {
    // Duplicates, reversed copies, and self-loops all collapse away.
    Graph g = make_graph(4, {{0, 1}, {1, 0}, {0, 1}, {2, 2}, {1, 3}});
    CHECK(g.num_edges() == 2);
    CHECK(g.has_edge(0, 1));
    CHECK(g.has_edge(1, 0));
    CHECK(g.has_edge(1, 3));
    CHECK_FALSE(g.has_edge(2, 2));
    CHECK_FALSE(g.has_edge(0, 3));
    CHECK(g.degree(1) == 2);
    CHECK(g.degree(2) == 0);
    auto nb = g.neighbors(1);
    CHECK(std::is_sorted(nb.begin(), nb.end()));
    auto el = g.edge_list();
    REQUIRE(el.size() == 2);
    CHECK(el[0] == std::pair<int, int>{0, 1});
    CHECK(el[1] == std::pair<int, int>{1, 3});
}

TEST_CASE("build rejects malformed inputs") {
    Tensor x(3, 2, 1.0);
    CHECK_THROWS_AS(Graph::build(3, {{0, 5}}, x, {0, 0, 0}, 2), std::invalid_argument);
    CHECK_THROWS_AS(Graph::build(3, {{-1, 1}}, x, {0, 0, 0}, 2), std::invalid_argument);
    CHECK_THROWS_AS(Graph::build(3, {{0, 1}}, x, {0, 0, 2}, 2), std::invalid_argument);
    CHECK_THROWS_AS(Graph::build(3, {{0, 1}}, x, {0, 0}, 2), std::invalid_argument);
    CHECK_THROWS_AS(Graph::build(3, {{0, 1}}, Tensor(2, 2, 1.0), {0, 0, 0}, 2),
                    std::invalid_argument);
}

TEST_CASE("shared builds alias feature and label storage") {
    Graph g = make_graph(4, {{0, 1}, {1, 2}});
    Graph h = Graph::build_shared(4, {{0, 3}}, g.features_ptr(), g.labels_ptr(), g.num_classes());
    CHECK(h.features_ptr().get() == g.features_ptr().get());
    CHECK(h.labels_ptr().get() == g.labels_ptr().get());
    CHECK(h.num_edges() == 1);
    CHECK(g.num_edges() == 2);  // original untouched
}

TEST_CASE("largest component matches a union-find oracle on random graphs") {
    std::mt19937_64 rng(make_rng(11, 0)());
    for (int trial = 0; trial < 30; ++trial) {
        const int n = 2 + static_cast<int>(rng() % 40);
        std::bernoulli_distribution edge_coin(0.06);
        std::vector<std::pair<int, int>> edges;
        for (int u = 0; u < n; ++u)
            for (int v = u + 1; v < n; ++v)
                if (edge_coin(rng)) edges.push_back({u, v});
        Graph g = make_graph(n, edges);

        UnionFind uf(n);
        for (auto [u, v] : edges) uf.unite(u, v);
        std::vector<int> size(n, 0);
        for (int v = 0; v < n; ++v) ++size[uf.find(v)];
        int best_size = 0, best_root = 0;
        for (int v = 0; v < n; ++v) {  // scan order resolves ties at smallest id
            int r = uf.find(v);
            if (size[r] > best_size) {
                best_size = size[r];
                best_root = r;
            }
        }

        Graph lcc = largest_connected_component(g);
        CHECK(lcc.num_nodes() == best_size);

        // Kept nodes are exactly the oracle component, remapped in id order.
        std::vector<int> kept;
        for (int v = 0; v < n; ++v)
            if (uf.find(v) == best_root) kept.push_back(v);
        REQUIRE(static_cast<int>(kept.size()) == lcc.num_nodes());
        for (int i = 0; i < lcc.num_nodes(); ++i) {
            CHECK(lcc.label(i) == g.label(kept[i]));
            CHECK(lcc.features().at(i, 0) == g.features().at(kept[i], 0));
        }
        for (auto [u, v] : lcc.edge_list()) CHECK(g.has_edge(kept[u], kept[v]));
    }
}

TEST_CASE("largest component tie goes to the smallest original id") {
    // Two 2-node components: {0,3} and {1,2}. Component containing 0 wins.
    Graph g = make_graph(4, {{0, 3}, {1, 2}});
    Graph lcc = largest_connected_component(g);
    REQUIRE(lcc.num_nodes() == 2);
    CHECK(lcc.label(0) == 0);  // original node 0
    CHECK(lcc.label(1) == 1);  // original node 3 (label 3 % 2)
    CHECK(lcc.has_edge(0, 1));
}

TEST_CASE("split sizes follow the 80/10/10-style rule") {
    for (int n : {5, 6, 10, 11, 37, 200}) {
        std::vector<std::pair<int, int>> edges;
        for (int i = 0; i + 1 < n; ++i) edges.push_back({i, i + 1});
        Graph g = make_graph(n, edges);
        SplitMasks m = split_nodes(g, 3);
        const int labeled = static_cast<int>(std::lround(0.8 * n));
        CHECK(static_cast<int>(m.train.size()) == (labeled + 1) / 2);
        CHECK(static_cast<int>(m.val.size()) == labeled / 2);
        CHECK(static_cast<int>(m.unlabeled.size()) == n - labeled);

        std::set<int> all;
        for (auto* part : {&m.train, &m.val, &m.unlabeled}) {
            CHECK(std::is_sorted(part->begin(), part->end()));
            all.insert(part->begin(), part->end());
        }
        CHECK(static_cast<int>(all.size()) == n);  // disjoint and exhaustive
    }
}

TEST_CASE("split is seed-deterministic") {
    Graph g = make_graph(20, {{0, 1}, {2, 3}});
    SplitMasks a = split_nodes(g, 99);
    SplitMasks b = split_nodes(g, 99);
    CHECK(a.train == b.train);
    CHECK(a.val == b.val);
    CHECK(a.unlabeled == b.unlabeled);
    SplitMasks c = split_nodes(g, 100);
    CHECK(a.train != c.train);  // overwhelmingly likely for n=20

    Graph tiny = make_graph(4, {{0, 1}});
    CHECK_THROWS_AS(split_nodes(tiny, 1), std::invalid_argument);
}

TEST_CASE("graph files load with id remapping") {
    auto dir = temp_dir();
    write_text(dir / "edges.txt", "# comment line\n10 30\n30 20\n\n10 20\n");
    write_text(dir / "labels.txt", "10\t0\n20\t1\n30\t0\n");
    write_text(dir / "features.txt", "10\t1,0\n20\t0,1\n30\t1,1\n");

    Graph g = load_graph((dir / "edges.txt").string(), (dir / "features.txt").string(),
                         (dir / "labels.txt").string());
    // ids 10, 20, 30 map to 0, 1, 2 in numeric order
    CHECK(g.num_nodes() == 3);
    CHECK(g.num_edges() == 3);
    CHECK(g.label(1) == 1);
    CHECK(g.feature_dim() == 2);
    CHECK(g.features().at(2, 0) == 1.0);
    CHECK(g.features().at(1, 0) == 0.0);

    Graph no_feat =
        load_graph((dir / "edges.txt").string(), std::nullopt, (dir / "labels.txt").string());
    CHECK(no_feat.feature_dim() == 3);  // identity fallback
    CHECK(no_feat.features().at(0, 0) == 1.0);
    CHECK(no_feat.features().at(0, 1) == 0.0);
}

TEST_CASE("graph file errors name the offending line") {
    auto dir = temp_dir();
    write_text(dir / "bad_edges.txt", "0 1\nnot numbers\n");
    write_text(dir / "labels2.txt", "0\t0\n1\t1\n");
    try {
        load_graph((dir / "bad_edges.txt").string(), std::nullopt, (dir / "labels2.txt").string());
        FAIL("expected a parse error");
    } catch (const std::runtime_error& e) {
        CHECK(std::string(e.what()).find("bad_edges.txt:2:") != std::string::npos);
    }

    write_text(dir / "edges2.txt", "0 1\n");
    write_text(dir / "bad_labels.txt", "0\t0\n5\t\n");
    CHECK_THROWS_AS(load_graph((dir / "edges2.txt").string(), std::nullopt,
                               (dir / "bad_labels.txt").string()),
                    std::runtime_error);

    // A node that appears in edges but carries no label is an error.
    write_text(dir / "labels_missing.txt", "0\t0\n");
    CHECK_THROWS_AS(load_graph((dir / "edges2.txt").string(), std::nullopt,
                               (dir / "labels_missing.txt").string()),
                    std::runtime_error);
}

TEST_CASE("block-model sampling is deterministic and block-structured") {
    std::vector<int> blocks{30, 30};
    Graph a = generate_sbm(blocks, 0.4, 0.02, 8, 0.1, 7);
    Graph b = generate_sbm(blocks, 0.4, 0.02, 8, 0.1, 7);
    CHECK(a.edge_list() == b.edge_list());
    CHECK(a.features().data == b.features().data);
    CHECK(a.labels() == b.labels());

    Graph c = generate_sbm(blocks, 0.4, 0.02, 8, 0.1, 8);
    CHECK(a.edge_list() != c.edge_list());

    // Labels are block ids, features are binary.
    CHECK(a.num_nodes() == 60);
    CHECK(a.num_classes() == 2);
    CHECK(a.label(0) == 0);
    CHECK(a.label(59) == 1);
    for (double v : a.features().data) CHECK((v == 0.0 || v == 1.0));

    int intra = 0, inter = 0;
    for (auto [u, v] : a.edge_list()) (a.label(u) == a.label(v) ? intra : inter)++;
    CHECK(intra > 5 * inter);

    CHECK_THROWS_AS(generate_sbm(blocks, 0.02, 0.4, 8, 0.1, 7), std::invalid_argument);
}
