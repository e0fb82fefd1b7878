#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <set>

#include "laga/core/synthetic.hpp"
#include "laga/detect/report.hpp"
#include "laga/learn/encoder.hpp"

using namespace laga;
using namespace laga::detect;

namespace {

TextAttributedGraph clique_pair() {
    // Two 5-cliques joined by a single bridge edge.
    std::vector<NodeRecord> nodes(10);
    for (int i = 0; i < 10; ++i) {
        nodes[i].id = i;
        nodes[i].text = "node text " + std::to_string(i) + " with plenty of words";
        nodes[i].label = i < 5 ? 0 : 1;
        nodes[i].split = Split::train;
    }
    std::vector<std::pair<int, int>> edges;
    for (int a = 0; a < 5; ++a)
        for (int b = a + 1; b < 5; ++b) {
            edges.emplace_back(a, b);
            edges.emplace_back(a + 5, b + 5);
        }
    edges.emplace_back(4, 5);
    return TextAttributedGraph::create(nodes, edges, 2);
}

CommunityPartition single_community(const TextAttributedGraph& g) {
    CommunityPartition p;
    p.assignment.assign(g.n(), 0);
    p.communities.resize(1);
    for (int v = 0; v < g.n(); ++v) p.communities[0].push_back(v);
    p.modularity = modularity(g, p.assignment);
    return p;
}

}  // namespace

TEST_CASE("louvain separates two cliques and reports their modularity") {
    const auto g = clique_pair();
    const auto part = louvain_partition(g);
    REQUIRE(part.communities.size() == 2);
    CHECK(part.communities[0] == std::vector<int>{0, 1, 2, 3, 4});
    CHECK(part.communities[1] == std::vector<int>{5, 6, 7, 8, 9});
    // Q = 2 * (10/21 - (21/42)^2)
    CHECK(part.modularity == Catch::Approx(2.0 * (10.0 / 21.0 - 0.25)).epsilon(1e-12));

    const auto again = louvain_partition(g);
    CHECK(again.assignment == part.assignment);
}

TEST_CASE("louvain matches ground truth communities on a planted partition") {
    const auto g = make_synthetic_tag({.num_classes = 3,
                                       .nodes_per_class = 30,
                                       .p_intra = 0.3,
                                       .p_inter = 0.01,
                                       .seed = 23});
    const auto part = louvain_partition(g);
    // Pairwise agreement with the planted classes.
    std::size_t agree = 0, total = 0;
    for (int u = 0; u < g.n(); ++u)
        for (int v = u + 1; v < g.n(); ++v) {
            const bool same_class = *g.node(u).label == *g.node(v).label;
            const bool same_comm = part.assignment[u] == part.assignment[v];
            agree += same_class == same_comm;
            total += 1;
        }
    CHECK(static_cast<double>(agree) / total > 0.9);
    CHECK(part.modularity > 0.3);

    // Isolated nodes stay singletons.
    std::vector<NodeRecord> nodes(3);
    for (int i = 0; i < 3; ++i) nodes[i].id = i;
    const auto isolated = TextAttributedGraph::create(nodes, {}, 1);
    const auto p2 = louvain_partition(isolated);
    CHECK(p2.communities.size() == 3);
    CHECK(p2.modularity == 0.0);
}

TEST_CASE("kmeans recovers separated blobs deterministically") {
    detail::RngStream data_rng(4);
    Eigen::MatrixXd x(30, 2);
    const double centers[3][2] = {{0, 0}, {10, 0}, {0, 10}};
    for (int i = 0; i < 30; ++i) {
        const int c = i / 10;
        x(i, 0) = centers[c][0] + 0.1 * data_rng.next_normal();
        x(i, 1) = centers[c][1] + 0.1 * data_rng.next_normal();
    }
    const auto res = kmeans(x, 3, detail::RngStream(1));
    for (int blob = 0; blob < 3; ++blob)
        for (int i = 1; i < 10; ++i)
            CHECK(res.assignment[blob * 10 + i] == res.assignment[blob * 10]);
    std::set<int> distinct(res.assignment.begin(), res.assignment.end());
    CHECK(distinct.size() == 3);
    CHECK(res.inertia < 1.5);

    const auto res2 = kmeans(x, 3, detail::RngStream(1));
    CHECK(res2.assignment == res.assignment);

    const auto adaptive = adaptive_kmeans(x, 6, detail::RngStream(2));
    CHECK(adaptive.k == 3);
}

TEST_CASE("structural entropy, density and jaccard match closed forms") {
    DetectionConfig cfg;

    // 4-cycle: uniform degrees, entropy ln 4, density 2/3, jaccard 0.
    std::vector<NodeRecord> cyc(4);
    for (int i = 0; i < 4; ++i) cyc[i].id = i;
    const auto cycle =
        TextAttributedGraph::create(cyc, {{0, 1}, {1, 2}, {2, 3}, {3, 0}}, 1);
    const auto cyc_stats =
        compute_structure_diagnostics(cycle, single_community(cycle), cfg).communities[0];
    CHECK(cyc_stats.structural_entropy == Catch::Approx(std::log(4.0)).epsilon(1e-12));
    CHECK(cyc_stats.density == Catch::Approx(2.0 / 3.0).epsilon(1e-12));
    CHECK(cyc_stats.mean_degree == Catch::Approx(2.0));
    CHECK(cyc_stats.mean_jaccard == 0.0);  // opposite corners never share neighbors with adjacent

    // Star K_{1,3}: entropy 0.5 ln 2 + 0.5 ln 6, gini 0.25, variance 0.75.
    std::vector<NodeRecord> st(4);
    for (int i = 0; i < 4; ++i) st[i].id = i;
    const auto star = TextAttributedGraph::create(st, {{0, 1}, {0, 2}, {0, 3}}, 1);
    const auto star_diag = compute_structure_diagnostics(star, single_community(star), cfg);
    CHECK(star_diag.communities[0].structural_entropy ==
          Catch::Approx(0.5 * std::log(2.0) + 0.5 * std::log(6.0)).epsilon(1e-12));
    CHECK(star_diag.degree_gini == Catch::Approx(0.25).epsilon(1e-12));
    CHECK(star_diag.degree_variance == Catch::Approx(0.75).epsilon(1e-12));

    // Triangle: mean jaccard 1/3.
    std::vector<NodeRecord> tr(3);
    for (int i = 0; i < 3; ++i) tr[i].id = i;
    const auto tri = TextAttributedGraph::create(tr, {{0, 1}, {1, 2}, {0, 2}}, 1);
    const auto tri_stats =
        compute_structure_diagnostics(tri, single_community(tri), cfg).communities[0];
    CHECK(tri_stats.mean_jaccard == Catch::Approx(1.0 / 3.0).epsilon(1e-12));
    CHECK(tri_stats.density == Catch::Approx(1.0).epsilon(1e-12));

    // Degenerate cases stay defined.
    std::vector<NodeRecord> lonely(1);
    lonely[0].id = 0;
    const auto single = TextAttributedGraph::create(lonely, {}, 1);
    const auto s = compute_structure_diagnostics(single, single_community(single), cfg);
    CHECK_FALSE(s.communities[0].density_defined);
    CHECK_FALSE(s.communities[0].entropy_defined);
    CHECK_FALSE(s.communities[0].jaccard_defined);
    CHECK(s.degree_gini == 0.0);
}

TEST_CASE("clean clique pair raises no structural flags") {
    const auto g = clique_pair();
    DetectionConfig cfg;
    const auto part = louvain_partition(g);
    const auto diag = compute_structure_diagnostics(g, part, cfg);
    CHECK(diag.sparse_communities.empty());
    CHECK(diag.noisy_communities.empty());
    CHECK_FALSE(diag.imbalanced);
}

TEST_CASE("text diagnostics flag sparse, noisy and uninformative texts") {
    std::vector<NodeRecord> nodes(6);
    for (int i = 0; i < 6; ++i) nodes[i].id = i;
    nodes[0].text = "the gene expression profile shows strong differential signal";
    nodes[1].text = "the gene expression profile shows weak differential signal";
    nodes[2].text = "the short";
    nodes[3].text = "";
    nodes[4].text = "the gene x7#q zq@2 ##rr profile differential signal shows";
    nodes[5].text = "the the the the the the the the";
    const auto g = TextAttributedGraph::create(nodes, {}, 1);
    DetectionConfig cfg;
    const auto d = compute_text_diagnostics(g, cfg);

    CHECK(d.token_counts[3] == 0);
    CHECK(d.sparse[2]);
    CHECK(d.sparse[3]);
    CHECK_FALSE(d.sparse[0]);
    CHECK(d.noise_rate[3] == 0.0);
    CHECK(d.informativeness[3] == 0.0);

    // Node 4 carries 3 garbage tokens out of 9.
    CHECK(d.noise_rate[4] == Catch::Approx(3.0 / 9.0).epsilon(1e-12));
    CHECK(d.noisy[4]);
    CHECK_FALSE(d.noisy[0]);

    // "short" is out-of-vocabulary (df = 1), so it counts as an error too.
    CHECK(d.noise_rate[2] == Catch::Approx(0.5).epsilon(1e-12));

    // A text of corpus-wide stopwords is less informative than a distinctive
    // one: "the" appears in five of six documents, so its idf is ~0.
    CHECK(d.informativeness[5] < d.informativeness[0]);
}

TEST_CASE("label diagnostics fuse vote and clustering") {
    std::vector<NodeRecord> nodes(6);
    for (int i = 0; i < 6; ++i) {
        nodes[i].id = i;
        nodes[i].split = Split::train;
        nodes[i].text = "t" + std::to_string(i);
    }
    nodes[0].label = 0;
    nodes[1].label = 0;
    nodes[2].label = 1;  // contradicts its triangle neighbors
    nodes[3].label = 1;
    nodes[4].label = 1;
    nodes[5].split = Split::unlabeled;
    const auto g = TextAttributedGraph::create(
        nodes, {{0, 1}, {0, 2}, {1, 2}, {3, 4}, {5, 0}, {5, 1}, {5, 3}}, 2);

    Eigen::MatrixXd feats = Eigen::MatrixXd::Zero(6, 2);
    for (int i : {0, 1, 2, 5}) feats(i, 0) = 1.0;
    for (int i : {3, 4}) feats(i, 1) = 1.0;

    DetectionConfig cfg;
    cfg.tau_consistency = 0.6;
    const auto d = compute_label_diagnostics(g, feats, cfg);

    REQUIRE(d.vote[2].label.has_value());
    CHECK(*d.vote[2].label == 0);
    CHECK(d.vote[2].confidence == Catch::Approx(1.0));
    CHECK(d.suspected_noisy[2]);

    REQUIRE(d.vote[5].label.has_value());
    CHECK(*d.vote[5].label == 0);
    CHECK(d.vote[5].confidence == Catch::Approx(2.0 / 3.0).epsilon(1e-12));
    CHECK(d.missing[5]);
    REQUIRE(d.fused[5].label.has_value());
    CHECK(*d.fused[5].label == 0);  // tie between tools goes to the vote

    // With a stricter gate the fused prediction for node 5 disappears.
    cfg.tau_consistency = 0.7;
    const auto strict = compute_label_diagnostics(g, feats, cfg);
    CHECK_FALSE(strict.fused[5].label.has_value());
    CHECK(strict.missing[5]);

    CHECK(d.class_distribution[0] == Catch::Approx(0.4));
    CHECK(d.class_distribution[1] == Catch::Approx(0.6));
    CHECK(d.imbalance_ratio == Catch::Approx(2.0 / 3.0).epsilon(1e-12));
}

TEST_CASE("detection report serializes losslessly") {
    const auto g = make_synthetic_tag({.num_classes = 3,
                                       .nodes_per_class = 25,
                                       .p_intra = 0.25,
                                       .p_inter = 0.02,
                                       .seed = 31});
    const auto features = learn::encode_graph_features(g, 64);
    DetectionConfig cfg;
    cfg.seed = 7;
    const auto report = detect_graph(g, features.rows, cfg);

    CHECK(report.num_nodes == g.n());
    CHECK(report.num_edges == g.m());
    CHECK(report.communities.size() >= 3);
    CHECK(report.visible_labeled == static_cast<int>(g.visible_labeled_nodes().size()));

    const auto j = report.to_json();
    CHECK(j.at("schema") == "detect/1");
    const auto back = DetectionReport::from_json(nlohmann::json::parse(j.dump()));
    CHECK(back.num_nodes == report.num_nodes);
    CHECK(back.degrees == report.degrees);
    CHECK(back.token_counts == report.token_counts);
    CHECK(back.noisy_text_nodes == report.noisy_text_nodes);
    CHECK(back.sparse_communities == report.sparse_communities);
    CHECK(back.noisy_communities == report.noisy_communities);
    CHECK(back.community_of == report.community_of);
    CHECK(back.missing_labels.size() == report.missing_labels.size());
    CHECK(back.noisy_labels.size() == report.noisy_labels.size());
    CHECK(back.degree_gini == Catch::Approx(report.degree_gini).epsilon(1e-12));
    CHECK(back.class_distribution == report.class_distribution);
    CHECK(back.config.tau_noise == report.config.tau_noise);

    // The same inputs yield the identical report twice.
    const auto report2 = detect_graph(g, features.rows, cfg);
    CHECK(report2.to_json().dump() == j.dump());
}

TEST_CASE("clean fixture yields a quiet report") {
    const auto g = make_synthetic_tag({.num_classes = 3,
                                       .nodes_per_class = 25,
                                       .p_intra = 0.25,
                                       .p_inter = 0.02,
                                       .seed = 31});
    const auto features = learn::encode_graph_features(g, 64);
    DetectionConfig cfg;
    const auto report = detect_graph(g, features.rows, cfg);
    CHECK(report.sparse_text_nodes.empty());
    CHECK(report.noisy_text_nodes.empty());
    CHECK(report.missing_labels.empty());
    CHECK(report.noisy_labels.size() <= static_cast<std::size_t>(g.n() / 20));
    CHECK(report.sparse_communities.empty());
    CHECK(report.degree_gini < 0.25);
    CHECK(report.label_imbalance_ratio > 0.5);
}
