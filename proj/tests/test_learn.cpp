#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numeric>

#include "laga/core/synthetic.hpp"
#include "laga/learn/augment.hpp"
#include "laga/learn/encoder.hpp"
#include "laga/learn/semantic.hpp"
#include "laga/learn/state.hpp"
#include "laga/learn/structural.hpp"

using namespace laga;
using namespace laga::learn;

namespace {

TextAttributedGraph random_tag(std::uint64_t seed, int n = 10, int classes = 3,
                               double edge_prob = 0.35) {
    detail::RngStream rng(seed);
    auto node_rng = rng.derive("nodes");
    auto edge_rng = rng.derive("edges");
    std::vector<NodeRecord> nodes(n);
    for (int i = 0; i < n; ++i) {
        nodes[i].id = i;
        nodes[i].text = "node " + std::to_string(i) + " text";
        nodes[i].label = static_cast<int>(node_rng.below(classes));
        nodes[i].split = node_rng.next_double() < 0.6 ? Split::train : Split::test;
    }
    std::vector<std::pair<int, int>> edges;
    for (int u = 0; u < n; ++u)
        for (int v = u + 1; v < n; ++v)
            if (edge_rng.next_double() < edge_prob) edges.emplace_back(u, v);
    return TextAttributedGraph::create(std::move(nodes), std::move(edges), classes);
}

Eigen::MatrixXd random_matrix(int rows, int cols, std::uint64_t seed) {
    detail::RngStream rng(seed);
    Eigen::MatrixXd m(rows, cols);
    for (int i = 0; i < rows; ++i)
        for (int j = 0; j < cols; ++j) m(i, j) = rng.next_normal();
    return m;
}

Eigen::MatrixXd random_distribution_rows(int rows, int cols, std::uint64_t seed) {
    detail::RngStream rng(seed);
    Eigen::MatrixXd m(rows, cols);
    for (int i = 0; i < rows; ++i) {
        double sum = 0.0;
        for (int j = 0; j < cols; ++j) {
            m(i, j) = -std::log(rng.next_double() + 1e-12);
            sum += m(i, j);
        }
        m.row(i) /= sum;
    }
    return m;
}

template <typename Params, typename LossFn>
double fd_relative_error(const Params& params, const Eigen::VectorXd& analytic, LossFn loss_at,
                         double step = 1e-4) {
    const Eigen::VectorXd theta = params.flatten();
    Eigen::VectorXd numeric(theta.size());
    for (Eigen::Index k = 0; k < theta.size(); ++k) {
        Eigen::VectorXd up = theta, down = theta;
        up(k) += step;
        down(k) -= step;
        numeric(k) = (loss_at(up) - loss_at(down)) / (2.0 * step);
    }
    const double denom = std::max({analytic.norm(), numeric.norm(), 1e-12});
    return (analytic - numeric).norm() / denom;
}

plan::LossWeights weights_of(double a, double b, double c) {
    plan::LossWeights w;
    w.alpha = a;
    w.beta = b;
    w.gamma = c;
    return w;
}

}  // namespace

TEST_CASE("hashed tf-idf encoder basics") {
    const std::vector<std::string> texts = {"graph neural network", "graph neural network",
                                            "totally different words here", ""};
    const auto f = encode_features(texts, 4096);
    CHECK(f.rows.rows() == 4);
    CHECK(f.rows.row(0) == f.rows.row(1));
    CHECK(f.rows.row(0).norm() == Catch::Approx(1.0).margin(1e-6));
    CHECK(f.rows.row(2).norm() == Catch::Approx(1.0).margin(1e-6));
    CHECK(f.rows.row(3).norm() == 0.0);

    const auto again = encode_features(texts, 4096);
    CHECK(f.rows == again.rows);
    CHECK(f.provenance == again.provenance);
}

TEST_CASE("disjoint vocabularies land in disjoint buckets") {
    const std::vector<std::string> texts = {"alpha beta gamma delta", "epsilon zeta eta theta"};
    std::set<std::uint64_t> buckets;
    for (const auto& text : texts)
        for (const auto& tok : detail::normalized_tokens(text)) {
            const auto b = detail::fnv1a64(tok) % 4096;
            CHECK(buckets.insert(b).second);  // collision-free on this vocabulary
        }
    const auto f = encode_features(texts, 4096);
    CHECK(f.rows.row(0).dot(f.rows.row(1)) == 0.0);
}

TEST_CASE("augmentation fallback behavior") {
    std::vector<NodeRecord> nodes(3);
    nodes[0] = {0, "a a b", std::nullopt, Split::unlabeled};
    nodes[1] = {1, "a c", std::nullopt, Split::unlabeled};
    nodes[2] = {2, "", std::nullopt, Split::unlabeled};
    auto g = TextAttributedGraph::create(std::move(nodes), {}, 4);

    const std::vector<std::optional<int>> pseudo = {2, std::nullopt, 1};
    const auto aug = augment_texts(g, pseudo);

    REQUIRE(aug.keywords[0].size() >= 2);
    CHECK(aug.keywords[0][0] == "b");  // out-ranks the corpus-wide token
    CHECK(aug.y_pseudo.row(0)(2) == 1.0);
    CHECK(aug.y_pseudo.row(1)(0) == Catch::Approx(0.25));
    CHECK(aug.summaries[2].empty());
    CHECK(aug.keywords[2].empty());
    CHECK(aug.y_pseudo.row(2)(0) == Catch::Approx(0.25));  // empty text stays uniform
    for (int v = 0; v < 3; ++v) {
        CHECK(aug.y_pseudo.row(v).sum() == Catch::Approx(1.0).margin(1e-12));
        CHECK(aug.from_fallback[v]);
    }
    CHECK(aug.enriched[2].empty());
    CHECK(aug.enriched[0].rfind("a a b", 0) == 0);
}

TEST_CASE("augmentation single-class graphs get that class") {
    std::vector<NodeRecord> nodes(2);
    nodes[0] = {0, "only topic here", 0, Split::train};
    nodes[1] = {1, "another doc on topic", 0, Split::train};
    auto g = TextAttributedGraph::create(std::move(nodes), {{0, 1}}, 1);
    const auto aug = augment_texts(g, {0, 0});
    CHECK(aug.y_pseudo(0, 0) == 1.0);
    CHECK(aug.y_pseudo(1, 0) == 1.0);
}

TEST_CASE("augmentation provider path with per-node fallback") {
    auto g = random_tag(3, 4, 2);
    AugmentProvider provider = [](int node, const std::string&) -> std::optional<AugmentResponse> {
        if (node == 2) return std::nullopt;
        AugmentResponse r;
        r.summary = "summary " + std::to_string(node);
        r.keywords = {"kw" + std::to_string(node)};
        r.pseudo_label = 1;
        return r;
    };
    const auto aug = augment_texts(g, {}, provider);
    CHECK(aug.provider_failures == 1);
    CHECK(aug.from_fallback[2]);
    CHECK_FALSE(aug.from_fallback[0]);
    CHECK(aug.y_pseudo(0, 1) == 1.0);
    CHECK(aug.summaries[1] == "summary 1");
    CHECK(aug.enriched[0].find("kw0") != std::string::npos);
}

TEST_CASE("contrastive term matches hand-computed values") {
    Eigen::MatrixXd z(3, 2);
    z << 1.0, 0.0, 0.0, 1.0, 0.0, 1.0;

    SECTION("one neighbor, no negatives gives zero") {
        std::vector<std::vector<int>> pos = {{1}, {}, {}};
        std::vector<std::vector<int>> neg = {{}, {}, {}};
        const auto out = impl::contrastive_term(z, pos, neg, 1.0, false);
        CHECK(out.loss == Catch::Approx(0.0).margin(1e-15));
    }

    SECTION("orthogonal positive and negative at tau=1 gives ln 2") {
        std::vector<std::vector<int>> pos = {{1}, {}, {}};
        std::vector<std::vector<int>> neg = {{2}, {}, {}};
        const auto out = impl::contrastive_term(z, pos, neg, 1.0, false);
        CHECK(out.loss == Catch::Approx(std::log(2.0)).epsilon(1e-12));
    }
}

TEST_CASE("zero-parameter semantic losses hit closed forms") {
    auto g = random_tag(11, 8, 4);
    const auto x = random_matrix(8, 6, 21);
    Eigen::MatrixXd y = Eigen::MatrixXd::Zero(8, 4);
    for (int i = 0; i < 8; ++i) y(i, i % 4) = 1.0;

    TrainOptions opt;
    opt.hidden = 5;
    opt.seed = 7;
    opt.weights = weights_of(1.0, 0.0, 0.0);
    auto batch = make_semantic_batch(g, x, y, opt);

    auto params = SemanticParams::init(6, 5, 4, detail::RngStream(1).derive("x"));
    params.unflatten(Eigen::VectorXd::Zero(params.size()));

    const auto parts = semantic_loss(params, batch);
    // softmax of zero logits is uniform; against one-hot rows the squared
    // distance is (d-1)/d^2 + (1-1/d)^2 = 0.75 for d=4.
    CHECK(parts.semantic == Catch::Approx(0.75).epsilon(1e-12));
    if (!batch.train_nodes.empty())
        CHECK(parts.label == Catch::Approx(std::log(4.0)).epsilon(1e-12));
}

TEST_CASE("uniform logits cross entropy is ln d") {
    std::vector<NodeRecord> nodes(7);
    for (int i = 0; i < 7; ++i) nodes[i] = {i, "t", i % 7, Split::train};
    auto g = TextAttributedGraph::create(std::move(nodes), {{0, 1}}, 7);
    const auto x = random_matrix(7, 4, 5);
    Eigen::MatrixXd y = Eigen::MatrixXd::Constant(7, 7, 1.0 / 7.0);
    TrainOptions opt;
    opt.hidden = 3;
    opt.weights = weights_of(0.0, 0.0, 1.0);
    auto batch = make_semantic_batch(g, x, y, opt);
    auto params = SemanticParams::init(4, 3, 7, detail::RngStream(2).derive("x"));
    params.unflatten(Eigen::VectorXd::Zero(params.size()));
    const auto parts = semantic_loss(params, batch);
    CHECK(parts.label == Catch::Approx(std::log(7.0)).epsilon(1e-12));
    CHECK(parts.total == Catch::Approx(std::log(7.0)).epsilon(1e-12));
}

TEST_CASE("semantic gradients match central finite differences") {
    const std::vector<plan::LossWeights> configs = {
        weights_of(1.0, 0.0, 0.0), weights_of(0.0, 1.0, 0.0), weights_of(0.0, 0.0, 1.0),
        weights_of(0.5, 0.3, 0.2)};
    for (std::uint64_t seed : {1ull, 2ull, 3ull}) {
        auto g = random_tag(seed, 10, 3);
        const auto x = random_matrix(10, 6, seed + 100);
        const auto y = random_distribution_rows(10, 3, seed + 200);
        for (std::size_t c = 0; c < configs.size(); ++c) {
            TrainOptions opt;
            opt.hidden = 5;
            opt.tau = 0.7;
            opt.seed = seed;
            opt.weights = configs[c];
            auto batch = make_semantic_batch(g, x, y, opt);
            auto params = SemanticParams::init(6, 5, 3, detail::RngStream(seed).derive("p", c));

            SemanticParams grad = params.zeros_like();
            semantic_loss(params, batch, &grad);
            auto loss_at = [&](const Eigen::VectorXd& theta) {
                SemanticParams p = params;
                p.unflatten(theta);
                return semantic_loss(p, batch).total;
            };
            const double rel = fd_relative_error(params, grad.flatten(), loss_at);
            INFO("seed " << seed << " config " << c);
            CHECK(rel < 1e-6);
        }
    }
}

namespace {

// Finite differences step through the |h_i - h_j| kink if some pair feature
// coordinate sits near zero; pick instances that stay clear of it.
bool pair_features_clear_of_kink(const StructuralParams& params, const StructuralBatch& batch,
                                 double margin) {
    const auto f = structural_forward(params, batch);
    auto scan = [&](const std::vector<std::pair<int, int>>& pairs) {
        for (const auto& [i, j] : pairs) {
            const Eigen::VectorXd diff = (f.h.row(i) - f.h.row(j)).transpose();
            if (diff.cwiseAbs().minCoeff() < margin) return false;
        }
        return true;
    };
    return scan(batch.pairs.positives) && scan(batch.pairs.negatives);
}

}  // namespace

TEST_CASE("structural gradients match central finite differences") {
    const std::vector<plan::LossWeights> configs = {
        weights_of(1.0, 0.0, 0.0), weights_of(0.0, 1.0, 0.0), weights_of(0.0, 0.0, 1.0),
        weights_of(0.4, 0.4, 0.2)};
    int checked = 0;
    std::uint64_t seed = 1;
    while (checked < 3 && seed < 40) {
        auto g = random_tag(seed, 10, 3);
        const auto x = random_matrix(10, 6, seed + 300);
        const auto hsem = random_matrix(10, 5, seed + 400);
        TrainOptions opt;
        opt.hidden = 5;
        opt.seed = seed;
        opt.weights = weights_of(0.4, 0.4, 0.2);
        auto in = make_structural_batch(g, x, hsem, opt);
        in.batch.m1 = &in.m1;
        in.batch.nadj = &in.nadj;
        auto params = StructuralParams::init(6, 5, 3, detail::RngStream(seed).derive("sp"));
        if (!pair_features_clear_of_kink(params, in.batch, 1e-3)) {
            ++seed;
            continue;
        }
        for (std::size_t c = 0; c < configs.size(); ++c) {
            in.batch.weights = configs[c];
            StructuralParams grad = params.zeros_like();
            structural_loss(params, in.batch, &grad);
            auto loss_at = [&](const Eigen::VectorXd& theta) {
                StructuralParams p = params;
                p.unflatten(theta);
                return structural_loss(p, in.batch).total;
            };
            const double rel = fd_relative_error(params, grad.flatten(), loss_at);
            INFO("seed " << seed << " config " << c);
            CHECK(rel < 1e-6);
        }
        ++checked;
        ++seed;
    }
    CHECK(checked == 3);
}

TEST_CASE("edge probability is exactly symmetric") {
    auto params = StructuralParams::init(4, 6, 2, detail::RngStream(9).derive("s"));
    detail::RngStream rng(17);
    for (int t = 0; t < 50; ++t) {
        Eigen::VectorXd a(6), b(6);
        for (int k = 0; k < 6; ++k) {
            a(k) = rng.next_normal();
            b(k) = rng.next_normal();
        }
        CHECK(edge_probability(params, a, b) == edge_probability(params, b, a));
    }
}

TEST_CASE("balanced edge loss matches its per-pair definition") {
    auto g = random_tag(5, 9, 2);
    const auto x = random_matrix(9, 4, 55);
    TrainOptions opt;
    opt.hidden = 4;
    opt.seed = 5;
    opt.weights = weights_of(0.0, 1.0, 0.0);
    Eigen::MatrixXd hsem;  // unused under beta-only weights
    auto in = make_structural_batch(g, x, hsem, opt);
    in.batch.m1 = &in.m1;
    in.batch.nadj = &in.nadj;
    auto params = StructuralParams::init(4, 4, 2, detail::RngStream(5).derive("sp"));
    const auto parts = structural_loss(params, in.batch);

    const auto f = structural_forward(params, in.batch);
    double pos = 0.0, neg = 0.0;
    for (const auto& [i, j] : in.batch.pairs.positives) {
        const double a = edge_probability(params, f.h.row(i).transpose(), f.h.row(j).transpose());
        pos += (1.0 - a) * (1.0 - a);
    }
    for (const auto& [i, j] : in.batch.pairs.negatives) {
        const double a = edge_probability(params, f.h.row(i).transpose(), f.h.row(j).transpose());
        neg += a * a;
    }
    const double expected = 0.5 * pos / in.batch.pairs.positives.size() +
                            0.5 * neg / in.batch.pairs.negatives.size();
    CHECK(parts.structural == Catch::Approx(expected).epsilon(1e-12));
}

TEST_CASE("sampled edge loss agrees with the full frame in expectation") {
    auto g = random_tag(8, 12, 2, 0.3);
    REQUIRE(g.m() > 6);
    const auto x = random_matrix(12, 5, 88);
    auto params = StructuralParams::init(5, 4, 2, detail::RngStream(12).derive("sp"));

    const auto nadj = normalized_adjacency(g);
    const Eigen::MatrixXd m1 = nadj * x;
    auto loss_with_frame = [&](PairFrame frame) {
        StructuralBatch batch;
        batch.m1 = &m1;
        batch.nadj = &nadj;
        batch.pairs = std::move(frame);
        batch.weights = weights_of(0.0, 1.0, 0.0);
        return structural_loss(params, batch).structural;
    };

    PairFrame full;
    full.positives = g.edges();
    for (int u = 0; u < g.n(); ++u)
        for (int v = u + 1; v < g.n(); ++v)
            if (!g.has_edge(u, v)) full.negatives.emplace_back(u, v);
    const double full_loss = loss_with_frame(full);

    detail::RngStream rng(99);
    std::vector<double> draws;
    for (int t = 0; t < 200; ++t)
        draws.push_back(loss_with_frame(sample_pair_frame(g, 5, rng.derive("resample", t))));
    const double mean = std::accumulate(draws.begin(), draws.end(), 0.0) / draws.size();
    double var = 0.0;
    for (double d : draws) var += (d - mean) * (d - mean);
    var /= draws.size() - 1;
    const double stderr_mean = std::sqrt(var / draws.size());
    CHECK(std::abs(mean - full_loss) <= 3.0 * stderr_mean + 1e-12);
}

TEST_CASE("training runs are deterministic and finite") {
    auto g = make_synthetic_tag({.num_classes = 3, .nodes_per_class = 12, .seed = 4});
    const auto feats = encode_graph_features(g, 256);
    const auto y = random_distribution_rows(g.n(), 3, 77);
    TrainOptions opt;
    opt.hidden = 8;
    opt.epochs = 30;
    opt.seed = 13;
    opt.weights = weights_of(0.4, 0.3, 0.3);

    const auto sem_a = train_semantic(g, feats.rows, y, opt);
    const auto sem_b = train_semantic(g, feats.rows, y, opt);
    CHECK(sem_a.loss_trace == sem_b.loss_trace);
    CHECK(sem_a.embeddings == sem_b.embeddings);
    CHECK(sem_a.embeddings.allFinite());

    const auto stu_a = train_structural(g, feats.rows, sem_a.embeddings, opt);
    const auto stu_b = train_structural(g, feats.rows, sem_b.embeddings, opt);
    CHECK(stu_a.loss_trace == stu_b.loss_trace);
    CHECK(stu_a.embeddings == stu_b.embeddings);
    CHECK(stu_a.embeddings.allFinite());
    CHECK(sem_a.loss_trace.front() > sem_a.loss_trace.back());
}

TEST_CASE("supervised-only training is non-increasing at small lr") {
    auto g = make_synthetic_tag({.num_classes = 2, .nodes_per_class = 10, .seed = 6});
    const auto feats = encode_graph_features(g, 128);
    Eigen::MatrixXd y = Eigen::MatrixXd::Constant(g.n(), 2, 0.5);
    TrainOptions opt;
    opt.hidden = 8;
    opt.epochs = 50;
    opt.learning_rate = 1e-3;
    opt.seed = 3;
    opt.weights = weights_of(0.0, 0.0, 1.0);

    const auto sem = train_semantic(g, feats.rows, y, opt);
    for (std::size_t i = 1; i < sem.loss_trace.size(); ++i)
        CHECK(sem.loss_trace[i] <= sem.loss_trace[i - 1] + 1e-12);

    Eigen::MatrixXd hsem;
    const auto stu = train_structural(g, feats.rows, hsem, opt);
    for (std::size_t i = 1; i < stu.loss_trace.size(); ++i)
        CHECK(stu.loss_trace[i] <= stu.loss_trace[i - 1] + 1e-12);
}

TEST_CASE("learned state round-trips through its binary file") {
    auto g = make_synthetic_tag({.num_classes = 3, .nodes_per_class = 8, .seed = 10});
    const auto feats = encode_graph_features(g, 64);
    const auto y = random_distribution_rows(g.n(), 3, 31);
    TrainOptions opt;
    opt.hidden = 6;
    opt.epochs = 10;
    opt.seed = 21;
    opt.weights = weights_of(0.3, 0.4, 0.3);
    const auto sem = train_semantic(g, feats.rows, y, opt);
    const auto stu = train_structural(g, feats.rows, sem.embeddings, opt);
    const auto state = assemble_state(sem, stu, 64, opt.seed, "cfg-hash");
    REQUIRE(state.is_finite());

    const auto path = std::filesystem::temp_directory_path() / "laga_state_test.bin";
    save_state(state, path);
    const auto back = load_state(path);

    CHECK(back.n == state.n);
    CHECK(back.hidden == state.hidden);
    CHECK(back.classes == state.classes);
    CHECK(back.feature_dim == 64);
    CHECK(back.seed == state.seed);
    CHECK(back.config_hash == "cfg-hash");
    CHECK(back.h_sem == state.h_sem);
    CHECK(back.sem_logits == state.sem_logits);
    CHECK(back.h_stu == state.h_stu);
    CHECK(back.stu_logits == state.stu_logits);
    CHECK(back.structural.flatten() == state.structural.flatten());
    CHECK(back.semantic.flatten() == state.semantic.flatten());
    CHECK(back.semantic_trace == state.semantic_trace);
    CHECK(back.structural_trace == state.structural_trace);

    const auto path2 = std::filesystem::temp_directory_path() / "laga_state_test2.bin";
    save_state(back, path2);
    std::ifstream a(path, std::ios::binary), b(path2, std::ios::binary);
    std::string bytes_a((std::istreambuf_iterator<char>(a)), std::istreambuf_iterator<char>());
    std::string bytes_b((std::istreambuf_iterator<char>(b)), std::istreambuf_iterator<char>());
    CHECK(bytes_a == bytes_b);
    std::filesystem::remove(path);
    std::filesystem::remove(path2);

    SECTION("edge probability queries") {
        CHECK_THROWS_AS(predict_edge_probability(state, 2, 2), TrainingError);
        CHECK_THROWS_AS(predict_edge_probability(state, 0, state.n), TrainingError);
        const double p01 = predict_edge_probability(state, 0, 1);
        CHECK(p01 == predict_edge_probability(state, 1, 0));
        CHECK(p01 > 0.0);
        CHECK(p01 < 1.0);
        std::vector<std::pair<int, int>> pairs;
        for (int i = 0; i < state.n; ++i)
            for (int j = i + 1; j < state.n; ++j) pairs.emplace_back(i, j);
        const auto batch_probs = predict_edge_probabilities(state, pairs);
        for (std::size_t k = 0; k < pairs.size(); ++k)
            CHECK(batch_probs[k] ==
                  predict_edge_probability(state, pairs[k].first, pairs[k].second));
    }

    SECTION("isolated embedding matches the trunk formula") {
        Eigen::VectorXd xrow = feats.rows.row(0).transpose();
        const auto h = embed_isolated(state, xrow);
        const Eigen::VectorXd h1 =
            (state.structural.w1.transpose() * xrow + state.structural.b1).array().tanh();
        const Eigen::VectorXd expect =
            (state.structural.w2.transpose() * h1 + state.structural.b2).array().tanh();
        CHECK(h == expect);
        CHECK(h.size() == state.hidden);
    }
}
