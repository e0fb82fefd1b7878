#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "laga/act/generate.hpp"
#include "laga/act/label_opt.hpp"
#include "laga/act/partition.hpp"
#include "laga/act/program.hpp"
#include "laga/act/structure_opt.hpp"
#include "laga/act/text_repair.hpp"
#include "laga/learn/augment.hpp"

using namespace laga;
using namespace laga::act;

namespace {

TextAttributedGraph text_graph(const std::vector<std::string>& texts,
                               const std::vector<std::pair<int, int>>& edges, int classes = 2) {
    std::vector<NodeRecord> nodes(texts.size());
    for (std::size_t i = 0; i < texts.size(); ++i) {
        nodes[i].id = static_cast<int>(i);
        nodes[i].text = texts[i];
        nodes[i].label = 0;
        nodes[i].split = Split::train;
    }
    return TextAttributedGraph::create(std::move(nodes), edges, classes);
}

// Symmetric probability table with a default for unlisted pairs.
EdgeProbFn prob_table(std::map<std::pair<int, int>, double> table, double fallback = 0.1) {
    return [table = std::move(table), fallback](int i, int j) {
        const auto key = std::minmax(i, j);
        auto it = table.find({key.first, key.second});
        return it == table.end() ? fallback : it->second;
    };
}

// State whose encoders are all-zero: every edge probability collapses to
// sigmoid(c2) and every label row to the softmax of the given logits.
learn::LearnedState zero_state(int n, int feature_dim, int hidden, int classes, double c2) {
    learn::LearnedState s;
    s.n = n;
    s.hidden = hidden;
    s.classes = classes;
    s.feature_dim = feature_dim;
    s.h_sem = Eigen::MatrixXd::Zero(n, hidden);
    s.sem_logits = Eigen::MatrixXd::Zero(n, classes);
    s.h_stu = Eigen::MatrixXd::Zero(n, hidden);
    s.stu_logits = Eigen::MatrixXd::Zero(n, classes);
    s.semantic.w1 = Eigen::MatrixXd::Zero(feature_dim, hidden);
    s.semantic.b1 = Eigen::VectorXd::Zero(hidden);
    s.semantic.w2 = Eigen::MatrixXd::Zero(hidden, hidden);
    s.semantic.b2 = Eigen::VectorXd::Zero(hidden);
    s.semantic.wc = Eigen::MatrixXd::Zero(hidden, classes);
    s.semantic.bc = Eigen::VectorXd::Zero(classes);
    s.structural.w1 = Eigen::MatrixXd::Zero(feature_dim, hidden);
    s.structural.b1 = Eigen::VectorXd::Zero(hidden);
    s.structural.w2 = Eigen::MatrixXd::Zero(hidden, hidden);
    s.structural.b2 = Eigen::VectorXd::Zero(hidden);
    s.structural.wc = Eigen::MatrixXd::Zero(hidden, classes);
    s.structural.bc = Eigen::VectorXd::Zero(classes);
    s.structural.v1 = Eigen::MatrixXd::Zero(2 * hidden, hidden);
    s.structural.c1 = Eigen::VectorXd::Zero(hidden);
    s.structural.v2 = Eigen::VectorXd::Zero(hidden);
    s.structural.c2 = c2;
    return s;
}

std::vector<std::string> texts_of(const TextAttributedGraph& g) {
    std::vector<std::string> out;
    for (int v = 0; v < g.n(); ++v) out.push_back(g.node(v).text);
    return out;
}

}  // namespace

TEST_CASE("denoise drops garbage and out-of-vocabulary tokens") {
    const auto g = text_graph({"graph x7#q neural zzzq network",
                               "graph neural network models",
                               "graph network analysis"},
                              {{0, 1}, {1, 2}});
    const auto aug = learn::augment_texts(g, {}, nullptr);
    const auto result = repair_texts(g, {0}, TextTask::denoise, nullptr, aug, nullptr, {});
    CHECK(result.texts[0] == "graph neural network");
    CHECK(result.texts[1] == g.node(1).text);
    REQUIRE(result.edits.size() == 1);
    CHECK(result.edits[0].node == 0);
    CHECK(result.edits[0].fallback);
    CHECK(result.edits[0].before == "graph x7#q neural zzzq network");
}

TEST_CASE("denoise keeps the original surface form of retained tokens") {
    const auto g = text_graph({"Gr@ph Networks,", "graph networks", "graph networks"}, {});
    const auto aug = learn::augment_texts(g, {}, nullptr);
    const auto result = repair_texts(g, {0}, TextTask::denoise, nullptr, aug, nullptr, {});
    // "Gr@ph" carries interior punctuation, so it is garbage; "Networks,"
    // normalizes into the vocabulary and keeps its casing and punctuation.
    CHECK(result.texts[0] == "Networks,");
}

TEST_CASE("completion appends ranked neighbor keywords") {
    const auto g = text_graph({"graph", "spectral clustering methods", "graph neural network"},
                              {{0, 1}, {0, 2}});
    const auto aug = learn::augment_texts(g, {}, nullptr);

    SECTION("id order without a probability oracle") {
        const auto result = repair_texts(g, {0}, TextTask::complete, nullptr, aug, nullptr, {});
        CHECK(result.texts[0] == "graph clustering methods spectral network neural");
    }
    SECTION("probability order ranks the stronger neighbor first") {
        const auto probs = prob_table({{{0, 1}, 0.2}, {{0, 2}, 0.9}});
        const auto result = repair_texts(g, {0}, TextTask::complete, nullptr, aug, probs, {});
        CHECK(result.texts[0] == "graph network neural clustering methods");
    }
}

TEST_CASE("completion of an isolated node falls back to its own keywords") {
    const auto g = text_graph({"sparse topic", "other text entirely", "other text entirely"}, {});
    const auto aug = learn::augment_texts(g, {}, nullptr);
    const auto result = repair_texts(g, {0}, TextTask::complete, nullptr, aug, nullptr, {});
    // Its own keywords are already present, so the text survives unchanged.
    CHECK(result.texts[0] == "sparse topic");
    CHECK(result.edits[0].after == result.edits[0].before);
}

TEST_CASE("text repair with an empty target list is the identity") {
    const auto g = text_graph({"alpha beta", "gamma delta"}, {{0, 1}});
    const auto aug = learn::augment_texts(g, {}, nullptr);
    const auto result = repair_texts(g, {}, TextTask::denoise, nullptr, aug, nullptr, {});
    CHECK(result.texts == texts_of(g));
    CHECK(result.edits.empty());
}

TEST_CASE("text provider output wins over the fallback and failures fall through") {
    const auto g = text_graph({"graph x7#q", "graph data", "graph data"}, {{0, 1}});
    const auto aug = learn::augment_texts(g, {}, nullptr);
    const TextProvider provider = [](TextTask, int node, const std::string&,
                                     const std::string&) -> std::optional<std::string> {
        if (node == 0) return "rewritten text";
        return std::nullopt;
    };
    const auto result = repair_texts(g, {0, 1}, TextTask::denoise, provider, aug, nullptr, {});
    CHECK(result.texts[0] == "rewritten text");
    CHECK_FALSE(result.edits[0].fallback);
    CHECK(result.edits[1].fallback);  // provider declined node 1
    CHECK(result.texts[1] == "graph data");
}

TEST_CASE("text repair is idempotent") {
    const auto g = text_graph({"graph x7#q neural zzzq network",
                               "graph neural network models",
                               "graph network analysis stuff",
                               "short"},
                              {{0, 1}, {1, 2}, {2, 3}, {0, 3}});
    const auto aug = learn::augment_texts(g, {}, nullptr);
    const auto probs = prob_table({{{0, 1}, 0.8}, {{2, 3}, 0.7}}, 0.3);

    for (TextTask task : {TextTask::denoise, TextTask::complete}) {
        const auto once = repair_texts(g, {0, 3}, task, nullptr, aug, probs, {});
        auto nodes = g.copy_nodes();
        for (int v = 0; v < g.n(); ++v) nodes[v].text = once.texts[v];
        const auto repaired = g.with_nodes(std::move(nodes));
        const auto twice = repair_texts(repaired, {0, 3}, task, nullptr, aug, probs, {});
        CHECK(twice.texts == once.texts);
    }
}

TEST_CASE("structure completion follows the worked example") {
    // Node 0 sits at degree 1 with a ceiling of 3. Candidate peers score
    // 0.7, 0.5 and 0.35 against a threshold of 0.4: exactly the first two
    // edges appear, highest probability first.
    const auto g = text_graph({"a", "b", "c", "d", "e"}, {{0, 1}});
    const auto probs = prob_table({{{0, 2}, 0.7}, {{0, 3}, 0.5}, {{0, 4}, 0.35}}, 0.1);
    OptimizeConfig cfg;
    cfg.k_edge = 3;
    cfg.tau_edge = 0.4;

    const auto result = optimize_structure(g, {{0, 1, 2, 3, 4}}, probs, cfg, false, true);
    REQUIRE(result.added.size() == 2);
    CHECK(result.added[0].node == 0);
    CHECK(result.added[0].peer == 2);
    CHECK(result.added[0].probability == Catch::Approx(0.7));
    CHECK(result.added[0].degree_before == 1);
    CHECK(result.added[1].peer == 3);
    CHECK(result.added[1].degree_before == 2);
    CHECK(result.removed.empty());
    const std::vector<std::pair<int, int>> expect = {{0, 1}, {0, 2}, {0, 3}};
    CHECK(result.edges == expect);
}

TEST_CASE("structure pruning removes weak intra-community edges only") {
    const auto g = text_graph({"a", "b", "c", "d"}, {{0, 1}, {1, 2}, {0, 3}});
    const auto probs = prob_table({{{0, 1}, 0.3}, {{1, 2}, 0.8}, {{0, 3}, 0.3}});
    OptimizeConfig cfg;
    cfg.tau_edge = 0.4;

    const auto result = optimize_structure(g, {{0, 1, 2}}, probs, cfg, true, false);
    REQUIRE(result.removed.size() == 1);
    CHECK(result.removed[0].u == 0);
    CHECK(result.removed[0].v == 1);
    // The equally weak 0-3 edge crosses the community boundary and survives.
    const std::vector<std::pair<int, int>> expect = {{0, 3}, {1, 2}};
    CHECK(result.edges == expect);
}

TEST_CASE("structure optimization is idempotent") {
    const auto g = text_graph({"a", "b", "c", "d", "e", "f"},
                              {{0, 1}, {0, 2}, {1, 2}, {3, 4}});
    const auto probs = prob_table(
        {{{0, 1}, 0.2}, {{0, 2}, 0.9}, {{1, 2}, 0.55}, {{3, 4}, 0.3}, {{3, 5}, 0.8}, {{4, 5}, 0.7}},
        0.05);
    OptimizeConfig cfg;
    cfg.k_edge = 2;
    cfg.tau_edge = 0.5;
    const std::vector<std::vector<int>> flagged = {{0, 1, 2}, {3, 4, 5}};

    const auto once = optimize_structure(g, flagged, probs, cfg);
    const auto again = optimize_structure(g.with_edges(once.edges), flagged, probs, cfg);
    CHECK(again.edges == once.edges);
    CHECK(again.removed.empty());
    CHECK(again.added.empty());
}

TEST_CASE("label confidence closed forms") {
    CHECK(label_confidence(0.8, 0.1, 0.5) == Catch::Approx(std::sqrt(0.56)).margin(1e-12));
    CHECK(label_confidence(0.8, 0.15, 1.0) == Catch::Approx(0.8).margin(1e-12));
    CHECK(label_confidence(0.7, 0.3, 0.0) == Catch::Approx(0.4).margin(1e-12));
    CHECK(label_confidence(0.5, 0.5, 0.5) == 0.0);
    CHECK(label_confidence(0.0, 0.0, 0.5) == 0.0);

    // Confidence grows with the top probability when the runner-up is fixed.
    double prev = 0.0;
    for (double p : {0.3, 0.5, 0.7, 0.9}) {
        const double c = label_confidence(p, 0.1, 0.5);
        CHECK(c > prev);
        prev = c;
    }
}

TEST_CASE("label repair takes the confidence path above the threshold") {
    auto nodes = std::vector<NodeRecord>(3);
    for (int i = 0; i < 3; ++i) {
        nodes[i].id = i;
        nodes[i].text = "t";
        nodes[i].split = Split::unlabeled;
    }
    const auto g = TextAttributedGraph::create(std::move(nodes), {{0, 1}, {0, 2}}, 4);

    auto state = zero_state(3, 4, 2, 4, 0.0);
    state.stu_logits.row(0) << std::log(0.8), std::log(0.1), std::log(0.06), std::log(0.04);

    OptimizeConfig cfg;
    cfg.tau_lape = 0.7;
    const auto result = optimize_labels(g, {0}, state, prob_table({}), cfg);
    REQUIRE(result.edits.size() == 1);
    const auto& edit = result.edits[0];
    CHECK(edit.path == LabelPath::confidence);
    CHECK(edit.confidence == Catch::Approx(std::sqrt(0.56)).margin(1e-12));
    CHECK(edit.after == 0);
    CHECK(edit.split_promoted);

    const auto applied = apply_label_edits(g, result);
    CHECK(applied.node(0).label == 0);
    CHECK(applied.node(0).split == Split::train);
    CHECK(applied.node(1).split == Split::unlabeled);
}

TEST_CASE("label repair falls back to the weighted neighbor vote") {
    auto nodes = std::vector<NodeRecord>(4);
    for (int i = 0; i < 4; ++i) {
        nodes[i].id = i;
        nodes[i].text = "t";
        nodes[i].split = Split::train;
    }
    nodes[0].split = Split::unlabeled;
    nodes[1].label = 0;
    nodes[2].label = 0;
    nodes[3].label = 1;
    const auto g =
        TextAttributedGraph::create(std::move(nodes), {{0, 1}, {0, 2}, {0, 3}}, 2);

    const auto state = zero_state(4, 4, 2, 2, 0.0);  // uniform rows: confidence 0
    const auto probs = prob_table({{{0, 1}, 0.9}, {{0, 2}, 0.3}, {{0, 3}, 0.8}});

    SECTION("votes accumulate per class") {
        // Class 0 collects 0.9 + 0.3 = 1.2 against 0.8 for class 1.
        const auto result = optimize_labels(g, {0}, state, probs, {});
        REQUIRE(result.edits.size() == 1);
        CHECK(result.edits[0].path == LabelPath::vote);
        CHECK(result.edits[0].after == 0);
    }
    SECTION("flagged neighbors do not vote") {
        const auto result = optimize_labels(g, {0, 1}, state, probs, {});
        // Node 1 is under repair itself, so only 0.3 backs class 0.
        CHECK(result.edits[0].after == 1);
    }
    SECTION("no eligible voters skips the node") {
        const auto result = optimize_labels(g, {0, 1, 2, 3}, state, probs, {});
        CHECK(result.edits[0].path == LabelPath::skipped);
        CHECK(result.edits[0].after == result.edits[0].before);
        // Targets with their own visible labels keep them.
        CHECK(result.edits[1].path == LabelPath::skipped);
    }
}

TEST_CASE("label repair is idempotent") {
    auto nodes = std::vector<NodeRecord>(5);
    for (int i = 0; i < 5; ++i) {
        nodes[i].id = i;
        nodes[i].text = "t";
        nodes[i].split = Split::train;
        nodes[i].label = i % 2;
    }
    nodes[0].split = Split::unlabeled;
    nodes[0].label = std::nullopt;
    nodes[1].label = std::nullopt;  // train without label: invisible
    const auto g = TextAttributedGraph::create(
        std::move(nodes), {{0, 1}, {0, 2}, {1, 3}, {1, 4}, {2, 3}}, 2);

    auto state = zero_state(5, 4, 2, 2, 0.0);
    state.stu_logits.row(1) << std::log(0.9), std::log(0.1);
    const auto probs = prob_table({{{0, 2}, 0.6}, {{1, 3}, 0.4}, {{1, 4}, 0.7}}, 0.2);

    const auto once = optimize_labels(g, {0, 1}, state, probs, {});
    const auto repaired = apply_label_edits(g, once);
    const auto twice = optimize_labels(repaired, {0, 1}, state, probs, {});
    REQUIRE(once.edits.size() == twice.edits.size());
    for (std::size_t k = 0; k < once.edits.size(); ++k) {
        CHECK(twice.edits[k].after == once.edits[k].after);
        CHECK(twice.edits[k].path == once.edits[k].path);
    }
    CHECK(apply_label_edits(repaired, twice) == repaired);
}

TEST_CASE("generation threshold and deficits follow the class means") {
    // Visible counts 100/40/10 with a rate of 0.5 put the bar at 25: only the
    // third class falls short, by ceil(25 - 10) = 15 nodes.
    std::vector<NodeRecord> nodes(150);
    for (int i = 0; i < 150; ++i) {
        nodes[i].id = i;
        nodes[i].text = "paper about topic " + std::to_string(i % 7);
        nodes[i].split = Split::train;
        nodes[i].label = i < 100 ? 0 : (i < 140 ? 1 : 2);
    }
    const auto g = TextAttributedGraph::create(std::move(nodes), {}, 3);
    const auto state = zero_state(150, 8, 2, 3, -2.0);  // all probabilities ~0.12

    OptimizeConfig cfg;
    cfg.r_gen = 0.5;
    const auto result = generate_nodes(g, state, nullptr, cfg);
    CHECK(result.tau_gen == Catch::Approx(25.0));
    CHECK(result.deficits == std::vector<int>{0, 0, 15});
    REQUIRE(result.nodes.size() == 15);
    for (const auto& node : result.nodes) {
        CHECK(node.label == 2);
        CHECK(node.fallback);
        CHECK_FALSE(node.text.empty());
        CHECK(node.edges.empty());  // every probability sits below the threshold
    }

    const auto extended = apply_generated_nodes(g, result);
    CHECK(extended.n() == 165);
    CHECK(extended.node(150).generated);
    CHECK(extended.node(150).split == Split::train);
    CHECK(extended.node(150).label == 2);

    // A state sized for the extended graph finds nothing left to generate:
    // the threshold ignores synthetic nodes, the counts include them.
    const auto state2 = zero_state(165, 8, 2, 3, -2.0);
    const auto again = generate_nodes(extended, state2, nullptr, cfg);
    CHECK(again.tau_gen == Catch::Approx(25.0));
    CHECK(again.nodes.empty());
}

TEST_CASE("generated nodes wire to the strongest existing peers") {
    std::vector<NodeRecord> nodes(9);
    for (int i = 0; i < 9; ++i) {
        nodes[i].id = i;
        nodes[i].text = "document " + std::to_string(i);
        nodes[i].split = Split::train;
        nodes[i].label = i < 5 ? 0 : (i < 8 ? 1 : 2);
    }
    const auto g = TextAttributedGraph::create(std::move(nodes), {}, 3);
    const auto state = zero_state(9, 8, 2, 3, 2.0);  // all probabilities ~0.88

    OptimizeConfig cfg;
    cfg.r_gen = 0.9;  // bar at 0.9 * 9 / 3 = 2.7; only class 2 is short
    cfg.k_edge = 3;
    cfg.tau_edge = 0.5;
    const auto result = generate_nodes(g, state, nullptr, cfg);
    CHECK(result.deficits == std::vector<int>{0, 0, 2});
    REQUIRE(result.nodes.size() == 2);
    for (const auto& node : result.nodes) {
        REQUIRE(node.edges.size() == 3);
        // Equal scores everywhere: the tie breaks toward the lowest ids.
        CHECK(node.edges[0].first == 0);
        CHECK(node.edges[1].first == 1);
        CHECK(node.edges[2].first == 2);
        for (const auto& [peer, p] : node.edges) {
            CHECK(peer < 9);
            CHECK(p > cfg.tau_edge);
        }
    }
    const auto extended = apply_generated_nodes(g, result);
    CHECK(extended.degree(9) == 3);
    CHECK(extended.degree(10) == 3);
}

TEST_CASE("generation provider text is used when it arrives") {
    std::vector<NodeRecord> nodes(6);
    for (int i = 0; i < 6; ++i) {
        nodes[i].id = i;
        nodes[i].text = "text " + std::to_string(i);
        nodes[i].split = Split::train;
        nodes[i].label = i < 5 ? 0 : 1;
    }
    const auto g = TextAttributedGraph::create(std::move(nodes), {}, 2);
    const auto state = zero_state(6, 8, 2, 2, -2.0);

    OptimizeConfig cfg;
    cfg.r_gen = 0.8;  // bar at 2.4: class 1 needs ceil(1.4) = 2 nodes
    int calls = 0;
    const GenerationProvider provider = [&calls](int cls, const std::string&) {
        ++calls;
        return std::optional<std::string>("synthetic document for class " +
                                          std::to_string(cls));
    };
    const auto result = generate_nodes(g, state, provider, cfg);
    REQUIRE(result.nodes.size() == 2);
    CHECK(calls == 2);
    for (const auto& node : result.nodes) {
        CHECK_FALSE(node.fallback);
        CHECK(node.text == "synthetic document for class 1");
    }
}

namespace {

plan::PlanReport plan_of(std::vector<plan::ActionCandidate> candidates,
                         std::vector<std::size_t> chosen) {
    plan::PlanReport p;
    p.candidates = std::move(candidates);
    p.selection.chosen = std::move(chosen);
    return p;
}

plan::ActionCandidate candidate(plan::ActionKind kind, QualityIssue issue,
                                plan::TargetKind tk, std::vector<int> targets) {
    plan::ActionCandidate c;
    c.kind = kind;
    c.issue = issue;
    c.target_kind = tk;
    c.targets = std::move(targets);
    return c;
}

}  // namespace

TEST_CASE("apply_program with an empty selection returns the graph untouched") {
    const auto g = text_graph({"alpha", "beta"}, {{0, 1}});
    const auto state = zero_state(2, 8, 2, 2, 0.0);
    const auto aug = learn::augment_texts(g, {}, nullptr);
    detect::DetectionReport report;

    const auto result = apply_program(g, plan_of({}, {}), state, aug, report, {}, {});
    CHECK_FALSE(result.aborted);
    CHECK(result.graph == g);
    CHECK(result.log.at("schema") == "changes/1");
    CHECK(result.log.at("actions").empty());
    CHECK(result.log.at("summary").at("texts_changed") == 0);
}

TEST_CASE("apply_program runs pruning before addition regardless of plan order") {
    // Link head reading the first embedding coordinate: pairs whose h[0]
    // values sum to 2 score ~0.62, pairs summing to 0 score ~0.38.
    const auto g = text_graph({"a", "b", "c", "d"}, {{0, 1}, {2, 3}});
    auto state = zero_state(4, 8, 2, 2, -0.5);
    state.h_stu << 1.0, 0.0, -1.0, 0.0, 1.0, 0.0, 1.0, 0.0;
    state.structural.v1(0, 0) = 5.0;
    state.structural.v2 = Eigen::VectorXd::Ones(2);

    // Ceiling of 1: every node starts saturated, so an addition pass that
    // runs first finds nothing to do. Pruning the weak 0-1 edge first frees
    // node 0 to draw the strong 0-2 link.
    OptimizeConfig cfg;
    cfg.k_edge = 1;
    cfg.tau_edge = 0.5;

    detect::DetectionReport report;
    report.communities.resize(1);
    report.communities[0].members = {0, 1, 2, 3};
    report.community_of = {0, 0, 0, 0};

    auto candidates = std::vector<plan::ActionCandidate>{
        candidate(plan::ActionKind::add_edges, QualityIssue::SS, plan::TargetKind::nodes,
                  {0, 1}),
        candidate(plan::ActionKind::prune_edges, QualityIssue::SN, plan::TargetKind::communities,
                  {0}),
    };
    const auto result = apply_program(g, plan_of(std::move(candidates), {0, 1}), state,
                                      learn::augment_texts(g, {}, nullptr), report, {}, cfg);
    REQUIRE_FALSE(result.aborted);
    REQUIRE(result.log.at("actions").size() == 2);
    CHECK(result.log.at("actions").at(0).at("action") == "prune_edges");
    CHECK(result.log.at("actions").at(1).at("action") == "add_edges");

    CHECK_FALSE(result.graph.has_edge(0, 1));
    CHECK(result.graph.has_edge(0, 2));
    CHECK(result.graph.has_edge(2, 3));
}

TEST_CASE("apply_program logs every family and survives a full pass") {
    std::vector<NodeRecord> nodes(8);
    for (int i = 0; i < 8; ++i) {
        nodes[i].id = i;
        nodes[i].text = "graph mining paper number " + std::to_string(i);
        nodes[i].split = Split::train;
        nodes[i].label = i < 6 ? 0 : 1;
    }
    nodes[3].split = Split::unlabeled;
    nodes[3].label = std::nullopt;
    nodes[5].text = "graph x9#z mining";
    const auto g = TextAttributedGraph::create(
        std::move(nodes), {{0, 1}, {1, 2}, {2, 3}, {4, 5}, {6, 7}, {0, 2}}, 2);

    const auto state = zero_state(8, 16, 2, 2, 2.0);
    const auto aug = learn::augment_texts(g, {}, nullptr);
    detect::DetectionReport report;  // none of the chosen actions read it

    OptimizeConfig cfg;
    cfg.r_gen = 0.6;  // bar 0.6 * 7 / 2 = 2.1: class 1 needs one node
    cfg.k_edge = 2;
    cfg.tau_edge = 0.5;

    auto candidates = std::vector<plan::ActionCandidate>{
        candidate(plan::ActionKind::generate_minority_nodes, QualityIssue::LI,
                  plan::TargetKind::classes, {1}),
        candidate(plan::ActionKind::impute_labels, QualityIssue::LS, plan::TargetKind::nodes,
                  {3}),
        candidate(plan::ActionKind::denoise_texts, QualityIssue::TN, plan::TargetKind::nodes,
                  {5}),
        candidate(plan::ActionKind::complete_texts, QualityIssue::TS, plan::TargetKind::nodes,
                  {4}),
    };
    const auto result = apply_program(g, plan_of(std::move(candidates), {0, 1, 2, 3}), state,
                                      aug, report, {}, cfg);
    REQUIRE_FALSE(result.aborted);
    REQUIRE(result.log.at("actions").size() == 4);
    for (const auto& entry : result.log.at("actions"))
        CHECK(entry.at("status") == "applied");

    CHECK(result.graph.n() == 9);          // one synthetic node
    CHECK(result.graph.node(8).generated);
    CHECK(result.graph.node(3).label.has_value());
    CHECK(result.graph.node(3).split == Split::train);

    const auto& summary = result.log.at("summary");
    CHECK(summary.at("nodes_generated") == 1);
    CHECK(summary.at("labels_assigned") == 1);
    CHECK(summary.at("texts_changed").get<int>() >= 1);
}

TEST_CASE("apply_program aborts on a broken action and keeps earlier edits") {
    const auto g = text_graph({"graph q#7x data", "graph data", "graph data"}, {{0, 1}});
    const auto state = zero_state(3, 8, 2, 2, 0.0);
    const auto aug = learn::augment_texts(g, {}, nullptr);
    detect::DetectionReport report;  // no communities: index 5 is invalid

    auto candidates = std::vector<plan::ActionCandidate>{
        candidate(plan::ActionKind::denoise_texts, QualityIssue::TN, plan::TargetKind::nodes,
                  {0}),
        candidate(plan::ActionKind::prune_edges, QualityIssue::SN, plan::TargetKind::communities,
                  {5}),
    };
    const auto result = apply_program(g, plan_of(std::move(candidates), {0, 1}), state, aug,
                                      report, {}, {});
    CHECK(result.aborted);
    CHECK_FALSE(result.error.empty());
    REQUIRE(result.log.at("actions").size() == 2);
    CHECK(result.log.at("actions").at(0).at("status") == "applied");
    CHECK(result.log.at("actions").at(1).at("status") == "failed");
    CHECK(result.graph.node(0).text == "graph data");  // first action landed
    CHECK(result.log.at("summary").at("aborted") == true);
}

TEST_CASE("partitioned optimization with one part is a plain call") {
    const auto g = text_graph({"a", "b", "c"}, {{0, 1}, {1, 2}});
    std::vector<std::uint64_t> seeds;
    const LocalOptimizer inner = [&seeds](const TextAttributedGraph& part, std::uint64_t seed) {
        seeds.push_back(seed);
        return part;
    };
    const auto result = partitioned_optimize(g, 1, inner, 42);
    CHECK(result == g);
    REQUIRE(seeds.size() == 1);
    CHECK(seeds[0] == 42);
}

TEST_CASE("partitioned optimization splits along communities and merges back") {
    // Two triangles joined by a single bridge: Louvain separates them.
    const auto g = text_graph({"a", "b", "c", "d", "e", "f"},
                              {{0, 1}, {0, 2}, {1, 2}, {3, 4}, {3, 5}, {4, 5}, {2, 3}});
    std::vector<std::uint64_t> seeds;
    std::vector<int> part_sizes;
    const LocalOptimizer inner = [&](const TextAttributedGraph& part, std::uint64_t seed) {
        seeds.push_back(seed);
        part_sizes.push_back(part.n());
        auto nodes = part.copy_nodes();
        for (auto& rec : nodes) rec.text += " touched";
        return part.with_nodes(std::move(nodes));
    };
    const auto result = partitioned_optimize(g, 2, inner, 7);

    REQUIRE(seeds.size() == 2);
    CHECK(seeds[0] != seeds[1]);
    CHECK(seeds[0] == detail::RngStream(7).derive("part", 0).seed());
    CHECK(seeds[1] == detail::RngStream(7).derive("part", 1).seed());
    CHECK(part_sizes == std::vector<int>{3, 3});

    CHECK(result.n() == 6);
    for (int v = 0; v < 6; ++v)
        CHECK(result.node(v).text == g.node(v).text + " touched");
    // Every original edge survives, including the cross-part bridge.
    CHECK(result.copy_edges() == g.copy_edges());
}

TEST_CASE("partitioned optimization caps the part count at the community count") {
    const auto g = text_graph({"a", "b", "c", "d", "e", "f"},
                              {{0, 1}, {0, 2}, {1, 2}, {3, 4}, {3, 5}, {4, 5}});
    int calls = 0;
    const LocalOptimizer inner = [&calls](const TextAttributedGraph& part, std::uint64_t) {
        ++calls;
        return part;
    };
    const auto result = partitioned_optimize(g, 10, inner, 3);
    CHECK(calls == 2);
    CHECK(result == g);
}

TEST_CASE("nodes generated inside a part receive fresh merged ids") {
    const auto g = text_graph({"a", "b", "c", "d", "e", "f"},
                              {{0, 1}, {0, 2}, {1, 2}, {3, 4}, {3, 5}, {4, 5}});
    const LocalOptimizer inner = [](const TextAttributedGraph& part, std::uint64_t) {
        auto nodes = part.copy_nodes();
        auto edges = part.copy_edges();
        NodeRecord extra;
        extra.id = part.n();
        extra.text = "synthetic";
        extra.label = 0;
        extra.split = Split::train;
        extra.generated = true;
        edges.emplace_back(0, extra.id);  // local id 0 maps back to an original
        nodes.push_back(std::move(extra));
        return TextAttributedGraph::create(std::move(nodes), std::move(edges),
                                           part.num_classes(), part.metadata());
    };
    const auto result = partitioned_optimize(g, 2, inner, 11);
    CHECK(result.n() == 8);
    CHECK(result.node(6).generated);
    CHECK(result.node(7).generated);
    // Each synthetic node leans on its own part's anchor node.
    int anchored = 0;
    for (const auto& [u, v] : result.copy_edges())
        if (v >= 6) ++anchored;
    CHECK(anchored == 2);
}
