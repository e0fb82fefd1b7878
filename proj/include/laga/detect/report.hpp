#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "laga/core/graph.hpp"
#include "laga/detect/config.hpp"
#include "laga/detect/label_metrics.hpp"
#include "laga/detect/louvain.hpp"
#include "laga/detect/structure_metrics.hpp"
#include "laga/detect/text_metrics.hpp"

namespace laga::detect {

inline constexpr const char* kReportSchema = "detect/1";

struct MissingLabelFlag {
    int node = 0;
    std::optional<int> predicted;
    double confidence = 0.0;
};

struct NoisyLabelFlag {
    int node = 0;
    int current = 0;
    int predicted = 0;
    double confidence = 0.0;
};

struct CommunityReport {
    std::vector<int> members;
    CommunityStats stats;
};

struct DetectionReport {
    int num_nodes = 0;
    int num_edges = 0;
    int num_classes = 1;

    // Per-node text metrics and flag lists.
    std::vector<int> degrees;
    std::vector<int> token_counts;
    std::vector<double> noise_rate;
    std::vector<double> informativeness;
    std::vector<int> sparse_text_nodes, noisy_text_nodes, uninformative_text_nodes;
    double tau_informativeness = 0.0;

    // Community structure.
    std::vector<CommunityReport> communities;
    double modularity = 0.0;
    double degree_variance = 0.0;
    double degree_gini = 0.0;
    bool degree_imbalanced = false;
    std::vector<int> sparse_communities, noisy_communities;

    // Labels.
    std::vector<MissingLabelFlag> missing_labels;
    std::vector<NoisyLabelFlag> noisy_labels;
    std::vector<double> class_distribution;
    double label_imbalance_ratio = 0.0;
    int visible_labeled = 0;

    // Corpus-level summary scalars consumed by planning.
    double mean_token_count = 0.0;
    double cv_token_count = 0.0;
    double mean_noise_rate = 0.0;
    double mean_informativeness = 0.0;
    double sparse_text_fraction = 0.0;
    double noisy_text_fraction = 0.0;
    double uninformative_text_fraction = 0.0;
    double sparse_community_fraction = 0.0;
    double noisy_community_fraction = 0.0;
    double missing_label_fraction = 0.0;
    double noisy_label_fraction = 0.0;
    double visible_labeled_fraction = 0.0;

    DetectionConfig config;

    std::vector<int> community_of;  // node -> community index

    nlohmann::ordered_json to_json() const;
    static DetectionReport from_json(const nlohmann::json& j);
};

inline DetectionReport assemble_report(const TextAttributedGraph& g,
                                       const TextDiagnostics& text,
                                       const CommunityPartition& partition,
                                       const StructureDiagnostics& structure,
                                       const LabelDiagnostics& labels,
                                       const DetectionConfig& cfg) {
    DetectionReport r;
    r.num_nodes = g.n();
    r.num_edges = g.m();
    r.num_classes = g.num_classes();
    r.config = cfg;

    r.degrees.resize(g.n());
    for (int v = 0; v < g.n(); ++v) r.degrees[v] = g.degree(v);
    r.token_counts = text.token_counts;
    r.noise_rate = text.noise_rate;
    r.informativeness = text.informativeness;
    r.tau_informativeness = text.tau_informativeness_effective;
    for (int v = 0; v < g.n(); ++v) {
        if (text.sparse[v]) r.sparse_text_nodes.push_back(v);
        if (text.noisy[v]) r.noisy_text_nodes.push_back(v);
        if (text.uninformative[v]) r.uninformative_text_nodes.push_back(v);
    }

    r.communities.resize(partition.communities.size());
    for (std::size_t k = 0; k < partition.communities.size(); ++k) {
        r.communities[k].members = partition.communities[k];
        r.communities[k].stats = structure.communities[k];
    }
    r.community_of = partition.assignment;
    r.modularity = partition.modularity;
    r.degree_variance = structure.degree_variance;
    r.degree_gini = structure.degree_gini;
    r.degree_imbalanced = structure.imbalanced;
    r.sparse_communities = structure.sparse_communities;
    r.noisy_communities = structure.noisy_communities;

    for (int v = 0; v < g.n(); ++v) {
        if (labels.missing[v]) {
            MissingLabelFlag f;
            f.node = v;
            f.predicted = labels.fused[v].label;
            f.confidence = labels.fused[v].confidence;
            r.missing_labels.push_back(f);
        }
        if (labels.suspected_noisy[v]) {
            NoisyLabelFlag f;
            f.node = v;
            f.current = *g.visible_label(v);
            f.predicted = *labels.fused[v].label;
            f.confidence = labels.fused[v].confidence;
            r.noisy_labels.push_back(f);
        }
    }
    r.class_distribution = labels.class_distribution;
    r.label_imbalance_ratio = labels.imbalance_ratio;
    r.visible_labeled = labels.visible_labeled;

    const double n = std::max(1, g.n());
    double token_sum = 0.0;
    for (int c : r.token_counts) token_sum += c;
    r.mean_token_count = token_sum / n;
    double var = 0.0;
    for (int c : r.token_counts) var += (c - r.mean_token_count) * (c - r.mean_token_count);
    var /= n;
    r.cv_token_count = r.mean_token_count > 0 ? std::sqrt(var) / r.mean_token_count : 0.0;
    double noise_sum = 0.0, info_sum = 0.0;
    for (int v = 0; v < g.n(); ++v) {
        noise_sum += r.noise_rate[v];
        info_sum += r.informativeness[v];
    }
    r.mean_noise_rate = noise_sum / n;
    r.mean_informativeness = info_sum / n;
    r.sparse_text_fraction = r.sparse_text_nodes.size() / n;
    r.noisy_text_fraction = r.noisy_text_nodes.size() / n;
    r.uninformative_text_fraction = r.uninformative_text_nodes.size() / n;
    const double num_comm = std::max<std::size_t>(1, r.communities.size());
    r.sparse_community_fraction = r.sparse_communities.size() / num_comm;
    r.noisy_community_fraction = r.noisy_communities.size() / num_comm;
    r.missing_label_fraction = r.missing_labels.size() / n;
    r.noisy_label_fraction = r.noisy_labels.size() / n;
    r.visible_labeled_fraction = r.visible_labeled / n;
    return r;
}

// Runs the full detection pass: text metrics, Louvain communities, structural
// statistics and the two-tool label check.
inline DetectionReport detect_graph(const TextAttributedGraph& g, const Eigen::MatrixXd& features,
                                    const DetectionConfig& cfg) {
    const auto text = compute_text_diagnostics(g, cfg);
    const auto partition = louvain_partition(g);
    const auto structure = compute_structure_diagnostics(g, partition, cfg);
    const auto labels = compute_label_diagnostics(g, features, cfg);
    return assemble_report(g, text, partition, structure, labels, cfg);
}

inline nlohmann::ordered_json DetectionReport::to_json() const {
    nlohmann::ordered_json j;
    j["schema"] = kReportSchema;
    j["log_base"] = "natural";

    nlohmann::ordered_json global;
    global["num_nodes"] = num_nodes;
    global["num_edges"] = num_edges;
    global["num_classes"] = num_classes;
    global["text"] = {{"mean_token_count", mean_token_count},
                      {"cv_token_count", cv_token_count},
                      {"mean_noise_rate", mean_noise_rate},
                      {"mean_informativeness", mean_informativeness},
                      {"sparse_fraction", sparse_text_fraction},
                      {"noisy_fraction", noisy_text_fraction},
                      {"uninformative_fraction", uninformative_text_fraction},
                      {"tau_informativeness", tau_informativeness}};
    global["structure"] = {{"num_communities", communities.size()},
                           {"modularity", modularity},
                           {"degree_variance", degree_variance},
                           {"degree_gini", degree_gini},
                           {"degree_imbalanced", degree_imbalanced},
                           {"sparse_community_fraction", sparse_community_fraction},
                           {"noisy_community_fraction", noisy_community_fraction}};
    global["labels"] = {{"visible_labeled", visible_labeled},
                        {"visible_labeled_fraction", visible_labeled_fraction},
                        {"missing_fraction", missing_label_fraction},
                        {"noisy_fraction", noisy_label_fraction},
                        {"class_distribution", class_distribution},
                        {"imbalance_ratio", label_imbalance_ratio}};
    j["global"] = global;

    nlohmann::ordered_json local;
    local["degrees"] = degrees;
    local["token_counts"] = token_counts;
    local["noise_rate"] = noise_rate;
    local["informativeness"] = informativeness;
    local["sparse_text_nodes"] = sparse_text_nodes;
    local["noisy_text_nodes"] = noisy_text_nodes;
    local["uninformative_text_nodes"] = uninformative_text_nodes;
    local["community_of"] = community_of;
    local["sparse_communities"] = sparse_communities;
    local["noisy_communities"] = noisy_communities;
    local["missing_labels"] = nlohmann::ordered_json::array();
    for (const auto& f : missing_labels) {
        nlohmann::ordered_json e;
        e["node"] = f.node;
        e["predicted"] = f.predicted ? nlohmann::ordered_json(*f.predicted) : nullptr;
        e["confidence"] = f.confidence;
        local["missing_labels"].push_back(e);
    }
    local["noisy_labels"] = nlohmann::ordered_json::array();
    for (const auto& f : noisy_labels)
        local["noisy_labels"].push_back({{"node", f.node},
                                         {"current", f.current},
                                         {"predicted", f.predicted},
                                         {"confidence", f.confidence}});
    j["local"] = local;

    j["communities"] = nlohmann::ordered_json::array();
    for (std::size_t k = 0; k < communities.size(); ++k) {
        const auto& c = communities[k];
        j["communities"].push_back({{"id", k},
                                    {"size", c.stats.size},
                                    {"members", c.members},
                                    {"internal_edges", c.stats.internal_edges},
                                    {"mean_degree", c.stats.mean_degree},
                                    {"density", c.stats.density},
                                    {"density_defined", c.stats.density_defined},
                                    {"structural_entropy", c.stats.structural_entropy},
                                    {"entropy_defined", c.stats.entropy_defined},
                                    {"mean_jaccard", c.stats.mean_jaccard},
                                    {"jaccard_defined", c.stats.jaccard_defined},
                                    {"sparse", c.stats.sparse},
                                    {"noisy", c.stats.noisy}});
    }

    j["thresholds"] = {{"tau_sparse_tokens", config.tau_sparse_tokens},
                       {"tau_noise", config.tau_noise},
                       {"informativeness_percentile", config.informativeness_percentile},
                       {"mean_degree_ref", config.mean_degree_ref},
                       {"density_ref", config.density_ref},
                       {"jaccard_ref", config.jaccard_ref},
                       {"entropy_ref", config.entropy_ref},
                       {"gini_ref", config.gini_ref},
                       {"tau_consistency", config.tau_consistency},
                       {"kmeans_max_k", config.kmeans_max_k},
                       {"kmeans_restarts", config.kmeans_restarts},
                       {"seed", config.seed}};
    return j;
}

inline DetectionReport DetectionReport::from_json(const nlohmann::json& j) {
    if (!j.contains("schema") || j.at("schema").get<std::string>() != kReportSchema)
        throw GraphError("detection report: unsupported schema");
    DetectionReport r;
    const auto& global = j.at("global");
    r.num_nodes = global.at("num_nodes").get<int>();
    r.num_edges = global.at("num_edges").get<int>();
    r.num_classes = global.at("num_classes").get<int>();
    const auto& text = global.at("text");
    r.mean_token_count = text.at("mean_token_count").get<double>();
    r.cv_token_count = text.at("cv_token_count").get<double>();
    r.mean_noise_rate = text.at("mean_noise_rate").get<double>();
    r.mean_informativeness = text.at("mean_informativeness").get<double>();
    r.sparse_text_fraction = text.at("sparse_fraction").get<double>();
    r.noisy_text_fraction = text.at("noisy_fraction").get<double>();
    r.uninformative_text_fraction = text.at("uninformative_fraction").get<double>();
    r.tau_informativeness = text.at("tau_informativeness").get<double>();
    const auto& structure = global.at("structure");
    r.modularity = structure.at("modularity").get<double>();
    r.degree_variance = structure.at("degree_variance").get<double>();
    r.degree_gini = structure.at("degree_gini").get<double>();
    r.degree_imbalanced = structure.at("degree_imbalanced").get<bool>();
    r.sparse_community_fraction = structure.at("sparse_community_fraction").get<double>();
    r.noisy_community_fraction = structure.at("noisy_community_fraction").get<double>();
    const auto& labels = global.at("labels");
    r.visible_labeled = labels.at("visible_labeled").get<int>();
    r.visible_labeled_fraction = labels.at("visible_labeled_fraction").get<double>();
    r.missing_label_fraction = labels.at("missing_fraction").get<double>();
    r.noisy_label_fraction = labels.at("noisy_fraction").get<double>();
    r.class_distribution = labels.at("class_distribution").get<std::vector<double>>();
    r.label_imbalance_ratio = labels.at("imbalance_ratio").get<double>();

    const auto& local = j.at("local");
    r.degrees = local.at("degrees").get<std::vector<int>>();
    r.token_counts = local.at("token_counts").get<std::vector<int>>();
    r.noise_rate = local.at("noise_rate").get<std::vector<double>>();
    r.informativeness = local.at("informativeness").get<std::vector<double>>();
    r.sparse_text_nodes = local.at("sparse_text_nodes").get<std::vector<int>>();
    r.noisy_text_nodes = local.at("noisy_text_nodes").get<std::vector<int>>();
    r.uninformative_text_nodes = local.at("uninformative_text_nodes").get<std::vector<int>>();
    r.community_of = local.at("community_of").get<std::vector<int>>();
    r.sparse_communities = local.at("sparse_communities").get<std::vector<int>>();
    r.noisy_communities = local.at("noisy_communities").get<std::vector<int>>();
    for (const auto& e : local.at("missing_labels")) {
        MissingLabelFlag f;
        f.node = e.at("node").get<int>();
        if (!e.at("predicted").is_null()) f.predicted = e.at("predicted").get<int>();
        f.confidence = e.at("confidence").get<double>();
        r.missing_labels.push_back(f);
    }
    for (const auto& e : local.at("noisy_labels")) {
        NoisyLabelFlag f;
        f.node = e.at("node").get<int>();
        f.current = e.at("current").get<int>();
        f.predicted = e.at("predicted").get<int>();
        f.confidence = e.at("confidence").get<double>();
        r.noisy_labels.push_back(f);
    }

    for (const auto& e : j.at("communities")) {
        CommunityReport c;
        c.members = e.at("members").get<std::vector<int>>();
        c.stats.size = e.at("size").get<int>();
        c.stats.internal_edges = e.at("internal_edges").get<int>();
        c.stats.mean_degree = e.at("mean_degree").get<double>();
        c.stats.density = e.at("density").get<double>();
        c.stats.density_defined = e.at("density_defined").get<bool>();
        c.stats.structural_entropy = e.at("structural_entropy").get<double>();
        c.stats.entropy_defined = e.at("entropy_defined").get<bool>();
        c.stats.mean_jaccard = e.at("mean_jaccard").get<double>();
        c.stats.jaccard_defined = e.at("jaccard_defined").get<bool>();
        c.stats.sparse = e.at("sparse").get<bool>();
        c.stats.noisy = e.at("noisy").get<bool>();
        r.communities.push_back(std::move(c));
    }

    const auto& t = j.at("thresholds");
    r.config.tau_sparse_tokens = t.at("tau_sparse_tokens").get<int>();
    r.config.tau_noise = t.at("tau_noise").get<double>();
    r.config.informativeness_percentile = t.at("informativeness_percentile").get<double>();
    r.config.mean_degree_ref = t.at("mean_degree_ref").get<double>();
    r.config.density_ref = t.at("density_ref").get<double>();
    r.config.jaccard_ref = t.at("jaccard_ref").get<double>();
    r.config.entropy_ref = t.at("entropy_ref").get<double>();
    r.config.gini_ref = t.at("gini_ref").get<double>();
    r.config.tau_consistency = t.at("tau_consistency").get<double>();
    r.config.kmeans_max_k = t.at("kmeans_max_k").get<int>();
    r.config.kmeans_restarts = t.at("kmeans_restarts").get<int>();
    r.config.seed = t.at("seed").get<std::uint64_t>();
    return r;
}

}  // namespace laga::detect
