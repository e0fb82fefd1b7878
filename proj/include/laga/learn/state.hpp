#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "laga/learn/semantic.hpp"
#include "laga/learn/structural.hpp"

namespace laga::learn {

// Everything the action stage needs from training: embeddings, class logits,
// and the trained parameter sets (kept so new nodes can be embedded and edge
// probabilities recomputed on demand).
struct LearnedState {
    int n = 0, hidden = 0, classes = 0, feature_dim = 0;
    std::uint64_t seed = 0;
    std::string config_hash;
    Eigen::MatrixXd h_sem, sem_logits, h_stu, stu_logits;
    SemanticParams semantic;
    StructuralParams structural;
    std::vector<double> semantic_trace, structural_trace;

    bool is_finite() const {
        for (const auto* m : {&h_sem, &sem_logits, &h_stu, &stu_logits})
            if (!m->allFinite()) return false;
        return semantic.flatten().allFinite() && structural.flatten().allFinite();
    }
};

inline LearnedState assemble_state(const SemanticTrainResult& sem,
                                   const StructuralTrainResult& stu, int feature_dim,
                                   std::uint64_t seed, std::string config_hash) {
    LearnedState s;
    s.n = static_cast<int>(sem.embeddings.rows());
    s.hidden = static_cast<int>(sem.embeddings.cols());
    s.classes = static_cast<int>(sem.logits.cols());
    s.feature_dim = feature_dim;
    s.seed = seed;
    s.config_hash = std::move(config_hash);
    s.h_sem = sem.embeddings;
    s.sem_logits = sem.logits;
    s.h_stu = stu.embeddings;
    s.stu_logits = stu.logits;
    s.semantic = sem.params;
    s.structural = stu.params;
    s.semantic_trace = sem.loss_trace;
    s.structural_trace = stu.loss_trace;
    return s;
}

inline double predict_edge_probability(const LearnedState& s, int i, int j) {
    if (i == j) throw TrainingError("self-pair not allowed");
    if (i < 0 || j < 0 || i >= s.n || j >= s.n)
        throw TrainingError("edge probability requested for unknown node");
    return edge_probability(s.structural, s.h_stu.row(i).transpose(), s.h_stu.row(j).transpose());
}

inline std::vector<double> predict_edge_probabilities(
    const LearnedState& s, const std::vector<std::pair<int, int>>& pairs) {
    std::vector<double> out;
    out.reserve(pairs.size());
    for (const auto& [i, j] : pairs) out.push_back(predict_edge_probability(s, i, j));
    return out;
}

// Structural trunk applied to a node with no edges: with only the self loop,
// the normalized adjacency row reduces to the identity.
inline Eigen::VectorXd embed_isolated(const LearnedState& s, const Eigen::VectorXd& x) {
    if (x.size() != s.feature_dim) throw TrainingError("embed_isolated: feature size mismatch");
    const Eigen::VectorXd h1 = (s.structural.w1.transpose() * x + s.structural.b1).array().tanh();
    return (s.structural.w2.transpose() * h1 + s.structural.b2).array().tanh();
}

inline Eigen::VectorXd label_distribution(const LearnedState& s, int i) {
    Eigen::RowVectorXd row = s.stu_logits.row(i);
    row.array() -= row.maxCoeff();
    Eigen::RowVectorXd p = row.array().exp();
    return (p / p.sum()).transpose();
}

namespace impl {

constexpr char kStateMagic[] = "LAGASTATE1\n";

struct NamedTensor {
    const char* name;
    const Eigen::MatrixXd* matrix = nullptr;
    const Eigen::VectorXd* vector = nullptr;
};

inline std::vector<NamedTensor> state_tensors(const LearnedState& s) {
    return {
        {"h_sem", &s.h_sem},
        {"sem_logits", &s.sem_logits},
        {"h_stu", &s.h_stu},
        {"stu_logits", &s.stu_logits},
        {"sem_w1", &s.semantic.w1},
        {"sem_b1", nullptr, &s.semantic.b1},
        {"sem_w2", &s.semantic.w2},
        {"sem_b2", nullptr, &s.semantic.b2},
        {"sem_wc", &s.semantic.wc},
        {"sem_bc", nullptr, &s.semantic.bc},
        {"stu_w1", &s.structural.w1},
        {"stu_b1", nullptr, &s.structural.b1},
        {"stu_w2", &s.structural.w2},
        {"stu_b2", nullptr, &s.structural.b2},
        {"stu_wc", &s.structural.wc},
        {"stu_bc", nullptr, &s.structural.bc},
        {"lp_v1", &s.structural.v1},
        {"lp_c1", nullptr, &s.structural.c1},
        {"lp_v2", nullptr, &s.structural.v2},
    };
}

}  // namespace impl

inline void save_state(const LearnedState& s, const std::filesystem::path& path) {
    nlohmann::ordered_json header;
    header["schema"] = "state/1";
    header["n"] = s.n;
    header["hidden"] = s.hidden;
    header["classes"] = s.classes;
    header["feature_dim"] = s.feature_dim;
    header["seed"] = s.seed;
    header["config_hash"] = s.config_hash;
    header["c2"] = s.structural.c2;
    header["semantic_trace_len"] = s.semantic_trace.size();
    header["structural_trace_len"] = s.structural_trace.size();
    auto tensors = nlohmann::ordered_json::array();
    for (const auto& t : impl::state_tensors(s)) {
        nlohmann::ordered_json entry;
        entry["name"] = t.name;
        entry["rows"] = t.matrix ? t.matrix->rows() : t.vector->size();
        entry["cols"] = t.matrix ? t.matrix->cols() : 1;
        tensors.push_back(std::move(entry));
    }
    header["tensors"] = std::move(tensors);
    const std::string header_text = header.dump();

    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw TrainingError("cannot write state file " + path.string());
    out.write(impl::kStateMagic, sizeof(impl::kStateMagic) - 1);
    const std::uint64_t header_len = header_text.size();
    out.write(reinterpret_cast<const char*>(&header_len), sizeof(header_len));
    out.write(header_text.data(), static_cast<std::streamsize>(header_text.size()));
    auto write_doubles = [&](const double* data, std::size_t count) {
        out.write(reinterpret_cast<const char*>(data),
                  static_cast<std::streamsize>(count * sizeof(double)));
    };
    for (const auto& t : impl::state_tensors(s)) {
        if (t.matrix)
            write_doubles(t.matrix->data(), static_cast<std::size_t>(t.matrix->size()));
        else
            write_doubles(t.vector->data(), static_cast<std::size_t>(t.vector->size()));
    }
    write_doubles(s.semantic_trace.data(), s.semantic_trace.size());
    write_doubles(s.structural_trace.data(), s.structural_trace.size());
    if (!out) throw TrainingError("failed writing state file " + path.string());
}

inline LearnedState load_state(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw TrainingError("cannot read state file " + path.string());
    char magic[sizeof(impl::kStateMagic) - 1];
    in.read(magic, sizeof(magic));
    if (!in || std::memcmp(magic, impl::kStateMagic, sizeof(magic)) != 0)
        throw TrainingError(path.string() + " is not a state file");
    std::uint64_t header_len = 0;
    in.read(reinterpret_cast<char*>(&header_len), sizeof(header_len));
    std::string header_text(header_len, '\0');
    in.read(header_text.data(), static_cast<std::streamsize>(header_len));
    if (!in) throw TrainingError(path.string() + ": truncated state header");
    nlohmann::json header;
    try {
        header = nlohmann::json::parse(header_text);
    } catch (const nlohmann::json::exception& e) {
        throw TrainingError(path.string() + ": bad state header: " + e.what());
    }
    if (header.value("schema", "") != "state/1")
        throw TrainingError(path.string() + ": unsupported state schema");

    LearnedState s;
    s.n = header.at("n").get<int>();
    s.hidden = header.at("hidden").get<int>();
    s.classes = header.at("classes").get<int>();
    s.feature_dim = header.at("feature_dim").get<int>();
    s.seed = header.at("seed").get<std::uint64_t>();
    s.config_hash = header.value("config_hash", "");
    s.structural.c2 = header.at("c2").get<double>();
    s.semantic_trace.resize(header.at("semantic_trace_len").get<std::size_t>());
    s.structural_trace.resize(header.at("structural_trace_len").get<std::size_t>());

    auto read_doubles = [&](double* data, std::size_t count) {
        in.read(reinterpret_cast<char*>(data),
                static_cast<std::streamsize>(count * sizeof(double)));
    };
    Eigen::MatrixXd* mats[] = {&s.h_sem,        &s.sem_logits,   &s.h_stu,
                               &s.stu_logits,   &s.semantic.w1,  nullptr,
                               &s.semantic.w2,  nullptr,         &s.semantic.wc,
                               nullptr,         &s.structural.w1, nullptr,
                               &s.structural.w2, nullptr,        &s.structural.wc,
                               nullptr,         &s.structural.v1, nullptr,
                               nullptr};
    Eigen::VectorXd* vecs[] = {nullptr,         nullptr,          nullptr,
                               nullptr,         nullptr,          &s.semantic.b1,
                               nullptr,         &s.semantic.b2,   nullptr,
                               &s.semantic.bc,  nullptr,          &s.structural.b1,
                               nullptr,         &s.structural.b2, nullptr,
                               &s.structural.bc, nullptr,         &s.structural.c1,
                               &s.structural.v2};
    const auto& tensor_list = header.at("tensors");
    if (tensor_list.size() != std::size(mats))
        throw TrainingError(path.string() + ": unexpected tensor count");
    for (std::size_t k = 0; k < tensor_list.size(); ++k) {
        const auto rows = tensor_list[k].at("rows").get<Eigen::Index>();
        const auto cols = tensor_list[k].at("cols").get<Eigen::Index>();
        if (mats[k]) {
            mats[k]->resize(rows, cols);
            read_doubles(mats[k]->data(), static_cast<std::size_t>(rows * cols));
        } else {
            vecs[k]->resize(rows);
            read_doubles(vecs[k]->data(), static_cast<std::size_t>(rows));
        }
    }
    read_doubles(s.semantic_trace.data(), s.semantic_trace.size());
    read_doubles(s.structural_trace.data(), s.structural_trace.size());
    if (!in) throw TrainingError(path.string() + ": truncated state payload");
    return s;
}

}  // namespace laga::learn
