#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <vector>

#include "laga/learn/common.hpp"

namespace laga::learn {

// Two-layer MLP trunk with a linear class head. The trunk output is the
// semantic embedding; the head produces class logits.
struct SemanticParams {
    Eigen::MatrixXd w1, w2, wc;
    Eigen::VectorXd b1, b2, bc;

    static SemanticParams init(int features, int hidden, int classes, detail::RngStream rng) {
        SemanticParams p;
        p.w1 = impl::glorot(features, hidden, rng);
        p.b1 = Eigen::VectorXd::Zero(hidden);
        p.w2 = impl::glorot(hidden, hidden, rng);
        p.b2 = Eigen::VectorXd::Zero(hidden);
        p.wc = impl::glorot(hidden, classes, rng);
        p.bc = Eigen::VectorXd::Zero(classes);
        return p;
    }

    Eigen::VectorXd flatten() const {
        Eigen::VectorXd v(size());
        Eigen::Index at = 0;
        for (const auto* m : {&w1, &w2, &wc}) {
            v.segment(at, m->size()) = Eigen::Map<const Eigen::VectorXd>(m->data(), m->size());
            at += m->size();
        }
        for (const auto* b : {&b1, &b2, &bc}) {
            v.segment(at, b->size()) = *b;
            at += b->size();
        }
        return v;
    }

    void unflatten(const Eigen::VectorXd& v) {
        Eigen::Index at = 0;
        for (auto* m : {&w1, &w2, &wc}) {
            Eigen::Map<Eigen::VectorXd>(m->data(), m->size()) = v.segment(at, m->size());
            at += m->size();
        }
        for (auto* b : {&b1, &b2, &bc}) {
            *b = v.segment(at, b->size());
            at += b->size();
        }
    }

    Eigen::Index size() const {
        return w1.size() + w2.size() + wc.size() + b1.size() + b2.size() + bc.size();
    }

    SemanticParams zeros_like() const {
        SemanticParams z = *this;
        z.w1.setZero();
        z.w2.setZero();
        z.wc.setZero();
        z.b1.setZero();
        z.b2.setZero();
        z.bc.setZero();
        return z;
    }

    void axpy(double a, const SemanticParams& g) {
        w1 += a * g.w1;
        w2 += a * g.w2;
        wc += a * g.wc;
        b1 += a * g.b1;
        b2 += a * g.b2;
        bc += a * g.bc;
    }
};

struct SemanticBatch {
    const Eigen::MatrixXd* x = nullptr;       // n x f node features
    const Eigen::MatrixXd* y_pseudo = nullptr;  // n x d rows summing to 1
    std::vector<int> train_nodes;
    std::vector<int> train_labels;
    std::vector<std::vector<int>> positives;  // graph neighbors
    std::vector<std::vector<int>> negatives;  // sampled non-neighbors
    double tau = 0.5;
    plan::LossWeights weights;
};

struct SemanticForward {
    Eigen::MatrixXd h1, z, logits, probs;
};

struct SemanticLossParts {
    double total = 0.0, semantic = 0.0, structural = 0.0, label = 0.0;
};

inline Eigen::MatrixXd softmax_rows(const Eigen::MatrixXd& logits) {
    Eigen::MatrixXd p = logits;
    for (Eigen::Index i = 0; i < p.rows(); ++i) {
        const double mx = p.row(i).maxCoeff();
        p.row(i) = (p.row(i).array() - mx).exp();
        p.row(i) /= p.row(i).sum();
    }
    return p;
}

inline SemanticForward semantic_forward(const SemanticParams& p, const Eigen::MatrixXd& x) {
    SemanticForward f;
    f.h1 = ((x * p.w1).rowwise() + p.b1.transpose()).array().tanh();
    f.z = ((f.h1 * p.w2).rowwise() + p.b2.transpose()).array().tanh();
    f.logits = (f.z * p.wc).rowwise() + p.bc.transpose();
    f.probs = softmax_rows(f.logits);
    return f;
}

namespace impl {

struct ContrastiveScratch {
    double loss = 0.0;
    Eigen::MatrixXd dz;  // same shape as z, zero if not requested
};

// InfoNCE-style neighborhood contrast on cosine similarity: a node's
// neighbors are positives against its sampled negatives. Nodes without
// positives are skipped; without negatives the per-node term is zero.
inline ContrastiveScratch contrastive_term(const Eigen::MatrixXd& z,
                                           const std::vector<std::vector<int>>& positives,
                                           const std::vector<std::vector<int>>& negatives,
                                           double tau, bool want_grad) {
    const Eigen::Index n = z.rows();
    ContrastiveScratch out;
    if (want_grad) out.dz = Eigen::MatrixXd::Zero(n, z.cols());
    Eigen::VectorXd norms(n);
    for (Eigen::Index i = 0; i < n; ++i) norms(i) = std::max(z.row(i).norm(), 1e-30);

    std::vector<Eigen::Index> anchors;
    for (Eigen::Index i = 0; i < n; ++i)
        if (!positives[i].empty()) anchors.push_back(i);
    if (anchors.empty()) return out;

    auto cos_ij = [&](Eigen::Index i, Eigen::Index j) {
        return z.row(i).dot(z.row(j)) / (norms(i) * norms(j));
    };

    const double inv_anchors = 1.0 / static_cast<double>(anchors.size());
    for (Eigen::Index i : anchors) {
        double s_pos = 0.0, s_neg = 0.0;
        std::vector<double> e_pos(positives[i].size()), e_neg(negatives[i].size());
        for (std::size_t k = 0; k < positives[i].size(); ++k) {
            e_pos[k] = std::exp(cos_ij(i, positives[i][k]) / tau);
            s_pos += e_pos[k];
        }
        for (std::size_t k = 0; k < negatives[i].size(); ++k) {
            e_neg[k] = std::exp(cos_ij(i, negatives[i][k]) / tau);
            s_neg += e_neg[k];
        }
        out.loss += -std::log(s_pos / (s_pos + s_neg)) * inv_anchors;
        if (!want_grad) continue;

        auto add_pair_grad = [&](Eigen::Index j, double dcos) {
            const double c = cos_ij(i, j);
            out.dz.row(i) +=
                dcos * (z.row(j) / (norms(i) * norms(j)) - c * z.row(i) / (norms(i) * norms(i)));
            out.dz.row(j) +=
                dcos * (z.row(i) / (norms(i) * norms(j)) - c * z.row(j) / (norms(j) * norms(j)));
        };
        const double inv_all = 1.0 / (s_pos + s_neg);
        for (std::size_t k = 0; k < positives[i].size(); ++k) {
            const double dcos = inv_anchors * e_pos[k] / tau * (inv_all - 1.0 / s_pos);
            add_pair_grad(positives[i][k], dcos);
        }
        for (std::size_t k = 0; k < negatives[i].size(); ++k) {
            const double dcos = inv_anchors * e_neg[k] / tau * inv_all;
            add_pair_grad(negatives[i][k], dcos);
        }
    }
    return out;
}

}  // namespace impl

inline SemanticLossParts semantic_loss(const SemanticParams& p, const SemanticBatch& batch,
                                       SemanticParams* grad_out = nullptr) {
    const Eigen::MatrixXd& x = *batch.x;
    const Eigen::MatrixXd& y_pse = *batch.y_pseudo;
    const Eigen::Index n = x.rows();
    const auto f = semantic_forward(p, x);
    SemanticLossParts parts;

    // Alignment of predicted distribution with pseudo labels.
    const Eigen::MatrixXd diff = f.probs - y_pse;
    parts.semantic = diff.squaredNorm() / static_cast<double>(n);

    const auto contrast = impl::contrastive_term(f.z, batch.positives, batch.negatives, batch.tau,
                                                 grad_out != nullptr);
    parts.structural = contrast.loss;

    if (!batch.train_nodes.empty()) {
        for (std::size_t k = 0; k < batch.train_nodes.size(); ++k) {
            const int i = batch.train_nodes[k];
            const int y = batch.train_labels[k];
            parts.label -= std::log(std::max(f.probs(i, y), 1e-300));
        }
        parts.label /= static_cast<double>(batch.train_nodes.size());
    }

    const auto& w = batch.weights;
    parts.total = w.alpha * parts.semantic + w.beta * parts.structural + w.gamma * parts.label;
    if (!grad_out) return parts;

    // d(total)/d(logits): softmax Jacobian applied to each row target.
    Eigen::MatrixXd dlogits = Eigen::MatrixXd::Zero(n, f.logits.cols());
    for (Eigen::Index i = 0; i < n; ++i) {
        const Eigen::RowVectorXd pi = f.probs.row(i);
        const Eigen::RowVectorXd g = (2.0 / static_cast<double>(n)) * diff.row(i);
        dlogits.row(i) += w.alpha * (pi.cwiseProduct(g) - pi * (g.dot(pi)));
    }
    if (!batch.train_nodes.empty()) {
        const double inv = 1.0 / static_cast<double>(batch.train_nodes.size());
        for (std::size_t k = 0; k < batch.train_nodes.size(); ++k) {
            const int i = batch.train_nodes[k];
            dlogits.row(i) += w.gamma * inv * f.probs.row(i);
            dlogits(i, batch.train_labels[k]) -= w.gamma * inv;
        }
    }

    Eigen::MatrixXd dz = dlogits * p.wc.transpose();
    if (contrast.dz.size() > 0) dz += w.beta * contrast.dz;

    SemanticParams g = p.zeros_like();
    g.wc = f.z.transpose() * dlogits;
    g.bc = dlogits.colwise().sum();
    const Eigen::MatrixXd dpre2 = dz.cwiseProduct((1.0 - f.z.array().square()).matrix());
    g.w2 = f.h1.transpose() * dpre2;
    g.b2 = dpre2.colwise().sum();
    const Eigen::MatrixXd dh1 = dpre2 * p.w2.transpose();
    const Eigen::MatrixXd dpre1 = dh1.cwiseProduct((1.0 - f.h1.array().square()).matrix());
    g.w1 = x.transpose() * dpre1;
    g.b1 = dpre1.colwise().sum();
    *grad_out = std::move(g);
    return parts;
}

struct SemanticTrainResult {
    SemanticParams params;
    Eigen::MatrixXd embeddings;   // trunk output
    Eigen::MatrixXd logits;
    std::vector<double> loss_trace;
};

inline SemanticBatch make_semantic_batch(const TextAttributedGraph& g, const Eigen::MatrixXd& x,
                                         const Eigen::MatrixXd& y_pseudo,
                                         const TrainOptions& opt) {
    SemanticBatch batch;
    batch.x = &x;
    batch.y_pseudo = &y_pseudo;
    for (int v : g.visible_labeled_nodes()) {
        batch.train_nodes.push_back(v);
        batch.train_labels.push_back(*g.visible_label(v));
    }
    batch.positives.resize(g.n());
    for (int v = 0; v < g.n(); ++v) batch.positives[v] = g.neighbors(v);
    batch.negatives = sample_negatives(g, opt.negatives_per_node,
                                       detail::RngStream(opt.seed).derive("sem.negatives"));
    batch.tau = opt.tau;
    batch.weights = opt.weights;
    return batch;
}

inline SemanticTrainResult train_semantic(const TextAttributedGraph& g, const Eigen::MatrixXd& x,
                                          const Eigen::MatrixXd& y_pseudo,
                                          const TrainOptions& opt) {
    if (x.rows() != g.n() || y_pseudo.rows() != g.n() || y_pseudo.cols() != g.num_classes())
        throw TrainingError("semantic trainer: input shape mismatch");
    auto batch = make_semantic_batch(g, x, y_pseudo, opt);
    auto params = SemanticParams::init(static_cast<int>(x.cols()), opt.hidden, g.num_classes(),
                                       detail::RngStream(opt.seed).derive("sem.init"));
    SemanticTrainResult out;
    out.loss_trace.reserve(opt.epochs);
    SemanticParams grad = params.zeros_like();
    for (int epoch = 0; epoch < opt.epochs; ++epoch) {
        const auto parts = semantic_loss(params, batch, &grad);
        impl::check_finite(parts.total, epoch, "semantic");
        out.loss_trace.push_back(parts.total);
        params.axpy(-opt.learning_rate, grad);
    }
    const auto f = semantic_forward(params, x);
    out.params = std::move(params);
    out.embeddings = f.z;
    out.logits = f.logits;
    return out;
}

}  // namespace laga::learn
