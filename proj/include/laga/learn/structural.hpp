#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <utility>
#include <vector>

#include "laga/learn/common.hpp"
#include "laga/learn/semantic.hpp"

namespace laga::learn {

// Two-layer graph convolution trunk, a linear class head, and a pairwise link
// predictor over [h_i + h_j ; |h_i - h_j|].
struct StructuralParams {
    Eigen::MatrixXd w1, w2, wc, v1;  // v1: 2h x h
    Eigen::VectorXd b1, b2, bc, c1, v2;
    double c2 = 0.0;

    static StructuralParams init(int features, int hidden, int classes, detail::RngStream rng) {
        StructuralParams p;
        p.w1 = impl::glorot(features, hidden, rng);
        p.b1 = Eigen::VectorXd::Zero(hidden);
        p.w2 = impl::glorot(hidden, hidden, rng);
        p.b2 = Eigen::VectorXd::Zero(hidden);
        p.wc = impl::glorot(hidden, classes, rng);
        p.bc = Eigen::VectorXd::Zero(classes);
        p.v1 = impl::glorot(2 * hidden, hidden, rng);
        p.c1 = Eigen::VectorXd::Zero(hidden);
        p.v2 = impl::glorot(hidden, 1, rng).col(0);
        p.c2 = 0.0;
        return p;
    }

    Eigen::VectorXd flatten() const {
        Eigen::VectorXd v(size());
        Eigen::Index at = 0;
        for (const auto* m : {&w1, &w2, &wc, &v1}) {
            v.segment(at, m->size()) = Eigen::Map<const Eigen::VectorXd>(m->data(), m->size());
            at += m->size();
        }
        for (const auto* b : {&b1, &b2, &bc, &c1, &v2}) {
            v.segment(at, b->size()) = *b;
            at += b->size();
        }
        v(at) = c2;
        return v;
    }

    void unflatten(const Eigen::VectorXd& v) {
        Eigen::Index at = 0;
        for (auto* m : {&w1, &w2, &wc, &v1}) {
            Eigen::Map<Eigen::VectorXd>(m->data(), m->size()) = v.segment(at, m->size());
            at += m->size();
        }
        for (auto* b : {&b1, &b2, &bc, &c1, &v2}) {
            *b = v.segment(at, b->size());
            at += b->size();
        }
        c2 = v(at);
    }

    Eigen::Index size() const {
        return w1.size() + w2.size() + wc.size() + v1.size() + b1.size() + b2.size() + bc.size() +
               c1.size() + v2.size() + 1;
    }

    StructuralParams zeros_like() const {
        StructuralParams z = *this;
        z.w1.setZero();
        z.w2.setZero();
        z.wc.setZero();
        z.v1.setZero();
        z.b1.setZero();
        z.b2.setZero();
        z.bc.setZero();
        z.c1.setZero();
        z.v2.setZero();
        z.c2 = 0.0;
        return z;
    }

    void axpy(double a, const StructuralParams& g) {
        w1 += a * g.w1;
        w2 += a * g.w2;
        wc += a * g.wc;
        v1 += a * g.v1;
        b1 += a * g.b1;
        b2 += a * g.b2;
        bc += a * g.bc;
        c1 += a * g.c1;
        v2 += a * g.v2;
        c2 += a * g.c2;
    }
};

inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

// Link score for a pair of trunk embeddings.
inline double edge_probability(const StructuralParams& p, const Eigen::VectorXd& hi,
                               const Eigen::VectorXd& hj) {
    const Eigen::Index h = hi.size();
    Eigen::VectorXd u(2 * h);
    u.head(h) = hi + hj;
    u.tail(h) = (hi - hj).cwiseAbs();
    const Eigen::VectorXd t = (p.v1.transpose() * u + p.c1).array().tanh();
    return sigmoid(p.v2.dot(t) + p.c2);
}

struct StructuralBatch {
    const Eigen::MatrixXd* m1 = nullptr;    // N * X, fixed across epochs
    const Eigen::MatrixXd* nadj = nullptr;  // N
    const Eigen::MatrixXd* hsem = nullptr;  // semantic embeddings, may be empty
    PairFrame pairs;
    std::vector<double> pair_targets;  // sigmoid(cos(hsem_i, hsem_j)), positives then negatives
    std::vector<int> train_nodes;
    std::vector<int> train_labels;
    plan::LossWeights weights;
};

struct StructuralForward {
    Eigen::MatrixXd h1, m2, h, logits, probs;
};

inline StructuralForward structural_forward(const StructuralParams& p,
                                            const StructuralBatch& batch) {
    StructuralForward f;
    f.h1 = ((*batch.m1 * p.w1).rowwise() + p.b1.transpose()).array().tanh();
    f.m2 = *batch.nadj * f.h1;
    f.h = ((f.m2 * p.w2).rowwise() + p.b2.transpose()).array().tanh();
    f.logits = (f.h * p.wc).rowwise() + p.bc.transpose();
    f.probs = softmax_rows(f.logits);
    return f;
}

struct StructuralLossParts {
    double total = 0.0, semantic = 0.0, structural = 0.0, label = 0.0;
};

inline StructuralLossParts structural_loss(const StructuralParams& p,
                                           const StructuralBatch& batch,
                                           StructuralParams* grad_out = nullptr) {
    const auto f = structural_forward(p, batch);
    const Eigen::Index n = f.h.rows();
    const Eigen::Index hidden = f.h.cols();
    StructuralLossParts parts;
    const auto& w = batch.weights;

    const std::size_t num_pos = batch.pairs.positives.size();
    const std::size_t num_neg = batch.pairs.negatives.size();
    const std::size_t num_pairs = num_pos + num_neg;
    const bool have_hsem = batch.hsem != nullptr && batch.hsem->size() > 0;

    std::vector<double> ahat(num_pairs);
    auto pair_at = [&](std::size_t k) {
        return k < num_pos ? batch.pairs.positives[k] : batch.pairs.negatives[k - num_pos];
    };
    for (std::size_t k = 0; k < num_pairs; ++k) {
        const auto [i, j] = pair_at(k);
        ahat[k] = edge_probability(p, f.h.row(i).transpose(), f.h.row(j).transpose());
    }

    // Alignment with the fixed semantic embeddings, plus agreement between the
    // semantic pair affinity and the predicted link score.
    if (have_hsem) {
        parts.semantic += (f.h - *batch.hsem).squaredNorm() / static_cast<double>(n);
        if (num_pairs > 0) {
            double acc = 0.0;
            for (std::size_t k = 0; k < num_pairs; ++k) {
                const double d = batch.pair_targets[k] - ahat[k];
                acc += d * d;
            }
            parts.semantic += acc / static_cast<double>(num_pairs);
        }
    }

    // Balanced edge reconstruction: push observed edges to 1, sampled
    // non-edges to 0, each side averaged on its own.
    if (num_pos > 0) {
        double acc = 0.0;
        for (std::size_t k = 0; k < num_pos; ++k) acc += (1.0 - ahat[k]) * (1.0 - ahat[k]);
        parts.structural += 0.5 * acc / static_cast<double>(num_pos);
    }
    if (num_neg > 0) {
        double acc = 0.0;
        for (std::size_t k = num_pos; k < num_pairs; ++k) acc += ahat[k] * ahat[k];
        parts.structural += 0.5 * acc / static_cast<double>(num_neg);
    }

    if (!batch.train_nodes.empty()) {
        for (std::size_t k = 0; k < batch.train_nodes.size(); ++k)
            parts.label -=
                std::log(std::max(f.probs(batch.train_nodes[k], batch.train_labels[k]), 1e-300));
        parts.label /= static_cast<double>(batch.train_nodes.size());
    }

    parts.total = w.alpha * parts.semantic + w.beta * parts.structural + w.gamma * parts.label;
    if (!grad_out) return parts;

    StructuralParams g = p.zeros_like();
    Eigen::MatrixXd dh = Eigen::MatrixXd::Zero(n, hidden);
    if (have_hsem) dh += w.alpha * (2.0 / static_cast<double>(n)) * (f.h - *batch.hsem);

    Eigen::MatrixXd dlogits = Eigen::MatrixXd::Zero(n, f.logits.cols());
    if (!batch.train_nodes.empty()) {
        const double inv = w.gamma / static_cast<double>(batch.train_nodes.size());
        for (std::size_t k = 0; k < batch.train_nodes.size(); ++k) {
            const int i = batch.train_nodes[k];
            dlogits.row(i) += inv * f.probs.row(i);
            dlogits(i, batch.train_labels[k]) -= inv;
        }
        g.wc = f.h.transpose() * dlogits;
        g.bc = dlogits.colwise().sum();
        dh += dlogits * p.wc.transpose();
    }

    Eigen::VectorXd u(2 * hidden), t(hidden), dpre(hidden), du(2 * hidden);
    for (std::size_t k = 0; k < num_pairs; ++k) {
        double da = 0.0;
        if (have_hsem && num_pairs > 0)
            da += w.alpha * 2.0 * (ahat[k] - batch.pair_targets[k]) / static_cast<double>(num_pairs);
        if (k < num_pos)
            da += w.beta * (ahat[k] - 1.0) / static_cast<double>(num_pos);
        else
            da += w.beta * ahat[k] / static_cast<double>(num_neg);
        if (da == 0.0) continue;

        const auto [i, j] = pair_at(k);
        const Eigen::VectorXd hi = f.h.row(i).transpose();
        const Eigen::VectorXd hj = f.h.row(j).transpose();
        u.head(hidden) = hi + hj;
        u.tail(hidden) = (hi - hj).cwiseAbs();
        t = (p.v1.transpose() * u + p.c1).array().tanh();
        const double ds = da * ahat[k] * (1.0 - ahat[k]);
        g.v2 += ds * t;
        g.c2 += ds;
        dpre = (ds * p.v2.array() * (1.0 - t.array().square())).matrix();
        g.v1 += u * dpre.transpose();
        g.c1 += dpre;
        du = p.v1 * dpre;
        const Eigen::VectorXd sgn =
            (hi - hj).unaryExpr([](double x) { return x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0); });
        dh.row(i) += (du.head(hidden) + sgn.cwiseProduct(du.tail(hidden))).transpose();
        dh.row(j) += (du.head(hidden) - sgn.cwiseProduct(du.tail(hidden))).transpose();
    }

    const Eigen::MatrixXd dpre2 = dh.cwiseProduct((1.0 - f.h.array().square()).matrix());
    g.w2 = f.m2.transpose() * dpre2;
    g.b2 = dpre2.colwise().sum();
    const Eigen::MatrixXd dh1 = *batch.nadj * (dpre2 * p.w2.transpose());
    const Eigen::MatrixXd dpre1 = dh1.cwiseProduct((1.0 - f.h1.array().square()).matrix());
    g.w1 = batch.m1->transpose() * dpre1;
    g.b1 = dpre1.colwise().sum();
    *grad_out = std::move(g);
    return parts;
}

struct StructuralTrainResult {
    StructuralParams params;
    Eigen::MatrixXd embeddings;  // trunk output
    Eigen::MatrixXd logits;
    std::vector<double> loss_trace;
};

// Owns the matrices the batch points into; keep alive while the batch is used.
struct StructuralInputs {
    Eigen::MatrixXd nadj, m1;
    StructuralBatch batch;
};

inline StructuralInputs make_structural_batch(const TextAttributedGraph& g,
                                              const Eigen::MatrixXd& x,
                                              const Eigen::MatrixXd& hsem,
                                              const TrainOptions& opt) {
    StructuralInputs in;
    in.nadj = normalized_adjacency(g);
    in.m1 = in.nadj * x;
    auto& batch = in.batch;
    batch.hsem = &hsem;
    for (int v : g.visible_labeled_nodes()) {
        batch.train_nodes.push_back(v);
        batch.train_labels.push_back(*g.visible_label(v));
    }
    batch.weights = opt.weights;
    const bool need_pairs = opt.weights.alpha > 0.0 || opt.weights.beta > 0.0;
    if (need_pairs) {
        batch.pairs = sample_pair_frame(g, opt.max_pair_samples,
                                        detail::RngStream(opt.seed).derive("stu.pairs"));
        if (hsem.size() > 0) {
            auto affinity = [&](const std::pair<int, int>& e) {
                const Eigen::RowVectorXd a = hsem.row(e.first);
                const Eigen::RowVectorXd b = hsem.row(e.second);
                const double den = std::max(a.norm() * b.norm(), 1e-30);
                return sigmoid(a.dot(b) / den);
            };
            for (const auto& e : batch.pairs.positives) batch.pair_targets.push_back(affinity(e));
            for (const auto& e : batch.pairs.negatives) batch.pair_targets.push_back(affinity(e));
        } else {
            batch.pair_targets.assign(
                batch.pairs.positives.size() + batch.pairs.negatives.size(), 0.0);
        }
    }
    return in;
}

inline StructuralTrainResult train_structural(const TextAttributedGraph& g,
                                              const Eigen::MatrixXd& x,
                                              const Eigen::MatrixXd& hsem,
                                              const TrainOptions& opt) {
    if (x.rows() != g.n()) throw TrainingError("structural trainer: input shape mismatch");
    if (hsem.size() > 0 && (hsem.rows() != g.n() || hsem.cols() != opt.hidden))
        throw TrainingError("structural trainer: semantic embedding shape mismatch");
    auto in = make_structural_batch(g, x, hsem, opt);
    in.batch.m1 = &in.m1;
    in.batch.nadj = &in.nadj;
    auto params = StructuralParams::init(static_cast<int>(x.cols()), opt.hidden, g.num_classes(),
                                         detail::RngStream(opt.seed).derive("stu.init"));
    StructuralTrainResult out;
    out.loss_trace.reserve(opt.epochs);
    StructuralParams grad = params.zeros_like();
    for (int epoch = 0; epoch < opt.epochs; ++epoch) {
        const auto parts = structural_loss(params, in.batch, &grad);
        impl::check_finite(parts.total, epoch, "structural");
        out.loss_trace.push_back(parts.total);
        params.axpy(-opt.learning_rate, grad);
    }
    const auto f = structural_forward(params, in.batch);
    out.params = std::move(params);
    out.embeddings = f.h;
    out.logits = f.logits;
    return out;
}

}  // namespace laga::learn
