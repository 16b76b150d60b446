#include "lda2vec/model.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "lda2vec/errors.hpp"

namespace lda2vec {

void TrainConfig::validate() const {
    if (dim < 1) {
        throw std::invalid_argument("dim must be >= 1");
    }
    if (n_topics < 1) {
        throw std::invalid_argument("n_topics must be >= 1");
    }
    if (window < 1) {
        throw std::invalid_argument("window must be >= 1");
    }
    if (n_negatives < 1) {
        throw std::invalid_argument("n_negatives must be >= 1");
    }
    if (!(beta >= 0.0 && beta <= 1.0)) {
        throw InvalidBeta("beta must lie in [0, 1], got " + std::to_string(beta));
    }
    if (!(lambda >= 0.0)) {
        throw std::invalid_argument("lambda must be >= 0");
    }
    if (!(resolved_alpha() > 0.0)) {
        throw std::invalid_argument("alpha must be > 0");
    }
    if (!(dropout_p >= 0.0 && dropout_p < 1.0)) {
        throw std::invalid_argument("dropout_p must lie in [0, 1)");
    }
    if (!(lr > 0.0)) {
        throw std::invalid_argument("lr must be > 0");
    }
    if (batch_size < 1) {
        throw std::invalid_argument("batch_size must be >= 1");
    }
}

ModelParams init_params(std::size_t vocab_size, std::size_t n_docs, const TrainConfig& config,
                        Rng& rng) {
    config.validate();
    ModelParams params;
    params.word_vectors = Matrix(vocab_size, config.dim);
    params.topics = Matrix(config.n_topics, config.dim);
    params.doc_logits = Matrix(n_docs, config.n_topics);

    const double half_range = 0.5 / static_cast<double>(config.dim);
    for (auto& w : params.word_vectors.data()) {
        w = rng.next_uniform(-half_range, half_range);
    }
    const double topic_std = 1.0 / std::sqrt(static_cast<double>(config.dim));
    for (auto& t : params.topics.data()) {
        t = topic_std * rng.next_normal();
    }
    for (auto& l : params.doc_logits.data()) {
        l = 0.01 * rng.next_normal();
    }
    return params;
}

void softmax(std::span<const double> logits, std::span<double> out) {
    log_softmax(logits, out);
    double sum = 0.0;
    for (auto& v : out) {
        v = std::exp(v);
        sum += v;
    }
    // Postcondition check; cheap relative to the surrounding dim-length work.
    if (!(std::abs(sum - 1.0) <= 1e-12)) {
        throw DomainError("softmax simplex violation: |sum - 1| = " +
                          std::to_string(std::abs(sum - 1.0)));
    }
    for (const double v : out) {
        if (!(v > 0.0)) {
            throw DomainError("softmax produced a non-positive proportion");
        }
    }
}

std::vector<double> softmax(std::span<const double> logits) {
    std::vector<double> out(logits.size());
    softmax(logits, out);
    return out;
}

void log_softmax(std::span<const double> logits, std::span<double> out) {
    if (logits.empty()) {
        throw std::invalid_argument("softmax over an empty vector");
    }
    double max = logits[0];
    for (const double v : logits) {
        if (!std::isfinite(v)) {
            throw DomainError("softmax input is not finite");
        }
        max = std::max(max, v);
    }
    double sum = 0.0;
    for (std::size_t i = 0; i < logits.size(); ++i) {
        out[i] = logits[i] - max;
        sum += std::exp(out[i]);
    }
    const double log_norm = std::log(sum);
    for (auto& v : out) {
        v -= log_norm;
    }
}

std::vector<double> doc_vector(std::span<const double> proportions, const Matrix& topics) {
    if (proportions.size() != topics.rows()) {
        throw ShapeMismatch("proportions length " + std::to_string(proportions.size()) +
                            " != topic count " + std::to_string(topics.rows()));
    }
    std::vector<double> doc(topics.cols(), 0.0);
    for (std::size_t k = 0; k < topics.rows(); ++k) {
        const auto row = topics.row(k);
        const double p = proportions[k];
        for (std::size_t d = 0; d < doc.size(); ++d) {
            doc[d] += p * row[d];
        }
    }
    return doc;
}

std::vector<double> context_vector(std::span<const double> pivot_vec,
                                   std::span<const double> doc_vec,
                                   std::span<const std::uint8_t> mask_pivot,
                                   std::span<const std::uint8_t> mask_doc, double dropout_p,
                                   bool training) {
    if (pivot_vec.size() != doc_vec.size()) {
        throw ShapeMismatch("pivot and document vector dims differ");
    }
    std::vector<double> context(pivot_vec.size());
    if (!training || dropout_p == 0.0) {
        for (std::size_t d = 0; d < context.size(); ++d) {
            context[d] = pivot_vec[d] + doc_vec[d];
        }
        return context;
    }
    if (mask_pivot.size() != pivot_vec.size() || mask_doc.size() != doc_vec.size()) {
        throw ShapeMismatch("dropout mask dims differ from vector dims");
    }
    // Inverted dropout: surviving coordinates scale by 1/(1-p) so evaluation
    // needs no rescaling.
    const double inv_keep = 1.0 / (1.0 - dropout_p);
    for (std::size_t d = 0; d < context.size(); ++d) {
        context[d] = (mask_pivot[d] ? pivot_vec[d] * inv_keep : 0.0) +
                     (mask_doc[d] ? doc_vec[d] * inv_keep : 0.0);
    }
    return context;
}

namespace {

// Four independent accumulator lanes keep the loop off the sequential-add
// latency chain; the lane layout is fixed, so results stay deterministic.
double dot(const double* a, const double* b, std::size_t n) {
    double lane0 = 0.0;
    double lane1 = 0.0;
    double lane2 = 0.0;
    double lane3 = 0.0;
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        lane0 += a[i] * b[i];
        lane1 += a[i + 1] * b[i + 1];
        lane2 += a[i + 2] * b[i + 2];
        lane3 += a[i + 3] * b[i + 3];
    }
    for (; i < n; ++i) {
        lane0 += a[i] * b[i];
    }
    return (lane0 + lane1) + (lane2 + lane3);
}

double dot(std::span<const double> a, std::span<const double> b) {
    return dot(a.data(), b.data(), a.size());
}

}  // namespace

double sgns_loglik(std::span<const double> context, std::span<const double> target,
                   const std::vector<std::span<const double>>& negatives) {
    if (context.size() != target.size()) {
        throw ShapeMismatch("context and target dims differ");
    }
    double loglik = log_sigmoid(dot(context, target));
    for (const auto& neg : negatives) {
        if (neg.size() != context.size()) {
            throw ShapeMismatch("negative sample dim differs from context dim");
        }
        loglik += log_sigmoid(-dot(context, neg));
    }
    return loglik;
}

double dirichlet_loglik(const std::vector<std::span<const double>>& proportions, double alpha,
                        double lambda, double scale) {
    if (!(scale > 0.0 && scale <= 1.0)) {
        throw std::invalid_argument("dirichlet scale must lie in (0, 1]");
    }
    if (alpha == 1.0) {
        return 0.0;  // the (alpha - 1) factor vanishes identically
    }
    double log_sum = 0.0;
    for (const auto& p_row : proportions) {
        for (const double p : p_row) {
            if (!(p > 0.0)) {
                throw DomainError("dirichlet_loglik needs strictly positive proportions");
            }
            log_sum += std::log(p);
        }
    }
    return scale * (lambda * (alpha - 1.0) * log_sum);
}

namespace {

// Slot-indexed scratch reused across batches: row id -> dense slot, plus
// touched lists for O(touched) reset. Accumulation order per row matches the
// batch item order, so results are bit-identical to a map-based version.
struct GradWorkspace {
    std::vector<std::int32_t> word_slot;
    std::vector<std::int32_t> doc_slot;
    std::vector<std::uint32_t> touched_words;
    std::vector<std::uint32_t> touched_docs;
    std::vector<double> word_grad;  // touched word slots x dim
    std::vector<double> doc_log_p;  // touched doc slots x n_topics
    std::vector<double> doc_p;
    std::vector<double> doc_vec;   // touched doc slots x dim
    std::vector<double> doc_grad;  // dJ/d(d_j), touched doc slots x dim

    void reset(std::size_t vocab_size, std::size_t n_docs) {
        // Clear whatever a previous pass (possibly exited via exception) left
        // behind, then size the slot maps for the current model.
        for (const auto row : touched_words) {
            if (row < word_slot.size()) {
                word_slot[row] = -1;
            }
        }
        for (const auto doc : touched_docs) {
            if (doc < doc_slot.size()) {
                doc_slot[doc] = -1;
            }
        }
        touched_words.clear();
        touched_docs.clear();
        word_slot.resize(vocab_size, -1);
        doc_slot.resize(n_docs, -1);
    }

    double* word_grad_row(std::uint32_t row, std::size_t dim) {
        std::size_t slot;
        if (word_slot[row] >= 0) {
            slot = static_cast<std::size_t>(word_slot[row]);
        } else {
            slot = touched_words.size();
            word_slot[row] = static_cast<std::int32_t>(slot);
            touched_words.push_back(row);
            word_grad.resize((slot + 1) * dim);
            std::fill(word_grad.begin() + static_cast<std::ptrdiff_t>(slot * dim),
                      word_grad.end(), 0.0);
        }
        return word_grad.data() + slot * dim;
    }
};

thread_local GradWorkspace t_workspace;

void check_shapes(const Batch& batch, const ModelParams& params, const TrainConfig& config) {
    if (params.word_vectors.cols() != config.dim || params.topics.cols() != config.dim) {
        throw ShapeMismatch("parameter dim differs from config dim");
    }
    if (params.topics.rows() != config.n_topics ||
        params.doc_logits.cols() != config.n_topics) {
        throw ShapeMismatch("topic count differs from config n_topics");
    }
    for (const auto& item : batch.items) {
        if (item.pair.pivot >= params.vocab_size() || item.pair.target >= params.vocab_size()) {
            throw ShapeMismatch("token id out of range");
        }
        if (item.pair.doc_id >= params.n_docs()) {
            throw ShapeMismatch("document id out of range");
        }
        for (const auto neg : item.negatives) {
            if (neg >= params.vocab_size()) {
                throw ShapeMismatch("negative sample id out of range");
            }
        }
    }
}

// Caches softmax, log-softmax and the mixture vector for a document the first
// time a batch touches it; returns the document's slot.
std::size_t doc_forward(GradWorkspace& ws, std::uint32_t doc_id, const ModelParams& params) {
    if (ws.doc_slot[doc_id] >= 0) {
        return static_cast<std::size_t>(ws.doc_slot[doc_id]);
    }
    const std::size_t n_topics = params.n_topics();
    const std::size_t dim = params.dim();
    const std::size_t slot = ws.touched_docs.size();
    ws.doc_slot[doc_id] = static_cast<std::int32_t>(slot);
    ws.touched_docs.push_back(doc_id);
    ws.doc_log_p.resize((slot + 1) * n_topics);
    ws.doc_p.resize((slot + 1) * n_topics);
    ws.doc_vec.resize((slot + 1) * dim);
    ws.doc_grad.resize((slot + 1) * dim);

    const auto logits = params.doc_logits.row(doc_id);
    const std::span<double> log_p{ws.doc_log_p.data() + slot * n_topics, n_topics};
    const std::span<double> p{ws.doc_p.data() + slot * n_topics, n_topics};
    log_softmax(logits, log_p);
    softmax(logits, p);

    const std::span<double> dvec{ws.doc_vec.data() + slot * dim, dim};
    std::fill(dvec.begin(), dvec.end(), 0.0);
    for (std::size_t k = 0; k < n_topics; ++k) {
        const auto topic = params.topics.row(k);
        const double p_k = p[k];
        for (std::size_t d = 0; d < dim; ++d) {
            dvec[d] += p_k * topic[d];
        }
    }
    std::fill(ws.doc_grad.begin() + static_cast<std::ptrdiff_t>(slot * dim),
              ws.doc_grad.begin() + static_cast<std::ptrdiff_t>((slot + 1) * dim), 0.0);
    return slot;
}

struct PassTotals {
    double sgns_loglik_sum = 0.0;
    double dirichlet = 0.0;
};

// Shared forward pass; when with_grads is set it also accumulates the SGNS
// gradients into the word-row scratch and per-document doc-vector gradients.
PassTotals run_pairs(const Batch& batch, const ModelParams& params, const TrainConfig& config,
                     GradWorkspace& ws, bool with_grads) {
    PassTotals totals;
    const std::size_t dim = config.dim;
    const bool apply_dropout = batch.training && config.dropout_p > 0.0;
    const double inv_keep = apply_dropout ? 1.0 / (1.0 - config.dropout_p) : 1.0;

    std::vector<double> context(dim);
    std::vector<double> context_grad(dim);

    for (const auto& item : batch.items) {
        const std::size_t doc = doc_forward(ws, item.pair.doc_id, params);
        const double* doc_vec = ws.doc_vec.data() + doc * dim;
        const auto pivot = params.word_vectors.row(item.pair.pivot);

        if (apply_dropout) {
            if (item.mask_pivot.size() != dim || item.mask_doc.size() != dim) {
                throw ShapeMismatch("dropout mask dims differ from config dim");
            }
            for (std::size_t d = 0; d < dim; ++d) {
                context[d] = (item.mask_pivot[d] ? pivot[d] * inv_keep : 0.0) +
                             (item.mask_doc[d] ? doc_vec[d] * inv_keep : 0.0);
            }
        } else {
            for (std::size_t d = 0; d < dim; ++d) {
                context[d] = pivot[d] + doc_vec[d];
            }
        }

        std::fill(context_grad.begin(), context_grad.end(), 0.0);

        const auto target = params.word_vectors.row(item.pair.target);
        const double pos_dot = dot(context, target);
        totals.sgns_loglik_sum += log_sigmoid(pos_dot);

        if (with_grads) {
            // dJ/d(pos_dot) = -(1 - sigma(pos_dot))
            const double pos_coef = 1.0 - sigmoid(pos_dot);
            double* target_grad = ws.word_grad_row(item.pair.target, dim);
            for (std::size_t d = 0; d < dim; ++d) {
                context_grad[d] -= pos_coef * target[d];
                target_grad[d] -= pos_coef * context[d];
            }
        }

        for (const auto neg_id : item.negatives) {
            const auto neg = params.word_vectors.row(neg_id);
            const double neg_dot = dot(context, neg);
            totals.sgns_loglik_sum += log_sigmoid(-neg_dot);
            if (with_grads) {
                // dJ/d(neg_dot) = sigma(neg_dot)
                const double neg_coef = sigmoid(neg_dot);
                double* neg_grad = ws.word_grad_row(neg_id, dim);
                for (std::size_t d = 0; d < dim; ++d) {
                    context_grad[d] += neg_coef * neg[d];
                    neg_grad[d] += neg_coef * context[d];
                }
            }
        }

        if (with_grads) {
            double* pivot_grad = ws.word_grad_row(item.pair.pivot, dim);
            double* doc_grad = ws.doc_grad.data() + doc * dim;
            if (apply_dropout) {
                for (std::size_t d = 0; d < dim; ++d) {
                    if (item.mask_pivot[d]) {
                        pivot_grad[d] += context_grad[d] * inv_keep;
                    }
                    if (item.mask_doc[d]) {
                        doc_grad[d] += context_grad[d] * inv_keep;
                    }
                }
            } else {
                for (std::size_t d = 0; d < dim; ++d) {
                    pivot_grad[d] += context_grad[d];
                    doc_grad[d] += context_grad[d];
                }
            }
        }
    }

    // Dirichlet term: each document in the batch counts once, however many
    // pairs reference it.
    if (config.lambda != 0.0) {
        const double alpha = config.resolved_alpha();
        if (alpha != 1.0) {
            double log_sum = 0.0;
            for (std::size_t slot = 0; slot < ws.touched_docs.size(); ++slot) {
                const double* log_p = ws.doc_log_p.data() + slot * config.n_topics;
                for (std::size_t k = 0; k < config.n_topics; ++k) {
                    log_sum += log_p[k];
                }
            }
            totals.dirichlet = batch.dirichlet_scale * (config.lambda * (alpha - 1.0) * log_sum);
        }
    }
    return totals;
}

}  // namespace

BackwardResult batch_backward(const Batch& batch, const ModelParams& params,
                              const TrainConfig& config) {
    if (batch.items.empty()) {
        throw std::invalid_argument("batch_backward over an empty batch");
    }
    check_shapes(batch, params, config);

    GradWorkspace& ws = t_workspace;
    ws.reset(params.vocab_size(), params.n_docs());

    BackwardResult result;
    result.grads.topic_grad = Matrix(config.n_topics, config.dim);
    const PassTotals totals = run_pairs(batch, params, config, ws, true);

    const double alpha = config.resolved_alpha();
    const double n_topics = static_cast<double>(config.n_topics);
    // dJ/dlogit_m of the scaled Dirichlet term, per document:
    //   -scale * lambda * (alpha - 1) * (1 - n * p_m)
    const double dir_coef = (config.lambda != 0.0 && alpha != 1.0)
                                ? -batch.dirichlet_scale * config.lambda * (alpha - 1.0)
                                : 0.0;

    std::vector<double> p_grad(config.n_topics);
    for (std::size_t slot = 0; slot < ws.touched_docs.size(); ++slot) {
        const std::uint32_t doc_id = ws.touched_docs[slot];
        const double* p = ws.doc_p.data() + slot * config.n_topics;
        const double* doc_grad = ws.doc_grad.data() + slot * config.dim;

        // d_j = sum_k p_k t_k: route the doc-vector gradient into topics and p.
        for (std::size_t k = 0; k < config.n_topics; ++k) {
            const auto topic = params.topics.row(k);
            auto topic_grad = result.grads.topic_grad.row(k);
            const double p_k = p[k];
            double g = 0.0;
            for (std::size_t d = 0; d < config.dim; ++d) {
                topic_grad[d] += p_k * doc_grad[d];
                g += topic[d] * doc_grad[d];
            }
            p_grad[k] = g;
        }
        // Softmax Jacobian: g_logit_k = p_k * (g_p_k - p . g_p).
        double weighted = 0.0;
        for (std::size_t k = 0; k < config.n_topics; ++k) {
            weighted += p[k] * p_grad[k];
        }
        auto& logit_grad = result.grads.doc_rows[doc_id];
        logit_grad.assign(config.n_topics, 0.0);
        for (std::size_t k = 0; k < config.n_topics; ++k) {
            logit_grad[k] = p[k] * (p_grad[k] - weighted);
            if (dir_coef != 0.0) {
                logit_grad[k] += dir_coef * (1.0 - n_topics * p[k]);
            }
        }
    }

    for (std::size_t slot = 0; slot < ws.touched_words.size(); ++slot) {
        const double* grad = ws.word_grad.data() + slot * config.dim;
        result.grads.word_rows.emplace(ws.touched_words[slot],
                                       std::vector<double>(grad, grad + config.dim));
    }

    result.sgns_objective = -totals.sgns_loglik_sum;
    result.dirichlet_objective = -totals.dirichlet;
    result.objective = result.sgns_objective + result.dirichlet_objective;
    return result;
}

double batch_objective(const Batch& batch, const ModelParams& params, const TrainConfig& config) {
    if (batch.items.empty()) {
        throw std::invalid_argument("batch_objective over an empty batch");
    }
    check_shapes(batch, params, config);
    GradWorkspace& ws = t_workspace;
    ws.reset(params.vocab_size(), params.n_docs());
    const PassTotals totals = run_pairs(batch, params, config, ws, false);
    return -totals.sgns_loglik_sum - totals.dirichlet;
}

}  // namespace lda2vec
