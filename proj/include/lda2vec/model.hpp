#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <unordered_map>
#include <vector>

#include "lda2vec/corpus.hpp"
#include "lda2vec/matrix.hpp"
#include "lda2vec/rng.hpp"

namespace lda2vec {

// Every hyperparameter of a training run. alpha left unset resolves to
// 1/n_topics, the sparsity-inducing concentration.
struct TrainConfig {
    std::uint32_t dim = 300;
    std::uint32_t n_topics = 20;
    std::uint32_t window = 5;
    std::uint32_t n_negatives = 15;
    double beta = 0.75;
    double lambda = 200.0;
    std::optional<double> alpha;
    double dropout_p = 0.5;
    double lr = 1e-3;
    std::uint32_t epochs = 200;
    std::uint32_t batch_size = 512;
    std::uint64_t seed = 1;

    double resolved_alpha() const {
        return alpha ? *alpha : 1.0 / static_cast<double>(n_topics);
    }

    // Throws std::invalid_argument / InvalidBeta on out-of-range values.
    void validate() const;
};

// The full learnable state. One word matrix serves both pivot and target
// roles; document logits live in R^{n_topics} and reach the simplex through
// softmax.
struct ModelParams {
    Matrix word_vectors;  // vocab_size x dim
    Matrix topics;        // n_topics x dim
    Matrix doc_logits;    // n_docs x n_topics

    std::size_t vocab_size() const { return word_vectors.rows(); }
    std::size_t dim() const { return word_vectors.cols(); }
    std::size_t n_topics() const { return topics.rows(); }
    std::size_t n_docs() const { return doc_logits.rows(); }
};

// Word rows ~ U(-0.5/dim, 0.5/dim), topics ~ N(0, 1/dim), doc logits
// ~ N(0, 0.01^2) so initial proportions are near-uniform.
ModelParams init_params(std::size_t vocab_size, std::size_t n_docs, const TrainConfig& config,
                        Rng& rng);

// One training pair with everything the backward pass needs pre-drawn:
// negatives and, when dropout is active, per-coordinate keep masks.
struct BatchItem {
    TrainingPair pair;
    std::vector<std::uint32_t> negatives;
    std::vector<std::uint8_t> mask_pivot;  // empty when dropout is off
    std::vector<std::uint8_t> mask_doc;
};

struct Batch {
    std::vector<BatchItem> items;
    double dirichlet_scale = 1.0;  // minibatch fraction of the corpus
    bool training = true;          // masks applied only when training
};

// Gradient rows keyed by row index; untouched rows are absent. The topic
// gradient is dense.
struct BatchGradients {
    std::unordered_map<std::uint32_t, std::vector<double>> word_rows;
    Matrix topic_grad;
    std::unordered_map<std::uint32_t, std::vector<double>> doc_rows;
};

struct BackwardResult {
    double objective = 0.0;            // J = sgns_objective + dirichlet_objective
    double sgns_objective = 0.0;       // -sum of pair log-likelihoods
    double dirichlet_objective = 0.0;  // -scaled Dirichlet log-likelihood
    BatchGradients grads;
};

// --- numerics ---

// Stable log sigmoid: no overflow for |x| up to 1e3 and far beyond.
inline double log_sigmoid(double x) {
    return x >= 0.0 ? -std::log1p(std::exp(-x)) : x - std::log1p(std::exp(x));
}

inline double sigmoid(double x) {
    if (x >= 0.0) {
        return 1.0 / (1.0 + std::exp(-x));
    }
    const double e = std::exp(x);
    return e / (1.0 + e);
}

// --- ops ---

// Max-subtracted softmax. Enforces its own postcondition (sum within 1e-12 of
// one, all components positive) and throws DomainError if it ever fails.
std::vector<double> softmax(std::span<const double> logits);
void softmax(std::span<const double> logits, std::span<double> out);

// log p without exponentiating first; the Dirichlet term consumes this.
void log_softmax(std::span<const double> logits, std::span<double> out);

// d_j = sum_k p_k t_k.
std::vector<double> doc_vector(std::span<const double> proportions, const Matrix& topics);

// c_j = w_j + d_j, with inverted dropout on both summands while training.
std::vector<double> context_vector(std::span<const double> pivot_vec,
                                   std::span<const double> doc_vec,
                                   std::span<const std::uint8_t> mask_pivot,
                                   std::span<const std::uint8_t> mask_doc, double dropout_p,
                                   bool training);

// log s(c.w_i) + sum_l log s(-c.w_l).
double sgns_loglik(std::span<const double> context, std::span<const double> target,
                   const std::vector<std::span<const double>>& negatives);

// scale * lambda * sum_jk (alpha - 1) log p_jk over the given documents.
// Throws DomainError if any proportion is <= 0. Exactly 0 when alpha == 1.
double dirichlet_loglik(const std::vector<std::span<const double>>& proportions, double alpha,
                        double lambda, double scale);

// Objective J = -(sum_ij L^neg_ij + L^d_scaled) and its exact analytic
// gradients for every touched row. Throws ShapeMismatch on inconsistent dims.
BackwardResult batch_backward(const Batch& batch, const ModelParams& params,
                              const TrainConfig& config);

// Forward-only J through the identical code path; the finite-difference
// oracle differentiates this.
double batch_objective(const Batch& batch, const ModelParams& params, const TrainConfig& config);

}  // namespace lda2vec
