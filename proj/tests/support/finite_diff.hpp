#pragma once

// Central finite-difference gradient checking against batch_objective. The
// numeric side never touches the analytic gradient code.

#include <algorithm>
#include <cmath>
#include <cstdint>

#include "lda2vec/model.hpp"

namespace testsupport {

struct GradCheck {
    double max_rel_err = 0.0;
    std::size_t coords_checked = 0;
};

struct RandomInstance {
    lda2vec::TrainConfig config;
    lda2vec::ModelParams params;
    lda2vec::Batch batch;
};

// Small random model + batch with pre-drawn negatives and fixed dropout masks,
// sized for exhaustive finite-difference sweeps.
inline RandomInstance make_random_instance(lda2vec::Rng& rng) {
    RandomInstance inst;
    const std::uint32_t vocab_size = 3 + static_cast<std::uint32_t>(rng.next_below(48));
    const std::uint32_t n_docs = 1 + static_cast<std::uint32_t>(rng.next_below(6));
    inst.config.dim = 2 + static_cast<std::uint32_t>(rng.next_below(7));
    inst.config.n_topics = 1 + static_cast<std::uint32_t>(rng.next_below(4));
    inst.config.n_negatives = 1 + static_cast<std::uint32_t>(rng.next_below(5));
    const double lambdas[] = {0.0, 0.5, 5.0, 200.0};
    inst.config.lambda = lambdas[rng.next_below(4)];
    const double alphas[] = {1.0, 0.5, 0.05};
    inst.config.alpha = alphas[rng.next_below(3)];
    const double dropouts[] = {0.0, 0.25, 0.5};
    inst.config.dropout_p = dropouts[rng.next_below(3)];

    inst.params.word_vectors = lda2vec::Matrix(vocab_size, inst.config.dim);
    inst.params.topics = lda2vec::Matrix(inst.config.n_topics, inst.config.dim);
    inst.params.doc_logits = lda2vec::Matrix(n_docs, inst.config.n_topics);
    for (auto& w : inst.params.word_vectors.data()) {
        w = 0.5 * rng.next_normal();
    }
    for (auto& t : inst.params.topics.data()) {
        t = 0.5 * rng.next_normal();
    }
    for (auto& l : inst.params.doc_logits.data()) {
        l = rng.next_normal();
    }

    const std::size_t n_pairs = 1 + rng.next_below(20);
    inst.batch.training = true;
    inst.batch.dirichlet_scale = 0.125 + 0.875 * rng.next_double();
    for (std::size_t i = 0; i < n_pairs; ++i) {
        lda2vec::BatchItem item;
        item.pair.doc_id = static_cast<std::uint32_t>(rng.next_below(n_docs));
        item.pair.pivot = static_cast<std::uint32_t>(rng.next_below(vocab_size));
        item.pair.target = static_cast<std::uint32_t>(rng.next_below(vocab_size));
        item.negatives.resize(inst.config.n_negatives);
        for (auto& neg : item.negatives) {
            neg = static_cast<std::uint32_t>(rng.next_below(vocab_size));
        }
        if (inst.config.dropout_p > 0.0) {
            item.mask_pivot.resize(inst.config.dim);
            item.mask_doc.resize(inst.config.dim);
            for (auto& keep : item.mask_pivot) {
                keep = rng.next_double() >= inst.config.dropout_p ? 1 : 0;
            }
            for (auto& keep : item.mask_doc) {
                keep = rng.next_double() >= inst.config.dropout_p ? 1 : 0;
            }
        }
        inst.batch.items.push_back(std::move(item));
    }
    return inst;
}

// Relative error with a small floor so coordinates that are analytically zero
// are judged against finite-difference roundoff (~1e-8 absolute) rather than
// blowing up the ratio.
inline double grad_rel_err(double analytic, double numeric) {
    const double denom = std::max({std::fabs(analytic), std::fabs(numeric), 1e-2});
    return std::fabs(analytic - numeric) / denom;
}

inline GradCheck check_gradients(const lda2vec::Batch& batch, lda2vec::ModelParams params,
                                 const lda2vec::TrainConfig& config, double step = 1e-5) {
    using lda2vec::batch_backward;
    using lda2vec::batch_objective;

    const auto result = batch_backward(batch, params, config);
    GradCheck check;

    auto probe = [&](double& coord, double analytic) {
        const double saved = coord;
        coord = saved + step;
        const double plus = batch_objective(batch, params, config);
        coord = saved - step;
        const double minus = batch_objective(batch, params, config);
        coord = saved;
        const double numeric = (plus - minus) / (2.0 * step);
        check.max_rel_err = std::max(check.max_rel_err, grad_rel_err(analytic, numeric));
        ++check.coords_checked;
    };

    for (std::size_t r = 0; r < params.word_vectors.rows(); ++r) {
        const auto it = result.grads.word_rows.find(static_cast<std::uint32_t>(r));
        for (std::size_t c = 0; c < params.word_vectors.cols(); ++c) {
            const double analytic = it == result.grads.word_rows.end() ? 0.0 : it->second[c];
            probe(params.word_vectors(r, c), analytic);
        }
    }
    for (std::size_t r = 0; r < params.topics.rows(); ++r) {
        for (std::size_t c = 0; c < params.topics.cols(); ++c) {
            probe(params.topics(r, c), result.grads.topic_grad(r, c));
        }
    }
    for (std::size_t r = 0; r < params.doc_logits.rows(); ++r) {
        const auto it = result.grads.doc_rows.find(static_cast<std::uint32_t>(r));
        for (std::size_t c = 0; c < params.doc_logits.cols(); ++c) {
            const double analytic = it == result.grads.doc_rows.end() ? 0.0 : it->second[c];
            probe(params.doc_logits(r, c), analytic);
        }
    }
    return check;
}

}  // namespace testsupport
