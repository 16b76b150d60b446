#include "lda2vec/optimizer.hpp"

#include <algorithm>
#include <cmath>

#include "lda2vec/errors.hpp"

namespace lda2vec {

namespace {

void update_row(std::span<double> param, std::span<const double> grad, std::span<double> m,
                std::span<double> v, std::uint64_t step, const AdamHyper& hyper) {
    const double bias1 = 1.0 - std::pow(hyper.beta1, static_cast<double>(step));
    const double bias2 = 1.0 - std::pow(hyper.beta2, static_cast<double>(step));
    for (std::size_t i = 0; i < param.size(); ++i) {
        const double g = grad[i];
        m[i] = hyper.beta1 * m[i] + (1.0 - hyper.beta1) * g;
        v[i] = hyper.beta2 * v[i] + (1.0 - hyper.beta2) * g * g;
        const double m_hat = m[i] / bias1;
        const double v_hat = v[i] / bias2;
        param[i] -= hyper.lr * m_hat / (std::sqrt(v_hat) + hyper.eps);
    }
}

template <typename RowMap>
void update_sparse(Matrix& params, const RowMap& rows, AdamGroupState& state,
                   const AdamHyper& hyper) {
    // Sorted row order keeps the update sequence reproducible.
    std::vector<std::uint32_t> touched;
    touched.reserve(rows.size());
    for (const auto& [row, grad] : rows) {
        if (row >= params.rows()) {
            throw ShapeMismatch("gradient row index out of range");
        }
        if (grad.size() != params.cols()) {
            throw ShapeMismatch("gradient row width differs from parameter width");
        }
        touched.push_back(row);
    }
    std::sort(touched.begin(), touched.end());
    for (const auto row : touched) {
        state.row_steps[row] += 1;
        update_row(params.row(row), rows.at(row), state.m.row(row), state.v.row(row),
                   state.row_steps[row], hyper);
    }
}

}  // namespace

AdamState::AdamState(const ModelParams& params, AdamHyper h)
    : words(params.word_vectors.rows(), params.word_vectors.cols()),
      topics(params.topics.rows(), params.topics.cols()),
      docs(params.doc_logits.rows(), params.doc_logits.cols()),
      hyper(h) {}

void adam_step(ModelParams& params, const BatchGradients& grads, AdamState& state) {
    if (!state.words.m.same_shape(params.word_vectors) ||
        !state.topics.m.same_shape(params.topics) ||
        !state.docs.m.same_shape(params.doc_logits)) {
        throw ShapeMismatch("optimizer state shape differs from parameters");
    }

    update_sparse(params.word_vectors, grads.word_rows, state.words, state.hyper);

    if (!grads.topic_grad.empty()) {
        if (!grads.topic_grad.same_shape(params.topics)) {
            throw ShapeMismatch("topic gradient shape differs from topic matrix");
        }
        for (std::size_t k = 0; k < params.topics.rows(); ++k) {
            state.topics.row_steps[k] += 1;
            update_row(params.topics.row(k), grads.topic_grad.row(k), state.topics.m.row(k),
                       state.topics.v.row(k), state.topics.row_steps[k], state.hyper);
        }
    }

    update_sparse(params.doc_logits, grads.doc_rows, state.docs, state.hyper);
}

}  // namespace lda2vec
