#pragma once

#include <cstdint>
#include <vector>

#include "lda2vec/matrix.hpp"
#include "lda2vec/model.hpp"

namespace lda2vec {

struct AdamHyper {
    double lr = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

// Adam moments for one parameter group. Sparse groups keep a per-row step
// counter: a row's moments and bias correction advance only when the row is
// touched (lazy update), which deliberately deviates from dense Adam for rows
// that skip steps.
struct AdamGroupState {
    Matrix m;
    Matrix v;
    std::vector<std::uint64_t> row_steps;

    explicit AdamGroupState(std::size_t rows = 0, std::size_t cols = 0)
        : m(rows, cols), v(rows, cols), row_steps(rows, 0) {}
};

struct AdamState {
    AdamGroupState words;
    AdamGroupState topics;
    AdamGroupState docs;
    AdamHyper hyper;

    AdamState() = default;
    AdamState(const ModelParams& params, AdamHyper hyper);
};

// Applies one bias-corrected Adam update to every touched row (and the dense
// topic matrix). Untouched rows are left byte-identical. Throws ShapeMismatch
// when gradient shapes disagree with the parameters.
void adam_step(ModelParams& params, const BatchGradients& grads, AdamState& state);

}  // namespace lda2vec
