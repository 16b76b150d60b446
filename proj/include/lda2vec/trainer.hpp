#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include "lda2vec/model.hpp"
#include "lda2vec/sampler.hpp"

namespace lda2vec {

struct EpochStats {
    std::uint32_t epoch = 0;
    double mean_sgns_objective = 0.0;  // per-pair mean of -L^neg
    double dirichlet_objective = 0.0;  // summed -L^d over the epoch's batches
    double mean_max_p = 0.0;           // sparsity proxy over contributing docs
    double mean_entropy = 0.0;         // mean simplex entropy, natural log
    double seconds = 0.0;

    friend bool operator==(const EpochStats&, const EpochStats&) = default;
};

using TrainReport = std::vector<EpochStats>;

std::string format_report_row(const EpochStats& stats);
std::string format_report(const TrainReport& report);

// Called after each batch_backward and before the optimizer step; params
// still holds the values the backward pass saw.
using BatchObserver = std::function<void(std::uint32_t epoch, const Batch& batch,
                                         const BackwardResult& result,
                                         const ModelParams& params)>;

struct TrainOptions {
    // threads > 1 pipelines batch assembly ahead of the single-writer update
    // thread. Bitwise determinism is only guaranteed in sequential mode
    // (threads == 1).
    unsigned threads = 1;
    std::ostream* progress = nullptr;  // per-epoch TSV rows when set
    BatchObserver observer;
    std::optional<ModelParams> initial_params;  // e.g. pretrained word vectors
    bool freeze_topics = false;                 // keep the topic matrix fixed
};

struct TrainResult {
    ModelParams params;
    TrainReport report;
};

// Runs config.epochs epochs: shuffle all pairs, partition into batches, draw
// negatives and fresh dropout masks per pair, backward, Adam step. Each
// batch's Dirichlet term is scaled by its share of the epoch's pairs.
// Throws EmptyCorpus when the corpus yields no training pair.
TrainResult train(const std::vector<Document>& docs, const Vocabulary& vocab,
                  const TrainConfig& config, TrainOptions options = {});

// Minibatch fraction: batch_pairs / total_pairs.
double dirichlet_scale(std::size_t batch_pairs, std::size_t total_pairs);

// Draws negatives and dropout masks for one slice of the epoch's pair stream.
// Consumes the generator in a fixed order (per pair: negatives, then pivot
// mask, then document mask); mask draws are skipped entirely when dropout_p
// is zero.
Batch assemble_batch(std::span<const TrainingPair> pairs, const NoiseDistribution& noise,
                     Rng& rng, const TrainConfig& config, bool training);

// Same draw sequence, reusing the output batch's buffers across calls.
void assemble_batch_into(Batch& out, std::span<const TrainingPair> pairs,
                         const NoiseDistribution& noise, Rng& rng, const TrainConfig& config,
                         bool training);

}  // namespace lda2vec
