#include "lda2vec/trainer.hpp"

#include <chrono>
#include <cmath>
#include <condition_variable>
#include <cstdio>
#include <deque>
#include <mutex>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <thread>
#include <unordered_set>

#include "lda2vec/errors.hpp"
#include "lda2vec/optimizer.hpp"

namespace lda2vec {

double dirichlet_scale(std::size_t batch_pairs, std::size_t total_pairs) {
    if (batch_pairs == 0 || total_pairs == 0) {
        throw std::invalid_argument("pair counts must be positive");
    }
    if (batch_pairs > total_pairs) {
        throw std::invalid_argument("batch cannot exceed the corpus");
    }
    return static_cast<double>(batch_pairs) / static_cast<double>(total_pairs);
}

void assemble_batch_into(Batch& out, std::span<const TrainingPair> pairs,
                         const NoiseDistribution& noise, Rng& rng, const TrainConfig& config,
                         bool training) {
    out.training = training;
    out.items.resize(pairs.size());
    const bool with_masks = training && config.dropout_p > 0.0;
    for (std::size_t i = 0; i < pairs.size(); ++i) {
        BatchItem& item = out.items[i];
        item.pair = pairs[i];
        item.negatives.resize(config.n_negatives);
        for (auto& id : item.negatives) {
            id = noise.sample(rng);
        }
        if (with_masks) {
            item.mask_pivot.resize(config.dim);
            item.mask_doc.resize(config.dim);
            for (auto& keep : item.mask_pivot) {
                keep = rng.next_double() >= config.dropout_p ? 1 : 0;
            }
            for (auto& keep : item.mask_doc) {
                keep = rng.next_double() >= config.dropout_p ? 1 : 0;
            }
        } else {
            item.mask_pivot.clear();
            item.mask_doc.clear();
        }
    }
}

Batch assemble_batch(std::span<const TrainingPair> pairs, const NoiseDistribution& noise,
                     Rng& rng, const TrainConfig& config, bool training) {
    Batch batch;
    assemble_batch_into(batch, pairs, noise, rng, config, training);
    return batch;
}

namespace {

void shuffle_pairs(std::vector<TrainingPair>& pairs, Rng& rng) {
    for (std::size_t i = pairs.size(); i > 1; --i) {
        const std::size_t j = rng.next_below(i);
        std::swap(pairs[i - 1], pairs[j]);
    }
}

// Simplex statistics over the documents that contribute pairs.
void simplex_stats(const ModelParams& params, const std::vector<std::uint32_t>& doc_ids,
                   double& mean_max_p, double& mean_entropy) {
    double max_sum = 0.0;
    double entropy_sum = 0.0;
    std::vector<double> p(params.n_topics());
    for (const auto doc_id : doc_ids) {
        softmax(params.doc_logits.row(doc_id), p);
        double max_p = 0.0;
        double entropy = 0.0;
        for (const double v : p) {
            max_p = std::max(max_p, v);
            entropy -= v * std::log(v);
        }
        max_sum += max_p;
        entropy_sum += entropy;
    }
    mean_max_p = max_sum / static_cast<double>(doc_ids.size());
    mean_entropy = entropy_sum / static_cast<double>(doc_ids.size());
}

// Bounded handoff queue for the assembly pipeline. close() releases a blocked
// producer so a failing consumer can always join it.
class BatchQueue {
public:
    explicit BatchQueue(std::size_t capacity) : capacity_(capacity) {}

    // Returns false when the queue was closed and the batch dropped.
    bool push(Batch batch) {
        std::unique_lock lock(mutex_);
        not_full_.wait(lock, [&] { return queue_.size() < capacity_ || closed_; });
        if (closed_) {
            return false;
        }
        queue_.push_back(std::move(batch));
        not_empty_.notify_one();
        return true;
    }

    Batch pop() {
        std::unique_lock lock(mutex_);
        not_empty_.wait(lock, [&] { return !queue_.empty(); });
        Batch batch = std::move(queue_.front());
        queue_.pop_front();
        not_full_.notify_one();
        return batch;
    }

    void close() {
        std::unique_lock lock(mutex_);
        closed_ = true;
        not_full_.notify_all();
    }

private:
    std::size_t capacity_;
    bool closed_ = false;
    std::mutex mutex_;
    std::condition_variable not_full_;
    std::condition_variable not_empty_;
    std::deque<Batch> queue_;
};

}  // namespace

std::string format_report_row(const EpochStats& stats) {
    char buf[192];
    std::snprintf(buf, sizeof(buf), "%u\t%.6f\t%.6f\t%.6f\t%.6f\t%.3f", stats.epoch,
                  stats.mean_sgns_objective, stats.dirichlet_objective, stats.mean_max_p,
                  stats.mean_entropy, stats.seconds);
    return buf;
}

std::string format_report(const TrainReport& report) {
    std::ostringstream out;
    out << "epoch\tsgns_objective\tdirichlet_objective\tmean_max_p\tmean_entropy\tseconds\n";
    for (const auto& stats : report) {
        out << format_report_row(stats) << '\n';
    }
    return out.str();
}

TrainResult train(const std::vector<Document>& docs, const Vocabulary& vocab,
                  const TrainConfig& config, TrainOptions options) {
    config.validate();

    std::vector<TrainingPair> pairs = extract_all_pairs(docs, config.window);
    if (pairs.empty()) {
        throw EmptyCorpus("corpus yields no training pairs");
    }
    const std::size_t total_pairs = pairs.size();

    std::vector<std::uint32_t> contributing_docs;
    {
        std::unordered_set<std::uint32_t> seen;
        for (const auto& pair : pairs) {
            if (seen.insert(pair.doc_id).second) {
                contributing_docs.push_back(pair.doc_id);
            }
        }
    }

    Rng init_rng(config.seed, 0);
    TrainResult result;
    if (options.initial_params) {
        result.params = std::move(*options.initial_params);
        if (result.params.vocab_size() != vocab.size() || result.params.dim() != config.dim ||
            result.params.n_topics() != config.n_topics ||
            result.params.n_docs() != docs.size()) {
            throw ShapeMismatch("initial parameters disagree with corpus/config shapes");
        }
    } else {
        result.params = init_params(vocab.size(), docs.size(), config, init_rng);
    }

    const NoiseDistribution noise = build_noise(vocab, config.beta);
    AdamState adam(result.params, AdamHyper{.lr = config.lr});
    Rng epoch_rng(config.seed, 1);

    const std::size_t n_batches = (total_pairs + config.batch_size - 1) / config.batch_size;

    auto process_batch = [&](std::uint32_t epoch, Batch& batch) {
        batch.dirichlet_scale = dirichlet_scale(batch.items.size(), total_pairs);
        BackwardResult backward = batch_backward(batch, result.params, config);
        if (options.observer) {
            options.observer(epoch, batch, backward, result.params);
        }
        if (options.freeze_topics) {
            backward.grads.topic_grad = Matrix();
        }
        adam_step(result.params, backward.grads, adam);
        return std::pair<double, double>{backward.sgns_objective, backward.dirichlet_objective};
    };

    auto finish_epoch = [&](std::uint32_t epoch, double sgns_sum, double dirichlet_sum,
                            std::chrono::steady_clock::time_point started) {
        EpochStats stats;
        stats.epoch = epoch;
        stats.mean_sgns_objective = sgns_sum / static_cast<double>(total_pairs);
        stats.dirichlet_objective = dirichlet_sum;
        simplex_stats(result.params, contributing_docs, stats.mean_max_p, stats.mean_entropy);
        stats.seconds =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
        result.report.push_back(stats);
        if (options.progress) {
            (*options.progress) << format_report_row(stats) << '\n';
        }
    };

    if (options.threads <= 1) {
        Batch batch;  // buffers reused across the whole run
        for (std::uint32_t epoch = 0; epoch < config.epochs; ++epoch) {
            const auto started = std::chrono::steady_clock::now();
            shuffle_pairs(pairs, epoch_rng);
            double sgns_sum = 0.0;
            double dirichlet_sum = 0.0;
            for (std::size_t begin = 0; begin < total_pairs; begin += config.batch_size) {
                const std::size_t count = std::min<std::size_t>(config.batch_size,
                                                                total_pairs - begin);
                assemble_batch_into(batch, {pairs.data() + begin, count}, noise, epoch_rng,
                                    config, true);
                const auto [sgns, dirichlet] = process_batch(epoch, batch);
                sgns_sum += sgns;
                dirichlet_sum += dirichlet;
            }
            finish_epoch(epoch, sgns_sum, dirichlet_sum, started);
        }
        return result;
    }

    // Pipelined mode: one producer assembles batches (and owns the RNG) while
    // this thread stays the single writer of parameters. Batch order is
    // preserved; bitwise determinism is not part of the contract here.
    BatchQueue queue(4);
    std::exception_ptr producer_error;
    std::thread producer([&] {
        try {
            for (std::uint32_t epoch = 0; epoch < config.epochs; ++epoch) {
                shuffle_pairs(pairs, epoch_rng);
                for (std::size_t begin = 0; begin < total_pairs; begin += config.batch_size) {
                    const std::size_t count = std::min<std::size_t>(config.batch_size,
                                                                    total_pairs - begin);
                    if (!queue.push(assemble_batch({pairs.data() + begin, count}, noise,
                                                   epoch_rng, config, true))) {
                        return;  // consumer closed the queue
                    }
                }
            }
        } catch (...) {
            producer_error = std::current_exception();
            queue.push(Batch{});  // unblock the consumer
        }
    });

    try {
        for (std::uint32_t epoch = 0; epoch < config.epochs; ++epoch) {
            const auto started = std::chrono::steady_clock::now();
            double sgns_sum = 0.0;
            double dirichlet_sum = 0.0;
            for (std::size_t b = 0; b < n_batches; ++b) {
                Batch batch = queue.pop();
                if (batch.items.empty()) {
                    throw EmptyCorpus("batch assembly failed");
                }
                const auto [sgns, dirichlet] = process_batch(epoch, batch);
                sgns_sum += sgns;
                dirichlet_sum += dirichlet;
            }
            finish_epoch(epoch, sgns_sum, dirichlet_sum, started);
        }
    } catch (...) {
        queue.close();
        producer.join();
        if (producer_error) {
            std::rethrow_exception(producer_error);
        }
        throw;
    }
    producer.join();
    if (producer_error) {
        std::rethrow_exception(producer_error);
    }
    return result;
}

}  // namespace lda2vec
