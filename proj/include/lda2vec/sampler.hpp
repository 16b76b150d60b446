#pragma once

#include <cstdint>
#include <vector>

#include "lda2vec/corpus.hpp"
#include "lda2vec/rng.hpp"

namespace lda2vec {

// Noise distribution u^beta over vocabulary ids with an alias table for O(1)
// draws. Immutable after construction; safe for concurrent reads.
class NoiseDistribution {
public:
    NoiseDistribution() = default;

    const std::vector<double>& probs() const { return probs_; }
    std::size_t size() const { return probs_.size(); }

    std::uint32_t sample(Rng& rng) const {
        const auto column = static_cast<std::uint32_t>(rng.next_below(probs_.size()));
        return rng.next_double() < accept_[column] ? column : alias_[column];
    }

private:
    friend NoiseDistribution build_noise(const Vocabulary& vocab, double beta);

    std::vector<double> probs_;
    std::vector<double> accept_;        // per-column acceptance threshold
    std::vector<std::uint32_t> alias_;  // fallback id per column
};

// probs[i] = counts[i]^beta / sum_k counts[k]^beta.
// Throws InvalidBeta outside [0, 1], EmptyVocabulary on an empty vocabulary.
NoiseDistribution build_noise(const Vocabulary& vocab, double beta);

// n i.i.d. draws; repeats allowed, the positive target is not excluded.
std::vector<std::uint32_t> draw_negatives(const NoiseDistribution& dist, Rng& rng, std::size_t n);

}  // namespace lda2vec
