#include "lda2vec/sampler.hpp"

#include <cmath>
#include <string>

#include "lda2vec/errors.hpp"

namespace lda2vec {

NoiseDistribution build_noise(const Vocabulary& vocab, double beta) {
    if (!(beta >= 0.0 && beta <= 1.0)) {
        throw InvalidBeta("beta must lie in [0, 1], got " + std::to_string(beta));
    }
    const std::size_t n = vocab.size();
    if (n == 0) {
        throw EmptyVocabulary("cannot build a noise distribution over an empty vocabulary");
    }

    NoiseDistribution dist;
    dist.probs_.resize(n);
    double norm = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double weighted = std::pow(static_cast<double>(vocab.counts()[i]), beta);
        dist.probs_[i] = weighted;
        norm += weighted;
    }
    for (auto& p : dist.probs_) {
        p /= norm;
    }

    // Vose alias construction: O(n) setup, O(1) per draw.
    dist.accept_.assign(n, 1.0);
    dist.alias_.assign(n, 0);
    std::vector<double> scaled(n);
    std::vector<std::uint32_t> small;
    std::vector<std::uint32_t> large;
    for (std::size_t i = 0; i < n; ++i) {
        scaled[i] = dist.probs_[i] * static_cast<double>(n);
        (scaled[i] < 1.0 ? small : large).push_back(static_cast<std::uint32_t>(i));
    }
    while (!small.empty() && !large.empty()) {
        const std::uint32_t s = small.back();
        const std::uint32_t l = large.back();
        small.pop_back();
        large.pop_back();
        dist.accept_[s] = scaled[s];
        dist.alias_[s] = l;
        scaled[l] = (scaled[l] + scaled[s]) - 1.0;
        (scaled[l] < 1.0 ? small : large).push_back(l);
    }
    // Leftovers are 1.0 up to rounding.
    for (const std::uint32_t i : large) {
        dist.accept_[i] = 1.0;
        dist.alias_[i] = i;
    }
    for (const std::uint32_t i : small) {
        dist.accept_[i] = 1.0;
        dist.alias_[i] = i;
    }
    return dist;
}

std::vector<std::uint32_t> draw_negatives(const NoiseDistribution& dist, Rng& rng,
                                          std::size_t n) {
    if (n < 1) {
        throw std::invalid_argument("number of negative draws must be >= 1");
    }
    std::vector<std::uint32_t> out(n);
    for (auto& id : out) {
        id = dist.sample(rng);
    }
    return out;
}

}  // namespace lda2vec
