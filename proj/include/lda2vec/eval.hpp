#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "lda2vec/corpus.hpp"
#include "lda2vec/model.hpp"

namespace lda2vec {

struct ScoredToken {
    std::uint32_t id = 0;
    std::string token;
    double score = 0.0;
};

struct TopicSummary {
    std::uint32_t topic_id = 0;
    std::vector<ScoredToken> top;  // scores non-increasing, ties by id
    std::optional<double> coherence;
};

// Sliding-window occurrence statistics. Windows are contiguous spans of
// window_size tokens, stride 1, truncated at document ends; a document shorter
// than the window contributes exactly one window.
struct CooccurrenceStats {
    std::uint64_t total_windows = 0;
    std::unordered_map<std::uint32_t, std::uint64_t> window_counts;
    // key = (min_id << 32) | max_id
    std::unordered_map<std::uint64_t, std::uint64_t> joint_counts;

    static std::uint64_t pair_key(std::uint32_t a, std::uint32_t b) {
        const std::uint64_t lo = a < b ? a : b;
        const std::uint64_t hi = a < b ? b : a;
        return (lo << 32) | hi;
    }
};

// Ranks the vocabulary by t_k . w_i, descending, ties by token id.
TopicSummary topic_top_words(const ModelParams& params, const Vocabulary& vocab,
                             std::uint32_t topic, std::size_t top_n);

// Cosine ranking, query excluded.
std::vector<ScoredToken> most_similar(const ModelParams& params, const Vocabulary& vocab,
                                      std::uint32_t query, std::size_t top_n);
std::vector<ScoredToken> most_similar(const ModelParams& params, const Vocabulary& vocab,
                                      std::string_view query, std::size_t top_n);

// Analogy a : a* :: b : x scored as cos(x,b) * cos(x,a*) / (cos(x,a) + eps)
// over cosines shifted to [0,1]; positive = {a*, b}, negative = a. Query
// tokens are excluded from the candidates.
std::vector<ScoredToken> three_cos_mul(const ModelParams& params, const Vocabulary& vocab,
                                       std::uint32_t positive_a, std::uint32_t positive_b,
                                       std::uint32_t negative, std::size_t top_n);
std::vector<ScoredToken> three_cos_mul(const ModelParams& params, const Vocabulary& vocab,
                                       std::string_view positive_a, std::string_view positive_b,
                                       std::string_view negative, std::size_t top_n);

// Counts, for every token (pair) of interest, the windows containing it at
// least once. An empty filter means every token is of interest; restrict to
// the queried words on large corpora.
CooccurrenceStats build_cooccurrence(const std::vector<Document>& docs,
                                     std::uint32_t window_size = 110,
                                     const std::vector<std::uint32_t>& words_of_interest = {});

// Mean pairwise NPMI over the word set, +1 additive smoothing on joint
// counts. Throws InsufficientStats when a word has no marginal count.
double npmi_coherence(const CooccurrenceStats& stats, const std::vector<std::uint32_t>& words);

// --- formatters (shared by the CLI so its output is byte-identical) ---

std::string format_topic_table(const std::vector<TopicSummary>& topics);
std::string format_topics_tsv(const std::vector<TopicSummary>& topics);
std::string format_ranking(const std::vector<ScoredToken>& ranking);
std::string format_ranking_tsv(const std::vector<ScoredToken>& ranking);

}  // namespace lda2vec
