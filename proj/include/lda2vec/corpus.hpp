#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace lda2vec {

struct TokenizerRules {
    bool lowercase = true;
    bool filter_urls_numbers = true;
};

// An encoded document: a flat stream of token ids. Windows span the whole
// stream; there is no sentence segmentation.
struct Document {
    std::uint32_t doc_id = 0;
    std::vector<std::uint32_t> tokens;
};

// Token ids are assigned by descending corpus frequency with lexicographic
// tie-break, so id 0 is always the most frequent token.
class Vocabulary {
public:
    Vocabulary() = default;

    // Builds from raw (token, count) pairs; sorts into canonical order.
    // Counts must be positive.
    static Vocabulary from_token_counts(std::vector<std::pair<std::string, std::uint64_t>> counts);

    std::size_t size() const { return tokens_.size(); }
    const std::vector<std::string>& tokens() const { return tokens_; }
    const std::vector<std::uint64_t>& counts() const { return counts_; }
    std::uint64_t total_count() const { return total_count_; }

    const std::string& token(std::uint32_t id) const { return tokens_[id]; }
    std::uint64_t count(std::uint32_t id) const { return counts_[id]; }
    std::optional<std::uint32_t> id_of(std::string_view token) const;

private:
    std::vector<std::string> tokens_;
    std::vector<std::uint64_t> counts_;
    std::uint64_t total_count_ = 0;
    std::unordered_map<std::string, std::uint32_t> index_;
};

// One SGNS observation: pivot predicts target within a window of document doc_id.
struct TrainingPair {
    std::uint32_t doc_id = 0;
    std::uint32_t pivot = 0;
    std::uint32_t target = 0;

    friend bool operator==(const TrainingPair&, const TrainingPair&) = default;
};

// Splits on Unicode whitespace, strips ASCII punctuation at token edges,
// optionally lowercases (ASCII) and drops URL-like and pure-number tokens.
std::vector<std::string> tokenize(std::string_view text, const TokenizerRules& rules = {});

// Keeps tokens whose full-corpus frequency is >= min_count.
// Throws EmptyVocabulary when nothing survives.
Vocabulary build_vocab(const std::vector<std::vector<std::string>>& docs, std::uint64_t min_count);

// Maps token strings to ids, dropping out-of-vocabulary tokens. Documents left
// empty are retained (they keep their doc_id) but yield no pairs.
std::vector<Document> encode(const std::vector<std::vector<std::string>>& docs,
                             const Vocabulary& vocab);

// Emits (doc_id, tokens[p], tokens[q]) for every q != p with |q - p| <= window,
// ordered by p then q.
std::vector<TrainingPair> extract_pairs(const Document& doc, std::uint32_t window);

// All pairs of a corpus in doc_id order.
std::vector<TrainingPair> extract_all_pairs(const std::vector<Document>& docs,
                                            std::uint32_t window);

// Corpus file format: UTF-8 plain text, LF-separated, one document per line.
std::vector<std::string> read_corpus_lines(const std::string& path);

// Vocabulary export: lines of "token<TAB>count" in vocabulary order.
std::string format_vocab(const Vocabulary& vocab);

}  // namespace lda2vec
