#pragma once

// Synthetic corpora with known structure for behavioural tests.

#include <cstdint>
#include <cstdio>
#include <string>
#include <vector>

#include "lda2vec/corpus.hpp"
#include "lda2vec/model.hpp"
#include "lda2vec/rng.hpp"

namespace testsupport {

struct LabeledCorpus {
    std::vector<lda2vec::Document> docs;
    lda2vec::Vocabulary vocab;
    std::vector<int> labels;                      // generating topic per document
    std::vector<std::string> lines;               // raw one-document-per-line form
};

inline std::string numbered_token(char prefix, std::size_t i) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%c%03zu", prefix, i);
    return buf;
}

// Two topics with disjoint vocabularies: documents of one topic draw tokens
// uniformly from their own side only.
inline LabeledCorpus make_two_topic_corpus(std::size_t docs_per_topic,
                                           std::size_t tokens_per_doc,
                                           std::size_t vocab_per_topic, std::uint64_t seed) {
    lda2vec::Rng rng(seed);
    std::vector<std::vector<std::string>> tokenized;
    LabeledCorpus corpus;
    for (int topic = 0; topic < 2; ++topic) {
        const char prefix = topic == 0 ? 'a' : 'b';
        for (std::size_t d = 0; d < docs_per_topic; ++d) {
            std::vector<std::string> doc;
            std::string line;
            doc.reserve(tokens_per_doc);
            for (std::size_t t = 0; t < tokens_per_doc; ++t) {
                doc.push_back(numbered_token(prefix, rng.next_below(vocab_per_topic)));
                if (t > 0) {
                    line += ' ';
                }
                line += doc.back();
            }
            tokenized.push_back(std::move(doc));
            corpus.lines.push_back(std::move(line));
            corpus.labels.push_back(topic);
        }
    }
    corpus.vocab = lda2vec::build_vocab(tokenized, 1);
    corpus.docs = lda2vec::encode(tokenized, corpus.vocab);
    return corpus;
}

// Documents over a single vocabulary with a blocky co-occurrence structure:
// each document picks a theme and draws from a contiguous id range.
inline LabeledCorpus make_themed_corpus(std::size_t n_docs, std::size_t tokens_per_doc,
                                        std::size_t n_themes, std::size_t vocab_per_theme,
                                        std::uint64_t seed) {
    lda2vec::Rng rng(seed);
    std::vector<std::vector<std::string>> tokenized;
    LabeledCorpus corpus;
    for (std::size_t d = 0; d < n_docs; ++d) {
        const auto theme = static_cast<std::size_t>(rng.next_below(n_themes));
        std::vector<std::string> doc;
        std::string line;
        doc.reserve(tokens_per_doc);
        for (std::size_t t = 0; t < tokens_per_doc; ++t) {
            const std::size_t word = theme * vocab_per_theme + rng.next_below(vocab_per_theme);
            doc.push_back(numbered_token('w', word));
            if (t > 0) {
                line += ' ';
            }
            line += doc.back();
        }
        tokenized.push_back(std::move(doc));
        corpus.lines.push_back(std::move(line));
        corpus.labels.push_back(static_cast<int>(theme));
    }
    corpus.vocab = lda2vec::build_vocab(tokenized, 1);
    corpus.docs = lda2vec::encode(tokenized, corpus.vocab);
    return corpus;
}

// Random documents straight over token ids, for oracle comparisons.
inline std::vector<lda2vec::Document> make_random_docs(std::size_t n_docs, std::size_t max_len,
                                                       std::uint32_t vocab_size,
                                                       std::uint64_t seed) {
    lda2vec::Rng rng(seed);
    std::vector<lda2vec::Document> docs(n_docs);
    for (std::size_t d = 0; d < n_docs; ++d) {
        docs[d].doc_id = static_cast<std::uint32_t>(d);
        const std::size_t len = rng.next_below(max_len + 1);
        docs[d].tokens.resize(len);
        for (auto& token : docs[d].tokens) {
            token = static_cast<std::uint32_t>(rng.next_below(vocab_size));
        }
    }
    return docs;
}

// Fraction of documents whose argmax proportion matches their generating
// topic, maximized over the two topic permutations.
inline double topic_recovery_rate(const lda2vec::ModelParams& params,
                                  const std::vector<int>& labels) {
    std::size_t direct = 0;
    std::size_t flipped = 0;
    for (std::size_t d = 0; d < labels.size(); ++d) {
        const auto logits = params.doc_logits.row(d);
        const int argmax = logits[0] >= logits[1] ? 0 : 1;
        direct += argmax == labels[d] ? 1 : 0;
        flipped += argmax != labels[d] ? 1 : 0;
    }
    return static_cast<double>(direct > flipped ? direct : flipped) /
           static_cast<double>(labels.size());
}

}  // namespace testsupport
