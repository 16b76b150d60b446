#include "lda2vec/eval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>
#include <stdexcept>
#include <unordered_set>

#include "lda2vec/errors.hpp"

namespace lda2vec {

namespace {

double dot(std::span<const double> a, std::span<const double> b) {
    double sum = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        sum += a[i] * b[i];
    }
    return sum;
}

double norm(std::span<const double> a) { return std::sqrt(dot(a, a)); }

// Zero vectors get cosine 0 so degenerate models still rank deterministically.
double cosine(std::span<const double> a, std::span<const double> b) {
    const double na = norm(a);
    const double nb = norm(b);
    if (na == 0.0 || nb == 0.0) {
        return 0.0;
    }
    return dot(a, b) / (na * nb);
}

void sort_ranking(std::vector<ScoredToken>& scored) {
    std::sort(scored.begin(), scored.end(), [](const ScoredToken& a, const ScoredToken& b) {
        if (a.score != b.score) {
            return a.score > b.score;
        }
        return a.id < b.id;
    });
}

void check_vocab(const ModelParams& params, const Vocabulary& vocab) {
    if (params.vocab_size() != vocab.size()) {
        throw ShapeMismatch("vocabulary size differs from word matrix rows");
    }
}

std::uint32_t resolve_token(const Vocabulary& vocab, std::string_view token) {
    if (const auto id = vocab.id_of(token)) {
        return *id;
    }
    throw UnknownToken("token not in vocabulary: " + std::string(token));
}

}  // namespace

TopicSummary topic_top_words(const ModelParams& params, const Vocabulary& vocab,
                             std::uint32_t topic, std::size_t top_n) {
    check_vocab(params, vocab);
    if (topic >= params.n_topics()) {
        throw TopicOutOfRange("topic " + std::to_string(topic) + " >= n_topics " +
                              std::to_string(params.n_topics()));
    }
    const auto topic_vec = params.topics.row(topic);
    std::vector<ScoredToken> scored;
    scored.reserve(vocab.size());
    for (std::uint32_t i = 0; i < vocab.size(); ++i) {
        scored.push_back({i, vocab.token(i), dot(topic_vec, params.word_vectors.row(i))});
    }
    sort_ranking(scored);
    scored.resize(std::min(top_n, scored.size()));

    TopicSummary summary;
    summary.topic_id = topic;
    summary.top = std::move(scored);
    return summary;
}

std::vector<ScoredToken> most_similar(const ModelParams& params, const Vocabulary& vocab,
                                      std::uint32_t query, std::size_t top_n) {
    check_vocab(params, vocab);
    if (query >= vocab.size()) {
        throw UnknownToken("token id out of range: " + std::to_string(query));
    }
    const auto query_vec = params.word_vectors.row(query);
    std::vector<ScoredToken> scored;
    scored.reserve(vocab.size());
    for (std::uint32_t i = 0; i < vocab.size(); ++i) {
        if (i == query) {
            continue;
        }
        scored.push_back({i, vocab.token(i), cosine(query_vec, params.word_vectors.row(i))});
    }
    sort_ranking(scored);
    scored.resize(std::min(top_n, scored.size()));
    return scored;
}

std::vector<ScoredToken> most_similar(const ModelParams& params, const Vocabulary& vocab,
                                      std::string_view query, std::size_t top_n) {
    return most_similar(params, vocab, resolve_token(vocab, query), top_n);
}

std::vector<ScoredToken> three_cos_mul(const ModelParams& params, const Vocabulary& vocab,
                                       std::uint32_t positive_a, std::uint32_t positive_b,
                                       std::uint32_t negative, std::size_t top_n) {
    check_vocab(params, vocab);
    for (const auto id : {positive_a, positive_b, negative}) {
        if (id >= vocab.size()) {
            throw UnknownToken("token id out of range: " + std::to_string(id));
        }
    }
    constexpr double kEps = 0.001;
    const auto vec_a = params.word_vectors.row(positive_a);
    const auto vec_b = params.word_vectors.row(positive_b);
    const auto vec_neg = params.word_vectors.row(negative);

    std::vector<ScoredToken> scored;
    scored.reserve(vocab.size());
    for (std::uint32_t i = 0; i < vocab.size(); ++i) {
        if (i == positive_a || i == positive_b || i == negative) {
            continue;
        }
        const auto x = params.word_vectors.row(i);
        // Cosines shifted to [0, 1] keep the product/quotient well-behaved.
        const double sim_a = (cosine(x, vec_a) + 1.0) / 2.0;
        const double sim_b = (cosine(x, vec_b) + 1.0) / 2.0;
        const double sim_neg = (cosine(x, vec_neg) + 1.0) / 2.0;
        scored.push_back({i, vocab.token(i), sim_a * sim_b / (sim_neg + kEps)});
    }
    sort_ranking(scored);
    scored.resize(std::min(top_n, scored.size()));
    return scored;
}

std::vector<ScoredToken> three_cos_mul(const ModelParams& params, const Vocabulary& vocab,
                                       std::string_view positive_a, std::string_view positive_b,
                                       std::string_view negative, std::size_t top_n) {
    return three_cos_mul(params, vocab, resolve_token(vocab, positive_a),
                         resolve_token(vocab, positive_b), resolve_token(vocab, negative), top_n);
}

CooccurrenceStats build_cooccurrence(const std::vector<Document>& docs,
                                     std::uint32_t window_size,
                                     const std::vector<std::uint32_t>& words_of_interest) {
    if (window_size < 1) {
        throw std::invalid_argument("window_size must be >= 1");
    }
    const std::unordered_set<std::uint32_t> filter(words_of_interest.begin(),
                                                   words_of_interest.end());
    const bool keep_all = filter.empty();

    CooccurrenceStats stats;
    std::unordered_map<std::uint32_t, std::uint32_t> in_window;  // token -> count in window

    for (const auto& doc : docs) {
        const std::size_t len = doc.tokens.size();
        if (len == 0) {
            continue;  // an empty document contributes no window
        }
        const std::size_t span = std::min<std::size_t>(window_size, len);
        const std::size_t n_windows = len - span + 1;

        in_window.clear();
        auto add = [&](std::uint32_t token) {
            if (keep_all || filter.contains(token)) {
                ++in_window[token];
            }
        };
        auto remove = [&](std::uint32_t token) {
            if (keep_all || filter.contains(token)) {
                const auto it = in_window.find(token);
                if (--it->second == 0) {
                    in_window.erase(it);
                }
            }
        };

        for (std::size_t i = 0; i < span; ++i) {
            add(doc.tokens[i]);
        }
        for (std::size_t start = 0;; ++start) {
            // Tally the distinct tokens present in the current window.
            for (auto x = in_window.begin(); x != in_window.end(); ++x) {
                ++stats.window_counts[x->first];
                for (auto y = std::next(x); y != in_window.end(); ++y) {
                    ++stats.joint_counts[CooccurrenceStats::pair_key(x->first, y->first)];
                }
            }
            if (start + 1 >= n_windows) {
                break;
            }
            remove(doc.tokens[start]);
            add(doc.tokens[start + span]);
        }
        stats.total_windows += n_windows;
    }
    return stats;
}

double npmi_coherence(const CooccurrenceStats& stats, const std::vector<std::uint32_t>& words) {
    std::vector<std::uint32_t> unique;
    {
        std::unordered_set<std::uint32_t> seen;
        for (const auto w : words) {
            if (seen.insert(w).second) {
                unique.push_back(w);
            }
        }
    }
    if (unique.size() < 2) {
        throw std::invalid_argument("npmi_coherence needs at least two distinct words");
    }
    if (stats.total_windows == 0) {
        throw InsufficientStats("co-occurrence statistics cover no windows");
    }

    const double total = static_cast<double>(stats.total_windows);
    auto marginal = [&](std::uint32_t w) {
        const auto it = stats.window_counts.find(w);
        if (it == stats.window_counts.end() || it->second == 0) {
            throw InsufficientStats("word id " + std::to_string(w) + " has no window count");
        }
        return static_cast<double>(it->second) / total;
    };

    double sum = 0.0;
    std::size_t n_pairs = 0;
    for (std::size_t i = 0; i < unique.size(); ++i) {
        const double p_x = marginal(unique[i]);
        for (std::size_t j = i + 1; j < unique.size(); ++j) {
            const double p_y = marginal(unique[j]);
            const auto it =
                stats.joint_counts.find(CooccurrenceStats::pair_key(unique[i], unique[j]));
            const std::uint64_t joint = it == stats.joint_counts.end() ? 0 : it->second;
            // +1 additive smoothing keeps unseen pairs finite.
            const double p_xy = static_cast<double>(joint + 1) / total;
            ++n_pairs;
            if (p_xy >= 1.0) {
                sum += 1.0;  // saturated pair: smoothing pushed the joint past every window
                continue;
            }
            sum += std::log(p_xy / (p_x * p_y)) / -std::log(p_xy);
        }
    }
    return sum / static_cast<double>(n_pairs);
}

std::string format_topic_table(const std::vector<TopicSummary>& topics) {
    std::ostringstream out;
    for (const auto& topic : topics) {
        out << "Topic " << topic.topic_id;
        if (topic.coherence) {
            char buf[48];
            std::snprintf(buf, sizeof(buf), "  (coherence %.4f)", *topic.coherence);
            out << buf;
        }
        out << '\n';
        std::size_t width = 5;
        for (const auto& entry : topic.top) {
            width = std::max(width, entry.token.size());
        }
        for (std::size_t r = 0; r < topic.top.size(); ++r) {
            const auto& entry = topic.top[r];
            char buf[64];
            std::snprintf(buf, sizeof(buf), "%4zu  ", r + 1);
            out << buf << entry.token << std::string(width - entry.token.size() + 2, ' ');
            std::snprintf(buf, sizeof(buf), "%12.6f\n", entry.score);
            out << buf;
        }
    }
    return out.str();
}

std::string format_topics_tsv(const std::vector<TopicSummary>& topics) {
    std::ostringstream out;
    for (const auto& topic : topics) {
        for (std::size_t r = 0; r < topic.top.size(); ++r) {
            const auto& entry = topic.top[r];
            char buf[48];
            std::snprintf(buf, sizeof(buf), "%.6f", entry.score);
            out << topic.topic_id << '\t' << (r + 1) << '\t' << entry.token << '\t' << buf
                << '\n';
        }
    }
    return out.str();
}

std::string format_ranking(const std::vector<ScoredToken>& ranking) {
    std::ostringstream out;
    std::size_t width = 5;
    for (const auto& entry : ranking) {
        width = std::max(width, entry.token.size());
    }
    for (std::size_t r = 0; r < ranking.size(); ++r) {
        char buf[64];
        std::snprintf(buf, sizeof(buf), "%4zu  ", r + 1);
        out << buf << ranking[r].token << std::string(width - ranking[r].token.size() + 2, ' ');
        std::snprintf(buf, sizeof(buf), "%12.6f\n", ranking[r].score);
        out << buf;
    }
    return out.str();
}

std::string format_ranking_tsv(const std::vector<ScoredToken>& ranking) {
    std::ostringstream out;
    for (std::size_t r = 0; r < ranking.size(); ++r) {
        char buf[48];
        std::snprintf(buf, sizeof(buf), "%.6f", ranking[r].score);
        out << (r + 1) << '\t' << ranking[r].token << '\t' << buf << '\n';
    }
    return out.str();
}

}  // namespace lda2vec
