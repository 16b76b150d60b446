#include "lda2vec/corpus.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "lda2vec/errors.hpp"

namespace lda2vec {

namespace {

bool is_unicode_space(char32_t cp) {
    switch (cp) {
        case 0x09:
        case 0x0A:
        case 0x0B:
        case 0x0C:
        case 0x0D:
        case 0x20:
        case 0x85:
        case 0xA0:
        case 0x1680:
        case 0x2028:
        case 0x2029:
        case 0x202F:
        case 0x205F:
        case 0x3000:
            return true;
        default:
            return cp >= 0x2000 && cp <= 0x200A;
    }
}

// Decodes one UTF-8 code point starting at i; malformed bytes fall back to
// single-byte code points so tokenization never fails on binary junk.
char32_t decode_utf8(std::string_view s, std::size_t& i) {
    const auto b0 = static_cast<unsigned char>(s[i]);
    std::size_t len = 1;
    char32_t cp = b0;
    if (b0 >= 0xF0) {
        len = 4;
        cp = b0 & 0x07;
    } else if (b0 >= 0xE0) {
        len = 3;
        cp = b0 & 0x0F;
    } else if (b0 >= 0xC0) {
        len = 2;
        cp = b0 & 0x1F;
    }
    if (len == 1 || i + len > s.size()) {
        ++i;
        return b0;
    }
    for (std::size_t k = 1; k < len; ++k) {
        const auto b = static_cast<unsigned char>(s[i + k]);
        if ((b & 0xC0) != 0x80) {
            ++i;
            return b0;
        }
        cp = (cp << 6) | (b & 0x3F);
    }
    i += len;
    return cp;
}

bool is_ascii_punct(char c) {
    return std::ispunct(static_cast<unsigned char>(c)) != 0;
}

std::string_view strip_edge_punct(std::string_view token) {
    std::size_t begin = 0;
    std::size_t end = token.size();
    while (begin < end && static_cast<unsigned char>(token[begin]) < 0x80 &&
           is_ascii_punct(token[begin])) {
        ++begin;
    }
    while (end > begin && static_cast<unsigned char>(token[end - 1]) < 0x80 &&
           is_ascii_punct(token[end - 1])) {
        --end;
    }
    return token.substr(begin, end - begin);
}

bool looks_like_url(const std::string& token) {
    std::string lower = token;
    std::transform(lower.begin(), lower.end(), lower.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return lower.find("://") != std::string::npos || lower.rfind("www.", 0) == 0;
}

bool is_pure_number(const std::string& token) {
    std::size_t i = 0;
    if (i < token.size() && (token[i] == '+' || token[i] == '-')) {
        ++i;
    }
    if (i >= token.size() || !std::isdigit(static_cast<unsigned char>(token[i]))) {
        return false;
    }
    for (; i < token.size(); ++i) {
        const char c = token[i];
        if (!std::isdigit(static_cast<unsigned char>(c)) && c != '.' && c != ',') {
            return false;
        }
    }
    return true;
}

}  // namespace

std::vector<std::string> tokenize(std::string_view text, const TokenizerRules& rules) {
    std::vector<std::string> out;
    std::size_t i = 0;
    std::size_t token_begin = 0;
    bool in_token = false;

    auto flush = [&](std::size_t token_end) {
        if (!in_token) {
            return;
        }
        in_token = false;
        const std::string_view raw = text.substr(token_begin, token_end - token_begin);
        const std::string_view stripped = strip_edge_punct(raw);
        if (stripped.empty()) {
            return;
        }
        std::string token(stripped);
        if (rules.lowercase) {
            std::transform(token.begin(), token.end(), token.begin(), [](unsigned char c) {
                return static_cast<char>(std::tolower(c));
            });
        }
        if (rules.filter_urls_numbers && (looks_like_url(token) || is_pure_number(token))) {
            return;
        }
        out.push_back(std::move(token));
    };

    while (i < text.size()) {
        const std::size_t cp_begin = i;
        const char32_t cp = decode_utf8(text, i);
        if (is_unicode_space(cp)) {
            flush(cp_begin);
        } else if (!in_token) {
            in_token = true;
            token_begin = cp_begin;
        }
    }
    flush(text.size());
    return out;
}

Vocabulary Vocabulary::from_token_counts(std::vector<std::pair<std::string, std::uint64_t>> counts) {
    std::sort(counts.begin(), counts.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second) {
            return a.second > b.second;
        }
        return a.first < b.first;
    });

    Vocabulary vocab;
    vocab.tokens_.reserve(counts.size());
    vocab.counts_.reserve(counts.size());
    for (auto& [token, count] : counts) {
        if (count == 0) {
            throw std::invalid_argument("vocabulary count must be positive: " + token);
        }
        vocab.total_count_ += count;
        vocab.index_.emplace(token, static_cast<std::uint32_t>(vocab.tokens_.size()));
        vocab.tokens_.push_back(std::move(token));
        vocab.counts_.push_back(count);
    }
    if (vocab.index_.size() != vocab.tokens_.size()) {
        throw std::invalid_argument("duplicate token in vocabulary counts");
    }
    return vocab;
}

std::optional<std::uint32_t> Vocabulary::id_of(std::string_view token) const {
    const auto it = index_.find(std::string(token));
    if (it == index_.end()) {
        return std::nullopt;
    }
    return it->second;
}

Vocabulary build_vocab(const std::vector<std::vector<std::string>>& docs,
                       std::uint64_t min_count) {
    if (min_count < 1) {
        throw std::invalid_argument("min_count must be >= 1");
    }
    std::unordered_map<std::string, std::uint64_t> freq;
    for (const auto& doc : docs) {
        for (const auto& token : doc) {
            ++freq[token];
        }
    }
    std::vector<std::pair<std::string, std::uint64_t>> kept;
    kept.reserve(freq.size());
    for (auto& [token, count] : freq) {
        if (count >= min_count) {
            kept.emplace_back(token, count);
        }
    }
    if (kept.empty()) {
        throw EmptyVocabulary("no token reaches min_count=" + std::to_string(min_count));
    }
    return Vocabulary::from_token_counts(std::move(kept));
}

std::vector<Document> encode(const std::vector<std::vector<std::string>>& docs,
                             const Vocabulary& vocab) {
    std::vector<Document> out;
    out.reserve(docs.size());
    for (std::size_t d = 0; d < docs.size(); ++d) {
        Document doc;
        doc.doc_id = static_cast<std::uint32_t>(d);
        doc.tokens.reserve(docs[d].size());
        for (const auto& token : docs[d]) {
            if (const auto id = vocab.id_of(token)) {
                doc.tokens.push_back(*id);
            }
        }
        out.push_back(std::move(doc));
    }
    return out;
}

std::vector<TrainingPair> extract_pairs(const Document& doc, std::uint32_t window) {
    if (window < 1) {
        throw std::invalid_argument("window must be >= 1");
    }
    std::vector<TrainingPair> pairs;
    const std::size_t n = doc.tokens.size();
    if (n < 2) {
        return pairs;
    }
    const std::size_t w = window;
    for (std::size_t p = 0; p < n; ++p) {
        const std::size_t lo = p > w ? p - w : 0;
        const std::size_t hi = std::min(n - 1, p + w);
        for (std::size_t q = lo; q <= hi; ++q) {
            if (q == p) {
                continue;
            }
            pairs.push_back({doc.doc_id, doc.tokens[p], doc.tokens[q]});
        }
    }
    return pairs;
}

std::vector<TrainingPair> extract_all_pairs(const std::vector<Document>& docs,
                                            std::uint32_t window) {
    std::vector<TrainingPair> all;
    for (const auto& doc : docs) {
        auto pairs = extract_pairs(doc, window);
        all.insert(all.end(), pairs.begin(), pairs.end());
    }
    return all;
}

std::vector<std::string> read_corpus_lines(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError("cannot open corpus file: " + path);
    }
    std::vector<std::string> lines;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') {
            line.pop_back();
        }
        lines.push_back(line);
    }
    return lines;
}

std::string format_vocab(const Vocabulary& vocab) {
    std::ostringstream out;
    for (std::size_t i = 0; i < vocab.size(); ++i) {
        out << vocab.token(static_cast<std::uint32_t>(i)) << '\t'
            << vocab.count(static_cast<std::uint32_t>(i)) << '\n';
    }
    return out.str();
}

}  // namespace lda2vec
