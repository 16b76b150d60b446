#include "lda2vec/io.hpp"

#include <bit>
#include <cerrno>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <memory>
#include <sstream>
#include <unordered_set>

#include <unistd.h>

#include "lda2vec/errors.hpp"

namespace lda2vec {

namespace {

struct FileCloser {
    void operator()(std::FILE* f) const {
        if (f) {
            std::fclose(f);
        }
    }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

[[noreturn]] void throw_io(const std::string& what, const std::string& path) {
    throw IoError(what + ": " + path + " (" + std::strerror(errno) + ")");
}

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

double parse_double(const std::string& text) {
    char* end = nullptr;
    errno = 0;
    const double v = std::strtod(text.c_str(), &end);
    if (end != text.c_str() + text.size() || text.empty() || errno == ERANGE) {
        throw FormatError("malformed real value: " + text);
    }
    return v;
}

std::uint64_t parse_u64(const std::string& text) {
    char* end = nullptr;
    errno = 0;
    const std::uint64_t v = std::strtoull(text.c_str(), &end, 10);
    if (end != text.c_str() + text.size() || text.empty() || errno == ERANGE ||
        text.front() == '-') {
        throw FormatError("malformed integer value: " + text);
    }
    return v;
}

// The on-disk payload is little-endian float32 regardless of host order.
void encode_f32_le(float v, unsigned char out[4]) {
    std::uint32_t bits = 0;
    std::memcpy(&bits, &v, 4);
    if constexpr (std::endian::native == std::endian::big) {
        bits = __builtin_bswap32(bits);
    }
    std::memcpy(out, &bits, 4);
}

float decode_f32_le(const unsigned char in[4]) {
    std::uint32_t bits = 0;
    std::memcpy(&bits, in, 4);
    if constexpr (std::endian::native == std::endian::big) {
        bits = __builtin_bswap32(bits);
    }
    float v = 0.0F;
    std::memcpy(&v, &bits, 4);
    return v;
}

void write_matrix_f32(std::FILE* file, const Matrix& mat, const std::string& path) {
    std::vector<unsigned char> buf(mat.size() * 4);
    for (std::size_t i = 0; i < mat.size(); ++i) {
        encode_f32_le(static_cast<float>(mat.data()[i]), buf.data() + 4 * i);
    }
    if (!buf.empty() && std::fwrite(buf.data(), 1, buf.size(), file) != buf.size()) {
        throw_io("short write", path);
    }
}

void read_matrix_f32(std::istream& in, Matrix& mat) {
    std::vector<unsigned char> buf(mat.size() * 4);
    if (!buf.empty()) {
        in.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
        if (in.gcount() != static_cast<std::streamsize>(buf.size())) {
            throw FormatError("parameter block ended early");
        }
    }
    for (std::size_t i = 0; i < mat.size(); ++i) {
        mat.data()[i] = static_cast<double>(decode_f32_le(buf.data() + 4 * i));
    }
}

}  // namespace

void save_model(const ModelParams& params, const Vocabulary& vocab, const TrainConfig& config,
                const std::string& path) {
    if (params.vocab_size() != vocab.size()) {
        throw ShapeMismatch("vocabulary size differs from word matrix rows");
    }

    FilePtr file(std::fopen(path.c_str(), "wb"));
    if (!file) {
        throw_io("cannot open for writing", path);
    }

    std::ostringstream header;
    header << kModelMagic << '\n';
    header << "vocab_size=" << params.vocab_size() << " dim=" << params.dim()
           << " n_topics=" << params.n_topics() << " n_docs=" << params.n_docs()
           << " window=" << config.window << " n_negatives=" << config.n_negatives
           << " beta=" << format_double(config.beta) << " lambda=" << format_double(config.lambda)
           << " alpha=" << format_double(config.resolved_alpha())
           << " dropout_p=" << format_double(config.dropout_p)
           << " lr=" << format_double(config.lr) << " epochs=" << config.epochs
           << " batch_size=" << config.batch_size << " seed=" << config.seed << '\n';
    for (std::size_t i = 0; i < vocab.size(); ++i) {
        const auto& token = vocab.token(static_cast<std::uint32_t>(i));
        if (token.empty() || token.find('\t') != std::string::npos ||
            token.find('\n') != std::string::npos) {
            throw FormatError("token not serializable: '" + token + "'");
        }
        header << token << '\t' << vocab.count(static_cast<std::uint32_t>(i)) << '\n';
    }

    const std::string head = header.str();
    if (std::fwrite(head.data(), 1, head.size(), file.get()) != head.size()) {
        throw_io("short write", path);
    }
    write_matrix_f32(file.get(), params.word_vectors, path);
    write_matrix_f32(file.get(), params.topics, path);
    write_matrix_f32(file.get(), params.doc_logits, path);

    if (std::fflush(file.get()) != 0) {
        throw_io("flush failed", path);
    }
    if (::fsync(::fileno(file.get())) != 0) {
        throw_io("fsync failed", path);
    }
}

LoadedModel load_model(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError("cannot open model file: " + path + " (" + std::strerror(errno) + ")");
    }
    in.seekg(0, std::ios::end);
    const std::int64_t file_size = in.tellg();
    in.seekg(0, std::ios::beg);

    std::string line;
    if (!std::getline(in, line) || line != kModelMagic) {
        throw FormatError("bad magic; expected \"" + std::string(kModelMagic) + "\"");
    }
    if (!std::getline(in, line)) {
        throw FormatError("missing metadata line");
    }

    std::unordered_map<std::string, std::string> meta;
    {
        std::istringstream fields(line);
        std::string field;
        while (fields >> field) {
            const auto eq = field.find('=');
            if (eq == std::string::npos || eq == 0) {
                throw FormatError("malformed metadata field: " + field);
            }
            meta[field.substr(0, eq)] = field.substr(eq + 1);
        }
    }
    auto require = [&](const char* key) -> const std::string& {
        const auto it = meta.find(key);
        if (it == meta.end()) {
            throw FormatError(std::string("metadata key missing: ") + key);
        }
        return it->second;
    };

    const std::uint64_t vocab_size = parse_u64(require("vocab_size"));
    const std::uint64_t dim = parse_u64(require("dim"));
    const std::uint64_t n_topics = parse_u64(require("n_topics"));
    const std::uint64_t n_docs = parse_u64(require("n_docs"));
    if (vocab_size == 0 || dim == 0 || n_topics == 0) {
        throw FormatError("metadata declares an empty model");
    }

    TrainConfig config;
    config.dim = static_cast<std::uint32_t>(dim);
    config.n_topics = static_cast<std::uint32_t>(n_topics);
    config.window = static_cast<std::uint32_t>(parse_u64(require("window")));
    config.n_negatives = static_cast<std::uint32_t>(parse_u64(require("n_negatives")));
    config.beta = parse_double(require("beta"));
    config.lambda = parse_double(require("lambda"));
    config.alpha = parse_double(require("alpha"));
    config.dropout_p = parse_double(require("dropout_p"));
    config.lr = parse_double(require("lr"));
    config.epochs = static_cast<std::uint32_t>(parse_u64(require("epochs")));
    config.batch_size = static_cast<std::uint32_t>(parse_u64(require("batch_size")));
    config.seed = parse_u64(require("seed"));

    std::vector<std::pair<std::string, std::uint64_t>> counts;
    counts.reserve(vocab_size);
    for (std::uint64_t i = 0; i < vocab_size; ++i) {
        if (!std::getline(in, line)) {
            throw FormatError("vocabulary block ended early at entry " + std::to_string(i));
        }
        const auto tab = line.find('\t');
        if (tab == std::string::npos || tab == 0) {
            throw FormatError("malformed vocabulary line: " + line);
        }
        counts.emplace_back(line.substr(0, tab), parse_u64(line.substr(tab + 1)));
    }

    // Declared sizes must match the byte length exactly before any parameter
    // allocation happens.
    const std::uint64_t expected_payload =
        4 * (vocab_size * dim + n_topics * dim + n_docs * n_topics);
    const std::int64_t offset = in.tellg();
    if (offset < 0 || static_cast<std::uint64_t>(file_size - offset) != expected_payload) {
        throw FormatError("declared sizes disagree with file length (expected " +
                          std::to_string(expected_payload) + " payload bytes, have " +
                          std::to_string(file_size - offset) + ")");
    }

    LoadedModel loaded;
    loaded.config = config;
    loaded.vocab = Vocabulary::from_token_counts(std::move(counts));
    if (loaded.vocab.size() != vocab_size) {
        throw FormatError("duplicate tokens in vocabulary block");
    }
    loaded.params.word_vectors = Matrix(vocab_size, dim);
    loaded.params.topics = Matrix(n_topics, dim);
    loaded.params.doc_logits = Matrix(n_docs, n_topics);
    read_matrix_f32(in, loaded.params.word_vectors);
    read_matrix_f32(in, loaded.params.topics);
    read_matrix_f32(in, loaded.params.doc_logits);
    return loaded;
}

std::size_t import_word_vectors(const std::string& path, const Vocabulary& vocab,
                                ModelParams& params) {
    if (params.vocab_size() != vocab.size()) {
        throw ShapeMismatch("vocabulary size differs from word matrix rows");
    }
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError("cannot open vector file: " + path + " (" + std::strerror(errno) + ")");
    }

    std::unordered_set<std::uint32_t> covered;
    std::string line;
    std::size_t line_no = 0;
    std::vector<double> values;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') {
            line.pop_back();
        }
        if (line.empty()) {
            continue;
        }
        std::istringstream fields(line);
        std::string token;
        fields >> token;
        values.clear();
        std::string value;
        while (fields >> value) {
            values.push_back(parse_double(value));
        }
        if (values.size() != params.dim()) {
            throw DimensionMismatch("line " + std::to_string(line_no) + " has " +
                                    std::to_string(values.size()) + " values, expected " +
                                    std::to_string(params.dim()));
        }
        if (const auto id = vocab.id_of(token)) {
            auto row = params.word_vectors.row(*id);
            std::copy(values.begin(), values.end(), row.begin());
            covered.insert(*id);
        }
    }
    return covered.size();
}

void write_report(const TrainReport& report, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw IoError("cannot open report file: " + path + " (" + std::strerror(errno) + ")");
    }
    out << format_report(report);
    if (!out.flush()) {
        throw IoError("short write: " + path);
    }
}

}  // namespace lda2vec
