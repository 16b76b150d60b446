#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "lda2vec/corpus.hpp"
#include "lda2vec/errors.hpp"
#include "lda2vec/eval.hpp"
#include "lda2vec/io.hpp"
#include "lda2vec/model.hpp"
#include "lda2vec/trainer.hpp"

namespace {

using namespace lda2vec;

struct TrainArgs {
    std::string corpus_path;
    std::string out_path;
    std::string report_path;
    std::string vectors_path;
    std::string config_path;
    std::uint64_t min_count = 10;
    unsigned threads = 1;
    bool no_dirichlet = false;
    bool quiet = false;
    double alpha = 0.0;  // 0 = derive 1/n_topics
    TrainConfig config;
};

struct EncodedCorpus {
    Vocabulary vocab;
    std::vector<Document> docs;
};

EncodedCorpus load_corpus(const std::string& path, std::uint64_t min_count) {
    const auto lines = read_corpus_lines(path);
    std::vector<std::vector<std::string>> tokenized;
    tokenized.reserve(lines.size());
    for (const auto& line : lines) {
        tokenized.push_back(tokenize(line));
    }
    EncodedCorpus corpus;
    corpus.vocab = build_vocab(tokenized, min_count);
    corpus.docs = encode(tokenized, corpus.vocab);
    return corpus;
}

// Re-encodes a corpus against an existing model vocabulary.
std::vector<Document> encode_against(const std::string& path, const Vocabulary& vocab) {
    const auto lines = read_corpus_lines(path);
    std::vector<std::vector<std::string>> tokenized;
    tokenized.reserve(lines.size());
    for (const auto& line : lines) {
        tokenized.push_back(tokenize(line));
    }
    return encode(tokenized, vocab);
}

// Optional key=value file; explicit command-line flags win.
void merge_config_file(const std::string& path, CLI::App* cmd) {
    std::ifstream in(path);
    if (!in) {
        throw CLI::ValidationError("--config", "cannot open config file: " + path);
    }
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') {
            line.pop_back();
        }
        if (line.empty() || line[0] == '#') {
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos || eq == 0) {
            throw CLI::ValidationError(
                "--config", "malformed line " + std::to_string(line_no) + ": " + line);
        }
        const std::string key = "--" + line.substr(0, eq);
        const std::string value = line.substr(eq + 1);
        CLI::Option* opt = cmd->get_option_no_throw(key);
        if (opt == nullptr) {
            throw CLI::ValidationError("--config", "unknown key: " + line.substr(0, eq));
        }
        if (opt->count() == 0) {
            opt->add_result(value);
            opt->run_callback();
        }
    }
}

int cmd_train(TrainArgs& args) {
    if (args.no_dirichlet) {
        args.config.lambda = 0.0;
    }
    if (args.alpha > 0.0) {
        args.config.alpha = args.alpha;
    }
    args.config.validate();

    EncodedCorpus corpus = load_corpus(args.corpus_path, args.min_count);
    std::cerr << "corpus: " << corpus.docs.size() << " documents, vocabulary "
              << corpus.vocab.size() << " tokens\n";

    TrainOptions options;
    options.threads = args.threads;
    if (args.threads > 1) {
        std::cerr << "warning: --threads > 1 pipelines batch assembly; "
                  << "bitwise determinism is not guaranteed\n";
    }
    if (!args.quiet) {
        options.progress = &std::cerr;
    }
    if (!args.vectors_path.empty()) {
        Rng init_rng(args.config.seed, 0);
        ModelParams params =
            init_params(corpus.vocab.size(), corpus.docs.size(), args.config, init_rng);
        const std::size_t covered =
            import_word_vectors(args.vectors_path, corpus.vocab, params);
        std::cerr << "pretrained vectors cover " << covered << " of " << corpus.vocab.size()
                  << " tokens\n";
        options.initial_params = std::move(params);
    }

    TrainResult result = train(corpus.docs, corpus.vocab, args.config, std::move(options));
    save_model(result.params, corpus.vocab, args.config, args.out_path);
    const std::string report_path =
        args.report_path.empty() ? args.out_path + ".report.tsv" : args.report_path;
    write_report(result.report, report_path);
    std::cerr << "model written to " << args.out_path << ", report to " << report_path << "\n";
    return 0;
}

int cmd_topics(const std::string& model_path, std::size_t top_n, bool tsv) {
    const LoadedModel model = load_model(model_path);
    std::vector<TopicSummary> topics;
    for (std::uint32_t k = 0; k < model.params.n_topics(); ++k) {
        topics.push_back(topic_top_words(model.params, model.vocab, k, top_n));
    }
    std::cout << (tsv ? format_topics_tsv(topics) : format_topic_table(topics));
    return 0;
}

int cmd_similar(const std::string& model_path, const std::string& token, std::size_t top_n,
                bool tsv) {
    const LoadedModel model = load_model(model_path);
    const auto ranking = most_similar(model.params, model.vocab, token, top_n);
    std::cout << (tsv ? format_ranking_tsv(ranking) : format_ranking(ranking));
    return 0;
}

int cmd_analogy(const std::string& model_path, const std::vector<std::string>& positive,
                const std::string& negative, std::size_t top_n, bool tsv) {
    const LoadedModel model = load_model(model_path);
    const auto ranking = three_cos_mul(model.params, model.vocab, positive[0], positive[1],
                                       negative, top_n);
    std::cout << (tsv ? format_ranking_tsv(ranking) : format_ranking(ranking));
    return 0;
}

int cmd_coherence(const std::string& model_path, const std::string& corpus_path,
                  std::uint32_t window, std::size_t top_n, bool tsv) {
    const LoadedModel model = load_model(model_path);
    const auto docs = encode_against(corpus_path, model.vocab);

    std::vector<std::vector<std::uint32_t>> topic_words;
    std::vector<std::uint32_t> all_words;
    for (std::uint32_t k = 0; k < model.params.n_topics(); ++k) {
        const auto summary = topic_top_words(model.params, model.vocab, k, top_n);
        std::vector<std::uint32_t> ids;
        ids.reserve(summary.top.size());
        for (const auto& entry : summary.top) {
            ids.push_back(entry.id);
            all_words.push_back(entry.id);
        }
        topic_words.push_back(std::move(ids));
    }

    const CooccurrenceStats stats = build_cooccurrence(docs, window, all_words);
    std::vector<double> scores;
    double sum = 0.0;
    for (std::uint32_t k = 0; k < topic_words.size(); ++k) {
        const double npmi = npmi_coherence(stats, topic_words[k]);
        scores.push_back(npmi);
        sum += npmi;
    }
    const double mean = sum / static_cast<double>(scores.size());

    if (tsv) {
        for (std::size_t k = 0; k < scores.size(); ++k) {
            char buf[48];
            std::snprintf(buf, sizeof(buf), "%.6f", scores[k]);
            std::cout << k << '\t' << buf << '\n';
        }
        char buf[48];
        std::snprintf(buf, sizeof(buf), "%.6f", mean);
        std::cout << "mean\t" << buf << '\n';
    } else {
        for (std::size_t k = 0; k < scores.size(); ++k) {
            char buf[64];
            std::snprintf(buf, sizeof(buf), "Topic %-4zu  NPMI %9.6f\n", k, scores[k]);
            std::cout << buf;
        }
        char buf[64];
        std::snprintf(buf, sizeof(buf), "Model mean  NPMI %9.6f\n", mean);
        std::cout << buf;
    }
    return 0;
}

int cmd_export_vocab(const std::string& model_path, const std::string& corpus_path,
                     std::uint64_t min_count, const std::string& out_path) {
    std::string text;
    if (!model_path.empty()) {
        text = format_vocab(load_model(model_path).vocab);
    } else {
        text = format_vocab(load_corpus(corpus_path, min_count).vocab);
    }
    if (out_path.empty()) {
        std::cout << text;
    } else {
        std::ofstream out(out_path, std::ios::binary);
        if (!out || !(out << text).flush()) {
            throw IoError("cannot write vocabulary to " + out_path);
        }
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"lda2vec: joint word embeddings and sparse document-topic mixtures"};
    app.require_subcommand(1);

    TrainArgs train_args;
    CLI::App* train_cmd =
        app.add_subcommand("train", "Train a model on a one-document-per-line corpus");
    train_cmd->add_option("--corpus", train_args.corpus_path, "corpus file, one document per line")
        ->required();
    train_cmd->add_option("--out", train_args.out_path, "output model file")->required();
    train_cmd->add_option("--report", train_args.report_path,
                          "per-epoch report file (default: <out>.report.tsv)");
    train_cmd->add_option("--vectors", train_args.vectors_path,
                          "pretrained word vectors, text format 'token v1 .. vdim'");
    train_cmd->add_option("--config", train_args.config_path,
                          "key=value file merged under explicit flags");
    train_cmd->add_option("--dim", train_args.config.dim, "embedding dimensionality")
        ->capture_default_str();
    train_cmd->add_option("--topics", train_args.config.n_topics, "number of topics")
        ->capture_default_str();
    train_cmd->add_option("--window", train_args.config.window, "context window half-width")
        ->capture_default_str();
    train_cmd
        ->add_option("--negatives", train_args.config.n_negatives, "negative samples per pair")
        ->capture_default_str();
    train_cmd->add_option("--beta", train_args.config.beta, "negative-sampling exponent")
        ->capture_default_str();
    train_cmd->add_option("--lambda", train_args.config.lambda, "Dirichlet term strength")
        ->capture_default_str();
    train_cmd->add_option("--alpha", train_args.alpha,
                          "Dirichlet concentration (default: 1/topics)");
    train_cmd->add_option("--dropout", train_args.config.dropout_p,
                          "dropout probability on pivot and document vectors")
        ->capture_default_str();
    train_cmd->add_option("--lr", train_args.config.lr, "Adam learning rate")
        ->capture_default_str();
    train_cmd->add_option("--epochs", train_args.config.epochs, "training epochs")
        ->capture_default_str();
    train_cmd->add_option("--batch", train_args.config.batch_size, "minibatch size in pairs")
        ->capture_default_str();
    train_cmd->add_option("--seed", train_args.config.seed, "random seed")
        ->capture_default_str();
    train_cmd->add_option("--min-count", train_args.min_count, "vocabulary frequency threshold")
        ->capture_default_str();
    train_cmd->add_option("--threads", train_args.threads,
                          "pipeline batch assembly (>1 forfeits bitwise determinism)")
        ->capture_default_str();
    train_cmd->add_flag("--no-dirichlet", train_args.no_dirichlet,
                        "disable the sparsity term (lambda = 0)");
    train_cmd->add_flag("--quiet", train_args.quiet, "suppress per-epoch progress");

    std::string model_path;
    std::string token;
    std::string corpus_path;
    std::string out_path;
    std::vector<std::string> positives;
    std::string negative;
    std::size_t top_n = 10;
    std::uint32_t coocc_window = 110;
    std::uint64_t min_count = 10;
    bool tsv = false;

    CLI::App* topics_cmd = app.add_subcommand("topics", "Print the top words of every topic");
    topics_cmd->add_option("--model", model_path, "model file")->required();
    topics_cmd->add_option("--top", top_n, "words per topic")->capture_default_str();
    topics_cmd->add_flag("--tsv", tsv, "tab-separated output");

    CLI::App* similar_cmd = app.add_subcommand("similar", "Rank tokens by cosine similarity");
    similar_cmd->add_option("--model", model_path, "model file")->required();
    similar_cmd->add_option("--token", token, "query token")->required();
    similar_cmd->add_option("--top", top_n, "ranking length")->capture_default_str();
    similar_cmd->add_flag("--tsv", tsv, "tab-separated output");

    CLI::App* analogy_cmd =
        app.add_subcommand("analogy", "Solve 'pos1 - neg + pos2' via the 3COSMUL objective");
    analogy_cmd->add_option("--model", model_path, "model file")->required();
    analogy_cmd->add_option("--pos", positives, "two positive tokens")
        ->required()
        ->expected(2);
    analogy_cmd->add_option("--neg", negative, "one negative token")->required();
    analogy_cmd->add_option("--top", top_n, "ranking length")->capture_default_str();
    analogy_cmd->add_flag("--tsv", tsv, "tab-separated output");

    CLI::App* coherence_cmd =
        app.add_subcommand("coherence", "Mean pairwise NPMI of each topic's top words");
    coherence_cmd->add_option("--model", model_path, "model file")->required();
    coherence_cmd
        ->add_option("--corpus", corpus_path, "reference corpus (e.g. the training corpus)")
        ->required();
    coherence_cmd->add_option("--window", coocc_window, "sliding window size")
        ->capture_default_str();
    coherence_cmd->add_option("--top", top_n, "words per topic")->capture_default_str();
    coherence_cmd->add_flag("--tsv", tsv, "tab-separated output");

    CLI::App* export_cmd =
        app.add_subcommand("export-vocab", "Write the vocabulary as 'token<TAB>count' lines");
    export_cmd->add_option("--model", model_path, "model file to read the vocabulary from");
    export_cmd->add_option("--corpus", corpus_path, "corpus to build a vocabulary from");
    export_cmd->add_option("--min-count", min_count, "frequency threshold for --corpus")
        ->capture_default_str();
    export_cmd->add_option("--out", out_path, "output file (default: stdout)");

    try {
        app.parse(argc, argv);

        if (train_cmd->parsed()) {
            if (!train_args.config_path.empty()) {
                merge_config_file(train_args.config_path, train_cmd);
            }
            return cmd_train(train_args);
        }
        if (topics_cmd->parsed()) {
            return cmd_topics(model_path, top_n, tsv);
        }
        if (similar_cmd->parsed()) {
            return cmd_similar(model_path, token, top_n, tsv);
        }
        if (analogy_cmd->parsed()) {
            return cmd_analogy(model_path, positives, negative, top_n, tsv);
        }
        if (coherence_cmd->parsed()) {
            return cmd_coherence(model_path, corpus_path, coocc_window, top_n, tsv);
        }
        if (export_cmd->parsed()) {
            if (model_path.empty() == corpus_path.empty()) {
                std::cerr << "export-vocab needs exactly one of --model or --corpus\n";
                return 2;
            }
            return cmd_export_vocab(model_path, corpus_path, min_count, out_path);
        }
        return 2;
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}
