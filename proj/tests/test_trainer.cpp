#include <set>
#include <sstream>

#include "doctest.h"
#include "lda2vec/errors.hpp"
#include "lda2vec/trainer.hpp"
#include "support/synthetic.hpp"

using namespace lda2vec;

namespace {

TrainConfig small_config() {
    TrainConfig config;
    config.dim = 8;
    config.n_topics = 2;
    config.window = 2;
    config.n_negatives = 3;
    config.epochs = 3;
    config.batch_size = 64;
    config.seed = 11;
    return config;
}

}  // namespace

TEST_SUITE_BEGIN("trainer");

TEST_CASE("dirichlet_scale is the plain minibatch fraction") {
    CHECK(dirichlet_scale(128, 128) == 1.0);
    CHECK(dirichlet_scale(64, 6400) == 0.01);
    CHECK_THROWS_AS(dirichlet_scale(0, 10), std::invalid_argument);
    CHECK_THROWS_AS(dirichlet_scale(11, 10), std::invalid_argument);
}

TEST_CASE("batch scales partition each epoch exactly") {
    const auto corpus = testsupport::make_two_topic_corpus(6, 40, 10, 3);
    TrainConfig config = small_config();
    config.epochs = 2;
    config.batch_size = 100;  // does not divide the pair count evenly

    const std::size_t total = extract_all_pairs(corpus.docs, config.window).size();
    std::vector<std::size_t> epoch_pair_counts;
    std::vector<double> scales;
    TrainOptions options;
    options.observer = [&](std::uint32_t epoch, const Batch& batch, const BackwardResult&,
                           const ModelParams&) {
        if (epoch_pair_counts.size() <= epoch) {
            epoch_pair_counts.resize(epoch + 1, 0);
        }
        epoch_pair_counts[epoch] += batch.items.size();
        scales.push_back(batch.dirichlet_scale);
        CHECK(batch.dirichlet_scale ==
              static_cast<double>(batch.items.size()) / static_cast<double>(total));
    };
    train(corpus.docs, corpus.vocab, config, std::move(options));

    REQUIRE(epoch_pair_counts.size() == 2);
    // The integer pair counts partition the corpus, so the scale sum is
    // exactly one in exact arithmetic.
    CHECK(epoch_pair_counts[0] == total);
    CHECK(epoch_pair_counts[1] == total);
    CHECK(!scales.empty());
}

TEST_CASE("zero epochs return the initialization untouched") {
    const auto corpus = testsupport::make_two_topic_corpus(3, 20, 6, 5);
    TrainConfig config = small_config();
    config.epochs = 0;

    const auto result = train(corpus.docs, corpus.vocab, config);
    CHECK(result.report.empty());

    Rng init_rng(config.seed, 0);
    const auto expected = init_params(corpus.vocab.size(), corpus.docs.size(), config, init_rng);
    CHECK(result.params.word_vectors == expected.word_vectors);
    CHECK(result.params.topics == expected.topics);
    CHECK(result.params.doc_logits == expected.doc_logits);
}

TEST_CASE("sequential training is bitwise deterministic") {
    const auto corpus = testsupport::make_two_topic_corpus(4, 30, 8, 17);
    const TrainConfig config = small_config();

    const auto a = train(corpus.docs, corpus.vocab, config);
    const auto b = train(corpus.docs, corpus.vocab, config);
    CHECK(a.params.word_vectors == b.params.word_vectors);
    CHECK(a.params.topics == b.params.topics);
    CHECK(a.params.doc_logits == b.params.doc_logits);
    REQUIRE(a.report.size() == b.report.size());
    for (std::size_t e = 0; e < a.report.size(); ++e) {
        CHECK(a.report[e].mean_sgns_objective == b.report[e].mean_sgns_objective);
        CHECK(a.report[e].dirichlet_objective == b.report[e].dirichlet_objective);
        CHECK(a.report[e].mean_max_p == b.report[e].mean_max_p);
    }
}

TEST_CASE("a single topic with lambda zero degenerates to one shared offset") {
    const auto corpus = testsupport::make_two_topic_corpus(3, 25, 6, 23);
    TrainConfig config = small_config();
    config.n_topics = 1;
    config.lambda = 0.0;

    const auto result = train(corpus.docs, corpus.vocab, config);

    // p_j0 == 1 exactly, so every document vector is the single topic row.
    for (std::size_t d = 0; d < result.params.n_docs(); ++d) {
        const auto p = softmax(result.params.doc_logits.row(d));
        CHECK(p[0] == 1.0);
        const auto doc = doc_vector(p, result.params.topics);
        for (std::size_t c = 0; c < result.params.dim(); ++c) {
            CHECK(doc[c] == result.params.topics(0, c));
        }
    }

    // The simplex has no degrees of freedom: logits never receive a gradient.
    Rng init_rng(config.seed, 0);
    const auto init = init_params(corpus.vocab.size(), corpus.docs.size(), config, init_rng);
    CHECK(result.params.doc_logits == init.doc_logits);
}

TEST_CASE("every contributing document gets a logit gradient each epoch") {
    auto corpus = testsupport::make_two_topic_corpus(5, 15, 6, 29);
    corpus.docs[2].tokens.clear();  // one empty document contributes nothing
    TrainConfig config = small_config();
    config.epochs = 2;

    std::set<std::uint32_t> contributing;
    for (const auto& doc : corpus.docs) {
        if (doc.tokens.size() >= 2) {
            contributing.insert(doc.doc_id);
        }
    }

    std::vector<std::set<std::uint32_t>> touched_per_epoch(config.epochs);
    TrainOptions options;
    options.observer = [&](std::uint32_t epoch, const Batch&, const BackwardResult& result,
                           const ModelParams&) {
        for (const auto& [doc_id, grad] : result.grads.doc_rows) {
            touched_per_epoch[epoch].insert(doc_id);
        }
    };
    train(corpus.docs, corpus.vocab, config, std::move(options));

    for (const auto& touched : touched_per_epoch) {
        CHECK(touched == contributing);
    }
}

TEST_CASE("frozen topics stay at their initial values") {
    const auto corpus = testsupport::make_two_topic_corpus(3, 20, 6, 31);
    const TrainConfig config = small_config();

    Rng init_rng(config.seed, 0);
    const auto init = init_params(corpus.vocab.size(), corpus.docs.size(), config, init_rng);

    TrainOptions options;
    options.freeze_topics = true;
    const auto result = train(corpus.docs, corpus.vocab, config, std::move(options));
    CHECK(result.params.topics == init.topics);
    CHECK(result.params.word_vectors != init.word_vectors);
}

TEST_CASE("progress rows are emitted per epoch") {
    const auto corpus = testsupport::make_two_topic_corpus(3, 20, 6, 37);
    TrainConfig config = small_config();
    config.epochs = 4;

    std::ostringstream progress;
    TrainOptions options;
    options.progress = &progress;
    const auto result = train(corpus.docs, corpus.vocab, config, std::move(options));
    REQUIRE(result.report.size() == 4);

    std::size_t lines = 0;
    std::string line;
    std::istringstream in(progress.str());
    while (std::getline(in, line)) {
        ++lines;
    }
    CHECK(lines == 4);
    CHECK(format_report(result.report).starts_with("epoch\t"));
}

TEST_CASE("training rejects corpora without pairs") {
    const auto corpus = testsupport::make_two_topic_corpus(2, 10, 4, 41);
    std::vector<Document> empty_docs = {{0, {}}, {1, {5}}};
    CHECK_THROWS_AS(train(empty_docs, corpus.vocab, small_config()), EmptyCorpus);
}

TEST_CASE("pretrained initial parameters are honored") {
    const auto corpus = testsupport::make_two_topic_corpus(3, 15, 5, 43);
    TrainConfig config = small_config();
    config.epochs = 0;

    Rng init_rng(999);
    auto custom = init_params(corpus.vocab.size(), corpus.docs.size(), config, init_rng);
    custom.word_vectors(0, 0) = 123.5;

    TrainOptions options;
    options.initial_params = custom;
    const auto result = train(corpus.docs, corpus.vocab, config, std::move(options));
    CHECK(result.params.word_vectors(0, 0) == 123.5);

    TrainOptions bad;
    bad.initial_params = ModelParams{Matrix(1, 1), Matrix(1, 1), Matrix(1, 1)};
    CHECK_THROWS_AS(train(corpus.docs, corpus.vocab, config, std::move(bad)), ShapeMismatch);
}

TEST_CASE("pipelined mode trains to the same shapes") {
    const auto corpus = testsupport::make_two_topic_corpus(4, 25, 8, 47);
    TrainConfig config = small_config();
    config.epochs = 3;

    TrainOptions options;
    options.threads = 2;
    const auto result = train(corpus.docs, corpus.vocab, config, std::move(options));
    CHECK(result.report.size() == 3);
    CHECK(result.params.vocab_size() == corpus.vocab.size());
    for (const auto& stats : result.report) {
        CHECK(stats.mean_max_p >= 0.5);  // >= 1/n_topics
        CHECK(stats.mean_max_p <= 1.0);
    }
}

TEST_CASE("the sparsity term concentrates proportions over epochs") {
    const auto corpus = testsupport::make_two_topic_corpus(30, 80, 25, 53);
    TrainConfig config;
    config.dim = 8;
    config.n_topics = 2;
    config.window = 5;
    config.n_negatives = 5;
    config.epochs = 12;
    config.batch_size = 512;
    config.seed = 7;

    const auto result = train(corpus.docs, corpus.vocab, config);
    CHECK(result.report.back().mean_max_p > result.report.front().mean_max_p);
    // The SGNS objective itself should come down as the embeddings fit.
    CHECK(result.report.back().mean_sgns_objective <
          result.report.front().mean_sgns_objective);
}

TEST_SUITE_END();
