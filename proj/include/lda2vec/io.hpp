#pragma once

#include <cstdint>
#include <string>

#include "lda2vec/corpus.hpp"
#include "lda2vec/model.hpp"
#include "lda2vec/trainer.hpp"

namespace lda2vec {

// Model file layout, fixed little-endian:
//   "LDA2VEC1\n"
//   one metadata line of space-separated key=value pairs, LF-terminated
//   vocab_size lines of "token<TAB>count"
//   raw float32 blocks: word vectors (row-major), topics, doc logits
//
// Parameters train at 64-bit but serialize at 32-bit; round-trip identity is
// asserted at the 32-bit level.
inline constexpr char kModelMagic[] = "LDA2VEC1";

struct LoadedModel {
    ModelParams params;
    Vocabulary vocab;
    TrainConfig config;
};

// Writes and fsyncs the model file. Throws IoError with OS context.
void save_model(const ModelParams& params, const Vocabulary& vocab, const TrainConfig& config,
                const std::string& path);

// Validates magic, version and declared block sizes against the file length
// before allocating parameters. Throws FormatError / IoError.
LoadedModel load_model(const std::string& path);

// Pretrained import, text lines "token v1 v2 ... vdim". In-vocabulary rows are
// overwritten, others skipped; returns the number of vocabulary rows covered.
// Throws DimensionMismatch when a line's vector length differs from dim.
std::size_t import_word_vectors(const std::string& path, const Vocabulary& vocab,
                                ModelParams& params);

// Machine-readable per-epoch report (TSV with a header row).
void write_report(const TrainReport& report, const std::string& path);

}  // namespace lda2vec
