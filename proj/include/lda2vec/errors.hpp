#pragma once

#include <stdexcept>
#include <string>

namespace lda2vec {

// Base for all library errors so callers can catch one type at the boundary.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct EmptyVocabulary : Error {
    using Error::Error;
};

struct EmptyCorpus : Error {
    using Error::Error;
};

struct InvalidBeta : Error {
    using Error::Error;
};

struct DomainError : Error {
    using Error::Error;
};

struct ShapeMismatch : Error {
    using Error::Error;
};

struct TopicOutOfRange : Error {
    using Error::Error;
};

struct UnknownToken : Error {
    using Error::Error;
};

struct InsufficientStats : Error {
    using Error::Error;
};

struct FormatError : Error {
    using Error::Error;
};

struct IoError : Error {
    using Error::Error;
};

struct DimensionMismatch : Error {
    using Error::Error;
};

}  // namespace lda2vec
