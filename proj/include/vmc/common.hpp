#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace vmc {

enum class Label : uint8_t { safe = 0, vulnerable = 1, unlabeled = 2 };

inline const char* label_name(Label l) {
    switch (l) {
    case Label::safe: return "safe";
    case Label::vulnerable: return "vulnerable";
    default: return "unlabeled";
    }
}

inline Label label_from_name(const std::string& s) {
    if (s == "safe") return Label::safe;
    if (s == "vulnerable") return Label::vulnerable;
    return Label::unlabeled;
}

// Base class for all pipeline errors so callers can catch one family.
struct PipelineError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct UnbalancedBraces : PipelineError {
    size_t position;
    UnbalancedBraces(size_t pos, const std::string& what)
        : PipelineError(what), position(pos) {}
};

struct MalformedControlStructure : PipelineError {
    int line;
    MalformedControlStructure(int ln, const std::string& what)
        : PipelineError(what), line(ln) {}
};

struct NonConvergence : PipelineError {
    double residual;
    NonConvergence(double res, const std::string& what)
        : PipelineError(what), residual(res) {}
};

struct AlphaTooLarge : PipelineError {
    using PipelineError::PipelineError;
};
struct SingularSystem : PipelineError {
    using PipelineError::PipelineError;
};
struct EmptyCorpus : PipelineError {
    using PipelineError::PipelineError;
};
struct InvalidSplice : PipelineError {
    using PipelineError::PipelineError;
};
struct LengthMismatch : PipelineError {
    using PipelineError::PipelineError;
};
struct BadMagic : PipelineError {
    using PipelineError::PipelineError;
};
struct ShapeMismatch : PipelineError {
    using PipelineError::PipelineError;
};
struct TruncatedFile : PipelineError {
    using PipelineError::PipelineError;
};
struct RowsTooSmall : PipelineError {
    using PipelineError::PipelineError;
};
struct SingleClassDataset : PipelineError {
    using PipelineError::PipelineError;
};
struct TooFewSamples : PipelineError {
    using PipelineError::PipelineError;
};
struct EmptyConfusion : PipelineError {
    using PipelineError::PipelineError;
};

} // namespace vmc
