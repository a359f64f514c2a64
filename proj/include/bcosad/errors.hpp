#pragma once

#include <stdexcept>
#include <string>

namespace bcosad {

// Mismatched lengths or shapes.
struct DimensionError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// Index (layer, node, row) outside its valid range.
struct IndexError : std::out_of_range {
    using std::out_of_range::out_of_range;
};

// Invalid configuration or insufficient data for an operation.
struct ConfigError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// Matrix factorization could not be completed.
struct DecompositionError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Operation invoked on an object that is not in the required state.
struct StateError : std::logic_error {
    using std::logic_error::logic_error;
};

// Malformed input file; the message carries the location.
struct ParseError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Wraps a failure inside a pipeline stage.
struct StageError : std::runtime_error {
    StageError(std::string stage, const std::string& cause)
        : std::runtime_error("[" + stage + "] " + cause), stage_(std::move(stage)) {}
    const std::string& stage() const noexcept { return stage_; }

  private:
    std::string stage_;
};

}  // namespace bcosad
