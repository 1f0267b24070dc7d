#pragma once

#include <stdexcept>
#include <string>

namespace batchprompt {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Task / spec validation.
struct SpecError : Error {
    using Error::Error;
};

// Partitioning.
struct EmptyDataset : Error {
    EmptyDataset() : Error("dataset is empty") {}
};
struct InvalidN : Error {
    explicit InvalidN(long n) : Error("batch size bound must be >= 1, got " + std::to_string(n)) {}
};
struct UnknownTopic : Error {
    explicit UnknownTopic(const std::string& t) : Error("topic not present in dataset: " + t) {}
};

// Rendering.
struct MissingField : Error {
    explicit MissingField(const std::string& field, const std::string& id)
        : Error("instance '" + id + "' is missing field '" + field + "'") {}
};
struct EmptyBatch : Error {
    EmptyBatch() : Error("batch has no instances") {}
};

// Transport.
struct TransportError : Error {
    enum class Kind { Timeout, HttpStatus, MalformedResponse };
    Kind kind;
    int status;  // HTTP status when kind == HttpStatus, else 0

    TransportError(Kind k, const std::string& what, int http_status = 0)
        : Error(what), kind(k), status(http_status) {}
};

// Cost accounting.
struct ZeroInstances : Error {
    ZeroInstances() : Error("instance count must be > 0") {}
};

// Evaluation.
struct MissingGold : Error {
    explicit MissingGold(const std::string& id) : Error("no gold label for instance '" + id + "'") {}
};

// Dataset ingestion: structural failure at a line.
struct ParseError : Error {
    long line;
    ParseError(long line_no, const std::string& what)
        : Error("line " + std::to_string(line_no) + ": " + what), line(line_no) {}
};
// Dataset ingestion: record does not satisfy the task's field contract.
struct SchemaError : Error {
    long line;
    std::string field;
    SchemaError(long line_no, const std::string& field_name, const std::string& what)
        : Error("line " + std::to_string(line_no) + ": " + what), line(line_no), field(field_name) {}
};

// CLI / run configuration.
struct ConfigError : Error {
    using Error::Error;
};
struct IncompatibleManifests : Error {
    using Error::Error;
};

}  // namespace batchprompt
