#pragma once
// Error hierarchy shared by all hcag modules. The CLI maps these onto
// process exit codes (see tools/hcag_main.cpp).

#include <stdexcept>
#include <string>

namespace hcag {

struct Error : std::runtime_error {
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// --- input / filesystem ---
struct NotADirectory : Error {
    explicit NotADirectory(const std::string& p) : Error("not a directory: " + p) {}
};
struct IoFailure : Error {
    explicit IoFailure(const std::string& p) : Error("io failure: " + p) {}
};
struct EmptyRepository : Error {
    explicit EmptyRepository(const std::string& p) : Error("no indexable files under: " + p) {}
};

// --- knowledge base ---
struct InvariantViolation : Error {
    explicit InvariantViolation(const std::string& what) : Error("kb invariant violated: " + what) {}
};
struct SchemaMismatch : Error {
    explicit SchemaMismatch(int got, int want)
        : Error("kb schema_version " + std::to_string(got) + ", expected " + std::to_string(want)) {}
};
struct ParseError : Error {
    explicit ParseError(const std::string& where) : Error("parse error: " + where) {}
};
struct UnknownNode : Error {
    explicit UnknownNode(const std::string& p) : Error("unknown node: " + p) {}
};

// --- backends ---
struct BackendFailure : Error {
    explicit BackendFailure(const std::string& detail) : Error("backend failure: " + detail) {}
};
struct ContentTooLarge : Error {
    explicit ContentTooLarge(const std::string& p) : Error("content exceeds backend budget: " + p) {}
};
struct CredentialMissing : BackendFailure {
    explicit CredentialMissing(const std::string& var) : BackendFailure("missing credential: " + var) {}
};
struct HttpStatusError : BackendFailure {
    int status;
    explicit HttpStatusError(int code) : BackendFailure("http status " + std::to_string(code)), status(code) {}
};
struct TimeoutError : BackendFailure {
    TimeoutError() : BackendFailure("timeout") {}
};
struct MalformedResponse : BackendFailure {
    explicit MalformedResponse(const std::string& d) : BackendFailure("malformed response: " + d) {}
};

// --- retrieval / generation ---
struct QueryEmpty : Error {
    QueryEmpty() : Error("query is empty") {}
};
struct EmptyDecomposition : Error {
    explicit EmptyDecomposition(const std::string& node) : Error("decomposer returned no subtasks for: " + node) {}
};
struct EmptyGeneration : Error {
    explicit EmptyGeneration(const std::string& module_id) : Error("generator returned empty output for: " + module_id) {}
};

// --- arithmetic ---
struct OverflowError : Error {
    explicit OverflowError(const std::string& op) : Error("integer overflow in " + op) {}
};

// --- evaluation ---
struct HookFailure : Error {
    HookFailure(const std::string& cmd, int code)
        : Error("hook '" + cmd + "' failed with exit code " + std::to_string(code)) {}
    HookFailure(const std::string& cmd, const std::string& why)
        : Error("hook '" + cmd + "': " + why) {}
};
struct GoldenMissing : Error {
    explicit GoldenMissing(const std::string& p) : Error("golden directory missing: " + p) {}
};

}  // namespace hcag
