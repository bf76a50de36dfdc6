#pragma once

#include <stdexcept>
#include <string>

namespace cpdp {

enum class ErrorKind {
    schema,        // missing or duplicated column, arity mismatch
    parse,         // malformed cell
    empty_input,   // no data rows
    domain,        // value outside an operation's domain
    no_candidates, // selection has nothing to choose from
    parameter,     // invalid r, k, ratio, ...
    shape,         // vector/schema length mismatch
    undefined,     // quantity undefined for the input (AUC, DPR)
    sample_size,   // too few observations for a test
    io,
};

const char* to_string(ErrorKind kind) noexcept;

// Every failure raised by the library carries a kind so callers (the CLI in
// particular) can map it onto an exit status without string matching.
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what)
        : std::runtime_error(what), kind_(kind)
    {
    }

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

} // namespace cpdp
