#pragma once

#include <stdexcept>
#include <string>

namespace hidim {

/// Data that is structurally valid but statistically unusable
/// (constant column, zero kernel bandwidth, zero output variance).
class degenerate_input : public std::runtime_error {
public:
    explicit degenerate_input(const std::string& what) : std::runtime_error(what) {}
};

/// Covariance matrix failed Cholesky factorization even after jitter escalation.
class ill_conditioned : public std::runtime_error {
public:
    explicit ill_conditioned(const std::string& what) : std::runtime_error(what) {}
};

/// Malformed input file. Carries 1-based line/column of the offending token.
class parse_error : public std::runtime_error {
public:
    parse_error(const std::string& what, std::size_t line, std::size_t column)
        : std::runtime_error(what + " (line " + std::to_string(line) + ", column " +
                             std::to_string(column) + ")"),
          line_(line),
          column_(column) {}

    std::size_t line() const { return line_; }
    std::size_t column() const { return column_; }

private:
    std::size_t line_;
    std::size_t column_;
};

/// Well-formed file whose content violates a schema contract
/// (missing columns, inconsistent metadata, hash mismatch).
class schema_error : public std::runtime_error {
public:
    explicit schema_error(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace hidim
