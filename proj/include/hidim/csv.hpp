#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace hidim::io {

/// Parsed CSV: mandatory header row plus string cells. Dialect is fixed:
/// comma separator, dot decimal, UTF-8, no quoting.
struct RawTable {
    std::vector<std::string> columns;
    std::vector<std::vector<std::string>> rows;

    std::size_t n_rows() const { return rows.size(); }
    std::size_t n_cols() const { return columns.size(); }
    /// Index of a named column, or -1.
    long find_column(const std::string& name) const;
};

/// Strict read; throws parse_error naming line and column on malformed input,
/// schema_error when the file cannot be opened.
RawTable read_csv(const std::string& path);

/// All-numeric view of a table.
struct NumericTable {
    std::vector<std::string> columns;
    Eigen::MatrixXd values;
};

/// Converts cells to doubles; throws parse_error naming line/column on the
/// first non-numeric cell.
NumericTable to_numeric(const RawTable& table);

NumericTable read_numeric_csv(const std::string& path);

/// Formats a double with 17 significant digits (round-trip exact).
std::string format_double(double value);

/// Writes header + numeric rows. Throws schema_error when the file cannot be
/// created.
void write_numeric_csv(const std::string& path, const std::vector<std::string>& columns,
                       const Eigen::MatrixXd& values);

/// Row-oriented writer for mixed string/numeric content. Each row must match
/// the header width.
void write_csv(const std::string& path, const std::vector<std::string>& columns,
               const std::vector<std::vector<std::string>>& rows);

/// FNV-1a 64-bit content hash, lowercase hex. Used to pin data files in
/// model files and manifests.
std::string hash_file(const std::string& path);
std::string hash_bytes(const std::string& bytes);

}  // namespace hidim::io
