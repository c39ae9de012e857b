#include "hidim/csv.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "hidim/errors.hpp"

namespace hidim::io {

namespace {

std::vector<std::string> split_line(const std::string& line) {
    std::vector<std::string> cells;
    std::string cell;
    std::stringstream ss(line);
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    return cells;
}

std::string strip_cr(std::string line) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    return line;
}

double parse_cell(const std::string& cell, std::size_t line, std::size_t column) {
    const char* begin = cell.data();
    const char* end = begin + cell.size();
    double value = 0.0;
    const auto [ptr, ec] = std::from_chars(begin, end, value);
    if (ec != std::errc() || ptr != end)
        throw parse_error("expected a number, got '" + cell + "'", line, column);
    return value;
}

}  // namespace

long RawTable::find_column(const std::string& name) const {
    for (std::size_t c = 0; c < columns.size(); ++c)
        if (columns[c] == name) return static_cast<long>(c);
    return -1;
}

RawTable read_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw schema_error("cannot open '" + path + "' for reading");

    RawTable table;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        line = strip_cr(line);
        if (line_no == 1) {
            table.columns = split_line(line);
            if (table.columns.empty() || (table.columns.size() == 1 && table.columns[0].empty()))
                throw parse_error("missing header row", 1, 1);
            continue;
        }
        if (line.empty()) continue;
        auto cells = split_line(line);
        if (cells.size() != table.columns.size())
            throw parse_error("row has " + std::to_string(cells.size()) + " cells, header has " +
                                  std::to_string(table.columns.size()),
                              line_no, cells.size() + 1);
        table.rows.push_back(std::move(cells));
    }
    if (line_no == 0) throw parse_error("empty file, header row required", 1, 1);
    return table;
}

NumericTable to_numeric(const RawTable& table) {
    NumericTable numeric;
    numeric.columns = table.columns;
    numeric.values.resize(static_cast<Eigen::Index>(table.n_rows()),
                          static_cast<Eigen::Index>(table.n_cols()));
    for (std::size_t r = 0; r < table.n_rows(); ++r)
        for (std::size_t c = 0; c < table.n_cols(); ++c)
            numeric.values(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
                parse_cell(table.rows[r][c], r + 2, c + 1);
    return numeric;
}

NumericTable read_numeric_csv(const std::string& path) { return to_numeric(read_csv(path)); }

std::string format_double(double value) {
    char buffer[64];
    std::snprintf(buffer, sizeof(buffer), "%.17g", value);
    return buffer;
}

void write_numeric_csv(const std::string& path, const std::vector<std::string>& columns,
                       const Eigen::MatrixXd& values) {
    if (values.cols() != static_cast<Eigen::Index>(columns.size()))
        throw std::invalid_argument("write_numeric_csv: header width differs from value columns");
    std::ofstream out(path);
    if (!out) throw schema_error("cannot open '" + path + "' for writing");
    for (std::size_t c = 0; c < columns.size(); ++c)
        out << (c ? "," : "") << columns[c];
    out << "\n";
    for (Eigen::Index r = 0; r < values.rows(); ++r) {
        for (Eigen::Index c = 0; c < values.cols(); ++c)
            out << (c ? "," : "") << format_double(values(r, c));
        out << "\n";
    }
    if (!out) throw schema_error("write failed for '" + path + "'");
}

void write_csv(const std::string& path, const std::vector<std::string>& columns,
               const std::vector<std::vector<std::string>>& rows) {
    std::ofstream out(path);
    if (!out) throw schema_error("cannot open '" + path + "' for writing");
    for (std::size_t c = 0; c < columns.size(); ++c)
        out << (c ? "," : "") << columns[c];
    out << "\n";
    for (const auto& row : rows) {
        if (row.size() != columns.size())
            throw std::invalid_argument("write_csv: row width differs from header");
        for (std::size_t c = 0; c < row.size(); ++c)
            out << (c ? "," : "") << row[c];
        out << "\n";
    }
    if (!out) throw schema_error("write failed for '" + path + "'");
}

std::string hash_bytes(const std::string& bytes) {
    std::uint64_t hash = 0xcbf29ce484222325ULL;
    for (unsigned char b : bytes) {
        hash ^= b;
        hash *= 0x100000001b3ULL;
    }
    char buffer[17];
    std::snprintf(buffer, sizeof(buffer), "%016llx", static_cast<unsigned long long>(hash));
    return buffer;
}

std::string hash_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw schema_error("cannot open '" + path + "' for hashing");
    std::ostringstream content;
    content << in.rdbuf();
    return hash_bytes(content.str());
}

}  // namespace hidim::io
