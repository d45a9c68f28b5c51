#include "evc/csv.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "evc/common.hpp"

namespace evc {
namespace {

std::vector<std::string> split_line(const std::string& line) {
    std::vector<std::string> cells;
    std::size_t start = 0;
    for (;;) {
        const std::size_t comma = line.find(',', start);
        if (comma == std::string::npos) {
            cells.push_back(line.substr(start));
            return cells;
        }
        cells.push_back(line.substr(start, comma - start));
        start = comma + 1;
    }
}

bool parse_double(const std::string& cell, double& out) {
    if (cell.empty()) return false;
    char* end = nullptr;
    out = std::strtod(cell.c_str(), &end);
    return end == cell.c_str() + cell.size();
}

void write_file_atomic(const std::string& path, const std::string& content) {
    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw IoError("cannot open for writing: " + tmp);
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
        if (!out) throw IoError("write failed: " + tmp);
    }
    if (std::rename(tmp.c_str(), path.c_str()) != 0)
        throw IoError("rename failed: " + path);
}

}  // namespace

std::string fmt17(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

CsvTable read_csv(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open for reading: " + path);
    std::vector<std::vector<std::string>> lines;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() && in.peek() == std::char_traits<char>::eof()) break;
        lines.push_back(split_line(line));
    }
    if (lines.empty()) throw ParseError(path + ": empty file", 1, 1);

    CsvTable table;
    std::size_t first_data = 0;
    double v;
    for (const auto& cell : lines[0])
        if (!parse_double(cell, v)) {
            table.header = lines[0];
            first_data = 1;
            break;
        }
    const std::size_t width = lines[0].size();
    const std::size_t nrows = lines.size() - first_data;
    table.values.resize(static_cast<Eigen::Index>(nrows), static_cast<Eigen::Index>(width));
    for (std::size_t r = 0; r < nrows; ++r) {
        const auto& cells = lines[first_data + r];
        const std::size_t file_row = first_data + r + 1;
        if (cells.size() != width)
            throw ParseError(path + ": ragged row", file_row, cells.size() + 1);
        for (std::size_t c = 0; c < width; ++c) {
            if (!parse_double(cells[c], v))
                throw ParseError(path + ": not a number: '" + cells[c] + "'",
                                 file_row, c + 1);
            table.values(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = v;
        }
    }
    return table;
}

void write_csv(const std::string& path, const std::vector<std::string>& header,
               const Eigen::MatrixXd& values) {
    if (!header.empty() && values.size() > 0 &&
        static_cast<Eigen::Index>(header.size()) != values.cols())
        throw DimensionMismatch("write_csv: header width mismatch");
    std::string buf;
    for (std::size_t i = 0; i < header.size(); ++i) {
        if (i) buf += ',';
        buf += header[i];
    }
    buf += '\n';
    for (Eigen::Index r = 0; r < values.rows(); ++r) {
        for (Eigen::Index c = 0; c < values.cols(); ++c) {
            if (c) buf += ',';
            buf += fmt17(values(r, c));
        }
        buf += '\n';
    }
    write_file_atomic(path, buf);
}

CsvWriter::CsvWriter(const std::string& path, const std::vector<std::string>& header)
    : path_(path), width_(header.size()) {
    for (std::size_t i = 0; i < header.size(); ++i) {
        if (i) buf_ += ',';
        buf_ += header[i];
    }
    buf_ += '\n';
}

CsvWriter::~CsvWriter() {
    if (!open_) return;
    try {
        close();
    } catch (...) {
    }
}

void CsvWriter::row(const std::vector<std::string>& cells) {
    if (!open_) throw IoError("CsvWriter: writer already closed");
    if (cells.size() != width_) throw DimensionMismatch("CsvWriter: row width mismatch");
    for (std::size_t i = 0; i < cells.size(); ++i) {
        if (i) buf_ += ',';
        buf_ += cells[i];
    }
    buf_ += '\n';
}

void CsvWriter::close() {
    if (!open_) return;
    open_ = false;
    write_file_atomic(path_, buf_);
}

}  // namespace evc
