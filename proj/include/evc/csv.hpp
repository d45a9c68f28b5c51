#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

namespace evc {

// 17 significant digits, shortest form; round-trips any double.
std::string fmt17(double x);

struct CsvTable {
    std::vector<std::string> header;
    Eigen::MatrixXd values;
};

// Strict numeric CSV: comma-separated, optional single header line (detected
// as any non-numeric first row), rectangular. ParseError carries 1-based row
// and column of the offending cell.
CsvTable read_csv(const std::string& path);

void write_csv(const std::string& path, const std::vector<std::string>& header,
               const Eigen::MatrixXd& values);

// Row-stream writer for heterogeneous tables built line by line.
class CsvWriter {
public:
    CsvWriter(const std::string& path, const std::vector<std::string>& header);
    ~CsvWriter();
    CsvWriter(const CsvWriter&) = delete;
    CsvWriter& operator=(const CsvWriter&) = delete;

    void row(const std::vector<std::string>& cells);
    void close();

private:
    std::string path_;
    std::string buf_;
    std::size_t width_ = 0;
    bool open_ = true;
};

}  // namespace evc
