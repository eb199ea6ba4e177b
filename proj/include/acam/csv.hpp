#pragma once

#include <cstdio>
#include <fstream>
#include <string>
#include <vector>

#include "acam/common.hpp"

namespace acam {

/// In-memory CSV builder with a fixed header. Numbers are formatted with
/// %.9g so identical inputs produce byte-identical files.
class CsvTable {
  public:
    explicit CsvTable(std::vector<std::string> header) : width_(header.size()) {
        require(!header.empty(), "CsvTable: empty header");
        for (std::size_t i = 0; i < header.size(); ++i) {
            if (i) body_ += ',';
            body_ += header[i];
        }
        body_ += '\n';
    }

    CsvTable& add(double v) {
        char buf[40];
        std::snprintf(buf, sizeof(buf), "%.9g", v);
        return add_raw(buf);
    }

    CsvTable& add(int v) { return add_raw(std::to_string(v)); }
    CsvTable& add(long v) { return add_raw(std::to_string(v)); }
    CsvTable& add(const std::string& v) { return add_raw(v); }
    CsvTable& add(const char* v) { return add_raw(v); }

    CsvTable& endrow() {
        require(col_ == width_, "CsvTable: row width mismatch");
        body_ += '\n';
        col_ = 0;
        ++rows_;
        return *this;
    }

    const std::string& str() const {
        require(col_ == 0, "CsvTable: unterminated row");
        return body_;
    }

    std::size_t rows() const { return rows_; }

  private:
    CsvTable& add_raw(const std::string& s) {
        require(col_ < width_, "CsvTable: too many cells in row");
        if (col_) body_ += ',';
        body_ += s;
        ++col_;
        return *this;
    }

    std::string body_;
    std::size_t width_ = 0;
    std::size_t col_ = 0;
    std::size_t rows_ = 0;
};

inline void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw std::runtime_error("short write: " + path);
}

}  // namespace acam
