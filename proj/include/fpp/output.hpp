#pragma once

#include <fstream>
#include <string>
#include <vector>

#include "fpp/config.hpp"

namespace fpp {

// printf %.17g; nan and inf spelled out.
std::string fmt_num(double x);

// Header lines "# fpp <version>", "# command <name>" and "# <key> = <value>" per echoed config entry.
std::string header_comment(const RunConfig& cfg, const std::string& command);

// Comma-separated table, '\n' line endings, 17 significant digits.
class CsvWriter {
public:
    CsvWriter(const std::string& path, const RunConfig& cfg, const std::string& command,
              const std::vector<std::string>& columns, char sep = ',');

    CsvWriter& operator<<(double x);
    CsvWriter& operator<<(long long x);
    CsvWriter& operator<<(int x) { return *this << static_cast<long long>(x); }
    CsvWriter& operator<<(long x) { return *this << static_cast<long long>(x); }
    CsvWriter& operator<<(size_t x) { return *this << static_cast<long long>(x); }
    CsvWriter& operator<<(const std::string& s);
    CsvWriter& operator<<(const char* s) { return *this << std::string(s); }
    void end_row();

private:
    void cell(const std::string& s);

    std::ofstream os_;
    std::string path_;
    size_t ncol_, col_ = 0;
    char sep_;
};

// Writes text to path with '\n' endings; throws on I/O failure.
void write_text(const std::string& path, const std::string& text);

} // namespace fpp
