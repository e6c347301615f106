#include "fpp/output.hpp"

#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace fpp {

std::string fmt_num(double x) {
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

std::string header_comment(const RunConfig& cfg, const std::string& command) {
    std::string h = std::string("# fpp ") + kVersion + "\n# command " + command + "\n";
    for (auto& [k, v] : cfg.echo) h += "# " + k + " = " + v + "\n";
    return h;
}

CsvWriter::CsvWriter(const std::string& path, const RunConfig& cfg, const std::string& command,
                     const std::vector<std::string>& columns, char sep)
    : os_(path, std::ios::binary | std::ios::trunc), path_(path), ncol_(columns.size()), sep_(sep) {
    if (!os_) throw std::runtime_error("cannot write " + path);
    os_ << header_comment(cfg, command);
    for (size_t i = 0; i < columns.size(); ++i) os_ << (i ? std::string(1, sep_) : "") << columns[i];
    os_ << '\n';
}

void CsvWriter::cell(const std::string& s) {
    if (col_ == ncol_) throw std::logic_error(path_ + ": too many cells in row");
    if (col_) os_ << sep_;
    os_ << s;
    ++col_;
}

CsvWriter& CsvWriter::operator<<(double x) {
    cell(fmt_num(x));
    return *this;
}

CsvWriter& CsvWriter::operator<<(long long x) {
    cell(std::to_string(x));
    return *this;
}

CsvWriter& CsvWriter::operator<<(const std::string& s) {
    cell(s);
    return *this;
}

void CsvWriter::end_row() {
    if (col_ != ncol_) throw std::logic_error(path_ + ": short row");
    os_ << '\n';
    col_ = 0;
    if (!os_) throw std::runtime_error("write failed: " + path_);
}

void write_text(const std::string& path, const std::string& text) {
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    if (!os) throw std::runtime_error("cannot write " + path);
    os << text;
    if (!os) throw std::runtime_error("write failed: " + path);
}

} // namespace fpp
