#include "eqsadj/csvio.hpp"

#include <cstdio>
#include <stdexcept>

namespace eqsadj {

std::string format_full(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return std::string(buf);
}

CsvWriter::CsvWriter(const std::string& path, const std::string& comment)
    : path_(path), out_(path) {
  if (!out_) throw std::runtime_error("csv: cannot write '" + path + "'");
  out_ << "# " << comment << "\n";
}

void CsvWriter::header(const std::vector<std::string>& names) {
  if (columns_ != 0) throw std::runtime_error("csv: header written twice");
  if (names.empty()) throw std::runtime_error("csv: empty header");
  columns_ = names.size();
  write_line(names);
}

void CsvWriter::row(const std::vector<std::string>& cells) {
  if (columns_ == 0) throw std::runtime_error("csv: row before header");
  if (cells.size() != columns_)
    throw std::runtime_error("csv: row width mismatch in '" + path_ + "'");
  write_line(cells);
}

void CsvWriter::write_line(const std::vector<std::string>& cells) {
  for (size_t i = 0; i < cells.size(); ++i)
    out_ << cells[i] << (i + 1 == cells.size() ? "\n" : ",");
  if (!out_) throw std::runtime_error("csv: write to '" + path_ + "' failed");
}

}  // namespace eqsadj
