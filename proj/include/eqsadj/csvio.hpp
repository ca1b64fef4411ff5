#pragma once

#include <fstream>
#include <string>
#include <vector>

namespace eqsadj {

// 17 significant digits: doubles survive a round trip through the text form.
std::string format_full(double v);

// One leading comment line ("# eqsadj <version> config=<hash>"), a header
// row, then data rows of equal width. Throws std::runtime_error on I/O
// failure or width mismatch.
class CsvWriter {
 public:
  CsvWriter(const std::string& path, const std::string& comment);
  void header(const std::vector<std::string>& names);
  void row(const std::vector<std::string>& cells);

 private:
  void write_line(const std::vector<std::string>& cells);

  std::string path_;
  std::ofstream out_;
  size_t columns_ = 0;
};

}  // namespace eqsadj
