#pragma once

#include <fstream>
#include <string>
#include <vector>

#include "ckn/errors.hpp"

namespace ckn {

// Shortest-exact is not wanted here: all floating output is written with 17
// significant digits so files round-trip and diff exactly.
std::string format_g17(double v);

// CSV with a version comment line, a header row, LF endings, deterministic
// formatting.
class CsvWriter {
 public:
  CsvWriter(const std::string& path, const std::vector<std::string>& header);
  void row(const std::vector<std::string>& cells);
  void close();

  static std::string cell(double v) { return format_g17(v); }
  static std::string cell(int v) { return std::to_string(v); }
  static std::string cell(const std::string& s) { return s; }

 private:
  std::ofstream out_;
  std::size_t width_ = 0;
};

extern const char* kSchemaVersion;

}  // namespace ckn
