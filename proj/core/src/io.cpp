#include "ckn/io.hpp"

#include <cstdio>

namespace ckn {

const char* kSchemaVersion = "1";

std::string format_g17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

CsvWriter::CsvWriter(const std::string& path,
                     const std::vector<std::string>& header)
    : out_(path, std::ios::binary) {
  if (!out_) throw Error("cannot open output file: " + path);
  out_ << "# cknlab-csv schema_version=" << kSchemaVersion << "\n";
  width_ = header.size();
  for (std::size_t i = 0; i < header.size(); ++i)
    out_ << header[i] << (i + 1 < header.size() ? "," : "");
  out_ << "\n";
}

void CsvWriter::row(const std::vector<std::string>& cells) {
  if (cells.size() != width_) throw Error("CSV row width mismatch");
  for (std::size_t i = 0; i < cells.size(); ++i)
    out_ << cells[i] << (i + 1 < cells.size() ? "," : "");
  out_ << "\n";
}

void CsvWriter::close() { out_.close(); }

}  // namespace ckn
