#pragma once

#include <filesystem>
#include <initializer_list>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

namespace beurling {

// Decimal text with 17 significant digits; round-trips every double.
std::string format_real(double v);

// Minimal CSV writer: header row, comma separator, decimal dot.
class CsvWriter {
 public:
  CsvWriter(std::ostream& out, std::initializer_list<std::string_view> header);

  CsvWriter& cell(double v);
  CsvWriter& cell(long long v);
  CsvWriter& cell(std::string_view v);
  void end_row();

 private:
  std::ostream& out_;
  bool first_ = true;
};

// FNV-1a 64-bit digest of a file's bytes, as 16 hex digits.
std::string file_digest(const std::filesystem::path& path);

}  // namespace beurling
