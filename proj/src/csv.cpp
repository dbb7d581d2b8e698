#include "beurling/csv.hpp"

#include <cstdio>
#include <fstream>
#include <iterator>

namespace beurling {

std::string format_real(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

CsvWriter::CsvWriter(std::ostream& out,
                     std::initializer_list<std::string_view> header)
    : out_(out) {
  for (std::string_view h : header) cell(h);
  end_row();
}

CsvWriter& CsvWriter::cell(double v) { return cell(std::string_view(format_real(v))); }

CsvWriter& CsvWriter::cell(long long v) {
  return cell(std::string_view(std::to_string(v)));
}

CsvWriter& CsvWriter::cell(std::string_view v) {
  if (!first_) out_ << ',';
  out_ << v;
  first_ = false;
  return *this;
}

void CsvWriter::end_row() {
  out_ << '\n';
  first_ = true;
}

std::string file_digest(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (std::istreambuf_iterator<char> it(in), end; it != end; ++it) {
    h ^= static_cast<unsigned char>(*it);
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace beurling
