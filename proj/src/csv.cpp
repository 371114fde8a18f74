#include "magpc/csv.hpp"

#include <charconv>
#include <cmath>

namespace magpc {

std::string fmt17(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  if (v == 0.0) v = 0.0;  // fold -0 into 0
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::general, 17);
  return std::string(buf, res.ptr);
}

void CsvRow::sep() {
  if (!first_) line_ += ',';
  first_ = false;
}

CsvRow& CsvRow::operator<<(double v) {
  sep();
  line_ += fmt17(v);
  return *this;
}
CsvRow& CsvRow::operator<<(int v) {
  sep();
  line_ += std::to_string(v);
  return *this;
}
CsvRow& CsvRow::operator<<(long v) {
  sep();
  line_ += std::to_string(v);
  return *this;
}
CsvRow& CsvRow::operator<<(long long v) {
  sep();
  line_ += std::to_string(v);
  return *this;
}
CsvRow& CsvRow::operator<<(unsigned long v) {
  sep();
  line_ += std::to_string(v);
  return *this;
}
CsvRow& CsvRow::operator<<(unsigned long long v) {
  sep();
  line_ += std::to_string(v);
  return *this;
}
CsvRow& CsvRow::operator<<(const std::string& s) {
  sep();
  line_ += s;
  return *this;
}
CsvRow& CsvRow::operator<<(const char* s) {
  sep();
  line_ += s;
  return *this;
}

}  // namespace magpc
