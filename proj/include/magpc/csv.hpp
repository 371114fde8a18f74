#pragma once

#include <ostream>
#include <string>

namespace magpc {

// Shortest round-trip-safe text for a double, fixed at 17 significant digits.
std::string fmt17(double v);

// Minimal row builder; fields are comma-joined without quoting (the toolkit
// never emits commas inside fields).
class CsvRow {
 public:
  CsvRow& operator<<(double v);
  CsvRow& operator<<(int v);
  CsvRow& operator<<(long v);
  CsvRow& operator<<(long long v);
  CsvRow& operator<<(unsigned long v);
  CsvRow& operator<<(unsigned long long v);
  CsvRow& operator<<(const std::string& s);
  CsvRow& operator<<(const char* s);
  void write(std::ostream& os) const { os << line_ << '\n'; }
  const std::string& str() const { return line_; }

 private:
  void sep();
  std::string line_;
  bool first_ = true;
};

}  // namespace magpc
