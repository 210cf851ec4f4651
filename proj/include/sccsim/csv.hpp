#pragma once

// Minimal CSV writer: '.' decimal separator regardless of locale, shortest
// round-trip number formatting, LF line endings.

#include <charconv>
#include <cstdint>
#include <string>
#include <string_view>

namespace sccsim {

class CsvWriter {
 public:
  explicit CsvWriter(std::string& out) : out_(out) {}

  CsvWriter& field(double v) {
    char buf[32];
    const auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
    separator();
    out_.append(buf, end);
    return *this;
  }
  CsvWriter& field(std::uint64_t v) {
    separator();
    out_ += std::to_string(v);
    return *this;
  }
  CsvWriter& field(int v) {
    separator();
    out_ += std::to_string(v);
    return *this;
  }
  CsvWriter& field(std::string_view s) {
    separator();
    out_ += s;
    return *this;
  }
  CsvWriter& field(const char* s) { return field(std::string_view(s)); }

  void end_row() {
    out_ += '\n';
    first_ = true;
  }

  /// Writes a header row from a comma-separated list.
  void header(std::string_view names) {
    out_ += names;
    end_row();
  }

 private:
  void separator() {
    if (!first_) out_ += ',';
    first_ = false;
  }
  std::string& out_;
  bool first_ = true;
};

}  // namespace sccsim
