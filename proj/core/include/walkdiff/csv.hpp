#pragma once

#include <charconv>
#include <concepts>
#include <ostream>
#include <string>
#include <string_view>

namespace walkdiff::csv {

/// Shortest round-trip decimal form; locale-independent and deterministic.
inline std::string format_double(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

/// Minimal RFC 4180 writer: CRLF rows, quoting only when a field needs it.
class Writer {
 public:
  explicit Writer(std::ostream& out) : out_(out) {}

  void begin_row() { first_ = true; }
  void end_row() { out_ << "\r\n"; }

  void field(std::string_view s) {
    sep();
    if (s.find_first_of(",\"\r\n") == std::string_view::npos) {
      out_ << s;
    } else {
      out_ << '"';
      for (char c : s) {
        if (c == '"') out_ << '"';
        out_ << c;
      }
      out_ << '"';
    }
  }
  void field(const std::string& s) { field(std::string_view(s)); }
  void field(const char* s) { field(std::string_view(s)); }

  void field(double v) {
    sep();
    out_ << format_double(v);
  }

  template <std::integral T>
  void field(T v) {
    sep();
    out_ << v;
  }

  template <typename Range>
  void row(const Range& values) {
    begin_row();
    for (const auto& v : values) field(v);
    end_row();
  }

 private:
  void sep() {
    if (!first_) out_ << ',';
    first_ = false;
  }

  std::ostream& out_;
  bool first_ = true;
};

}  // namespace walkdiff::csv
