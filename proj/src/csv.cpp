#include "volrank/csv.hpp"

#include <charconv>
#include <cmath>
#include <stdexcept>

#include "volrank/errors.hpp"

namespace volrank::csv {

std::vector<std::string_view> split(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      out.push_back(line.substr(start));
      break;
    }
    out.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
  return out;
}

void read(const std::string& path, std::string_view expected_header,
          const std::function<void(const std::vector<std::string_view>&, std::size_t)>& on_row) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open '" + path + "'");
  const std::size_t n_fields = split(expected_header).size();
  std::string line;
  std::size_t line_no = 0;
  bool header_seen = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (!header_seen) {
      if (line != expected_header) {
        throw ParseError(path, line_no,
                         "expected header '" + std::string(expected_header) + "', got '" + line + "'");
      }
      header_seen = true;
      continue;
    }
    const auto fields = split(line);
    if (fields.size() != n_fields) {
      throw ParseError(path, line_no,
                       "expected " + std::to_string(n_fields) + " fields, got " +
                           std::to_string(fields.size()));
    }
    on_row(fields, line_no);
  }
}

double parse_double(std::string_view field, const std::string& path, std::size_t line) {
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
  if (ec != std::errc{} || ptr != field.data() + field.size() || !std::isfinite(v)) {
    throw ParseError(path, line, "invalid number '" + std::string(field) + "'");
  }
  return v;
}

std::string format_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  (void)ec;
  return std::string(buf, ptr);
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  return out;
}

}  // namespace volrank::csv
