#pragma once

#include <cstddef>
#include <fstream>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

namespace volrank::csv {

/// Splits one comma-separated line. Fields are not quoted in any of the
/// formats this library reads, so no quote handling is done.
std::vector<std::string_view> split(std::string_view line);

/// Reads `path`, checks the header equals `expected_header` and calls
/// `on_row(fields, line_number)` for every non-blank data line. A file that
/// is completely empty is accepted and produces no rows. Rows with the
/// wrong field count raise ParseError.
void read(const std::string& path, std::string_view expected_header,
          const std::function<void(const std::vector<std::string_view>&, std::size_t)>& on_row);

double parse_double(std::string_view field, const std::string& path, std::size_t line);

/// Shortest text that round-trips the value exactly.
std::string format_double(double v);

/// Opens `path` for writing and throws std::runtime_error on failure.
std::ofstream open_out(const std::string& path);

}  // namespace volrank::csv
