#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <variant>
#include <vector>

namespace bdfl {

using CsvCell = std::variant<std::int64_t, double, bool, std::string>;

struct CsvTable {
  std::vector<std::string> columns;
  std::vector<std::vector<CsvCell>> rows;

  void add(std::vector<CsvCell> row);
};

/// 17 significant digits, '.' decimal separator, locale independent.
std::string format_real(double x);

/// RFC-4180: header row, CRLF line ends, fields quoted when they contain
/// a comma, quote, CR or LF.
void emit_csv(const CsvTable& table, std::ostream& out);
void emit_csv(const CsvTable& table, const std::string& path);
std::string to_csv_string(const CsvTable& table);

/// Minimal RFC-4180 reader (used to round-trip output in tests).
std::vector<std::vector<std::string>> parse_csv(const std::string& text);

}  // namespace bdfl
