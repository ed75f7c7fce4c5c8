#include "bdfl/csv.hpp"

#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

#include "bdfl/common.hpp"

namespace bdfl {

void CsvTable::add(std::vector<CsvCell> row) {
  if (row.size() != columns.size()) {
    std::ostringstream os;
    os << "csv: row has " << row.size() << " cells, schema has " << columns.size() << " columns";
    throw Error(os.str());
  }
  rows.push_back(std::move(row));
}

std::string format_real(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  // snprintf honours LC_NUMERIC; force '.'
  for (char* p = buf; *p; ++p)
    if (*p == ',') *p = '.';
  return buf;
}

namespace {

std::string field(const std::string& s) {
  if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
  std::string q = "\"";
  for (char c : s) {
    if (c == '"') q += '"';
    q += c;
  }
  q += '"';
  return q;
}

std::string cell_text(const CsvCell& c) {
  struct Visitor {
    std::string operator()(std::int64_t v) const { return std::to_string(v); }
    std::string operator()(double v) const { return format_real(v); }
    std::string operator()(bool v) const { return v ? "true" : "false"; }
    std::string operator()(const std::string& v) const { return v; }
  };
  return std::visit(Visitor{}, c);
}

}  // namespace

void emit_csv(const CsvTable& table, std::ostream& out) {
  for (std::size_t i = 0; i < table.columns.size(); ++i) out << (i ? "," : "") << field(table.columns[i]);
  out << "\r\n";
  for (const auto& row : table.rows) {
    if (row.size() != table.columns.size()) throw Error("csv: row width does not match the schema");
    for (std::size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << field(cell_text(row[i]));
    out << "\r\n";
  }
}

void emit_csv(const CsvTable& table, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open '" + path + "' for writing: " + std::strerror(errno));
  emit_csv(table, out);
  out.flush();
  if (!out) throw Error("write to '" + path + "' failed: " + std::strerror(errno));
}

std::string to_csv_string(const CsvTable& table) {
  std::ostringstream os;
  emit_csv(table, os);
  return os.str();
}

std::vector<std::vector<std::string>> parse_csv(const std::string& text) {
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> row;
  std::string cur;
  bool quoted = false, any = false;
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          cur += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        cur += c;
      }
      continue;
    }
    if (c == '"') {
      quoted = true;
      any = true;
    } else if (c == ',') {
      row.push_back(cur);
      cur.clear();
      any = true;
    } else if (c == '\r' || c == '\n') {
      if (c == '\r' && i + 1 < text.size() && text[i + 1] == '\n') ++i;
      row.push_back(cur);
      rows.push_back(row);
      row.clear();
      cur.clear();
      any = false;
    } else {
      cur += c;
      any = true;
    }
  }
  if (any || !cur.empty()) {
    row.push_back(cur);
    rows.push_back(row);
  }
  return rows;
}

}  // namespace bdfl
