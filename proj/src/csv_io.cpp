#include "bentrank/csv_io.hpp"

#include "bentrank/error.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <sstream>

namespace bentrank {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cur += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        cur += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      cells.push_back(trim(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  cells.push_back(trim(cur));
  return cells;
}

bool is_missing(const std::string& cell) {
  return cell.empty() || cell == "NA" || cell == "NaN" || cell == "nan" || cell == "null";
}

}  // namespace

std::size_t CsvTable::column(const std::string& name) const {
  for (std::size_t k = 0; k < header.size(); ++k) {
    if (header[k] == name) return k;
  }
  throw Error(ErrorKind::Parse, "missing column '" + name + "'");
}

CsvTable parse_csv(std::istream& in) {
  CsvTable table;
  std::string line;
  bool have_header = false;
  while (std::getline(in, line)) {
    if (!have_header) {
      if (line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) line.erase(0, 3);
      if (trim(line).empty()) continue;
      table.header = split_line(line);
      have_header = true;
      continue;
    }
    if (trim(line).empty()) continue;
    auto cells = split_line(line);
    if (cells.size() != table.header.size()) {
      throw Error(ErrorKind::Parse, "row " + std::to_string(table.rows.size() + 1) + " has " +
                                        std::to_string(cells.size()) + " cells, header has " +
                                        std::to_string(table.header.size()));
    }
    table.rows.push_back(std::move(cells));
  }
  if (!have_header) throw Error(ErrorKind::Parse, "empty file: no header row");
  if (table.rows.empty()) throw Error(ErrorKind::Parse, "empty file: no data rows");
  return table;
}

CsvTable read_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Io, "cannot open '" + path.string() + "'");
  return parse_csv(in);
}

bool parse_number(const std::string& cell, double& out) {
  const std::string s = trim(cell);
  if (s.empty()) return false;
  const char* first = s.data();
  if (*first == '+') ++first;
  const char* last = s.data() + s.size();
  const auto [ptr, ec] = std::from_chars(first, last, out);
  return ec == std::errc() && ptr == last && std::isfinite(out);
}

Dataset table_to_dataset(const CsvTable& table, const ColumnMapping& mapping) {
  const std::size_t iy = table.column(mapping.response);
  const std::size_t iz = table.column(mapping.threshold);
  std::vector<std::size_t> ix;
  for (const auto& name : mapping.covariates) ix.push_back(table.column(name));

  const auto n = static_cast<Eigen::Index>(table.rows.size());
  const auto offset = mapping.intercept ? 1 : 0;
  Vector y(n), z(n);
  Matrix x(n, static_cast<Eigen::Index>(ix.size()) + offset);
  std::vector<std::size_t> missing_rows;
  for (Eigen::Index r = 0; r < n; ++r) {
    const auto& row = table.rows[static_cast<std::size_t>(r)];
    auto cell = [&](std::size_t col, double& out) {
      const std::string& text = row[col];
      if (is_missing(text)) return false;
      if (!parse_number(text, out)) {
        throw Error(ErrorKind::Parse, "row " + std::to_string(r + 1) + ", column '" +
                                          table.header[col] + "': non-numeric value '" +
                                          text + "'");
      }
      return true;
    };
    bool complete = cell(iy, y[r]) && cell(iz, z[r]);
    if (offset) x(r, 0) = 1.0;
    for (std::size_t k = 0; k < ix.size() && complete; ++k) {
      complete = cell(ix[k], x(r, static_cast<Eigen::Index>(k) + offset));
    }
    if (!complete) missing_rows.push_back(static_cast<std::size_t>(r + 1));
  }
  if (!missing_rows.empty()) {
    std::ostringstream msg;
    msg << "missing values in mapped columns at rows";
    for (std::size_t k = 0; k < missing_rows.size() && k < 20; ++k) msg << ' ' << missing_rows[k];
    if (missing_rows.size() > 20) msg << " ...";
    throw Error(ErrorKind::Parse, msg.str());
  }
  return validate_dataset(std::move(y), std::move(x), std::move(z));
}

Dataset ingest_csv(const std::filesystem::path& path, const ColumnMapping& mapping) {
  return table_to_dataset(read_csv(path), mapping);
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace bentrank
