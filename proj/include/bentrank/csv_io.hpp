#pragma once

#include "bentrank/dataset.hpp"

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

namespace bentrank {

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  /// Index of a header column; throws Parse when absent.
  std::size_t column(const std::string& name) const;
};

/// Comma separated, mandatory header row, optional double quotes.
CsvTable parse_csv(std::istream& in);
CsvTable read_csv(const std::filesystem::path& path);

struct ColumnMapping {
  std::string response;
  std::string threshold;
  std::vector<std::string> covariates;
  /// Prepend a constant column to X.
  bool intercept = true;
};

/// Strict numeric parse of a whole cell (surrounding blanks allowed).
bool parse_number(const std::string& cell, double& out);

Dataset table_to_dataset(const CsvTable& table, const ColumnMapping& mapping);
Dataset ingest_csv(const std::filesystem::path& path, const ColumnMapping& mapping);

/// "%.17g", round-trip exact.
std::string format_double(double v);

}  // namespace bentrank
