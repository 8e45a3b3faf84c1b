#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace degcarl {

// Comma-separated, LF line ends, floats as %.17g.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  void add(std::vector<std::string> row) { rows.push_back(std::move(row)); }
  std::string str() const;
  void write(const std::filesystem::path& path) const;
};

std::string csv_cell(double v);
std::string csv_cell(long long v);
std::string csv_cell(const std::string& v);
std::string csv_cell(bool v);

}  // namespace degcarl
