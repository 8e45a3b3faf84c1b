#include "degcarl/csv.hpp"

#include <fstream>

#include "degcarl/error.hpp"
#include "degcarl/format.hpp"

namespace degcarl {

std::string csv_cell(double v) { return fmt_g(v); }
std::string csv_cell(long long v) { return std::to_string(v); }
std::string csv_cell(bool v) { return v ? "true" : "false"; }

std::string csv_cell(const std::string& v) {
  if (v.find_first_of(",\"\n") == std::string::npos) return v;
  std::string out = "\"";
  for (char c : v) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

namespace {

void append_line(std::string& out, const std::vector<std::string>& cells) {
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (i) out += ',';
    out += cells[i];
  }
  out += '\n';
}

}  // namespace

std::string CsvTable::str() const {
  std::string out;
  append_line(out, header);
  for (const auto& r : rows) append_line(out, r);
  return out;
}

void CsvTable::write(const std::filesystem::path& path) const {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream f(path, std::ios::binary);
  if (!f) fail(ErrorKind::Data, "cannot write " + path.string());
  f << str();
}

}  // namespace degcarl
