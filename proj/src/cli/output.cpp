#include "solhmc/cli/output.hpp"

#include <charconv>
#include <cmath>
#include <fstream>

namespace solhmc::cli {

std::string software_version() { return "0.3.0"; }

std::string format_number(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[64];
  // %.17g always round-trips; trim to the shortest representation that still does.
  for (int precision = 12; precision <= 17; ++precision) {
    const int len = std::snprintf(buf, sizeof buf, "%.*g", precision, x);
    double back = 0.0;
    std::from_chars(buf, buf + len, back);
    if (back == x) break;
  }
  return buf;
}

void CsvTable::add_row(std::vector<std::string> cells) {
  if (cells.size() != header_.size()) throw std::invalid_argument("CSV row width does not match header");
  rows_.push_back(std::move(cells));
}

namespace {

void append_cell(std::string& out, const std::string& cell) {
  if (cell.find_first_of(",\"\n") == std::string::npos) {
    out += cell;
    return;
  }
  out += '"';
  for (char c : cell) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
}

void append_line(std::string& out, const std::vector<std::string>& cells) {
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (i) out += ',';
    append_cell(out, cells[i]);
  }
  out += '\n';
}

}  // namespace

std::string CsvTable::str() const {
  std::string out;
  append_line(out, header_);
  for (const auto& r : rows_) append_line(out, r);
  return out;
}

void write_atomic(const std::filesystem::path& path, const std::string& content) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) throw IoError("cannot open '" + tmp.string() + "' for writing");
    f << content;
    f.flush();
    if (!f) throw IoError("failed writing '" + tmp.string() + "'");
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    throw IoError("cannot move output into place at '" + path.string() + "'");
  }
}

std::filesystem::path manifest_path_for(const std::filesystem::path& output) {
  std::filesystem::path p = output;
  p += ".manifest.json";
  return p;
}

nlohmann::json RunManifest::to_json() const {
  return {{"software", "solhmc"},
          {"version", software_version()},
          {"command", command},
          {"seed", seed},
          {"config_toml", config_toml},
          {"resolved", resolved},
          {"wall_clock_seconds", wall_clock_seconds},
          {"outputs", outputs}};
}

}  // namespace solhmc::cli
