#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

namespace solhmc::cli {

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Shortest decimal form that round-trips a double (at least 12 significant digits kept).
std::string format_number(double x);

/// Comma-separated table with a header row and LF line endings.
class CsvTable {
 public:
  explicit CsvTable(std::vector<std::string> header) : header_(std::move(header)) {}

  void add_row(std::vector<std::string> cells);
  std::string str() const;
  std::size_t rows() const { return rows_.size(); }

 private:
  std::vector<std::string> header_;
  std::vector<std::vector<std::string>> rows_;
};

/// Writes content to a temporary sibling and renames it into place.
void write_atomic(const std::filesystem::path& path, const std::string& content);

/// Sibling manifest path: out.csv -> out.csv.manifest.json
std::filesystem::path manifest_path_for(const std::filesystem::path& output);

struct RunManifest {
  std::string command;
  std::uint64_t seed = 0;
  std::string config_toml;
  nlohmann::json resolved;  ///< extra resolved parameters (iota/delta, scale, ...)
  double wall_clock_seconds = 0.0;
  std::vector<std::string> outputs;

  nlohmann::json to_json() const;
};

std::string software_version();

}  // namespace solhmc::cli
