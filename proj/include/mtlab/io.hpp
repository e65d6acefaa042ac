#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

namespace mtlab {

// Writes to a sibling temp file, then renames over the target.
void atomic_write(const std::filesystem::path& path, const std::string& contents);

// Shortest round-trip decimal form, so reruns produce identical text.
std::string format_number(double v);

class CsvTable {
 public:
  explicit CsvTable(std::vector<std::string> header);
  CsvTable& row();
  CsvTable& add(double v);
  CsvTable& add(long long v);
  CsvTable& add(int v) { return add(static_cast<long long>(v)); }
  CsvTable& add(const std::string& s);
  std::string str() const;
  std::size_t rows() const { return rows_.size(); }

 private:
  std::vector<std::string> header_;
  std::vector<std::vector<std::string>> rows_;
};

// Minimal reader for the files this tool writes: header row, comma separated, no quoting.
struct CsvData {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  int column(const std::string& name) const;  // throws ConfigInvalid if absent
  double number(std::size_t row, const std::string& name) const;
};
CsvData read_csv(const std::filesystem::path& path);

nlohmann::json read_json(const std::filesystem::path& path);

struct CheckVerdict {
  std::string id;
  std::string verdict;  // PASS, FAIL, SKIPPED
  std::string detail;
};

struct Manifest {
  std::string subcommand;
  std::vector<std::string> argv;
  nlohmann::json config;
  std::vector<std::string> inputs;
  std::vector<std::string> artifacts;
  std::vector<CheckVerdict> checks;
  unsigned long long seed = 0;
  int threads = 1;
  double wall_time_s = 0.0;
  int exit_status = 0;
  nlohmann::json to_json() const;
};

// Library and toolchain versions recorded in manifests.
nlohmann::json build_versions();

}  // namespace mtlab
