#include "mtlab/io.hpp"

#include <Eigen/Core>
#include <boost/version.hpp>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <unistd.h>

#include "mtlab/error.hpp"

namespace mtlab {

void atomic_write(const std::filesystem::path& path, const std::string& contents) {
  namespace fs = std::filesystem;
  std::error_code ec;
  if (path.has_parent_path()) fs::create_directories(path.parent_path(), ec);
  if (ec) throw Error(ErrorCode::Io, "cannot create " + path.parent_path().string() + ": " + ec.message());
  fs::path tmp = path;
  tmp += ".tmp." + std::to_string(::getpid());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::Io, "cannot open " + tmp.string());
    out << contents;
    out.flush();
    if (!out) throw Error(ErrorCode::Io, "write failed for " + tmp.string());
  }
  fs::rename(tmp, path, ec);
  if (ec) {
    fs::remove(tmp);
    throw Error(ErrorCode::Io, "rename to " + path.string() + " failed: " + ec.message());
  }
}

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

CsvTable::CsvTable(std::vector<std::string> header) : header_(std::move(header)) {}

CsvTable& CsvTable::row() {
  rows_.emplace_back();
  return *this;
}
CsvTable& CsvTable::add(double v) {
  rows_.back().push_back(format_number(v));
  return *this;
}
CsvTable& CsvTable::add(long long v) {
  rows_.back().push_back(std::to_string(v));
  return *this;
}
CsvTable& CsvTable::add(const std::string& s) {
  if (s.find_first_of(",\n\"") != std::string::npos)
    throw Error(ErrorCode::InvalidArgument, "CSV field needs quoting: " + s);
  rows_.back().push_back(s);
  return *this;
}

std::string CsvTable::str() const {
  std::ostringstream os;
  auto line = [&](const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) os << (i ? "," : "") << cells[i];
    os << '\n';
  };
  line(header_);
  for (const auto& r : rows_) {
    if (r.size() != header_.size()) throw Error(ErrorCode::InvalidArgument, "CSV row width mismatch");
    line(r);
  }
  return os.str();
}

int CsvData::column(const std::string& name) const {
  for (std::size_t i = 0; i < header.size(); ++i)
    if (header[i] == name) return int(i);
  throw Error(ErrorCode::ConfigInvalid, "CSV column '" + name + "' missing");
}

double CsvData::number(std::size_t row, const std::string& name) const {
  const std::string& cell = rows.at(row).at(column(name));
  try {
    std::size_t used = 0;
    double v = std::stod(cell, &used);
    if (used != cell.size()) throw std::invalid_argument(cell);
    return v;
  } catch (const std::exception&) {
    throw Error(ErrorCode::ConfigInvalid, "CSV column '" + name + "' row " + std::to_string(row) + ": '" +
                                              cell + "' is not a number");
  }
}

CsvData read_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot read " + path.string());
  CsvData d;
  std::string line;
  auto split = [](const std::string& s) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string cell;
    while (std::getline(ss, cell, ',')) out.push_back(cell);
    if (!s.empty() && s.back() == ',') out.emplace_back();
    return out;
  };
  if (!std::getline(in, line)) throw Error(ErrorCode::ConfigInvalid, path.string() + " is empty");
  d.header = split(line);
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    auto r = split(line);
    if (r.size() != d.header.size())
      throw Error(ErrorCode::ConfigInvalid, path.string() + ": row width differs from header");
    d.rows.push_back(std::move(r));
  }
  return d;
}

nlohmann::json read_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot read " + path.string());
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ConfigInvalid, path.string() + ": " + e.what());
  }
}

nlohmann::json Manifest::to_json() const {
  nlohmann::json j;
  j["subcommand"] = subcommand;
  j["argv"] = argv;
  j["config"] = config;
  j["inputs"] = inputs;
  j["artifacts"] = artifacts;
  j["seed"] = seed;
  j["threads"] = threads;
  j["wall_time_s"] = wall_time_s;
  j["exit_status"] = exit_status;
  j["versions"] = build_versions();
  nlohmann::json checks_json = nlohmann::json::array();
  for (const auto& c : checks) checks_json.push_back({{"id", c.id}, {"verdict", c.verdict}, {"detail", c.detail}});
  j["checks"] = checks_json;
  return j;
}

nlohmann::json build_versions() {
  nlohmann::json v;
  v["mtlab"] = "1.0.0";
  v["eigen"] = std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
               std::to_string(EIGEN_MINOR_VERSION);
  v["boost"] = std::to_string(BOOST_VERSION / 100000) + "." + std::to_string(BOOST_VERSION / 100 % 1000) + "." +
               std::to_string(BOOST_VERSION % 100);
  v["nlohmann_json"] = std::to_string(NLOHMANN_JSON_VERSION_MAJOR) + "." +
                       std::to_string(NLOHMANN_JSON_VERSION_MINOR) + "." +
                       std::to_string(NLOHMANN_JSON_VERSION_PATCH);
#if defined(__clang__)
  v["compiler"] = std::string("clang ") + __clang_version__;
#elif defined(__GNUC__)
  v["compiler"] = std::string("gcc ") + __VERSION__;
#endif
  v["cxx_standard"] = __cplusplus;
  return v;
}

}  // namespace mtlab
