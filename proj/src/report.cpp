#include "membrane/report.hpp"

#include <cstdio>
#include <fstream>
#include <memory>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace membrane {

namespace {

std::string format_cell(const CsvWriter::Cell& cell) {
  if (std::holds_alternative<double>(cell)) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", std::get<double>(cell));
    return buf;
  }
  if (std::holds_alternative<long long>(cell)) return std::to_string(std::get<long long>(cell));
  const std::string& s = std::get<std::string>(cell);
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string quoted = "\"";
  for (char c : s) {
    if (c == '"') quoted += '"';
    quoted += c;
  }
  quoted += '"';
  return quoted;
}

}  // namespace

void CsvWriter::row(std::vector<Cell> cells) {
  if (cells.size() != header_.size())
    throw std::invalid_argument("CsvWriter: row width does not match header");
  rows_.push_back(std::move(cells));
}

void CsvWriter::save(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path);
  for (std::size_t i = 0; i < header_.size(); ++i)
    out << (i ? "," : "") << header_[i];
  out << '\n';
  for (const auto& row : rows_) {
    for (std::size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << format_cell(row[i]);
    out << '\n';
  }
}

std::vector<std::vector<std::string>> read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::vector<std::vector<std::string>> rows;
  std::string line;
  while (std::getline(in, line)) {
    std::vector<std::string> cells;
    std::string cell;
    bool quoted = false;
    for (std::size_t i = 0; i <= line.size(); ++i) {
      if (i == line.size() || (line[i] == ',' && !quoted)) {
        cells.push_back(cell);
        cell.clear();
      } else if (line[i] == '"') {
        if (quoted && i + 1 < line.size() && line[i + 1] == '"') {
          cell += '"';
          ++i;
        } else {
          quoted = !quoted;
        }
      } else {
        cell += line[i];
      }
    }
    rows.push_back(std::move(cells));
  }
  return rows;
}

struct RunManifest::Impl {
  nlohmann::json json;
};

RunManifest::RunManifest(const std::string& experiment) : impl_(std::make_shared<Impl>()) {
  impl_->json["experiment"] = experiment;
  impl_->json["files"] = nlohmann::json::array();
  impl_->json["timings_ms"] = nlohmann::json::object();
}

void RunManifest::set(const std::string& key, double value) { impl_->json[key] = value; }
void RunManifest::set(const std::string& key, long long value) { impl_->json[key] = value; }
void RunManifest::set(const std::string& key, const std::string& value) {
  impl_->json[key] = value;
}
void RunManifest::set_array(const std::string& key, const std::vector<double>& values) {
  impl_->json[key] = values;
}
void RunManifest::add_file(const std::string& path) { impl_->json["files"].push_back(path); }
void RunManifest::add_timing(const std::string& label, double milliseconds) {
  impl_->json["timings_ms"][label] = milliseconds;
}

void RunManifest::save(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path);
  out << impl_->json.dump(2) << '\n';
}

}  // namespace membrane
