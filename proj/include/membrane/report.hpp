#pragma once

#include <memory>
#include <string>
#include <variant>
#include <vector>

namespace membrane {

/// RFC-4180 style CSV with a header row; doubles printed with 17 significant
/// digits so they round-trip exactly.
class CsvWriter {
 public:
  using Cell = std::variant<double, long long, std::string>;

  explicit CsvWriter(std::vector<std::string> header) : header_(std::move(header)) {}

  void row(std::vector<Cell> cells);
  void save(const std::string& path) const;

 private:
  std::vector<std::string> header_;
  std::vector<std::vector<Cell>> rows_;
};

/// Parses a CSV written by CsvWriter back into cells (used by tests and the
/// round-trip check).
std::vector<std::vector<std::string>> read_csv(const std::string& path);

/// Collects the run parameters and written files of one experiment run and
/// saves them as JSON.
class RunManifest {
 public:
  explicit RunManifest(const std::string& experiment);

  void set(const std::string& key, double value);
  void set(const std::string& key, long long value);
  void set(const std::string& key, const std::string& value);
  void set_array(const std::string& key, const std::vector<double>& values);
  void add_file(const std::string& path);
  void add_timing(const std::string& label, double milliseconds);
  void save(const std::string& path) const;

 private:
  struct Impl;
  std::shared_ptr<Impl> impl_;
};

}  // namespace membrane
