#pragma once

// CSV and JSON artifact writing. Every file carries the config hash: CSV files as leading
// "# key=value" comment lines, JSON files as top-level fields. Doubles in CSV use %.17g;
// JSON numbers are shortest round-trip, non-finite values become the strings "inf",
// "-inf" and "nan".

#include <filesystem>
#include <string>
#include <variant>
#include <vector>

#include "cli/config.hpp"

namespace divcurl::cli {

using Cell = std::variant<std::string, double, long long, bool>;

struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;

  void add(std::vector<Cell> row);
};

std::string format_double(double v);
Json number(double v);

class ArtifactWriter {
 public:
  ArtifactWriter(std::filesystem::path dir, std::string experiment, std::string config_hash);

  const std::filesystem::path& dir() const noexcept { return dir_; }
  const std::string& config_hash() const noexcept { return hash_; }
  /// Files written so far, relative to dir(), in write order.
  const std::vector<std::string>& written() const noexcept { return written_; }

  void csv(const std::string& name, const Table& table);
  /// Adds experiment and config_hash to `body` (which must be an object) and writes it.
  void json(const std::string& name, Json body);
  /// Raw text, for module writers that format their own output.
  void text(const std::string& name, const std::string& content);

  /// The header fields every artifact carries.
  std::vector<std::pair<std::string, std::string>> header() const;

 private:
  std::filesystem::path dir_;
  std::string experiment_;
  std::string hash_;
  std::vector<std::string> written_;
};

}  // namespace divcurl::cli
