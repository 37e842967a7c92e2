#include "cli/artifacts.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>
#include <type_traits>

namespace divcurl::cli {

void Table::add(std::vector<Cell> row) {
  if (row.size() != columns.size()) throw std::logic_error("table row has the wrong number of cells");
  rows.push_back(std::move(row));
}

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

Json number(double v) { return std::isfinite(v) ? Json(v) : Json(format_double(v)); }

ArtifactWriter::ArtifactWriter(std::filesystem::path dir, std::string experiment, std::string config_hash)
    : dir_(std::move(dir)), experiment_(std::move(experiment)), hash_(std::move(config_hash)) {
  std::filesystem::create_directories(dir_);
}

std::vector<std::pair<std::string, std::string>> ArtifactWriter::header() const {
  return {{"experiment", experiment_}, {"config_hash", hash_}};
}

void ArtifactWriter::text(const std::string& name, const std::string& content) {
  const std::filesystem::path p = dir_ / name;
  std::ofstream out(p, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + p.string());
  out << content;
  if (!out) throw std::runtime_error("write failed for " + p.string());
  written_.push_back(name);
}

void ArtifactWriter::csv(const std::string& name, const Table& table) {
  std::string s;
  for (const auto& [k, v] : header()) s += "# " + k + "=" + v + "\n";
  for (std::size_t c = 0; c < table.columns.size(); ++c) s += (c ? "," : "") + table.columns[c];
  s += "\n";
  for (const auto& row : table.rows) {
    for (std::size_t c = 0; c < row.size(); ++c) {
      if (c) s += ",";
      std::visit(
          [&s](const auto& v) {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, std::string>)
              s += v;
            else if constexpr (std::is_same_v<T, double>)
              s += format_double(v);
            else if constexpr (std::is_same_v<T, bool>)
              s += v ? "true" : "false";
            else
              s += std::to_string(v);
          },
          row[c]);
    }
    s += "\n";
  }
  text(name, s);
}

void ArtifactWriter::json(const std::string& name, Json body) {
  if (!body.is_object()) throw std::logic_error("JSON artifacts are objects");
  for (const auto& [k, v] : header()) body[k] = v;
  text(name, body.dump(2) + "\n");
}

}  // namespace divcurl::cli
