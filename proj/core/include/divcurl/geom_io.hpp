#pragma once

// Binary container for chart-based geometry: "GEOM", version u16, then the kind string,
// the chart (dim, codim, periodic mask, cells, box), named (rows x nodes) f64 blocks and
// named f64 scalars.
// A JSON sidecar (<path>.json) describes the same header for humans and scripts; the
// reader needs only the binary file.

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "divcurl/chart.hpp"
#include "divcurl/geometry.hpp"

namespace divcurl {

inline constexpr std::uint16_t kGeomFormatVersion = 1;

struct GeomRecord {
  std::string kind;  // "metric", "immersion", "fundamental_data", "frame_integral", ...
  Chart chart;
  std::vector<std::pair<std::string, Eigen::MatrixXd>> blocks;
  std::vector<std::pair<std::string, double>> scalars = {};

  /// Throws FormatError when the block is missing.
  const Eigen::MatrixXd& block(const std::string& name) const;
  double scalar(const std::string& name) const;
};

void write_geom(const std::filesystem::path& path, const GeomRecord& record);
GeomRecord read_geom(const std::filesystem::path& path);
std::string geom_sidecar_json(const GeomRecord& record);

GeomRecord to_record(const MetricField& g);
GeomRecord to_record(const ImmersionField& f);
GeomRecord to_record(const FundamentalData& fd);

MetricField metric_from_record(const GeomRecord& r);
ImmersionField immersion_from_record(const GeomRecord& r);
FundamentalData fundamental_data_from_record(const GeomRecord& r);

}  // namespace divcurl
