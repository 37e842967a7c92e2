#include "divcurl/geom_io.hpp"

#include <array>
#include <bit>
#include <fstream>

#include "json.hpp"

#include "divcurl/error.hpp"

namespace divcurl {

namespace {

static_assert(std::endian::native == std::endian::little, "container I/O assumes a little-endian host");

constexpr std::array<char, 4> kMagic{'G', 'E', 'O', 'M'};

template <typename T>
void put(std::ostream& out, T v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T get(std::istream& in) {
  T v{};
  in.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!in) throw FormatError("GEOM container truncated");
  return v;
}

void put_string(std::ostream& out, const std::string& s) {
  if (s.size() > 255) throw InvalidArgument("GEOM names are limited to 255 bytes");
  put<std::uint8_t>(out, static_cast<std::uint8_t>(s.size()));
  out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

std::string get_string(std::istream& in) {
  const auto len = get<std::uint8_t>(in);
  std::string s(len, '\0');
  in.read(s.data(), len);
  if (!in) throw FormatError("GEOM container truncated");
  return s;
}

void require_kind(const GeomRecord& r, const std::string& kind) {
  if (r.kind != kind) throw FormatError("GEOM record holds '" + r.kind + "', expected '" + kind + "'");
}

}  // namespace

const Eigen::MatrixXd& GeomRecord::block(const std::string& name) const {
  for (const auto& [n, m] : blocks)
    if (n == name) return m;
  throw FormatError("GEOM record has no block '" + name + "'");
}

double GeomRecord::scalar(const std::string& name) const {
  for (const auto& [n, v] : scalars)
    if (n == name) return v;
  throw FormatError("GEOM record has no scalar '" + name + "'");
}

std::string geom_sidecar_json(const GeomRecord& r) {
  nlohmann::ordered_json j;
  j["format"] = "GEOM";
  j["version"] = kGeomFormatVersion;
  j["kind"] = r.kind;
  j["dim"] = r.chart.dim();
  j["codim"] = r.chart.codim();
  for (int a = 0; a < r.chart.dim(); ++a) {
    j["cells"].push_back(r.chart.cells(a));
    j["lower"].push_back(r.chart.lower(a));
    j["upper"].push_back(r.chart.upper(a));
    j["periodic"].push_back(r.chart.periodic(a));
  }
  j["node_count"] = r.chart.node_count();
  j["blocks"] = nlohmann::json::array();
  for (const auto& [name, m] : r.blocks) j["blocks"].push_back({{"name", name}, {"rows", m.rows()}});
  for (const auto& [name, v] : r.scalars) j["scalars"][name] = v;
  j["layout"] = "each block is rows x nodes, node-major (all rows of node 0 first), axis 0 slowest";
  return j.dump(2) + "\n";
}

void write_geom(const std::filesystem::path& path, const GeomRecord& r) {
  const Chart& c = r.chart;
  for (const auto& [name, m] : r.blocks)
    if (m.cols() != static_cast<Eigen::Index>(c.node_count()))
      throw ShapeError("GEOM block '" + name + "' does not have one column per node");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open " + path.string() + " for writing");
  out.write(kMagic.data(), 4);
  put<std::uint16_t>(out, kGeomFormatVersion);
  put_string(out, r.kind);
  put<std::uint8_t>(out, static_cast<std::uint8_t>(c.dim()));
  put<std::uint8_t>(out, static_cast<std::uint8_t>(c.codim()));
  std::uint8_t mask = 0;
  for (int a = 0; a < c.dim(); ++a)
    if (c.periodic(a)) mask |= static_cast<std::uint8_t>(1u << a);
  put<std::uint8_t>(out, mask);
  for (int a = 0; a < c.dim(); ++a) put<std::uint32_t>(out, static_cast<std::uint32_t>(c.cells(a)));
  for (int a = 0; a < c.dim(); ++a) {
    put<double>(out, c.lower(a));
    put<double>(out, c.upper(a));
  }
  put<std::uint32_t>(out, static_cast<std::uint32_t>(r.blocks.size()));
  for (const auto& [name, m] : r.blocks) {
    put_string(out, name);
    put<std::uint32_t>(out, static_cast<std::uint32_t>(m.rows()));
    out.write(reinterpret_cast<const char*>(m.data()), static_cast<std::streamsize>(m.size() * sizeof(double)));
  }
  put<std::uint32_t>(out, static_cast<std::uint32_t>(r.scalars.size()));
  for (const auto& [name, v] : r.scalars) {
    put_string(out, name);
    put<double>(out, v);
  }
  if (!out) throw Error("write failed for " + path.string());
  std::ofstream side(path.string() + ".json");
  if (!side) throw Error("cannot open sidecar for " + path.string());
  side << geom_sidecar_json(r);
}

GeomRecord read_geom(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  std::array<char, 4> magic{};
  in.read(magic.data(), 4);
  if (!in || magic != kMagic) throw FormatError("not a GEOM container: " + path.string());
  const auto version = get<std::uint16_t>(in);
  if (version != kGeomFormatVersion) throw FormatError("unsupported GEOM version " + std::to_string(version));
  std::string kind = get_string(in);
  const int dim = get<std::uint8_t>(in);
  const int codim = get<std::uint8_t>(in);
  const auto mask = get<std::uint8_t>(in);
  if (dim != 2 && dim != 3) throw FormatError("GEOM dimension must be 2 or 3");
  std::vector<int> cells;
  std::vector<double> lower;
  std::vector<double> upper;
  std::vector<bool> periodic;
  for (int a = 0; a < dim; ++a) {
    cells.push_back(static_cast<int>(get<std::uint32_t>(in)));
    periodic.push_back((mask >> a) & 1u);
  }
  for (int a = 0; a < dim; ++a) {
    lower.push_back(get<double>(in));
    upper.push_back(get<double>(in));
  }
  Chart chart = [&] {
    try {
      return Chart(cells, lower, upper, periodic, codim);
    } catch (const Error& e) {
      throw FormatError(std::string("GEOM chart is invalid: ") + e.what());
    }
  }();
  GeomRecord r{std::move(kind), chart, {}};
  const auto count = get<std::uint32_t>(in);
  for (std::uint32_t b = 0; b < count; ++b) {
    std::string name = get_string(in);
    const auto rows = get<std::uint32_t>(in);
    Eigen::MatrixXd m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(chart.node_count()));
    in.read(reinterpret_cast<char*>(m.data()), static_cast<std::streamsize>(m.size() * sizeof(double)));
    if (!in) throw FormatError("GEOM block '" + name + "' truncated");
    r.blocks.emplace_back(std::move(name), std::move(m));
  }
  const auto scalar_count = get<std::uint32_t>(in);
  for (std::uint32_t i = 0; i < scalar_count; ++i) {
    std::string name = get_string(in);
    r.scalars.emplace_back(std::move(name), get<double>(in));
  }
  if (in.peek() != std::char_traits<char>::eof()) throw FormatError("trailing bytes after GEOM blocks");
  return r;
}

GeomRecord to_record(const MetricField& g) { return {"metric", g.chart(), {{"g", g.components()}}}; }

GeomRecord to_record(const ImmersionField& f) { return {"immersion", f.chart(), {{"f", f.points()}}}; }

GeomRecord to_record(const FundamentalData& fd) {
  return {"fundamental_data",
          fd.chart,
          {{"tangent", fd.tangent},
           {"normal", fd.normal},
           {"frame_coefficients", fd.frame_coefficients},
           {"second_form", fd.second_form},
           {"normal_conn", fd.normal_conn}}};
}

MetricField metric_from_record(const GeomRecord& r) {
  require_kind(r, "metric");
  return MetricField(r.chart, r.block("g"));
}

ImmersionField immersion_from_record(const GeomRecord& r) {
  require_kind(r, "immersion");
  return ImmersionField(r.chart, r.block("f"));
}

FundamentalData fundamental_data_from_record(const GeomRecord& r) {
  require_kind(r, "fundamental_data");
  const int n = r.chart.dim();
  const int k = r.chart.codim();
  FundamentalData fd{r.chart, n, k, r.block("tangent"), r.block("normal"), r.block("frame_coefficients"),
                     r.block("second_form"), r.block("normal_conn")};
  const int m = n + k;
  if (fd.tangent.rows() != n * m || fd.normal.rows() != k * m || fd.frame_coefficients.rows() != n * n ||
      fd.second_form.rows() != k * n * n || fd.normal_conn.rows() != n * k * k)
    throw FormatError("GEOM fundamental_data blocks have the wrong shapes");
  return fd;
}

}  // namespace divcurl
