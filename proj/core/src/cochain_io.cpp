#include "divcurl/cochain_io.hpp"

#include <array>
#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>

#include "json.hpp"

#include "divcurl/error.hpp"

namespace divcurl {

namespace {

static_assert(std::endian::native == std::endian::little, "container I/O assumes a little-endian host");

constexpr std::array<char, 4> kMagic{'D', 'C', 'C', 'H'};

template <typename T>
void put(std::ostream& out, T v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T get(std::istream& in) {
  T v{};
  in.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!in) throw FormatError("cochain container truncated");
  return v;
}

}  // namespace

std::string cochain_sidecar_json(const Cochain& c) {
  const PeriodicGrid& g = c.grid();
  nlohmann::ordered_json j;
  j["format"] = "DCCH";
  j["version"] = kCochainFormatVersion;
  j["dim"] = g.dim();
  j["degree"] = c.degree();
  j["resolution"] = nlohmann::json::array();
  j["period"] = nlohmann::json::array();
  for (int a = 0; a < g.dim(); ++a) {
    j["resolution"].push_back(g.resolution(a));
    j["period"].push_back(g.period(a));
  }
  j["value_count"] = c.size();
  j["layout"] = "axis-set major (lexicographic), node index with axis 0 slowest";
  return j.dump(2) + "\n";
}

void write_cochain(const std::filesystem::path& path, const Cochain& c) {
  if (c.is_dual()) throw ShapeError("only primal cochains can be serialized");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open " + path.string() + " for writing");
  const PeriodicGrid& g = c.grid();
  out.write(kMagic.data(), 4);
  put<std::uint16_t>(out, kCochainFormatVersion);
  put<std::uint8_t>(out, static_cast<std::uint8_t>(g.dim()));
  put<std::uint8_t>(out, static_cast<std::uint8_t>(c.degree()));
  for (int a = 0; a < g.dim(); ++a) put<std::uint32_t>(out, static_cast<std::uint32_t>(g.resolution(a)));
  out.write(reinterpret_cast<const char*>(c.values().data()),
            static_cast<std::streamsize>(c.size() * sizeof(double)));
  if (!out) throw Error("write failed for " + path.string());

  std::ofstream side(path.string() + ".json");
  if (!side) throw Error("cannot open sidecar for " + path.string());
  side << cochain_sidecar_json(c);
}

Cochain read_cochain(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  std::array<char, 4> magic{};
  in.read(magic.data(), 4);
  if (!in || magic != kMagic) throw FormatError("not a DCCH container: " + path.string());
  const auto version = get<std::uint16_t>(in);
  if (version != kCochainFormatVersion) throw FormatError("unsupported DCCH version " + std::to_string(version));
  const int dim = get<std::uint8_t>(in);
  const int degree = get<std::uint8_t>(in);
  if (dim != 2 && dim != 3) throw FormatError("DCCH dimension must be 2 or 3");
  std::vector<int> resolution;
  for (int a = 0; a < dim; ++a) resolution.push_back(static_cast<int>(get<std::uint32_t>(in)));

  std::vector<double> period(static_cast<std::size_t>(dim), 1.0);
  const std::filesystem::path side_path = path.string() + ".json";
  if (std::filesystem::exists(side_path)) {
    std::ifstream side(side_path);
    nlohmann::json j;
    try {
      side >> j;
      const auto p = j.at("period").get<std::vector<double>>();
      if (static_cast<int>(p.size()) != dim) throw FormatError("sidecar period length mismatch");
      period = p;
    } catch (const nlohmann::json::exception& e) {
      throw FormatError(std::string("malformed DCCH sidecar: ") + e.what());
    }
  }

  PeriodicGrid grid(resolution, period);
  if (degree > dim) throw FormatError("DCCH degree exceeds dimension");
  Eigen::VectorXd values(static_cast<Eigen::Index>(grid.cell_count(degree)));
  in.read(reinterpret_cast<char*>(values.data()), static_cast<std::streamsize>(values.size() * sizeof(double)));
  if (!in) throw FormatError("DCCH value block truncated");
  if (in.peek() != std::char_traits<char>::eof()) throw FormatError("trailing bytes after DCCH value block");
  return Cochain(grid, degree, std::move(values));
}

}  // namespace divcurl
