#pragma once

// Binary cochain container: "DCCH", version u16, dim u8, degree u8, N_a u32 per axis,
// then little-endian f64 values in storage order. A JSON sidecar (<path>.json) mirrors
// the header and adds the periods, which the binary header does not carry.

#include <filesystem>
#include <string>

#include "divcurl/grid.hpp"

namespace divcurl {

inline constexpr std::uint16_t kCochainFormatVersion = 1;

/// Writes `path` and `path + ".json"`. Dual cochains are rejected.
void write_cochain(const std::filesystem::path& path, const Cochain& c);

/// Reads a container written by write_cochain. Periods come from the sidecar when present,
/// otherwise every axis has period 1.
Cochain read_cochain(const std::filesystem::path& path);

/// The sidecar text for a cochain (also used when embedding metadata elsewhere).
std::string cochain_sidecar_json(const Cochain& c);

}  // namespace divcurl
