#pragma once

#include <filesystem>

#include "divcurl/grid_matrices.hpp"

namespace divcurl {

/// "%%MatrixMarket matrix coordinate real general", 1-based indices, %.17g values.
void write_matrix_market(const std::filesystem::path& path, const SparseMatrix& m);
SparseMatrix read_matrix_market(const std::filesystem::path& path);

}  // namespace divcurl
