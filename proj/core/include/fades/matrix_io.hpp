#pragma once

#include <filesystem>
#include <variant>

#include "fades/matrix.hpp"

namespace fades {

/// Self-describing binary matrix container.
///
/// Layout, all integers little-endian:
///   bytes 0..7   magic "FADESMAT"
///   u32 version      (1)
///   u32 precision    (0 = Int8, 1 = Float32)
///   u32 layout       (0 = dense row-major, 1 = CSR)
///   u32 rows
///   u32 cols
///   u32 nnz          (dense: count of non-zero elements, informational)
/// payload:
///   dense: rows*cols elements (Int8 as signed bytes, Float32 as IEEE-754 LE)
///   CSR:   row_ptr as u64[rows+1], col_idx as u32[nnz], values as above
void save_matrix(const std::filesystem::path& path, const DenseMatrix& m);
void save_matrix(const std::filesystem::path& path, const CsrMatrix& m);

using LoadedMatrix = std::variant<DenseMatrix, CsrMatrix>;

/// Loads either layout; throws std::runtime_error on I/O or format errors.
LoadedMatrix load_matrix(const std::filesystem::path& path);

}  // namespace fades
