#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>

#include "tfcs/types.hpp"

// Plain-text matrix files: a "rows cols" header line followed by one line per
// row of space-separated reals printed with 17 significant digits. Vectors are
// stored as single-column matrices.
namespace tfcs::io {

std::string format_real(double v);

void write_matrix(std::ostream& os, const Matrix& m);
Matrix read_matrix(std::istream& is);

void save_matrix(const std::filesystem::path& path, const Matrix& m);
Matrix load_matrix(const std::filesystem::path& path);

void save_vector(const std::filesystem::path& path, const Vector& v);
/// Accepts either an n x 1 or a 1 x n file.
Vector load_vector(const std::filesystem::path& path);

}  // namespace tfcs::io
