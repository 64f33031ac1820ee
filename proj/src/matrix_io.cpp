#include "tfcs/matrix_io.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>

#include "tfcs/errors.hpp"

namespace tfcs::io {

std::string format_real(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_matrix(std::ostream& os, const Matrix& m) {
  os << m.rows() << ' ' << m.cols() << '\n';
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      if (j) os << ' ';
      os << format_real(m(i, j));
    }
    os << '\n';
  }
}

namespace {

double parse_real(const std::string& tok) {
  double v = 0.0;
  const char* first = tok.data();
  const char* last = first + tok.size();
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last) throw ContractViolation("matrix file: bad number '" + tok + "'");
  if (!std::isfinite(v)) throw ContractViolation("matrix file: non-finite entry");
  return v;
}

}  // namespace

Matrix read_matrix(std::istream& is) {
  long rows = 0, cols = 0;
  if (!(is >> rows >> cols) || rows <= 0 || cols <= 0)
    throw ContractViolation("matrix file: header must be two positive integers");
  Matrix m(rows, cols);
  std::string tok;
  for (long i = 0; i < rows; ++i)
    for (long j = 0; j < cols; ++j) {
      if (!(is >> tok)) throw ContractViolation("matrix file: truncated data");
      m(i, j) = parse_real(tok);
    }
  if (is >> tok) throw ContractViolation("matrix file: trailing data");
  return m;
}

void save_matrix(const std::filesystem::path& path, const Matrix& m) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("cannot open '" + path.string() + "' for writing");
  write_matrix(os, m);
  if (!os) throw IoError("write failed for '" + path.string() + "'");
}

Matrix load_matrix(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open '" + path.string() + "'");
  return read_matrix(is);
}

void save_vector(const std::filesystem::path& path, const Vector& v) { save_matrix(path, Matrix(v)); }

Vector load_vector(const std::filesystem::path& path) {
  const Matrix m = load_matrix(path);
  if (m.cols() == 1) return m.col(0);
  if (m.rows() == 1) return m.row(0).transpose();
  throw ContractViolation("vector file '" + path.string() + "' is not n x 1 or 1 x n");
}

}  // namespace tfcs::io
