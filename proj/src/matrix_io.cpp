#include "bpcp/matrix_io.hpp"

#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <limits>
#include <sstream>
#include <vector>

namespace bpcp {

namespace {

bool has_csv_extension(const std::string& path) {
  if (path.size() < 4) return false;
  std::string ext = path.substr(path.size() - 4);
  for (auto& c : ext) c = static_cast<char>(std::tolower(c));
  return ext == ".csv";
}

void put_u64_le(std::ostream& os, std::uint64_t v) {
  unsigned char b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
  os.write(reinterpret_cast<const char*>(b), 8);
}

std::uint64_t get_u64_le(std::istream& is) {
  unsigned char b[8];
  is.read(reinterpret_cast<char*>(b), 8);
  if (!is) throw IoError("matrix file: truncated header");
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
  return v;
}

}  // namespace

void write_matrix_binary(const Matrix& a, const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("cannot open for writing: " + path);
  put_u64_le(os, static_cast<std::uint64_t>(a.rows()));
  put_u64_le(os, static_cast<std::uint64_t>(a.cols()));
  // Row-major storage matches the wire layout; on little-endian hosts this
  // is a straight dump.
  static_assert(sizeof(double) == 8);
  os.write(reinterpret_cast<const char*>(a.data()),
           static_cast<std::streamsize>(sizeof(double)) * a.size());
  if (!os) throw IoError("write failed: " + path);
}

Matrix read_matrix_binary(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open: " + path);
  const std::uint64_t rows = get_u64_le(is);
  const std::uint64_t cols = get_u64_le(is);
  if (rows == 0 || cols == 0 || rows > (1u << 30) || cols > (1u << 30)) {
    throw IoError("matrix file: implausible dimensions in header");
  }
  Matrix a(static_cast<Index>(rows), static_cast<Index>(cols));
  is.read(reinterpret_cast<char*>(a.data()),
          static_cast<std::streamsize>(sizeof(double)) * a.size());
  if (!is) throw IoError("matrix file: truncated payload");
  return a;
}

void write_matrix_csv(const Matrix& a, const std::string& path) {
  std::FILE* f = std::fopen(path.c_str(), "w");
  if (!f) throw IoError("cannot open for writing: " + path);
  for (Index i = 0; i < a.rows(); ++i) {
    for (Index j = 0; j < a.cols(); ++j) {
      std::fprintf(f, j + 1 < a.cols() ? "%.17g," : "%.17g\n", a(i, j));
    }
  }
  if (std::fclose(f) != 0) throw IoError("write failed: " + path);
}

Matrix read_matrix_csv(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw IoError("cannot open: " + path);
  std::vector<std::vector<double>> rows;
  std::string line;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      try {
        row.push_back(std::stod(cell));
      } catch (const std::exception&) {
        throw IoError("csv: cannot parse '" + cell + "' in " + path);
      }
    }
    if (!rows.empty() && row.size() != rows.front().size()) {
      throw IoError("csv: ragged rows in " + path);
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw IoError("csv: no data in " + path);
  Matrix a(static_cast<Index>(rows.size()),
           static_cast<Index>(rows.front().size()));
  for (Index i = 0; i < a.rows(); ++i)
    for (Index j = 0; j < a.cols(); ++j)
      a(i, j) = rows[static_cast<size_t>(i)][static_cast<size_t>(j)];
  return a;
}

void write_matrix(const Matrix& a, const std::string& path) {
  if (has_csv_extension(path)) {
    write_matrix_csv(a, path);
  } else {
    write_matrix_binary(a, path);
  }
}

Matrix read_matrix(const std::string& path) {
  return has_csv_extension(path) ? read_matrix_csv(path)
                                 : read_matrix_binary(path);
}

}  // namespace bpcp
