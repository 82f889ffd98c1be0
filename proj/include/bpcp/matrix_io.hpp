#pragma once

#include <stdexcept>
#include <string>

#include "bpcp/matrix.hpp"

namespace bpcp {

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Binary format: little-endian u64 rows, u64 cols, then rows*cols IEEE-754
// doubles in row-major order. Bit-exact round trip.
void write_matrix_binary(const Matrix& a, const std::string& path);
Matrix read_matrix_binary(const std::string& path);

// CSV: one row per line, comma separated, 17 significant digits so doubles
// survive a round trip.
void write_matrix_csv(const Matrix& a, const std::string& path);
Matrix read_matrix_csv(const std::string& path);

/// Dispatch on extension: ".csv" is text, anything else is the binary format.
void write_matrix(const Matrix& a, const std::string& path);
Matrix read_matrix(const std::string& path);

}  // namespace bpcp
