#include <doctest.h>

#include <cstdio>
#include <filesystem>

#include "bpcp/matrix.hpp"
#include "bpcp/matrix_io.hpp"
#include "bpcp/rng.hpp"
#include "oracles.hpp"

using namespace bpcp;

namespace {

Matrix random_matrix(Index n, Index t, std::uint64_t seed) {
  RngStream rng(seed);
  Matrix a(n, t);
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < t; ++j) a(i, j) = rng.next_normal();
  return a;
}

std::string temp_path(const char* name) {
  return (std::filesystem::temp_directory_path() / name).string();
}

}  // namespace

TEST_CASE("svd of identity and diagonal matrices") {
  Matrix eye = Matrix::Identity(2, 2);
  SvdFactors f = svd(eye);
  CHECK(f.sigma(0) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(f.sigma(1) == doctest::Approx(1.0).epsilon(1e-12));

  Matrix d(2, 2);
  d << 3, 0, 0, 0;
  f = svd(d);
  CHECK(f.sigma(0) == doctest::Approx(3.0).epsilon(1e-12));
  CHECK(f.sigma(1) == doctest::Approx(0.0).epsilon(1e-12));
  // Leading singular vectors are the first canonical basis pair up to sign.
  CHECK(std::abs(f.u(0, 0)) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(std::abs(f.v(0, 0)) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(f.u(0, 0) * f.v(0, 0) * f.sigma(0) == doctest::Approx(3.0));
}

TEST_CASE("svd factors satisfy their invariants") {
  const Matrix a = random_matrix(5, 4, 11);
  SvdFactors f = svd(a);
  CHECK((f.u.transpose() * f.u - Matrix::Identity(4, 4)).cwiseAbs().maxCoeff() <
        1e-10);
  CHECK((f.v.transpose() * f.v - Matrix::Identity(4, 4)).cwiseAbs().maxCoeff() <
        1e-10);
  for (Index i = 0; i + 1 < f.sigma.size(); ++i)
    CHECK(f.sigma(i) >= f.sigma(i + 1));
  CHECK(norm_fro(f.reconstruct() - a) <= 1e-8 * norm_fro(a));

  // Re-decomposing the reconstruction reproduces the spectrum.
  SvdFactors g = svd(f.reconstruct());
  CHECK((f.sigma - g.sigma).cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("svd rejects non-finite input") {
  Matrix a = Matrix::Zero(2, 2);
  a(0, 1) = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(svd(a), std::invalid_argument);
}

TEST_CASE("norms on identity, zeros, and a unit rank-1 matrix") {
  Matrix eye = Matrix::Identity(2, 2);
  CHECK(norm_nuclear(eye) == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(norm_fro(eye) == doctest::Approx(std::sqrt(2.0)).epsilon(1e-12));
  CHECK(norm_op(eye) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(norm_l1(eye) == doctest::Approx(2.0));
  CHECK(norm_inf(eye) == doctest::Approx(1.0));

  Matrix zeros = Matrix::Zero(3, 2);
  CHECK(norm_nuclear(zeros) == 0.0);
  CHECK(norm_fro(zeros) == 0.0);
  CHECK(norm_op(zeros) == 0.0);
  CHECK(norm_l1(zeros) == 0.0);
  CHECK(norm_inf(zeros) == 0.0);

  Vector x = random_matrix(6, 1, 3).col(0);
  Vector y = random_matrix(5, 1, 4).col(0);
  x.normalize();
  y.normalize();
  Matrix outer = x * y.transpose();
  // Brute-force spectrum of the outer product via the independent Jacobi SVD.
  Vector s = oracle::jacobi_singular_values(outer);
  CHECK(s(0) == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(s.tail(s.size() - 1).cwiseAbs().maxCoeff() < 1e-10);
  CHECK(norm_nuclear(outer) == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(norm_fro(outer) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(norm_op(outer) == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("norm chain holds on randomized inputs") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const Matrix a = random_matrix(7, 5, 100 + seed);
    const double op = norm_op(a);
    const double fro = norm_fro(a);
    const double nuc = norm_nuclear(a);
    const double l1 = norm_l1(a);
    CHECK(op <= fro * (1 + 1e-12));
    CHECK(fro <= nuc * (1 + 1e-12));
    CHECK(fro <= l1 * (1 + 1e-12));
    // Nuclear norm is the l1 norm of the spectrum by construction.
    CHECK(norm_nuclear(a) == svd(a).sigma.sum());
  }
}

TEST_CASE("hadamard product") {
  Matrix a(2, 2);
  a << 1, 2, 3, 4;
  Matrix ones = Matrix::Ones(2, 2);
  Matrix zeros = Matrix::Zero(2, 2);
  CHECK(hadamard(a, ones) == a);
  CHECK(hadamard(a, zeros) == zeros);
  Matrix mask(2, 2);
  mask << 0, 1, 1, 0;
  Matrix expected(2, 2);
  expected << 0, 2, 3, 0;
  CHECK(hadamard(a, mask) == expected);
  CHECK_THROWS_AS(hadamard(a, Matrix::Ones(3, 2)), std::invalid_argument);
}

TEST_CASE("binary serialization round trip is bit exact") {
  const Matrix a = random_matrix(9, 4, 77);
  const std::string path = temp_path("bpcp_test_mat.bin");
  write_matrix_binary(a, path);
  const Matrix b = read_matrix_binary(path);
  REQUIRE(b.rows() == a.rows());
  REQUIRE(b.cols() == a.cols());
  CHECK(std::memcmp(a.data(), b.data(),
                    sizeof(double) * static_cast<size_t>(a.size())) == 0);
  std::filesystem::remove(path);
}

TEST_CASE("csv serialization round trip recovers every double") {
  Matrix a = random_matrix(5, 3, 78);
  a(0, 0) = 1e-300;
  a(1, 1) = -3.141592653589793e200;
  a(2, 2) = 0.1;
  const std::string path = temp_path("bpcp_test_mat.csv");
  write_matrix_csv(a, path);
  const Matrix b = read_matrix_csv(path);
  REQUIRE(b.rows() == a.rows());
  for (Index i = 0; i < a.rows(); ++i)
    for (Index j = 0; j < a.cols(); ++j) CHECK(a(i, j) == b(i, j));
  std::filesystem::remove(path);
}

TEST_CASE("matrix io failure modes") {
  CHECK_THROWS_AS(read_matrix_binary(temp_path("does_not_exist.bin")), IoError);
  const std::string path = temp_path("bpcp_trunc.bin");
  {
    std::FILE* f = std::fopen(path.c_str(), "wb");
    const char junk[12] = {0};
    std::fwrite(junk, 1, sizeof junk, f);
    std::fclose(f);
  }
  CHECK_THROWS_AS(read_matrix_binary(path), IoError);
  std::filesystem::remove(path);
}
