#include <Eigen/Dense>
#include <cmath>

#include "doctest.h"
#include "rng.hpp"
#include "states.hpp"

using namespace seqmag;

namespace {

DickeVector random_state(int M, Rng& rng) {
  DickeVector s;
  s.M = M;
  s.amplitudes.resize(M + 1);
  for (int k = 0; k <= M; ++k) s.amplitudes(k) = cd(rng.normal(), rng.normal());
  s.amplitudes.normalize();
  return s;
}

// isometry from the (M+1)-dim Dicke space into the 2^M space
Eigen::MatrixXcd dicke_isometry(int M) {
  Eigen::MatrixXcd D(std::size_t(1) << M, M + 1);
  for (int k = 0; k <= M; ++k) {
    DickeVector level;
    level.M = M;
    level.amplitudes = Eigen::VectorXcd::Zero(M + 1);
    level.amplitudes(k) = 1.0;
    D.col(k) = dicke_to_full(level).amplitudes;
  }
  return D;
}

}  // namespace

TEST_CASE("collective operators: Pauli halves at M=1, ladder at M=2") {
  const auto ops1 = collective_operators(1);
  CHECK(std::abs(ops1.Jx(0, 1) - cd(0.5, 0)) < 1e-15);
  CHECK(std::abs(ops1.Jx(1, 0) - cd(0.5, 0)) < 1e-15);
  CHECK(std::abs(ops1.Jz(0, 0) - cd(0.5, 0)) < 1e-15);
  CHECK(std::abs(ops1.Jz(1, 1) - cd(-0.5, 0)) < 1e-15);

  const auto ops2 = collective_operators(2);
  CHECK(std::abs(ops2.Jz(0, 0) - cd(1, 0)) < 1e-15);
  CHECK(std::abs(ops2.Jz(1, 1)) < 1e-15);
  CHECK(std::abs(ops2.Jz(2, 2) - cd(-1, 0)) < 1e-15);

  CHECK_THROWS_AS(collective_operators(0), Error);
}

TEST_CASE("collective operators: su(2) algebra and Casimir") {
  for (int M : {1, 2, 3, 7, 16, 41}) {
    const auto ops = collective_operators(M);
    const Eigen::MatrixXcd comm =
        ops.Jx * ops.Jy - ops.Jy * ops.Jx - cd(0, 1) * ops.Jz;
    CHECK(comm.cwiseAbs().maxCoeff() < 1e-12);
    const double J = 0.5 * M;
    const Eigen::MatrixXcd casimir =
        ops.Jx * ops.Jx + ops.Jy * ops.Jy + ops.Jz * ops.Jz;
    const Eigen::MatrixXcd expected =
        J * (J + 1) * Eigen::MatrixXcd::Identity(M + 1, M + 1);
    CHECK((casimir - expected).cwiseAbs().maxCoeff() < 1e-10);
  }
}

TEST_CASE("jx eigenbasis diagonalizes Jx with the integer ladder spectrum") {
  for (int M : {1, 2, 5, 30}) {
    const auto jx = jx_eigenbasis(M);
    const Eigen::MatrixXd Jx = collective_operators(M).Jx.real();
    CHECK((Jx * jx.V - jx.V * jx.d.asDiagonal().toDenseMatrix())
              .cwiseAbs()
              .maxCoeff() < 1e-10);
    CHECK((jx.V.transpose() * jx.V - Eigen::MatrixXd::Identity(M + 1, M + 1))
              .cwiseAbs()
              .maxCoeff() < 1e-12);
    CHECK(jx.d(0) == doctest::Approx(-0.5 * M));
    CHECK(jx.d(M) == doctest::Approx(0.5 * M));
  }
}

TEST_CASE("dicke_to_full: symmetric superpositions, isometry, Jz levels") {
  {  // single excitation of two spins
    DickeVector s;
    s.M = 2;
    s.amplitudes.resize(3);
    s.amplitudes << 0, 1, 0;
    const auto full = dicke_to_full(s);
    const double r = 1.0 / std::sqrt(2.0);
    CHECK(std::abs(full.amplitudes(0)) < 1e-15);
    CHECK(std::abs(full.amplitudes(1) - cd(r, 0)) < 1e-12);
    CHECK(std::abs(full.amplitudes(2) - cd(r, 0)) < 1e-12);
    CHECK(std::abs(full.amplitudes(3)) < 1e-15);
  }
  {  // M=1 is the identity map
    Rng rng(7);
    const auto s = random_state(1, rng);
    const auto full = dicke_to_full(s);
    CHECK((full.amplitudes - s.amplitudes).norm() < 1e-15);
  }
  {  // norm preservation for random states
    Rng rng(8);
    for (int M : {4, 9, 12}) {
      const auto s = random_state(M, rng);
      CHECK(std::abs(dicke_to_full(s).amplitudes.norm() - 1.0) < 1e-12);
    }
  }
  {  // every Dicke level lands on the right total-Jz eigenspace
    const int M = 5;
    for (int k = 0; k <= M; ++k) {
      DickeVector level;
      level.M = M;
      level.amplitudes = Eigen::VectorXcd::Zero(M + 1);
      level.amplitudes(k) = 1.0;
      const auto full = dicke_to_full(level);
      for (std::uint32_t idx = 0; idx < (1u << M); ++idx) {
        if (std::abs(full.amplitudes(idx)) < 1e-14) continue;
        CHECK(__builtin_popcount(idx) == k);
      }
    }
  }
  DickeVector big;
  big.M = 13;
  big.amplitudes = Eigen::VectorXcd::Zero(14);
  big.amplitudes(0) = 1.0;
  CHECK_THROWS_AS(dicke_to_full(big), Error);
}

TEST_CASE("bipartite_expand: Bell coefficients and product states") {
  DickeVector s;
  s.M = 2;
  s.amplitudes.resize(3);
  s.amplitudes << 0, 1, 0;
  const auto coeff = bipartite_expand(s, 1, 1);
  const double r = 1.0 / std::sqrt(2.0);
  CHECK(std::abs(coeff(0, 0)) < 1e-15);
  CHECK(std::abs(coeff(0, 1) - cd(r, 0)) < 1e-12);
  CHECK(std::abs(coeff(1, 0) - cd(r, 0)) < 1e-12);
  CHECK(std::abs(coeff(1, 1)) < 1e-15);

  s.amplitudes << 1, 0, 0;
  const auto coeff2 = bipartite_expand(s, 1, 1);
  CHECK(std::abs(coeff2(0, 0) - cd(1, 0)) < 1e-15);
  CHECK(std::abs(coeff2(1, 1)) < 1e-15);

  CHECK_THROWS_AS(bipartite_expand(s, 0, 2), Error);
  CHECK_THROWS_AS(bipartite_expand(s, 2, 2), Error);
}

TEST_CASE("bipartite_expand agrees with full-space reshaping elementwise") {
  Rng rng(11);
  const int M = 6, M1 = 3, M2 = 3;
  const auto s = random_state(M, rng);
  const auto coeff = bipartite_expand(s, M1, M2);
  const auto full = dicke_to_full(s);
  Eigen::MatrixXcd mat(1 << M1, 1 << M2);
  for (std::uint32_t idx = 0; idx < (1u << M); ++idx)
    mat(idx & ((1u << M1) - 1), idx >> M1) = full.amplitudes(idx);
  const Eigen::MatrixXcd projected =
      dicke_isometry(M1).adjoint() * mat * dicke_isometry(M2).conjugate();
  CHECK((projected - coeff).cwiseAbs().maxCoeff() < 1e-10);
  // nothing lives outside the symmetric (x) symmetric block
  const Eigen::MatrixXcd back =
      dicke_isometry(M1) * coeff * dicke_isometry(M2).transpose();
  CHECK((back - mat).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("bipartite singular values match the full space for M <= 10") {
  Rng rng(12);
  for (int M : {2, 3, 5, 8, 10}) {
    const auto s = random_state(M, rng);
    for (int M1 = 1; M1 < M; ++M1) {
      const auto coeff = bipartite_expand(s, M1, M - M1);
      CHECK(std::abs(coeff.norm() - 1.0) < 1e-10);
      Eigen::JacobiSVD<Eigen::MatrixXcd> svd_small(coeff);
      const auto full = dicke_to_full(s);
      Eigen::MatrixXcd mat(std::size_t(1) << M1, std::size_t(1) << (M - M1));
      for (std::uint32_t idx = 0; idx < (1u << M); ++idx)
        mat(idx & ((1u << M1) - 1), idx >> M1) = full.amplitudes(idx);
      Eigen::JacobiSVD<Eigen::MatrixXcd> svd_full(mat);
      const auto sv = svd_small.singularValues();
      const auto ref = svd_full.singularValues();
      for (int i = 0; i < sv.size(); ++i) {
        const double r = i < ref.size() ? ref(i) : 0.0;
        CHECK(std::abs(sv(i) - r) < 1e-9);
      }
    }
  }
}

TEST_CASE("log-space binomials survive large registers") {
  // C(1000, 500) overflows any fixed-width integer; the expansion must not
  DickeVector s;
  s.M = 1000;
  s.amplitudes = Eigen::VectorXcd::Zero(1001);
  s.amplitudes(500) = 1.0;
  const auto coeff = bipartite_expand(s, 500, 500);
  CHECK(std::isfinite(coeff.norm()));
  CHECK(std::abs(coeff.norm() - 1.0) < 1e-8);
}

TEST_CASE("spin coherent states") {
  const auto plus = plus_x_state(6);
  for (int k = 0; k <= 6; ++k) {
    const double expect = std::exp(0.5 * log_binomial(6, k)) / 8.0;
    CHECK(std::abs(plus.amplitudes(k) - cd(expect, 0)) < 1e-12);
  }
  const auto minus = spin_coherent(4, {-1.0, 0.0, 0.0});
  for (int k = 0; k <= 4; ++k) {
    const double mag = std::exp(0.5 * log_binomial(4, k)) / 4.0;
    const cd expect = mag * std::exp(cd(0, k * kPi));
    CHECK(std::abs(minus.amplitudes(k) - expect) < 1e-12);
  }
  CHECK_THROWS_AS(spin_coherent(3, {0.5, 0.0, 0.0}), Error);
}

TEST_CASE("ensemble spec validation") {
  auto spec = SpinEnsembleSpec::homogeneous(4, 0.01);
  CHECK_NOTHROW(spec.validate());
  spec.groups[0].size = 3;
  CHECK_THROWS_AS(spec.validate(), Error);
  spec.groups[0].size = 4;
  spec.groups[0].initial_bloch = {1.0, 1.0, 0.0};
  CHECK_THROWS_AS(spec.validate(), Error);
}
