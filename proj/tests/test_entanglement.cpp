#include <Eigen/Dense>
#include <cmath>

#include "doctest.h"
#include "entanglement.hpp"
#include "rng.hpp"
#include "states.hpp"

using namespace seqmag;
using namespace seqmag::entanglement;

namespace {

DickeVector dicke_level(int M, int k) {
  DickeVector s;
  s.M = M;
  s.amplitudes = Eigen::VectorXcd::Zero(M + 1);
  s.amplitudes(k) = 1.0;
  return s;
}

DickeVector random_state(int M, Rng& rng) {
  DickeVector s;
  s.M = M;
  s.amplitudes.resize(M + 1);
  for (int k = 0; k <= M; ++k) s.amplitudes(k) = cd(rng.normal(), rng.normal());
  s.amplitudes.normalize();
  return s;
}

double full_space_ln(const DickeVector& s, int M1) {
  const auto full = dicke_to_full(s);
  const int M2 = s.M - M1;
  Eigen::MatrixXcd mat(std::size_t(1) << M1, std::size_t(1) << M2);
  for (std::uint32_t idx = 0; idx < (1u << s.M); ++idx)
    mat(idx & ((1u << M1) - 1), idx >> M1) = full.amplitudes(idx);
  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(mat);
  return 2.0 * std::log2(svd.singularValues().sum());
}

}  // namespace

TEST_CASE("equal bipartition") {
  CHECK(equal_bipartition(10).M1 == 5);
  CHECK(equal_bipartition(7).M1 == 4);
  CHECK(equal_bipartition(7).M2 == 3);
  CHECK_THROWS_AS(equal_bipartition(1), Error);
}

TEST_CASE("Schmidt coefficients of paradigmatic states") {
  const auto bell = schmidt_coefficients(dicke_level(2, 1), {1, 1});
  CHECK(bell(0) == doctest::Approx(1.0 / std::sqrt(2.0)));
  CHECK(bell(1) == doctest::Approx(1.0 / std::sqrt(2.0)));
  const auto prod = schmidt_coefficients(dicke_level(4, 0), {2, 2});
  CHECK(prod(0) == doctest::Approx(1.0));
  CHECK(prod.tail(prod.size() - 1).cwiseAbs().maxCoeff() < 1e-12);
  // squares sum to one
  Rng rng(1);
  const auto sv = schmidt_coefficients(random_state(8, rng), {4, 4});
  CHECK(sv.squaredNorm() == doctest::Approx(1.0).epsilon(1e-10));
  CHECK_THROWS_AS(schmidt_coefficients(dicke_level(4, 0), {1, 2}), Error);
}

TEST_CASE("log negativity: exact values and full-space agreement") {
  CHECK(log_negativity(dicke_level(2, 1), {1, 1}) ==
        doctest::Approx(1.0).epsilon(1e-10));
  CHECK(log_negativity(dicke_level(5, 0), {2, 3}) ==
        doctest::Approx(0.0).epsilon(1e-10));
  CHECK(log_negativity(dicke_level(5, 5), {2, 3}) ==
        doctest::Approx(0.0).epsilon(1e-10));
  CHECK(log_negativity(dicke_level(4, 2), {2, 2}) ==
        doctest::Approx(full_space_ln(dicke_level(4, 2), 2)).epsilon(1e-9));
  Rng rng(2);
  for (int M : {4, 6, 8}) {
    const auto s = random_state(M, rng);
    for (int M1 = 1; M1 < M; ++M1)
      CHECK(log_negativity(s, {M1, M - M1}) ==
            doctest::Approx(full_space_ln(s, M1)).epsilon(1e-9));
  }
}

TEST_CASE("log negativity is invariant under free precession") {
  Rng rng(3);
  const auto s = random_state(6, rng);
  const auto fe = free_evolution(6, 1.234);
  DickeVector rotated = s;
  for (int k = 0; k <= 6; ++k) rotated.amplitudes(k) *= fe(k);
  for (int M1 : {1, 2, 3}) {
    CHECK(log_negativity(rotated, {M1, 6 - M1}) ==
          doctest::Approx(log_negativity(s, {M1, 6 - M1})).epsilon(1e-10));
    // swapping the partition labels changes nothing
    CHECK(log_negativity(s, {M1, 6 - M1}) ==
          doctest::Approx(log_negativity(s, {6 - M1, M1})).epsilon(1e-10));
  }
}

TEST_CASE("entanglement trace: degenerate cases and rejection rules") {
  CHECK(log_negativity(plus_x_state(6), equal_bipartition(6)) ==
        doctest::Approx(0.0).epsilon(1e-10));
  {
    ProtocolParams p;
    p.M = 4;
    p.beta = 0.0;
    p.phi = 0.7;
    p.n_max = 16;
    p.d_phi = 1e-4;
    const auto tr = entanglement_trace(p, {{2, 2}}, 4, 1);
    for (double v : tr.mean_ln[0]) CHECK(v == doctest::Approx(0.0).epsilon(1e-9));
  }
  {
    ProtocolParams p;
    p.M = 4;
    p.beta = 0.05;
    p.phi = 0.7;
    p.gamma2 = 0.01;
    p.n_max = 16;
    p.d_phi = 1e-4;
    CHECK_THROWS_AS(entanglement_trace(p, {{2, 2}}, 4, 1), Error);
    p.gamma2 = 0.0;
    CHECK_THROWS_AS(entanglement_trace(p, {{3, 2}}, 4, 1), Error);
  }
}

TEST_CASE("entanglement builds up along measured trajectories") {
  ProtocolParams p;
  p.M = 4;
  p.beta = 0.1;
  p.phi = 0.7;
  p.n_max = 64;
  p.d_phi = 1e-4;
  const auto tr = entanglement_trace(p, {{1, 3}, {2, 2}}, 8, 5);
  REQUIRE(tr.mean_ln.size() == 2);
  for (std::size_t s = 0; s < 2; ++s)
    for (double v : tr.mean_ln[s]) CHECK(v >= 0.0);
  // by N=64 the register is visibly entangled at this coupling
  CHECK(tr.mean_ln[1].back() > 0.05);
}
