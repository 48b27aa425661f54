#include <doctest.h>

#include <random>
#include <unsupported/Eigen/KroneckerProduct>

#include "qls/random.hpp"
#include "qls/solvers.hpp"
#include "test_support.hpp"

using namespace qls;
using qlstest::rel_gap;

TEST_CASE("sylvester solve matches the dense Kronecker oracle") {
  std::mt19937_64 rng(21);
  const Mat a = random_complex_matrix(rng, 3, 3);
  const Mat b = random_complex_matrix(rng, 2, 2) + 5.0 * Mat::Identity(2, 2);
  const Mat q = random_complex_matrix(rng, 3, 2);

  const Mat x = solve_sylvester(a, b, q);
  CHECK((a * x + x * b + q).norm() < 1e-10 * q.norm());

  // Column-major vectorization: vec(A X + X B) = (1 (x) A + B^T (x) 1) vec(X).
  Mat lhs = Eigen::kroneckerProduct(Mat::Identity(2, 2), a).eval() +
            Eigen::kroneckerProduct(b.transpose(), Mat::Identity(3, 3)).eval();
  Eigen::Map<const Vec> q_vec(q.data(), 6);
  Vec x_vec = lhs.partialPivLu().solve(-q_vec);
  const Mat x_ref = Eigen::Map<const Mat>(x_vec.data(), 3, 2);
  CHECK(rel_gap(x, x_ref) < 1e-10);
}

TEST_CASE("lyapunov solve returns a Hermitian solution with small residual") {
  std::mt19937_64 rng(22);
  const Mat a = random_complex_matrix(rng, 4, 4) - 3.0 * Mat::Identity(4, 4);
  const Mat g = random_complex_matrix(rng, 4, 4);
  const Mat q = g * g.adjoint();

  const Mat p = solve_lyapunov(a, q);
  CHECK((a * p + p * a.adjoint() + q).norm() < 1e-11 * q.norm());
  CHECK((p - p.adjoint()).norm() < 1e-12 * p.norm());
}

TEST_CASE("intersecting spectra raise the degeneracy error") {
  Mat a = Mat::Identity(1, 1);
  Mat b = -Mat::Identity(1, 1);
  Mat q = Mat::Identity(1, 1);
  CHECK_THROWS_AS(solve_sylvester(a, b, q), DegeneracyError);
}

TEST_CASE("controllability and observability tests agree with hand-built pairs") {
  Mat a = Mat::Zero(2, 2);
  a(0, 0) = -1.0;
  a(1, 1) = -2.0;

  Mat b_full(2, 1), b_partial(2, 1);
  b_full << 1.0, 1.0;
  b_partial << 1.0, 0.0;  // the -2 mode is disconnected
  CHECK(pbh_controllable(a, b_full));
  CHECK_FALSE(pbh_controllable(a, b_partial));

  Mat c_full(1, 2), c_partial(1, 2);
  c_full << 1.0, 1.0;
  c_partial << 0.0, 1.0;  // the -1 mode is invisible
  CHECK(pbh_observable(c_full, a));
  CHECK_FALSE(pbh_observable(c_partial, a));
}
