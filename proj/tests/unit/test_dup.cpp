#include <doctest.h>

#include <random>

#include "qls/dup.hpp"
#include "qls/random.hpp"
#include "test_support.hpp"

using namespace qls;
using qlstest::rel_gap;

TEST_CASE("metric, swap and vacuum matrices have the documented entries") {
  Mat j = j_matrix(2);
  CHECK((j - Mat(Eigen::Vector4cd(1, 1, -1, -1).asDiagonal())).norm() == 0.0);
  Mat sw = swap_matrix(1);
  CHECK(sw(0, 0) == Cplx(0));
  CHECK(sw(0, 1) == Cplx(1));
  CHECK(sw(1, 0) == Cplx(1));
  CHECK(sw(1, 1) == Cplx(0));
  Mat v = vacuum_covariance(2);
  CHECK((v - Mat(Eigen::Vector4cd(1, 1, 0, 0).asDiagonal())).norm() == 0.0);
}

TEST_CASE("flat adjoint follows the metric convention and reverses products") {
  std::mt19937_64 rng(11);
  const Mat z = random_complex_matrix(rng, 4, 2);  // 2 modes by 1 channel
  CHECK(rel_gap(flat(z), j_matrix(1) * z.adjoint() * j_matrix(2)) == 0.0);
  CHECK((flat(flat(z)) - z).norm() == 0.0);

  const Mat x = random_complex_matrix(rng, 4, 6);
  const Mat y = random_complex_matrix(rng, 6, 2);
  CHECK(rel_gap(flat(x * y), flat(y) * flat(x)) < 1e-14);

  CHECK_THROWS_AS(flat(random_complex_matrix(rng, 3, 2)), DimensionError);
}

TEST_CASE("doubled-up deviation detects broken pairing") {
  std::mt19937_64 rng(12);
  Mat z = random_doubled_up(rng, 2, 2);
  CHECK(doubled_up_deviation(z) == 0.0);
  CHECK(is_doubled_up(z));

  z(0, 1) += Cplx(1e-6, 0.0);
  CHECK(doubled_up_deviation(z) > 1e-8);
  CHECK_FALSE(is_doubled_up(z));
  CHECK(is_doubled_up(z, 1e-4));
}

TEST_CASE("split averages the redundant copies and rejects gross violations") {
  std::mt19937_64 rng(13);
  const Mat clean = random_doubled_up(rng, 2, 3);
  Mat z = clean;
  z(0, 0) += Cplx(1e-10, 0.0);
  const DoubledUp d = DoubledUp::split(z, 1e-6);
  // The perturbation lands half in the averaged block.
  CHECK(std::abs(d.minus()(0, 0) - clean(0, 0) - Cplx(5e-11, 0.0)) < 1e-14);

  z(0, 0) += Cplx(1.0, 0.0);
  CHECK_THROWS_AS(DoubledUp::split(z, 1e-6), StructureError);
}

TEST_CASE("hyperbolic rotations are symplectic, plain dilations are not") {
  const double r = 0.8;
  Mat squeeze(2, 2);
  squeeze << std::cosh(r), std::sinh(r), std::sinh(r), std::cosh(r);
  CHECK(is_symplectic(squeeze));

  // A uniform phase preserves the metric but breaks the conjugate block
  // symmetry; a real dilation keeps the block symmetry but stretches the
  // metric. Each violates exactly one half of the symplectic definition.
  Mat phase = Mat::Zero(2, 2);
  phase(0, 0) = Cplx(0.0, 1.0);
  phase(1, 1) = Cplx(0.0, 1.0);
  CHECK(is_flat_unitary(phase));
  CHECK_FALSE(is_doubled_up(phase));
  CHECK_FALSE(is_symplectic(phase));

  Mat dilation = Mat::Zero(2, 2);
  dilation(0, 0) = 2.0;
  dilation(1, 1) = 2.0;
  CHECK_FALSE(is_flat_unitary(dilation));
  CHECK(is_doubled_up(dilation));
  CHECK_FALSE(is_symplectic(dilation));

  Mat stretch = Mat::Zero(4, 4);
  stretch.diagonal() << 2.0, 1.0, 0.5, 1.0;
  CHECK_FALSE(is_symplectic(stretch));

  std::mt19937_64 rng(14);
  for (int k = 0; k < 5; ++k) CHECK(is_symplectic(random_symplectic(rng, 2)));
}

TEST_CASE("psd square root matches the diagonal oracle and squares back") {
  Mat diag = Mat::Zero(2, 2);
  diag(0, 0) = 4.0;
  diag(1, 1) = 1.0;
  Mat root = psd_sqrt(diag);
  CHECK(root(0, 0) == Cplx(2.0));
  CHECK(root(1, 1) == Cplx(1.0));

  std::mt19937_64 rng(15);
  const Mat g = random_complex_matrix(rng, 3, 3);
  const Mat h = g * g.adjoint();
  const Mat s = psd_sqrt(h);
  CHECK(rel_gap(s * s, h) < 1e-12);
  CHECK((s - s.adjoint()).norm() < 1e-12 * s.norm());

  Mat indefinite = Mat::Zero(2, 2);
  indefinite(0, 0) = 1.0;
  indefinite(1, 1) = -1.0;
  CHECK_THROWS_AS(psd_sqrt(indefinite), NumericalError);
}

TEST_CASE("flat factorization recovers a factor of the constructed gram") {
  const Mat eye = Mat::Identity(4, 4);
  const Mat f0 = flat_factorize(eye);
  CHECK(is_doubled_up(f0, 1e-10));
  CHECK(rel_gap(flat(f0) * f0, eye) < 1e-10);

  std::mt19937_64 rng(16);
  for (int k = 0; k < 100; ++k) {
    const Index p = 1 + k % 4;
    const Mat t = random_symplectic(rng, p, 0.6) + 0.3 * random_doubled_up(rng, p, p, 0.2);
    const Mat w = flat(t) * t;
    const Mat f = flat_factorize(w);
    CHECK(is_doubled_up(f, 1e-9));
    CHECK(rel_gap(flat(f) * f, w) < 1e-9);
  }
}

TEST_CASE("factoring a symplectic gram leaves a symplectic mismatch") {
  // The gram of a symplectic source collapses to the identity, so the
  // factor can differ from the source only by another symplectic.
  std::mt19937_64 rng(17);
  const Mat t0 = random_symplectic(rng, 2, 0.7);
  const Mat w = flat(t0) * t0;
  const Mat f = flat_factorize(w);
  CHECK(rel_gap(flat(f) * f, w) < 1e-10);
  CHECK(is_symplectic(t0 * f.partialPivLu().inverse(), 1e-8));
}

TEST_CASE("symplectic products and inverses stay symplectic") {
  std::mt19937_64 rng(18);
  for (int k = 0; k < 10; ++k) {
    const Index n = 1 + k % 3;
    const Mat s1 = random_symplectic(rng, n, 0.5);
    const Mat s2 = random_symplectic(rng, n, 0.5);
    CHECK(is_symplectic(s1 * s2, 1e-10));
    CHECK(is_symplectic(s1.partialPivLu().inverse(), 1e-10));
  }
}

TEST_CASE("flat factorization rejects wrong inertia and broken symmetry") {
  // J itself is flat-Hermitian but J * J = 1 has no (n, n) signature.
  CHECK_THROWS_AS(flat_factorize(j_matrix(1)), InfeasibleError);

  Mat nilpotent = Mat::Zero(2, 2);
  nilpotent(0, 1) = 1.0;
  CHECK_THROWS_AS(flat_factorize(nilpotent), StructureError);
}
