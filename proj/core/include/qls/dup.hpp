#pragma once

#include <Eigen/Dense>
#include <complex>

#include "qls/errors.hpp"

namespace qls {

using Cplx = std::complex<double>;
using Mat = Eigen::MatrixXcd;
using Vec = Eigen::VectorXcd;
using Index = Eigen::Index;

namespace tol {
/// Default relative tolerance for structure checks (doubled-up pairing,
/// flat-unitarity, flat-Hermiticity).
inline constexpr double structure = 1e-9;
/// Relative tolerance for validating user-supplied Hermitian/symmetric data.
inline constexpr double validation = 1e-12;
/// Stability margin: Hurwitz means max Re(eig) < -stability.
inline constexpr double stability = 1e-9;
/// Relative singular-value threshold for rank decisions (PBH tests) and the
/// default threshold on the smallest stationary-covariance eigenvalue.
inline constexpr double rank = 1e-8;
/// Residues must be rank one up to sigma_2 <= rank_one * sigma_1.
inline constexpr double rank_one = 1e-8;
/// Gram matrices with smaller relative singular values count as singular.
inline constexpr double gram = 1e-10;
/// Pole-set pairing tolerance, relative to the spectral scale.
inline constexpr double pairing = 1e-7;
/// Row/column rescaling must restore pairing to this relative accuracy.
inline constexpr double rescale = 1e-6;
/// Default tolerance for the input purity identity.
inline constexpr double purity = 1e-8;
}  // namespace tol

/// diag(1_n, -1_n), the metric of the flat involution. Size 2n x 2n.
Mat j_matrix(Index n);

/// Block swap [0 1; 1 0] of size 2n x 2n.
Mat swap_matrix(Index n);

/// Covariance of m vacuum channels, diag(1_m, 0_m), with all annihilator
/// components ordered first.
Mat vacuum_covariance(Index m);

/// Z-flat = J_m Z^dagger J_n for Z of size 2n x 2m. Exact involution.
/// Throws DimensionError on odd dimensions.
Mat flat(const Mat& z);

/// Largest entrywise deviation of z from the pairing
/// [X Y; conj(Y) conj(X)], scaled by 1 + max|z|.
double doubled_up_deviation(const Mat& z);

/// True iff z has even dimensions and doubled_up_deviation(z) <= tolerance.
bool is_doubled_up(const Mat& z, double tolerance = tol::structure);

/// True iff s-flat s = s s-flat = 1 within tolerance (relative to |s|^2).
bool is_flat_unitary(const Mat& s, double tolerance = tol::structure);

/// True iff s is flat-unitary and doubled-up.
bool is_symplectic(const Mat& s, double tolerance = tol::structure);

/// Doubled-up matrix [minus plus; conj(plus) conj(minus)] stored by its
/// independent blocks; the assembled view satisfies the pairing exactly.
class DoubledUp {
 public:
  DoubledUp() = default;
  /// Blocks must have matching shapes.
  DoubledUp(Mat minus_block, Mat plus_block);

  /// Splits a full matrix; deviation beyond tolerance throws StructureError.
  /// The returned blocks average the two redundant copies.
  static DoubledUp split(const Mat& z, double tolerance = tol::structure);

  const Mat& minus() const { return minus_; }
  const Mat& plus() const { return plus_; }
  Index block_rows() const { return minus_.rows(); }
  Index block_cols() const { return minus_.cols(); }

  Mat full() const;

 private:
  Mat minus_, plus_;
};

/// Principal square root of a Hermitian positive semidefinite matrix via
/// eigendecomposition. Eigenvalues below -tolerance (relative) throw
/// NumericalError; small negative ones clip to zero.
Mat psd_sqrt(const Mat& h, double tolerance = 1e-10);

/// Factorizes a flat-Hermitian, doubled-up, invertible w with
/// inertia (p, p) of J w as w = t-flat t with t doubled-up and invertible.
/// The result is canonical for the eigendecomposition of J w; any other
/// factorization differs by a left symplectic factor.
/// Throws StructureError (not flat-Hermitian), InfeasibleError (inertia),
/// NumericalError (residual check failed).
Mat flat_factorize(const Mat& w, double tolerance = tol::structure);

}  // namespace qls
