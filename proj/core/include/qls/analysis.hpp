#pragma once

#include <optional>
#include <vector>

#include "qls/model.hpp"

namespace qls {

/// One transfer-function sample Xi(s) = 1 - C (s - A)^{-1} C-flat together
/// with its top block row; the bottom blocks of Xi are the conjugates of the
/// top blocks evaluated at conj(s).
struct TransferSample {
  Cplx s;
  Mat xi;
  Mat xi_minus() const { return xi.topLeftCorner(xi.rows() / 2, xi.cols() / 2); }
  Mat xi_plus() const { return xi.topRightCorner(xi.rows() / 2, xi.cols() / 2); }
};

/// One power-spectrum sample Psi_V(s) = Xi(s) V Xi(-conj(s))^dagger.
/// At s = -i w the sample is Hermitian positive semidefinite.
struct SpectrumSample {
  Cplx s;
  Mat psi;
};

/// Evaluates the transfer function. Throws SingularityError when s is within
/// 1e-12 (relative to the spectral scale) of an eigenvalue of A.
TransferSample transfer_at(const StateSpace& ss, Cplx s);

/// Evaluates the power spectrum for input covariance v.
SpectrumSample spectrum_at(const StateSpace& ss, const Mat& v, Cplx s);

/// Eigenvalues of the doubled-up state matrix.
Vec state_spectrum(const StateSpace& ss);

/// True iff max Re(spec(A)) < -margin.
bool is_hurwitz(const StateSpace& ss, double margin = tol::stability);

/// PBH minimality: controllability of (A, C-flat) and observability of
/// (C, A). Both are computed; a disagreement throws ConsistencyError.
bool is_minimal(const StateSpace& ss, double tolerance = tol::rank);

/// Solution of A P + P A^dagger + C-flat V_vac (C-flat)^dagger = 0 for a
/// Hurwitz system. p is Hermitian; residual is the relative equation error.
struct StationaryCovariance {
  Mat p;
  double min_eigenvalue;
  double residual;
};

StationaryCovariance stationary_covariance(const StateSpace& ss);

/// Three redundant global-minimality criteria under vacuum input:
/// fully mixed stationary covariance, controllability of (A, C-flat V_vac),
/// observability of (V_vac C, A-flat). They must agree; a disagreement
/// throws ConsistencyError.
struct GlobalMinimalityReport {
  bool by_covariance;
  bool by_controllability;
  bool by_observability;
  double min_eig_p;
  bool verdict() const { return by_covariance; }
};

GlobalMinimalityReport is_globally_minimal(const StateSpace& ss, double tolerance = tol::rank);

/// Log-spaced probe frequencies omega in [1e-2, 1e2] * scale.
std::vector<double> probe_frequencies(double scale, int count = 50);

/// Spectral scale of a system: max(1, max |eig(A)|).
double spectral_scale(const StateSpace& ss);

/// Searches for the symplectic T with A2 = T A1 T-flat, C2 = C1 T-flat.
/// Returns nullopt when the transfer functions differ on the probe grid.
/// Both systems must be minimal. The returned T is verified symplectic and
/// satisfies both relations within tolerance; otherwise NumericalError.
std::optional<Mat> find_symplectic_between(const StateSpace& ss1, const StateSpace& ss2,
                                           double tolerance = tol::rank);

}  // namespace qls
