#pragma once

#include "qls/dup.hpp"

namespace qls {

/// Defining data of an n-mode, m-channel system: Hamiltonian blocks
/// (omega_minus Hermitian, omega_plus symmetric, both n x n) and coupling
/// blocks (c_minus, c_plus, both m x n). Validated on construction;
/// inputs violating Hermiticity/symmetry beyond 1e-12 relative are
/// rejected, never repaired silently.
class QlsParams {
 public:
  QlsParams(Mat omega_minus, Mat omega_plus, Mat c_minus, Mat c_plus);

  Index modes() const { return omega_minus_.rows(); }
  Index channels() const { return c_minus_.rows(); }

  const Mat& omega_minus() const { return omega_minus_; }
  const Mat& omega_plus() const { return omega_plus_; }
  const Mat& c_minus() const { return c_minus_; }
  const Mat& c_plus() const { return c_plus_; }

  DoubledUp omega() const { return DoubledUp(omega_minus_, omega_plus_); }
  DoubledUp coupling() const { return DoubledUp(c_minus_, c_plus_); }

 private:
  Mat omega_minus_, omega_plus_, c_minus_, c_plus_;
};

/// State-space pair (A, C) in doubled-up form. A is 2n x 2n, C is 2m x 2n.
struct StateSpace {
  DoubledUp a;
  DoubledUp c;

  Index modes() const { return a.block_rows(); }
  Index channels() const { return c.block_rows(); }
  Mat a_full() const { return a.full(); }
  Mat c_full() const { return c.full(); }
};

/// Builds A = -1/2 C-flat C - i J Omega from the defining data. The result
/// satisfies A + A-flat + C-flat C = 0 identically.
StateSpace build_state_space(const QlsParams& params);

/// Assembles a StateSpace from full matrices, projecting onto the
/// doubled-up subspace; deviation beyond tolerance throws StructureError.
StateSpace make_state_space(const Mat& a_full, const Mat& c_full,
                            double tolerance = tol::structure);

/// Relative residual of the physical-realizability identity
/// A + A-flat + C-flat C = 0.
double check_realizability(const StateSpace& ss);

/// Recovers Omega = i J (A + 1/2 C-flat C). Throws StructureError when the
/// realizability residual exceeds tolerance or the result is not a valid
/// Hamiltonian block pair.
DoubledUp recover_hamiltonian(const StateSpace& ss, double tolerance = 1e-6);

/// Inverse of build_state_space: recovers the defining data, projecting the
/// recovered Hamiltonian blocks onto Hermitian/symmetric form (deviation
/// beyond tolerance throws StructureError).
QlsParams params_from_state_space(const StateSpace& ss, double tolerance = 1e-6);

/// True iff both c_plus and omega_plus vanish within tolerance (relative).
bool is_passive(const QlsParams& params, double tolerance = tol::structure);

/// Stationary Gaussian input state of m channels, defined by N (Hermitian,
/// m x m) and M (symmetric, m x m) with covariance
/// V = [N^T + 1, M; M^dagger, N] >= 0.
class GaussianInput {
 public:
  GaussianInput(Mat n_mat, Mat m_mat);

  static GaussianInput vacuum(Index m);

  Index channels() const { return n_mat_.rows(); }
  const Mat& n_mat() const { return n_mat_; }
  const Mat& m_mat() const { return m_mat_; }

  /// Assembled covariance V(N, M), size 2m x 2m.
  Mat covariance() const;

  /// True iff conj(M) (N^T + 1)^{-1} M = N within tolerance.
  bool is_pure(double tolerance = tol::purity) const;

 private:
  Mat n_mat_, m_mat_;
};

/// Symplectic S with S V_vac S^dagger = V for a pure input,
/// S = Delta((N^T+1)^{1/2}, M (N+1)^{-1/2}). Throws PurityError for
/// impure inputs.
Mat purifying_symplectic(const GaussianInput& input, double tolerance = tol::purity);

/// Absorbs a pure input into the system: returns the system with coupling
/// S-flat C (Hamiltonian unchanged), whose vacuum power spectrum is
/// S-flat Psi(s) (S-flat)^dagger of the original.
StateSpace reduce_to_vacuum_input(const StateSpace& ss, const GaussianInput& input);

}  // namespace qls
