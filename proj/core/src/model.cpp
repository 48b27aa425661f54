#include "qls/model.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <string>

namespace qls {

namespace {

double rel_dev(const Mat& x, const Mat& y) {
  const double scale = 1.0 + std::max(x.cwiseAbs().maxCoeff(), y.cwiseAbs().maxCoeff());
  return (x - y).cwiseAbs().maxCoeff() / scale;
}

void require_finite(const Mat& m, const char* what) {
  if (!m.allFinite()) throw NumericalError(std::string(what) + ": non-finite entries");
}

}  // namespace

QlsParams::QlsParams(Mat omega_minus, Mat omega_plus, Mat c_minus, Mat c_plus)
    : omega_minus_(std::move(omega_minus)),
      omega_plus_(std::move(omega_plus)),
      c_minus_(std::move(c_minus)),
      c_plus_(std::move(c_plus)) {
  const Index n = omega_minus_.rows();
  if (omega_minus_.cols() != n || omega_plus_.rows() != n || omega_plus_.cols() != n) {
    throw DimensionError("QlsParams: Hamiltonian blocks must be n x n");
  }
  if (c_minus_.cols() != n || c_plus_.cols() != n || c_plus_.rows() != c_minus_.rows()) {
    throw DimensionError("QlsParams: coupling blocks must be m x n");
  }
  if (n == 0 || c_minus_.rows() == 0) {
    throw DimensionError("QlsParams: need at least one mode and one channel");
  }
  require_finite(omega_minus_, "QlsParams.omega_minus");
  require_finite(omega_plus_, "QlsParams.omega_plus");
  require_finite(c_minus_, "QlsParams.c_minus");
  require_finite(c_plus_, "QlsParams.c_plus");
  if (rel_dev(omega_minus_, omega_minus_.adjoint()) > tol::validation) {
    throw StructureError("QlsParams: omega_minus must be Hermitian");
  }
  if (rel_dev(omega_plus_, omega_plus_.transpose()) > tol::validation) {
    throw StructureError("QlsParams: omega_plus must be symmetric");
  }
}

StateSpace build_state_space(const QlsParams& params) {
  const Index n = params.modes();
  const Mat c = params.coupling().full();
  const Mat omega = params.omega().full();
  const Mat a_full = -0.5 * flat(c) * c - Cplx(0, 1) * j_matrix(n) * omega;
  // Exact by block structure; split is a formality here.
  StateSpace ss{DoubledUp::split(a_full, 1e-12), params.coupling()};
  require_finite(ss.a.full(), "build_state_space.a");
  return ss;
}

StateSpace make_state_space(const Mat& a_full, const Mat& c_full, double tolerance) {
  if (a_full.rows() != a_full.cols()) throw DimensionError("make_state_space: A must be square");
  if (c_full.cols() != a_full.rows()) {
    throw DimensionError("make_state_space: C must have 2n columns");
  }
  return StateSpace{DoubledUp::split(a_full, tolerance), DoubledUp::split(c_full, tolerance)};
}

double check_realizability(const StateSpace& ss) {
  const Mat a = ss.a_full();
  const Mat c = ss.c_full();
  const Mat resid = a + flat(a) + flat(c) * c;
  const double scale = std::max(1.0, std::max(a.norm(), (flat(c) * c).norm()));
  return resid.norm() / scale;
}

DoubledUp recover_hamiltonian(const StateSpace& ss, double tolerance) {
  const double resid = check_realizability(ss);
  if (resid > tolerance) {
    throw StructureError("recover_hamiltonian: realizability residual " + std::to_string(resid) +
                         " exceeds tolerance");
  }
  const Mat a = ss.a_full();
  const Mat c = ss.c_full();
  const Index n = ss.modes();
  const Mat omega = Cplx(0, 1) * j_matrix(n) * (a + 0.5 * flat(c) * c);
  DoubledUp parts = DoubledUp::split(omega, std::max(tolerance, tol::structure));
  return parts;
}

QlsParams params_from_state_space(const StateSpace& ss, double tolerance) {
  DoubledUp omega = recover_hamiltonian(ss, tolerance);
  Mat om = omega.minus();
  Mat op = omega.plus();
  if (rel_dev(om, om.adjoint()) > tolerance || rel_dev(op, op.transpose()) > tolerance) {
    throw StructureError("params_from_state_space: recovered Hamiltonian blocks malformed");
  }
  om = 0.5 * (om + om.adjoint()).eval();
  op = 0.5 * (op + op.transpose()).eval();
  return QlsParams(std::move(om), std::move(op), ss.c.minus(), ss.c.plus());
}

bool is_passive(const QlsParams& params, double tolerance) {
  const double scale =
      1.0 + std::max(params.c_minus().cwiseAbs().maxCoeff(), params.omega_minus().cwiseAbs().maxCoeff());
  const double cp = params.c_plus().cwiseAbs().maxCoeff();
  const double op = params.omega_plus().cwiseAbs().maxCoeff();
  return std::max(cp, op) <= tolerance * scale;
}

GaussianInput::GaussianInput(Mat n_mat, Mat m_mat)
    : n_mat_(std::move(n_mat)), m_mat_(std::move(m_mat)) {
  const Index m = n_mat_.rows();
  if (n_mat_.cols() != m || m_mat_.rows() != m || m_mat_.cols() != m || m == 0) {
    throw DimensionError("GaussianInput: N and M must be m x m");
  }
  require_finite(n_mat_, "GaussianInput.N");
  require_finite(m_mat_, "GaussianInput.M");
  if (rel_dev(n_mat_, n_mat_.adjoint()) > tol::validation) {
    throw StructureError("GaussianInput: N must be Hermitian");
  }
  if (rel_dev(m_mat_, m_mat_.transpose()) > tol::validation) {
    throw StructureError("GaussianInput: M must be symmetric");
  }
  Eigen::SelfAdjointEigenSolver<Mat> es(covariance());
  const double scale = std::max(1.0, es.eigenvalues().cwiseAbs().maxCoeff());
  if (es.eigenvalues().minCoeff() < -1e-10 * scale) {
    throw StructureError("GaussianInput: covariance V(N, M) is not positive semidefinite");
  }
}

GaussianInput GaussianInput::vacuum(Index m) {
  return GaussianInput(Mat::Zero(m, m), Mat::Zero(m, m));
}

Mat GaussianInput::covariance() const {
  const Index m = channels();
  Mat v(2 * m, 2 * m);
  v.topLeftCorner(m, m) = n_mat_.transpose() + Mat::Identity(m, m);
  v.topRightCorner(m, m) = m_mat_;
  v.bottomLeftCorner(m, m) = m_mat_.adjoint();
  v.bottomRightCorner(m, m) = n_mat_;
  return v;
}

bool GaussianInput::is_pure(double tolerance) const {
  const Index m = channels();
  const Mat nt1 = n_mat_.transpose() + Mat::Identity(m, m);
  const Mat resid = m_mat_.conjugate() * nt1.partialPivLu().solve(m_mat_) - n_mat_;
  const double scale = 1.0 + n_mat_.norm();
  return resid.norm() / scale <= tolerance;
}

Mat purifying_symplectic(const GaussianInput& input, double tolerance) {
  if (!input.is_pure(tolerance)) {
    throw PurityError("purifying_symplectic: input state is not pure");
  }
  const Index m = input.channels();
  const Mat id = Mat::Identity(m, m);
  const Mat s_minus = psd_sqrt(input.n_mat().transpose() + id);
  const Mat root = psd_sqrt(input.n_mat() + id);
  const Mat s_plus = input.m_mat() * root.partialPivLu().solve(id);
  const Mat s = DoubledUp(s_minus, s_plus).full();
  if (!is_flat_unitary(s, 1e-7)) {
    throw NumericalError("purifying_symplectic: result failed the symplectic check");
  }
  return s;
}

StateSpace reduce_to_vacuum_input(const StateSpace& ss, const GaussianInput& input) {
  if (input.channels() != ss.channels()) {
    throw DimensionError("reduce_to_vacuum_input: channel count mismatch");
  }
  const Mat s = purifying_symplectic(input);
  const Mat c_tilde = flat(s) * ss.c_full();
  DoubledUp omega = recover_hamiltonian(ss);
  QlsParams params(omega.minus(), omega.plus(),
                   DoubledUp::split(c_tilde, tol::structure).minus(),
                   DoubledUp::split(c_tilde, tol::structure).plus());
  return build_state_space(params);
}

}  // namespace qls
