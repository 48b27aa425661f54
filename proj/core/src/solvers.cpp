#include "qls/solvers.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <cmath>
#include <string>

namespace qls {

Mat solve_sylvester(const Mat& a, const Mat& b, const Mat& q) {
  if (a.rows() != a.cols() || b.rows() != b.cols()) {
    throw DimensionError("solve_sylvester: a and b must be square");
  }
  if (q.rows() != a.rows() || q.cols() != b.rows()) {
    throw DimensionError("solve_sylvester: q must be " + std::to_string(a.rows()) + "x" +
                         std::to_string(b.rows()));
  }
  if (a.rows() == 0 || b.rows() == 0) return Mat::Zero(q.rows(), q.cols());

  Eigen::ComplexSchur<Mat> sa(a);
  Eigen::ComplexSchur<Mat> sb(b);
  if (sa.info() != Eigen::Success || sb.info() != Eigen::Success) {
    throw NumericalError("solve_sylvester: Schur decomposition failed");
  }
  const Mat& ta = sa.matrixT();
  const Mat& tb = sb.matrixT();
  const Mat& ua = sa.matrixU();
  const Mat& ub = sb.matrixU();

  const double scale = std::max(ta.cwiseAbs().maxCoeff(), tb.cwiseAbs().maxCoeff());
  const double degeneracy_thr = 1e-12 * std::max(1.0, scale);

  Mat g = -(ua.adjoint() * q * ub);
  Mat y(g.rows(), g.cols());
  const Index n = ta.rows();
  const Index m = tb.rows();
  for (Index k = 0; k < m; ++k) {
    Vec rhs = g.col(k);
    for (Index j = 0; j < k; ++j) rhs -= tb(j, k) * y.col(j);
    Mat shifted = ta;
    shifted.diagonal().array() += tb(k, k);
    for (Index i = 0; i < n; ++i) {
      if (std::abs(shifted(i, i)) < degeneracy_thr) {
        throw DegeneracyError("solve_sylvester: spectra of a and -b intersect near eigenvalue " +
                              std::to_string(ta(i, i).real()) + "+" +
                              std::to_string(ta(i, i).imag()) + "i");
      }
    }
    y.col(k) = shifted.triangularView<Eigen::Upper>().solve(rhs);
  }
  return ua * y * ub.adjoint();
}

Mat solve_lyapunov(const Mat& a, const Mat& q) {
  return solve_sylvester(a, a.adjoint(), q);
}

namespace {

bool pbh_full_rank(const Mat& a, bool stack_below, const Mat& block, double tolerance) {
  Eigen::ComplexEigenSolver<Mat> es(a, /*computeEigenvectors=*/false);
  if (es.info() != Eigen::Success) {
    throw NumericalError("pbh test: eigendecomposition failed");
  }
  const Index n = a.rows();
  for (Index k = 0; k < n; ++k) {
    const Cplx lambda = es.eigenvalues()(k);
    Mat m;
    if (stack_below) {
      m.resize(n + block.rows(), n);
      m.topRows(n) = lambda * Mat::Identity(n, n) - a;
      m.bottomRows(block.rows()) = block;
    } else {
      m.resize(n, n + block.cols());
      m.leftCols(n) = lambda * Mat::Identity(n, n) - a;
      m.rightCols(block.cols()) = block;
    }
    Eigen::JacobiSVD<Mat> svd(m);
    const auto& sv = svd.singularValues();
    if (sv(0) <= 0.0 || sv(sv.size() - 1) < tolerance * sv(0)) return false;
  }
  return true;
}

}  // namespace

bool pbh_controllable(const Mat& a, const Mat& b, double tolerance) {
  if (a.rows() != a.cols() || b.rows() != a.rows()) {
    throw DimensionError("pbh_controllable: incompatible shapes");
  }
  return pbh_full_rank(a, /*stack_below=*/false, b, tolerance);
}

bool pbh_observable(const Mat& c, const Mat& a, double tolerance) {
  if (a.rows() != a.cols() || c.cols() != a.rows()) {
    throw DimensionError("pbh_observable: incompatible shapes");
  }
  return pbh_full_rank(a, /*stack_below=*/true, c, tolerance);
}

}  // namespace qls
