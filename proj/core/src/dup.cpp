#include "qls/dup.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

namespace qls {

namespace {

void require_even_square(const Mat& z, const char* what) {
  if (z.rows() != z.cols() || z.rows() % 2 != 0) {
    throw DimensionError(std::string(what) + ": expected even square matrix, got " +
                         std::to_string(z.rows()) + "x" + std::to_string(z.cols()));
  }
}

}  // namespace

Mat j_matrix(Index n) {
  Mat j = Mat::Identity(2 * n, 2 * n);
  j.bottomRightCorner(n, n) *= -1.0;
  return j;
}

Mat swap_matrix(Index n) {
  Mat s = Mat::Zero(2 * n, 2 * n);
  s.topRightCorner(n, n).setIdentity();
  s.bottomLeftCorner(n, n).setIdentity();
  return s;
}

Mat vacuum_covariance(Index m) {
  Mat v = Mat::Zero(2 * m, 2 * m);
  v.topLeftCorner(m, m).setIdentity();
  return v;
}

Mat flat(const Mat& z) {
  if (z.rows() % 2 != 0 || z.cols() % 2 != 0) {
    throw DimensionError("flat: dimensions must be even, got " +
                         std::to_string(z.rows()) + "x" + std::to_string(z.cols()));
  }
  const Index n = z.rows() / 2;
  const Index m = z.cols() / 2;
  // J Z^dagger J only flips signs of the off-diagonal blocks; entrywise exact.
  Mat r = z.adjoint();
  r.topRightCorner(m, n) *= -1.0;
  r.bottomLeftCorner(m, n) *= -1.0;
  return r;
}

double doubled_up_deviation(const Mat& z) {
  const Index n = z.rows() / 2;
  const Index m = z.cols() / 2;
  const double d1 = (z.bottomRightCorner(n, m) - z.topLeftCorner(n, m).conjugate())
                        .cwiseAbs()
                        .maxCoeff();
  const double d2 = (z.bottomLeftCorner(n, m) - z.topRightCorner(n, m).conjugate())
                        .cwiseAbs()
                        .maxCoeff();
  const double scale = 1.0 + z.cwiseAbs().maxCoeff();
  return std::max(d1, d2) / scale;
}

bool is_doubled_up(const Mat& z, double tolerance) {
  if (z.rows() % 2 != 0 || z.cols() % 2 != 0 || z.size() == 0) return false;
  return doubled_up_deviation(z) <= tolerance;
}

bool is_flat_unitary(const Mat& s, double tolerance) {
  if (s.rows() != s.cols() || s.rows() % 2 != 0 || s.size() == 0) return false;
  const Mat sf = flat(s);
  const Mat id = Mat::Identity(s.rows(), s.cols());
  const double scale = std::max(1.0, s.squaredNorm());
  const double r1 = (sf * s - id).norm();
  const double r2 = (s * sf - id).norm();
  return std::max(r1, r2) <= tolerance * scale;
}

bool is_symplectic(const Mat& s, double tolerance) {
  return is_doubled_up(s, tolerance) && is_flat_unitary(s, tolerance);
}

DoubledUp::DoubledUp(Mat minus_block, Mat plus_block)
    : minus_(std::move(minus_block)), plus_(std::move(plus_block)) {
  if (minus_.rows() != plus_.rows() || minus_.cols() != plus_.cols()) {
    throw DimensionError("DoubledUp: blocks must share a shape");
  }
}

DoubledUp DoubledUp::split(const Mat& z, double tolerance) {
  if (z.rows() % 2 != 0 || z.cols() % 2 != 0) {
    throw DimensionError("DoubledUp::split: dimensions must be even");
  }
  const double dev = doubled_up_deviation(z);
  if (dev > tolerance) {
    throw StructureError("DoubledUp::split: pairing deviation " + std::to_string(dev) +
                         " exceeds tolerance");
  }
  const Index n = z.rows() / 2;
  const Index m = z.cols() / 2;
  // Average the redundant copies so the stored blocks are the projection of z
  // onto the doubled-up subspace.
  Mat minus = 0.5 * (z.topLeftCorner(n, m) + z.bottomRightCorner(n, m).conjugate());
  Mat plus = 0.5 * (z.topRightCorner(n, m) + z.bottomLeftCorner(n, m).conjugate());
  return DoubledUp(std::move(minus), std::move(plus));
}

Mat DoubledUp::full() const {
  const Index n = minus_.rows();
  const Index m = minus_.cols();
  Mat z(2 * n, 2 * m);
  z.topLeftCorner(n, m) = minus_;
  z.topRightCorner(n, m) = plus_;
  z.bottomLeftCorner(n, m) = plus_.conjugate();
  z.bottomRightCorner(n, m) = minus_.conjugate();
  return z;
}

Mat psd_sqrt(const Mat& h, double tolerance) {
  Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (h + h.adjoint()));
  if (es.info() != Eigen::Success) {
    throw NumericalError("psd_sqrt: eigendecomposition failed");
  }
  Eigen::VectorXd d = es.eigenvalues();
  const double scale = std::max(1.0, d.cwiseAbs().maxCoeff());
  for (Index i = 0; i < d.size(); ++i) {
    if (d(i) < -tolerance * scale) {
      throw NumericalError("psd_sqrt: matrix is not positive semidefinite");
    }
    d(i) = std::sqrt(std::max(d(i), 0.0));
  }
  return es.eigenvectors() * d.asDiagonal() * es.eigenvectors().adjoint();
}

Mat flat_factorize(const Mat& w, double tolerance) {
  require_even_square(w, "flat_factorize");
  const Index p = w.rows() / 2;
  const double wscale = std::max(1.0, w.cwiseAbs().maxCoeff());

  const double herm_dev = (flat(w) - w).cwiseAbs().maxCoeff() / wscale;
  if (herm_dev > tolerance) {
    throw StructureError("flat_factorize: target is not flat-Hermitian, deviation " +
                         std::to_string(herm_dev));
  }

  Mat h = j_matrix(p) * w;
  h = 0.5 * (h + h.adjoint()).eval();
  Eigen::SelfAdjointEigenSolver<Mat> es(h);
  if (es.info() != Eigen::Success) {
    throw NumericalError("flat_factorize: eigendecomposition failed");
  }
  const Eigen::VectorXd d = es.eigenvalues();
  const double dmax = d.cwiseAbs().maxCoeff();
  const double zero_thr = tolerance * std::max(1.0, dmax);

  std::vector<Index> pos;
  Index neg = 0;
  for (Index i = 0; i < d.size(); ++i) {
    if (d(i) > zero_thr) {
      pos.push_back(i);
    } else if (d(i) < -zero_thr) {
      ++neg;
    }
  }
  if (static_cast<Index>(pos.size()) != p || neg != p) {
    throw InfeasibleError("flat_factorize: inertia of J*W is (" + std::to_string(pos.size()) +
                          ", " + std::to_string(neg) + "), need (" + std::to_string(p) + ", " +
                          std::to_string(p) + ")");
  }
  std::sort(pos.begin(), pos.end(), [&](Index a, Index b) { return d(a) > d(b); });

  // Negative eigenspace basis is the conjugate-swap image of the positive one;
  // under degeneracy this is the maximal-overlap pairing automatically.
  const Mat sigma = swap_matrix(p);
  Mat x(2 * p, 2 * p);
  for (Index k = 0; k < p; ++k) {
    const Vec u = es.eigenvectors().col(pos[static_cast<std::size_t>(k)]);
    const double root = std::sqrt(d(pos[static_cast<std::size_t>(k)]));
    x.col(k) = root * u;
    x.col(p + k) = root * (sigma * u.conjugate());
  }
  Mat t = x.adjoint();  // column pairing of x makes t exactly doubled-up

  const double resid = (flat(t) * t - w).norm() / std::max(1.0, w.norm());
  if (resid > std::max(tolerance, 1e3 * tol::validation)) {
    throw NumericalError("flat_factorize: residual " + std::to_string(resid) +
                         " after factorization; target is likely not doubled-up");
  }
  return t;
}

}  // namespace qls
