#include "qls/analysis.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/LU>
#include <Eigen/QR>
#include <Eigen/SVD>
#include <unsupported/Eigen/KroneckerProduct>

#include <algorithm>
#include <cmath>

#include "qls/errors.hpp"
#include "qls/solvers.hpp"

namespace qls {

namespace {

Vec eigenvalues_of(const Mat& a) {
  Eigen::ComplexEigenSolver<Mat> es(a, /*computeEigenvectors=*/false);
  if (es.info() != Eigen::Success) {
    throw NumericalError("eigenvalue computation failed");
  }
  return es.eigenvalues();
}

}  // namespace

double spectral_scale(const StateSpace& ss) {
  const Vec ev = eigenvalues_of(ss.a.full());
  double radius = 0.0;
  for (Index i = 0; i < ev.size(); ++i) radius = std::max(radius, std::abs(ev(i)));
  return std::max(1.0, radius);
}

Vec state_spectrum(const StateSpace& ss) { return eigenvalues_of(ss.a.full()); }

TransferSample transfer_at(const StateSpace& ss, Cplx s) {
  const Mat a = ss.a.full();
  const Mat c = ss.c.full();

  const Vec ev = eigenvalues_of(a);
  double scale = 1.0;
  for (Index i = 0; i < ev.size(); ++i) scale = std::max(scale, std::abs(ev(i)));
  for (Index i = 0; i < ev.size(); ++i) {
    if (std::abs(s - ev(i)) < 1e-12 * scale) {
      throw SingularityError("transfer function evaluated at a pole");
    }
  }

  Mat resolvent_arg = -a;
  resolvent_arg.diagonal().array() += s;
  const Mat solved = resolvent_arg.partialPivLu().solve(flat(c));
  TransferSample out;
  out.s = s;
  out.xi = Mat::Identity(c.rows(), c.rows()) - c * solved;
  return out;
}

SpectrumSample spectrum_at(const StateSpace& ss, const Mat& v, Cplx s) {
  if (v.rows() != 2 * ss.channels() || v.cols() != 2 * ss.channels()) {
    throw DimensionError("input covariance does not match the channel count");
  }
  const TransferSample at_s = transfer_at(ss, s);
  const TransferSample at_mirror = transfer_at(ss, -std::conj(s));
  SpectrumSample out;
  out.s = s;
  out.psi = at_s.xi * v * at_mirror.xi.adjoint();
  return out;
}

bool is_hurwitz(const StateSpace& ss, double margin) {
  const Vec ev = eigenvalues_of(ss.a.full());
  for (Index i = 0; i < ev.size(); ++i) {
    if (ev(i).real() >= -margin) return false;
  }
  return true;
}

bool is_minimal(const StateSpace& ss, double tolerance) {
  const Mat a = ss.a.full();
  const Mat c = ss.c.full();
  const bool controllable = pbh_controllable(a, flat(c), tolerance);
  const bool observable = pbh_observable(c, a, tolerance);
  if (controllable != observable) {
    throw ConsistencyError("controllability and observability disagree");
  }
  return controllable;
}

StationaryCovariance stationary_covariance(const StateSpace& ss) {
  if (!is_hurwitz(ss)) {
    throw StabilityError("stationary covariance requires a Hurwitz state matrix");
  }
  const Mat a = ss.a.full();
  const Mat cf = flat(ss.c.full());
  const Mat v = vacuum_covariance(ss.channels());
  const Mat q = cf * v * cf.adjoint();

  Mat p = solve_lyapunov(a, q);
  p = 0.5 * (p + p.adjoint()).eval();

  StationaryCovariance out;
  out.p = p;
  const Mat residual = a * p + p * a.adjoint() + q;
  out.residual = residual.norm() / std::max(1e-12, p.norm());

  Eigen::SelfAdjointEigenSolver<Mat> es(p, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) {
    throw NumericalError("stationary covariance eigenvalue computation failed");
  }
  out.min_eigenvalue = es.eigenvalues().minCoeff();
  return out;
}

GlobalMinimalityReport is_globally_minimal(const StateSpace& ss, double tolerance) {
  const Mat a = ss.a.full();
  const Mat c = ss.c.full();
  const Mat v = vacuum_covariance(ss.channels());

  GlobalMinimalityReport report;

  const StationaryCovariance sc = stationary_covariance(ss);
  const double scale = std::max(1.0, sc.p.norm());
  report.min_eig_p = sc.min_eigenvalue;
  report.by_covariance = sc.min_eigenvalue > tolerance * scale;

  report.by_controllability = pbh_controllable(a, flat(c) * v, tolerance);
  report.by_observability = pbh_observable(v * c, flat(a), tolerance);

  if (report.by_covariance != report.by_controllability ||
      report.by_covariance != report.by_observability) {
    throw ConsistencyError("global-minimality criteria disagree");
  }
  return report;
}

std::vector<double> probe_frequencies(double scale, int count) {
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(count));
  const double lo = std::log10(1e-2 * scale);
  const double hi = std::log10(1e2 * scale);
  for (int i = 0; i < count; ++i) {
    const double t = count > 1 ? static_cast<double>(i) / (count - 1) : 0.5;
    out.push_back(std::pow(10.0, lo + t * (hi - lo)));
  }
  return out;
}

std::optional<Mat> find_symplectic_between(const StateSpace& ss1, const StateSpace& ss2,
                                           double tolerance) {
  if (ss1.modes() != ss2.modes() || ss1.channels() != ss2.channels()) {
    return std::nullopt;
  }
  if (!is_minimal(ss1) || !is_minimal(ss2)) {
    throw StructureError("symplectic matching requires minimal systems");
  }

  const double scale = std::max(spectral_scale(ss1), spectral_scale(ss2));
  const std::vector<double> grid = probe_frequencies(scale);
  for (double w : grid) {
    const Cplx s(0.0, -w);
    const Mat x1 = transfer_at(ss1, s).xi;
    const Mat x2 = transfer_at(ss2, s).xi;
    const double mismatch = (x1 - x2).norm() / std::max(1.0, x1.norm());
    if (mismatch > 1e-6) return std::nullopt;
  }

  // T solves T A1 = A2 T and C1 = C2 T; for minimal systems the solution of
  // the stacked linear system is unique, and equality of transfer functions
  // guarantees it exists.
  const Mat a1 = ss1.a.full();
  const Mat a2 = ss2.a.full();
  const Mat c1 = ss1.c.full();
  const Mat c2 = ss2.c.full();
  const Index dim = a1.rows();
  const Index mm = c1.rows();

  const Mat id_dim = Mat::Identity(dim, dim);
  Mat lhs(dim * dim + mm * dim, dim * dim);
  lhs.setZero();
  // vec(T A1 - A2 T) = (A1^T kron I - I kron A2) vec(T)
  lhs.topRows(dim * dim) = Eigen::kroneckerProduct(a1.transpose(), id_dim).eval() -
                           Eigen::kroneckerProduct(id_dim, a2).eval();
  // vec(C2 T) = (I kron C2) vec(T)
  lhs.bottomRows(mm * dim) = Eigen::kroneckerProduct(id_dim, c2).eval();

  Vec rhs = Vec::Zero(dim * dim + mm * dim);
  rhs.tail(mm * dim) = Eigen::Map<const Vec>(c1.data(), mm * dim);

  const Vec t_vec = lhs.colPivHouseholderQr().solve(rhs);
  const Mat t = Eigen::Map<const Mat>(t_vec.data(), dim, dim);

  const double rel_a = (t * a1 - a2 * t).norm() / std::max(1.0, a2.norm() * t.norm());
  const double rel_c = (c2 * t - c1).norm() / std::max(1.0, c1.norm());
  if (rel_a > tolerance || rel_c > tolerance) {
    throw NumericalError("similarity between equivalent systems did not converge");
  }
  if (!is_symplectic(t, tolerance)) {
    throw NumericalError("recovered similarity is not symplectic");
  }
  return t;
}

}  // namespace qls
