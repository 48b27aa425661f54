#include "qls/cascade.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/LU>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <limits>

#include "qls/errors.hpp"
#include "qls/solvers.hpp"

namespace qls {

Mat StateSpaceRealization::transfer_at(Cplx s) const {
  Mat shifted = -a;
  shifted.diagonal().array() += s;
  return d + c * shifted.partialPivLu().solve(b);
}

StateSpaceRealization build_cascade(const StateSpace& ss) {
  const Mat a = ss.a.full();
  const Mat c = ss.c.full();
  const Mat cf = flat(c);
  const Mat v = vacuum_covariance(ss.channels());
  const Index dim = a.rows();
  const Index ch = c.rows();

  StateSpaceRealization r;
  r.a = Mat::Zero(2 * dim, 2 * dim);
  r.a.topLeftCorner(dim, dim) = -flat(a);
  r.a.bottomLeftCorner(dim, dim) = cf * v * c;
  r.a.bottomRightCorner(dim, dim) = a;

  r.b = Mat::Zero(2 * dim, ch);
  r.b.topRows(dim) = -cf;
  r.b.bottomRows(dim) = -cf * v;

  r.c = Mat::Zero(ch, 2 * dim);
  r.c.leftCols(dim) = -v * c;
  r.c.rightCols(dim) = c;

  r.d = v;
  return r;
}

bool is_proper_lbt(const Mat& a, double tolerance) {
  if (a.rows() != a.cols() || a.rows() % 2 != 0 || a.rows() == 0) return false;
  const Index h = a.rows() / 2;
  const double off = a.topRightCorner(h, h).norm() / std::max(1.0, a.norm());
  if (off > tolerance) return false;

  Eigen::ComplexEigenSolver<Mat> top(a.topLeftCorner(h, h), false);
  Eigen::ComplexEigenSolver<Mat> bottom(a.bottomRightCorner(h, h), false);
  if (top.info() != Eigen::Success || bottom.info() != Eigen::Success) {
    throw NumericalError("block eigenvalue computation failed");
  }
  for (Index i = 0; i < h; ++i) {
    if (top.eigenvalues()(i).real() <= tolerance) return false;
    if (bottom.eigenvalues()(i).real() >= -tolerance) return false;
  }
  return true;
}

double lbt_upper_right_defect(const Mat& t) {
  const Index h = t.rows() / 2;
  return t.topRightCorner(h, t.cols() - h).norm() / std::max(1.0, t.norm());
}

bool check_lbt_similarity(const Mat& a1, const Mat& a2, const Mat& t, double tolerance) {
  const Mat lhs = t * a1;
  const Mat rhs = a2 * t;
  const double dev = (lhs - rhs).norm() / std::max(1.0, rhs.norm());
  if (dev > std::max(tolerance, 1e-9)) {
    throw ConsistencyError("check_lbt_similarity: t does not conjugate a1 into a2");
  }
  const Index h = t.rows() / 2;
  return t.topRightCorner(h, t.cols() - h).norm() <= tolerance * t.norm();
}

CascadeMinimalityReport cascade_minimality_check(const StateSpace& ss, double tolerance) {
  const StateSpaceRealization casc = build_cascade(ss);
  CascadeMinimalityReport report;
  report.cascade_minimal = realization_is_minimal(casc, tolerance);
  report.globally_minimal = is_globally_minimal(ss, tolerance).verdict();
  if (report.cascade_minimal != report.globally_minimal) {
    throw ConsistencyError("cascade minimality and global minimality disagree");
  }
  return report;
}

bool realization_is_minimal(const StateSpaceRealization& r, double tolerance) {
  return pbh_controllable(r.a, r.b, tolerance) && pbh_observable(r.c, r.a, tolerance);
}

namespace {

struct PoleData {
  Cplx pole;
  Mat residue;
  double weight;
};

// Index of the entry of poles closest to target; the match must be within
// tolerance, otherwise StructureError.
std::size_t match_pole(const std::vector<PoleData>& poles, Cplx target, double tolerance) {
  std::size_t best = 0;
  double best_dist = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < poles.size(); ++k) {
    const double dist = std::abs(poles[k].pole - target);
    if (dist < best_dist) {
      best_dist = dist;
      best = k;
    }
  }
  if (best_dist > tolerance) {
    throw StructureError("pole set is not closed under the expected symmetry");
  }
  return best;
}

// Entrywise ratio actual/target, reduced by the median of real and imaginary
// parts separately; robust against near-zero entries.
Cplx median_ratio(const Vec& actual, const Vec& target) {
  std::vector<double> re;
  std::vector<double> im;
  const double floor = 1e-10 * std::max(1e-300, target.cwiseAbs().maxCoeff());
  for (Index j = 0; j < target.size(); ++j) {
    if (std::abs(target(j)) > floor) {
      const Cplx r = actual(j) / target(j);
      re.push_back(r.real());
      im.push_back(r.imag());
    }
  }
  if (re.empty()) {
    throw StructureError("no constant links the conjugate pole pair: factors vanish");
  }
  auto median = [](std::vector<double>& xs) {
    std::nth_element(xs.begin(), xs.begin() + xs.size() / 2, xs.end());
    return xs[xs.size() / 2];
  };
  return {median(re), median(im)};
}

}  // namespace

GilbertRealization gilbert_realization(const StateSpaceRealization& src, double tolerance) {
  const Index dim = src.order();
  if (dim % 4 != 0) {
    throw StructureError("realization order is not divisible by four");
  }
  const Index n = dim / 4;
  const Index ch2 = src.c.rows();
  if (ch2 % 2 != 0 || src.b.cols() != ch2 || src.d.rows() != ch2 || src.d.cols() != ch2) {
    throw DimensionError("realization input/output dimensions are inconsistent");
  }
  const Index m = ch2 / 2;

  Eigen::ComplexEigenSolver<Mat> es(src.a, /*computeEigenvectors=*/true);
  if (es.info() != Eigen::Success) {
    throw NumericalError("eigendecomposition of the state matrix failed");
  }
  const Vec lambdas = es.eigenvalues();
  const Mat p = es.eigenvectors();
  const Eigen::PartialPivLU<Mat> p_lu(p);
  if (std::abs(p_lu.determinant()) < 1e-14) {
    throw GenericityError("state matrix is not diagonalizable");
  }
  const Mat p_inv = p_lu.inverse();

  double scale = 0.0;
  for (Index i = 0; i < dim; ++i) scale = std::max(scale, std::abs(lambdas(i)));
  scale = std::max(scale, 1.0);
  const double sep = tol::pairing * scale;

  std::vector<PoleData> poles(static_cast<std::size_t>(dim));
  double max_weight = 0.0;
  for (Index i = 0; i < dim; ++i) {
    auto& pd = poles[static_cast<std::size_t>(i)];
    pd.pole = lambdas(i);
    pd.residue = (src.c * p.col(i)) * (p_inv.row(i) * src.b);
    pd.weight = pd.residue.norm();
    max_weight = std::max(max_weight, pd.weight);
  }

  const double weight_floor = 1e-8 * std::max(1.0, max_weight);
  std::size_t weightless = 0;
  for (const auto& pd : poles) {
    if (pd.weight <= weight_floor) ++weightless;
  }
  if (weightless == poles.size()) {
    throw GlobalMinimalityError("the spectrum is flat: every pole has negligible weight");
  }
  if (weightless > 0) {
    throw GlobalMinimalityError("some poles carry negligible weight: the spectrum admits a "
                                "smaller realization");
  }

  // Genericity: simple poles, strictly off both the imaginary and real axes.
  for (std::size_t i = 0; i < poles.size(); ++i) {
    if (std::abs(poles[i].pole.real()) < sep) {
      throw GenericityError("pole too close to the imaginary axis");
    }
    for (std::size_t k = i + 1; k < poles.size(); ++k) {
      if (std::abs(poles[i].pole - poles[k].pole) < sep) {
        throw GenericityError("repeated pole");
      }
    }
  }

  // Representatives: stable poles with positive imaginary part, ordered by
  // descending imaginary part then real part for determinism.
  std::vector<Cplx> reps;
  Index n_stable = 0;
  for (const auto& pd : poles) {
    if (pd.pole.real() < 0.0) {
      ++n_stable;
      if (std::abs(pd.pole.imag()) < sep) {
        throw GenericityError("real pole");
      }
      if (pd.pole.imag() > 0.0) reps.push_back(pd.pole);
    }
  }
  if (n_stable != 2 * n || static_cast<Index>(reps.size()) != n) {
    throw GenericityError("stable poles do not form conjugate pairs");
  }
  std::sort(reps.begin(), reps.end(), [](Cplx x, Cplx y) {
    if (x.imag() != y.imag()) return x.imag() > y.imag();
    return x.real() > y.real();
  });

  GilbertRealization g;
  g.n_modes = n;
  g.n_channels = m;
  g.d = src.d;
  g.a0_diag = Mat::Zero(dim, dim);
  g.b0 = Mat::Zero(dim, ch2);
  g.c0 = Mat::Zero(ch2, dim);
  g.poles.resize(static_cast<std::size_t>(dim));
  g.residues.resize(static_cast<std::size_t>(dim));

  auto place = [&](Index slot, Cplx target) {
    const std::size_t k = match_pole(poles, target, sep);
    const PoleData& pd = poles[k];
    g.a0_diag(slot, slot) = pd.pole;
    g.poles[static_cast<std::size_t>(slot)] = pd.pole;
    g.residues[static_cast<std::size_t>(slot)] = pd.residue;

    Eigen::JacobiSVD<Mat> svd(pd.residue, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const auto& sv = svd.singularValues();
    if (sv.size() > 1 && sv(1) > tolerance * sv(0)) {
      throw RankError("pole residue has rank greater than one");
    }
    const double root = std::sqrt(sv(0));
    g.c0.col(slot) = root * svd.matrixU().col(0);
    g.b0.row(slot) = root * svd.matrixV().col(0).adjoint();
  };

  for (Index i = 0; i < n; ++i) {
    place(i, -std::conj(reps[static_cast<std::size_t>(i)]));
    place(n + i, -reps[static_cast<std::size_t>(i)]);
    place(2 * n + i, reps[static_cast<std::size_t>(i)]);
    place(3 * n + i, std::conj(reps[static_cast<std::size_t>(i)]));
  }

  // The rank-one factors are determined only up to a scalar per pole. Fix
  // the gauge so the paired rows of the anti-stable b block and the paired
  // columns of the stable c block are conjugate-swap images of each other,
  // compensating on the same pole's other factor to keep residues intact.
  const Mat sig = swap_matrix(m);
  for (Index i = 0; i < n; ++i) {
    // b1 rows: slot i holds -conj(l_i), slot n+i holds -l_i.
    const Vec target_row = (g.b0.row(i).conjugate() * sig).transpose();
    const Cplx cb = median_ratio(g.b0.row(n + i).transpose(), target_row);
    if (!std::isfinite(std::abs(cb)) || std::abs(cb) < 1e-8 || std::abs(cb) > 1e8) {
      throw StructureError("no constant links the conjugate rows of the b factor");
    }
    g.b0.row(n + i) /= cb;
    g.c0.col(n + i) *= cb;

    // c2 columns: slot 2n+i holds l_i, slot 3n+i holds conj(l_i).
    const Vec target_col = sig * g.c0.col(2 * n + i).conjugate();
    const Cplx cc = median_ratio(g.c0.col(3 * n + i), target_col);
    if (!std::isfinite(std::abs(cc)) || std::abs(cc) < 1e-8 || std::abs(cc) > 1e8) {
      throw StructureError("no constant links the conjugate columns of the c factor");
    }
    g.c0.col(3 * n + i) /= cc;
    g.b0.row(3 * n + i) *= cc;
  }

  // The gauge fix must have restored the pairing.
  double dev = 0.0;
  for (Index i = 0; i < n; ++i) {
    const double sb = std::max(1.0, g.b0.row(i).norm());
    const double sc = std::max(1.0, g.c0.col(2 * n + i).norm());
    dev = std::max(dev, (g.b0.row(n + i) - g.b0.row(i).conjugate() * sig).norm() / sb);
    dev = std::max(
        dev, (g.c0.col(3 * n + i) - sig * g.c0.col(2 * n + i).conjugate()).norm() / sc);
  }
  if (dev > tol::rescale) {
    throw StructureError("conjugate-pole pairing deviates after rescaling");
  }

  return g;
}

}  // namespace qls
