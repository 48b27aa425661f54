#include "qls/identify.hpp"

#include <Eigen/LU>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>

#include "qls/errors.hpp"
#include "qls/solvers.hpp"

namespace qls {

namespace {

double equation_residual(const Mat& a_left, const Mat& x, const Mat& a_right, const Mat& q) {
  const Mat r = a_left * x + x * a_right + q;
  return r.norm() / std::max(1.0, q.norm());
}

double relative_error(const Mat& got, const Mat& want) {
  return (got - want).norm() / std::max(1.0, want.norm());
}

// Smallest/largest singular value ratio; GlobalMinimalityError below the
// gram threshold since a singular gram means a reducible spectrum.
void require_invertible_gram(const Mat& w, const char* what) {
  Eigen::JacobiSVD<Mat> svd(w);
  const auto& sv = svd.singularValues();
  if (sv(0) <= 0.0 || sv(sv.size() - 1) < tol::gram * sv(0)) {
    throw GlobalMinimalityError(std::string(what) +
                                " is singular: the spectrum admits a smaller realization");
  }
}

}  // namespace

Mat solve_t3_gram(const GilbertRealization& g) {
  const Mat a0 = g.stable_a0();
  const Mat c2 = g.c2();
  return solve_sylvester(flat(a0), a0, flat(c2) * c2);
}

Mat solve_t1_gram(const GilbertRealization& g) {
  const Mat a0 = g.stable_a0();
  const Mat b1 = g.b1();
  return solve_sylvester(flat(a0), a0, b1 * flat(b1));
}

Mat IdentificationResult::assembled_similarity() const {
  const Index dim = t3.rows();
  Mat t = Mat::Zero(2 * dim, 2 * dim);
  t.topLeftCorner(dim, dim) = relating_symplectic * t1;
  t.bottomLeftCorner(dim, dim) = t2;
  t.bottomRightCorner(dim, dim) = t3;
  return t;
}

IdentificationResult reconstruct(const GilbertRealization& g, double tolerance) {
  const Mat a0 = g.stable_a0();
  const Mat b1 = g.b1();
  const Mat c2 = g.c2();
  const Index m = g.n_channels;

  const Mat w3 = solve_t3_gram(g);
  const Mat w1_inv = solve_t1_gram(g);
  require_invertible_gram(w3, "the observability-side gram");
  require_invertible_gram(w1_inv, "the controllability-side gram");

  IdentificationResiduals res;
  res.gram_w3 = equation_residual(flat(a0), w3, a0, flat(c2) * c2);
  res.gram_w1 = equation_residual(flat(a0), w1_inv, a0, b1 * flat(b1));

  const Mat w1_raw = w1_inv.partialPivLu().inverse();
  const Mat w1 = 0.5 * (w1_raw + flat(w1_raw));

  const Mat t3 = flat_factorize(w3);
  const Mat t1 = flat_factorize(w1);
  res.factor_t3 = relative_error(flat(t3) * t3, w3);
  res.factor_t1 = relative_error(flat(t1) * t1, w1);

  const Mat t3_inv = t3.partialPivLu().inverse();
  const Mat t1_inv = t1.partialPivLu().inverse();

  const Mat a_primary = (t3 * a0) * t3_inv;
  const Mat c_primary = c2 * t3_inv;

  const Mat a_alt = flat((t1 * flat(a0)) * t1_inv);
  const Mat c_alt = flat(Mat(-t1 * b1));

  res.structure = std::max({doubled_up_deviation(a_primary), doubled_up_deviation(c_primary),
                            doubled_up_deviation(a_alt), doubled_up_deviation(c_alt)});

  const StateSpace primary = make_state_space(a_primary, c_primary, tolerance);
  const StateSpace alt = make_state_space(a_alt, c_alt, tolerance);

  res.realizability = std::max(check_realizability(primary), check_realizability(alt));
  if (res.realizability > 1e-6) {
    throw ConsistencyError("reconstruction is not physically realizable: the input does not "
                           "describe a power spectrum");
  }

  const std::optional<Mat> s = find_symplectic_between(alt, primary);
  if (!s) {
    throw ConsistencyError("the two reconstructions realize different spectra");
  }
  res.symplectic_link =
      std::max(doubled_up_deviation(*s), (flat(*s) * (*s) - Mat::Identity(s->rows(), s->cols()))
                                                 .norm() /
                                             std::max(1.0, s->squaredNorm()));

  // Off-diagonal block of the similarity onto the cascade: with X solving
  // A_alt X + X A_alt-flat + C_alt-flat V C_alt = 0, t2 = S X t1 closes the
  // lower-left equation.
  const Mat v = vacuum_covariance(m);
  const Mat x = solve_sylvester(alt.a_full(), flat(alt.a_full()),
                                flat(alt.c_full()) * v * alt.c_full());
  const Mat t2 = (*s) * x * t1;

  IdentificationResult out{primary, alt, t1, t2, t3, *s, res};

  // The identified spectrum must reproduce the source transfer samples.
  const double scale = spectral_scale(primary);
  double spectrum_dev = 0.0;
  for (double w : probe_frequencies(scale, 20)) {
    const Cplx sp(0.0, -w);
    const Mat lhs = spectrum_at(primary, v, sp).psi * j_matrix(m);
    const Mat rhs = g.realization().transfer_at(sp);
    spectrum_dev = std::max(spectrum_dev, (lhs - rhs).norm() / std::max(1.0, rhs.norm()));
  }
  out.residuals.spectrum_match = spectrum_dev;
  if (spectrum_dev > 1e-6) {
    throw ConsistencyError("identified spectrum does not reproduce the input samples");
  }

  const StateSpaceRealization casc = build_cascade(primary);
  const Mat t_full = out.assembled_similarity();
  const Mat t_full_inv = t_full.partialPivLu().inverse();
  const double match_a = relative_error((t_full * g.a0_diag) * t_full_inv, casc.a);
  const double match_b = relative_error(t_full * g.b0, casc.b);
  const double match_c = relative_error(g.c0 * t_full_inv, casc.c);
  out.residuals.cascade_match = std::max({match_a, match_b, match_c});
  if (out.residuals.cascade_match > 1e-6) {
    throw NumericalError("assembled similarity does not map onto the cascade");
  }
  return out;
}

IdentificationResult identify(const StateSpaceRealization& src, double tolerance) {
  return reconstruct(gilbert_realization(src), tolerance);
}

ModelIdentification identify_from_model(const StateSpace& ss, const GaussianInput& input,
                                        double tolerance) {
  const StateSpace reduced = reduce_to_vacuum_input(ss, input);
  if (!is_hurwitz(reduced)) {
    throw StabilityError("the reduced system is not Hurwitz");
  }
  const GlobalMinimalityReport report = is_globally_minimal(reduced);
  if (!report.verdict()) {
    throw GlobalMinimalityError("the spectrum does not determine this model");
  }
  const StateSpaceRealization casc = build_cascade(reduced);
  return {reduced, identify(casc, tolerance)};
}

}  // namespace qls
