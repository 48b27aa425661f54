#include "qls/random.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include <cmath>
#include <string>

#include "qls/analysis.hpp"
#include "qls/errors.hpp"

namespace qls {

Mat random_complex_matrix(std::mt19937_64& rng, Index rows, Index cols, double scale) {
  std::normal_distribution<double> gauss(0.0, std::sqrt(0.5));
  Mat out(rows, cols);
  for (Index i = 0; i < rows; ++i)
    for (Index j = 0; j < cols; ++j) out(i, j) = scale * Cplx(gauss(rng), gauss(rng));
  return out;
}

Mat random_doubled_up(std::mt19937_64& rng, Index rows, Index cols, double scale) {
  const Mat minus = random_complex_matrix(rng, rows, cols, scale);
  const Mat plus = random_complex_matrix(rng, rows, cols, scale);
  return DoubledUp(minus, plus).full();
}

Mat random_symplectic(std::mt19937_64& rng, Index n, double scale) {
  Mat h = random_complex_matrix(rng, n, n, scale);
  h = 0.5 * (h + h.adjoint()).eval();
  Mat p = random_complex_matrix(rng, n, n, scale);
  p = 0.5 * (p + p.transpose()).eval();
  const Mat generator = DoubledUp(Cplx(0.0, 1.0) * h, p).full();
  return generator.exp();
}

GaussianInput random_pure_input(std::mt19937_64& rng, Index channels, double scale) {
  const Mat s = random_symplectic(rng, channels, scale);
  const Mat s_minus = s.topLeftCorner(channels, channels);
  const Mat s_plus = s.topRightCorner(channels, channels);
  Mat n_mat = s_plus.conjugate() * s_plus.transpose();
  n_mat = 0.5 * (n_mat + n_mat.adjoint()).eval();
  Mat m_mat = s_minus * s_plus.transpose();
  m_mat = 0.5 * (m_mat + m_mat.transpose()).eval();
  return GaussianInput(std::move(n_mat), std::move(m_mat));
}

QlsParams random_params(std::mt19937_64& rng, Index modes, Index channels) {
  Mat omega_minus = random_complex_matrix(rng, modes, modes, 1.0);
  omega_minus = 0.5 * (omega_minus + omega_minus.adjoint()).eval();
  Mat omega_plus = random_complex_matrix(rng, modes, modes, 0.3);
  omega_plus = 0.5 * (omega_plus + omega_plus.transpose()).eval();
  const Mat c_minus = random_complex_matrix(rng, channels, modes, 1.0);
  const Mat c_plus = random_complex_matrix(rng, channels, modes, 0.35);
  return QlsParams(omega_minus, omega_plus, c_minus, c_plus);
}

RandomSystem random_realizable_system(std::mt19937_64& rng, const RandomSystemOptions& options) {
  for (int attempt = 0; attempt < options.max_attempts; ++attempt) {
    QlsParams params = random_params(rng, options.modes, options.channels);
    StateSpace ss = build_state_space(params);
    const Vec eigs = ss.a_full().eigenvalues();

    bool ok = true;
    for (Index i = 0; i < eigs.size() && ok; ++i) {
      if (eigs(i).real() > -options.hurwitz_margin) ok = false;
      if (std::abs(eigs(i).imag()) < options.imag_margin) ok = false;
      for (Index j = i + 1; j < eigs.size() && ok; ++j)
        if (std::abs(eigs(i) - eigs(j)) < options.separation_margin) ok = false;
    }
    if (!ok) continue;

    if (options.require_globally_minimal) {
      const GlobalMinimalityReport report = is_globally_minimal(ss);
      if (!report.verdict() || report.min_eig_p < options.mixing_margin) continue;
    }
    return RandomSystem{std::move(params), std::move(ss)};
  }
  throw NumericalError("no admissible random system found in " +
                       std::to_string(options.max_attempts) + " attempts");
}

QlsParams pad_with_passive_mode(const QlsParams& params, double detuning, double coupling) {
  const Index n = params.modes();
  const Index m = params.channels();
  Mat omega_minus = Mat::Zero(n + 1, n + 1);
  omega_minus.topLeftCorner(n, n) = params.omega_minus();
  omega_minus(n, n) = detuning;
  Mat omega_plus = Mat::Zero(n + 1, n + 1);
  omega_plus.topLeftCorner(n, n) = params.omega_plus();
  Mat c_minus = Mat::Zero(m + 1, n + 1);
  c_minus.topLeftCorner(m, n) = params.c_minus();
  c_minus(m, n) = coupling;
  Mat c_plus = Mat::Zero(m + 1, n + 1);
  c_plus.topLeftCorner(m, n) = params.c_plus();
  return QlsParams(std::move(omega_minus), std::move(omega_plus), std::move(c_minus),
                   std::move(c_plus));
}

}  // namespace qls
