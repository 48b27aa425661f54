#pragma once

#include <random>

#include "qls/model.hpp"

namespace qls {

/// Matrix with iid standard complex normal entries.
Mat random_complex_matrix(std::mt19937_64& rng, Index rows, Index cols, double scale = 1.0);

/// Random 2r x 2c doubled-up matrix assembled from two normal blocks.
Mat random_doubled_up(std::mt19937_64& rng, Index rows, Index cols, double scale = 1.0);

/// Random 2n x 2n symplectic matrix exp(Delta(iH, P)) with H Hermitian and
/// P symmetric; scale controls the generator size (and hence squeezing).
Mat random_symplectic(std::mt19937_64& rng, Index n, double scale = 0.5);

/// Random pure Gaussian input: V = S V_vac S-dagger for a random symplectic
/// S, with N and M read off the covariance blocks. Pure by construction.
GaussianInput random_pure_input(std::mt19937_64& rng, Index channels, double scale = 0.4);

/// Unconstrained random parameter draw (Hermitian Omega_-, symmetric
/// Omega_+, dense couplings with a smaller active part). The resulting
/// system need not be Hurwitz; see random_realizable_system for that.
QlsParams random_params(std::mt19937_64& rng, Index modes, Index channels);

struct RandomSystemOptions {
  Index modes = 1;
  Index channels = 1;
  /// Required margins on the state matrix spectrum: distance into the left
  /// half plane, distance from the real axis, and pairwise separation.
  double hurwitz_margin = 0.05;
  double imag_margin = 0.05;
  double separation_margin = 0.05;
  /// When set, reject draws whose stationary covariance is not fully mixed
  /// by at least mixing_margin.
  bool require_globally_minimal = true;
  double mixing_margin = 0.01;
  int max_attempts = 1000;
};

struct RandomSystem {
  QlsParams params;
  StateSpace ss;
};

/// Rejection-samples random_params until the spectrum margins (and, when
/// requested, global minimality) hold. Throws NumericalError when
/// max_attempts draws all fail.
RandomSystem random_realizable_system(std::mt19937_64& rng, const RandomSystemOptions& options);

/// Direct sum with one detuned passive mode coupled to one new channel.
/// Under vacuum input the added mode contributes nothing to the output
/// spectrum, so the padded system is never globally minimal.
QlsParams pad_with_passive_mode(const QlsParams& params, double detuning = 0.7,
                                double coupling = 1.0);

}  // namespace qls
