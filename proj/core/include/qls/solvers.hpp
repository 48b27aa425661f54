#pragma once

#include "qls/dup.hpp"

namespace qls {

/// Solves A X + X B + Q = 0 by complex Schur reduction of A and B and
/// columnwise back-substitution. Unique solution requires
/// spec(A) and spec(-B) disjoint; throws DegeneracyError otherwise.
Mat solve_sylvester(const Mat& a, const Mat& b, const Mat& q);

/// Solves A P + P A^dagger + Q = 0. For Hermitian Q the result is
/// Hermitian up to roundoff (not symmetrized here).
Mat solve_lyapunov(const Mat& a, const Mat& q);

/// PBH test: (a, b) is controllable iff [lambda I - a, b] has full row rank
/// at every eigenvalue lambda of a. Rank decided by
/// sigma_min >= tolerance * sigma_max.
bool pbh_controllable(const Mat& a, const Mat& b, double tolerance = tol::rank);

/// PBH test: (c, a) is observable iff [lambda I - a; c] has full column rank
/// at every eigenvalue lambda of a.
bool pbh_observable(const Mat& c, const Mat& a, double tolerance = tol::rank);

}  // namespace qls
