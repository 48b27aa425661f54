#pragma once

#include <vector>

#include "qls/analysis.hpp"
#include "qls/model.hpp"

namespace qls {

/// Plain state-space quadruple (A, B, C, D) with transfer D + C (s - A)^{-1} B.
struct StateSpaceRealization {
  Mat a;
  Mat b;
  Mat c;
  Mat d;

  Index order() const { return a.rows(); }
  Mat transfer_at(Cplx s) const;
};

/// Realization of Psi(s) J with a lower-block-triangular state matrix: an
/// anti-stable copy -A-flat feeding the stable copy A through the coupling.
/// Its transfer function equals spectrum(s) * J.
StateSpaceRealization build_cascade(const StateSpace& ss);

/// True iff a splits into an anti-stable leading diagonal block and a stable
/// trailing one of equal size with a vanishing upper-right block.
bool is_proper_lbt(const Mat& a, double tolerance = tol::structure);

/// Relative norm of the upper-right block of t; vanishes for any similarity
/// between two proper lower-block-triangular matrices.
double lbt_upper_right_defect(const Mat& t);

/// Verifies a2 = t a1 t^{-1} within tolerance (violation throws
/// ConsistencyError), then reports whether t itself is lower block
/// triangular: upper-right block norm <= tolerance * |t|.
bool check_lbt_similarity(const Mat& a1, const Mat& a2, const Mat& t,
                          double tolerance = tol::rank);

/// Minimality of the cascade (PBH on its realization) side by side with
/// global minimality of the source system. The verdicts must agree;
/// disagreement throws ConsistencyError.
struct CascadeMinimalityReport {
  bool cascade_minimal;
  bool globally_minimal;
};

CascadeMinimalityReport cascade_minimality_check(const StateSpace& ss,
                                                 double tolerance = tol::rank);

/// Controllability and observability of a plain realization, PBH style.
bool realization_is_minimal(const StateSpaceRealization& r, double tolerance = tol::rank);

/// Diagonal realization obtained from simple poles and rank-one residues.
/// Poles are ordered -conj(l_1..l_n), -l_1..l_n | l_1..l_n, conj(l_1..l_n)
/// with Re(l_i) < 0, so a0_diag = diag(-A0-flat, A0) for the stable diagonal
/// A0 returned by stable_a0(). b0 and c0 carry the rank-one residue factors;
/// the per-pole scalar gauge is fixed so that the anti-stable row block b1()
/// and the stable column block c2() are doubled-up.
struct GilbertRealization {
  Mat a0_diag;
  Mat b0;
  Mat c0;
  Mat d;
  std::vector<Cplx> poles;
  std::vector<Mat> residues;
  Index n_modes;
  Index n_channels;

  Mat stable_a0() const { return a0_diag.bottomRightCorner(2 * n_modes, 2 * n_modes); }
  Mat b1() const { return b0.topRows(2 * n_modes); }
  Mat b2() const { return b0.bottomRows(2 * n_modes); }
  Mat c1() const { return c0.leftCols(2 * n_modes); }
  Mat c2() const { return c0.rightCols(2 * n_modes); }
  StateSpaceRealization realization() const { return {a0_diag, b0, c0, d}; }
};

/// Pole-residue decomposition of a minimal realization of Psi(s) J.
/// Requires simple poles off the real axis and rank-one residues that all
/// carry weight; violations throw GenericityError, RankError, or
/// GlobalMinimalityError (weightless poles mean the spectrum admits a
/// smaller realization). The source order must be divisible by four.
GilbertRealization gilbert_realization(const StateSpaceRealization& src,
                                       double tolerance = tol::rank_one);

}  // namespace qls
