#pragma once

#include "qls/cascade.hpp"
#include "qls/model.hpp"

namespace qls {

/// Gram matrix W3 = T3-flat T3 of the stable similarity block: the unique
/// solution of A0-flat W + W A0 + C2-flat C2 = 0.
Mat solve_t3_gram(const GilbertRealization& g);

/// Inverse gram (T1-flat T1)^{-1} of the anti-stable similarity block: the
/// unique solution of A0-flat X + X A0 + B1 B1-flat = 0.
Mat solve_t1_gram(const GilbertRealization& g);

struct IdentificationResiduals {
  double gram_w3;         ///< equation residual of the W3 solve
  double gram_w1;         ///< equation residual of the inverse-gram solve
  double factor_t3;       ///< relative error of T3-flat T3 against W3
  double factor_t1;       ///< relative error of T1-flat T1 against the gram
  double structure;       ///< doubled-up deviation of (A, C) before averaging
  double realizability;   ///< identity defect of the identified model
  double symplectic_link; ///< structure defect of the relating symplectic
  double spectrum_match;  ///< probe-grid defect against the source transfer
  double cascade_match;   ///< defect of the assembled similarity to the cascade
};

/// Output of the gram-based reconstruction. system and alt_system realize
/// the same spectrum and are related by relating_symplectic:
/// A = S A_alt S-flat, C = C_alt S-flat. The assembled block-triangular
/// similarity [S t1, 0; t2, t3] maps the diagonal pole realization onto the
/// cascade of the identified system; t2 is not doubled-up in general.
struct IdentificationResult {
  StateSpace system;
  StateSpace alt_system;
  Mat t1;
  Mat t2;
  Mat t3;
  Mat relating_symplectic;
  IdentificationResiduals residuals;

  Mat assembled_similarity() const;
};

/// Reconstructs a physical model from a diagonal pole-residue realization of
/// the spectrum. Throws GlobalMinimalityError when a gram matrix is
/// singular (the spectrum admits a smaller realization) and
/// ConsistencyError when the reconstruction contradicts the input.
IdentificationResult reconstruct(const GilbertRealization& g,
                                 double tolerance = tol::structure);

/// Full chain: pole-residue decomposition of a minimal spectrum realization,
/// then gram-based reconstruction.
IdentificationResult identify(const StateSpaceRealization& src,
                              double tolerance = tol::structure);

/// End-to-end run from a model and a pure Gaussian input: reduce to vacuum,
/// require a Hurwitz and globally minimal reduced system, build its cascade
/// and identify. reduced is the vacuum-equivalent system whose spectrum was
/// identified.
struct ModelIdentification {
  StateSpace reduced;
  IdentificationResult result;
};

ModelIdentification identify_from_model(const StateSpace& ss, const GaussianInput& input,
                                        double tolerance = tol::structure);

}  // namespace qls
