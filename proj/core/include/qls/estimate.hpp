#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "qls/cascade.hpp"
#include "qls/model.hpp"

namespace qls {

/// Frequency samples of a power spectrum: strictly increasing real omegas
/// with one Hermitian PSD 2m x 2m matrix each. shots == 0 marks exact
/// (noise-free) samples; shots = K > 0 marks averaged draws with
/// O(K^{-1/2}) fluctuation around the true spectrum.
struct SpectrumDataset {
  std::vector<double> omegas;
  std::vector<Mat> samples;
  long shots = 0;
  std::uint64_t seed = 0;

  Index channels() const { return samples.empty() ? 0 : samples.front().rows() / 2; }
};

/// Throws StructureError or DimensionError when the dataset violates its
/// invariants (ordering, shapes, finiteness).
void validate_dataset(const SpectrumDataset& data);

/// Noise-free samples of the spectrum of ss for the given input covariance.
SpectrumDataset exact_dataset(const StateSpace& ss, const GaussianInput& input,
                              const std::vector<double>& omegas);

/// Statistical surrogate for measured spectra: each sample is an average of
/// `shots` rank-one draws whose expectation is the true spectrum (a Wishart
/// matrix scaled by 1/shots). Per-frequency generator streams are derived
/// from (seed, index), so any prefix of the grid is reproducible.
SpectrumDataset synthesize_dataset(const StateSpace& ss, const GaussianInput& input,
                                   const std::vector<double>& omegas, long shots,
                                   std::uint64_t seed);

/// Loewner-pencil fit of the samples as a rational matrix function
/// Psi(s) J = V_vac + (strictly proper part), interpolated at s = -i omega.
struct LoewnerFit {
  StateSpaceRealization realization;
  Index detected_order;
  std::vector<Cplx> poles;
  std::vector<double> singular_values;
};

/// Fits a minimal realization from the dataset. Exact data (shots == 0) is
/// split alternately into left/right interpolation sets and the pencil is
/// truncated at its numerical rank. Noisy data is fit over an ensemble of
/// contiguous left/right partitions, with the order chosen by cross
/// validation over multiples of four (rotating held-out frequencies, best
/// ensemble member per fold). When expected_order is given and the detected
/// order differs, throws OrderError carrying the detected value.
LoewnerFit fit_realization(const SpectrumDataset& data,
                           std::optional<Index> expected_order = std::nullopt);

}  // namespace qls
